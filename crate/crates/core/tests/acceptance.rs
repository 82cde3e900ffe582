//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//!
//! Runs without the libtest harness so the lines show up in `cargo test`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minface::classify::{classify, classify_point, Verdict};
use minface::expr::parse;
use minface::fixtures::{self, Fixture};
use minface::fuzz::{fuzz_scan_options, run_fuzz};
use minface::oracle::{crosscheck, hessian_check, hks_25_check, oracle_classify, s1_constants, CrossEntry};
use minface::singular::{analyze_point, singular_scan, ScanOptions, SingularPoint};
use minface::surface::{area_density_factored, eval_local_frame, eval_position, linspace, WData};

const THETAS: [f64; 3] = [-1.0, 0.3, 1.0];

struct Outcome {
    ok: bool,
    detail: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome {
            ok: true,
            detail: String::new(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if !cond {
            self.ok = false;
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(s.as_ref());
    }

    fn budget(&mut self, took: Duration, limit: f64) {
        self.check(took.as_secs_f64() < limit, || {
            format!("runtime {:.2}s over the {limit}s budget", took.as_secs_f64())
        });
    }
}

fn scan_points(w: &WData, f: &Fixture, opts: &ScanOptions) -> Vec<SingularPoint> {
    singular_scan(w, &f.domain, opts).singular_points().cloned().collect()
}

fn criterion1() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let f = fixtures::enneper();
    let scan = singular_scan(&f.wdata, &f.domain, &ScanOptions::default());
    o.check(scan.curves.len() == 1, || format!("{} curves", scan.curves.len()));
    let resid = scan
        .curves
        .iter()
        .flat_map(|c| c.points.iter())
        .map(|&(u, v)| (u * v + 1.0).abs())
        .fold(0.0, f64::max);
    o.check(resid <= 1e-8, || format!("max |uv+1| = {resid:e}"));
    let pts: Vec<_> = scan.singular_points().collect();
    o.check(pts.len() == 41, || format!("{} samples", pts.len()));
    let mut sw = Vec::new();
    for sp in &pts {
        match classify_point(&f.wdata, sp).map(|c| c.verdict) {
            Ok(Verdict::CuspidalEdge) => {}
            Ok(Verdict::Swallowtail) => sw.push(sp.uv),
            other => o.check(false, || format!("{:?}: {other:?}", sp.uv)),
        }
    }
    o.check(
        sw.len() == 1 && (sw[0].0 - 1.0).abs() < 1e-8 && (sw[0].1 + 1.0).abs() < 1e-8,
        || format!("swallowtails at {sw:?}"),
    );
    // on uv = -1 the sum condition vanishes only at u = ±1
    o.check(sw.iter().all(|p| (p.0 * p.0 - 1.0).abs() < 1e-8), || "swallowtail off u = ±1".into());
    o.budget(t.elapsed(), 5.0);
    o.note(format!("max |uv+1| = {resid:.1e}, {} samples, {} swallowtail", pts.len(), sw.len()));
    o
}

fn criterion2() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let (b, bc) = fixtures::butterfly_pair();
    let mu = (1.0 + 5f64.sqrt()) / 2.0;
    match classify(&b.wdata, (0.0, 0.0)) {
        Ok(c) => {
            o.check(c.verdict == Verdict::CuspidalButterfly, || format!("butterfly: {}", c.verdict));
            let ns = c.trace.get("nested_sum").unwrap_or(f64::NAN);
            let diff = c.trace.get("diff").unwrap_or(f64::NAN);
            o.check((ns - 2.0).abs() <= 1e-8, || format!("nested sum {ns}"));
            o.check((diff.abs() - 4.0 / mu).abs() <= 1e-8, || format!("|diff| {}", diff.abs()));
            o.note(format!("nested sum {ns:.10}, |diff| {:.10}", diff.abs()));
        }
        Err(e) => o.check(false, || format!("butterfly: {e}")),
    }
    let sp_b = analyze_point(&b.wdata, (0.0, 0.0));
    let sp_c = analyze_point(&bc.wdata, (0.0, 0.0));
    match (sp_b, sp_c) {
        (Ok(sp_b), Ok(sp_c)) => {
            let c = classify_point(&bc.wdata, &sp_c).map(|c| c.verdict);
            o.check(c == Ok(Verdict::CuspidalS1Plus), || format!("conjugate: {c:?}"));
            for (w, sp, want) in [
                (&b.wdata, &sp_b, Verdict::CuspidalButterfly),
                (&bc.wdata, &sp_c, Verdict::CuspidalS1Plus),
            ] {
                let v = oracle_classify(w, sp).map(|r| r.verdict);
                o.check(v.as_ref().ok() == Some(&want), || format!("oracle {want}: {v:?}"));
            }
            match s1_constants(&bc.wdata, &sp_c) {
                Ok(s) => {
                    o.check(s.a * s.b > 0.0, || format!("AB = {}", s.a * s.b));
                    o.note(format!("AB = {:.4}", s.a * s.b));
                }
                Err(e) => o.check(false, || format!("s1 constants: {e}")),
            }
        }
        (a, b) => o.check(false, || format!("analyze: {:?} {:?}", a.err(), b.err())),
    }
    o.budget(t.elapsed(), 1.0);
    o
}

fn criterion3() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let f = fixtures::kksy_torus();
    let pts = scan_points(&f.wdata, &f, &ScanOptions::default());
    let q = PI / 4.0;
    let mut off = 0;
    let mut diag_d4 = 0;
    let mut seen = std::collections::BTreeSet::new();
    let mut diag_seen = std::collections::BTreeSet::new();
    for sp in &pts {
        let verdict = classify_point(&f.wdata, sp).map(|c| c.verdict);
        let (iu, iv) = ((sp.uv.0 / q).round() as i64, (sp.uv.1 / q).round() as i64);
        let on_lattice = (sp.uv.0 - iu as f64 * q).abs() < 1e-7
            && (sp.uv.1 - iv as f64 * q).abs() < 1e-7
            && iu % 2 == 1
            && iv % 2 == 1;
        let diagonal = on_lattice && iu == iv;
        if diagonal {
            diag_seen.insert(iu);
        }
        match verdict {
            Ok(Verdict::D4Plus) if diagonal => diag_d4 += 1,
            Ok(Verdict::D4Plus) if on_lattice => {
                off += 1;
                seen.insert((iu, iv));
                match hessian_check(&f.wdata, sp) {
                    Ok(h) => o.check(h.hess_det < 0.0, || format!("det Hess {} at {:?}", h.hess_det, sp.uv)),
                    Err(e) => o.check(false, || format!("hessian at {:?}: {e}", sp.uv)),
                }
            }
            Ok(Verdict::D4Plus) => o.check(false, || format!("D4Plus off the lattice at {:?}", sp.uv)),
            Err(e) if diagonal => o.check(false, || format!("diagonal {:?}: {e}", sp.uv)),
            _ => {}
        }
    }
    o.check(off == 12 && seen.len() == 12, || format!("{off} off-diagonal D4Plus ({} distinct)", seen.len()));
    o.check(diag_d4 == 0, || format!("{diag_d4} diagonal D4"));
    o.check(diag_seen.len() == 4, || format!("{} diagonal points located", diag_seen.len()));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (u, v) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        match (eval_position(&f.wdata, u, v), eval_position(&f.wdata, v, u)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).norm()),
            _ => o.check(false, || format!("position at ({u}, {v})")),
        }
    }
    o.check(worst <= 1e-9, || format!("folded symmetry off by {worst:e}"));
    o.budget(t.elapsed(), 10.0);
    o.note(format!("{off} D4Plus off the diagonal, {diag_d4} of {} on it, symmetry {worst:.1e}", diag_seen.len()));
    o
}

fn criterion4() -> Outcome {
    let mut o = Outcome::new();
    for (k, want) in [
        (1, Verdict::CuspidalEdge),
        (2, Verdict::Cusp25Edge),
        (3, Verdict::CandidateHigherCusp(3)),
    ] {
        let f = fixtures::cusp_generator(k).expect("k >= 1");
        let c = match classify(&f.wdata, (0.0, 0.0)) {
            Ok(c) => c,
            Err(e) => {
                o.check(false, || format!("k={k}: {e}"));
                continue;
            }
        };
        o.check(c.verdict == want, || format!("k={k}: {}", c.verdict));
        let q = c.trace.get("cusp25_quantity");
        match k {
            2 => {
                let q = q.unwrap_or(f64::NAN);
                o.check((q - 6.0).abs() <= 1e-10, || format!("k=2 quantity {q}"));
                let det = analyze_point(&f.wdata, (0.0, 0.0))
                    .ok()
                    .and_then(|sp| hks_25_check(&f.wdata, &sp).ok())
                    .map_or(f64::NAN, |h| h.det);
                o.check((det - 36.0).abs() <= 1e-8, || format!("k=2 hks det {det}"));
                o.note(format!("k=2 quantity {q}, hks {det:.10}"));
            }
            3 => {
                let q = q.unwrap_or(f64::NAN);
                o.check(q.abs() <= 1e-10, || format!("k=3 quantity {q}"));
            }
            _ => {}
        }
    }
    o
}

fn criterion5() -> Outcome {
    let mut o = Outcome::new();
    let opts = ScanOptions {
        grid: (64, 64),
        ..ScanOptions::default()
    };
    let mut checked = 0;
    for f in fixtures::all() {
        let mut pts: Vec<(f64, f64)> = f.expected.iter().map(|e| e.uv).collect();
        pts.extend(scan_points(&f.wdata, &f, &opts).iter().map(|sp| sp.uv));
        for p in pts {
            let Ok(base) = classify(&f.wdata, p).map(|c| c.verdict) else { continue };
            let conj = classify(&f.wdata.conjugate(), p).map(|c| c.verdict).ok();
            match base {
                Verdict::Cusp25Edge | Verdict::D4Plus => {
                    checked += 1;
                    o.check(conj == Some(base), || format!("{} {p:?}: {base} -> conjugate {conj:?}", f.name));
                    for th in THETAS {
                        let a = classify(&f.wdata.associate(th), p).map(|c| c.verdict).ok();
                        o.check(a == Some(base), || format!("{} {p:?}: {base} -> associate({th}) {a:?}", f.name));
                    }
                }
                Verdict::CuspidalButterfly | Verdict::CuspidalS1Plus => {
                    checked += 1;
                    let want = if base == Verdict::CuspidalButterfly {
                        Verdict::CuspidalS1Plus
                    } else {
                        Verdict::CuspidalButterfly
                    };
                    o.check(conj == Some(want), || format!("{} {p:?}: {base} -> conjugate {conj:?}", f.name));
                }
                _ => {}
            }
        }
    }
    o.check(checked > 0, || "nothing to check".into());
    o.note(format!("{checked} points, {} exceptions", o.failures.len()));
    o
}

fn criteria6_and_8(fuzz_secs: &mut f64) -> (Outcome, Outcome) {
    let mut o6 = Outcome::new();
    let mut o8 = Outcome::new();
    let t = Instant::now();
    let s = run_fuzz(2024, 1000, &fuzz_scan_options());
    let took = t.elapsed();
    *fuzz_secs = took.as_secs_f64();
    for key in s.verdicts.keys() {
        let lower = key.to_lowercase();
        o6.check(!lower.contains("minus") && !lower.contains("lips"), || format!("verdict {key}"));
    }
    o6.check(s.surfaces == 1000, || format!("{} surfaces", s.surfaces));
    o6.check(s.audit.violations.is_empty(), || format!("violations {:?}", s.audit.violations));
    o6.check(s.audit.s1_checks > 0 && s.audit.hessian_checks > 0, || {
        format!("audit ran {} S1 and {} Hessian checks", s.audit.s1_checks, s.audit.hessian_checks)
    });
    o6.budget(took, 60.0);
    o6.note(format!(
        "{} points, {} S1 checks, {} Hessian checks, {} violations, {:.1}s",
        s.points,
        s.audit.s1_checks,
        s.audit.hessian_checks,
        s.audit.violations.len(),
        took.as_secs_f64()
    ));

    // every fixture point, expected and scanned
    let mut fixture_disagree: Vec<(String, CrossEntry)> = Vec::new();
    let mut fixture_points = 0;
    let opts = ScanOptions {
        grid: (64, 64),
        ..ScanOptions::default()
    };
    for f in fixtures::all() {
        let mut pts: Vec<SingularPoint> = f.expected.iter().filter_map(|e| analyze_point(&f.wdata, e.uv).ok()).collect();
        pts.extend(scan_points(&f.wdata, &f, &opts));
        let r = crosscheck(&f.wdata, &pts);
        fixture_points += r.entries.len();
        fixture_disagree.extend(r.disagreeing().map(|e| (f.name.clone(), e.clone())));
    }
    o8.check(fixture_disagree.is_empty(), || format!("{} fixture disagreements", fixture_disagree.len()));
    let rate = s.agreement_rate();
    o8.check(rate >= 0.99, || format!("fuzz agreement {:.4}", rate));

    let dump = serde_json::json!({
        "fixtures": fixture_disagree,
        "fuzz": s.disagreeing,
        "fuzz_borderline_disagreements": s.borderline_disagreeing,
    });
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("engine_disagreements.json");
    let dumped = std::fs::write(&path, serde_json::to_string_pretty(&dump).expect("serializes")).is_ok();
    o8.check(dumped, || format!("could not write {}", path.display()));
    o8.note(format!(
        "{fixture_points} fixture points, {} disagree; fuzz {:.2}% of {} strict points, {} borderline, {} uncovered; dump {}",
        fixture_disagree.len(),
        100.0 * rate,
        s.strict_agreements + s.disagreeing.len(),
        s.borderline,
        s.uncovered,
        path.display()
    ));
    (o6, o8)
}

/// Fornberg weights for derivatives `0..=m` at `z` on the given nodes.
fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let (mut c1, mut c4) = (1.0, x[0] - z);
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let (mut c2, c5) = (1.0, c4);
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivative of order `k` from a wide central finite-difference stencil.
fn fd_derivative(f: &dyn Fn(f64) -> f64, x0: f64, k: usize) -> f64 {
    let h = 0.06;
    let nodes: Vec<f64> = (-8..=8).map(|i| x0 + i as f64 * h).collect();
    let w = fornberg(x0, &nodes, k);
    nodes.iter().zip(&w).map(|(&x, wi)| wi[k] * f(x)).sum()
}

fn random_function(rng: &mut ChaCha8Rng) -> String {
    let c = |rng: &mut ChaCha8Rng| (rng.random_range(-8i32..=8) as f64) / 4.0;
    let mut terms = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let t = match rng.random_range(0..5) {
            0 => format!("({})*u^{}", c(rng), rng.random_range(1..=4)),
            1 => format!("({})*sin({}*u + {})", c(rng), rng.random_range(1..=2), c(rng)),
            2 => format!("({})*cos({}*u)", c(rng), rng.random_range(1..=2)),
            3 => format!("({})*exp({}*u)", c(rng), c(rng) / 2.0),
            _ => format!("({})/(2 + sin(u))", c(rng)),
        };
        terms.push(t);
    }
    terms.join(" + ")
}

fn criterion7() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let src = random_function(&mut rng);
        let e = parse(&src).expect("generated expression parses");
        let x0 = rng.random_range(-1.0..1.0);
        let jet = e.eval_jet(x0, 5).expect("smooth expression");
        let f = |x: f64| e.eval_value(x).expect("smooth expression");
        for k in 1..=5 {
            let a = jet.derive(k).expect("order 5");
            let b = fd_derivative(&f, x0, k);
            let rel = (a - b).abs() / a.abs().max(1.0);
            worst_rel = worst_rel.max(rel);
            o.check(rel <= 1e-6, || format!("{src} at {x0}, order {k}: jet {a}, fd {b}"));
        }
    }
    o.note(format!("jet vs fd {worst_rel:.1e}"));

    let surfaces = [
        fixtures::enneper(),
        fixtures::kksy_torus(),
        fixtures::butterfly_pair().0,
        fixtures::d4(),
        fixtures::beaks(),
        fixtures::ccr(),
    ];
    let (mut lam, mut unit, mut orth, mut wave) = (0f64, 0f64, 0f64, 0f64);
    for f in &surfaces {
        let d = &f.domain;
        for u in linspace(d.u.0, d.u.1, 50) {
            for v in linspace(d.v.0, d.v.1, 50) {
                let (Ok(fr), Ok(a)) = (eval_local_frame(&f.wdata, u, v), area_density_factored(&f.wdata, u, v)) else {
                    continue;
                };
                let scale = (fr.fu.norm() * fr.fv.norm()).max(1.0);
                lam = lam.max((fr.lambda - a.product()).abs() / scale);
                unit = unit.max((fr.n.norm() - 1.0).abs());
                let fs = fr.fu.norm().max(fr.fv.norm()).max(1.0);
                orth = orth.max(fr.n.dot(&fr.fu).abs().max(fr.n.dot(&fr.fv).abs()) / fs);
            }
        }
        let h = 1e-3;
        for u in linspace(d.u.0 + 0.01, d.u.1 - 0.01, 12) {
            for v in linspace(d.v.0 + 0.01, d.v.1 - 0.01, 12) {
                let p = |a: f64, b: f64| eval_position(&f.wdata, a, b);
                let (Ok(pp), Ok(pm), Ok(mp), Ok(mm), Ok(c)) =
                    (p(u + h, v + h), p(u + h, v - h), p(u - h, v + h), p(u - h, v - h), p(u, v))
                else {
                    continue;
                };
                let mixed = (pp - pm - mp + mm).norm() / (4.0 * h * h);
                wave = wave.max(mixed / c.norm().max(1.0));
            }
        }
    }
    o.check(lam <= 1e-10, || format!("lambda identity off by {lam:e}"));
    o.check(unit <= 1e-10, || format!("|n| off by {unit:e}"));
    o.check(orth <= 1e-10, || format!("orthogonality off by {orth:e}"));
    o.check(wave <= 1e-6, || format!("f_uv = {wave:e}"));
    o.note(format!("lambda {lam:.1e}, |n| {unit:.1e}, orth {orth:.1e}, f_uv {wave:.1e}"));
    o
}

fn main() {
    let mut fuzz_secs = 0.0;
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let timed = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (n, name, o, t.elapsed().as_secs_f64())
    };
    results.push(timed(1, "Enneper cuspidal edges and swallowtail", &mut criterion1));
    results.push(timed(2, "butterfly pair", &mut criterion2));
    results.push(timed(3, "KKSY torus D4+ points", &mut criterion3));
    results.push(timed(4, "(2,2k+1) cusp generator", &mut criterion4));
    results.push(timed(5, "conjugate and associate invariance", &mut criterion5));
    let t = Instant::now();
    let (o6, o8) = criteria6_and_8(&mut fuzz_secs);
    let rest = t.elapsed().as_secs_f64() - fuzz_secs;
    results.push((6, "nonexistence fuzzing", o6, fuzz_secs));
    results.push(timed(7, "numerical foundations", &mut criterion7));
    results.push((8, "engine agreement", o8, rest));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (n, name, o, secs) in &results {
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!("criterion {n} {tag} ({secs:.2}s) {name}: {}", o.detail);
        for f in o.failures.iter().take(10) {
            println!("    {f}");
        }
        failed += !o.ok as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
