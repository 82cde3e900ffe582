//! Seeded random W-data and the corpus-wide audit.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{nonexistence_audit, AuditReport, Verdict};
use crate::expr::{parse, Expr};
use crate::fixtures;
use crate::oracle::{crosscheck, CrossEntry};
use crate::singular::{singular_scan, ScanOptions};
use crate::surface::{Domain, WData};

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzCase {
    pub index: usize,
    pub wdata: WData,
    pub domain: Domain,
    /// Short description of how the case was drawn.
    pub origin: String,
}

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    // quarter steps keep the printed data short and exact
    (rng.random_range(-8i32..=8) as f64) / 4.0
}

fn poly(rng: &mut ChaCha8Rng, x: &str, max_deg: usize) -> String {
    let deg = rng.random_range(1..=max_deg);
    let mut terms = vec![format!("{}", coeff(rng))];
    for d in 1..=deg {
        let c = coeff(rng);
        if c != 0.0 {
            terms.push(format!("({c})*{x}^{d}"));
        }
    }
    terms.join(" + ")
}

fn trig(rng: &mut ChaCha8Rng, x: &str) -> String {
    let f = if rng.random_bool(0.5) { "sin" } else { "cos" };
    let freq = rng.random_range(1..=3);
    format!("{} + ({})*{f}({freq}*{x} + {})", coeff(rng), coeff(rng), coeff(rng))
}

fn side(rng: &mut ChaCha8Rng, x: &str) -> (String, String) {
    let g = if rng.random_bool(0.6) { poly(rng, x, 4) } else { trig(rng, x) };
    let w = match rng.random_range(0..4) {
        0 => "1".to_string(),
        1 => trig(rng, x),
        _ => poly(rng, x, 2),
    };
    (g, w)
}

fn generic(rng: &mut ChaCha8Rng) -> Option<WData> {
    let (g1, w1) = side(rng, "u");
    let (g2, w2) = side(rng, "v");
    WData::parse(&g1, &g2, &w1, &w2).ok()
}

/// A fixture moved by affine reparametrizations `u = a s + b`, `v = c t + d`,
/// an associate rotation and possibly conjugation.
fn structured(rng: &mut ChaCha8Rng) -> (WData, Domain, String) {
    let pool = fixtures::all();
    let f = &pool[rng.random_range(0..pool.len())];
    let mut w = f.wdata.clone();
    let mut label = f.name.clone();
    if rng.random_bool(0.3) {
        w = w.conjugate();
        label.push_str("+conj");
    }
    if rng.random_bool(0.5) {
        let theta = coeff(rng) / 4.0;
        w = w.associate(theta);
        label.push_str(&format!("+assoc({theta})"));
    }
    let a = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(2..=8) as f64 / 4.0;
    let c = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(2..=8) as f64 / 4.0;
    let (b, d) = (coeff(rng) / 2.0, coeff(rng) / 2.0);
    let sub = |e: &Expr, s: f64, t: f64| e.affine_substitute(s, t);
    let scaled = |e: &Expr, s: f64, t: f64| Expr::Const(s) * sub(e, s, t);
    let moved = WData {
        g1: sub(&w.g1, a, b),
        g2: sub(&w.g2, c, d),
        w1: scaled(&w.w1, a, b),
        w2: scaled(&w.w2, c, d),
        base: ((w.base.0 - b) / a, (w.base.1 - d) / c),
        f0: w.f0,
    };
    let back = |lo: f64, hi: f64, s: f64, t: f64| {
        let (x, y) = ((lo - t) / s, (hi - t) / s);
        (x.min(y), x.max(y))
    };
    let dom = Domain::new(back(f.domain.u.0, f.domain.u.1, a, b), back(f.domain.v.0, f.domain.v.1, c, d));
    (moved, dom, format!("{label}+affine({a},{b};{c},{d})"))
}

/// `count` cases from `seed`; about one in five is a transformed fixture.
pub fn corpus(seed: u64, count: usize) -> Vec<FuzzCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let index = out.len();
        if rng.random_bool(0.2) {
            let (wdata, domain, origin) = structured(&mut rng);
            out.push(FuzzCase {
                index,
                wdata,
                domain,
                origin,
            });
        } else if let Some(wdata) = generic(&mut rng) {
            out.push(FuzzCase {
                index,
                wdata,
                domain: Domain::new((-1.5, 1.5), (-1.5, 1.5)),
                origin: "random".into(),
            });
        }
    }
    out
}

/// Coarse settings that keep a thousand scans fast.
pub fn fuzz_scan_options() -> ScanOptions {
    ScanOptions {
        grid: (32, 32),
        curve_samples: 9,
        line_samples: 5,
        step: None,
        max_steps: 4000,
        root_scan: 256,
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub surfaces: usize,
    pub points: usize,
    pub verdicts: BTreeMap<String, usize>,
    pub audit: AuditReport,
    pub agreements: usize,
    /// Agreements outside the borderline band.
    pub strict_agreements: usize,
    pub disagreements: usize,
    pub uncovered: usize,
    pub borderline: usize,
    /// Covered, non-borderline entries where the engines differ.
    pub disagreeing: Vec<(usize, CrossEntry)>,
    /// Borderline entries where the engines differ.
    pub borderline_disagreeing: usize,
}

impl FuzzSummary {
    /// Agreement over covered, non-borderline points.
    pub fn agreement_rate(&self) -> f64 {
        let n = self.strict_agreements + self.disagreeing.len();
        if n == 0 {
            1.0
        } else {
            self.strict_agreements as f64 / n as f64
        }
    }
}

struct CaseResult {
    index: usize,
    verdicts: Vec<Verdict>,
    audit: AuditReport,
    entries: Vec<CrossEntry>,
}

fn run_case(case: &FuzzCase, opts: &ScanOptions) -> CaseResult {
    let scan = singular_scan(&case.wdata, &case.domain, opts);
    let points: Vec<_> = scan.singular_points().cloned().collect();
    let audit = nonexistence_audit(&case.wdata, &points);
    let cross = crosscheck(&case.wdata, &points);
    CaseResult {
        index: case.index,
        verdicts: cross.entries.iter().map(|e| e.verdict_wdata).collect(),
        audit,
        entries: cross.entries,
    }
}

/// Scan, classify, cross-check and audit every case.
pub fn run_fuzz(seed: u64, count: usize, opts: &ScanOptions) -> FuzzSummary {
    let cases = corpus(seed, count);
    let results: Vec<CaseResult> = cases.par_iter().map(|c| run_case(c, opts)).collect();
    let mut s = FuzzSummary {
        seed,
        surfaces: cases.len(),
        ..Default::default()
    };
    for r in results {
        s.points += r.verdicts.len();
        for v in &r.verdicts {
            let key = match v {
                Verdict::CandidateHigherCusp(_) => "CandidateHigherCusp".to_string(),
                other => other.to_string(),
            };
            *s.verdicts.entry(key).or_default() += 1;
        }
        s.audit.merge(r.audit);
        for e in r.entries {
            if !e.covered {
                s.uncovered += 1;
                continue;
            }
            if e.borderline {
                s.borderline += 1;
            }
            match (e.agree, e.borderline) {
                (true, b) => {
                    s.agreements += 1;
                    s.strict_agreements += !b as usize;
                }
                (false, true) => {
                    s.disagreements += 1;
                    s.borderline_disagreeing += 1;
                }
                (false, false) => {
                    s.disagreements += 1;
                    s.disagreeing.push((r.index, e));
                }
            }
        }
    }
    s
}

/// The generator as a spec-file string, for replaying one case.
pub fn case_wdata_strings(case: &FuzzCase) -> [String; 4] {
    [&case.wdata.g1, &case.wdata.g2, &case.wdata.w1, &case.wdata.w2].map(|e| e.to_string())
}

/// Sanity hook used by tests: every printed case parses back.
pub fn reparse(case: &FuzzCase) -> bool {
    case_wdata_strings(case).iter().all(|s| parse(s).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a = corpus(7, 40);
        let b = corpus(7, 40);
        assert_eq!(a, b);
        assert_ne!(a, corpus(8, 40));
        assert!(a.iter().all(reparse));
        assert!(a.iter().any(|c| c.origin != "random"));
    }

    #[test]
    fn affine_moves_keep_verdicts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (w, dom, label) = structured(&mut rng);
            let r = singular_scan(&w, &dom, &fuzz_scan_options());
            let pts: Vec<_> = r.singular_points().cloned().collect();
            let a = nonexistence_audit(&w, &pts);
            assert!(a.violations.is_empty(), "{label}: {:?}", a.violations);
        }
    }

    #[test]
    fn small_run() {
        let s = run_fuzz(11, 30, &fuzz_scan_options());
        assert_eq!(s.surfaces, 30);
        assert!(s.audit.violations.is_empty(), "{:?}", s.audit.violations);
        assert!(s.agreement_rate() >= 0.99, "{:?}", s.disagreeing);
    }
}
