//! Worked examples with known singularity types.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::classify::Verdict;
use crate::expr::parse;
use crate::specfile::{DomainBlock, FormName, NullCurvesBlock, OptionsBlock, SurfaceSpec};
use crate::surface::{from_null_curves, CurveForm, Domain, NullCurvePair, WData};

/// Where an expected verdict comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Basis {
    /// Stated for this surface in the literature.
    Published,
    /// Worked out by hand from the criteria.
    Derived,
    /// Immediate from the construction.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expected {
    pub uv: (f64, f64),
    pub verdict: Verdict,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub wdata: WData,
    /// Original null curves when the surface was given that way.
    pub nullcurves: Option<NullCurvePair>,
    pub domain: Domain,
    pub expected: Vec<Expected>,
    pub notes: &'static str,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureError {
    #[error("cusp generator needs k >= 1, got {0}")]
    InvalidK(i64),
    #[error("unknown fixture `{0}`")]
    Unknown(String),
}

fn wd(g1: &str, g2: &str, w1: &str, w2: &str) -> WData {
    WData::parse(g1, g2, w1, w2).expect("fixture data parses")
}

fn exp(uv: (f64, f64), verdict: Verdict, basis: Basis) -> Expected {
    Expected { uv, verdict, basis }
}

impl Fixture {
    /// Spec file content reproducing this fixture.
    pub fn spec(&self) -> SurfaceSpec {
        let mut s = SurfaceSpec::from_wdata(Some(&self.name), &self.wdata, Some(&self.domain));
        if let Some(nc) = &self.nullcurves {
            s.wdata = None;
            s.nullcurves = Some(NullCurvesBlock {
                phi: nc.phi.clone().map(|e| e.to_string()),
                psi: nc.psi.clone().map(|e| e.to_string()),
                form: match nc.form {
                    CurveForm::Position => FormName::Position,
                    CurveForm::Velocity => FormName::Velocity,
                },
                base: Some([nc.base.0, nc.base.1]),
                f0: nc.f0.map(|f| [f[0], f[1], f[2]]),
            });
        }
        if let Some(d) = s.domain.as_mut() {
            *d = DomainBlock {
                grid: [64, 64],
                ..d.clone()
            };
        }
        s.options = OptionsBlock::default();
        s
    }

    /// Same surface under `ω̂2 ↦ −ω̂2`, with expected verdicts mapped through
    /// the butterfly/S1⁺ duality.
    pub fn conjugate(&self) -> Fixture {
        let swap = |v: Verdict| match v {
            Verdict::CuspidalButterfly => Verdict::CuspidalS1Plus,
            Verdict::CuspidalS1Plus => Verdict::CuspidalButterfly,
            other => other,
        };
        Fixture {
            name: format!("{}_conjugate", self.name),
            wdata: self.wdata.conjugate(),
            nullcurves: None,
            domain: self.domain,
            expected: self
                .expected
                .iter()
                .filter(|e| !matches!(e.verdict, Verdict::CuspidalEdge | Verdict::Swallowtail))
                .map(|e| Expected {
                    verdict: swap(e.verdict),
                    ..*e
                })
                .collect(),
            notes: self.notes,
        }
    }
}

/// Timelike Enneper surface from its two null curves. Singular set `uv = −1`.
pub fn enneper() -> Fixture {
    let nc = NullCurvePair {
        phi: ["-u - u^3/3", "u - u^3/3", "u^2"].map(|s| parse(s).unwrap()),
        psi: ["v + v^3/3", "v - v^3/3", "v^2"].map(|s| parse(s).unwrap()),
        form: CurveForm::Position,
        base: (1.0, -1.0),
        f0: None,
    };
    let domain = Domain::new((0.5, 2.0), (-2.0, -0.5));
    let wdata = from_null_curves(&nc, &domain).expect("Enneper curves are null");
    Fixture {
        name: "enneper".into(),
        wdata,
        nullcurves: Some(nc),
        domain,
        expected: vec![
            exp((1.0, -1.0), Verdict::Swallowtail, Basis::Derived),
            exp((2.0, -0.5), Verdict::CuspidalEdge, Basis::Derived),
            exp((0.5, -2.0), Verdict::CuspidalEdge, Basis::Derived),
        ],
        notes: "only cuspidal edges and swallowtails along uv = -1",
    }
}

/// Cuspidal butterfly at the origin, and its conjugate with a cuspidal S1⁺.
pub fn butterfly_pair() -> (Fixture, Fixture) {
    // sinh φ = 1/2, cosh φ = √5/2, μ = cosh φ + sinh φ
    let mu = "((1 + sqrt(5))/2)";
    let den = "(sin(v) - sqrt(5)/2 - cos(v)/2)";
    let w = wd(
        "-cos(u)/(1 + sin(u))",
        &format!("(1/2 + cos(v)*sqrt(5)/2)/{den}"),
        &format!("-{mu}/2*(1 + sin(u))"),
        &format!("{den}/(2*{mu})"),
    );
    let f = Fixture {
        name: "butterfly".into(),
        wdata: w,
        nullcurves: None,
        domain: Domain::new((-0.5, 0.5), (-0.5, 0.5)),
        expected: vec![exp((0.0, 0.0), Verdict::CuspidalButterfly, Basis::Published)],
        notes: "nested sum 2 and sum -4/mu at the origin",
    };
    let c = f.conjugate();
    (f, c)
}

fn rank0_points() -> Vec<(f64, f64, bool)> {
    let mut out = Vec::new();
    for k in 0..4 {
        for l in 0..4 {
            let u = (1 + 2 * k) as f64 * PI / 4.0;
            let v = (1 + 2 * l) as f64 * PI / 4.0;
            out.push((u, v, k == l));
        }
    }
    out
}

/// Torus with twelve D4⁺ points off the diagonal; `g1 g2 = 1` on the four
/// diagonal ones.
pub fn kksy_torus() -> Fixture {
    let wdata = wd(
        "sin(u)/(cos(u)-1)",
        "-sin(v)/(cos(v)+1)",
        "cos(2*u)*(cos(u)-1)/2",
        "cos(2*v)*(cos(v)+1)/2",
    )
    .with_base(PI / 2.0, PI / 2.0);
    let expected = rank0_points()
        .into_iter()
        .map(|(u, v, diag)| {
            let verdict = if diag { Verdict::Unclassified } else { Verdict::D4Plus };
            exp((u, v), verdict, Basis::Published)
        })
        .collect();
    Fixture {
        name: "kksy".into(),
        wdata,
        nullcurves: None,
        domain: Domain::new((0.0, 2.0 * PI), (0.0, 2.0 * PI)),
        expected,
        notes: "folded symmetry f(v,u) = f(u,v)",
    }
}

/// The closed null curve `∫ (1, cos 3s, sin 3s) cos 2s ds` on both sides.
pub fn intro_torus() -> Fixture {
    let vel = |x: &str| {
        [
            format!("cos(2*{x})"),
            format!("cos(3*{x})*cos(2*{x})"),
            format!("sin(3*{x})*cos(2*{x})"),
        ]
        .map(|s| parse(&s).unwrap())
    };
    let nc = NullCurvePair {
        phi: vel("u"),
        psi: vel("v"),
        form: CurveForm::Velocity,
        base: (PI / 2.0, PI / 2.0),
        f0: None,
    };
    let domain = Domain::new((0.0, 2.0 * PI), (0.0, 2.0 * PI));
    let wdata = from_null_curves(&nc, &domain).expect("torus curves are null");
    let expected = rank0_points()
        .into_iter()
        .filter(|p| !p.2)
        .map(|(u, v, _)| exp((u, v), Verdict::D4Plus, Basis::Derived))
        .collect();
    Fixture {
        name: "intro_torus".into(),
        wdata,
        nullcurves: Some(nc),
        domain,
        expected,
        notes: "W-data recovered from velocities; g has poles where cos 3s = 1 or -1",
    }
}

fn cusp_expected(k: u32) -> Verdict {
    match k {
        1 => Verdict::CuspidalEdge,
        2 => Verdict::Cusp25Edge,
        _ => Verdict::CandidateHigherCusp(k),
    }
}

/// `g1 = 0, ω̂1 = 1, g2 = v^(2k−1), ω̂2 = v`: a (2, 2k+1)-cuspidal edge along `v = 0`.
pub fn cusp_generator(k: i64) -> Result<Fixture, FixtureError> {
    cusp_family(k, "0", "cusp")
}

/// [`cusp_generator`] with `g1 = u`.
pub fn cusp_generator_alt(k: i64) -> Result<Fixture, FixtureError> {
    cusp_family(k, "u", "cusp_alt")
}

fn cusp_family(k: i64, g1: &str, stem: &str) -> Result<Fixture, FixtureError> {
    if k < 1 {
        return Err(FixtureError::InvalidK(k));
    }
    let k32 = k as u32;
    let basis = if k32 <= 2 { Basis::Derived } else { Basis::Published };
    Ok(Fixture {
        name: format!("{stem}{k}"),
        wdata: wd(g1, &format!("v^{}", 2 * k - 1), "1", "v"),
        nullcurves: None,
        domain: Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        expected: vec![
            exp((0.0, 0.0), cusp_expected(k32), basis),
            exp((0.5, 0.0), cusp_expected(k32), basis),
        ],
        notes: "k >= 3 is reported as a candidate only",
    })
}

pub fn beaks() -> Fixture {
    Fixture {
        name: "beaks".into(),
        wdata: wd("exp(u)", "exp(v)", "1", "v"),
        nullcurves: None,
        domain: Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        expected: vec![exp((0.0, 0.0), Verdict::CuspidalBeaks, Basis::Derived)],
        notes: "all beaks conditions equal 1 at the origin",
    }
}

pub fn d4() -> Fixture {
    Fixture {
        name: "d4".into(),
        wdata: wd("u", "v", "u", "v"),
        nullcurves: None,
        domain: Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        expected: vec![exp((0.0, 0.0), Verdict::D4Plus, Basis::Derived)],
        notes: "all D4 conditions equal 1 at the origin",
    }
}

/// A timelike plane; no singular points.
pub fn flat() -> Fixture {
    Fixture {
        name: "flat".into(),
        wdata: wd("0", "0", "1", "1"),
        nullcurves: None,
        domain: Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        expected: vec![],
        notes: "regular everywhere",
    }
}

/// `g1 = e^u, g2 = e^v, ω̂ = 1`: singular along `u + v = 0`, cross cap at the origin.
pub fn ccr() -> Fixture {
    Fixture {
        name: "ccr".into(),
        wdata: wd("exp(u)", "exp(v)", "1", "1"),
        nullcurves: None,
        domain: Domain::new((-1.0, 1.0), (-1.0, 1.0)),
        expected: vec![
            exp((0.0, 0.0), Verdict::CuspidalCrossCap, Basis::Derived),
            exp((0.5, -0.5), Verdict::CuspidalEdge, Basis::Derived),
        ],
        notes: "the two varphi agree only at the origin",
    }
}

/// Every built-in fixture.
pub fn all() -> Vec<Fixture> {
    let (b, bc) = butterfly_pair();
    let mut v = vec![enneper(), b, bc, kksy_torus(), intro_torus()];
    for k in 1..=3 {
        v.push(cusp_generator(k).unwrap());
        v.push(cusp_generator_alt(k).unwrap());
    }
    v.extend([beaks(), d4(), d4().conjugate(), flat(), ccr()]);
    v
}

pub fn by_name(name: &str) -> Result<Fixture, FixtureError> {
    all()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| FixtureError::Unknown(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::oracle::oracle_classify;
    use crate::singular::analyze_point;
    use crate::surface::eval_position;

    #[test]
    fn every_expected_verdict_on_both_engines() {
        for f in all() {
            for e in &f.expected {
                let c = classify(&f.wdata, e.uv).unwrap_or_else(|err| panic!("{} {:?}: {err}", f.name, e.uv));
                assert_eq!(c.verdict, e.verdict, "{} at {:?}: {:?}", f.name, e.uv, c.trace);
                if let Verdict::CandidateHigherCusp(_) = e.verdict {
                    continue;
                }
                let sp = analyze_point(&f.wdata, e.uv).unwrap();
                let o = oracle_classify(&f.wdata, &sp).unwrap();
                assert_eq!(o.verdict, e.verdict, "oracle {} at {:?}: {:?}", f.name, e.uv, o.trace);
            }
        }
    }

    #[test]
    fn butterfly_values() {
        let (b, _) = butterfly_pair();
        let c = classify(&b.wdata, (0.0, 0.0)).unwrap();
        let mu = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((c.trace.get("nested_sum").unwrap() - 2.0).abs() < 1e-8, "{:?}", c.trace);
        assert!((c.trace.get("diff").unwrap().abs() - 4.0 / mu).abs() < 1e-8, "{:?}", c.trace);
    }

    #[test]
    fn kksy_symmetries() {
        let f = kksy_torus();
        let conj = f.wdata.conjugate();
        for (u, v) in [(0.3, 2.0), (1.1, 4.4), (5.9, 0.7)] {
            let a = eval_position(&f.wdata, u, v).unwrap();
            let b = eval_position(&f.wdata, v, u).unwrap();
            assert!((a - b).norm() < 1e-9);
            let a = eval_position(&conj, u, v).unwrap();
            let b = eval_position(&conj, v, u).unwrap();
            assert!((a + b).norm() < 1e-9);
        }
    }

    #[test]
    fn spec_roundtrip() {
        for f in all() {
            let s = f.spec();
            let back = SurfaceSpec::from_toml(&s.to_toml()).unwrap();
            let w = back.wdata().unwrap();
            let p = (f.domain.u.0 * 0.3 + f.domain.u.1 * 0.7, f.domain.v.0 * 0.6 + f.domain.v.1 * 0.4);
            let a = f.wdata.values(p.0, p.1).unwrap();
            let b = w.values(p.0, p.1).unwrap();
            assert!((a.g1 - b.g1).abs() < 1e-12 && (a.w2 - b.w2).abs() < 1e-12, "{}", f.name);
        }
    }

    #[test]
    fn guards() {
        assert_eq!(cusp_generator(0).unwrap_err(), FixtureError::InvalidK(0));
        assert!(by_name("nope").is_err());
        assert_eq!(by_name("cusp2").unwrap().expected[0].verdict, Verdict::Cusp25Edge);
        assert_eq!(cusp_generator(5).unwrap().expected[0].verdict, Verdict::CandidateHigherCusp(5));
    }
}
