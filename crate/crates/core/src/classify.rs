//! Classification of singular points from the Weierstrass data.
//!
//! Every criterion quantity goes through a two-threshold test: zero when
//! `|q| ≤ 1e-9·max(1, scale)`, nonzero when `|q| ≥ 1e-6·max(1, scale)`, and
//! borderline in between. A borderline decision never produces a verdict.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::jets::{Jet, JetError, DEFAULT_ORDER};
use crate::quantities::{side_quantities, SideQuantities};
use crate::singular::{analyze_point, SingularError, SingularKind, SingularPoint};
use crate::surface::{big_lambda, WData};

pub const ZERO_TOL: f64 = 1e-9;
pub const NONZERO_TOL: f64 = 1e-6;

/// Diffeomorphism type of a singular point. Cuspidal S1⁻, cuspidal lips and
/// D4⁻ do not occur on these surfaces and have no variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    CuspidalEdge,
    Swallowtail,
    CuspidalCrossCap,
    CuspidalButterfly,
    CuspidalS1Plus,
    Cusp25Edge,
    CuspidalBeaks,
    D4Plus,
    /// `(2, 2k+1)`-cuspidal edge candidate, `k ≥ 3`; not certified.
    CandidateHigherCusp(u32),
    Unclassified,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CandidateHigherCusp(k) => write!(f, "CandidateHigherCusp({k})"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Verdict, String> {
        use Verdict::*;
        let plain = [
            CuspidalEdge,
            Swallowtail,
            CuspidalCrossCap,
            CuspidalButterfly,
            CuspidalS1Plus,
            Cusp25Edge,
            CuspidalBeaks,
            D4Plus,
            Unclassified,
        ];
        if let Some(v) = plain.iter().find(|v| v.to_string() == s) {
            return Ok(*v);
        }
        s.strip_prefix("CandidateHigherCusp(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|k| k.parse().ok())
            .map(CandidateHigherCusp)
            .ok_or_else(|| format!("unknown verdict `{s}`"))
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Zero,
    NonZero,
    Borderline,
}

pub fn decide(q: f64, scale: f64) -> Outcome {
    let s = scale.abs().max(1.0);
    if !q.is_finite() {
        Outcome::Borderline
    } else if q.abs() <= ZERO_TOL * s {
        Outcome::Zero
    } else if q.abs() >= NONZERO_TOL * s {
        Outcome::NonZero
    } else {
        Outcome::Borderline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Test {
    pub name: String,
    pub value: f64,
    pub scale: f64,
    pub outcome: Outcome,
}

/// Every value consulted on the way to a verdict.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CriterionTrace {
    pub values: BTreeMap<String, f64>,
    pub tests: Vec<Test>,
    /// Failed or unresolved conditions; nonempty for `Unclassified`.
    pub reasons: Vec<String>,
}

impl CriterionTrace {
    pub fn from_point(sp: &SingularPoint) -> CriterionTrace {
        CriterionTrace {
            values: sp.margins.clone(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn test(&mut self, name: &str, value: f64, scale: f64) -> Outcome {
        let outcome = decide(value, scale);
        self.set(name, value);
        self.tests.push(Test {
            name: name.to_string(),
            value,
            scale,
            outcome,
        });
        if outcome == Outcome::Borderline {
            self.fail(format!("{name} = {value:e} is borderline"));
        }
        outcome
    }

    pub fn outcome(&self, name: &str) -> Option<Outcome> {
        self.tests.iter().rev().find(|t| t.name == name).map(|t| t.outcome)
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.reasons.push(reason.into());
    }

    pub fn is_borderline(&self) -> bool {
        self.tests.iter().any(|t| t.outcome == Outcome::Borderline)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub trace: CriterionTrace,
}

impl Classification {
    fn done(verdict: Option<Verdict>, mut trace: CriterionTrace) -> Classification {
        let verdict = verdict.unwrap_or(Verdict::Unclassified);
        if verdict == Verdict::Unclassified && trace.reasons.is_empty() {
            trace.fail("no criterion matched");
        }
        Classification { verdict, trace }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Singular(#[from] SingularError),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

fn jets_at(w: &WData, p: (f64, f64)) -> Result<crate::surface::PointJets, ClassifyError> {
    w.jets(p.0, p.1, DEFAULT_ORDER)
        .map_err(|e| ClassifyError::Singular(e.into()))
}

fn c(j: &Jet, k: usize) -> f64 {
    j.coeffs().get(k).copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinfaceQuantities {
    pub side1: SideQuantities,
    pub side2: SideQuantities,
}

/// `φi`, `phi_i`, `Phi_i` for both sides at `p`.
pub fn minface_quantities(w: &WData, p: (f64, f64)) -> Result<MinfaceQuantities, ClassifyError> {
    let j = jets_at(w, p)?;
    let side = |g: &Jet, om: &Jet, i: u8| {
        side_quantities(g, om)
            .map_err(|e| ClassifyError::Precondition(format!("varphi{i} is not finite: {e}")))
    };
    Ok(MinfaceQuantities {
        side1: side(&j.g1, &j.w1, 1)?,
        side2: side(&j.g2, &j.w2, 2)?,
    })
}

fn record_side(t: &mut CriterionTrace, i: u8, s: &SideQuantities) {
    t.set(&format!("varphi{i}"), s.varphi);
    if let Some(v) = s.phi {
        t.set(&format!("phi{i}"), v);
    }
    if let Some(v) = s.big_phi {
        t.set(&format!("Phi{i}"), v);
    }
}

/// Cuspidal edge / swallowtail / cross cap / butterfly / S1⁺ at a
/// non-degenerate point of `g1 g2 = 1` away from the ω-lines.
pub fn classify_g_point(w: &WData, sp: &SingularPoint) -> Result<Classification, ClassifyError> {
    if !sp.is_pure_g() || sp.rank != 1 || sp.is_degenerate {
        return Err(ClassifyError::Precondition(
            "expected a non-degenerate rank-one g-singular point off the omega-lines".into(),
        ));
    }
    let q = minface_quantities(w, sp.uv)?;
    let (s1, s2) = (&q.side1, &q.side2);
    let mut t = CriterionTrace::from_point(sp);
    record_side(&mut t, 1, s1);
    record_side(&mut t, 2, s2);
    let vs = s1.varphi.abs().max(s2.varphi.abs());
    let diff = t.test("diff", s1.varphi - s2.varphi, vs);
    let sum = t.test("sum", s1.varphi + s2.varphi, vs);
    use Outcome::*;
    let nested = |t: &mut CriterionTrace, sign: f64, first: &str, second: &str| -> Option<(Outcome, Outcome)> {
        let (Some(p1), Some(p2)) = (s1.phi, s2.phi) else {
            t.fail("phi1 or phi2 is unresolved");
            return None;
        };
        let d = t.test(first, p1 + sign * p2, p1.abs().max(p2.abs()));
        if d != Zero {
            return Some((d, Zero));
        }
        let (Some(q1), Some(q2)) = (s1.big_phi, s2.big_phi) else {
            t.fail("Phi1 or Phi2 is unresolved");
            return None;
        };
        let n = t.test(second, q1 - sign * q2, q1.abs().max(q2.abs()));
        Some((d, n))
    };
    let verdict = match (diff, sum) {
        (NonZero, NonZero) => Some(Verdict::CuspidalEdge),
        (NonZero, Zero) => match nested(&mut t, -1.0, "D", "nested_sum") {
            Some((NonZero, _)) => Some(Verdict::Swallowtail),
            Some((Zero, NonZero)) => Some(Verdict::CuspidalButterfly),
            Some((Zero, Zero)) => {
                t.fail("D and the nested sum both vanish");
                None
            }
            _ => None,
        },
        (Zero, NonZero) => match nested(&mut t, 1.0, "D_plus", "nested_diff") {
            Some((NonZero, _)) => Some(Verdict::CuspidalCrossCap),
            Some((Zero, NonZero)) => {
                let (w1, w2) = (sp.margin("w1").unwrap_or(0.0), sp.margin("w2").unwrap_or(0.0));
                let (g1u, g2v) = (sp.margin("g1_u").unwrap_or(0.0), sp.margin("g2_v").unwrap_or(0.0));
                let big = t.get("nested_diff").unwrap_or(0.0);
                let a = -0.5 * w1 * w2 * g1u * g1u * g2v * g2v * (s1.varphi + s2.varphi) * big;
                let b = -48.0 * w1 * w2 * s1.varphi.powi(5) * big;
                t.set("A", a);
                t.set("B", b);
                t.set("AB_product", a * b);
                Some(Verdict::CuspidalS1Plus)
            }
            Some((Zero, Zero)) => {
                t.fail("D_plus and the nested difference both vanish");
                None
            }
            _ => None,
        },
        (Zero, Zero) => {
            t.fail("varphi1 and varphi2 both vanish");
            None
        }
        _ => None,
    };
    Ok(Classification::done(verdict, t))
}

/// The vanishing side at an ω-point and the opposite side, as jets.
struct Sides {
    g: Jet,
    om: Jet,
    g_other: Jet,
    om_other: Jet,
    name: &'static str,
}

fn sides(w: &WData, sp: &SingularPoint) -> Result<Sides, ClassifyError> {
    let j = jets_at(w, sp.uv)?;
    Ok(if sp.has(SingularKind::W2) {
        Sides {
            g: j.g2,
            om: j.w2,
            g_other: j.g1,
            om_other: j.w1,
            name: "v",
        }
    } else {
        Sides {
            g: j.g1,
            om: j.w1,
            g_other: j.g2,
            om_other: j.w2,
            name: "u",
        }
    })
}

fn leading_index(j: &Jet) -> Option<usize> {
    let m = j.magnitude().max(1.0);
    j.coeffs().iter().position(|x| x.abs() > ZERO_TOL * m)
}

fn truncated(a: &Jet, b: &Jet) -> (Jet, Jet) {
    let k = a.order().min(b.order());
    (a.truncate(k), b.truncate(k))
}

/// `((g)'' / (ω̂)')'` at the point, in the variable of the vanishing side.
pub fn cusp25_quantity(g: &Jet, om: &Jet) -> Result<f64, JetError> {
    let gpp = g.derivative()?.derivative()?;
    let wp = om.derivative()?;
    let (n, d) = truncated(&gpp, &wp);
    n.div(&d)?.derive(1)
}

/// Cuspidal edge, (2,5)-cuspidal edge or a higher candidate at a
/// non-degenerate rank-one ω-point.
pub fn classify_w_rank1(w: &WData, sp: &SingularPoint) -> Result<Classification, ClassifyError> {
    let one_w = sp.has(SingularKind::W1) != sp.has(SingularKind::W2);
    if !one_w || sp.has(SingularKind::G) || sp.rank != 1 || sp.is_degenerate {
        return Err(ClassifyError::Precondition(
            "expected a non-degenerate rank-one omega-singular point off g1g2 = 1".into(),
        ));
    }
    let s = sides(w, sp)?;
    let mut t = CriterionTrace::from_point(sp);
    let x = s.name;
    let g = s.g.value();
    let gp = c(&s.g, 1);
    let front = t.test(&format!("g_{x}"), gp, g.abs());
    let verdict = match front {
        Outcome::NonZero => Some(Verdict::CuspidalEdge),
        Outcome::Borderline => None,
        Outcome::Zero => {
            let wp = c(&s.om, 1);
            let wpp = 2.0 * c(&s.om, 2);
            let gpp = 2.0 * c(&s.g, 2);
            let gppp = 6.0 * c(&s.g, 3);
            match cusp25_quantity(&s.g, &s.om) {
                Err(e) => {
                    t.fail(format!("cusp25 quantity unresolved: {e}"));
                    None
                }
                Ok(q) => {
                    let scale = (gppp / wp).abs().max((gpp * wpp / (wp * wp)).abs());
                    let one_minus = 1.0 - g * s.g_other.value();
                    t.set(
                        "hks_closed_form",
                        6.0 * s.om_other.value() * wp.powi(3) * one_minus * one_minus * q,
                    );
                    match t.test("cusp25_quantity", q, scale) {
                        Outcome::NonZero => Some(Verdict::Cusp25Edge),
                        Outcome::Borderline => None,
                        Outcome::Zero => higher_cusp(&mut t, &s),
                    }
                }
            }
        }
    };
    Ok(Classification::done(verdict, t))
}

/// `k` from the leading order `m` of `g'/ω̂`: `g = v^(2k−1)`, `ω̂ = v` gives
/// `m = 2k − 3`.
fn higher_cusp(t: &mut CriterionTrace, s: &Sides) -> Option<Verdict> {
    let ratio = s
        .g
        .derivative()
        .and_then(|gp| {
            let (a, b) = truncated(&gp, &s.om);
            a.div(&b)
        });
    match ratio.as_ref().ok().and_then(leading_index) {
        Some(m) if m % 2 == 1 && m >= 3 => {
            t.set("leading_order", m as f64);
            Some(Verdict::CandidateHigherCusp((m as u32 + 3) / 2))
        }
        Some(m) => {
            t.set("leading_order", m as f64);
            t.fail(format!("g'/w has even leading order {m}"));
            None
        }
        None => {
            t.fail("g'/w vanishes to the available order");
            None
        }
    }
}

/// Cuspidal beaks at a degenerate point of `g1 g2 = 1` on an ω-line.
pub fn classify_beaks(w: &WData, sp: &SingularPoint) -> Result<Classification, ClassifyError> {
    let one_w = sp.has(SingularKind::W1) != sp.has(SingularKind::W2);
    if !sp.is_degenerate || !sp.has(SingularKind::G) || !one_w || sp.rank != 1 {
        return Err(ClassifyError::Precondition(
            "expected a degenerate rank-one point on both g1g2 = 1 and one omega-line".into(),
        ));
    }
    let s = sides(w, sp)?;
    let mut t = CriterionTrace::from_point(sp);
    let (g, go) = (s.g.value(), s.g_other.value());
    let (gp, gop) = (c(&s.g, 1), c(&s.g_other, 1));
    let (wo, wp) = (s.om_other.value(), c(&s.om, 1));
    let ok = [
        t.test("w_other", wo, 1.0) == Outcome::NonZero,
        t.test("w_prime", wp, 1.0) == Outcome::NonZero,
        t.test("g1g2_minus_1", g * go - 1.0, (g * go).abs()) == Outcome::Zero,
        t.test("g1u_g2v", gp * gop, gp.abs().max(gop.abs())) == Outcome::NonZero,
    ];
    let big = big_lambda(g, go);
    // mixed and null-direction second derivatives of λ
    let l_mixed = -big * gop * g * wo * wp;
    let l_eta = -2.0 * big * go * gp * wo * wp;
    t.set("lambda_uv", l_mixed);
    t.set("eta_eta_lambda", l_eta);
    t.set("hess_det", -l_mixed * l_mixed);
    let verdict = if ok.iter().all(|&b| b) {
        Some(Verdict::CuspidalBeaks)
    } else {
        t.fail("beaks conditions do not all hold");
        None
    };
    Ok(Classification::done(verdict, t))
}

/// D4⁺ at a point where both ω̂ vanish.
pub fn classify_rank0(w: &WData, sp: &SingularPoint) -> Result<Classification, ClassifyError> {
    if sp.rank != 0 {
        return Err(ClassifyError::Precondition("expected a rank-zero point".into()));
    }
    let j = jets_at(w, sp.uv)?;
    let mut t = CriterionTrace::from_point(sp);
    let (g1, g2) = (j.g1.value(), j.g2.value());
    let (g1u, g2v) = (c(&j.g1, 1), c(&j.g2, 1));
    let (w1u, w2v) = (c(&j.w1, 1), c(&j.w2, 1));
    let ok = [
        t.test("g1g2_minus_1", g1 * g2 - 1.0, (g1 * g2).abs()) == Outcome::NonZero,
        t.test("g1u_g2v", g1u * g2v, g1u.abs().max(g2v.abs())) == Outcome::NonZero,
        t.test("w1u_w2v", w1u * w2v, w1u.abs().max(w2v.abs())) == Outcome::NonZero,
    ];
    let tilde = (1.0 - g1 * g2) * big_lambda(g1, g2);
    let l_uv = tilde * w1u * w2v;
    t.set("lambda_uv", l_uv);
    t.set("hess_det", -l_uv * l_uv);
    let verdict = if ok.iter().all(|&b| b) {
        Some(Verdict::D4Plus)
    } else {
        t.fail("D4 conditions do not all hold");
        None
    };
    Ok(Classification::done(verdict, t))
}

/// Route an analyzed point to its criterion.
pub fn classify_point(w: &WData, sp: &SingularPoint) -> Result<Classification, ClassifyError> {
    let on_g = sp.has(SingularKind::G);
    let on_w = sp.has(SingularKind::W1) || sp.has(SingularKind::W2);
    if sp.rank == 0 {
        return classify_rank0(w, sp);
    }
    if on_g && on_w {
        return classify_beaks(w, sp);
    }
    if sp.is_degenerate {
        let mut t = CriterionTrace::from_point(sp);
        t.fail(if on_g {
            "degenerate g-singular point (both g' vanish)"
        } else {
            "degenerate omega-singular point (w' vanishes)"
        });
        return Ok(Classification::done(None, t));
    }
    if on_g {
        classify_g_point(w, sp)
    } else {
        classify_w_rank1(w, sp)
    }
}

pub fn classify(w: &WData, p: (f64, f64)) -> Result<Classification, ClassifyError> {
    let sp = analyze_point(w, p)?;
    classify_point(w, &sp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transforms {
    pub conjugate: Option<Verdict>,
    /// Keyed by the printed angle.
    pub associate: BTreeMap<String, Option<Verdict>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    pub u: f64,
    pub v: f64,
    pub kinds: String,
    pub rank: u8,
    pub front: bool,
    pub degenerate: bool,
    pub verdict: Verdict,
    pub margins: BTreeMap<String, f64>,
    pub reasons: Vec<String>,
    pub transforms: Transforms,
}

pub fn transform_verdicts(w: &WData, p: (f64, f64), thetas: &[f64]) -> Transforms {
    let verdict = |d: &WData| classify(d, p).ok().map(|c| c.verdict);
    Transforms {
        conjugate: verdict(&w.conjugate()),
        associate: thetas
            .iter()
            .map(|&th| (th.to_string(), verdict(&w.associate(th))))
            .collect(),
    }
}

pub fn report_entry(w: &WData, sp: &SingularPoint, c: &Classification, thetas: &[f64]) -> ReportEntry {
    ReportEntry {
        u: sp.uv.0,
        v: sp.uv.1,
        kinds: sp.kinds_label(),
        rank: sp.rank,
        front: sp.is_front,
        degenerate: sp.is_degenerate,
        verdict: c.verdict,
        margins: c.trace.values.clone(),
        reasons: c.trace.reasons.clone(),
        transforms: transform_verdicts(w, sp.uv, thetas),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub u: f64,
    pub v: f64,
    pub check: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AuditReport {
    pub points: usize,
    pub s1_checks: usize,
    pub hessian_checks: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn merge(&mut self, other: AuditReport) {
        self.points += other.points;
        self.s1_checks += other.s1_checks;
        self.hessian_checks += other.hessian_checks;
        self.violations.extend(other.violations);
    }
}

/// Sign checks behind the absence of S1⁻, lips and D4⁻: `AB > 0` wherever
/// the S1 branch completes, `det Hess λ ≤ 0` at rank-zero and degenerate
/// ω-points (both from the closed forms and from the independent Hessian).
pub fn nonexistence_audit(w: &WData, points: &[SingularPoint]) -> AuditReport {
    let mut report = AuditReport {
        points: points.len(),
        ..Default::default()
    };
    for sp in points {
        let (u, v) = sp.uv;
        let mut flag = |check: &str, value: f64| {
            report.violations.push(Violation {
                u,
                v,
                check: check.to_string(),
                value,
            })
        };
        if let Ok(cl) = classify_point(w, sp) {
            if let Some(ab) = cl.trace.get("AB_product") {
                report.s1_checks += 1;
                if !(ab > 0.0) {
                    flag("AB_product > 0", ab);
                }
            }
            if let Some(h) = cl.trace.get("hess_det") {
                report.hessian_checks += 1;
                if !(h <= 0.0) {
                    flag("closed-form det Hess <= 0", h);
                }
            }
        }
        let on_w = sp.has(SingularKind::W1) || sp.has(SingularKind::W2);
        if sp.rank == 0 || (sp.is_degenerate && on_w) {
            if let Ok(h) = crate::oracle::hessian_check(w, sp) {
                report.hessian_checks += 1;
                if decide(h.hess_det, h.scale) == Outcome::NonZero && h.hess_det > 0.0 {
                    flag("det Hess <= 0", h.hess_det);
                }
            }
        }
        if let Ok(s1) = crate::oracle::s1_constants(w, sp) {
            let ab = s1.a * s1.b;
            if decide(s1.a, s1.a_scale) == Outcome::NonZero && decide(s1.b, s1.b_scale) == Outcome::NonZero {
                report.s1_checks += 1;
                if !(ab > 0.0) {
                    flag("oracle AB > 0", ab);
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wd(g1: &str, g2: &str, w1: &str, w2: &str) -> WData {
        WData::parse(g1, g2, w1, w2).unwrap()
    }

    fn enneper() -> WData {
        wd("u", "-v", "1", "1")
    }

    #[test]
    fn verdict_strings() {
        assert_eq!(Verdict::CandidateHigherCusp(3).to_string(), "CandidateHigherCusp(3)");
        for v in [Verdict::D4Plus, Verdict::CandidateHigherCusp(4), Verdict::Unclassified] {
            assert_eq!(v.to_string().parse::<Verdict>().unwrap(), v);
        }
        assert_eq!(serde_json::to_string(&Verdict::Swallowtail).unwrap(), "\"Swallowtail\"");
    }

    #[test]
    fn two_thresholds() {
        assert_eq!(decide(1e-10, 1.0), Outcome::Zero);
        assert_eq!(decide(1e-7, 1.0), Outcome::Borderline);
        assert_eq!(decide(1e-5, 1.0), Outcome::NonZero);
        assert_eq!(decide(1e-7, 1e3), Outcome::Zero);
    }

    #[test]
    fn enneper_points() {
        let c = classify(&enneper(), (1.0, -1.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Swallowtail);
        assert_eq!(c.trace.get("varphi1"), Some(1.0));
        assert_eq!(c.trace.get("varphi2"), Some(-1.0));
        assert!((c.trace.get("D").unwrap() + 4.0).abs() < 1e-12);
        let c = classify(&enneper(), (2.0, -0.5)).unwrap();
        assert_eq!(c.verdict, Verdict::CuspidalEdge);
        assert!((c.trace.get("varphi1").unwrap() - 0.25).abs() < 1e-15);
        assert!((c.trace.get("varphi2").unwrap() + 4.0).abs() < 1e-14);
        let err = classify(&enneper(), (0.0, 0.0)).unwrap_err();
        assert!(matches!(err, ClassifyError::Singular(SingularError::NotSingular { .. })));
    }

    #[test]
    fn cusp_generator() {
        let c = classify(&wd("0", "v", "1", "v"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::CuspidalEdge);
        let c = classify(&wd("0", "v^3", "1", "v"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Cusp25Edge);
        assert!((c.trace.get("cusp25_quantity").unwrap() - 6.0).abs() < 1e-10);
        assert!((c.trace.get("hks_closed_form").unwrap() - 36.0).abs() < 1e-9);
        let c = classify(&wd("0", "v^5", "1", "v"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::CandidateHigherCusp(3));
        assert!(c.trace.get("cusp25_quantity").unwrap().abs() < 1e-10);
        let c = classify(&wd("u", "v^7", "1", "v"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::CandidateHigherCusp(4));
    }

    #[test]
    fn mirrored_w1_side() {
        let c = classify(&wd("u^3", "0", "u", "1"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Cusp25Edge);
        let c = classify(&wd("u", "0", "u", "1"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::CuspidalEdge);
    }

    #[test]
    fn beaks_and_d4() {
        let c = classify(&wd("exp(u)", "exp(v)", "1", "v"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::CuspidalBeaks);
        assert!(c.trace.get("hess_det").unwrap() < 0.0);
        assert!(c.trace.get("eta_eta_lambda").unwrap() != 0.0);
        let c = classify(&wd("exp(u)", "exp(v)", "1", "v^2"), (0.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Unclassified);
        assert!(!c.trace.reasons.is_empty());
        let c = classify(&wd("u", "v", "u", "v"), (0.0, 0.0)).unwrap();
        // g1g2 = 0 there, so the D4 conditions fail on g1u g2v only if it vanished
        assert_eq!(c.verdict, Verdict::D4Plus);
        // Λ̃ = (1 − 0)·(−1/2)
        assert!((c.trace.get("hess_det").unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn kksy_rank_zero() {
        let w = wd(
            "sin(u)/(cos(u)-1)",
            "-sin(v)/(cos(v)+1)",
            "cos(2*u)*(cos(u)-1)/2",
            "cos(2*v)*(cos(v)+1)/2",
        );
        let c = classify(&w, (PI / 4.0, 3.0 * PI / 4.0)).unwrap();
        assert_eq!(c.verdict, Verdict::D4Plus);
        assert!(c.trace.get("hess_det").unwrap() < 0.0);
        let c = classify(&w, (PI / 4.0, PI / 4.0)).unwrap();
        assert_eq!(c.verdict, Verdict::Unclassified);
        assert_eq!(c.trace.outcome("g1g2_minus_1"), Some(Outcome::Zero));
    }

    #[test]
    fn flat_is_not_singular() {
        assert!(classify(&wd("0", "0", "1", "1"), (0.3, 0.2)).is_err());
    }

    #[test]
    fn precondition_guards() {
        let w = enneper();
        let sp = analyze_point(&w, (1.0, -1.0)).unwrap();
        assert!(matches!(classify_rank0(&w, &sp), Err(ClassifyError::Precondition(_))));
        assert!(matches!(classify_w_rank1(&w, &sp), Err(ClassifyError::Precondition(_))));
        assert!(matches!(classify_beaks(&w, &sp), Err(ClassifyError::Precondition(_))));
    }
}
