//! Locating and structurally analyzing singular points.
//!
//! The singular set is `{g1 g2 = 1} ∪ {ω̂1 ω̂2 = 0}`. Since `ω̂1` depends on `u`
//! only, the second part is a union of coordinate lines; the first is the
//! zero set of `G(u, v) = g1(u) g2(v) − 1`, traced as polylines.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;
use crate::jets::DEFAULT_ORDER;
use crate::quantities::side_quantities;
use crate::roots::{expr_roots, illinois, Root};
use crate::surface::{big_lambda, linspace, value_at, Domain, SurfaceError, WData};

/// Structural "= 0" threshold, relative to a local magnitude.
pub const STRUCT_TOL: f64 = 1e-10;
/// Candidates closer than this in parameter space are merged.
pub const DEDUP_RADIUS: f64 = 1e-7;
/// Polishing target for ω̂ roots.
pub const ROOT_TOL: f64 = 1e-12;

pub fn is_zero(q: f64, scale: f64) -> bool {
    q.abs() <= STRUCT_TOL * scale.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SingularKind {
    G,
    W1,
    W2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPoint {
    pub uv: (f64, f64),
    pub kinds: BTreeSet<SingularKind>,
    pub rank: u8,
    pub is_front: bool,
    pub is_degenerate: bool,
    /// Set when a consulted quantity could not be resolved.
    pub low_confidence: bool,
    pub margins: BTreeMap<String, f64>,
}

impl SingularPoint {
    pub fn has(&self, k: SingularKind) -> bool {
        self.kinds.contains(&k)
    }

    pub fn is_pure_g(&self) -> bool {
        self.kinds.len() == 1 && self.has(SingularKind::G)
    }

    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.get(name).copied()
    }

    pub fn kinds_label(&self) -> String {
        let names: Vec<&str> = self
            .kinds
            .iter()
            .map(|k| match k {
                SingularKind::G => "G",
                SingularKind::W1 => "W1",
                SingularKind::W2 => "W2",
            })
            .collect();
        names.join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SingularError {
    #[error("({u}, {v}) is not singular: g1g2 - 1 = {g_residual:e}, w1 = {w1:e}, w2 = {w2:e}")]
    NotSingular {
        u: f64,
        v: f64,
        g_residual: f64,
        w1: f64,
        w2: f64,
    },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("({u}, {v}) is not on g1g2 = 1: residual {residual:e}")]
    NotOnCurve { u: f64, v: f64, residual: f64 },
    #[error("gradient of g1g2 - 1 vanishes at ({u}, {v})")]
    FlatGradient { u: f64, v: f64 },
}

/// Membership, rank, front and degeneracy tests at a point.
pub fn analyze_point(w: &WData, p: (f64, f64)) -> Result<SingularPoint, SingularError> {
    let (u, v) = p;
    let j = w.jets(u, v, DEFAULT_ORDER)?;
    let c = |jet: &crate::jets::Jet, k: usize| jet.coeffs().get(k).copied().unwrap_or(0.0);
    let (g1, g1u) = (c(&j.g1, 0), c(&j.g1, 1));
    let (g2, g2v) = (c(&j.g2, 0), c(&j.g2, 1));
    let (w1, w1u) = (c(&j.w1, 0), c(&j.w1, 1));
    let (w2, w2v) = (c(&j.w2, 0), c(&j.w2, 1));
    let gres = g1 * g2 - 1.0;

    let mut kinds = BTreeSet::new();
    if is_zero(gres, (g1 * g2).abs()) {
        kinds.insert(SingularKind::G);
    }
    if is_zero(w1, w1u.abs()) {
        kinds.insert(SingularKind::W1);
    }
    if is_zero(w2, w2v.abs()) {
        kinds.insert(SingularKind::W2);
    }
    if kinds.is_empty() {
        return Err(SingularError::NotSingular {
            u,
            v,
            g_residual: gres,
            w1,
            w2,
        });
    }

    let mut m = BTreeMap::new();
    for (k, val) in [
        ("g1", g1),
        ("g2", g2),
        ("w1", w1),
        ("w2", w2),
        ("g1_u", g1u),
        ("g2_v", g2v),
        ("w1_u", w1u),
        ("w2_v", w2v),
        ("g1g2_minus_1", gres),
    ] {
        m.insert(k.to_string(), val);
    }

    let has = |k| kinds.contains(&k);
    let on_g = has(SingularKind::G);
    let (on_w1, on_w2) = (has(SingularKind::W1), has(SingularKind::W2));
    let rank = if on_w1 && on_w2 { 0 } else { 1 };
    let mut low_confidence = false;
    let gscale = g1.abs().max(g2.abs());

    let (is_front, is_degenerate) = if rank == 0 {
        let front = !on_g && !is_zero(g1u * g2v, gscale * gscale);
        (front, true)
    } else if on_w1 || on_w2 {
        // one ω̂ vanishes; the other side is regular
        let (gp, wp) = if on_w2 { (g2v, w2v) } else { (g1u, w1u) };
        let front = !is_zero(gp, gscale);
        let degenerate = on_g || is_zero(wp, 1.0);
        (front, degenerate)
    } else {
        // pure G point
        let big = big_lambda(g1, g2);
        let lu = -big * w1 * w2 * g1u * g2;
        let lv = -big * w1 * w2 * g1 * g2v;
        m.insert("lambda_u".into(), lu);
        m.insert("lambda_v".into(), lv);
        let lscale = (big * w1 * w2).abs() * gscale;
        let degenerate = is_zero(lu.hypot(lv), lscale);
        // between the zero and nonzero bands of the classifier
        if !degenerate && lu.hypot(lv) < 1e-6 * lscale.max(1.0) {
            low_confidence = true;
        }
        let front = match (side_quantities(&j.g1, &j.w1), side_quantities(&j.g2, &j.w2)) {
            (Ok(s1), Ok(s2)) => {
                let sum = s1.varphi + s2.varphi;
                let diff = s1.varphi - s2.varphi;
                m.insert("varphi1".into(), s1.varphi);
                m.insert("varphi2".into(), s2.varphi);
                m.insert("sum".into(), sum);
                m.insert("diff".into(), diff);
                // dn(η) is proportional to φ1 − φ2
                !is_zero(diff, s1.varphi.abs().max(s2.varphi.abs()))
            }
            _ => {
                low_confidence = true;
                false
            }
        };
        (front, degenerate)
    };

    Ok(SingularPoint {
        uv: p,
        kinds,
        rank,
        is_front,
        is_degenerate,
        low_confidence,
        margins: m,
    })
}

/// Zeros of `ω̂1` in `u` and of `ω̂2` in `v`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WLines {
    pub u_roots: Vec<Root>,
    pub v_roots: Vec<Root>,
}

pub fn find_w_zero_lines(w: &WData, interval_u: (f64, f64), interval_v: (f64, f64)) -> WLines {
    find_w_zero_lines_with(w, interval_u, interval_v, 2048)
}

pub fn find_w_zero_lines_with(w: &WData, iu: (f64, f64), iv: (f64, f64), n: usize) -> WLines {
    WLines {
        u_roots: expr_roots(&w.w1, iu.0, iu.1, n, ROOT_TOL),
        v_roots: expr_roots(&w.w2, iv.0, iv.1, n, ROOT_TOL),
    }
}

/// `(G, G_u, G_v)` for `G = g1 g2 − 1`.
fn g_field(w: &WData, p: (f64, f64)) -> Option<(f64, f64, f64)> {
    let a = w.g1.eval_jet(p.0, 1).ok()?;
    let b = w.g2.eval_jet(p.1, 1).ok()?;
    if a.order() < 1 || b.order() < 1 {
        return None;
    }
    let (g1, g1u) = (a.coeffs()[0], a.coeffs()[1]);
    let (g2, g2v) = (b.coeffs()[0], b.coeffs()[1]);
    Some((g1 * g2 - 1.0, g1u * g2, g1 * g2v))
}

fn g_tolerance(g: f64) -> f64 {
    STRUCT_TOL * (g + 1.0).abs().max(1.0)
}

/// Newton iteration along the gradient of `G` back onto `G = 0`.
fn project(w: &WData, q: (f64, f64)) -> Option<(f64, f64)> {
    let mut p = q;
    for _ in 0..20 {
        let (g, gu, gv) = g_field(w, p)?;
        if g.abs() <= 1e-3 * g_tolerance(g) {
            return Some(p);
        }
        let n2 = gu * gu + gv * gv;
        if !(n2 > 1e-300) {
            return None;
        }
        p = (p.0 - g * gu / n2, p.1 - g * gv / n2);
    }
    let (g, _, _) = g_field(w, p)?;
    (g.abs() <= g_tolerance(g)).then_some(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CurveEnd {
    Boundary,
    MaxSteps,
    Closed,
    /// `∇G` collapsed: a candidate degenerate point.
    Degenerate { u: f64, v: f64 },
    /// Evaluation failed or the step size underflowed (typically a pole).
    Lost { u: f64, v: f64 },
}

/// A traced component of `{g1 g2 = 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GCurve {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
    pub ends: [CurveEnd; 2],
}

impl GCurve {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|s| dist(s[0], s[1])).sum()
    }

    /// Distance from `p` to the polyline.
    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        if self.points.len() == 1 {
            return dist(p, self.points[0]);
        }
        self.points
            .windows(2)
            .map(|s| segment_distance(p, s[0], s[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = (b.0 - a.0, b.1 - a.1);
    let len2 = d.0 * d.0 + d.1 * d.1;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.0 - a.0) * d.0 + (p.1 - a.1) * d.1) / len2).clamp(0.0, 1.0);
    dist(p, (a.0 + t * d.0, a.1 + t * d.1))
}

fn unit_tangent(w: &WData, p: (f64, f64)) -> Option<((f64, f64), f64)> {
    let (_, gu, gv) = g_field(w, p)?;
    let n = gu.hypot(gv);
    (n > 0.0).then(|| ((-gv / n, gu / n), n))
}

/// Exit point of the segment `p → q` (p inside), corrected onto `G = 0`
/// along the boundary line it crosses.
fn clip(w: &WData, domain: &Domain, p: (f64, f64), q: (f64, f64)) -> (f64, f64) {
    let mut s = 1.0f64;
    let mut fixed_u = None;
    let mut fixed_v = None;
    for (bound, is_u) in [
        (domain.u.0, true),
        (domain.u.1, true),
        (domain.v.0, false),
        (domain.v.1, false),
    ] {
        let (a, b) = if is_u { (p.0, q.0) } else { (p.1, q.1) };
        let outside = if bound == domain.u.0 || bound == domain.v.0 {
            b < bound
        } else {
            b > bound
        };
        if outside && b != a {
            let t = (bound - a) / (b - a);
            if t < s {
                s = t;
                if is_u {
                    fixed_u = Some(bound);
                    fixed_v = None;
                } else {
                    fixed_v = Some(bound);
                    fixed_u = None;
                }
            }
        }
    }
    let b = (p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1));
    // 1-D Newton in the free coordinate
    let mut x = if fixed_u.is_some() { b.1 } else { b.0 };
    for _ in 0..30 {
        let pt = match (fixed_u, fixed_v) {
            (Some(u), _) => (u, x),
            (_, Some(v)) => (x, v),
            _ => return b,
        };
        let Some((g, gu, gv)) = g_field(w, pt) else { return b };
        let d = if fixed_u.is_some() { gv } else { gu };
        if g.abs() <= 1e-3 * g_tolerance(g) {
            break;
        }
        if d == 0.0 {
            return b;
        }
        x -= g / d;
    }
    let out = match (fixed_u, fixed_v) {
        (Some(u), _) => (u, x),
        (_, Some(v)) => (x, v),
        _ => b,
    };
    let ok = g_field(w, out).is_some_and(|(g, _, _)| g.abs() <= g_tolerance(g));
    if ok && domain.contains(out, 1e-12) && dist(out, b) <= dist(p, q) {
        out
    } else {
        b
    }
}

fn march(
    w: &WData,
    start: (f64, f64),
    sign: f64,
    h0: f64,
    max_steps: usize,
    domain: &Domain,
) -> (Vec<(f64, f64)>, CurveEnd) {
    let mut pts = Vec::new();
    let mut p = start;
    let mut prev: Option<(f64, f64)> = None;
    let mut h = h0;
    let mut gone_far = false;
    for _ in 0..max_steps {
        let Some((t0, norm)) = unit_tangent(w, p) else {
            return (pts, CurveEnd::Lost { u: p.0, v: p.1 });
        };
        if norm < 1e-8 {
            return (pts, CurveEnd::Degenerate { u: p.0, v: p.1 });
        }
        let mut t = (t0.0 * sign, t0.1 * sign);
        if let Some(pt) = prev {
            if t.0 * pt.0 + t.1 * pt.1 < 0.0 {
                t = (-t.0, -t.1);
            }
        }
        let next = loop {
            let q = (p.0 + h * t.0, p.1 + h * t.1);
            let accepted = project(w, q).filter(|&c| {
                dist(c, p) < 2.0 * h
                    && unit_tangent(w, c)
                        .is_some_and(|(tc, _)| (tc.0 * t.0 + tc.1 * t.1).abs() > 0.95)
            });
            match accepted {
                Some(c) => break c,
                None => {
                    h *= 0.5;
                    if h < h0 * 1e-7 {
                        return (pts, CurveEnd::Lost { u: p.0, v: p.1 });
                    }
                }
            }
        };
        if !domain.contains(next, 0.0) {
            pts.push(clip(w, domain, p, next));
            return (pts, CurveEnd::Boundary);
        }
        let d = dist(next, start);
        if d > 2.0 * h0 {
            gone_far = true;
        }
        if gone_far && d < 1.5 * h {
            pts.push(start);
            return (pts, CurveEnd::Closed);
        }
        pts.push(next);
        prev = Some(t);
        p = next;
        h = (h * 1.5).min(h0);
    }
    (pts, CurveEnd::MaxSteps)
}

/// Trace the component of `{g1 g2 = 1}` through `seed` in both directions.
pub fn trace_g_curve(
    w: &WData,
    seed: (f64, f64),
    step: f64,
    max_steps: usize,
    domain: &Domain,
) -> Result<GCurve, SingularError> {
    let (g, gu, gv) = g_field(w, seed).ok_or(SingularError::NotOnCurve {
        u: seed.0,
        v: seed.1,
        residual: f64::NAN,
    })?;
    if g.abs() > g_tolerance(g) {
        return Err(SingularError::NotOnCurve {
            u: seed.0,
            v: seed.1,
            residual: g,
        });
    }
    if gu.hypot(gv) < 1e-8 {
        return Err(SingularError::FlatGradient { u: seed.0, v: seed.1 });
    }
    let (fwd, end_f) = march(w, seed, 1.0, step, max_steps, domain);
    if end_f == CurveEnd::Closed {
        let mut points = vec![seed];
        points.extend(fwd);
        return Ok(GCurve {
            points,
            closed: true,
            ends: [CurveEnd::Closed, CurveEnd::Closed],
        });
    }
    let (bwd, end_b) = march(w, seed, -1.0, step, max_steps, domain);
    let mut points: Vec<(f64, f64)> = bwd.into_iter().rev().collect();
    points.push(seed);
    points.extend(fwd);
    // a seed on the boundary comes back from the clipped backward march
    points.dedup_by(|a, b| (a.0 - b.0).hypot(a.1 - b.1) < 1e-12);
    Ok(GCurve {
        points,
        closed: false,
        ends: [end_b, end_f],
    })
}

/// Evenly spaced (by arc length) points on a traced curve, projected back
/// onto `G = 0`.
pub fn sample_curve(w: &WData, curve: &GCurve, n: usize) -> Vec<(f64, f64)> {
    let pts = &curve.points;
    if pts.len() < 2 || n == 0 {
        return pts.iter().take(n).copied().collect();
    }
    let mut cum = vec![0.0];
    for s in pts.windows(2) {
        cum.push(cum.last().unwrap() + dist(s[0], s[1]));
    }
    let total = *cum.last().unwrap();
    let denom = if curve.closed { n as f64 } else { (n.max(2) - 1) as f64 };
    (0..n)
        .filter_map(|k| {
            let target = total * k as f64 / denom;
            let i = cum.partition_point(|&c| c < target).clamp(1, pts.len() - 1);
            let seg = cum[i] - cum[i - 1];
            let t = if seg > 0.0 { (target - cum[i - 1]) / seg } else { 0.0 };
            let (a, b) = (pts[i - 1], pts[i]);
            let q = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            project(w, q)
        })
        .collect()
}

/// Tangent and null direction at a point of `Σᵍ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularCurveSample {
    pub t: f64,
    pub point: (f64, f64),
    pub gamma_prime: (f64, f64),
    pub eta: (f64, f64),
}

/// `γ' = ((g2)_v/g2, −(g1)_u/g1)` and `η = (1/(g1 ω̂1), 1/(g2 ω̂2))`.
pub fn curve_sample(w: &WData, t: f64, p: (f64, f64)) -> Result<SingularCurveSample, SingularError> {
    let j = w.jets(p.0, p.1, 1)?;
    let (g1, g1u) = (j.g1.coeffs()[0], j.g1.coeffs()[1]);
    let (g2, g2v) = (j.g2.coeffs()[0], j.g2.coeffs()[1]);
    Ok(SingularCurveSample {
        t,
        point: p,
        gamma_prime: (g2v / g2, -g1u / g1),
        eta: (1.0 / (g1 * j.w1.value()), 1.0 / (g2 * j.w2.value())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Origin {
    /// Crossing of two ω-lines or of an ω-line with `Σᵍ`.
    Intersection,
    /// Zero of `φ1 ± φ2` along a traced curve.
    Event,
    CurveSample,
    LineSample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub point: SingularPoint,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejected {
    pub uv: (f64, f64),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub grid: (usize, usize),
    pub curve_samples: usize,
    pub line_samples: usize,
    /// Tracing step; defaults to a quarter of the finer grid spacing.
    pub step: Option<f64>,
    pub max_steps: usize,
    pub root_scan: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid: (128, 128),
            curve_samples: 41,
            line_samples: 9,
            step: None,
            max_steps: 20_000,
            root_scan: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub curves: Vec<GCurve>,
    pub w_lines: WLines,
    pub rejected: Vec<Rejected>,
}

impl ScanResult {
    pub fn singular_points(&self) -> impl Iterator<Item = &SingularPoint> {
        self.points.iter().map(|p| &p.point)
    }
}

fn varphi_pair(w: &WData, p: (f64, f64), order: usize) -> Option<(f64, f64, Option<f64>, Option<f64>)> {
    let j = w.jets(p.0, p.1, order).ok()?;
    let s1 = side_quantities(&j.g1, &j.w1).ok()?;
    let s2 = side_quantities(&j.g2, &j.w2).ok()?;
    Some((s1.varphi, s2.varphi, s1.phi, s2.phi))
}

/// Points along a curve where `φ1 + φ2` or `φ1 − φ2` vanishes.
fn curve_events(w: &WData, curve: &GCurve) -> Vec<(f64, f64)> {
    let pts = &curve.points;
    let vals: Vec<Option<(f64, f64)>> = pts
        .iter()
        .map(|&p| varphi_pair(w, p, 2).map(|(a, b, _, _)| (a, b)))
        .collect();
    let mut out = Vec::new();
    let lerp = |a: (f64, f64), b: (f64, f64), s: f64| (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
    for which in [1.0, -1.0] {
        // which = 1: sum, −1: diff
        let q = |v: (f64, f64)| v.0 + which * v.1;
        // derivative proxy along the curve: D for the sum, D+ for the difference
        let proxy = |p: (f64, f64)| {
            varphi_pair(w, p, 3).and_then(|(_, _, a, b)| Some(a? - which * b?))
        };
        let zero_ok = |p: (f64, f64)| {
            varphi_pair(w, p, 2).is_some_and(|(a, b, _, _)| {
                (a + which * b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
            })
        };
        for k in 0..pts.len().saturating_sub(1) {
            let (Some(a), Some(b)) = (vals[k], vals[k + 1]) else { continue };
            let (qa, qb) = (q(a), q(b));
            if qa == 0.0 {
                out.push(pts[k]);
                continue;
            }
            if qa.signum() != qb.signum() && qb != 0.0 {
                let (pa, pb) = (pts[k], pts[k + 1]);
                let f = |s: f64| {
                    let p = project(w, lerp(pa, pb, s))?;
                    varphi_pair(w, p, 2).map(|(x, y, _, _)| x + which * y)
                };
                if let Some(s) = illinois(f, 0.0, 1.0, 0.0) {
                    if let Some(p) = project(w, lerp(pa, pb, s)) {
                        if zero_ok(p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        // tangential zeros: |q| has a local minimum at a vertex
        for k in 1..pts.len().saturating_sub(1) {
            let (Some(a), Some(b), Some(c)) = (vals[k - 1], vals[k], vals[k + 1]) else { continue };
            let (qa, qb, qc) = (q(a), q(b), q(c));
            if qa.signum() != qb.signum() || qc.signum() != qb.signum() {
                continue;
            }
            if !(qb.abs() < qa.abs() && qb.abs() <= qc.abs()) {
                continue;
            }
            for (pa, pb) in [(pts[k - 1], pts[k]), (pts[k], pts[k + 1])] {
                let f = |s: f64| project(w, lerp(pa, pb, s)).and_then(proxy);
                if let Some(s) = illinois(f, 0.0, 1.0, 0.0) {
                    if let Some(p) = project(w, lerp(pa, pb, s)) {
                        if zero_ok(p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Zeros of `c · g(x) − 1` over `range`, i.e. where a fixed value of one `g`
/// meets the other.
fn g_crossings(g: &Expr, c: f64, range: (f64, f64), n: usize) -> Vec<f64> {
    if c == 0.0 || !c.is_finite() {
        return vec![];
    }
    let e = Expr::Const(c) * g.clone() - Expr::Const(1.0);
    expr_roots(&e, range.0, range.1, n, STRUCT_TOL)
        .into_iter()
        .map(|r| r.x)
        .collect()
}

/// Full scan: ω-lines, traced g-curves with their events and samples, and all
/// pairwise intersections, analyzed and deduplicated.
pub fn singular_scan(w: &WData, domain: &Domain, opts: &ScanOptions) -> ScanResult {
    let (nu, nv) = (opts.grid.0.max(2), opts.grid.1.max(2));
    let mut rejected = Vec::new();

    let lines = find_w_zero_lines_with(w, domain.u, domain.v, opts.root_scan);
    let mut u_lines = Vec::new();
    for r in &lines.u_roots {
        match w.g1.eval_jet(r.x, DEFAULT_ORDER) {
            Ok(_) => u_lines.push(r.x),
            Err(e) => rejected.push(Rejected {
                uv: (r.x, f64::NAN),
                reason: format!("g1 not finite on the line u = {}: {e}", r.x),
            }),
        }
    }
    let mut v_lines = Vec::new();
    for r in &lines.v_roots {
        match w.g2.eval_jet(r.x, DEFAULT_ORDER) {
            Ok(_) => v_lines.push(r.x),
            Err(e) => rejected.push(Rejected {
                uv: (f64::NAN, r.x),
                reason: format!("g2 not finite on the line v = {}: {e}", r.x),
            }),
        }
    }

    // seeds from sign changes of G on grid edges
    let us = linspace(domain.u.0, domain.u.1, nu);
    let vs = linspace(domain.v.0, domain.v.1, nv);
    let g1s: Vec<Option<f64>> = us.iter().map(|&u| value_at(&w.g1, u).ok()).collect();
    let g2s: Vec<Option<f64>> = vs.iter().map(|&v| value_at(&w.g2, v).ok()).collect();
    let big_g = |i: usize, j: usize| Some(g1s[i]? * g2s[j]? - 1.0);
    let mut seeds = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            let Some(here) = big_g(i, j) else { continue };
            if here == 0.0 {
                seeds.push((us[i], vs[j]));
                continue;
            }
            if i + 1 < nu {
                if let Some(next) = big_g(i + 1, j) {
                    if next.signum() != here.signum() && next != 0.0 {
                        let c = g2s[j].unwrap_or(0.0);
                        for x in g_crossings(&w.g1, c, (us[i], us[i + 1]), 4) {
                            seeds.push((x, vs[j]));
                        }
                    }
                }
            }
            if j + 1 < nv {
                if let Some(next) = big_g(i, j + 1) {
                    if next.signum() != here.signum() && next != 0.0 {
                        let c = g1s[i].unwrap_or(0.0);
                        for y in g_crossings(&w.g2, c, (vs[j], vs[j + 1]), 4) {
                            seeds.push((us[i], y));
                        }
                    }
                }
            }
        }
    }

    let du = (domain.u.1 - domain.u.0) / (nu - 1) as f64;
    let dv = (domain.v.1 - domain.v.0) / (nv - 1) as f64;
    let step = opts.step.unwrap_or(0.25 * du.min(dv));
    let mut curves: Vec<GCurve> = Vec::new();
    for seed in seeds {
        if curves.iter().any(|c| c.distance_to(seed) <= 0.1 * step + 1e-9) {
            continue;
        }
        match trace_g_curve(w, seed, step, opts.max_steps, domain) {
            Ok(c) => curves.push(c),
            Err(e) => rejected.push(Rejected {
                uv: seed,
                reason: e.to_string(),
            }),
        }
    }

    let mut candidates: Vec<((f64, f64), Origin)> = Vec::new();
    for &u in &u_lines {
        for &v in &v_lines {
            candidates.push(((u, v), Origin::Intersection));
        }
    }
    for &u in &u_lines {
        if let Ok(c) = value_at(&w.g1, u) {
            for v in g_crossings(&w.g2, c, domain.v, opts.root_scan) {
                candidates.push(((u, v), Origin::Intersection));
            }
        }
    }
    for &v in &v_lines {
        if let Ok(c) = value_at(&w.g2, v) {
            for u in g_crossings(&w.g1, c, domain.u, opts.root_scan) {
                candidates.push(((u, v), Origin::Intersection));
            }
        }
    }
    for c in &curves {
        for p in curve_events(w, c) {
            candidates.push((p, Origin::Event));
        }
        for end in c.ends {
            if let CurveEnd::Degenerate { u, v } = end {
                candidates.push(((u, v), Origin::Event));
            }
        }
    }
    for c in &curves {
        for p in sample_curve(w, c, opts.curve_samples) {
            candidates.push((p, Origin::CurveSample));
        }
    }
    let n = opts.line_samples;
    for &u in &u_lines {
        for k in 0..n {
            let v = domain.v.0 + (k as f64 + 0.5) * (domain.v.1 - domain.v.0) / n as f64;
            candidates.push(((u, v), Origin::LineSample));
        }
    }
    for &v in &v_lines {
        for k in 0..n {
            let u = domain.u.0 + (k as f64 + 0.5) * (domain.u.1 - domain.u.0) / n as f64;
            candidates.push(((u, v), Origin::LineSample));
        }
    }
    candidates.retain(|(p, _)| domain.contains(*p, 1e-12));

    // dedup in priority order
    let mut kept: Vec<((f64, f64), Origin)> = Vec::new();
    for (p, o) in candidates {
        if kept.iter().all(|(q, _)| dist(p, *q) > DEDUP_RADIUS) {
            kept.push((p, o));
        }
    }

    let analyzed: Vec<Result<ScanPoint, Rejected>> = kept
        .par_iter()
        .map(|&(p, origin)| {
            analyze_point(w, p)
                .map(|point| ScanPoint { point, origin })
                .map_err(|e| Rejected {
                    uv: p,
                    reason: e.to_string(),
                })
        })
        .collect();
    let mut points = Vec::new();
    for r in analyzed {
        match r {
            Ok(sp) => points.push(sp),
            Err(rej) => rejected.push(rej),
        }
    }
    ScanResult {
        points,
        curves,
        w_lines: lines,
        rejected,
    }
}

/// CSV of singular points; margins become extra columns.
pub fn points_csv<'a>(points: impl IntoIterator<Item = &'a SingularPoint>) -> String {
    let points: Vec<&SingularPoint> = points.into_iter().collect();
    let names: BTreeSet<&str> = points
        .iter()
        .flat_map(|p| p.margins.keys().map(|k| k.as_str()))
        .collect();
    let mut wr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["u", "v", "kinds", "rank", "front", "degenerate"];
    header.extend(names.iter());
    wr.write_record(&header).expect("in-memory write");
    for p in points {
        let mut rec = vec![
            p.uv.0.to_string(),
            p.uv.1.to_string(),
            p.kinds_label(),
            p.rank.to_string(),
            p.is_front.to_string(),
            p.is_degenerate.to_string(),
        ];
        rec.extend(
            names
                .iter()
                .map(|n| p.margins.get(*n).map(|v| v.to_string()).unwrap_or_default()),
        );
        wr.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("utf8")
}

/// CSV polylines: traced g-curves plus the ω-lines as two-point segments.
pub fn curves_csv(result: &ScanResult, domain: &Domain) -> String {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["curve", "kind", "index", "u", "v"])
        .expect("in-memory write");
    let mut id = 0;
    for c in &result.curves {
        for (i, p) in c.points.iter().enumerate() {
            wr.write_record([id.to_string(), "G".into(), i.to_string(), p.0.to_string(), p.1.to_string()])
                .expect("in-memory write");
        }
        id += 1;
    }
    let rows = |r: &Root, kind: &str| -> Vec<[String; 5]> {
        let ends = if kind == "W1" {
            [(r.x, domain.v.0), (r.x, domain.v.1)]
        } else {
            [(domain.u.0, r.x), (domain.u.1, r.x)]
        };
        ends.iter()
            .enumerate()
            .map(|(i, p)| [String::new(), kind.to_string(), i.to_string(), p.0.to_string(), p.1.to_string()])
            .collect()
    };
    for (roots, kind) in [(&result.w_lines.u_roots, "W1"), (&result.w_lines.v_roots, "W2")] {
        for r in roots {
            for mut row in rows(r, kind) {
                row[0] = id.to_string();
                wr.write_record(&row).expect("in-memory write");
            }
            id += 1;
        }
    }
    String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("utf8")
}
