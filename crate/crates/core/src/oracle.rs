//! Second classification path through the intrinsic front criteria: the
//! functions `δ = det(γ', η)` and `ψ = det(df(γ'), n, dn(η))` along the
//! singular curve, iterated null derivatives `ηᵏf`, and the Hessian of the
//! signed area density. Nothing here reads the closed-form criteria of
//! [`crate::classify`]; agreement between the two is the point.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify_point, cusp25_quantity, decide, CriterionTrace, Outcome, Verdict};
use crate::expr::{Expr, EvalError, Var};
use crate::jets::{Jet, JetError, Kernel};
use crate::singular::{SingularError, SingularKind, SingularPoint};
use crate::surface::WData;

/// Jet order used throughout the oracle.
pub const ORACLE_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Singular(#[from] SingularError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Truncated Taylor polynomial in two variables, `Σ c[i][j] du^i dv^j` with
/// `i + j ≤ deg`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    deg: usize,
    c: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn zero(deg: usize) -> Poly2 {
        Poly2 {
            deg,
            c: (0..=deg).map(|i| vec![0.0; deg + 1 - i]).collect(),
        }
    }

    pub fn constant(x: f64, deg: usize) -> Poly2 {
        let mut p = Poly2::zero(deg);
        p.c[0][0] = x;
        p
    }

    pub fn from_u(j: &Jet, deg: usize) -> Poly2 {
        let deg = deg.min(j.order());
        let mut p = Poly2::zero(deg);
        for i in 0..=deg {
            p.c[i][0] = j.coeffs()[i];
        }
        p
    }

    pub fn from_v(j: &Jet, deg: usize) -> Poly2 {
        let deg = deg.min(j.order());
        let mut p = Poly2::zero(deg);
        for k in 0..=deg {
            p.c[0][k] = j.coeffs()[k];
        }
        p
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0)
    }

    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    fn zip(&self, o: &Poly2, f: impl Fn(f64, f64) -> f64) -> Poly2 {
        let deg = self.deg.min(o.deg);
        let mut p = Poly2::zero(deg);
        for i in 0..=deg {
            for j in 0..=deg - i {
                p.c[i][j] = f(self.c[i][j], o.c[i][j]);
            }
        }
        p
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Poly2) -> Poly2 {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        self.zip(self, |a, _| a * s)
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let deg = self.deg.min(o.deg);
        let mut p = Poly2::zero(deg);
        for i1 in 0..=deg {
            for j1 in 0..=deg - i1 {
                let a = self.c[i1][j1];
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=deg - i1 - j1 {
                    for j2 in 0..=deg - i1 - j1 - i2 {
                        p.c[i1 + i2][j1 + j2] += a * o.c[i2][j2];
                    }
                }
            }
        }
        p
    }

    /// `∂/∂u`; loses one degree.
    pub fn du(&self) -> Poly2 {
        let deg = self.deg.saturating_sub(1);
        let mut p = Poly2::zero(deg);
        if self.deg == 0 {
            return p;
        }
        for i in 0..=deg {
            for j in 0..=deg - i {
                p.c[i][j] = (i + 1) as f64 * self.c[i + 1][j];
            }
        }
        p
    }

    /// `∂/∂v`; loses one degree.
    pub fn dv(&self) -> Poly2 {
        let deg = self.deg.saturating_sub(1);
        let mut p = Poly2::zero(deg);
        if self.deg == 0 {
            return p;
        }
        for i in 0..=deg {
            for j in 0..=deg - i {
                p.c[i][j] = (j + 1) as f64 * self.c[i][j + 1];
            }
        }
        p
    }

    /// `kernel ∘ self`, expanding the kernel around the constant term.
    pub fn compose(&self, kernel: Kernel) -> Result<Poly2, JetError> {
        let outer = Jet::variable(self.value(), self.deg).compose(kernel)?;
        let mut e = self.clone();
        e.c[0][0] = 0.0;
        let k = outer.order().min(self.deg);
        let mut r = Poly2::constant(outer.coeffs()[k], self.deg);
        for m in (0..k).rev() {
            r = r.mul(&e);
            r.c[0][0] += outer.coeffs()[m];
        }
        Ok(r)
    }
}

type P3 = [Poly2; 3];

fn p3_map(a: &P3, f: impl Fn(&Poly2) -> Poly2) -> P3 {
    [f(&a[0]), f(&a[1]), f(&a[2])]
}

fn p3_value(a: &P3) -> [f64; 3] {
    [a[0].value(), a[1].value(), a[2].value()]
}

/// A first-order operator `a ∂u + b ∂v` with polynomial coefficients.
#[derive(Debug, Clone)]
pub struct Field2 {
    pub a: Poly2,
    pub b: Poly2,
}

impl Field2 {
    pub fn apply(&self, h: &Poly2) -> Poly2 {
        self.a.mul(&h.du()).add(&self.b.mul(&h.dv()))
    }

    fn apply3(&self, h: &P3) -> P3 {
        p3_map(h, |x| self.apply(x))
    }

    /// `[h, Xh, X²h, …]` up to `Xᵏh`.
    fn powers(&self, h: &P3, k: usize) -> Vec<P3> {
        let mut out = vec![h.clone()];
        for _ in 0..k {
            let next = self.apply3(out.last().unwrap());
            out.push(next);
        }
        out
    }
}

/// `f` and the unnormalized normal `N` as bivariate polynomials at a point.
struct Local {
    f: P3,
    big_n: P3,
}

fn vec_jets(g: &Jet, om: &Jet, sign: f64) -> Result<[Jet; 3], JetError> {
    let (g, om) = truncated(g, om);
    let gg = g.square();
    let half = om.scale(0.5);
    Ok([
        half.mul(&gg.add_scalar(1.0).scale(-sign))?,
        half.mul(&gg.neg().add_scalar(1.0))?,
        half.mul(&g.scale(2.0 * sign))?,
    ])
}

fn local(w: &WData, p: (f64, f64), deg: usize) -> Result<Local, OracleError> {
    let j = w.jets(p.0, p.1, deg).map_err(SingularError::from)?;
    // f_u = ω̂1 (−1 − g1², 1 − g1², 2 g1)/2, f_v = ω̂2 (1 + g2², 1 − g2², −2 g2)/2
    let fu = vec_jets(&j.g1, &j.w1, 1.0)?;
    let fv = vec_jets(&j.g2, &j.w2, -1.0)?;
    let f: P3 = std::array::from_fn(|i| {
        Poly2::from_u(&fu[i].integral(0.0), deg).add(&Poly2::from_v(&fv[i].integral(0.0), deg))
    });
    let g1 = Poly2::from_u(&j.g1, deg);
    let g2 = Poly2::from_v(&j.g2, deg);
    let one = Poly2::constant(1.0, deg);
    let big_n = [g1.add(&g2), g2.sub(&g1), one.add(&g1.mul(&g2))];
    Ok(Local { f, big_n })
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn truncated(a: &Jet, b: &Jet) -> (Jet, Jet) {
    let k = a.order().min(b.order());
    (a.truncate(k), b.truncate(k))
}

fn jadd(a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    let (a, b) = truncated(a, b);
    a.add(&b)
}

fn jsub(a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    let (a, b) = truncated(a, b);
    a.sub(&b)
}

fn jmul(a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    let (a, b) = truncated(a, b);
    a.mul(&b)
}

fn jdiv(a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    let (a, b) = truncated(a, b);
    a.div(&b)
}

fn jdet3(a: &[Jet; 3], b: &[Jet; 3], c: &[Jet; 3]) -> Result<Jet, JetError> {
    let minor = |i: usize, j: usize| jsub(&jmul(&b[i], &c[j])?, &jmul(&b[j], &c[i])?);
    let t0 = jmul(&a[0], &minor(1, 2)?)?;
    let t1 = jmul(&a[1], &minor(0, 2)?)?;
    let t2 = jmul(&a[2], &minor(0, 1)?)?;
    jadd(&jsub(&t0, &t1)?, &t2)
}

fn jdot(a: &[Jet; 3], b: &[Jet; 3]) -> Result<Jet, JetError> {
    jadd(&jadd(&jmul(&a[0], &b[0])?, &jmul(&a[1], &b[1])?)?, &jmul(&a[2], &b[2])?)
}

/// Coefficient-wise absolute value; products of these bound the
/// coefficients a cancelling expression could have had.
fn ab(j: &Jet) -> Jet {
    Jet::new(j.base(), j.coeffs().iter().map(|c| c.abs()).collect()).unwrap_or_else(|_| j.clone())
}

fn jdet3_abs(a: &[Jet; 3], b: &[Jet; 3], c: &[Jet; 3]) -> Result<Jet, JetError> {
    let mut acc: Option<Jet> = None;
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
        let t = jmul(&jmul(&ab(&a[i]), &ab(&b[j]))?, &ab(&c[k]))?;
        acc = Some(match acc {
            None => t,
            Some(s) => jadd(&s, &t)?,
        });
    }
    Ok(acc.expect("six terms"))
}

/// Derivative-order scales `k! |c_k|` of an absolute-value jet.
fn order_scales(j: &Jet) -> Vec<f64> {
    let mut f = 1.0;
    j.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k > 0 {
                f *= k as f64;
            }
            c * f
        })
        .collect()
}

/// Same surface with the roles of `u` and `v` exchanged. It differs from the
/// original by the reflection `(t, x, y) ↦ (−t, x, −y)`, an isometry.
pub fn mirror(w: &WData) -> WData {
    WData {
        g1: w.g2.rename(Var::U),
        g2: w.g1.rename(Var::V),
        w1: w.w2.rename(Var::U),
        w2: w.w1.rename(Var::V),
        base: (w.base.1, w.base.0),
        f0: w.f0,
    }
}

/// `δ` and `ψ` as jets in the parameter of the singular curve through `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPsi {
    pub delta: Jet,
    pub psi: Jet,
    /// The same functions from the closed forms on `g1 g2 = 1`.
    pub delta_closed: Option<Jet>,
    pub psi_closed: Option<Jet>,
    /// Cancellation scales of `δ⁽ᵏ⁾(0)` and `ψ⁽ᵏ⁾(0)`, indexed by `k`.
    pub delta_scales: Vec<f64>,
    pub psi_scales: Vec<f64>,
    /// `|dn(η)|` at `p`; nonzero exactly for fronts.
    pub front_measure: f64,
    pub front_scale: f64,
    /// Parameter speed relative to the data's `γ'`; `k`-th derivatives carry
    /// a factor `rateᵏ⁺¹`.
    pub rate: f64,
}

impl DeltaPsi {
    pub fn delta_scale(&self, k: usize) -> f64 {
        self.delta_scales.get(k).copied().unwrap_or(f64::NAN)
    }

    pub fn psi_scale(&self, k: usize) -> f64 {
        self.psi_scales.get(k).copied().unwrap_or(f64::NAN)
    }
}

struct CurveData {
    /// Speed factor of the parameter relative to `γ'` from the data.
    rate: f64,
    curve: (Jet, Jet),
    up: Jet,
    vp: Jet,
    g1: Jet,
    g2: Jet,
    w1: Jet,
    w2: Jet,
    g1p: Jet,
    g2p: Jet,
    eta: (Jet, Jet),
}

fn division(e: &Expr, d: &Expr) -> Expr {
    e.clone() / d.clone()
}

/// Taylor expansion of the singular curve `γ' = (g2'/g2, −g1'/g1)` through `p`
/// by Picard iteration.
fn g_curve_data(w: &WData, p: (f64, f64), k: usize) -> Result<CurveData, OracleError> {
    let a0 = division(&w.g2.derivative(), &w.g2);
    let b0 = -division(&w.g1.derivative(), &w.g1);
    // Unit-rate parametrization has Taylor coefficients growing like ρ⁻ᵏ,
    // ρ the distance to the nearest zero of g; stretch the parameter so the
    // curve covers about ρ/2 per unit.
    let (av, bv) = (a0.eval_value(p.1)?, b0.eval_value(p.0)?);
    let rho = (1.0 / av.abs()).min(1.0 / bv.abs()).min(1.0);
    let rate = 0.5 * rho / av.hypot(bv).max(1e-300);
    let a = Expr::Const(rate) * a0;
    let b = Expr::Const(rate) * b0;
    let mut u = Jet::constant(0.0, p.0, k);
    let mut v = Jet::constant(0.0, p.1, k);
    for _ in 0..=k + 1 {
        let nu = a.eval_with(&v)?.integral(p.0);
        let nv = b.eval_with(&u)?.integral(p.1);
        let m = nu.order().min(nv.order()).min(k);
        u = nu.truncate(m);
        v = nv.truncate(m);
    }
    let up = a.eval_with(&v)?;
    let vp = b.eval_with(&u)?;
    let g1 = w.g1.eval_with(&u)?;
    let g2 = w.g2.eval_with(&v)?;
    let w1 = w.w1.eval_with(&u)?;
    let w2 = w.w2.eval_with(&v)?;
    let eta = (jmul(&g1, &w1)?.recip()?, jmul(&g2, &w2)?.recip()?);
    Ok(CurveData {
        rate,
        curve: (u.clone(), v.clone()),
        up,
        vp,
        g1p: w.g1.derivative().eval_with(&u)?,
        g2p: w.g2.derivative().eval_with(&v)?,
        g1,
        g2,
        w1,
        w2,
        eta,
    })
}

/// The coordinate line `γ(t) = (u0 + t, v0)` with `η = ∂v` (ω̂2 vanishes).
fn w2_curve_data(w: &WData, p: (f64, f64), k: usize) -> Result<CurveData, OracleError> {
    let line = |e: &Expr| e.eval_jet(p.0, k).map(|j| j.along(1.0));
    let at_v = |e: &Expr| -> Result<Jet, OracleError> { Ok(Jet::constant(0.0, e.eval_value(p.1)?, k)) };
    let g2v = w.g2.eval_jet(p.1, k)?.derive(1)?;
    Ok(CurveData {
        rate: 1.0,
        curve: (Jet::variable(p.0, k).along(1.0), Jet::constant(0.0, p.1, k)),
        up: Jet::constant(0.0, 1.0, k),
        vp: Jet::constant(0.0, 0.0, k),
        g1: line(&w.g1)?,
        w1: line(&w.w1)?,
        g1p: line(&w.g1.derivative())?,
        g2: at_v(&w.g2)?,
        w2: at_v(&w.w2)?,
        g2p: Jet::constant(0.0, g2v, k),
        eta: (Jet::constant(0.0, 0.0, k), Jet::constant(0.0, 1.0, k)),
    })
}

fn delta_psi_from(cd: &CurveData) -> Result<DeltaPsi, JetError> {
    let (eu, ev) = &cd.eta;
    let delta = jsub(&jmul(&cd.up, ev)?, &jmul(&cd.vp, eu)?)?;
    let fu = vec_jets(&cd.g1, &cd.w1, 1.0)?;
    let fv = vec_jets(&cd.g2, &cd.w2, -1.0)?;
    let dfg = [0, 1, 2].map(|i| jadd(&jmul(&fu[i], &cd.up)?, &jmul(&fv[i], &cd.vp)?));
    let dfg = collect3(dfg)?;
    let one = Jet::constant(0.0, 1.0, cd.g1.order());
    let big_n = [
        jadd(&cd.g1, &cd.g2)?,
        jsub(&cd.g2, &cd.g1)?,
        jadd(&one, &jmul(&cd.g1, &cd.g2)?)?,
    ];
    let n_u = [cd.g1p.clone(), cd.g1p.neg(), jmul(&cd.g1p, &cd.g2)?];
    let n_v = [cd.g2p.clone(), cd.g2p.clone(), jmul(&cd.g2p, &cd.g1)?];
    let dn = collect3([0, 1, 2].map(|i| jadd(&jmul(&n_u[i], eu)?, &jmul(&n_v[i], ev)?)))?;
    let nn = jdot(&big_n, &big_n)?;
    let psi = jdiv(&jdet3(&dfg, &big_n, &dn)?, &nn)?;

    let n0 = [0, 1, 2].map(|i| big_n[i].value());
    let d0 = [0, 1, 2].map(|i| dn[i].value());
    let len = norm(n0);
    let unit = n0.map(|x| x / len);
    let along = dot(unit, d0);
    let tangential = [0, 1, 2].map(|i| (d0[i] - along * unit[i]) / len);
    Ok(DeltaPsi {
        delta_scales: order_scales(&jadd(&jmul(&ab(&cd.up), &ab(ev))?, &jmul(&ab(&cd.vp), &ab(eu))?)?),
        psi_scales: order_scales(&jmul(&jdet3_abs(&dfg, &big_n, &dn)?, &ab(&nn.recip()?))?),
        front_measure: norm(tangential),
        front_scale: norm(d0) / len,
        rate: cd.rate,
        delta,
        psi,
        delta_closed: None,
        psi_closed: None,
    })
}

fn collect3(a: [Result<Jet, JetError>; 3]) -> Result<[Jet; 3], JetError> {
    let [x, y, z] = a;
    Ok([x?, y?, z?])
}

fn varphi_expr(g: &Expr, om: &Expr) -> Expr {
    g.derivative() / (g.clone() * g.clone() * om.clone())
}

/// Jets of `δ` and `ψ` along the singular curve through a non-degenerate
/// rank-one point.
pub fn delta_psi_jets(w: &WData, sp: &SingularPoint, order: usize) -> Result<DeltaPsi, OracleError> {
    if sp.rank != 1 || sp.is_degenerate {
        return Err(OracleError::Precondition("expected a non-degenerate rank-one point".into()));
    }
    if sp.is_pure_g() {
        let cd = g_curve_data(w, sp.uv, order)?;
        let mut dp = delta_psi_from(&cd)?;
        let u = &cd.curve;
        let p1 = varphi_expr(&w.g1, &w.w1).eval_with(&u.0)?;
        let p2 = varphi_expr(&w.g2, &w.w2).eval_with(&u.1)?;
        let sum = jadd(&p1, &p2)?;
        let diff = jsub(&p1, &p2)?;
        let alpha = jmul(&jmul(&cd.w1, &cd.w2)?, &sum)?.scale(-0.5);
        dp.psi_closed = Some(jmul(&alpha, &diff)?.scale(cd.rate));
        dp.delta_closed = Some(sum.scale(cd.rate));
        return Ok(dp);
    }
    if sp.has(SingularKind::G) || sp.rank != 1 {
        return Err(OracleError::Precondition("expected a pure g- or omega-point".into()));
    }
    if sp.has(SingularKind::W2) {
        Ok(delta_psi_from(&w2_curve_data(w, sp.uv, order)?)?)
    } else {
        let m = mirror(w);
        Ok(delta_psi_from(&w2_curve_data(&m, (sp.uv.1, sp.uv.0), order)?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S1Constants {
    /// `ψ''(0)`.
    pub a: f64,
    /// `3 det(ξf, η²f, η⁵f)`.
    pub b: f64,
    pub a_scale: f64,
    pub b_scale: f64,
}

/// `A` and `B` at a g-point where `ψ(0) = ψ'(0) = 0`, with `η` oriented so
/// that `det(ξ, η) > 0`.
pub fn s1_constants(w: &WData, sp: &SingularPoint) -> Result<S1Constants, OracleError> {
    if !sp.is_pure_g() {
        return Err(OracleError::Precondition("expected a g-singular point".into()));
    }
    let dp = delta_psi_jets(w, sp, ORACLE_ORDER)?;
    let psi0 = dp.psi.value();
    let psi1 = dp.psi.derive(1)?;
    if decide(psi0, dp.psi_scale(0)) != Outcome::Zero || decide(psi1, dp.psi_scale(1)) != Outcome::Zero {
        return Err(OracleError::Precondition("psi and psi' do not both vanish".into()));
    }
    let sign = if dp.delta.value() < 0.0 { -1.0 } else { 1.0 };
    let r3 = dp.rate.powi(3);
    let a = sign * dp.psi.derive(2)? / r3;

    let (u0, v0) = sp.uv;
    let k = ORACLE_ORDER;
    let loc = local(w, sp.uv, k)?;
    let one = Expr::Const(1.0);
    let eu = (one.clone() / (w.g1.clone() * w.w1.clone())).eval_jet(u0, k)?;
    let ev = (one / (w.g2.clone() * w.w2.clone())).eval_jet(v0, k)?;
    let eta = Field2 {
        a: Poly2::from_u(&eu, k),
        b: Poly2::from_v(&ev, k),
    };
    let pw = eta.powers(&loc.f, 5);
    let fu = p3_value(&p3_map(&loc.f, |x| x.du()));
    let fv = p3_value(&p3_map(&loc.f, |x| x.dv()));
    let xa = division(&w.g2.derivative(), &w.g2).eval_value(v0)?;
    let xb = -division(&w.g1.derivative(), &w.g1).eval_value(u0)?;
    let xi = [0, 1, 2].map(|i| xa * fu[i] + xb * fv[i]);
    let e2 = p3_value(&pw[2]);
    let e5 = p3_value(&pw[5]);
    let b = sign * 3.0 * det3(xi, e2, e5);
    Ok(S1Constants {
        a,
        b,
        a_scale: dp.psi_scale(2) / r3,
        b_scale: 3.0 * norm(xi) * norm(e2) * norm(e5),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HksResult {
    /// `det(ξf, η̃²f, 3η̃⁵f − 10 C η̃⁴f)` at the point.
    pub det: f64,
    pub scale: f64,
    /// The same determinant from the one-variable shortcut.
    pub closed_form: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// (2,5)-cuspidal edge determinant at a non-front rank-one ω-point, built
/// from the special null field `η̃ = (a t + b t²) ∂u + ∂v`.
pub fn hks_25_check(w: &WData, sp: &SingularPoint) -> Result<HksResult, OracleError> {
    let one_w = sp.has(SingularKind::W1) != sp.has(SingularKind::W2);
    if !one_w || sp.has(SingularKind::G) || sp.rank != 1 {
        return Err(OracleError::Precondition("expected a rank-one omega-point".into()));
    }
    let (w, p) = if sp.has(SingularKind::W2) {
        (w.clone(), sp.uv)
    } else {
        (mirror(w), (sp.uv.1, sp.uv.0))
    };
    let k = ORACLE_ORDER;
    let loc = local(&w, p, k)?;
    let fu = p3_value(&p3_map(&loc.f, |x| x.du()));
    let fvv = p3_value(&p3_map(&loc.f, |x| x.dv().dv()));
    let fvvv = p3_value(&p3_map(&loc.f, |x| x.dv().dv().dv()));
    let uu = dot(fu, fu);
    let a = -dot(fu, fvv) / uu;
    let b = -dot(fu, fvvv) / (2.0 * uu);
    let mut coeffs = vec![0.0; k + 1];
    coeffs[1] = a;
    coeffs[2] = b;
    let field = Field2 {
        a: Poly2::from_v(&Jet::new(p.1, coeffs)?, k),
        b: Poly2::constant(1.0, k),
    };
    let pw = field.powers(&loc.f, 5);
    let [e2, e3, e4, e5] = [2, 3, 4, 5].map(|i| p3_value(&pw[i]));
    let c = dot(e3, e2) / dot(e2, e2);
    let last = [0, 1, 2].map(|i| 3.0 * e5[i] - 10.0 * c * e4[i]);
    let det = det3(fu, e2, last);

    let j = w.jets(p.0, p.1, crate::jets::DEFAULT_ORDER).map_err(SingularError::from)?;
    let q = cusp25_quantity(&j.g2, &j.w2)?;
    let wp = j.w2.derive(1)?;
    let om = 1.0 - j.g1.value() * j.g2.value();
    Ok(HksResult {
        det,
        scale: norm(fu) * norm(e2) * (3.0 * norm(e5) + 10.0 * c.abs() * norm(e4)),
        closed_form: 6.0 * j.w1.value() * wp.powi(3) * om * om * q,
        a,
        b,
        c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianResult {
    pub lambda: f64,
    pub dlambda: f64,
    pub lambda_uu: f64,
    pub lambda_uv: f64,
    pub lambda_vv: f64,
    pub hess_det: f64,
    pub scale: f64,
    /// `ηηλ` at a rank-one point.
    pub eta_eta_lambda: Option<f64>,
    /// `|dn(η)|` at rank one, `|n_u × n_v|` at rank zero.
    pub front_measure: f64,
    pub front_scale: f64,
}

/// Second-order data of `λ = det(f_u, f_v, n)`, expanded directly.
pub fn hessian_check(w: &WData, sp: &SingularPoint) -> Result<HessianResult, OracleError> {
    let deg = 6;
    let loc = local(w, sp.uv, deg)?;
    let fu = p3_map(&loc.f, |x| x.du());
    let fv = p3_map(&loc.f, |x| x.dv());
    let nn = loc.big_n[0]
        .mul(&loc.big_n[0])
        .add(&loc.big_n[1].mul(&loc.big_n[1]))
        .add(&loc.big_n[2].mul(&loc.big_n[2]));
    let inv = nn.compose(Kernel::Sqrt)?.compose(Kernel::Powi(-1))?;
    let n = p3_map(&loc.big_n, |x| x.mul(&inv));
    let cross = |a: &P3, b: &P3| -> P3 {
        [
            a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
            a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
            a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
        ]
    };
    let c = cross(&fu, &fv);
    let lam = c[0].mul(&n[0]).add(&c[1].mul(&n[1])).add(&c[2].mul(&n[2]));
    let (luu, luv, lvv) = (2.0 * lam.coeff(2, 0), lam.coeff(1, 1), 2.0 * lam.coeff(0, 2));
    let nu = p3_value(&p3_map(&n, |x| x.du()));
    let nv = p3_value(&p3_map(&n, |x| x.dv()));
    let (eta_eta, front_measure, front_scale) = if sp.rank == 0 {
        let x = [
            nu[1] * nv[2] - nu[2] * nv[1],
            nu[2] * nv[0] - nu[0] * nv[2],
            nu[0] * nv[1] - nu[1] * nv[0],
        ];
        (None, norm(x), norm(nu) * norm(nv))
    } else if norm(p3_value(&fv)) <= norm(p3_value(&fu)) {
        (Some(lvv), norm(nv), 1.0)
    } else {
        (Some(luu), norm(nu), 1.0)
    };
    let big = luu.abs().max(luv.abs()).max(lvv.abs());
    Ok(HessianResult {
        lambda: lam.value(),
        dlambda: lam.coeff(1, 0).hypot(lam.coeff(0, 1)),
        lambda_uu: luu,
        lambda_uv: luv,
        lambda_vv: lvv,
        hess_det: luu * lvv - luv * luv,
        scale: big * big,
        eta_eta_lambda: eta_eta,
        front_measure,
        front_scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub verdict: Verdict,
    /// False where the intrinsic criteria have nothing to say (higher cusps).
    pub covered: bool,
    pub trace: CriterionTrace,
    /// Sign results that would mean S1⁻, lips or D4⁻.
    pub violations: Vec<String>,
}

fn jet_derivs(t: &mut CriterionTrace, name: &str, j: &Jet, upto: usize) {
    for k in 0..=upto.min(j.order()) {
        if let Ok(d) = j.derive(k) {
            t.set(&format!("{name}_{k}"), d);
        }
    }
}

/// Verdict from the intrinsic criteria alone.
pub fn oracle_classify(w: &WData, sp: &SingularPoint) -> Result<OracleResult, OracleError> {
    use Outcome::*;
    let mut t = CriterionTrace::default();
    let mut violations = Vec::new();
    let mut covered = true;
    let on_g = sp.has(SingularKind::G);
    let on_w = sp.has(SingularKind::W1) || sp.has(SingularKind::W2);

    let verdict = if sp.rank == 0 || (sp.is_degenerate && on_g && on_w) {
        let h = hessian_check(w, sp)?;
        t.set("hess_det", h.hess_det);
        t.set("lambda_uv", h.lambda_uv);
        let front = t.test("front", h.front_measure, h.front_scale);
        let det = t.test("hess_det", h.hess_det, h.scale);
        if sp.rank == 0 {
            match (front, det) {
                (NonZero, NonZero) if h.hess_det < 0.0 => Some(Verdict::D4Plus),
                (NonZero, NonZero) => {
                    violations.push(format!("D4- pattern: det Hess = {:e}", h.hess_det));
                    None
                }
                _ => {
                    t.fail("not a front or vanishing Hessian");
                    None
                }
            }
        } else {
            let dl = t.test("dlambda", h.dlambda, 1.0);
            let ee = t.test("eta_eta_lambda", h.eta_eta_lambda.unwrap_or(0.0), h.scale.sqrt());
            match (front, dl, det) {
                (NonZero, Zero, NonZero) if h.hess_det > 0.0 => {
                    violations.push(format!("lips pattern: det Hess = {:e}", h.hess_det));
                    None
                }
                (NonZero, Zero, NonZero) if ee == NonZero => Some(Verdict::CuspidalBeaks),
                _ => {
                    t.fail("beaks pattern incomplete");
                    None
                }
            }
        }
    } else if sp.is_degenerate {
        t.fail("degenerate point outside the beaks and D4 patterns");
        None
    } else {
        let dp = delta_psi_jets(w, sp, ORACLE_ORDER)?;
        jet_derivs(&mut t, "delta", &dp.delta, 2);
        jet_derivs(&mut t, "psi", &dp.psi, 2);
        let front = t.test("front", dp.front_measure, dp.front_scale);
        let d = |t: &mut CriterionTrace, k: usize| {
            let v = dp.delta.derive(k).unwrap_or(f64::NAN);
            t.test(&format!("delta_{k}"), v, dp.delta_scale(k))
        };
        let p = |t: &mut CriterionTrace, k: usize| {
            let v = dp.psi.derive(k).unwrap_or(f64::NAN);
            t.test(&format!("psi_{k}"), v, dp.psi_scale(k))
        };
        match front {
            NonZero => match d(&mut t, 0) {
                NonZero => Some(Verdict::CuspidalEdge),
                Zero => match d(&mut t, 1) {
                    NonZero => Some(Verdict::Swallowtail),
                    Zero => match d(&mut t, 2) {
                        NonZero => Some(Verdict::CuspidalButterfly),
                        _ => {
                            t.fail("delta vanishes to second order");
                            None
                        }
                    },
                    Borderline => None,
                },
                Borderline => None,
            },
            Zero if on_w => {
                let h = hks_25_check(w, sp)?;
                t.set("hks_closed_form", h.closed_form);
                match t.test("hks_det", h.det, h.scale) {
                    NonZero => Some(Verdict::Cusp25Edge),
                    Zero => {
                        covered = false;
                        t.fail("(2,5) determinant vanishes; higher cusps are outside the intrinsic criteria");
                        None
                    }
                    Borderline => None,
                }
            }
            Zero => {
                if d(&mut t, 0) != NonZero {
                    t.fail("delta vanishes at a non-front");
                    None
                } else if p(&mut t, 0) != Zero {
                    t.fail("psi does not vanish at a non-front");
                    None
                } else {
                    match p(&mut t, 1) {
                        NonZero => Some(Verdict::CuspidalCrossCap),
                        Zero => {
                            let s = s1_constants(w, sp)?;
                            t.set("A", s.a);
                            t.set("B", s.b);
                            t.set("AB", s.a * s.b);
                            let a = t.test("A", s.a, s.a_scale);
                            let b = t.test("B", s.b, s.b_scale);
                            match (a, b) {
                                (NonZero, NonZero) if s.a * s.b > 0.0 => Some(Verdict::CuspidalS1Plus),
                                (NonZero, NonZero) => {
                                    violations.push(format!("S1- pattern: AB = {:e}", s.a * s.b));
                                    None
                                }
                                _ => {
                                    t.fail("A or B vanishes");
                                    None
                                }
                            }
                        }
                        Borderline => None,
                    }
                }
            }
            Borderline => None,
        }
    };
    let verdict = verdict.unwrap_or(Verdict::Unclassified);
    if verdict == Verdict::Unclassified && t.reasons.is_empty() {
        t.fail("no intrinsic criterion matched");
    }
    Ok(OracleResult {
        verdict,
        covered,
        trace: t,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossEntry {
    pub u: f64,
    pub v: f64,
    pub verdict_wdata: Verdict,
    pub verdict_oracle: Verdict,
    pub covered: bool,
    pub borderline: bool,
    pub agree: bool,
    pub margins: BTreeMap<String, f64>,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CrossReport {
    pub entries: Vec<CrossEntry>,
    pub agreements: usize,
    pub disagreements: usize,
    pub uncovered: usize,
    pub borderline: usize,
}

impl CrossReport {
    pub fn disagreeing(&self) -> impl Iterator<Item = &CrossEntry> {
        self.entries.iter().filter(|e| e.covered && !e.agree)
    }

    /// Agreement rate over covered, non-borderline entries.
    pub fn agreement_rate(&self) -> f64 {
        let (mut n, mut ok) = (0usize, 0usize);
        for e in &self.entries {
            if e.covered && !e.borderline {
                n += 1;
                ok += e.agree as usize;
            }
        }
        if n == 0 {
            1.0
        } else {
            ok as f64 / n as f64
        }
    }
}

pub fn cross_entry(w: &WData, sp: &SingularPoint) -> CrossEntry {
    let wd = classify_point(w, sp);
    let or = oracle_classify(w, sp);
    let (verdict_wdata, b1) = match &wd {
        Ok(c) => (c.verdict, c.trace.is_borderline()),
        Err(_) => (Verdict::Unclassified, false),
    };
    let (verdict_oracle, covered, b2, margins, violations) = match or {
        Ok(o) => (o.verdict, o.covered, o.trace.is_borderline(), o.trace.values, o.violations),
        Err(e) => (
            Verdict::Unclassified,
            true,
            false,
            BTreeMap::new(),
            vec![format!("oracle failed: {e}")],
        ),
    };
    CrossEntry {
        u: sp.uv.0,
        v: sp.uv.1,
        verdict_wdata,
        verdict_oracle,
        covered,
        borderline: b1 || b2 || sp.low_confidence,
        agree: verdict_wdata == verdict_oracle,
        margins,
        violations,
    }
}

/// Both engines on every point.
pub fn crosscheck(w: &WData, points: &[SingularPoint]) -> CrossReport {
    let entries: Vec<CrossEntry> = points.par_iter().map(|sp| cross_entry(w, sp)).collect();
    let mut r = CrossReport::default();
    for e in &entries {
        if !e.covered {
            r.uncovered += 1;
        } else if e.agree {
            r.agreements += 1;
        } else {
            r.disagreements += 1;
        }
        r.borderline += e.borderline as usize;
    }
    r.entries = entries;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::singular::analyze_point;

    fn wd(g1: &str, g2: &str, w1: &str, w2: &str) -> WData {
        WData::parse(g1, g2, w1, w2).unwrap()
    }

    #[test]
    fn poly2_arithmetic() {
        let u = Poly2::from_u(&Jet::variable(0.0, 4), 4);
        let v = Poly2::from_v(&Jet::variable(0.0, 4), 4);
        let p = u.add(&v).mul(&u.sub(&v));
        assert_eq!(p.coeff(2, 0), 1.0);
        assert_eq!(p.coeff(0, 2), -1.0);
        assert_eq!(p.coeff(1, 1), 0.0);
        assert_eq!(p.du().coeff(1, 0), 2.0);
        // 1/sqrt(1 + u) = 1 − u/2 + 3u²/8
        let q = u.add(&Poly2::constant(1.0, 4)).compose(Kernel::Sqrt).unwrap();
        let r = q.compose(Kernel::Powi(-1)).unwrap();
        assert!((r.coeff(1, 0) + 0.5).abs() < 1e-15);
        assert!((r.coeff(2, 0) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn closed_and_determinant_forms_agree() {
        let w = wd("u", "-v", "1", "1");
        for u in [0.6, 1.0, 1.7] {
            let sp = analyze_point(&w, (u, -1.0 / u)).unwrap();
            let dp = delta_psi_jets(&w, &sp, 8).unwrap();
            let dc = dp.delta_closed.as_ref().unwrap();
            let pc = dp.psi_closed.as_ref().unwrap();
            for k in 0..=3 {
                let (a, b) = (dp.delta.derive(k).unwrap(), dc.derive(k).unwrap());
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "delta {k}: {a} {b}");
                let (a, b) = (dp.psi.derive(k).unwrap(), pc.derive(k).unwrap());
                assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "psi {k}: {a} {b}");
            }
        }
    }

    #[test]
    fn enneper_swallowtail() {
        let w = wd("u", "-v", "1", "1");
        let sp = analyze_point(&w, (1.0, -1.0)).unwrap();
        let o = oracle_classify(&w, &sp).unwrap();
        assert_eq!(o.verdict, Verdict::Swallowtail);
        let sp = analyze_point(&w, (2.0, -0.5)).unwrap();
        assert_eq!(oracle_classify(&w, &sp).unwrap().verdict, Verdict::CuspidalEdge);
    }

    #[test]
    fn omega_line_delta_is_one() {
        let w = wd("0", "v", "1", "v");
        let sp = analyze_point(&w, (0.0, 0.0)).unwrap();
        let dp = delta_psi_jets(&w, &sp, 6).unwrap();
        assert_eq!(dp.delta.value(), 1.0);
        assert_eq!(oracle_classify(&w, &sp).unwrap().verdict, Verdict::CuspidalEdge);
    }

    #[test]
    fn hks_generator() {
        let w = wd("0", "v^3", "1", "v");
        let sp = analyze_point(&w, (0.0, 0.0)).unwrap();
        let h = hks_25_check(&w, &sp).unwrap();
        assert!((h.det - 36.0).abs() < 1e-8, "{h:?}");
        assert!((h.closed_form - 36.0).abs() < 1e-8);
        assert_eq!(h.a, 0.0);
        let w = wd("0", "v^5", "1", "v");
        let sp = analyze_point(&w, (0.0, 0.0)).unwrap();
        assert!(hks_25_check(&w, &sp).unwrap().det.abs() < 1e-10);
        let o = oracle_classify(&w, &sp).unwrap();
        assert!(!o.covered);
    }

    #[test]
    fn hks_with_nonzero_field() {
        // g1 + g2 ≠ 0 at p gives a, b ≠ 0
        let w = wd("u + 1", "v^3", "2 + u", "v + v^2");
        let sp = analyze_point(&w, (0.0, 0.0)).unwrap();
        let h = hks_25_check(&w, &sp).unwrap();
        assert!(h.a != 0.0 && h.b != 0.0);
        assert!((h.det - h.closed_form).abs() <= 1e-8 * h.det.abs().max(1.0), "{h:?}");
        // the mirrored side
        let m = mirror(&w);
        let sp = analyze_point(&m, (0.0, 0.0)).unwrap();
        let hm = hks_25_check(&m, &sp).unwrap();
        assert!((hm.det - h.det).abs() < 1e-8);
    }

    #[test]
    fn hessians() {
        let w = wd("u", "v", "u", "v");
        let sp = analyze_point(&w, (0.0, 0.0)).unwrap();
        let h = hessian_check(&w, &sp).unwrap();
        assert!((h.hess_det + 0.25).abs() < 1e-12, "{h:?}");
        assert_eq!(oracle_classify(&w, &sp).unwrap().verdict, Verdict::D4Plus);
        let w = wd("exp(u)", "exp(v)", "1", "v");
        let sp = analyze_point(&w, (0.0, 0.0)).unwrap();
        let h = hessian_check(&w, &sp).unwrap();
        let c = classify(&w, (0.0, 0.0)).unwrap();
        assert!((h.hess_det - c.trace.get("hess_det").unwrap()).abs() < 1e-12);
        assert!((h.eta_eta_lambda.unwrap() - c.trace.get("eta_eta_lambda").unwrap()).abs() < 1e-12, "{h:?} {:?}", c.trace.values);
        assert_eq!(oracle_classify(&w, &sp).unwrap().verdict, Verdict::CuspidalBeaks);
    }

    #[test]
    fn crosscheck_counts() {
        let w = wd("u", "-v", "1", "1");
        let pts: Vec<_> = [0.5, 1.0, 1.5]
            .iter()
            .map(|&u| analyze_point(&w, (u, -1.0 / u)).unwrap())
            .collect();
        let r = crosscheck(&w, &pts);
        assert_eq!(r.agreements, 3);
        assert_eq!(r.disagreements, 0);
        assert_eq!(r.agreement_rate(), 1.0);
    }
}
