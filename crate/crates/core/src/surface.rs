//! Surfaces built from real Weierstrass data `(g1, g2, ω̂1, ω̂2)`.
//!
//! Points of 𝕃³ are stored as `(t, x, y)` with the Lorentz product
//! `−t t' + x x' + y y'`. The surface is
//!
//! ```text
//! f(u, v) = f0 + ½∫ ω̂1 (−1 − g1², 1 − g1², 2 g1) du + ½∫ ω̂2 (1 + g2², 1 − g2², −2 g2) dv
//! ```
//!
//! which splits into a function of `u` plus a function of `v`.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::expr::{parse, EvalError, Expr, ParseError, Var};
use crate::jets::{Jet, DEFAULT_ORDER};
use crate::quad::{self, QuadError};

pub type Vec3 = Vector3<f64>;

/// Absolute tolerance of the position integrals.
pub const QUAD_TOL: f64 = 1e-10;

pub fn lorentz(a: &Vec3, b: &Vec3) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("{name} may only depend on {allowed}, but uses `{found}`")]
    WrongVariable {
        name: &'static str,
        allowed: &'static str,
        found: &'static str,
    },
    #[error("cannot parse {name}: {source}")]
    Parse {
        name: &'static str,
        source: ParseError,
    },
    #[error("{name} has no finite value at {at}: {source}")]
    NotFinite {
        name: &'static str,
        at: f64,
        source: EvalError,
    },
    #[error("{name} is not a null curve: |<c',c'>| = {residual:e} at {at} (speed² {speed_sq:e})")]
    NotNull {
        name: &'static str,
        at: f64,
        residual: f64,
        speed_sq: f64,
    },
    #[error("cannot recover {name} at {at}: both quotient formulas have a pole")]
    Unrecoverable { name: &'static str, at: f64 },
    #[error("position integral along {axis}: {source}")]
    Quadrature {
        axis: &'static str,
        source: QuadError,
    },
}

/// Rectangular parameter domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Domain {
        Domain { u, v }
    }

    pub fn contains(&self, p: (f64, f64), slack: f64) -> bool {
        p.0 >= self.u.0 - slack
            && p.0 <= self.u.1 + slack
            && p.1 >= self.v.0 - slack
            && p.1 <= self.v.1 + slack
    }

    /// Length of the longer side.
    pub fn extent(&self) -> f64 {
        (self.u.1 - self.u.0).max(self.v.1 - self.v.0)
    }
}

/// `n` evenly spaced points covering `[a, b]` inclusively.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Real Weierstrass data together with the base point and the position there.
#[derive(Debug, Clone, PartialEq)]
pub struct WData {
    pub g1: Expr,
    pub g2: Expr,
    pub w1: Expr,
    pub w2: Expr,
    pub base: (f64, f64),
    pub f0: Vec3,
}

/// Jets of the four data functions: `g1, w1` in `u`, `g2, w2` in `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointJets {
    pub g1: Jet,
    pub w1: Jet,
    pub g2: Jet,
    pub w2: Jet,
}

/// Plain values of the four data functions at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub g1: f64,
    pub w1: f64,
    pub g2: f64,
    pub w2: f64,
}

/// Value of `e` at `x`. A removable singularity (say `sin(u)/u` at 0) has no
/// order-0 value, so a short jet resolves it by cancellation.
pub fn value_at(e: &Expr, x: f64) -> Result<f64, EvalError> {
    match e.eval_value(x) {
        Ok(v) => Ok(v),
        Err(first) => match e.eval_jet(x, 4) {
            Ok(j) => Ok(j.value()),
            Err(_) => Err(first),
        },
    }
}

fn check_vars(name: &'static str, e: &Expr, forbidden: Var, allowed: &'static str) -> Result<(), SurfaceError> {
    let vars = e.variables();
    if vars.contains(&forbidden) {
        return Err(SurfaceError::WrongVariable {
            name,
            allowed,
            found: forbidden.name(),
        });
    }
    if vars.len() > 1 {
        let found = vars.iter().nth(1).map(|v| v.name()).unwrap_or("?");
        return Err(SurfaceError::WrongVariable { name, allowed, found });
    }
    Ok(())
}

impl WData {
    pub fn new(g1: Expr, g2: Expr, w1: Expr, w2: Expr) -> Result<WData, SurfaceError> {
        let w = WData {
            g1,
            g2,
            w1,
            w2,
            base: (0.0, 0.0),
            f0: Vec3::zeros(),
        };
        w.validate()?;
        Ok(w)
    }

    /// Parse the four DSL strings, in the order `g1, g2, ω̂1, ω̂2`.
    pub fn parse(g1: &str, g2: &str, w1: &str, w2: &str) -> Result<WData, SurfaceError> {
        let p = |name, s: &str| parse(s).map_err(|source| SurfaceError::Parse { name, source });
        WData::new(p("g1", g1)?, p("g2", g2)?, p("w1", w1)?, p("w2", w2)?)
    }

    pub fn with_base(mut self, u0: f64, v0: f64) -> WData {
        self.base = (u0, v0);
        self
    }

    pub fn with_f0(mut self, f0: Vec3) -> WData {
        self.f0 = f0;
        self
    }

    /// `g1, ω̂1` may not mention `v`; `g2, ω̂2` may not mention `u`.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        check_vars("g1", &self.g1, Var::V, "u")?;
        check_vars("w1", &self.w1, Var::V, "u")?;
        check_vars("g2", &self.g2, Var::U, "v")?;
        check_vars("w2", &self.w2, Var::U, "v")?;
        Ok(())
    }

    pub fn jets(&self, u: f64, v: f64, order: usize) -> Result<PointJets, SurfaceError> {
        let j = |name, e: &Expr, x| {
            e.eval_jet(x, order)
                .map_err(|source| SurfaceError::NotFinite { name, at: x, source })
        };
        Ok(PointJets {
            g1: j("g1", &self.g1, u)?,
            w1: j("w1", &self.w1, u)?,
            g2: j("g2", &self.g2, v)?,
            w2: j("w2", &self.w2, v)?,
        })
    }

    pub fn values(&self, u: f64, v: f64) -> Result<PointValues, SurfaceError> {
        let val = |name, e: &Expr, x| {
            value_at(e, x).map_err(|source| SurfaceError::NotFinite { name, at: x, source })
        };
        Ok(PointValues {
            g1: val("g1", &self.g1, u)?,
            w1: val("w1", &self.w1, u)?,
            g2: val("g2", &self.g2, v)?,
            w2: val("w2", &self.w2, v)?,
        })
    }

    /// Data `(g1, g2, ω̂1, −ω̂2)`.
    pub fn conjugate(&self) -> WData {
        let w2 = match &self.w2 {
            Expr::Neg(inner) => (**inner).clone(),
            other => Expr::Neg(Box::new(other.clone())),
        };
        WData {
            w2,
            ..self.clone()
        }
    }

    /// Data `(g1, g2, e^θ ω̂1, e^−θ ω̂2)`.
    pub fn associate(&self, theta: f64) -> WData {
        if theta == 0.0 {
            return self.clone();
        }
        WData {
            w1: Expr::Const(theta.exp()) * self.w1.clone(),
            w2: Expr::Const((-theta).exp()) * self.w2.clone(),
            ..self.clone()
        }
    }

    /// Velocity-form null curves `φ' = 2 f_u`, `ψ' = 2 f_v`.
    pub fn to_null_curves(&self) -> NullCurvePair {
        let one = || Expr::Const(1.0);
        let g1sq = || Expr::Pow(Box::new(self.g1.clone()), 2);
        let g2sq = || Expr::Pow(Box::new(self.g2.clone()), 2);
        let w1 = || self.w1.clone();
        let w2 = || self.w2.clone();
        let phi = [
            w1() * (Expr::Const(-1.0) - g1sq()),
            w1() * (one() - g1sq()),
            w1() * (Expr::Const(2.0) * self.g1.clone()),
        ];
        let psi = [
            w2() * (one() + g2sq()),
            w2() * (one() - g2sq()),
            w2() * (Expr::Const(-2.0) * self.g2.clone()),
        ];
        NullCurvePair {
            phi,
            psi,
            form: CurveForm::Velocity,
            base: self.base,
            f0: Some(self.f0),
        }
    }
}

/// Partial derivatives of `f` from the data values.
pub fn partials(p: &PointValues) -> (Vec3, Vec3) {
    let (g1, g2) = (p.g1, p.g2);
    let fu = Vec3::new(-1.0 - g1 * g1, 1.0 - g1 * g1, 2.0 * g1) * (0.5 * p.w1);
    let fv = Vec3::new(1.0 + g2 * g2, 1.0 - g2 * g2, -2.0 * g2) * (0.5 * p.w2);
    (fu, fv)
}

/// Euclidean unit normal.
pub fn normal(g1: f64, g2: f64) -> Vec3 {
    let n = Vec3::new(g1 + g2, g2 - g1, 1.0 + g1 * g2);
    n / n.norm()
}

/// `Λ = −½ √((1 − g1 g2)² + 2 (g1 + g2)²)`.
pub fn big_lambda(g1: f64, g2: f64) -> f64 {
    let a = 1.0 - g1 * g2;
    let b = g1 + g2;
    -0.5 * (a * a + 2.0 * b * b).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub f: Vec3,
    pub fu: Vec3,
    pub fv: Vec3,
    pub n: Vec3,
    pub lambda: f64,
}

/// The four factors of `λ = Λ (1 − g1 g2) ω̂1 ω̂2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaFactors {
    pub big_lambda: f64,
    pub one_minus_g1g2: f64,
    pub w1: f64,
    pub w2: f64,
}

impl AreaFactors {
    pub fn product(&self) -> f64 {
        self.big_lambda * self.one_minus_g1g2 * self.w1 * self.w2
    }
}

pub fn area_density_factored(w: &WData, u: f64, v: f64) -> Result<AreaFactors, SurfaceError> {
    let p = w.values(u, v)?;
    Ok(AreaFactors {
        big_lambda: big_lambda(p.g1, p.g2),
        one_minus_g1g2: 1.0 - p.g1 * p.g2,
        w1: p.w1,
        w2: p.w2,
    })
}

/// Frame without the position: `f` is left at zero.
pub fn eval_local_frame(w: &WData, u: f64, v: f64) -> Result<FramePoint, SurfaceError> {
    let p = w.values(u, v)?;
    let (fu, fv) = partials(&p);
    let n = normal(p.g1, p.g2);
    let lambda = Matrix3::from_columns(&[fu, fv, n]).determinant();
    Ok(FramePoint {
        f: Vec3::zeros(),
        fu,
        fv,
        n,
        lambda,
    })
}

pub fn eval_frame(w: &WData, u: f64, v: f64) -> Result<FramePoint, SurfaceError> {
    let mut frame = eval_local_frame(w, u, v)?;
    frame.f = eval_position(w, u, v)?;
    Ok(frame)
}

/// Hopf coefficients `Q = ω̂1 (g1)_u`, `R = −ω̂2 (g2)_v`.
pub fn hopf(w: &WData, u: f64, v: f64) -> Result<(f64, f64), SurfaceError> {
    let j = w.jets(u, v, 1)?;
    Ok((
        j.w1.value() * j.g1.coeffs()[1],
        -j.w2.value() * j.g2.coeffs()[1],
    ))
}

fn integrand_u(w: &WData, u: f64) -> Option<[f64; 3]> {
    let g = value_at(&w.g1, u).ok()?;
    let a = value_at(&w.w1, u).ok()?;
    Some([0.5 * a * (-1.0 - g * g), 0.5 * a * (1.0 - g * g), a * g])
}

fn integrand_v(w: &WData, v: f64) -> Option<[f64; 3]> {
    let g = value_at(&w.g2, v).ok()?;
    let a = value_at(&w.w2, v).ok()?;
    Some([0.5 * a * (1.0 + g * g), 0.5 * a * (1.0 - g * g), -a * g])
}

/// `∫_{u0}^{u} f_u du`.
pub fn integral_u(w: &WData, u: f64) -> Result<Vec3, SurfaceError> {
    quad::integrate(|x| integrand_u(w, x), w.base.0, u, QUAD_TOL)
        .map(Vec3::from)
        .map_err(|source| SurfaceError::Quadrature { axis: "u", source })
}

/// `∫_{v0}^{v} f_v dv`.
pub fn integral_v(w: &WData, v: f64) -> Result<Vec3, SurfaceError> {
    quad::integrate(|x| integrand_v(w, x), w.base.1, v, QUAD_TOL)
        .map(Vec3::from)
        .map_err(|source| SurfaceError::Quadrature { axis: "v", source })
}

pub fn eval_position(w: &WData, u: f64, v: f64) -> Result<Vec3, SurfaceError> {
    Ok(w.f0 + integral_u(w, u)? + integral_v(w, v)?)
}

/// Integrals from `x0` to every point of `xs`, accumulated segment by segment.
fn cumulative<F>(mut f: F, x0: f64, xs: &[f64], axis: &'static str) -> Result<Vec<Vec3>, SurfaceError>
where
    F: FnMut(f64) -> Option<[f64; 3]>,
{
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![Vec3::zeros(); xs.len()];
    let split = order.partition_point(|&i| xs[i] < x0);
    let mut walk = |idx: &mut dyn Iterator<Item = &usize>| -> Result<(), SurfaceError> {
        let mut at = x0;
        let mut acc = Vec3::zeros();
        for &i in idx {
            let seg = quad::integrate(&mut f, at, xs[i], QUAD_TOL)
                .map_err(|source| SurfaceError::Quadrature { axis, source })?;
            acc += Vec3::from(seg);
            at = xs[i];
            out[i] = acc;
        }
        Ok(())
    };
    walk(&mut order[split..].iter())?;
    walk(&mut order[..split].iter().rev())?;
    Ok(out)
}

/// Positions on the tensor grid `us × vs`, indexed `[i][j]` for `(us[i], vs[j])`.
pub fn position_grid(w: &WData, us: &[f64], vs: &[f64]) -> Result<Vec<Vec<Vec3>>, SurfaceError> {
    let fu = cumulative(|x| integrand_u(w, x), w.base.0, us, "u")?;
    let fv = cumulative(|x| integrand_v(w, x), w.base.1, vs, "v")?;
    Ok(fu
        .iter()
        .map(|a| fv.iter().map(|b| w.f0 + a + b).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveForm {
    /// Components are the curves themselves.
    Position,
    /// Components are the velocities `φ'`, `ψ'`.
    Velocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullCurvePair {
    pub phi: [Expr; 3],
    pub psi: [Expr; 3],
    pub form: CurveForm,
    pub base: (f64, f64),
    /// Position at the base point. Derived from the curves in position form
    /// when absent, zero in velocity form.
    pub f0: Option<Vec3>,
}

impl NullCurvePair {
    pub fn velocities(&self) -> ([Expr; 3], [Expr; 3]) {
        match self.form {
            CurveForm::Velocity => (self.phi.clone(), self.psi.clone()),
            CurveForm::Position => (
                self.phi.clone().map(|e| e.derivative()),
                self.psi.clone().map(|e| e.derivative()),
            ),
        }
    }

    fn initial_position(&self) -> Result<Vec3, SurfaceError> {
        if let Some(f0) = self.f0 {
            return Ok(f0);
        }
        if self.form == CurveForm::Velocity {
            return Ok(Vec3::zeros());
        }
        let mut f0 = Vec3::zeros();
        for i in 0..3 {
            let a = value_at(&self.phi[i], self.base.0).map_err(|source| SurfaceError::NotFinite {
                name: "phi",
                at: self.base.0,
                source,
            })?;
            let b = value_at(&self.psi[i], self.base.1).map_err(|source| SurfaceError::NotFinite {
                name: "psi",
                at: self.base.1,
                source,
            })?;
            f0[i] = 0.5 * (a + b);
        }
        Ok(f0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullReport {
    pub max_residual: f64,
    pub worst_at: f64,
    pub max_speed_sq: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Sample `<c', c'>` for a velocity `c'` on `samples` evenly spaced points.
/// Points where the velocity cannot be evaluated are skipped.
pub fn check_null(velocity: &[Expr; 3], interval: (f64, f64), samples: usize) -> NullReport {
    let mut max_residual = 0.0f64;
    let mut worst_at = interval.0;
    let mut max_speed_sq = 0.0f64;
    let mut used = 0;
    for x in linspace(interval.0, interval.1, samples.max(2)) {
        let mut c = Vec3::zeros();
        let mut ok = true;
        for i in 0..3 {
            match value_at(&velocity[i], x) {
                Ok(val) => c[i] = val,
                Err(_) => ok = false,
            }
        }
        if !ok {
            continue;
        }
        used += 1;
        let r = lorentz(&c, &c).abs();
        if r > max_residual {
            max_residual = r;
            worst_at = x;
        }
        max_speed_sq = max_speed_sq.max(c.norm_squared());
    }
    NullReport {
        max_residual,
        worst_at,
        max_speed_sq,
        samples: used,
        passed: used > 0 && max_residual <= 1e-9 * max_speed_sq,
    }
}

/// Leading position and magnitude of a jet, for comparing two quotient
/// denominators. Lower index wins, then larger magnitude.
fn lead_key(e: &Expr, x: f64) -> Option<(usize, f64)> {
    let j = e.eval_jet(x, DEFAULT_ORDER).ok()?;
    let scale = j.magnitude();
    if scale == 0.0 {
        return None;
    }
    let idx = j.coeffs().iter().position(|c| c.abs() > 1e-13 * scale)?;
    Some((idx, j.coeffs()[idx].abs()))
}

fn prefer(primary: (Expr, Expr), alternate: (Expr, Expr), at: f64) -> Expr {
    let a = lead_key(&primary.1, at);
    let b = lead_key(&alternate.1, at);
    let use_alt = match (a, b) {
        (None, Some(_)) => true,
        (Some((ia, ma)), Some((ib, mb))) => ib < ia || (ib == ia && mb > ma),
        _ => false,
    };
    let (num, den) = if use_alt { alternate } else { primary };
    num / den
}

/// Recover W-data from a pair of null curves. Nullity is checked on `domain`.
pub fn from_null_curves(p: &NullCurvePair, domain: &Domain) -> Result<WData, SurfaceError> {
    let (dphi, dpsi) = p.velocities();
    for (name, vel, range) in [("phi", &dphi, domain.u), ("psi", &dpsi, domain.v)] {
        let report = check_null(vel, range, 257);
        if !report.passed {
            return Err(SurfaceError::NotNull {
                name,
                at: report.worst_at,
                residual: report.max_residual,
                speed_sq: report.max_speed_sq,
            });
        }
    }
    let [p0, p1, p2] = dphi;
    let [q0, q1, q2] = dpsi;
    let half = |e: Expr| e / Expr::Const(2.0);
    let w1 = half(p1.clone() - p0.clone());
    let w2 = half(q0.clone() + q1.clone());
    // g1 = φ²'/(φ¹' − φ⁰') = −(φ⁰' + φ¹')/φ²'
    let g1 = prefer(
        (p2.clone(), p1.clone() - p0.clone()),
        (-(p0 + p1), p2.clone()),
        p.base.0,
    );
    // g2 = −ψ²'/(ψ⁰' + ψ¹') = −(ψ⁰' − ψ¹')/ψ²'
    let g2 = prefer(
        (-q2.clone(), q0.clone() + q1.clone()),
        (-(q0 - q1), q2),
        p.base.1,
    );
    let w = WData::new(g1, g2, w1, w2)?
        .with_base(p.base.0, p.base.1)
        .with_f0(p.initial_position()?);
    if w.g1.eval_jet(p.base.0, DEFAULT_ORDER).is_err() {
        return Err(SurfaceError::Unrecoverable {
            name: "g1",
            at: p.base.0,
        });
    }
    if w.g2.eval_jet(p.base.1, DEFAULT_ORDER).is_err() {
        return Err(SurfaceError::Unrecoverable {
            name: "g2",
            at: p.base.1,
        });
    }
    Ok(w)
}

/// Triangulated OBJ mesh over `grid.0 × grid.1` parameter nodes, with
/// optional parameter-space polylines appended as line objects.
pub fn mesh_obj(
    w: &WData,
    domain: &Domain,
    grid: (usize, usize),
    overlay: &[Vec<(f64, f64)>],
) -> Result<String, SurfaceError> {
    let us = linspace(domain.u.0, domain.u.1, grid.0);
    let vs = linspace(domain.v.0, domain.v.1, grid.1);
    let pos = position_grid(w, &us, &vs)?;
    let mut out = String::new();
    let _ = writeln!(out, "# minface surface mesh");
    let _ = writeln!(out, "# vertex axis order: x y t (time coordinate last)");
    let _ = writeln!(out, "# grid {} x {} over u [{}, {}], v [{}, {}]", grid.0, grid.1, domain.u.0, domain.u.1, domain.v.0, domain.v.1);
    let _ = writeln!(out, "o surface");
    for row in &pos {
        for p in row {
            let _ = writeln!(out, "v {} {} {}", p[1], p[2], p[0]);
        }
    }
    let idx = |i: usize, j: usize| i * grid.1 + j + 1;
    for i in 0..grid.0.saturating_sub(1) {
        for j in 0..grid.1.saturating_sub(1) {
            let _ = writeln!(out, "f {} {} {}", idx(i, j), idx(i + 1, j), idx(i + 1, j + 1));
            let _ = writeln!(out, "f {} {} {}", idx(i, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
    let mut next = grid.0 * grid.1 + 1;
    for (k, line) in overlay.iter().enumerate() {
        if line.len() < 2 {
            continue;
        }
        let _ = writeln!(out, "o singular_{k}");
        let start = next;
        for &(u, v) in line {
            let p = eval_position(w, u, v)?;
            let _ = writeln!(out, "v {} {} {}", p[1], p[2], p[0]);
            next += 1;
        }
        let ids: Vec<String> = (start..next).map(|i| i.to_string()).collect();
        let _ = writeln!(out, "l {}", ids.join(" "));
    }
    Ok(out)
}

/// CSV of frames over `us × vs`.
pub fn frames_csv(w: &WData, us: &[f64], vs: &[f64]) -> Result<String, SurfaceError> {
    let pos = position_grid(w, us, vs)?;
    let mut wr = csv::Writer::from_writer(Vec::new());
    let header = [
        "u", "v", "f_t", "f_x", "f_y", "fu_t", "fu_x", "fu_y", "fv_t", "fv_x", "fv_y", "n_t",
        "n_x", "n_y", "lambda",
    ];
    wr.write_record(header).expect("in-memory write");
    for (i, &u) in us.iter().enumerate() {
        for (j, &v) in vs.iter().enumerate() {
            let fr = eval_local_frame(w, u, v)?;
            let f = pos[i][j];
            let mut rec = vec![u, v, f[0], f[1], f[2]];
            rec.extend(fr.fu.iter());
            rec.extend(fr.fv.iter());
            rec.extend(fr.n.iter());
            rec.push(fr.lambda);
            wr.write_record(rec.iter().map(|x| x.to_string()))
                .expect("in-memory write");
        }
    }
    Ok(String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("utf8"))
}
