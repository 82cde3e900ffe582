//! One-dimensional root finding: bracketed Newton, regula falsi and a
//! scan-based root isolator for expressions.

use crate::expr::Expr;
use crate::surface::{linspace, value_at};

/// Newton's method safeguarded by bisection on a bracket `[a, b]` where `f`
/// changes sign. `f` returns value and derivative. Stops once `|f| ≤ tol` or
/// the bracket collapses; the caller judges the residual.
pub fn rtsafe<F>(mut f: F, a: f64, b: f64, tol: f64) -> Option<f64>
where
    F: FnMut(f64) -> Option<(f64, f64)>,
{
    let (fa, _) = f(a)?;
    let (fb, _) = f(b)?;
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = 0.5 * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    for _ in 0..200 {
        let (fx, dfx) = match f(x) {
            Some(r) => r,
            None => {
                // step back into the bracket by bisection
                x = 0.5 * (lo + hi);
                continue;
            }
        };
        if fx.abs() <= tol {
            return Some(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let inside = (newton - lo) * (newton - hi) < 0.0;
        if dfx == 0.0 || !newton.is_finite() || !inside || (2.0 * fx).abs() > (dx_old * dfx).abs() {
            dx_old = dx;
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx_old = dx;
            dx = fx / dfx;
            x = newton;
        }
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Some(x);
        }
    }
    Some(x)
}

/// Illinois variant of regula falsi for functions without derivatives.
pub fn illinois<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64>
where
    F: FnMut(f64) -> Option<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0;
    let mut x = a;
    for _ in 0..200 {
        x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || (x - a) * (x - b) > 0.0 {
            x = 0.5 * (a + b);
        }
        let fx = match f(x) {
            Some(v) => v,
            None => {
                x = 0.5 * (a + b);
                f(x)?
            }
        };
        if fx.abs() <= tol || (b - a).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Some(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Some(x)
}

/// A located zero of a univariate expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub derivative: f64,
    /// The derivative vanishes too.
    pub multiple: bool,
    /// Found as a local minimum of `|f|` without a sign change.
    pub tangential: bool,
}

fn value_and_slope(e: &Expr, x: f64) -> Option<(f64, f64)> {
    let j = e.eval_jet(x, 1).ok()?;
    if j.order() < 1 {
        return None;
    }
    Some((j.coeffs()[0], j.coeffs()[1]))
}

fn slope_and_curvature(e: &Expr, x: f64) -> Option<(f64, f64)> {
    let j = e.eval_jet(x, 2).ok()?;
    if j.order() < 2 {
        return None;
    }
    Some((j.coeffs()[1], 2.0 * j.coeffs()[2]))
}

/// Roots of `e` on `[a, b]`: sign changes on an `n`-point scan polished to
/// `|e| ≤ tol` (relative to the bracket values), plus tangential zeros found
/// by minimizing `|e|` near scan minima. Sign changes across poles are
/// rejected by the residual test.
pub fn expr_roots(e: &Expr, a: f64, b: f64, n: usize, tol: f64) -> Vec<Root> {
    let xs = linspace(a, b, n.max(2));
    let vals: Vec<Option<f64>> = xs
        .iter()
        .map(|&x| value_at(e, x).ok().filter(|v| v.is_finite()))
        .collect();
    let mut roots = Vec::new();
    let mut push = |x: f64, tangential: bool, scale: f64| {
        let Some(v) = value_at(e, x).ok() else { return };
        if v.abs() > tol * scale.max(1.0) {
            return;
        }
        let d = value_and_slope(e, x).map(|p| p.1).unwrap_or(0.0);
        roots.push(Root {
            x,
            residual: v,
            derivative: d,
            multiple: tangential || d.abs() <= 1e-8 * scale.max(1.0),
            tangential,
        });
    };
    for i in 0..xs.len() {
        let Some(fi) = vals[i] else { continue };
        if fi == 0.0 {
            push(xs[i], false, 1.0);
            continue;
        }
        if i + 1 < xs.len() {
            if let Some(fj) = vals[i + 1] {
                if fj != 0.0 && fi.signum() != fj.signum() {
                    let scale = fi.abs().max(fj.abs());
                    let x = rtsafe(|x| value_and_slope(e, x), xs[i], xs[i + 1], 1e-3 * tol)
                        .or_else(|| illinois(|x| value_at(e, x).ok(), xs[i], xs[i + 1], 1e-3 * tol));
                    if let Some(x) = x {
                        push(x, false, scale);
                    }
                }
            }
        }
        // tangential zero: |f| has a local minimum with no sign change nearby
        if i > 0 && i + 1 < xs.len() {
            if let (Some(fl), Some(fr)) = (vals[i - 1], vals[i + 1]) {
                let same = fl.signum() == fi.signum() && fr.signum() == fi.signum() && fl != 0.0 && fr != 0.0;
                if same && fi.abs() < fl.abs() && fi.abs() <= fr.abs() {
                    if let Some(x) = rtsafe(|x| slope_and_curvature(e, x), xs[i - 1], xs[i + 1], 0.0) {
                        push(x, true, fl.abs().max(fr.abs()));
                    }
                }
            }
        }
    }
    roots.sort_by(|p, q| p.x.total_cmp(&q.x));
    roots.dedup_by(|p, q| (p.x - q.x).abs() <= 1e-9 * p.x.abs().max(1.0));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    #[test]
    fn newton_with_bracket() {
        let x = rtsafe(|x| Some((x * x - 2.0, 2.0 * x)), 0.0, 3.0, 1e-15).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
        assert!(rtsafe(|x| Some((x * x + 1.0, 2.0 * x)), -1.0, 2.0, 1e-15).is_none());
    }

    #[test]
    fn regula_falsi() {
        let x = illinois(|x: f64| Some(x.cos() - x), 0.0, 1.0, 1e-15).unwrap();
        assert!((x.cos() - x).abs() < 1e-15);
    }

    #[test]
    fn kksy_w1_roots() {
        let e = parse("cos(2*u)*(cos(u)-1)/2").unwrap();
        let roots = expr_roots(&e, 0.0, 2.0 * PI, 2048, 1e-12);
        let simple: Vec<f64> = roots.iter().filter(|r| !r.multiple).map(|r| r.x).collect();
        let want = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0];
        assert_eq!(simple.len(), 4, "{roots:?}");
        for (a, b) in simple.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        for r in &roots {
            assert!(r.residual.abs() <= 1e-12);
        }
        // the double zeros of cos u − 1 at both ends
        assert!(roots.iter().any(|r| r.multiple && r.x.abs() < 1e-6));
        let inner = expr_roots(&e, -1.0, 1.0, 2048, 1e-12);
        assert!(inner.iter().any(|r| r.tangential && r.x.abs() < 1e-8), "{inner:?}");
    }

    #[test]
    fn linear_and_constant() {
        let r = expr_roots(&parse("v").unwrap(), -1.0, 1.0, 2048, 1e-12);
        assert_eq!(r.len(), 1);
        assert!(r[0].x.abs() < 1e-15 && !r[0].multiple);
        assert!(expr_roots(&parse("1").unwrap(), -1.0, 1.0, 2048, 1e-12).is_empty());
    }

    #[test]
    fn poles_are_not_roots() {
        let r = expr_roots(&parse("1/(u - 0.3)").unwrap(), -1.0, 1.0, 2048, 1e-12);
        assert!(r.is_empty(), "{r:?}");
        let r = expr_roots(&parse("tan(u)").unwrap(), 1.0, 4.0, 2048, 1e-12);
        assert_eq!(r.len(), 1, "{r:?}");
        assert!((r[0].x - PI).abs() < 1e-14);
    }

    #[test]
    fn tangential_zero_is_flagged() {
        let r = expr_roots(&parse("(u - 0.3)^2").unwrap(), -1.0, 1.0, 2048, 1e-12);
        assert_eq!(r.len(), 1);
        assert!(r[0].tangential && r[0].multiple);
        assert!((r[0].x - 0.3).abs() < 1e-8);
    }
}
