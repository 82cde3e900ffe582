//! Truncated Taylor series of univariate functions.
//!
//! A [`Jet`] stores the normalized coefficients `c[k] = f^(k)(x0) / k!` of a
//! smooth function at a base point `x0`, up to a fixed order `K`. Every
//! derivative the classification criteria consume is read off a jet, so the
//! arithmetic here is exact up to floating point rounding: no step sizes, no
//! truncation error below order `K`.

use std::fmt;

use thiserror::Error;

/// Default truncation order. The deepest criterion needs fifth derivatives and
/// quotient cancellation can eat a couple of orders.
pub const DEFAULT_ORDER: usize = 8;

/// Relative threshold below which a leading coefficient counts as zero during
/// division.
pub const CANCEL_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jets do not share base and order: ({base_a}, K={order_a}) vs ({base_b}, K={order_b})")]
    Mismatch {
        base_a: f64,
        order_a: usize,
        base_b: f64,
        order_b: usize,
    },
    #[error("division by a jet that vanishes through order {order}")]
    DivisionByZero { order: usize },
    #[error("quotient has a pole: numerator vanishes to order {numerator}, denominator to order {denominator}")]
    Pole { numerator: usize, denominator: usize },
    #[error("derivative of order {needed} requested from a jet of order {available}")]
    InsufficientOrder { needed: usize, available: usize },
    #[error("{kernel} is not analytic at {value}")]
    Domain { kernel: Kernel, value: f64 },
    #[error("non-finite Taylor coefficient")]
    NonFinite,
}

/// Analytic kernels that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Asinh,
    Atan,
    Powi(i32),
}

impl Kernel {
    /// Named kernels, in the spelling the expression language uses.
    pub const NAMED: [Kernel; 11] = [
        Kernel::Sin,
        Kernel::Cos,
        Kernel::Tan,
        Kernel::Sinh,
        Kernel::Cosh,
        Kernel::Tanh,
        Kernel::Exp,
        Kernel::Log,
        Kernel::Sqrt,
        Kernel::Asinh,
        Kernel::Atan,
    ];

    pub fn from_name(name: &str) -> Option<Kernel> {
        Kernel::NAMED.iter().copied().find(|k| k.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Tan => "tan",
            Kernel::Sinh => "sinh",
            Kernel::Cosh => "cosh",
            Kernel::Tanh => "tanh",
            Kernel::Exp => "exp",
            Kernel::Log => "log",
            Kernel::Sqrt => "sqrt",
            Kernel::Asinh => "asinh",
            Kernel::Atan => "atan",
            Kernel::Powi(_) => "powi",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Powi(n) => write!(f, "powi({n})"),
            k => f.write_str(k.name()),
        }
    }
}

/// Truncated Taylor expansion of a univariate function at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    base: f64,
    coeffs: Vec<f64>,
    consumed: usize,
}

impl Jet {
    pub fn new(base: f64, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet::finish(base, coeffs, 0)
    }

    pub fn constant(base: f64, value: f64, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet {
            base,
            coeffs,
            consumed: 0,
        }
    }

    /// The identity function `x` expanded at `base`.
    pub fn variable(base: f64, order: usize) -> Jet {
        let mut jet = Jet::constant(base, base, order);
        if order >= 1 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    fn finish(base: f64, coeffs: Vec<f64>, consumed: usize) -> Result<Jet, JetError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(JetError::NonFinite);
        }
        Ok(Jet {
            base,
            coeffs,
            consumed,
        })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Orders lost to quotient cancellation along the computation that
    /// produced this jet.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Largest coefficient magnitude, used as a local scale.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Exact `k`-th derivative at the base point.
    pub fn derive(&self, k: usize) -> Result<f64, JetError> {
        if k > self.order() {
            return Err(JetError::InsufficientOrder {
                needed: k,
                available: self.order(),
            });
        }
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        Ok(factorial * self.coeffs[k])
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        Jet {
            base: self.base,
            coeffs: self.coeffs[..=order].to_vec(),
            consumed: self.consumed,
        }
    }

    /// Jet of the derivative function; loses one order.
    pub fn derivative(&self) -> Result<Jet, JetError> {
        if self.order() == 0 {
            return Err(JetError::InsufficientOrder {
                needed: 1,
                available: 0,
            });
        }
        let coeffs = (1..self.coeffs.len())
            .map(|k| k as f64 * self.coeffs[k])
            .collect();
        Ok(Jet {
            base: self.base,
            coeffs,
            consumed: self.consumed,
        })
    }

    /// Antiderivative with the given value at the base point; gains one order.
    pub fn integral(&self, value: f64) -> Jet {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(value);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k as f64 + 1.0)),
        );
        Jet {
            base: self.base,
            coeffs,
            consumed: self.consumed,
        }
    }

    /// Re-expand along `x = base + rate * t`, as a jet in `t` at `t = 0`.
    pub fn along(&self, rate: f64) -> Jet {
        let mut power = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let term = c * power;
                power *= rate;
                term
            })
            .collect();
        Jet {
            base: 0.0,
            coeffs,
            consumed: self.consumed,
        }
    }

    /// Evaluate the truncated series at `base + h`.
    pub fn eval_offset(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    fn check(&self, other: &Jet) -> Result<(), JetError> {
        if self.base != other.base || self.order() != other.order() {
            return Err(JetError::Mismatch {
                base_a: self.base,
                order_a: self.order(),
                base_b: other.base,
                order_b: other.order(),
            });
        }
        Ok(())
    }

    fn merged(&self, other: &Jet, coeffs: Vec<f64>) -> Jet {
        Jet {
            base: self.base,
            coeffs,
            consumed: self.consumed.max(other.consumed),
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(self.merged(other, coeffs))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(self.merged(other, coeffs))
    }

    /// Cauchy product truncated to the common order.
    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let coeffs = cauchy(&self.coeffs, &other.coeffs);
        let jet = self.merged(other, coeffs);
        Jet::finish(jet.base, jet.coeffs, jet.consumed)
    }

    /// Series quotient. Common leading zeros of numerator and denominator are
    /// cancelled first; each cancelled zero costs one order of the result.
    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let order = self.order();
        let den_scale = other.magnitude();
        if den_scale == 0.0 {
            return Err(JetError::DivisionByZero { order });
        }
        let den_lead = leading_index(&other.coeffs);
        let num_lead = leading_index(&self.coeffs);
        if num_lead < den_lead {
            return Err(JetError::Pole {
                numerator: num_lead,
                denominator: den_lead,
            });
        }
        let num = &self.coeffs[den_lead..];
        let den = &other.coeffs[den_lead..];
        let inv = 1.0 / den[0];
        let mut coeffs = vec![0.0; num.len()];
        for k in 0..num.len() {
            let mut acc = num[k];
            for j in 1..=k {
                acc -= den[j] * coeffs[k - j];
            }
            coeffs[k] = acc * inv;
        }
        let consumed = self.consumed.max(other.consumed) + den_lead;
        Jet::finish(self.base, coeffs, consumed)
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        Jet::constant(self.base, 1.0, self.order()).div(self)
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            base: self.base,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            consumed: self.consumed,
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn square(&self) -> Jet {
        Jet {
            base: self.base,
            coeffs: cauchy(&self.coeffs, &self.coeffs),
            consumed: self.consumed,
        }
    }

    /// Integer power by repeated squaring; negative exponents divide.
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n == 0 {
            return Ok(Jet::constant(self.base, 1.0, self.order()));
        }
        let mut result: Option<Jet> = None;
        let mut square = self.clone();
        let mut e = n.unsigned_abs();
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => square.clone(),
                    Some(r) => r.mul(&square)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            square = square.mul(&square)?;
        }
        let positive = result.expect("exponent is nonzero");
        if n > 0 {
            Jet::finish(positive.base, positive.coeffs, positive.consumed)
        } else {
            positive.recip()
        }
    }

    /// Compose an analytic kernel with this jet.
    pub fn compose(&self, kernel: Kernel) -> Result<Jet, JetError> {
        let a = &self.coeffs;
        let n = a.len();
        let a0 = a[0];
        let coeffs = match kernel {
            Kernel::Powi(p) => return self.powi(p),
            Kernel::Exp => {
                let mut c = vec![0.0; n];
                c[0] = a0.exp();
                for k in 1..n {
                    let s: f64 = (1..=k).map(|j| j as f64 * a[j] * c[k - j]).sum();
                    c[k] = s / k as f64;
                }
                c
            }
            Kernel::Log => {
                if a0 <= 0.0 {
                    return Err(JetError::Domain { kernel, value: a0 });
                }
                let mut c = vec![0.0; n];
                c[0] = a0.ln();
                for k in 1..n {
                    let s: f64 = (1..k).map(|j| j as f64 * c[j] * a[k - j]).sum();
                    c[k] = (a[k] - s / k as f64) / a0;
                }
                c
            }
            Kernel::Sqrt => {
                if a0 < 0.0 || (a0 == 0.0 && n > 1) {
                    return Err(JetError::Domain { kernel, value: a0 });
                }
                let mut c = vec![0.0; n];
                c[0] = a0.sqrt();
                for k in 1..n {
                    let s: f64 = (1..k).map(|j| c[j] * c[k - j]).sum();
                    c[k] = (a[k] - s) / (2.0 * c[0]);
                }
                c
            }
            Kernel::Sin | Kernel::Cos => {
                let (s, c) = sin_cos(a, false);
                if kernel == Kernel::Sin {
                    s
                } else {
                    c
                }
            }
            Kernel::Sinh | Kernel::Cosh => {
                let (s, c) = sin_cos(a, true);
                if kernel == Kernel::Sinh {
                    s
                } else {
                    c
                }
            }
            Kernel::Tan => riccati(a, a0.tan(), 1.0),
            Kernel::Tanh => riccati(a, a0.tanh(), -1.0),
            Kernel::Atan | Kernel::Asinh => {
                // c' = a' * r with r = 1/(1+a^2) or 1/sqrt(1+a^2)
                let one_plus_sq = self.square().add_scalar(1.0);
                let r = if kernel == Kernel::Atan {
                    one_plus_sq.recip()?
                } else {
                    one_plus_sq.compose(Kernel::Sqrt)?.recip()?
                };
                let r = &r.coeffs;
                let mut c = vec![0.0; n];
                c[0] = if kernel == Kernel::Atan {
                    a0.atan()
                } else {
                    a0.asinh()
                };
                for k in 1..n {
                    let s: f64 = (1..=k).map(|j| j as f64 * a[j] * r[k - j]).sum();
                    c[k] = s / k as f64;
                }
                c
            }
        };
        Jet::finish(self.base, coeffs, self.consumed)
    }
}

fn cauchy(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

/// First coefficient that is not negligible next to the few after it. A
/// window rather than the whole jet keeps fast-growing tails (data near a
/// pole) from swamping genuine leading terms.
fn leading_index(coeffs: &[f64]) -> usize {
    (0..coeffs.len())
        .position(|i| {
            let c = coeffs[i].abs();
            let next = coeffs[i + 1..coeffs.len().min(i + 4)]
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            c > CANCEL_EPS * next
        })
        .unwrap_or(coeffs.len())
}

/// Coupled recurrence for (sin, cos) or, with `hyperbolic`, (sinh, cosh).
fn sin_cos(a: &[f64], hyperbolic: bool) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut s = vec![0.0; n];
    let mut c = vec![0.0; n];
    if hyperbolic {
        s[0] = a[0].sinh();
        c[0] = a[0].cosh();
    } else {
        (s[0], c[0]) = a[0].sin_cos();
    }
    let sign = if hyperbolic { 1.0 } else { -1.0 };
    for k in 1..n {
        let mut ss = 0.0;
        let mut cc = 0.0;
        for j in 1..=k {
            let ja = j as f64 * a[j];
            ss += ja * c[k - j];
            cc += ja * s[k - j];
        }
        s[k] = ss / k as f64;
        c[k] = sign * cc / k as f64;
    }
    (s, c)
}

/// Solves `c' = a' (1 + sign * c^2)`, the derivative rule of tan / tanh.
fn riccati(a: &[f64], c0: f64, sign: f64) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = c0;
    d[0] = 1.0 + sign * c0 * c0;
    for k in 1..n {
        let s: f64 = (1..=k).map(|j| j as f64 * a[j] * d[k - j]).sum();
        c[k] = s / k as f64;
        let sq: f64 = (0..=k).map(|i| c[i] * c[k - i]).sum();
        d[k] = sign * sq;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn jet(coeffs: &[f64]) -> Jet {
        Jet::new(0.0, coeffs.to_vec()).unwrap()
    }

    fn assert_coeffs(j: &Jet, expected: &[f64], tol: f64) {
        assert_eq!(j.order() + 1, expected.len(), "order of {j:?}");
        for (a, b) in j.coeffs().iter().zip(expected) {
            assert!((a - b).abs() <= tol, "{:?} vs {:?}", j.coeffs(), expected);
        }
    }

    #[test]
    fn product_of_one_plus_and_one_minus() {
        let x = Jet::variable(0.0, 4);
        let p = x.add_scalar(1.0).mul(&x.neg().add_scalar(1.0)).unwrap();
        assert_coeffs(&p, &[1.0, 0.0, -1.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn adding_zero_is_identity() {
        let a = jet(&[1.5, -2.0, 0.25, 3.0]);
        let z = Jet::constant(0.0, 0.0, 3);
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn sin_times_cos_is_half_sin_double() {
        // ½ sin 2x = x − 2x³/3 + 2x⁵/15 − …
        let x = Jet::variable(0.0, 5);
        let p = x
            .compose(Kernel::Sin)
            .unwrap()
            .mul(&x.compose(Kernel::Cos).unwrap())
            .unwrap();
        assert_coeffs(
            &p,
            &[0.0, 1.0, 0.0, -2.0 / 3.0, 0.0, 2.0 / 15.0],
            1e-15,
        );
    }

    #[test]
    fn geometric_series() {
        let x = Jet::variable(0.0, 4);
        let q = Jet::constant(0.0, 1.0, 4)
            .div(&x.neg().add_scalar(1.0))
            .unwrap();
        assert_coeffs(&q, &[1.0; 5], 1e-15);
        assert_eq!(q.consumed(), 0);
    }

    #[test]
    fn monomial_cancellation_reports_depth() {
        let x = Jet::variable(0.0, 4);
        let q = x.square().div(&x).unwrap();
        assert_coeffs(&q, &[0.0, 1.0, 0.0, 0.0], 0.0);
        assert_eq!(q.consumed(), 1);
    }

    #[test]
    fn sinc_by_series_division() {
        let x = Jet::variable(0.0, 5);
        let q = x.compose(Kernel::Sin).unwrap().div(&x).unwrap();
        assert_coeffs(&q, &[1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0], 1e-16);
    }

    #[test]
    fn division_errors() {
        let x = Jet::variable(0.0, 3);
        let zero = Jet::constant(0.0, 0.0, 3);
        assert_eq!(
            x.div(&zero),
            Err(JetError::DivisionByZero { order: 3 })
        );
        let one = Jet::constant(0.0, 1.0, 3);
        assert!(matches!(
            one.div(&x),
            Err(JetError::Pole {
                numerator: 0,
                denominator: 1
            })
        ));
        let other = Jet::variable(1.0, 3);
        assert!(matches!(x.add(&other), Err(JetError::Mismatch { .. })));
        assert!(matches!(
            x.mul(&x.truncate(2)),
            Err(JetError::Mismatch { .. })
        ));
    }

    #[test]
    fn kernel_compositions() {
        let zero = Jet::constant(0.0, 0.0, 3);
        assert_coeffs(&zero.compose(Kernel::Exp).unwrap(), &[1.0, 0.0, 0.0, 0.0], 0.0);

        let x = Jet::variable(0.0, 3);
        assert_coeffs(
            &x.compose(Kernel::Sin).unwrap(),
            &[0.0, 1.0, 0.0, -1.0 / 6.0],
            1e-17,
        );

        let two_x = Jet::variable(0.0, 4).scale(2.0);
        assert_coeffs(
            &two_x.compose(Kernel::Cos).unwrap(),
            &[1.0, 0.0, -2.0, 0.0, 2.0 / 3.0],
            1e-15,
        );
    }

    #[test]
    fn inverse_kernels_match_known_series() {
        let x = Jet::variable(0.0, 7);
        // atan x = x − x³/3 + x⁵/5 − x⁷/7
        assert_coeffs(
            &x.compose(Kernel::Atan).unwrap(),
            &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 0.2, 0.0, -1.0 / 7.0],
            1e-15,
        );
        // asinh x = x − x³/6 + 3x⁵/40 − 5x⁷/112
        assert_coeffs(
            &x.compose(Kernel::Asinh).unwrap(),
            &[0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0, -5.0 / 112.0],
            1e-15,
        );
        // tan x = x + x³/3 + 2x⁵/15 + 17x⁷/315
        assert_coeffs(
            &x.compose(Kernel::Tan).unwrap(),
            &[0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, 17.0 / 315.0],
            1e-15,
        );
        // tanh x = x − x³/3 + 2x⁵/15 − 17x⁷/315
        assert_coeffs(
            &x.compose(Kernel::Tanh).unwrap(),
            &[0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, -17.0 / 315.0],
            1e-15,
        );
    }

    #[test]
    fn log_and_sqrt_domains() {
        let x = Jet::variable(0.0, 3);
        assert!(matches!(
            x.compose(Kernel::Log),
            Err(JetError::Domain {
                kernel: Kernel::Log,
                ..
            })
        ));
        assert!(x.compose(Kernel::Sqrt).is_err());
        // log(1+x) = x − x²/2 + x³/3
        assert_coeffs(
            &x.add_scalar(1.0).compose(Kernel::Log).unwrap(),
            &[0.0, 1.0, -0.5, 1.0 / 3.0],
            1e-16,
        );
        // sqrt(1+x) = 1 + x/2 − x²/8 + x³/16
        assert_coeffs(
            &x.add_scalar(1.0).compose(Kernel::Sqrt).unwrap(),
            &[1.0, 0.5, -0.125, 0.0625],
            1e-16,
        );
    }

    #[test]
    fn derivatives() {
        let u = Jet::variable(0.0, 3);
        assert_eq!(u.square().derive(2).unwrap(), 2.0);
        let s = Jet::variable(0.0, 5).compose(Kernel::Sin).unwrap();
        assert_relative_eq!(s.derive(5).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(
            s.derive(6),
            Err(JetError::InsufficientOrder {
                needed: 6,
                available: 5
            })
        );
    }

    #[test]
    fn negative_powers_need_nonzero_base() {
        let x = Jet::variable(2.0, 3);
        let inv = x.powi(-2).unwrap();
        // 1/x² at 2: 1/4, −2/8, 3/16, −4/32
        assert_coeffs(&inv, &[0.25, -0.25, 0.1875, -0.125], 1e-16);
        assert!(Jet::variable(0.0, 3).powi(-1).is_err());
        assert_coeffs(
            &Jet::variable(0.0, 3).powi(3).unwrap(),
            &[0.0, 0.0, 0.0, 1.0],
            0.0,
        );
    }

    #[test]
    fn along_rescales_and_integral_inverts_derivative() {
        let j = jet(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(j.along(2.0).coeffs(), &[1.0, 4.0, 12.0, 32.0]);
        let back = j.derivative().unwrap().integral(1.0);
        assert_eq!(back, j);
    }

    fn arb_jet(order: usize) -> impl Strategy<Value = Jet> {
        prop::collection::vec(-4.0f64..4.0, order + 1).prop_map(|c| jet(&c))
    }

    fn close(a: &Jet, b: &Jet, rel: f64) -> bool {
        let scale = a.magnitude().max(b.magnitude()).max(1.0);
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).abs() <= rel * scale)
    }

    proptest! {
        #[test]
        fn ring_laws((a, b, c) in (arb_jet(6), arb_jet(6), arb_jet(6))) {
            let lhs = a.add(&b).unwrap().add(&c).unwrap();
            let rhs = a.add(&b.add(&c).unwrap()).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-14));
            prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap(), 1e-14));
            let dist_l = a.mul(&b.add(&c).unwrap()).unwrap();
            let dist_r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert!(close(&dist_l, &dist_r, 1e-14));
        }

        #[test]
        fn division_undoes_multiplication(
            a in arb_jet(6),
            lead in prop_oneof![-4.0f64..-1.0, 1.0f64..4.0],
            tail in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let mut coeffs = vec![lead];
            coeffs.extend(tail);
            let b = jet(&coeffs);
            let q = a.mul(&b).unwrap().div(&b).unwrap();
            prop_assert!(close(&q, &a, 1e-12), "{:?} vs {:?}", q, a);
        }
    }
}
