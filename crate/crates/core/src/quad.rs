//! Adaptive Gauss–Kronrod (7, 15) quadrature for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Panel cap for one integral.
pub const MAX_PANELS: usize = 1 << 15;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge: estimated error {achieved:e} > {requested:e} after {panels} panels")]
    NoConvergence {
        achieved: f64,
        requested: f64,
        panels: usize,
    },
    #[error("integrand is not finite near {at}")]
    NonFinite { at: f64 },
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Evaluate `f` at `x`. Where `f` has no value (a removable singularity that
/// plain evaluation cannot resolve) the symmetric average at `x ± h` is used.
fn sample<F, const N: usize>(f: &mut F, x: f64, half: f64) -> Result<[f64; N], QuadError>
where
    F: FnMut(f64) -> Option<[f64; N]>,
{
    if let Some(y) = f(x).filter(|y| y.iter().all(|c| c.is_finite())) {
        return Ok(y);
    }
    let h = 1e-7 * half.abs().max(1e-3);
    let lo = f(x - h).filter(|y| y.iter().all(|c| c.is_finite()));
    let hi = f(x + h).filter(|y| y.iter().all(|c| c.is_finite()));
    match (lo, hi) {
        (Some(l), Some(r)) => Ok(std::array::from_fn(|i| 0.5 * (l[i] + r[i]))),
        _ => Err(QuadError::NonFinite { at: x }),
    }
}

fn kronrod<F, const N: usize>(f: &mut F, a: f64, b: f64) -> Result<Panel<N>, QuadError>
where
    F: FnMut(f64) -> Option<[f64; N]>,
{
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let center = sample(f, c, half)?;
    for i in 0..N {
        k[i] = WGK[7] * center[i];
        g[i] = WG[3] * center[i];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = sample(f, c - dx, half)?;
        let hi = sample(f, c + dx, half)?;
        for i in 0..N {
            let s = lo[i] + hi[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0f64;
    let mut value = [0.0; N];
    for i in 0..N {
        value[i] = k[i] * half;
        error = error.max(((k[i] - g[i]) * half).abs());
    }
    if !error.is_finite() || value.iter().any(|v| !v.is_finite()) {
        return Err(QuadError::NonFinite { at: c });
    }
    Ok(Panel { a, b, value, error })
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` (max norm over
/// components). `f` returns `None` where it cannot be evaluated.
pub fn integrate<F, const N: usize>(mut f: F, a: f64, b: f64, tol: f64) -> Result<[f64; N], QuadError>
where
    F: FnMut(f64) -> Option<[f64; N]>,
{
    if a == b {
        return Ok([0.0; N]);
    }
    if b < a {
        let v = integrate(f, b, a, tol)?;
        return Ok(v.map(|x| -x));
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b)?;
    let mut total = first.error;
    heap.push(first);
    loop {
        if total <= tol {
            // the running sum drifts; confirm before stopping
            total = heap.iter().map(|p| p.error).sum();
            if total <= tol {
                break;
            }
        }
        if heap.len() >= MAX_PANELS {
            return Err(QuadError::NoConvergence {
                achieved: total,
                requested: tol,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(QuadError::NoConvergence {
                achieved: total,
                requested: tol,
                panels: heap.len() + 1,
            });
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        total += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut sum = [0.0; N];
    for p in heap.iter() {
        for i in 0..N {
            sum[i] += p.value[i];
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| Some([x.powi(5), 1.0]), -1.0, 2.0, 1e-12).unwrap();
        assert!((v[0] - (64.0 - 1.0) / 6.0).abs() < 1e-12);
        assert!((v[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let v = integrate(|x: f64| Some([(20.0 * x).sin()]), 0.0, 3.0, 1e-10).unwrap();
        let exact = (1.0 - (60.0f64).cos()) / 20.0;
        assert!((v[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x| Some([x]), 1.0, 0.0, 1e-12).unwrap();
        assert!((v[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn removable_point_is_bridged() {
        // sin(x)/x with the center node landing on 0
        let f = |x: f64| if x == 0.0 { None } else { Some([x.sin() / x]) };
        let v = integrate(f, -1.0, 1.0, 1e-10).unwrap();
        assert!((v[0] - 1.892_166_140_734_366).abs() < 1e-9);
    }

    #[test]
    fn hard_singularity_reports_failure() {
        let f = |x: f64| Some([1.0 / x]);
        let r = integrate(f, 0.0, 1.0, 1e-10);
        assert!(r.is_err(), "{r:?}");
        let g = |_x: f64| None::<[f64; 1]>;
        assert!(matches!(integrate(g, 0.0, 1.0, 1e-10), Err(QuadError::NonFinite { .. })));
    }
}
