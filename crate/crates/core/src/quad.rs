//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * lit(0.5);
    let center = (a + b) * lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + s * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * lit(WG[j / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` until the error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<Quadrature<T>> {
    if a == b {
        return Ok(Quadrature { value: T::zero(), error: T::zero(), intervals: 0 });
    }
    let (v0, e0) = gk15(&mut f, a, b);
    // (a, b, value, error)
    let mut pieces = vec![(a, b, v0, e0)];
    let mut value = v0;
    let mut error = e0;
    loop {
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            break;
        }
        if pieces.len() >= max_intervals {
            return Err(Error::Convergence(format!(
                "quadrature on [{a}, {b}] stalled at error {error} after {max_intervals} intervals"
            )));
        }
        // bisect the interval with the largest error
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, piece)| {
                if piece.3 > acc.1 {
                    (i, piece.3)
                } else {
                    acc
                }
            });
        let (lo, hi, v, e) = pieces.swap_remove(idx);
        let mid = (lo + hi) * lit(0.5);
        if !(mid > lo.min(hi) && mid < lo.max(hi)) {
            return Err(Error::Convergence(format!(
                "quadrature interval [{lo}, {hi}] cannot be split further"
            )));
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        value = value - v + v1 + v2;
        error = error - e + e1 + e2;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    // re-sum to shed the drift of the running updates
    let value = pieces.iter().map(|x| x.2).sum();
    let error = pieces.iter().map(|x| x.3).sum();
    Ok(Quadrature { value, error, intervals: pieces.len() })
}

/// Fixed 15-point Kronrod rule, for smooth integrands on short intervals.
pub fn kronrod15<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T) -> T {
    gk15(&mut f, a, b).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let q = integrate(|x: f64| x.powi(5), 0.0, 2.0, 1e-14, 1e-14, 100).unwrap();
        assert!((q.value - 64.0 / 6.0).abs() < 1e-12);
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14, 100).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 sqrt(x) dx = 2/3
        let q = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13, 400).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-12, "{q:?}");
    }

    #[test]
    fn reversed_and_empty() {
        let q = integrate(|x: f64| x, 1.0, 0.0, 1e-14, 1e-14, 10).unwrap();
        assert!((q.value + 0.5).abs() < 1e-15);
        assert_eq!(integrate(|x: f64| x, 1.0, 1.0, 0.0, 0.0, 10).unwrap().value, 0.0);
    }

    #[test]
    fn single_precision() {
        let q = integrate(|x: f32| x * x, 0.0, 3.0, 1e-5, 1e-6, 50).unwrap();
        assert!((q.value - 9.0).abs() < 1e-4);
    }
}
