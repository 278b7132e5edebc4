//! Graded radial meshes on a ball `B_R ⊂ R^N` with Simpson weights for
//! `∫_{B_R} f dx = ω_N ∫_0^R f(r) r^{N-1} dr`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, sphere_area, Real};

/// Depth of the extra refinement at both ends of the logical coordinate.
const END_REFINEMENT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh<T> {
    pub n: u32,
    pub radius: T,
    pub grading: T,
    /// `0 = r_0 < r_1 < ... < r_M = R`.
    pub nodes: Vec<T>,
    /// Volume weights; zero only at the center.
    pub weights: Vec<T>,
}

impl<T: Real> RadialMesh<T> {
    /// `r(ξ) = R sinh(A η(ξ)) / sinh(A)` on `M` uniform steps of `ξ ∈ [0, 1]`, with
    /// `η = ξ - κ sin(2πξ)/(2π)` refining both ends. `A = grading`; `A = 0` is uniform.
    pub fn graded(n: u32, radius: T, intervals: usize, grading: T) -> Result<Self> {
        let mut v = Vec::new();
        if n < 3 {
            v.push(format!("N = {n} must be at least 3"));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            v.push(format!("radius {radius} must be positive"));
        }
        if intervals < 4 || intervals % 2 == 1 {
            v.push(format!("interval count {intervals} must be even and at least 4"));
        }
        if !(grading >= T::zero()) || !grading.is_finite() {
            v.push(format!("grading {grading} must be nonnegative"));
        }
        if !v.is_empty() {
            return Err(Error::Validation(v));
        }
        let kappa = lit::<T>(END_REFINEMENT);
        let two_pi = T::PI() + T::PI();
        let a = grading;
        let map = |xi: T| -> (T, T) {
            let eta = xi - kappa * (two_pi * xi).sin() / two_pi;
            let deta = T::one() - kappa * (two_pi * xi).cos();
            if a == T::zero() {
                (radius * eta, radius * deta)
            } else {
                let s = a.sinh();
                (radius * (a * eta).sinh() / s, radius * a * (a * eta).cosh() / s * deta)
            }
        };
        let m = intervals;
        let h = T::one() / from_usize(m);
        let omega = sphere_area::<T>(n);
        let nm1 = lit::<T>(f64::from(n - 1));
        let mut nodes = Vec::with_capacity(m + 1);
        let mut weights = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let (r, dr) = map(from_usize::<T>(i) * h);
            let simpson = if i == 0 || i == m {
                T::one()
            } else if i % 2 == 1 {
                lit(4.0)
            } else {
                lit(2.0)
            };
            nodes.push(r);
            weights.push(omega * simpson * h / lit(3.0) * dr * r.powf(nm1));
        }
        nodes[m] = radius;
        Ok(Self { n, radius, grading, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `|B_R|`.
    pub fn volume(&self) -> T {
        crate::scalar::ball_volume(self.n, self.radius)
    }

    /// `Σ w_i f_i`, summed in node order.
    pub fn integrate(&self, values: &[T]) -> T {
        self.weights.iter().zip(values).map(|(&w, &f)| w * f).sum()
    }

    /// Nodes strictly inside `(0, x)`.
    pub fn count_below(&self, x: T) -> usize {
        self.nodes.iter().filter(|&&r| r > T::zero() && r < x).count()
    }

    /// The same mesh on `B_{cR}`.
    pub fn dilate(&self, c: T) -> Self {
        let scale = c.powi(self.n as i32);
        Self {
            n: self.n,
            radius: self.radius * c,
            grading: self.grading,
            nodes: self.nodes.iter().map(|&r| r * c).collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
        }
    }

    /// Second-order radial Laplacian `u'' + (N-1)u'/r` of nodal values: symmetric
    /// ghost node at the center and a one-sided quadratic at `r = R`.
    pub fn laplacian(&self, u: &[T]) -> Vec<T> {
        let r = &self.nodes;
        let m = r.len() - 1;
        let nn = lit::<T>(f64::from(self.n));
        let nm1 = nn - T::one();
        let two = lit::<T>(2.0);
        let mut out = Vec::with_capacity(m + 1);
        let h1 = r[1] - r[0];
        out.push(nn * two * (u[1] - u[0]) / (h1 * h1));
        for i in 1..m {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let den = hm * hp * (hm + hp);
            let d2 = two * (hm * u[i + 1] - (hm + hp) * u[i] + hp * u[i - 1]) / den;
            let d1 = (hm * hm * u[i + 1] + (hp * hp - hm * hm) * u[i] - hp * hp * u[i - 1]) / den;
            out.push(d2 + nm1 * d1 / r[i]);
        }
        let (x0, x1, x2) = (r[m - 2], r[m - 1], r[m]);
        let (u0, u1, u2) = (u[m - 2], u[m - 1], u[m]);
        let d2 = two
            * (u2 / ((x2 - x1) * (x2 - x0)) - u1 / ((x2 - x1) * (x1 - x0))
                + u0 / ((x1 - x0) * (x2 - x0)));
        let d1 = u0 * (x2 - x1) / ((x0 - x1) * (x0 - x2))
            + u1 * (x2 - x0) / ((x1 - x0) * (x1 - x2))
            + u2 * (two * x2 - x0 - x1) / ((x2 - x0) * (x2 - x1));
        out.push(d2 + nm1 * d1 / x2);
        out
    }
}
