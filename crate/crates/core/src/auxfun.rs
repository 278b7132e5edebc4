//! The perturbed power `f_λ(t) = λ|t|^{r-1}t + |t|^{p-1}t`, its inverse and the
//! antiderivative `F̄_λ(τ) = ∫_0^τ f_λ^{-1}`, with a machine-checked suite of the
//! inequalities the variational estimates rely on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::{from_usize, lit, Real};

/// Iteration cap of the safeguarded Newton solve in [`PerturbedPower::try_f_inv`].
const INVERSE_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedPower<T> {
    pub lambda: T,
    pub r: T,
    pub p: T,
}

impl<T: Real> PerturbedPower<T> {
    pub fn new(lambda: T, r: T, p: T) -> Result<Self> {
        let mut v = Vec::new();
        if !(lambda > T::zero()) || !lambda.is_finite() {
            v.push(format!("lambda = {lambda} must be positive"));
        }
        if !(r > T::zero()) {
            v.push(format!("r = {r} must be positive"));
        }
        if !(r < p) || !p.is_finite() {
            v.push(format!("r = {r} must be below p = {p}"));
        }
        if v.is_empty() {
            Ok(Self { lambda, r, p })
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn f(&self, t: T) -> T {
        let a = t.abs();
        if a == T::zero() {
            return T::zero();
        }
        t.signum() * (self.lambda * a.powf(self.r) + a.powf(self.p))
    }

    /// `f'(t)` for `t != 0`.
    pub fn df(&self, t: T) -> T {
        let a = t.abs();
        self.lambda * self.r * a.powf(self.r - T::one()) + self.p * a.powf(self.p - T::one())
    }

    /// Root of `f` at the crossover, `λ^{1/(p-r)}`, where `λ z^r = z^p`.
    pub fn crossover_root(&self) -> T {
        self.lambda.powf((self.p - self.r).recip())
    }

    /// Crossover level `T* = 2 λ^{p/(p-r)} = f(λ^{1/(p-r)})`.
    pub fn threshold(&self) -> T {
        lit::<T>(2.0) * self.lambda.powf(self.p / (self.p - self.r))
    }

    /// Upper bracket for the inverse at `tau > 0`: `min(τ^{1/p}, (τ/λ)^{1/r})`.
    pub fn inverse_upper_bound(&self, tau: T) -> T {
        tau.powf(self.p.recip()).min((tau / self.lambda).powf(self.r.recip()))
    }

    /// Monotone inverse `f^{-1}(τ)` by safeguarded Newton on `[0, min(τ^{1/p}, (τ/λ)^{1/r})]`.
    pub fn try_f_inv(&self, tau: T) -> Result<T> {
        if !tau.is_finite() {
            return Err(Error::Convergence(format!("inverse of non-finite value {tau}")));
        }
        let target = tau.abs();
        if target == T::zero() {
            return Ok(T::zero());
        }
        let mut lo = T::zero();
        let mut hi = self.inverse_upper_bound(target);
        let mut z = hi;
        let half = lit::<T>(0.5);
        let eps = T::epsilon();
        for _ in 0..INVERSE_MAX_ITER {
            let g = self.f(z) - target;
            if g == T::zero() {
                return Ok(tau.signum() * z);
            }
            if g > T::zero() {
                hi = z;
            } else {
                lo = z;
            }
            if hi - lo <= lit::<T>(2.0) * eps * hi {
                return Ok(tau.signum() * (lo + hi) * half);
            }
            let step = g / self.df(z);
            let mut next = z - step;
            if !(next > lo && next < hi) {
                // Bisect geometrically once the bracket spans many orders of magnitude.
                next = if lo > T::zero() && hi / lo > lit(4.0) {
                    (lo * hi).sqrt()
                } else if lo == T::zero() && hi > T::zero() && z == hi {
                    hi * half
                } else {
                    (lo + hi) * half
                };
            }
            if (next - z).abs() <= eps * z {
                return Ok(tau.signum() * next);
            }
            z = next;
        }
        Err(Error::Convergence(format!(
            "inverse at tau = {tau} did not converge in {INVERSE_MAX_ITER} iterations"
        )))
    }

    /// `f^{-1}(τ)`; NaN when the solve fails, which only happens for non-finite input.
    pub fn f_inv(&self, tau: T) -> T {
        self.try_f_inv(tau).unwrap_or_else(|_| T::nan())
    }

    /// `F̄(τ) = λ r/(r+1) |z|^{r+1} + p/(p+1) |z|^{p+1}` with `z = f^{-1}(τ)`.
    pub fn fbar(&self, tau: T) -> T {
        self.fbar_from_inverse(self.f_inv(tau))
    }

    /// Same closed form given `z = f^{-1}(τ)` already computed.
    pub fn fbar_from_inverse(&self, z: T) -> T {
        let a = z.abs();
        let one = T::one();
        self.lambda * self.r / (self.r + one) * a.powf(self.r + one)
            + self.p / (self.p + one) * a.powf(self.p + one)
    }

    /// Alternative closed form `p/(p+1) z τ - (p-r)/(p+1) λ/(r+1) |z|^{r+1}`.
    pub fn fbar_alt(&self, tau: T) -> T {
        let z = self.f_inv(tau);
        let one = T::one();
        self.p / (self.p + one) * z * tau
            - (self.p - self.r) / (self.p + one) * self.lambda / (self.r + one)
                * z.abs().powf(self.r + one)
    }

    /// `F̄(τ)` by adaptive quadrature of the inverse, independent of the closed forms.
    pub fn fbar_quadrature(&self, tau: T, rel_tol: T) -> Result<T> {
        let q = quad::integrate(
            |t| self.f_inv(t),
            T::zero(),
            tau.abs(),
            T::min_positive_value(),
            rel_tol,
            4000,
        )?;
        Ok(q.value)
    }

    /// Quadrature of the inverse at many nonnegative points, accumulated segment by
    /// segment between the sorted sample points.
    pub fn fbar_quadrature_sorted(&self, points: &[T], rel_tol: T) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(points.len());
        let mut acc = T::zero();
        let mut prev = T::zero();
        for &x in points {
            if x < prev {
                return Err(Error::Domain("quadrature points must be sorted and nonnegative".into()));
            }
            // Absolute tolerance is tied to the running total so every segment meets
            // the requested relative accuracy of the cumulative value.
            let seg_scale = (x - prev) * self.f_inv(x);
            let q = quad::integrate(
                |t| self.f_inv(t),
                prev,
                x,
                rel_tol * lit(0.1) * (acc + seg_scale).max(T::min_positive_value()),
                rel_tol * lit(0.1),
                4000,
            )?;
            acc = acc + q.value;
            out.push(acc);
            prev = x;
        }
        Ok(out)
    }

    /// `(t^{(p+1)/p} - f^{-1}(t) t) / t^{(r+1)/p}` for `t > 0`; tends to `λ/p`.
    pub fn asymptotic_ratio(&self, t: T) -> T {
        let z = self.f_inv(t);
        let one = T::one();
        // With t = λ z^r + z^p: t^{1/p} - z = z ((1 + λ z^{r-p})^{1/p} - 1),
        // written with ln_1p/exp_m1 to avoid cancellation at large t.
        let gap = z * ((self.lambda * z.powf(self.r - self.p)).ln_1p() / self.p).exp_m1();
        t * gap / t.powf((self.r + one) / self.p)
    }

    /// `m(t) = f^{-1}(t) t`.
    pub fn euler_term(&self, t: T) -> T {
        self.f_inv(t) * t
    }
}

/// Which inequality an [`InequalityReport`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// `f^{-1}(τ) < τ^{1/p}` and `f^{-1}(τ) < (τ/λ)^{1/r}` for `τ > 0`.
    InverseBelowPowers,
    /// `F̄(τ) <= p/(p+1)|τ|^{(p+1)/p}` and `F̄(τ) <= r/(r+1) λ^{-1/r} |τ|^{(r+1)/r}`.
    AntiderivativeBelowPowers,
    /// `F̄(t) >= f^{-1}(t) t / (s+1)`.
    AntiderivativeDominatesEulerTerm,
    /// Two-regime lower bound on `f^{-1}` split at `T* = 2λ^{p/(p-r)}`.
    InverseLowerBound,
    /// Two-regime lower bound on `F̄` split at `T*`.
    AntiderivativeLowerBound,
    /// `F̄(t) - f^{-1}(t)t/(s+1) >= τ_c |t|^{(p+1)/p}` for `|t| >= T*`.
    EulerGapCoercive,
    /// `m(α+β) <= m(α) + (r+1)/r |β| max(|f^{-1}(α)|, |f^{-1}(α+β)|)`, `m(t) = f^{-1}(t) t`.
    EulerTermIncrement,
}

impl LemmaId {
    pub const ALL: [LemmaId; 7] = [
        LemmaId::InverseBelowPowers,
        LemmaId::AntiderivativeBelowPowers,
        LemmaId::AntiderivativeDominatesEulerTerm,
        LemmaId::InverseLowerBound,
        LemmaId::AntiderivativeLowerBound,
        LemmaId::EulerGapCoercive,
        LemmaId::EulerTermIncrement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::InverseBelowPowers => "inverse_below_powers",
            LemmaId::AntiderivativeBelowPowers => "antiderivative_below_powers",
            LemmaId::AntiderivativeDominatesEulerTerm => "antiderivative_dominates_euler_term",
            LemmaId::InverseLowerBound => "inverse_lower_bound",
            LemmaId::AntiderivativeLowerBound => "antiderivative_lower_bound",
            LemmaId::EulerGapCoercive => "euler_gap_coercive",
            LemmaId::EulerTermIncrement => "euler_term_increment",
        }
    }
}

/// Tolerance on the worst relative slack of an inequality report.
pub const SLACK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport<T> {
    pub lemma: LemmaId,
    pub samples: usize,
    /// Minimum over samples of `rhs - lhs` in the asserted direction.
    pub worst_slack: T,
    /// Minimum over samples of `(rhs - lhs) / max(|lhs|, |rhs|)`.
    pub worst_relative_slack: T,
    /// Sample point (first argument) where the relative slack is worst.
    pub worst_at: T,
    pub pass: bool,
    /// Reason the check was not run, when its hypotheses fail.
    pub skipped: Option<String>,
}

/// Sample points for [`check_inequalities`]: `count` log-spaced magnitudes in
/// `[t_min, t_max]`, always augmented by the crossover `T*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec<T> {
    pub count: usize,
    pub t_min: T,
    pub t_max: T,
    /// Also sample the mirrored negative points.
    pub symmetric: bool,
}

impl<T: Real> SampleSpec<T> {
    pub fn log_spaced(count: usize, t_min: T, t_max: T) -> Self {
        Self { count, t_min, t_max, symmetric: true }
    }

    /// Ordered sample points including `±threshold`.
    pub fn points(&self, threshold: T) -> Vec<T> {
        let mut pos: Vec<T> = match self.count {
            0 => Vec::new(),
            1 => vec![self.t_min],
            n => {
                let (a, b) = (self.t_min.ln(), self.t_max.ln());
                (0..n)
                    .map(|i| (a + (b - a) * from_usize::<T>(i) / from_usize::<T>(n - 1)).exp())
                    .collect()
            }
        };
        pos.push(threshold);
        pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pos.dedup();
        if !self.symmetric {
            return pos;
        }
        let mut all: Vec<T> = pos.iter().rev().map(|&x| -x).collect();
        all.extend(pos);
        all
    }
}

#[derive(Clone, Copy)]
struct Row<T> {
    t: T,
    z: T,
    fbar: T,
}

fn rel_slack<T: Real>(lhs: T, rhs: T) -> T {
    let scale = lhs.abs().max(rhs.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (rhs - lhs) / scale
    }
}

/// Per-sample `(relative slack, raw slack)`, the minimum over all comparisons at that sample.
type Slack<T> = (T, T);

fn worst<T: Real>(items: &[(T, Slack<T>)]) -> (T, T, T) {
    let mut rel = T::infinity();
    let mut raw = T::infinity();
    let mut at = T::zero();
    for &(x, (r, w)) in items {
        if r < rel || (r.is_nan() && !rel.is_nan()) {
            rel = r;
            at = x;
        }
        raw = raw.min(w);
    }
    (rel, raw, at)
}

fn combine<T: Real>(parts: &[(T, T)]) -> Slack<T> {
    let mut rel = T::infinity();
    let mut raw = T::infinity();
    for &(lhs, rhs) in parts {
        let r = rel_slack(lhs, rhs);
        if r < rel || r.is_nan() {
            rel = r;
        }
        raw = raw.min(rhs - lhs);
    }
    (rel, raw)
}

fn report<T: Real>(lemma: LemmaId, items: Vec<(T, Slack<T>)>) -> InequalityReport<T> {
    let (rel, raw, at) = worst(&items);
    InequalityReport {
        lemma,
        samples: items.len(),
        worst_slack: raw,
        worst_relative_slack: rel,
        worst_at: at,
        pass: rel >= -lit::<T>(SLACK_TOL),
        skipped: None,
    }
}

fn skipped<T: Real>(lemma: LemmaId, why: String) -> InequalityReport<T> {
    InequalityReport {
        lemma,
        samples: 0,
        worst_slack: T::zero(),
        worst_relative_slack: T::zero(),
        worst_at: T::zero(),
        pass: true,
        skipped: Some(why),
    }
}

/// Runs every inequality at every sample point; one report per [`LemmaId`], in order.
///
/// The two checks involving `s` require `rs >= 1`; the coercivity gap additionally
/// needs `ps > 1`. Checks whose hypotheses fail are reported as skipped.
pub fn check_inequalities<T: Real>(
    pp: &PerturbedPower<T>,
    s: T,
    spec: &SampleSpec<T>,
) -> Vec<InequalityReport<T>> {
    let one = T::one();
    let two = lit::<T>(2.0);
    let (lambda, r, p) = (pp.lambda, pp.r, pp.p);
    let t_star = pp.threshold();
    let points = spec.points(t_star);
    let rows: Vec<Row<T>> = points
        .par_iter()
        .map(|&t| {
            let z = pp.f_inv(t);
            Row { t, z, fbar: pp.fbar_from_inverse(z) }
        })
        .collect();
    let n = rows.len();
    let in_low = |t: T| t.abs() <= t_star;
    let in_high = |t: T| t.abs() >= t_star;

    let per_row = |f: &(dyn Fn(&Row<T>) -> Option<Slack<T>> + Sync)| -> Vec<(T, Slack<T>)> {
        rows.par_iter().filter_map(|row| f(row).map(|sl| (row.t, sl))).collect()
    };

    let mut out = Vec::with_capacity(LemmaId::ALL.len());

    // f^{-1}(τ) < τ^{1/p}, f^{-1}(τ) < (τ/λ)^{1/r}
    out.push(report(
        LemmaId::InverseBelowPowers,
        per_row(&|row| {
            (row.t > T::zero()).then(|| {
                combine(&[
                    (row.z, row.t.powf(p.recip())),
                    (row.z, (row.t / lambda).powf(r.recip())),
                ])
            })
        }),
    ));

    out.push(report(
        LemmaId::AntiderivativeBelowPowers,
        per_row(&|row| {
            let a = row.t.abs();
            Some(combine(&[
                (row.fbar, p / (p + one) * a.powf((p + one) / p)),
                (row.fbar, r / (r + one) * lambda.powf(-r.recip()) * a.powf((r + one) / r)),
            ]))
        }),
    ));

    let rs_ok = r * s >= one - lit(crate::params::HOMOGENEITY_TOL);
    if rs_ok {
        out.push(report(
            LemmaId::AntiderivativeDominatesEulerTerm,
            per_row(&|row| Some(combine(&[(row.z * row.t / (s + one), row.fbar)]))),
        ));
    } else {
        out.push(skipped(
            LemmaId::AntiderivativeDominatesEulerTerm,
            format!("requires rs >= 1, got rs = {}", r * s),
        ));
    }

    out.push(report(
        LemmaId::InverseLowerBound,
        per_row(&|row| {
            if row.t <= T::zero() {
                return None;
            }
            let mut parts = Vec::with_capacity(2);
            if in_low(row.t) {
                parts.push(((row.t / (two * lambda)).powf(r.recip()), row.z));
            }
            if in_high(row.t) {
                parts.push(((row.t / two).powf(p.recip()), row.z));
            }
            Some(combine(&parts))
        }),
    ));

    out.push(report(
        LemmaId::AntiderivativeLowerBound,
        per_row(&|row| {
            let a = row.t.abs();
            let mut parts = Vec::with_capacity(2);
            if in_low(a) {
                let bound = r / (r + one) * lambda.powf(-r.recip()) * (a / two).powf((r + one) / r)
                    + p / (p + one) * (a / (two * lambda)).powf((p + one) / r);
                parts.push((bound, row.fbar));
            }
            if in_high(a) {
                let bound = r / (r + one) * lambda * (a / two).powf((r + one) / p)
                    + p / (p + one) * (a / two).powf((p + one) / p);
                parts.push((bound, row.fbar));
            }
            Some(combine(&parts))
        }),
    ));

    if !rs_ok {
        out.push(skipped(
            LemmaId::EulerGapCoercive,
            format!("requires rs >= 1, got rs = {}", r * s),
        ));
    } else if !(p * s > one) {
        out.push(skipped(
            LemmaId::EulerGapCoercive,
            format!("requires ps > 1, got ps = {}", p * s),
        ));
    } else {
        let tau_c = (p * s - one) / (two.powf((p + one) / p) * (p + one) * (s + one));
        out.push(report(
            LemmaId::EulerGapCoercive,
            per_row(&|row| {
                in_high(row.t).then(|| {
                    // Both sides are compared as F̄ >= m/(s+1) + τ_c |t|^{(p+1)/p}
                    // so the relative slack is measured against F̄.
                    let rhs = row.fbar;
                    let lhs = row.z * row.t / (s + one) + tau_c * row.t.abs().powf((p + one) / p);
                    combine(&[(lhs, rhs)])
                })
            }),
        ));
    }

    // Pairs (α, β) with α + β landing on another sample, on both sides of zero.
    let coef = (r + one) / r;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| {
            let j = (i.wrapping_mul(7919) + 1) % n;
            let k = n - 1 - (i.wrapping_mul(104_729) + 5) % n;
            [(i, j), (i, k)]
        })
        .collect();
    let items: Vec<(T, Slack<T>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&rows[i], &rows[j]);
            let beta = b.t - a.t;
            let m_ab = b.z * b.t;
            let m_a = a.z * a.t;
            let bound = m_a + coef * beta.abs() * a.z.abs().max(b.z.abs());
            (a.t, combine(&[(T::zero(), m_ab), (m_ab, bound)]))
        })
        .collect();
    out.push(report(LemmaId::EulerTermIncrement, items));

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(lambda: f64, r: f64, p: f64) -> PerturbedPower<f64> {
        PerturbedPower::new(lambda, r, p).unwrap()
    }

    #[test]
    fn f_examples() {
        let a = pp(1.0, 1.0, 3.0);
        assert_eq!(a.f(1.0), 2.0);
        assert_eq!(a.f(-1.0), -2.0);
        assert_eq!(pp(2.0, 1.0, 2.0).f(3.0), 15.0);
        assert_eq!(a.f(0.0), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PerturbedPower::new(0.0, 1.0, 3.0).is_err());
        assert!(PerturbedPower::new(1.0, 3.0, 3.0).is_err());
        assert!(PerturbedPower::new(1.0, -1.0, 3.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let a = pp(1.0, 1.0, 3.0);
        assert!((a.f_inv(2.0) - 1.0).abs() < 1e-15);
        assert_eq!(a.f_inv(0.0), 0.0);
        // Cardano for t^3 + t - 10 = 0
        let d = (25.0f64 + 1.0 / 27.0).sqrt();
        let cardano = (5.0 + d).cbrt() + (5.0 - d).cbrt();
        assert!((a.f_inv(10.0) - cardano).abs() < 1e-14 * cardano);
        assert!((a.f_inv(-10.0) + cardano).abs() < 1e-14 * cardano);
        assert!(a.try_f_inv(f64::NAN).is_err());
        assert!(a.f_inv(f64::INFINITY).is_nan());
    }

    #[test]
    fn threshold_is_crossover() {
        for &(l, r, p) in &[(1.0, 1.0, 3.0), (0.3, 0.5, 4.0), (7.0, 2.0, 2.5)] {
            let a = pp(l, r, p);
            let ts = a.threshold();
            assert!((a.f(a.crossover_root()) - ts).abs() <= 1e-12 * ts);
            let z = a.f_inv(ts);
            assert!((z - a.crossover_root()).abs() <= 1e-12 * z);
            assert!((z - (ts / (2.0 * l)).powf(1.0 / r)).abs() <= 1e-12 * z);
            assert!((z - (ts / 2.0).powf(1.0 / p)).abs() <= 1e-12 * z);
        }
    }

    #[test]
    fn fbar_examples() {
        let a = pp(1.0, 1.0, 3.0);
        assert_eq!(a.fbar(0.0), 0.0);
        assert!((a.fbar(2.0) - 1.25).abs() < 1e-15);
        assert!((a.fbar_alt(2.0) - 1.25).abs() < 1e-15);
        assert!((a.fbar(-2.0) - 1.25).abs() < 1e-15);
        let q = a.fbar_quadrature(2.0, 1e-12).unwrap();
        assert!((q - 1.25).abs() < 1e-11);
    }

    #[test]
    fn quadrature_sorted_matches_closed_form() {
        let a = pp(0.7, 0.6, 2.2);
        let pts: Vec<f64> = (0..200).map(|i| 1e-4 * 1.08f64.powi(i)).collect();
        let quad = a.fbar_quadrature_sorted(&pts, 1e-11).unwrap();
        for (x, qv) in pts.iter().zip(&quad) {
            let cf = a.fbar(*x);
            assert!((qv - cf).abs() <= 1e-9 * cf, "x = {x}: {qv} vs {cf}");
        }
    }

    #[test]
    fn derivative_of_fbar_is_inverse() {
        let a = pp(1.5, 0.8, 3.0);
        for &t in &[0.01, 0.3, 1.0, 2.9, 40.0] {
            let mut errs = Vec::new();
            for &h in &[1e-2 * t, 5e-3 * t] {
                let fd = (a.fbar(t + h) - a.fbar(t - h)) / (2.0 * h);
                errs.push((fd - a.f_inv(t)).abs());
            }
            // central differences: halving h divides the error by ~4
            let ratio = errs[0] / errs[1];
            assert!(errs[0] < 1e-3 * a.f_inv(t), "t = {t}: {errs:?}");
            assert!(ratio > 3.5 && ratio < 4.5, "t = {t}: ratio {ratio}");
        }
    }

    #[test]
    fn all_lemmas_pass_reference_case() {
        let a = pp(1.0, 1.0, 3.0);
        let spec = SampleSpec::log_spaced(10_000, 1e-6, 1e6);
        let reports = check_inequalities(&a, 1.0, &spec);
        assert_eq!(reports.len(), 7);
        for rep in &reports {
            assert!(rep.pass, "{rep:?}");
            assert!(rep.skipped.is_none());
        }
    }

    #[test]
    fn boundary_rs_equal_one() {
        let a = pp(1.0, 0.5, 5.0);
        let spec = SampleSpec::log_spaced(2000, 1e-6, 1e6);
        let reports = check_inequalities(&a, 2.0, &spec);
        let cor = reports
            .iter()
            .find(|r| r.lemma == LemmaId::AntiderivativeDominatesEulerTerm)
            .unwrap();
        // equality holds to leading order near zero, so only roundoff remains
        assert!(cor.worst_relative_slack > -1e-14, "{cor:?}");
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn skips_when_hypotheses_fail() {
        let a = pp(1.0, 0.5, 0.8);
        let spec = SampleSpec::log_spaced(100, 1e-3, 1e3);
        // rs = 0.5 < 1
        let reports = check_inequalities(&a, 1.0, &spec);
        assert!(reports.iter().filter(|r| r.skipped.is_some()).count() == 2);
        let reports = check_inequalities(&a, 2.1, &spec);
        assert!(reports.iter().all(|r| r.skipped.is_none() && r.pass));
    }

    #[test]
    fn detects_a_false_inequality() {
        // With s below 1/r the dominance check must fail somewhere.
        let a = pp(1.0, 1.0, 3.0);
        let rows = SampleSpec::log_spaced(200, 1e-6, 1e-2).points(a.threshold());
        let worst = rows
            .iter()
            .map(|&t| a.fbar(t) - a.euler_term(t) / (0.5 + 1.0))
            .fold(f64::INFINITY, f64::min);
        assert!(worst < 0.0);
    }

    #[test]
    fn asymptotic_ratio_examples() {
        let a = pp(1.0, 1.0, 3.0);
        let v = a.asymptotic_ratio(1e9);
        assert!((v - 1.0 / 3.0).abs() < 0.01 / 3.0, "{v}");
        let b = pp(2.0, 1.0, 5.0);
        assert!((b.asymptotic_ratio(1e12) - 0.4).abs() < 0.01 * 0.4);
        let errs: Vec<f64> = [1e3, 1e6, 1e9]
            .iter()
            .map(|&t| (a.asymptotic_ratio(t) - 1.0 / 3.0).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn single_precision_inverse() {
        let a = PerturbedPower::<f32>::new(1.0, 1.0, 3.0).unwrap();
        assert!((a.f_inv(2.0) - 1.0).abs() < 1e-6);
        assert!((a.fbar(2.0) - 1.25).abs() < 1e-5);
        let t = 37.5f32;
        assert!((a.f(a.f_inv(t)) - t).abs() < 1e-5 * t);
    }

    proptest! {
        #[test]
        fn round_trip_and_strict_bounds(
            lambda in 1e-2f64..1e2,
            p in 0.3f64..12.0,
            rf in 0.02f64..0.95,
            e in -8.0f64..8.0,
        ) {
            let r = p * rf;
            let a = pp(lambda, r, p);
            let tau = 10f64.powf(e);
            let z = a.f_inv(tau);
            prop_assert!((a.f(z) - tau).abs() <= 1e-12 * tau.max(1.0));
            prop_assert!(z > 0.0);
            // strict in exact arithmetic; the gap can fall below one ulp
            prop_assert!(z <= tau.powf(1.0 / p));
            prop_assert!(z <= (tau / lambda).powf(1.0 / r));
            prop_assert_eq!(a.f_inv(-tau), -z);
        }

        #[test]
        fn closed_forms_agree(
            lambda in 1e-2f64..1e2,
            p in 0.3f64..12.0,
            rf in 0.02f64..0.95,
            e in -6.0f64..6.0,
        ) {
            let a = pp(lambda, p * rf, p);
            let tau = 10f64.powf(e);
            let f1 = a.fbar(tau);
            let f2 = a.fbar_alt(tau);
            prop_assert!((f1 - f2).abs() <= 1e-12 * f1, "{} vs {}", f1, f2);
        }

        #[test]
        fn monotone_and_odd(lambda in 0.1f64..10.0, p in 1.1f64..6.0, x in 0.01f64..50.0, dx in 1e-6f64..1.0) {
            let a = pp(lambda, 1.0, p);
            prop_assert!(a.f(x + dx) > a.f(x));
            prop_assert_eq!(a.f(-x), -a.f(x));
            prop_assert!(a.f_inv(x + dx) > a.f_inv(x));
        }
    }
}
