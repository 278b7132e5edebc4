//! Parameter space of the perturbed Lane-Emden system
//!
//! ```text
//! -Δu = λ|v|^{r-1}v + |v|^{p-1}v,   -Δv = μ|u|^{s-1}u + |u|^{q-1}u   in Ω,   u = v = 0 on ∂Ω
//! ```
//!
//! with `(p, q)` on the critical hyperbola `1/(p+1) + 1/(q+1) = (N-2)/N` and
//! `0 < r < p`, `0 < s < q`, `rs >= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Relative tolerance for the hyperbola identity.
pub const HYPERBOLA_TOL: f64 = 1e-12;
/// Tolerance separating `rs = 1` from `rs > 1`.
pub const HOMOGENEITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    /// Space dimension `N >= 3`.
    pub n: u32,
    pub p: T,
    pub q: T,
    pub r: T,
    pub s: T,
    pub lambda: T,
    pub mu: T,
}

/// Solves the critical hyperbola for `q` given `p`.
///
/// `q = N(p+1) / ((N-2)(p+1) - N) - 1`, defined for `p > 2/(N-2)`.
pub fn q_from_p<T: Real>(n: u32, p: T) -> Result<T> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension N = {n} must be at least 3")));
    }
    let nn = T::from_u32(n).unwrap();
    let two = lit::<T>(2.0);
    let lower = two / (nn - two);
    if !(p > lower) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "p = {p} must exceed 2/(N-2) = {lower} for a finite positive q"
        )));
    }
    let p1 = p + T::one();
    Ok(nn * p1 / ((nn - two) * p1 - nn) - T::one())
}

/// Relative defect of the hyperbola identity `1/(p+1) + 1/(q+1) = (N-2)/N`.
pub fn hyperbola_defect<T: Real>(n: u32, p: T, q: T) -> T {
    let nn = T::from_u32(n).unwrap();
    let target = (nn - lit(2.0)) / nn;
    ((T::one() / (p + T::one()) + T::one() / (q + T::one())) - target).abs() / target
}

impl<T: Real> SystemParams<T> {
    /// Builds a parameter set on the critical hyperbola, deriving `q` from `p`.
    pub fn on_hyperbola(n: u32, p: T, r: T, s: T, lambda: T, mu: T) -> Result<Self> {
        let q = q_from_p(n, p)?;
        Ok(Self { n, p, q, r, s, lambda, mu })
    }

    pub fn rs(&self) -> T {
        self.r * self.s
    }

    /// `rs = 1` up to [`HOMOGENEITY_TOL`].
    pub fn is_one_homogeneous(&self) -> bool {
        (self.rs() - T::one()).abs() <= lit(HOMOGENEITY_TOL)
    }

    /// Checks every structural constraint except the hyperbola identity.
    pub fn structural_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let zero = T::zero();
        if self.n < 3 {
            out.push(format!("N = {} must be at least 3", self.n));
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("r", self.r), ("s", self.s)] {
            if !(v > zero) || !v.is_finite() {
                out.push(format!("{name} = {v} must be positive and finite"));
            }
        }
        if !(self.r < self.p) {
            out.push(format!("r = {} must be below p = {}", self.r, self.p));
        }
        if !(self.s < self.q) {
            out.push(format!("s = {} must be below q = {}", self.s, self.q));
        }
        if !(self.rs() >= T::one() - lit(HOMOGENEITY_TOL)) {
            out.push(format!("rs = {} must be at least 1", self.rs()));
        }
        if !(self.lambda > zero) || !self.lambda.is_finite() {
            out.push(format!("lambda = {} must be positive", self.lambda));
        }
        if !(self.mu > zero) || !self.mu.is_finite() {
            out.push(format!("mu = {} must be positive", self.mu));
        }
        out
    }

    /// Every violated invariant, including the hyperbola identity.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.structural_violations();
        if self.n >= 3 && self.p > T::zero() && self.q > T::zero() {
            let defect = hyperbola_defect(self.n, self.p, self.q);
            // f32 cannot resolve 1e-12; scale the tolerance with the precision.
            let tol = lit::<T>(HYPERBOLA_TOL).max(T::epsilon() * lit(64.0));
            if !(defect <= tol) {
                out.push(format!(
                    "(p, q) = ({}, {}) is off the critical hyperbola (relative defect {defect})",
                    self.p, self.q
                ));
            }
        }
        out
    }

    /// Returns the parameters when all invariants hold, otherwise every violation.
    pub fn validate(self) -> Result<Self> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Upper bounds on `λ^{1/r} μ` and `λ μ^{1/s}` required when `rs = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smallness<T> {
    /// `rs > 1`: no smallness condition on `(λ, μ)`.
    Unconstrained,
    Bounded {
        /// Bound on `λ^{1/r} μ`.
        lambda_root_mu: T,
        /// Bound on `λ μ^{1/s}`.
        lambda_mu_root: T,
    },
}

impl<T: Real> Smallness<T> {
    /// Whether `(λ, μ)` of `params` satisfies both bounds.
    pub fn admits(&self, params: &SystemParams<T>) -> bool {
        match *self {
            Smallness::Unconstrained => true,
            Smallness::Bounded { lambda_root_mu, lambda_mu_root } => {
                let a = params.lambda.powf(params.r.recip()) * params.mu;
                let b = params.lambda * params.mu.powf(params.s.recip());
                a <= lambda_root_mu && b <= lambda_mu_root
            }
        }
    }
}

/// Right-hand side of one smallness condition:
/// `(2|Ω|)^{(e-k)/(e(k+1))} / 2^{(e+1)/e} · C^{(e+1)/e}` with perturbation exponent `e`
/// and critical exponent `k`.
fn smallness_bound<T: Real>(e: T, k: T, c: T, volume: T) -> T {
    let two = lit::<T>(2.0);
    let h = (e + T::one()) / e;
    (two * volume).powf((e - k) / (e * (k + T::one()))) / two.powf(h) * c.powf(h)
}

/// Smallness thresholds on `(λ, μ)` given the Rayleigh constants `C_r`, `C_s` and `|Ω|`.
pub fn smallness_thresholds<T: Real>(
    params: &SystemParams<T>,
    c_r: T,
    c_s: T,
    domain_volume: T,
) -> Smallness<T> {
    if params.rs() > T::one() + lit(HOMOGENEITY_TOL) {
        return Smallness::Unconstrained;
    }
    Smallness::Bounded {
        lambda_root_mu: smallness_bound(params.r, params.p, c_r, domain_volume),
        lambda_mu_root: smallness_bound(params.s, params.q, c_s, domain_volume),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Existence for all admissible `(r, s)` and small `(λ, μ)`.
    Noncritical,
    /// Existence for this particular `(r, s)` from one of the sufficient conditions.
    ConditionalExistence,
    /// No sufficient condition applies; nothing is asserted.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub kind: RegionKind,
    /// Sufficient conditions that fired, empty for `Unknown`.
    pub witness: Vec<String>,
}

fn near<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= lit::<T>(HOMOGENEITY_TOL) * T::one().max(b.abs())
}

/// Region verdict for `N = 3`; `q` is derived from the hyperbola.
///
/// Only sufficient conditions are reported: `Unknown` is not a nonexistence claim.
pub fn classify_n3<T: Real>(p: T, r: T, s: T) -> Result<RegionVerdict> {
    let q = q_from_p(3, p)?;
    let probe = SystemParams { n: 3, p, q, r, s, lambda: T::one(), mu: T::one() };
    let violations = probe.structural_violations();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }

    let seven_halves = lit::<T>(3.5);
    let eight = lit::<T>(8.0);
    if p <= seven_halves || p >= eight {
        let which = if p <= seven_halves { "p <= 7/2" } else { "p >= 8" };
        return Ok(RegionVerdict {
            kind: RegionKind::Noncritical,
            witness: vec![which.to_string()],
        });
    }

    let one = T::one();
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let mut witness = Vec::new();

    // The 1/(p-3) branch needs p > 3, automatic inside (7/2, 8).
    if r < two && !near(r, two) && p > three && r < one / (p - three) {
        witness.push(format!("r < 2 and r < 1/(p-3) = {}", one / (p - three)));
    }
    // r = 2 requires p <= 7/2, impossible here.
    if r > two && !near(r, two) && r * r + (one - p) * r + one > T::zero() {
        witness.push("r > 2 and r^2 + (1-p) r + 1 > 0".to_string());
    }
    if near(r, lit(0.5)) && near(s, two) {
        witness.push("(r, s) = (1/2, 2)".to_string());
    }
    if s > two && !near(s, two) {
        let rhs = (q + one) / (p + one) * (p - one / r);
        if s + one > rhs {
            witness.push(format!("s > 2 and s + 1 > (q+1)/(p+1) (p - 1/r) = {rhs}"));
        }
    }

    let kind = if witness.is_empty() {
        RegionKind::Unknown
    } else {
        RegionKind::ConditionalExistence
    };
    Ok(RegionVerdict { kind, witness })
}

/// Region verdict for any dimension: `N >= 4` is always noncritical.
pub fn classify<T: Real>(n: u32, p: T, r: T, s: T) -> Result<RegionVerdict> {
    if n == 3 {
        return classify_n3(p, r, s);
    }
    let q = q_from_p(n, p)?;
    let probe = SystemParams { n, p, q, r, s, lambda: T::one(), mu: T::one() };
    let violations = probe.structural_violations();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(RegionVerdict {
        kind: RegionKind::Noncritical,
        witness: vec!["N >= 4".to_string()],
    })
}
