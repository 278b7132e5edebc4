//! Positive radial ground state of the Lane–Emden system on R^N,
//!
//! ```text
//! -Δφ = |ψ|^{p-1}ψ,   -Δψ = |φ|^{q-1}φ,   φ(0) = 1,
//! ```
//!
//! found by shooting on `β = ψ(0)`, with tail-decay classification and the
//! Sobolev quotient `S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, Step};
use crate::params::hyperbola_defect;
use crate::quad;
use crate::roots::brent;
use crate::scalar::{from_usize, lit, odd_pow, sphere_area, Real};

/// Sub-intervals recorded per accepted integrator step.
pub(crate) const NODES_PER_STEP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateOptions<T> {
    /// Integrator relative and absolute tolerance.
    pub tol: T,
    /// Radius where the series start hands over to the integrator.
    pub r0: T,
    /// Initial shooting interval for `β = ψ(0)`; expanded once to `[lo/100, hi*100]`.
    pub beta_lo: T,
    pub beta_hi: T,
    pub max_bisections: usize,
    /// Cap on the profile radius.
    pub r_cap: T,
    /// Profile stops once both fields fall below this fraction of their central values.
    pub decay_ratio: T,
    /// Radius beyond which an undecided shot counts as converged.
    pub shoot_cap: T,
}

impl<T: Real> Default for GroundStateOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-10),
            r0: lit(1e-6),
            beta_lo: lit(0.1),
            beta_hi: lit(10.0),
            max_bisections: 60,
            r_cap: lit(1e4),
            decay_ratio: lit(1e-4),
            shoot_cap: lit(1e30),
        }
    }
}

/// Radial fields sampled on a strictly increasing grid starting at `r = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile<T> {
    pub n: u32,
    pub p: T,
    pub q: T,
    pub r: Vec<T>,
    pub phi: Vec<T>,
    pub psi: Vec<T>,
    pub dphi: Vec<T>,
    pub dpsi: Vec<T>,
    /// Number of shooting bisections performed.
    pub bisections: usize,
}

impl<T: Real> RadialProfile<T> {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> T {
        *self.r.last().unwrap()
    }

    /// Shooting parameter `ψ(0)`.
    pub fn beta(&self) -> T {
        self.psi[0]
    }

    fn second_derivatives(&self, i: usize) -> (T, T) {
        let nm1 = T::from_u32(self.n - 1).unwrap();
        let (r, phi, psi) = (self.r[i], self.phi[i], self.psi[i]);
        if r == T::zero() {
            let nn = T::from_u32(self.n).unwrap();
            (-odd_pow(psi, self.p) / nn, -odd_pow(phi, self.q) / nn)
        } else {
            (
                -nm1 / r * self.dphi[i] - odd_pow(psi, self.p),
                -nm1 / r * self.dpsi[i] - odd_pow(phi, self.q),
            )
        }
    }

    /// `(φ, φ', ψ, ψ')` at `x` in `[0, r_max]` by quintic Hermite interpolation,
    /// using second derivatives from the equations.
    pub fn eval(&self, x: T) -> Option<[T; 4]> {
        if !(x >= T::zero()) || x > self.r_max() {
            return None;
        }
        let j = self.r.partition_point(|&ri| ri <= x).clamp(1, self.r.len() - 1);
        let i = j - 1;
        let h = self.r[j] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (s0p, s0s) = self.second_derivatives(i);
        let (s1p, s1s) = self.second_derivatives(j);
        let (v_phi, d_phi) =
            hermite5(t, h, [self.phi[i], self.dphi[i], s0p], [self.phi[j], self.dphi[j], s1p]);
        let (v_psi, d_psi) =
            hermite5(t, h, [self.psi[i], self.dpsi[i], s0s], [self.psi[j], self.dpsi[j], s1s]);
        Some([v_phi, d_phi, v_psi, d_psi])
    }

    /// The rescaled pair `φ_a(x) = a^{2(p+1)/(pq-1)} φ(ax)`, `ψ_a(x) = a^{2(q+1)/(pq-1)} ψ(ax)`,
    /// again a solution of the same system.
    pub fn rescale(&self, a: T) -> Self {
        let two = lit::<T>(2.0);
        let den = self.p * self.q - T::one();
        let ea = a.powf(two * (self.p + T::one()) / den);
        let eb = a.powf(two * (self.q + T::one()) / den);
        Self {
            n: self.n,
            p: self.p,
            q: self.q,
            r: self.r.iter().map(|&r| r / a).collect(),
            phi: self.phi.iter().map(|&v| v * ea).collect(),
            psi: self.psi.iter().map(|&v| v * eb).collect(),
            dphi: self.dphi.iter().map(|&v| v * ea * a).collect(),
            dpsi: self.dpsi.iter().map(|&v| v * eb * a).collect(),
            bisections: self.bisections,
        }
    }

    /// Largest relative residual of the flux form
    /// `[r^{N-1}u']_a^b + ∫_a^b r^{N-1} g = 0` over each integrator step.
    pub fn ode_residual(&self) -> T {
        let nm1 = lit::<T>(f64::from(self.n - 1));
        let mut worst = T::zero();
        let mut i = 1;
        while i + NODES_PER_STEP < self.r.len() {
            let w = (self.r[i + NODES_PER_STEP] - self.r[i]) / from_usize(NODES_PER_STEP);
            let boole = |g: &dyn Fn(usize) -> T| {
                let c = [7.0, 32.0, 12.0, 32.0, 7.0];
                let s: T = (0..5).map(|k| lit::<T>(c[k]) * g(i + k)).sum();
                lit::<T>(2.0 / 45.0) * w * s
            };
            let rn = |k: usize| self.r[k].powf(nm1);
            let src_phi = boole(&|k| rn(k) * odd_pow(self.psi[k], self.p));
            let src_psi = boole(&|k| rn(k) * odd_pow(self.phi[k], self.q));
            let e = i + NODES_PER_STEP;
            for (flux, src) in [
                ((rn(e) * self.dphi[e], rn(i) * self.dphi[i]), src_phi),
                ((rn(e) * self.dpsi[e], rn(i) * self.dpsi[i]), src_psi),
            ] {
                let res = (flux.0 - flux.1 + src).abs();
                let scale = flux.0.abs() + flux.1.abs() + src.abs();
                if scale > T::zero() {
                    worst = worst.max(res / scale);
                }
            }
            i = e;
        }
        worst
    }
}

fn hermite5<T: Real>(t: T, h: T, a: [T; 3], b: [T; 3]) -> (T, T) {
    let c = |x: f64| lit::<T>(x);
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = T::one() - c(10.0) * t3 + c(15.0) * t4 - c(6.0) * t5;
    let h1 = t - c(6.0) * t3 + c(8.0) * t4 - c(3.0) * t5;
    let h2 = c(0.5) * (t2 - c(3.0) * t3 + c(3.0) * t4 - t5);
    let h3 = c(0.5) * (t3 - c(2.0) * t4 + t5);
    let h4 = -c(4.0) * t3 + c(7.0) * t4 - c(3.0) * t5;
    let h5 = c(10.0) * t3 - c(15.0) * t4 + c(6.0) * t5;
    let d0 = -c(30.0) * t2 + c(60.0) * t3 - c(30.0) * t4;
    let d1 = T::one() - c(18.0) * t2 + c(32.0) * t3 - c(15.0) * t4;
    let d2 = t - c(4.5) * t2 + c(6.0) * t3 - c(2.5) * t4;
    let d3 = c(1.5) * t2 - c(4.0) * t3 + c(2.5) * t4;
    let d4 = -c(12.0) * t2 + c(28.0) * t3 - c(15.0) * t4;
    let d5 = -d0;
    let hh = h * h;
    let v = a[0] * h0 + h * a[1] * h1 + hh * a[2] * h2 + b[0] * h5 + h * b[1] * h4 + hh * b[2] * h3;
    let dv = (a[0] * d0 + b[0] * d5) / h + a[1] * d1 + b[1] * d4 + h * (a[2] * d2 + b[2] * d3);
    (v, dv)
}

/// What a single shot from `β` revealed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `φ` reaches zero first: `β` too large.
    PhiExhausted,
    /// `ψ` reaches zero first: `β` too small.
    PsiExhausted,
    /// Neither field decided before the shooting cap.
    Undecided,
}

struct System {
    nm1: f64,
}

fn rhs<T: Real>(sys: &System, p: T, q: T, r: T, y: &[T; 4]) -> [T; 4] {
    let nm1 = lit::<T>(sys.nm1);
    [
        y[1],
        -nm1 / r * y[1] - odd_pow(y[2], p),
        y[3],
        -nm1 / r * y[3] - odd_pow(y[0], q),
    ]
}

fn series_start<T: Real>(n: u32, p: T, beta: T, r0: T) -> [T; 4] {
    let two_n = lit::<T>(2.0 * f64::from(n));
    let bp = beta.powf(p);
    [
        T::one() - bp * r0 * r0 / two_n,
        -lit::<T>(2.0) * bp * r0 / two_n,
        beta - r0 * r0 / two_n,
        -lit::<T>(2.0) * r0 / two_n,
    ]
}

fn ode_options<T: Real>(opts: &GroundStateOptions<T>) -> ode::Options<T> {
    ode::Options {
        rtol: opts.tol,
        atol: opts.tol * lit(1e-3),
        h0: Some(opts.r0),
        max_steps: 1_000_000,
        ..ode::Options::default()
    }
}

/// `u + r u'/(N-2)`: nonincreasing while the other field is positive, and once
/// negative it forces `u` to cross zero.
fn tail_constant<T: Real>(n: u32, r: T, u: T, du: T) -> T {
    u + r * du / lit(f64::from(n - 2))
}

fn shoot<T: Real>(n: u32, p: T, q: T, beta: T, opts: &GroundStateOptions<T>) -> Result<Shot> {
    let sys = System { nm1: f64::from(n - 1) };
    let mut verdict = Shot::Undecided;
    ode::integrate(
        |r, y| rhs(&sys, p, q, r, y),
        opts.r0,
        series_start(n, p, beta, opts.r0),
        opts.shoot_cap,
        &ode_options(opts),
        |s: &Step<T, 4>| {
            let y = &s.y1;
            let phi_down = y[0] <= T::zero();
            let psi_down = y[2] <= T::zero();
            if phi_down || psi_down {
                // both in one step: whichever crossed first
                verdict = if phi_down && psi_down {
                    let tp = brent(|t| s.at(t)[0], s.t0, s.t1, T::zero(), 200).unwrap_or(s.t1);
                    let ts = brent(|t| s.at(t)[2], s.t0, s.t1, T::zero(), 200).unwrap_or(s.t1);
                    if tp <= ts { Shot::PhiExhausted } else { Shot::PsiExhausted }
                } else if phi_down {
                    Shot::PhiExhausted
                } else {
                    Shot::PsiExhausted
                };
                return Control::StopAt(s.t1);
            }
            let d_phi = tail_constant(n, s.t1, y[0], y[1]);
            let d_psi = tail_constant(n, s.t1, y[2], y[3]);
            if d_phi < T::zero() && d_psi >= T::zero() {
                verdict = Shot::PhiExhausted;
                return Control::StopAt(s.t1);
            }
            if d_psi < T::zero() && d_phi >= T::zero() {
                verdict = Shot::PsiExhausted;
                return Control::StopAt(s.t1);
            }
            Control::Continue
        },
    )?;
    Ok(verdict)
}

/// Solves for the ground state with default options and integrator tolerance `tol`.
pub fn solve_ground_state<T: Real>(n: u32, p: T, q: T, tol: T) -> Result<RadialProfile<T>> {
    solve_ground_state_with(n, p, q, &GroundStateOptions { tol, ..GroundStateOptions::default() })
}

pub fn solve_ground_state_with<T: Real>(
    n: u32,
    p: T,
    q: T,
    opts: &GroundStateOptions<T>,
) -> Result<RadialProfile<T>> {
    let mut v = Vec::new();
    if n < 3 {
        v.push(format!("N = {n} must be at least 3"));
    }
    if !(p > T::zero() && q > T::zero()) {
        v.push(format!("exponents p = {p}, q = {q} must be positive"));
    } else if n >= 3 {
        let defect = hyperbola_defect(n, p, q);
        if !(defect <= lit::<T>(1e-12).max(T::epsilon() * lit(64.0))) {
            v.push(format!("(p, q) = ({p}, {q}) is off the critical hyperbola for N = {n}"));
        }
    }
    if !(opts.tol > T::zero()) {
        v.push(format!("tol = {} must be positive", opts.tol));
    }
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }

    let (mut lo, mut hi) = (opts.beta_lo, opts.beta_hi);
    let bracketed = |lo: T, hi: T| -> Result<bool> {
        Ok(shoot(n, p, q, lo, opts)? == Shot::PsiExhausted
            && shoot(n, p, q, hi, opts)? == Shot::PhiExhausted)
    };
    if !bracketed(lo, hi)? {
        lo = lo / lit(100.0);
        hi = hi * lit(100.0);
        if !bracketed(lo, hi)? {
            return Err(Error::Bracket(format!(
                "no change of shooting behavior for beta in [{lo}, {hi}]"
            )));
        }
    }
    let mut bisections = 0;
    while bisections < opts.max_bisections {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        bisections += 1;
        match shoot(n, p, q, mid, opts)? {
            Shot::PsiExhausted => lo = mid,
            Shot::PhiExhausted => hi = mid,
            Shot::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    let beta = (lo * hi).sqrt();
    let mut profile = trace_profile(n, p, q, beta, opts)?;
    profile.bisections = bisections;
    Ok(profile)
}

fn trace_profile<T: Real>(
    n: u32,
    p: T,
    q: T,
    beta: T,
    opts: &GroundStateOptions<T>,
) -> Result<RadialProfile<T>> {
    let sys = System { nm1: f64::from(n - 1) };
    let y0 = series_start(n, p, beta, opts.r0);
    let mut prof = RadialProfile {
        n,
        p,
        q,
        r: vec![T::zero(), opts.r0],
        phi: vec![T::one(), y0[0]],
        psi: vec![beta, y0[2]],
        dphi: vec![T::zero(), y0[1]],
        dpsi: vec![T::zero(), y0[3]],
        bisections: 0,
    };
    let phi_stop = opts.decay_ratio;
    let psi_stop = opts.decay_ratio * beta;
    ode::integrate(
        |r, y| rhs(&sys, p, q, r, y),
        opts.r0,
        y0,
        opts.r_cap,
        &ode_options(opts),
        |s: &Step<T, 4>| {
            if s.y1[0] <= T::zero() || s.y1[2] <= T::zero() {
                return Control::StopAt(s.t0);
            }
            for k in 1..=NODES_PER_STEP {
                let (r, y) = if k == NODES_PER_STEP {
                    (s.t1, s.y1)
                } else {
                    let r = s.t0 + (s.t1 - s.t0) * from_usize(k) / from_usize(NODES_PER_STEP);
                    (r, s.at(r))
                };
                prof.r.push(r);
                prof.phi.push(y[0]);
                prof.dphi.push(y[1]);
                prof.psi.push(y[2]);
                prof.dpsi.push(y[3]);
            }
            if s.y1[0] < phi_stop && s.y1[2] < psi_stop {
                Control::StopAt(s.t1)
            } else {
                Control::Continue
            }
        },
    )?;
    if prof.r_max() < lit(10.0) {
        return Err(Error::Convergence(format!(
            "ground state profile for beta = {beta} ends at r = {}",
            prof.r_max()
        )));
    }
    Ok(prof)
}

/// Tail regime of the ground state, split by `p` against `N/(N-2)` and
/// `(N²+2N-4)/(N²-4N+4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayCase {
    A,
    B,
    C,
    D,
    E,
}

impl DecayCase {
    pub fn classify<T: Real>(n: u32, p: T) -> Self {
        let nn = lit::<T>(f64::from(n));
        let two = lit::<T>(2.0);
        let four = lit::<T>(4.0);
        let first = nn / (nn - two);
        let second = (nn * nn + two * nn - four) / (nn * nn - four * nn + four);
        let close = |a: T, b: T| (a - b).abs() <= lit::<T>(1e-9) * b;
        if close(p, first) {
            DecayCase::B
        } else if p < first {
            DecayCase::A
        } else if close(p, second) {
            DecayCase::D
        } else if p < second {
            DecayCase::C
        } else {
            DecayCase::E
        }
    }

    /// `(k, ℓ)` for `φ` and for `ψ`: each field behaves like `r^{-k} (log r)^ℓ`.
    pub fn exponents<T: Real>(self, n: u32, p: T, q: T) -> ((T, T), (T, T)) {
        let nm2 = lit::<T>(f64::from(n - 2));
        let two = lit::<T>(2.0);
        let (zero, one) = (T::zero(), T::one());
        match self {
            DecayCase::A => ((p * nm2 - two, zero), (nm2, zero)),
            DecayCase::B => ((nm2, one), (nm2, zero)),
            DecayCase::C => ((nm2, zero), (nm2, zero)),
            DecayCase::D => ((nm2, zero), (nm2, one)),
            DecayCase::E => ((nm2, zero), (q * nm2 - two, zero)),
        }
    }
}

/// Relative tolerance on fitted tail exponents.
pub const DECAY_FIT_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport<T> {
    pub case: DecayCase,
    pub phi_exponent: T,
    pub phi_half_width: T,
    pub psi_exponent: T,
    pub psi_half_width: T,
    pub expected_phi_exponent: T,
    pub expected_psi_exponent: T,
    /// Plain log-log slopes over the window, without correction terms.
    pub phi_local_slope: T,
    pub psi_local_slope: T,
    /// Whether the tail model carries a `log r` factor.
    pub phi_log_corrected: bool,
    pub psi_log_corrected: bool,
    /// Leading tail constants `lim r^k φ / (log r)^ℓ` and the same for `ψ`.
    pub b: T,
    pub c: T,
    pub window: (T, T),
    pub within_tolerance: bool,
}

/// Shape of a tail `u ≈ r^{-k} (c₁ g₁(r) + c₂ g₂(r))`.
#[derive(Debug, Clone, Copy)]
enum TailBasis<T> {
    /// `g₁ = 1`
    Pure,
    /// `g₁ = 1`, `g₂ = r^{-gap}`: a known subleading power.
    Corrected(T),
    /// `g₁ = log r`, `g₂ = 1`
    Log,
}

#[derive(Debug, Clone, Copy)]
struct TailFit<T> {
    k: T,
    lead: T,
    sse: T,
}

fn tail_coefficients<T: Real>(r: &[T], u: &[T], k: T, basis: TailBasis<T>) -> TailFit<T> {
    let basis_at = |x: T| -> (T, T) {
        match basis {
            TailBasis::Pure => (T::one(), T::zero()),
            TailBasis::Corrected(g) => (T::one(), x.powf(-g)),
            TailBasis::Log => (x.ln(), T::one()),
        }
    };
    // relative least squares: minimize Σ (1 - c₁ a_i - c₂ b_i)²
    let (mut saa, mut sab, mut sbb, mut sa, mut sb) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let rows: Vec<(T, T)> = r
        .iter()
        .zip(u)
        .map(|(&x, &v)| {
            let (g1, g2) = basis_at(x);
            let w = x.powf(-k) / v;
            (w * g1, w * g2)
        })
        .collect();
    for &(a, b) in &rows {
        saa = saa + a * a;
        sab = sab + a * b;
        sbb = sbb + b * b;
        sa = sa + a;
        sb = sb + b;
    }
    let (c1, c2) = match basis {
        TailBasis::Pure => (sa / saa, T::zero()),
        _ => {
            let det = saa * sbb - sab * sab;
            ((sa * sbb - sb * sab) / det, (saa * sb - sab * sa) / det)
        }
    };
    let sse = rows.iter().map(|&(a, b)| (T::one() - c1 * a - c2 * b).powi(2)).sum();
    TailFit { k, lead: c1, sse }
}

/// Exponent minimizing the relative misfit of the tail model, scanned over
/// `[k_guess/2, 3k_guess/2]` and refined by golden section.
fn fit_tail<T: Real>(r: &[T], u: &[T], k_guess: T, basis: TailBasis<T>) -> TailFit<T> {
    let scan = 300;
    let lo = k_guess * lit(0.5);
    let width = k_guess;
    let at = |i: usize| lo + width * from_usize(i) / from_usize(scan);
    let best = (0..=scan)
        .map(|i| tail_coefficients(r, u, at(i), basis))
        .fold(None::<TailFit<T>>, |acc, f| match acc {
            Some(a) if !(f.sse < a.sse) => Some(a),
            _ => Some(f),
        })
        .unwrap();
    let step = width / from_usize(scan);
    let (k, _) = crate::roots::golden_max(
        |k| -tail_coefficients(r, u, k, basis).sse,
        best.k - step,
        best.k + step,
        200,
    );
    let refined = tail_coefficients(r, u, k, basis);
    if refined.sse <= best.sse { refined } else { best }
}

fn local_slope<T: Real>(r: &[T], u: &[T]) -> T {
    let x: Vec<T> = r.iter().map(|v| v.ln()).collect();
    let y: Vec<T> = u.iter().map(|v| v.ln()).collect();
    let m = from_usize::<T>(x.len());
    let mx = x.iter().copied().sum::<T>() / m;
    let my = y.iter().copied().sum::<T>() / m;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(&y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
    }
    -sxy / sxx
}

/// Fits the tail exponents of both fields over the last decade of the profile.
///
/// Each field is modeled by its leading power, times `log r` in the borderline
/// cases, plus the subleading power forced by the other field when it is within
/// reach of the window. The half-width is the drift between fits on the two
/// halves of the window.
pub fn fit_decay<T: Real>(profile: &RadialProfile<T>) -> Result<DecayReport<T>> {
    let case = DecayCase::classify(profile.n, profile.p);
    let ((kp, lp), (ks, ls)) = case.exponents(profile.n, profile.p, profile.q);
    let r_max = profile.r_max();
    let start = r_max / lit(10.0);
    if start <= T::one() {
        return Err(Error::Fit(format!("profile radius {r_max} too short for a tail decade")));
    }
    let idx: Vec<usize> = (0..profile.len()).filter(|&i| profile.r[i] >= start).collect();
    if idx.len() < 32 {
        return Err(Error::Fit(format!("only {} nodes in the tail decade", idx.len())));
    }
    let r: Vec<T> = idx.iter().map(|&i| profile.r[i]).collect();
    let nm2 = lit::<T>(f64::from(profile.n - 2));
    let two = lit::<T>(2.0);
    let fit_field = |u_all: &[T], k: T, ell: T, forced: T| -> Result<(TailFit<T>, T, T)> {
        let u: Vec<T> = idx.iter().map(|&i| u_all[i]).collect();
        if let Some(pos) = u.iter().position(|v| !(*v > T::zero())) {
            return Err(Error::Fit(format!("nonpositive value in tail at r = {}", r[pos])));
        }
        // the two candidate powers are N-2 and the forced one
        let gap = (forced - nm2).abs();
        let basis = if ell > T::zero() {
            TailBasis::Log
        } else if start.powf(-gap) > lit(1e-12) {
            TailBasis::Corrected(gap)
        } else {
            TailBasis::Pure
        };
        let full = fit_tail(&r, &u, k, basis);
        let h = r.len() / 2;
        let first = fit_tail(&r[..h], &u[..h], k, basis);
        let second = fit_tail(&r[h..], &u[h..], k, basis);
        Ok((full, (first.k - second.k).abs(), local_slope(&r, &u)))
    };
    let (fp, hp, sp) = fit_field(&profile.phi, kp, lp, profile.p * nm2 - two)?;
    let (fs, hs, ss) = fit_field(&profile.psi, ks, ls, profile.q * nm2 - two)?;
    let tol = lit::<T>(DECAY_FIT_TOL);
    let within = (fp.k - kp).abs() <= tol * kp && (fs.k - ks).abs() <= tol * ks;
    Ok(DecayReport {
        case,
        phi_exponent: fp.k,
        phi_half_width: hp,
        psi_exponent: fs.k,
        psi_half_width: hs,
        expected_phi_exponent: kp,
        expected_psi_exponent: ks,
        phi_local_slope: sp,
        psi_local_slope: ss,
        phi_log_corrected: lp > T::zero(),
        psi_log_corrected: ls > T::zero(),
        b: fp.lead,
        c: fs.lead,
        window: (r[0], r_max),
        within_tolerance: within,
    })
}

/// `∫_0^{r_max} r^{N-1} |u|^m dr` by the endpoint-corrected trapezoid rule, plus the
/// tail beyond `r_max` from the model `u(R)(r/R)^{-k}(log r/log R)^ℓ`.
fn radial_power_integral<T: Real>(
    profile: &RadialProfile<T>,
    u: &[T],
    du: &[T],
    m: T,
    (k, ell): (T, T),
) -> Result<T> {
    let nm1 = lit::<T>(f64::from(profile.n - 1));
    let r = &profile.r;
    let g = |i: usize| r[i].powf(nm1) * u[i].abs().powf(m);
    let dg = |i: usize| {
        if r[i] == T::zero() {
            T::zero()
        } else {
            nm1 * r[i].powf(nm1 - T::one()) * u[i].abs().powf(m)
                + m * r[i].powf(nm1) * u[i].abs().powf(m - T::one()) * du[i] * u[i].signum()
        }
    };
    let mut acc = T::zero();
    let twelve = lit::<T>(12.0);
    for i in 0..r.len() - 1 {
        let h = r[i + 1] - r[i];
        acc = acc + h * (g(i) + g(i + 1)) * lit(0.5) + h * h * (dg(i) - dg(i + 1)) / twelve;
    }
    let nn = lit::<T>(f64::from(profile.n));
    let rate = k * m - nn;
    if !(rate > T::zero()) {
        return Err(Error::Fit(format!("tail integral diverges: decay rate {rate}")));
    }
    let big_r = profile.r_max();
    let head = big_r.powf(nn) * u[r.len() - 1].abs().powf(m);
    let tail = if ell == T::zero() {
        head / rate
    } else {
        let lr = big_r.ln();
        let q = quad::integrate(
            |x: T| (-rate * x).exp() * (T::one() + x / lr).powf(ell * m),
            T::zero(),
            lit::<T>(80.0) / rate,
            T::zero(),
            lit(1e-12),
            500,
        )?;
        head * q.value
    };
    Ok(acc + tail)
}

/// `∫_{R^N} ψ^{p+1}` and `∫_{R^N} φ^{q+1}`, tails included.
pub fn energy_integrals<T: Real>(profile: &RadialProfile<T>) -> Result<(T, T)> {
    let case = DecayCase::classify(profile.n, profile.p);
    let (ephi, epsi) = case.exponents(profile.n, profile.p, profile.q);
    let omega = sphere_area::<T>(profile.n);
    let a = radial_power_integral(profile, &profile.psi, &profile.dpsi, profile.p + T::one(), epsi)?;
    let b = radial_power_integral(profile, &profile.phi, &profile.dphi, profile.q + T::one(), ephi)?;
    Ok((omega * a, omega * b))
}

/// `S = |Δφ|_{(p+1)/p} / |φ|_{q+1} = (∫ψ^{p+1})^{p/(p+1)} / (∫φ^{q+1})^{1/(q+1)}`.
pub fn sobolev_constant<T: Real>(profile: &RadialProfile<T>) -> Result<T> {
    let (a, b) = energy_integrals(profile)?;
    let one = T::one();
    let s = a.powf(profile.p / (profile.p + one)) / b.powf(one / (profile.q + one));
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::Fit(format!("degenerate Sobolev quotient {s}")));
    }
    Ok(s)
}
