//! Positive radial solutions of the perturbed system on a ball `B_R`,
//!
//! ```text
//! -Δu = λ|v|^{r-1}v + |v|^{p-1}v,   -Δv = μ|u|^{s-1}u + |u|^{q-1}u,   u = v = 0 on ∂B_R,
//! ```
//!
//! by two-parameter shooting from `(u(0), v(0)) = (α, β)`, and existence sweeps over
//! parameter grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, Step};
use crate::params::{classify, q_from_p, RegionVerdict, SystemParams};
use crate::roots::brent;
use crate::scalar::{from_usize, lit, odd_pow, Real};

/// Dense-output nodes recorded per accepted step of a traced shot.
const NODES_PER_STEP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingState<T> {
    pub alpha: T,
    pub beta: T,
    /// Ball radius `R`.
    pub radius: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing<T> {
    pub field: Field,
    pub radius: T,
}

/// `(u, u', v, v')` on a strictly increasing grid from `r = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BallProfile<T> {
    pub r: Vec<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub du: Vec<T>,
    pub dv: Vec<T>,
}

impl<T: Real> BallProfile<T> {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn push(&mut self, r: T, y: [T; 4]) {
        self.r.push(r);
        self.u.push(y[0]);
        self.du.push(y[1]);
        self.v.push(y[2]);
        self.dv.push(y[3]);
    }

    /// Both fields positive at every node before the last.
    pub fn positive(&self) -> bool {
        let m = self.len().saturating_sub(1);
        self.u[..m].iter().chain(&self.v[..m]).all(|&x| x > T::zero())
    }

    /// Both fields strictly decreasing on `(0, r_max]`.
    pub fn decreasing(&self) -> bool {
        self.du[1..].iter().chain(&self.dv[1..]).all(|&d| d < T::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome<T> {
    /// Radius where integration ended: `R`, or the first zero of `u` or `v`.
    pub end: T,
    pub u_end: T,
    pub v_end: T,
    pub crossing: Option<Crossing<T>>,
    pub profile: BallProfile<T>,
}

fn check_exponents<T: Real>(params: &SystemParams<T>) -> Vec<String> {
    let mut v = Vec::new();
    if params.n < 3 {
        v.push(format!("N = {} must be at least 3", params.n));
    }
    for (name, x) in [("p", params.p), ("q", params.q), ("r", params.r), ("s", params.s)] {
        if !(x > T::zero()) || !x.is_finite() {
            v.push(format!("{name} = {x} must be positive and finite"));
        }
    }
    for (name, x) in [("lambda", params.lambda), ("mu", params.mu)] {
        if !(x >= T::zero()) || !x.is_finite() {
            v.push(format!("{name} = {x} must be nonnegative and finite"));
        }
    }
    v
}

fn check_state<T: Real>(state: &ShootingState<T>) -> Vec<String> {
    let mut v = Vec::new();
    for (name, x) in [("alpha", state.alpha), ("beta", state.beta), ("R", state.radius)] {
        if !(x > T::zero()) || !x.is_finite() {
            v.push(format!("{name} = {x} must be positive and finite"));
        }
    }
    v
}

struct Rhs<T> {
    params: SystemParams<T>,
    nm1: T,
}

impl<T: Real> Rhs<T> {
    fn new(params: &SystemParams<T>) -> Self {
        Self { params: *params, nm1: lit(f64::from(params.n - 1)) }
    }

    fn f(&self, v: T) -> T {
        self.params.lambda * odd_pow(v, self.params.r) + odd_pow(v, self.params.p)
    }

    fn g(&self, u: T) -> T {
        self.params.mu * odd_pow(u, self.params.s) + odd_pow(u, self.params.q)
    }

    fn eval(&self, r: T, y: &[T; 4]) -> [T; 4] {
        [y[1], -self.nm1 / r * y[1] - self.f(y[2]), y[3], -self.nm1 / r * y[3] - self.g(y[0])]
    }

    /// Series start `u = α - f(β) r²/(2N)`, `v = β - g(α) r²/(2N)` and the radius it is taken at.
    fn start(&self, alpha: T, beta: T, radius: T) -> (T, [T; 4]) {
        let nn = lit::<T>(f64::from(self.params.n));
        let (fb, ga) = (self.f(beta), self.g(alpha));
        let mut scale = radius;
        if fb > T::zero() {
            scale = scale.min((alpha * nn / fb).sqrt());
        }
        if ga > T::zero() {
            scale = scale.min((beta * nn / ga).sqrt());
        }
        let r0 = scale * lit(1e-4);
        let two_n = nn + nn;
        (r0, [alpha - fb * r0 * r0 / two_n, -fb * r0 / nn, beta - ga * r0 * r0 / two_n, -ga * r0 / nn])
    }
}

fn ode_options<T: Real>(tol: T, alpha: T, beta: T, r0: T) -> ode::Options<T> {
    ode::Options {
        rtol: tol,
        atol: tol * lit::<T>(1e-3) * alpha.min(beta),
        h0: Some(r0),
        max_steps: 1_000_000,
        ..ode::Options::default()
    }
}

fn first_zero<T: Real>(s: &Step<T, 4>, k: usize) -> T {
    brent(|t| s.at(t)[k], s.t0, s.t1, T::zero(), 200).unwrap_or(s.t1)
}

/// Integrates from `(α, β)` to `r = R`, stopping at the first zero of `u` or `v`.
pub fn shoot<T: Real>(params: &SystemParams<T>, state: &ShootingState<T>, tol: T) -> Result<ShotOutcome<T>> {
    let mut v = check_exponents(params);
    v.extend(check_state(state));
    if !(tol > T::zero()) {
        v.push(format!("tol = {tol} must be positive"));
    }
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let rhs = Rhs::new(params);
    let (r0, y0) = rhs.start(state.alpha, state.beta, state.radius);
    let mut profile = BallProfile::default();
    profile.push(T::zero(), [state.alpha, T::zero(), state.beta, T::zero()]);
    profile.push(r0, y0);
    let mut crossing = None;
    let out = ode::integrate(
        |r, y| rhs.eval(r, y),
        r0,
        y0,
        state.radius,
        &ode_options(tol, state.alpha, state.beta, r0),
        |s: &Step<T, 4>| {
            let u_down = s.y1[0] <= T::zero();
            let v_down = s.y1[2] <= T::zero();
            let stop = if u_down || v_down {
                let tu = if u_down { first_zero(s, 0) } else { T::infinity() };
                let tv = if v_down { first_zero(s, 2) } else { T::infinity() };
                let (field, radius) = if tu <= tv { (Field::U, tu) } else { (Field::V, tv) };
                crossing = Some(Crossing { field, radius });
                Some(radius)
            } else {
                None
            };
            let end = stop.unwrap_or(s.t1);
            for k in 1..=NODES_PER_STEP {
                let r = if k == NODES_PER_STEP {
                    end
                } else {
                    s.t0 + (end - s.t0) * from_usize(k) / from_usize(NODES_PER_STEP)
                };
                let y = if k == NODES_PER_STEP && stop.is_none() { s.y1 } else { s.at(r) };
                profile.push(r, y);
            }
            match stop {
                Some(r) => Control::StopAt(r),
                None => Control::Continue,
            }
        },
    )?;
    let last = profile.len() - 1;
    if crossing.is_none() && profile.r[last] < out.t {
        profile.push(out.t, out.y);
    }
    let last = profile.len() - 1;
    Ok(ShotOutcome {
        end: profile.r[last],
        u_end: profile.u[last],
        v_end: profile.v[last],
        crossing,
        profile,
    })
}

/// The order in which the fields reach zero from `(α, β)`, up to a cap or a blow-up.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Race<T> {
    first: Option<Crossing<T>>,
    second: Option<T>,
}

fn race<T: Real>(rhs: &Rhs<T>, alpha: T, beta: T, radius: T, cap: T, tol: T, both: bool) -> Result<Race<T>> {
    let (r0, y0) = rhs.start(alpha, beta, radius);
    let mut first: Option<Crossing<T>> = None;
    let mut second = None;
    let out = ode::integrate(
        |r, y| rhs.eval(r, y),
        r0,
        y0,
        cap,
        &ode_options(tol, alpha, beta, r0),
        |s: &Step<T, 4>| {
            let u_down = s.y1[0] <= T::zero();
            let v_down = s.y1[2] <= T::zero();
            match first {
                None if u_down || v_down => {
                    let tu = if u_down { first_zero(s, 0) } else { T::infinity() };
                    let tv = if v_down { first_zero(s, 2) } else { T::infinity() };
                    first = Some(if tu <= tv {
                        Crossing { field: Field::U, radius: tu }
                    } else {
                        Crossing { field: Field::V, radius: tv }
                    });
                    if u_down && v_down {
                        second = Some(tu.max(tv));
                    }
                    if !both || second.is_some() {
                        return Control::StopAt(s.t1);
                    }
                }
                Some(c) if second.is_none() => {
                    let k = if c.field == Field::U { 2 } else { 0 };
                    if s.y1[k] <= T::zero() {
                        second = Some(first_zero(s, k));
                        return Control::StopAt(s.t1);
                    }
                }
                _ => {}
            }
            Control::Continue
        },
    );
    match out {
        Ok(_) | Err(Error::Integrator(_)) => Ok(Race { first, second }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions<T> {
    /// Integrator relative tolerance.
    pub tol: T,
    /// Convergence threshold on `max(|u(R)|/α, |v(R)|/β)`.
    pub residual_tol: T,
    pub alpha_lo: T,
    pub alpha_hi: T,
    pub beta_lo: T,
    pub beta_hi: T,
    /// Log-spaced `α` values of the coarse scan.
    pub scan_points: usize,
    pub max_bisections: usize,
    /// Shots give up when neither field vanishes before `cap_factor · R`.
    pub cap_factor: T,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(1e-11),
            residual_tol: lit(1e-7),
            alpha_lo: lit(1e-2),
            alpha_hi: lit(1e6),
            beta_lo: lit(1e-2),
            beta_hi: lit(1e6),
            scan_points: 64,
            max_bisections: 200,
            cap_factor: lit(1e3),
        }
    }
}

impl<T: Real> SolveOptions<T> {
    fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.alpha_lo > T::zero() && self.alpha_lo < self.alpha_hi && self.alpha_hi.is_finite()) {
            v.push(format!("alpha box [{}, {}] is empty or inverted", self.alpha_lo, self.alpha_hi));
        }
        if !(self.beta_lo > T::zero() && self.beta_lo < self.beta_hi && self.beta_hi.is_finite()) {
            v.push(format!("beta box [{}, {}] is empty or inverted", self.beta_lo, self.beta_hi));
        }
        if self.scan_points < 2 {
            v.push(format!("scan needs at least 2 points, got {}", self.scan_points));
        }
        if !(self.tol > T::zero()) || !(self.residual_tol > T::zero()) {
            v.push("tolerances must be positive".into());
        }
        if !(self.cap_factor > T::one()) {
            v.push(format!("cap factor {} must exceed 1", self.cap_factor));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Found,
    NotFound,
    Inconclusive,
}

/// Coarse-scan record: the `β` matched to `α` and the common zero radius, when they exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    pub alpha: T,
    pub beta: Option<T>,
    pub zero_radius: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult<T> {
    pub verdict: Verdict,
    pub converged: bool,
    pub radius: T,
    pub alpha: Option<T>,
    pub beta: Option<T>,
    pub residual_u: Option<T>,
    pub residual_v: Option<T>,
    /// `u, v > 0` on `[0, R)`.
    pub positive: bool,
    pub decreasing: bool,
    pub profile: Option<BallProfile<T>>,
    pub trace: Vec<TracePoint<T>>,
    /// Shots integrated in total.
    pub shots: usize,
    pub note: String,
}

impl<T: Real> SolveResult<T> {
    /// `max(|u(R)|/α, |v(R)|/β)`, when a candidate was located.
    pub fn residual(&self) -> Option<T> {
        match (self.residual_u, self.residual_v, self.alpha, self.beta) {
            (Some(ru), Some(rv), Some(a), Some(b)) => Some((ru / a).max(rv / b)),
            _ => None,
        }
    }
}

struct Matcher<'a, T> {
    rhs: Rhs<T>,
    radius: T,
    opts: &'a SolveOptions<T>,
    shots: std::sync::atomic::AtomicUsize,
}

#[derive(Debug, Clone, Copy)]
struct Matched<T> {
    beta: T,
    zero_radius: T,
}

impl<'a, T: Real> Matcher<'a, T> {
    fn race(&self, alpha: T, beta: T, both: bool) -> Result<Race<T>> {
        self.shots.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        race(&self.rhs, alpha, beta, self.radius, self.radius * self.opts.cap_factor, self.opts.tol, both)
    }

    /// `β(α)` making `u` and `v` vanish together, by bisection on which vanishes first.
    fn match_beta(&self, alpha: T) -> Result<Option<Matched<T>>> {
        let (mut lo, mut hi) = (self.opts.beta_lo, self.opts.beta_hi);
        let first = |b: T| -> Result<Option<Field>> { Ok(self.race(alpha, b, false)?.first.map(|c| c.field)) };
        if first(lo)? != Some(Field::V) || first(hi)? != Some(Field::U) {
            return Ok(None);
        }
        for _ in 0..self.opts.max_bisections {
            let mid = (lo * hi).sqrt();
            if !(mid > lo && mid < hi) {
                break;
            }
            match first(mid)? {
                Some(Field::V) => lo = mid,
                Some(Field::U) => hi = mid,
                None => return Ok(None),
            }
        }
        let beta = (lo * hi).sqrt();
        let r = self.race(alpha, beta, true)?;
        Ok(match (r.first, r.second) {
            (Some(c), Some(second)) => Some(Matched { beta, zero_radius: (c.radius + second) / lit(2.0) }),
            _ => None,
        })
    }
}

/// Searches the configured `(α, β)` box for a positive radial solution on `B_R`.
///
/// A log-spaced scan in `α` matches `β(α)` so that both fields vanish at one radius
/// `ρ(α)`; a sign change of `ρ(α) - R` between neighbours is refined by bisection.
pub fn solve_ball<T: Real>(params: &SystemParams<T>, radius: T, opts: &SolveOptions<T>) -> Result<SolveResult<T>> {
    opts.check()?;
    let mut v = check_exponents(params);
    if !(radius > T::zero()) || !radius.is_finite() {
        v.push(format!("R = {radius} must be positive"));
    }
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let matcher = Matcher {
        rhs: Rhs::new(params),
        radius,
        opts,
        shots: std::sync::atomic::AtomicUsize::new(0),
    };
    let m = opts.scan_points;
    let ratio = (opts.alpha_hi / opts.alpha_lo).ln();
    let alphas: Vec<T> = (0..m)
        .map(|i| opts.alpha_lo * (ratio * from_usize::<T>(i) / from_usize::<T>(m - 1)).exp())
        .collect();
    let scanned: Vec<Option<Matched<T>>> =
        alphas.par_iter().map(|&a| matcher.match_beta(a)).collect::<Result<Vec<_>>>()?;
    let trace: Vec<TracePoint<T>> = alphas
        .iter()
        .zip(&scanned)
        .map(|(&alpha, mt)| TracePoint { alpha, beta: mt.map(|x| x.beta), zero_radius: mt.map(|x| x.zero_radius) })
        .collect();

    let mut result = SolveResult {
        verdict: Verdict::NotFound,
        converged: false,
        radius,
        alpha: None,
        beta: None,
        residual_u: None,
        residual_v: None,
        positive: false,
        decreasing: false,
        profile: None,
        trace,
        shots: 0,
        note: String::new(),
    };

    let cell = (0..m - 1).find(|&i| match (scanned[i], scanned[i + 1]) {
        (Some(a), Some(b)) => (a.zero_radius - radius) * (b.zero_radius - radius) <= T::zero(),
        _ => false,
    });
    let Some(i) = cell else {
        let undefined = scanned.iter().filter(|x| x.is_none()).count();
        result.note = format!(
            "no sign change of rho(alpha) - R over {m} log-spaced alpha in [{}, {}] ({undefined} without a matched beta)",
            opts.alpha_lo, opts.alpha_hi
        );
        result.shots = matcher.shots.load(std::sync::atomic::Ordering::Relaxed);
        return Ok(result);
    };

    let (mut lo, mut hi) = (alphas[i], alphas[i + 1]);
    let mut g_lo = scanned[i].unwrap().zero_radius - radius;
    let mut best = if g_lo.abs() <= (scanned[i + 1].unwrap().zero_radius - radius).abs() {
        (lo, scanned[i].unwrap())
    } else {
        (hi, scanned[i + 1].unwrap())
    };
    let mut budget_hit = true;
    for _ in 0..opts.max_bisections {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            budget_hit = false;
            break;
        }
        let Some(mt) = matcher.match_beta(mid)? else {
            result.note = format!("lost the matched beta at alpha = {mid} while refining");
            break;
        };
        let g = mt.zero_radius - radius;
        if g.abs() <= (best.1.zero_radius - radius).abs() {
            best = (mid, mt);
        }
        if g == T::zero() || g.abs() <= radius * T::epsilon() * lit(4.0) {
            budget_hit = false;
            break;
        }
        if (g < T::zero()) == (g_lo < T::zero()) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }

    let (alpha, beta) = (best.0, best.1.beta);
    let shot = shoot(params, &ShootingState { alpha, beta, radius }, opts.tol)?;
    result.alpha = Some(alpha);
    result.beta = Some(beta);
    result.residual_u = Some(shot.u_end.abs());
    result.residual_v = Some(shot.v_end.abs());
    result.positive = shot.profile.positive();
    result.decreasing = shot.profile.decreasing();
    result.profile = Some(shot.profile);
    result.shots = matcher.shots.load(std::sync::atomic::Ordering::Relaxed) + 1;
    let residual = result.residual().unwrap();
    result.converged = residual < opts.residual_tol && result.positive;
    result.verdict = if result.converged { Verdict::Found } else { Verdict::Inconclusive };
    if !result.converged && result.note.is_empty() {
        result.note = if budget_hit {
            format!("bisection budget exhausted with residual {residual}")
        } else {
            format!("refinement stalled with residual {residual}")
        };
    }
    Ok(result)
}

/// Critical-scaling exponents `a = 2(p+1)/(pq-1)`, `b = 2(q+1)/(pq-1)`.
pub fn scaling_exponents<T: Real>(p: T, q: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let den = p * q - T::one();
    (two * (p + T::one()) / den, two * (q + T::one()) / den)
}

/// Parameters and shooting state on `B_{cR}` for the transport
/// `u_c(x) = c^{-a} u(x/c)`, `v_c(x) = c^{-b} v(x/c)`: `λ → λc^{b(r-p)}`, `μ → μc^{a(s-q)}`.
pub fn rescale_problem<T: Real>(
    params: &SystemParams<T>,
    state: &ShootingState<T>,
    c: T,
) -> (SystemParams<T>, ShootingState<T>) {
    let (a, b) = scaling_exponents(params.p, params.q);
    let scaled = SystemParams {
        lambda: params.lambda * c.powf(b * (params.r - params.p)),
        mu: params.mu * c.powf(a * (params.s - params.q)),
        ..*params
    };
    let st = ShootingState { alpha: state.alpha * c.powf(-a), beta: state.beta * c.powf(-b), radius: state.radius * c };
    (scaled, st)
}

/// Axes of an existence sweep; `None` keeps the base value, an empty list empties the grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    /// `q` follows `p` on the hyperbola.
    pub p: Option<Vec<T>>,
    pub r: Option<Vec<T>>,
    pub s: Option<Vec<T>>,
    pub lambda: Option<Vec<T>>,
    pub mu: Option<Vec<T>>,
    pub radius: Option<Vec<T>>,
    /// Subcritical control: `q = factor · q_from_p(N, p)` instead of the hyperbola.
    pub subcritical_factor: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub index: usize,
    pub params: SystemParams<T>,
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry<T> {
    pub point: SweepPoint<T>,
    pub verdict: Verdict,
    pub residual: Option<T>,
    pub alpha: Option<T>,
    pub beta: Option<T>,
    /// Region verdict from the sufficient conditions, when the point is admissible for it.
    pub region: Option<RegionVerdict>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult<T> {
    pub base: SystemParams<T>,
    pub base_radius: T,
    pub grid: GridSpec<T>,
    pub options: SolveOptions<T>,
    pub entries: Vec<SweepEntry<T>>,
}

fn axis<T: Real>(a: &Option<Vec<T>>, base: T) -> Vec<T> {
    a.clone().unwrap_or_else(|| vec![base])
}

/// Grid points in row-major order over `(p, r, s, λ, μ, R)`.
pub fn sweep_points<T: Real>(base: &SystemParams<T>, base_radius: T, grid: &GridSpec<T>) -> Result<Vec<SweepPoint<T>>> {
    let mut out = Vec::new();
    for &p in &axis(&grid.p, base.p) {
        let q = match (&grid.p, grid.subcritical_factor) {
            (None, None) => base.q,
            (None, Some(f)) => q_from_p(base.n, p)? * f,
            (Some(_), f) => q_from_p(base.n, p)? * f.unwrap_or(T::one()),
        };
        for &r in &axis(&grid.r, base.r) {
            for &s in &axis(&grid.s, base.s) {
                for &lambda in &axis(&grid.lambda, base.lambda) {
                    for &mu in &axis(&grid.mu, base.mu) {
                        for &radius in &axis(&grid.radius, base_radius) {
                            let params = SystemParams { n: base.n, p, q, r, s, lambda, mu };
                            out.push(SweepPoint { index: out.len(), params, radius });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Runs [`solve_ball`] at every grid point, concurrently, with results in grid order.
pub fn existence_sweep<T: Real>(
    base: &SystemParams<T>,
    base_radius: T,
    grid: &GridSpec<T>,
    opts: &SolveOptions<T>,
) -> Result<SweepResult<T>> {
    opts.check()?;
    if let Some(f) = grid.subcritical_factor {
        if !(f > T::zero() && f < T::one()) {
            return Err(Error::Config(format!("subcritical factor {f} must lie in (0, 1)")));
        }
    }
    let points = sweep_points(base, base_radius, grid)?;
    let entries = points
        .par_iter()
        .map(|pt| {
            let region = classify(pt.params.n, pt.params.p, pt.params.r, pt.params.s).ok();
            match solve_ball(&pt.params, pt.radius, opts) {
                Ok(res) => SweepEntry {
                    point: *pt,
                    verdict: res.verdict,
                    residual: res.residual(),
                    alpha: res.alpha,
                    beta: res.beta,
                    region,
                    note: res.note,
                },
                Err(e) => SweepEntry {
                    point: *pt,
                    verdict: Verdict::Inconclusive,
                    residual: None,
                    alpha: None,
                    beta: None,
                    region,
                    note: e.to_string(),
                },
            }
        })
        .collect();
    Ok(SweepResult { base: *base, base_radius, grid: grid.clone(), options: *opts, entries })
}
