//! The reduced energy
//!
//! ```text
//! I_F(u) = ∫ F̄_λ(Δu) - μ/(s+1) ∫|u|^{s+1} - 1/(q+1) ∫|u|^{q+1}
//! ```
//!
//! on radial fields over a ball, the cutoff-rescaled ground-state test family,
//! mountain-pass level estimates along its rays, and Rayleigh constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxfun::PerturbedPower;
use crate::error::{Error, Result};
use crate::groundstate::RadialProfile;
use crate::mesh::RadialMesh;
use crate::params::SystemParams;
use crate::roots::{brent, golden_max};
use crate::scalar::{lit, sphere_area, Real};

/// Minimum mesh nodes inside `(0, δ)` for a test function.
pub const MIN_NODES_IN_CORE: usize = 32;

fn lp_power<T: Real>(mesh: &RadialMesh<T>, u: &[T], e: T) -> T {
    let vals: Vec<T> = u.iter().map(|v| v.abs().powf(e)).collect();
    mesh.integrate(&vals)
}

fn perturbed_power<T: Real>(params: &SystemParams<T>) -> Result<PerturbedPower<T>> {
    PerturbedPower::new(params.lambda, params.r, params.p)
}

/// `I_F(u)` for nodal values `u` with Laplacian `lap` on the mesh.
pub fn energy_with_laplacian<T: Real>(
    mesh: &RadialMesh<T>,
    u: &[T],
    lap: &[T],
    params: &SystemParams<T>,
) -> Result<T> {
    let pp = perturbed_power(params)?;
    let fb: Vec<T> = lap.par_iter().map(|&l| pp.fbar(l)).collect();
    let one = T::one();
    Ok(mesh.integrate(&fb)
        - params.mu / (params.s + one) * lp_power(mesh, u, params.s + one)
        - lp_power(mesh, u, params.q + one) / (params.q + one))
}

/// `I_F(u)` with the stencil Laplacian of [`RadialMesh::laplacian`].
pub fn energy<T: Real>(mesh: &RadialMesh<T>, u: &[T], params: &SystemParams<T>) -> Result<T> {
    let lap = mesh.laplacian(u);
    energy_with_laplacian(mesh, u, &lap, params)
}

/// `p/(p+1)‖u‖^{(p+1)/p} - μ/(s+1)|u|^{s+1}_{s+1} - 1/(q+1)|u|^{q+1}_{q+1}`, an upper bound for `I_F(u)`.
pub fn energy_upper_bound<T: Real>(
    mesh: &RadialMesh<T>,
    u: &[T],
    lap: &[T],
    params: &SystemParams<T>,
) -> T {
    let one = T::one();
    let (p, q, s) = (params.p, params.q, params.s);
    p / (p + one) * lp_power(mesh, lap, (p + one) / p)
        - params.mu / (s + one) * lp_power(mesh, u, s + one)
        - lp_power(mesh, u, q + one) / (q + one)
}

/// `ξ(r) = 1 - S(s)`, `s = (r - ρ/2)/(ρ/2)`, with the degree-7 smoothstep `S`;
/// returns `(ξ, ξ', ξ'')`.
pub fn cutoff<T: Real>(r: T, rho: T) -> (T, T, T) {
    let half = rho * lit(0.5);
    if r <= half {
        return (T::one(), T::zero(), T::zero());
    }
    if r >= rho {
        return (T::zero(), T::zero(), T::zero());
    }
    let s = (r - half) / half;
    let one = T::one();
    let s2 = s * s;
    let s4 = s2 * s2;
    let smooth = s4 * (lit::<T>(35.0) - lit::<T>(84.0) * s + lit::<T>(70.0) * s2 - lit::<T>(20.0) * s2 * s);
    let d1 = lit::<T>(140.0) * s2 * s * (one - s).powi(3);
    let d2 = lit::<T>(420.0) * s2 * (one - s).powi(2) * (one - lit::<T>(2.0) * s);
    (one - smooth, -d1 / half, -d2 / (half * half))
}

/// `V_δ = U_δ / |U_δ|_{q+1}` with `U_δ = δ^{-N/(q+1)} ξ(r) φ(r/δ)`, sampled with its
/// Laplacian on a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction<T> {
    pub delta: T,
    pub rho: T,
    pub v: Vec<T>,
    pub lap: Vec<T>,
    /// `|U_δ|_{q+1}` before normalization.
    pub u_norm: T,
}

pub fn build_test_function<T: Real>(
    delta: T,
    rho: T,
    gs: &RadialProfile<T>,
    mesh: &RadialMesh<T>,
) -> Result<TestFunction<T>> {
    if !(delta > T::zero() && delta < rho) {
        return Err(Error::Domain(format!("need 0 < delta = {delta} < rho = {rho}")));
    }
    if !(rho < mesh.radius) {
        return Err(Error::Domain(format!(
            "cutoff radius {rho} must lie strictly inside the mesh ball of radius {}",
            mesh.radius
        )));
    }
    if gs.n != mesh.n {
        return Err(Error::Domain(format!("profile dimension {} differs from mesh dimension {}", gs.n, mesh.n)));
    }
    if rho / delta > gs.r_max() {
        return Err(Error::Domain(format!(
            "rho/delta = {} exceeds the ground-state radius {}",
            rho / delta,
            gs.r_max()
        )));
    }
    let core = mesh.count_below(delta);
    if core < MIN_NODES_IN_CORE {
        return Err(Error::Mesh(format!(
            "only {core} nodes inside r < delta = {delta}; at least {MIN_NODES_IN_CORE} needed"
        )));
    }
    let nn = lit::<T>(f64::from(mesh.n));
    let nm1 = nn - T::one();
    let amp = delta.powf(-nn / (gs.q + T::one()));
    let (p, q) = (gs.p, gs.q);
    let rows: Vec<(T, T)> = mesh
        .nodes
        .par_iter()
        .map(|&r| {
            if r >= rho {
                return (T::zero(), T::zero());
            }
            let x = r / delta;
            let [phi, dphi, psi, _] = gs.eval(x).expect("x within profile range");
            let (xi, dxi, d2xi) = cutoff(r, rho);
            let lap_xi = if r == T::zero() { nn * d2xi } else { d2xi + nm1 * dxi / r };
            let lap_phi = -crate::scalar::odd_pow(psi, p);
            let u = amp * xi * phi;
            let lu = amp
                * (xi * lap_phi / (delta * delta)
                    + lit::<T>(2.0) * dxi * dphi / delta
                    + phi * lap_xi);
            (u, lu)
        })
        .collect();
    let u: Vec<T> = rows.iter().map(|r| r.0).collect();
    let u_norm = lp_power(mesh, &u, q + T::one()).powf((q + T::one()).recip());
    Ok(TestFunction {
        delta,
        rho,
        v: u.iter().map(|&x| x / u_norm).collect(),
        lap: rows.iter().map(|r| r.1 / u_norm).collect(),
        u_norm,
    })
}

/// `∫|ΔV|^{(p+1)/p}`.
pub fn laplacian_energy<T: Real>(mesh: &RadialMesh<T>, tf: &TestFunction<T>, p: T) -> T {
    lp_power(mesh, &tf.lap, (p + T::one()) / p)
}

/// The ray `t ↦ I_F(tV)` with its `t`-independent integrals cached.
pub struct Ray<'a, T> {
    mesh: &'a RadialMesh<T>,
    tf: &'a TestFunction<T>,
    params: SystemParams<T>,
    pp: PerturbedPower<T>,
    /// `∫|V|^{s+1}`
    pub ks: T,
    /// `∫|V|^{q+1}`, one up to rounding.
    pub kq: T,
}

/// Integrals along the ray at one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayIntegrals<T> {
    /// `∫ f^{-1}(tΔV) tΔV`
    pub euler: T,
    /// `∫ F̄(tΔV)`
    pub fbar: T,
    /// `∫ |f^{-1}(tΔV)|^{r+1}`
    pub inverse_power: T,
}

impl<'a, T: Real> Ray<'a, T> {
    pub fn new(mesh: &'a RadialMesh<T>, tf: &'a TestFunction<T>, params: &SystemParams<T>) -> Result<Self> {
        let pp = perturbed_power(params)?;
        let one = T::one();
        Ok(Self {
            mesh,
            tf,
            params: *params,
            pp,
            ks: lp_power(mesh, &tf.v, params.s + one),
            kq: lp_power(mesh, &tf.v, params.q + one),
        })
    }

    pub fn integrals(&self, t: T) -> RayIntegrals<T> {
        let r1 = self.params.r + T::one();
        let rows: Vec<(T, T, T)> = self
            .tf
            .lap
            .par_iter()
            .map(|&l| {
                let tau = t * l;
                let z = self.pp.f_inv(tau);
                (z * tau, self.pp.fbar_from_inverse(z), z.abs().powf(r1))
            })
            .collect();
        let w = &self.mesh.weights;
        let mut acc = RayIntegrals { euler: T::zero(), fbar: T::zero(), inverse_power: T::zero() };
        for (wi, row) in w.iter().zip(&rows) {
            acc.euler = acc.euler + *wi * row.0;
            acc.fbar = acc.fbar + *wi * row.1;
            acc.inverse_power = acc.inverse_power + *wi * row.2;
        }
        acc
    }

    /// `I_F(tV)`.
    pub fn energy(&self, t: T) -> T {
        let one = T::one();
        let (s, q, mu) = (self.params.s, self.params.q, self.params.mu);
        self.integrals(t).fbar
            - mu / (s + one) * t.powf(s + one) * self.ks
            - t.powf(q + one) / (q + one) * self.kq
    }

    /// `∫ f^{-1}(tΔV)tΔV - μ t^{s+1}|V|^{s+1}_{s+1} - t^{q+1}`, zero at `t_δ`.
    pub fn stationarity(&self, t: T) -> T {
        self.stationarity_from(t, &self.integrals(t))
    }

    fn stationarity_from(&self, t: T, ints: &RayIntegrals<T>) -> T {
        let one = T::one();
        ints.euler - self.params.mu * t.powf(self.params.s + one) * self.ks - t.powf(self.params.q + one) * self.kq
    }

    /// The stationarity residual at `t` relative to `∫ f^{-1}(tΔV)tΔV`.
    pub fn relative_stationarity(&self, t: T) -> T {
        let ints = self.integrals(t);
        self.stationarity_from(t, &ints).abs() / ints.euler.abs()
    }

    /// Largest root of [`Ray::stationarity`].
    pub fn optimal_t(&self) -> Result<T> {
        let two = lit::<T>(2.0);
        let mut hi = T::one();
        let mut k = 0;
        while self.stationarity(hi) >= T::zero() {
            hi = hi * two;
            k += 1;
            if k > 200 {
                return Err(Error::Convergence("stationarity stays positive along the ray".into()));
            }
        }
        let mut lo = hi / two;
        k = 0;
        while self.stationarity(lo) < T::zero() {
            hi = lo;
            lo = lo / two;
            k += 1;
            if k > 200 {
                return Err(Error::Convergence("stationarity has no positive part on the ray".into()));
            }
        }
        brent(|t| self.stationarity(t), lo, hi, lit::<T>(1e-15) * hi, 200)
    }

    /// `max_{t ≥ 0} I_F(tV)` by golden section on `[t_δ/4, 4t_δ]`.
    pub fn level_direct(&self, t_delta: T) -> (T, T) {
        let four = lit::<T>(4.0);
        golden_max(|t| self.energy(t), t_delta / four, t_delta * four, 200)
    }

    /// The level from the stationarity identity at `t_δ`:
    /// `(2/N)∫f^{-1}(tΔV)tΔV - λ(p-r)/((p+1)(r+1))|f^{-1}(tΔV)|^{r+1}_{r+1} - μ(q-s)/((q+1)(s+1)) t^{s+1}|V|^{s+1}_{s+1}`.
    pub fn level_identity(&self, t_delta: T) -> T {
        let ints = self.integrals(t_delta);
        let one = T::one();
        let SystemParams { n, p, q, r, s, lambda, mu } = self.params;
        let nn = lit::<T>(f64::from(n));
        lit::<T>(2.0) / nn * ints.euler
            - lambda * (p - r) / ((p + one) * (r + one)) * ints.inverse_power
            - mu * (q - s) / ((q + one) * (s + one)) * t_delta.powf(s + one) * self.ks
    }
}

/// `t_δ` for the test function under `params`.
pub fn optimal_t<T: Real>(mesh: &RadialMesh<T>, tf: &TestFunction<T>, params: &SystemParams<T>) -> Result<T> {
    Ray::new(mesh, tf, params)?.optimal_t()
}

/// `(2/N) S^{N/2}` with `S` the norm quotient of [`crate::groundstate::sobolev_constant`].
pub fn mp_threshold<T: Real>(n: u32, sobolev: T) -> T {
    let nn = lit::<T>(f64::from(n));
    lit::<T>(2.0) / nn * sobolev.powf(nn / lit(2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpLevelReport<T> {
    pub delta: T,
    pub t_delta: T,
    /// `max_t I_F(tV)` by direct maximization.
    pub level: T,
    /// The same level through the stationarity identity.
    pub level_identity: T,
    pub threshold: T,
    pub margin: T,
    /// Relative residual of the stationarity equation at `t_δ`.
    pub stationarity_residual: T,
    /// `S^{p/(pq-1)}` with `S = (norm quotient)^{(p+1)/p}`; `t_δ` is expected below it.
    pub t_bound: T,
    /// `∫|ΔV|^{(p+1)/p}`, tending to `(norm quotient)^{(p+1)/p}` as `δ → 0`.
    pub laplacian_energy: T,
}

/// One report per `δ`, ordered by decreasing `δ`.
pub fn mp_level_report<T: Real>(
    params: &SystemParams<T>,
    deltas: &[T],
    rho: T,
    gs: &RadialProfile<T>,
    mesh: &RadialMesh<T>,
    sobolev: T,
) -> Result<Vec<MpLevelReport<T>>> {
    let params = params.validate()?;
    let one = T::one();
    let threshold = mp_threshold(params.n, sobolev);
    let s_energy = sobolev.powf((params.p + one) / params.p);
    let t_bound = s_energy.powf(params.p / (params.p * params.q - one));
    let mut out: Vec<MpLevelReport<T>> = deltas
        .par_iter()
        .map(|&delta| -> Result<MpLevelReport<T>> {
            let tf = build_test_function(delta, rho, gs, mesh)?;
            let ray = Ray::new(mesh, &tf, &params)?;
            let t_delta = ray.optimal_t()?;
            let (_, level) = ray.level_direct(t_delta);
            let level_identity = ray.level_identity(t_delta);
            Ok(MpLevelReport {
                delta,
                t_delta,
                level,
                level_identity,
                threshold,
                margin: threshold - level,
                stationarity_residual: ray.relative_stationarity(t_delta),
                t_bound,
                laplacian_energy: laplacian_energy(mesh, &tf, params.p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.delta.partial_cmp(&a.delta).unwrap());
    Ok(out)
}

/// Exponent `Np/(p+1) - 2 - Nr/(r+1)` with `C_{r,B_R} = R^{exponent} C_{r,B_1}`.
pub fn dilation_exponent<T: Real>(n: u32, r: T, p: T) -> T {
    let nn = lit::<T>(f64::from(n));
    let one = T::one();
    nn * p / (p + one) - lit(2.0) - nn * r / (r + one)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighOptions {
    pub starts: usize,
    pub max_iter: usize,
    /// Stop once the quotient changes by less than this relative amount in one iteration.
    pub tol: f64,
    pub seed: u64,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        Self { starts: 8, max_iter: 5_000, tol: 1e-13, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighResult<T> {
    pub value: T,
    /// Quotient reached from each start, in start order.
    pub per_start: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Minimizing field `u`, normalized to `|u|_{(r+1)/r} = 1`, on the mesh nodes.
    pub minimizer: Vec<T>,
    /// `-Δu` of the minimizer, same normalization.
    pub density: Vec<T>,
}

/// Dense radial Green operator for `-Δu = w`, `u(R) = 0`, with the mesh weights folded in.
/// It is self-adjoint for the weighted inner product of the mesh.
struct Green<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> Green<T> {
    fn new(mesh: &RadialMesh<T>) -> Self {
        let n = mesh.n;
        let nm2 = lit::<T>(f64::from(n - 2));
        let omega = sphere_area::<T>(n);
        let tail = mesh.radius.powf(-nm2);
        let rows = mesh
            .nodes
            .par_iter()
            .map(|&ri| {
                mesh.nodes
                    .iter()
                    .zip(&mesh.weights)
                    .map(|(&sj, &wj)| {
                        if wj == T::zero() {
                            T::zero()
                        } else {
                            (ri.max(sj).powf(-nm2) - tail) / nm2 * wj / omega
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn apply(&self, w: &[T]) -> Vec<T> {
        self.rows.par_iter().map(|row| row.iter().zip(w).map(|(&g, &x)| g * x).sum()).collect()
    }
}

/// `C_{r,B_R} = inf { |Δu|_{(p+1)/p} : u radial, u(R) = 0, |u|_{(r+1)/r} = 1 }`.
///
/// With `w = -Δu` and `u = Gw` the constant is `1 / sup |Gw|_b / |w|_a`, `a = (p+1)/p < b = (r+1)/r`.
/// Each start runs the nonlinear power iteration `w ← J_a^{-1}(G J_b(Gw))` on the unit
/// sphere of `L^a`, with `J_c(x) = |x|^{c-1} sgn x`; for the positive kernel and `a < b`
/// it increases the quotient monotonically to the global maximum.
pub fn rayleigh_constant<T: Real>(
    mesh: &RadialMesh<T>,
    r: T,
    p: T,
    opts: &RayleighOptions,
) -> Result<RayleighResult<T>> {
    if !(r > T::zero() && p > r) {
        return Err(Error::Validation(vec![format!("exponents need 0 < r = {r} < p = {p}")]));
    }
    if opts.starts == 0 {
        return Err(Error::Config("at least one start is required".into()));
    }
    let one = T::one();
    let a = (p + one) / p;
    let b = (r + one) / r;
    let green = Green::new(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<T>> = (0..opts.starts)
        .map(|_| {
            let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.9..0.9)).collect();
            let scale: f64 = rng.gen_range(0.5..2.0);
            mesh.nodes
                .iter()
                .map(|&x| {
                    let y = (x / mesh.radius).to_f64().unwrap_or(0.0);
                    let poly: f64 =
                        coeffs.iter().enumerate().map(|(i, c)| c * y.powi(i as i32) / (i + 1) as f64).sum();
                    lit::<T>(scale * (1.0 + poly).max(0.05))
                })
                .collect()
        })
        .collect();
    let runs: Vec<PowerRun<T>> = starts.into_iter().map(|w0| power_iteration(mesh, &green, w0, a, b, opts)).collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.value.partial_cmp(&y.1.value).unwrap_or(std::cmp::Ordering::Equal))
        .map(|x| x.0)
        .unwrap_or(0);
    let converged = runs.iter().any(|x| x.converged);
    let value = runs[best].value;
    if !converged || !(value > T::zero()) {
        return Err(Error::Convergence(format!(
            "no Rayleigh start converged within {} iterations (best {value})",
            opts.max_iter
        )));
    }
    let u = &runs[best].u;
    let un = lp_power(mesh, u, b).powf(b.recip());
    let w = &runs[best].w;
    Ok(RayleighResult {
        value,
        per_start: runs.iter().map(|x| x.value).collect(),
        iterations: runs.iter().map(|x| x.iterations).sum(),
        converged,
        minimizer: u.iter().map(|&x| x / un).collect(),
        density: w.iter().map(|&x| x / un).collect(),
    })
}

struct PowerRun<T> {
    value: T,
    u: Vec<T>,
    w: Vec<T>,
    iterations: usize,
    converged: bool,
}

fn power_iteration<T: Real>(
    mesh: &RadialMesh<T>,
    green: &Green<T>,
    mut w: Vec<T>,
    a: T,
    b: T,
    opts: &RayleighOptions,
) -> PowerRun<T> {
    let one = T::one();
    let norm = |v: &[T], e: T| lp_power(mesh, v, e).powf(e.recip());
    let duality = |x: T, e: T| x.abs().powf(e - one) * x.signum();
    let normalize = |w: &mut Vec<T>| {
        let s = norm(w, a);
        w.iter_mut().for_each(|x| *x = *x / s);
    };
    normalize(&mut w);
    let mut u = green.apply(&w);
    let mut value = norm(&w, a) / norm(&u, b);
    let tol = lit::<T>(opts.tol);
    for it in 0..opts.max_iter {
        let y = green.apply(&u.iter().map(|&x| duality(x, b)).collect::<Vec<_>>());
        w = y.iter().map(|&x| duality(x, (a - one).recip() + one)).collect();
        normalize(&mut w);
        u = green.apply(&w);
        let next = norm(&w, a) / norm(&u, b);
        let change = (value - next).abs() / next;
        value = next;
        if change <= tol {
            return PowerRun { value, u, w, iterations: it + 1, converged: true };
        }
    }
    PowerRun { value, u, w, iterations: opts.max_iter, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_c3_smoothstep() {
        let rho = 2.0f64;
        assert_eq!(cutoff(0.3, rho), (1.0, 0.0, 0.0));
        assert_eq!(cutoff(2.5, rho), (0.0, 0.0, 0.0));
        let (xi, _, _) = cutoff(1.5, rho);
        assert!((xi - 0.5).abs() < 1e-15);
        // derivatives match finite differences
        for &x in &[1.1, 1.4, 1.8] {
            let h = 1e-5;
            let (_, d1, d2) = cutoff(x, rho);
            let fd1 = (cutoff(x + h, rho).0 - cutoff(x - h, rho).0) / (2.0 * h);
            let fd2 = (cutoff(x + h, rho).1 - cutoff(x - h, rho).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-6);
        }
        // continuity at both ends
        assert!(cutoff(1.0 + 1e-9, rho).0 > 1.0 - 1e-12);
        assert!(cutoff(2.0 - 1e-9, rho).0 < 1e-12);
    }

    #[test]
    fn dilation_exponent_examples() {
        // N = 3, p = 5, r = 1: 15/6 - 2 - 3/2 = -1
        assert!((dilation_exponent(3, 1.0f64, 5.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_formula() {
        assert!((mp_threshold(4, 3.0f64) - 0.5 * 9.0).abs() < 1e-14);
    }
}
