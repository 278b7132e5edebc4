//! Dormand–Prince 5(4) integrator with continuous output, for fixed-size states.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<T>,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Options<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-10),
            atol: lit(1e-10),
            h0: None,
            h_max: T::infinity(),
            max_steps: 200_000,
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step<T, const D: usize> {
    pub t0: T,
    pub t1: T,
    pub y0: [T; D],
    pub y1: [T; D],
    pub dy1: [T; D],
    cont: [[T; D]; 5],
}

impl<T: Real, const D: usize> Step<T, D> {
    /// Fourth-order interpolant at `t` in `[t0, t1]`.
    pub fn at(&self, t: T) -> [T; D] {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let th1 = T::one() - th;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
        })
    }
}

/// Returned by the step observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control<T> {
    Continue,
    /// Stop at the given time inside the last step.
    StopAt(T),
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<T, const D: usize> {
    pub t: T,
    pub y: [T; D],
    pub steps: usize,
    pub rejected: usize,
    pub stopped: bool,
}

fn axpy<T: Real, const D: usize>(y: &[T; D], h: T, terms: &[(f64, &[T; D])]) -> [T; D] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + lit::<T>(*c) * k[i];
        }
        y[i] + h * acc
    })
}

fn error_norm<T: Real, const D: usize>(
    y0: &[T; D],
    y1: &[T; D],
    err: &[T; D],
    rtol: T,
    atol: T,
) -> T {
    let mut s = T::zero();
    for i in 0..D {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        s = s + (err[i] / sc).powi(2);
    }
    (s / lit(D as f64)).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `observer` sees every accepted step and may stop the integration inside it.
pub fn integrate<T, const D: usize, F, O>(
    mut rhs: F,
    t0: T,
    y0: [T; D],
    t_end: T,
    opts: &Options<T>,
    mut observer: O,
) -> Result<Outcome<T, D>>
where
    T: Real,
    F: FnMut(T, &[T; D]) -> [T; D],
    O: FnMut(&Step<T, D>) -> Control<T>,
{
    let dir = if t_end >= t0 { T::one() } else { -T::one() };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = match opts.h0 {
        Some(h) => h.abs().min(span),
        None => initial_step(&mut rhs, t, &y, &k1, dir, opts).min(span),
    };
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;
    let safety = lit::<T>(0.9);
    let fac_min = lit::<T>(0.2);
    let fac_max = lit::<T>(10.0);
    loop {
        if (t_end - t) * dir <= T::zero() {
            return Ok(Outcome { t, y, steps, rejected, stopped: false });
        }
        if steps + rejected >= opts.max_steps {
            return Err(Error::Integrator(format!(
                "step budget {} exhausted at t = {t}",
                opts.max_steps
            )));
        }
        h = h.min(opts.h_max);
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= lit::<T>(16.0) * T::epsilon() * t.abs().max(T::min_positive_value()) {
            return Err(Error::Integrator(format!("step size collapsed to {h} at t = {t}")));
        }
        let hs = h * dir;
        let k2 = rhs(t + hs * lit(C2), &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(t + hs * lit(C3), &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + hs * lit(C4), &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + hs * lit(C5),
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let t1 = if last { t_end } else { t + hs };
        let k6 = rhs(
            t1,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t1, &y1);
        let est: [T; D] = std::array::from_fn(|i| {
            hs * (lit::<T>(E1) * k1[i]
                + lit::<T>(E3) * k3[i]
                + lit::<T>(E4) * k4[i]
                + lit::<T>(E5) * k5[i]
                + lit::<T>(E6) * k6[i]
                + lit::<T>(E7) * k7[i])
        });
        let err = error_norm(&y, &y1, &est, opts.rtol, opts.atol);
        if !err.is_finite() {
            rejected += 1;
            last_rejected = true;
            h = h * fac_min;
            continue;
        }
        if err <= T::one() {
            steps += 1;
            let dense5: [T; D] = std::array::from_fn(|i| {
                hs * (lit::<T>(D1) * k1[i]
                    + lit::<T>(D3) * k3[i]
                    + lit::<T>(D4) * k4[i]
                    + lit::<T>(D5) * k5[i]
                    + lit::<T>(D6) * k6[i]
                    + lit::<T>(D7) * k7[i])
            });
            let dy: [T; D] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [T; D] = std::array::from_fn(|i| hs * k1[i] - dy[i]);
            let c4: [T; D] = std::array::from_fn(|i| dy[i] - hs * k7[i] - bspl[i]);
            let step = Step { t0: t, t1, y0: y, y1, dy1: k7, cont: [y, dy, bspl, c4, dense5] };
            if let Control::StopAt(ts) = observer(&step) {
                let y_stop = if ts == t1 { y1 } else { step.at(ts) };
                return Ok(Outcome { t: ts, y: y_stop, steps, rejected, stopped: true });
            }
            t = t1;
            y = y1;
            k1 = k7;
            let mut fac = safety * err.max(lit(1e-10)).powf(lit(-0.2));
            fac = fac.min(if last_rejected { T::one() } else { fac_max }).max(fac_min);
            h = h * fac;
            last_rejected = false;
        } else {
            rejected += 1;
            last_rejected = true;
            h = h * (safety * err.powf(lit(-0.2))).max(fac_min);
        }
    }
}

fn initial_step<T, const D: usize, F>(
    rhs: &mut F,
    t: T,
    y: &[T; D],
    f0: &[T; D],
    dir: T,
    opts: &Options<T>,
) -> T
where
    T: Real,
    F: FnMut(T, &[T; D]) -> [T; D],
{
    let sc: [T; D] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs());
    let norm = |v: &[T; D]| {
        let s: T = (0..D).map(|i| (v[i] / sc[i]).powi(2)).sum();
        (s / lit(D as f64)).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < lit(1e-5) || d1 < lit(1e-5) { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
    let y1: [T; D] = std::array::from_fn(|i| y[i] + dir * h0 * f0[i]);
    let f1 = rhs(t + dir * h0, &y1);
    let diff: [T; D] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= lit(1e-15) {
        (h0 * lit(1e-3)).max(lit(1e-6))
    } else {
        (lit::<T>(0.01) / d1.max(d2)).powf(lit(0.2))
    };
    (h0 * lit(100.0)).min(h1).min(opts.h_max)
}
