//! Finite-horizon CRRA equilibrium.
//!
//! With `v(t,x) = f(t)x^p/p` and `w(t,x) = g(t)x^p/p` the equilibrium PDE
//! pair reduces to
//!
//! ```text
//! f' + K f + (1-p) f^{p/(p-1)} = α₁ f + β₁ g
//! g' + K g - p g f^{1/(p-1)}   = α₂ f + β₂ g,      f(T) = 1, g(T) = 0
//! ```
//!
//! with `K = rp + pμ²/(2(1-p)σ²)`. The system is integrated backward from `T`
//! with classical RK4 on a uniform grid.

use thiserror::Error;

use crate::discounting::{CoefficientMatrix, DiscountError, DiscountSpec};
use crate::preferences::{CrraPreferences, MarketError, MarketParams, PreferenceError};
use crate::scalar::Scalar;

/// `f` must stay inside `[F_MIN, F_MAX]` or the solve is reported as a blow-up.
pub const F_MIN: f64 = 1e-8;
pub const F_MAX: f64 = 1e8;

pub const MIN_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiniteHorizonError {
    #[error("horizon must be positive and finite")]
    InvalidHorizon,
    #[error("at least {MIN_STEPS} grid steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("planning window [t, T] is empty or starts before 0")]
    InvalidWindow,
    #[error("f left [1e-8, 1e8] at t = {time} (value {value})")]
    BlowUp { time: f64, value: f64 },
    #[error("terminal utility is required for the finite-horizon system")]
    NoTerminalUtility,
    #[error("time {0} outside the solved interval")]
    OutOfRange(f64),
    #[error(transparent)]
    Discount(#[from] DiscountError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Preference(#[from] PreferenceError),
}

/// `K = rp + pμ²/(2(1-p)σ²)`.
pub fn kappa<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>) -> T {
    prefs.p * market.r + prefs.p * market.premium(prefs.p)
}

/// Right-hand side `(f', g')` of the reduced system at state `(f, g)`.
pub fn fg_rhs<T: Scalar>(coeffs: &CoefficientMatrix<T>, kappa: T, p: T, f: T, g: T) -> [T; 2] {
    let one = T::one();
    let df = coeffs.alpha1 * f + coeffs.beta1 * g - kappa * f - (one - p) * f.powf(p / (p - one));
    let dg = coeffs.alpha2 * f + coeffs.beta2 * g - kappa * g + p * g * f.powf((p - one).recip());
    [df, dg]
}

fn rk4_step<T: Scalar, const N: usize>(
    rhs: &impl Fn(T, [T; N]) -> [T; N],
    t: T,
    y: [T; N],
    dt: T,
) -> [T; N] {
    let half = T::lit(0.5);
    let axpy = |y: [T; N], k: [T; N], s: T| {
        let mut out = y;
        for i in 0..N {
            out[i] = y[i] + s * k[i];
        }
        out
    };
    let k1 = rhs(t, y);
    let k2 = rhs(t + half * dt, axpy(y, k1, half * dt));
    let k3 = rhs(t + half * dt, axpy(y, k2, half * dt));
    let k4 = rhs(t + dt, axpy(y, k3, dt));
    let sixth = dt / T::lit(6.0);
    let mut out = y;
    for i in 0..N {
        out[i] = y[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

fn check_bounds<T: Scalar>(time: T, f: T) -> Result<(), FiniteHorizonError> {
    if f.is_finite() && f >= T::lit(F_MIN) && f <= T::lit(F_MAX) {
        Ok(())
    } else {
        Err(FiniteHorizonError::BlowUp {
            time: time.to_f64_lossy(),
            value: f.to_f64_lossy(),
        })
    }
}

/// Node `i` of the uniform grid on `[0, T]` with `steps` intervals.
fn node<T: Scalar>(horizon: T, i: usize, steps: usize) -> T {
    horizon * T::count(i) / T::count(steps)
}

fn validate_inputs<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    horizon: T,
    steps: usize,
) -> Result<(), FiniteHorizonError> {
    market.validate()?;
    prefs.validate()?;
    discount.validate()?;
    if !(horizon.is_finite() && horizon > T::zero()) {
        return Err(FiniteHorizonError::InvalidHorizon);
    }
    if steps < MIN_STEPS {
        return Err(FiniteHorizonError::TooFewSteps(steps));
    }
    if !prefs.include_terminal {
        return Err(FiniteHorizonError::NoTerminalUtility);
    }
    Ok(())
}

/// Grid solution of the `(f, g)` system, times ascending from 0 to `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct FgSolution<T> {
    pub horizon: T,
    pub p: T,
    pub kappa: T,
    pub times: Vec<T>,
    pub f: Vec<T>,
    pub g: Vec<T>,
}

pub fn solve_fg<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    horizon: T,
    steps: usize,
) -> Result<FgSolution<T>, FiniteHorizonError> {
    validate_inputs(market, prefs, discount, horizon, steps)?;
    let p = prefs.p;
    let k = kappa(market, prefs);
    let coeffs = discount.hjb_coefficients();
    let rhs = |_t: T, y: [T; 2]| fg_rhs(&coeffs, k, p, y[0], y[1]);

    let times: Vec<T> = (0..=steps).map(|i| node(horizon, i, steps)).collect();
    let mut f = vec![T::zero(); steps + 1];
    let mut g = vec![T::zero(); steps + 1];
    f[steps] = T::one();
    let mut y = [T::one(), T::zero()];
    for i in (0..steps).rev() {
        let dt = times[i] - times[i + 1];
        y = rk4_step(&rhs, times[i + 1], y, dt);
        check_bounds(times[i], y[0])?;
        f[i] = y[0];
        g[i] = y[1];
    }
    Ok(FgSolution {
        horizon,
        p,
        kappa: k,
        times,
        f,
        g,
    })
}

/// Equilibrium policy `π* = μ/((1-p)σ²)`, `c*(t) = f(t)^{1/(p-1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteEquilibriumPolicy<T> {
    pub investment_fraction: T,
    pub times: Vec<T>,
    pub consumption: Vec<T>,
}

impl<T: Scalar> FiniteEquilibriumPolicy<T> {
    /// Consumption fraction at `t`, linear between nodes.
    pub fn consumption_at(&self, t: T) -> Option<T> {
        interpolate(&self.times, &self.consumption, t)
    }
}

fn interpolate<T: Scalar>(xs: &[T], ys: &[T], x: T) -> Option<T> {
    let (first, last) = (*xs.first()?, *xs.last()?);
    if !(x >= first && x <= last) {
        return None;
    }
    let hi = xs.partition_point(|&v| v < x);
    if hi == 0 {
        return Some(ys[0]);
    }
    if xs[hi] == x {
        return Some(ys[hi]);
    }
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    Some(ys[lo] + w * (ys[hi] - ys[lo]))
}

impl<T: Scalar> FgSolution<T> {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// `(f(t), g(t))`, linear between nodes.
    pub fn interpolate(&self, t: T) -> Result<(T, T), FiniteHorizonError> {
        let out_of_range = || FiniteHorizonError::OutOfRange(t.to_f64_lossy());
        let f = interpolate(&self.times, &self.f, t).ok_or_else(out_of_range)?;
        let g = interpolate(&self.times, &self.g, t).ok_or_else(out_of_range)?;
        Ok((f, g))
    }

    pub fn policy(&self, market: &MarketParams<T>) -> FiniteEquilibriumPolicy<T> {
        let exponent = (self.p - T::one()).recip();
        FiniteEquilibriumPolicy {
            investment_fraction: market.investment_fraction(self.p),
            times: self.times.clone(),
            consumption: self.f.iter().map(|&f| f.powf(exponent)).collect(),
        }
    }

    /// `(v(t,x), w(t,x)) = (f(t), g(t))·x^p/p`.
    pub fn value_at(&self, t: T, x: T) -> Result<(T, T), FiniteHorizonError> {
        if !(x > T::zero()) {
            return Err(PreferenceError::NonPositiveWealth.into());
        }
        let (f, g) = self.interpolate(t)?;
        let u = x.powf(self.p) / self.p;
        Ok((f * u, g * u))
    }
}

/// The plan a time-`t` self would commit to: consumption fraction `c̃_t(s)`
/// on `s ∈ [t, T]`, ascending in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveCurve<T> {
    pub start: T,
    pub s: Vec<T>,
    pub consumption: Vec<T>,
}

impl<T: Scalar> NaiveCurve<T> {
    /// `c̃_t(s)`, linear between nodes; `None` outside `[t, T]`.
    pub fn at(&self, s: T) -> Option<T> {
        interpolate(&self.s, &self.consumption, s)
    }
}

/// Naive (precommitted) consumption plan of the time-`t` self.
///
/// Solves `φ' + Kφ + (h'(s-t)/h(s-t))φ + (1-p)φ^{p/(p-1)} = 0` backward from
/// `φ(T) = 1` and returns `c̃_t(s) = φ(s)^{1/(p-1)}`. The nodes are those of
/// the uniform `steps`-interval grid on `[0, T]` that lie in `(t, T]`, plus
/// `t` itself, so curves for different `t` share their nodes.
pub fn naive_consumption_fraction<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    horizon: T,
    t: T,
    steps: usize,
) -> Result<NaiveCurve<T>, FiniteHorizonError> {
    validate_inputs(market, prefs, discount, horizon, steps)?;
    if !(t >= T::zero() && t < horizon) {
        return Err(FiniteHorizonError::InvalidWindow);
    }
    let p = prefs.p;
    let one = T::one();
    let k = kappa(market, prefs);
    let rhs = |s: T, y: [T; 1]| {
        let rate = discount.impatience_unchecked((s - t).max(T::zero()));
        [(rate - k) * y[0] - (one - p) * y[0].powf(p / (p - one))]
    };

    let mut s_desc = vec![horizon];
    for j in 1..=steps {
        let s = node(horizon, steps - j, steps);
        if s > t {
            s_desc.push(s);
        } else {
            break;
        }
    }
    if *s_desc.last().unwrap_or(&horizon) > t {
        s_desc.push(t);
    }

    let exponent = (p - one).recip();
    let mut phi = [one];
    let mut c_desc = vec![one];
    for w in s_desc.windows(2) {
        phi = rk4_step(&rhs, w[0], phi, w[1] - w[0]);
        check_bounds(w[1], phi[0])?;
        c_desc.push(phi[0].powf(exponent));
    }
    s_desc.reverse();
    c_desc.reverse();
    Ok(NaiveCurve {
        start: t,
        s: s_desc,
        consumption: c_desc,
    })
}

/// Constant `(f, g) = (k, α₂k/(K - pz - β₂))` built from a stationary
/// consumption fraction `z`, with `k = z^{p-1}`. `None` when `K - pz - β₂ = 0`.
pub fn stationary_pair<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
) -> Option<(T, T)> {
    let p = prefs.p;
    let coeffs = discount.hjb_coefficients();
    let k = z.powf(p - T::one());
    let denom = kappa(market, prefs) - p * z - coeffs.beta2;
    if denom == T::zero() {
        return None;
    }
    Some((k, coeffs.alpha2 * k / denom))
}

/// `max(|f'|, |g'|) / k` at the stationary pair; zero for an exact fixed point.
pub fn stationary_residual<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
) -> Option<T> {
    let (f, g) = stationary_pair(market, prefs, discount, z)?;
    let [df, dg] = fg_rhs(
        &discount.hjb_coefficients(),
        kappa(market, prefs),
        prefs.p,
        f,
        g,
    );
    Some(df.abs().max(dg.abs()) / f)
}
