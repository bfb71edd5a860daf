//! Independent checks of equilibrium policies.
//!
//! Under a CRRA equilibrium the investment fraction is the constant
//! `π* = μ/((1-p)σ²)`, so equilibrium wealth is a geometric Brownian motion
//! whenever the consumption fraction is frozen:
//!
//! ```text
//! X(t+Δ) = X(t) exp(aΔ + b√Δ Z),   a = r + (1-2p)μ²/(2(1-p)²σ²) - z,   b = μ/((1-p)σ)
//! ```
//!
//! All simulations step this map exactly.
//!
//! # Random streams
//!
//! Path `i` of a run with master seed `s` draws its normals from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i` (`set_stream(i)`),
//! sampled with `rand_distr::StandardNormal` in `f64`. Paths are therefore
//! independent of how work is scheduled, and per-path results are reduced
//! with a fixed pairwise summation tree, so estimates are bit-identical for
//! any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::discounting::{DiscountError, DiscountSpec};
use crate::finite_horizon::{FgSolution, FiniteHorizonError};
use crate::infinite_horizon::{k_tilde, InfiniteHorizonError};
use crate::preferences::{CrraPreferences, MarketError, MarketParams, PreferenceError};
use crate::quadrature;
use crate::scalar::Scalar;

/// Required bound on the truncated quadrature tail in [`ie_quadrature_check`].
pub const IE_TAIL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("consumption fraction must be finite and non-negative")]
    InvalidFraction,
    #[error("discounted utility integral diverges at this consumption fraction")]
    Divergent,
    #[error("truncation tail {tail:e} exceeds a tenth of the standard error {std_error:e}; raise the horizon")]
    TailTooLarge { tail: f64, std_error: f64 },
    #[error("evaluation time outside [0, T]")]
    InvalidTime,
    #[error("quadrature did not reach the requested accuracy")]
    QuadratureFailed,
    #[error(transparent)]
    FiniteHorizon(#[from] FiniteHorizonError),
    #[error(transparent)]
    InfiniteHorizon(#[from] InfiniteHorizonError),
    #[error(transparent)]
    Discount(#[from] DiscountError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Preference(#[from] PreferenceError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub x0: T,
    pub n_paths: usize,
    pub n_steps: usize,
    /// Simulated horizon `H` (truncation point for infinite-horizon values).
    pub horizon: T,
    pub seed: u64,
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<(), VerificationError> {
        if !(self.x0.is_finite() && self.x0 > T::zero()) {
            return Err(VerificationError::InvalidConfig("x0 must be positive"));
        }
        if self.n_paths == 0 {
            return Err(VerificationError::InvalidConfig("n_paths must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(VerificationError::InvalidConfig("n_steps must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon > T::zero()) {
            return Err(VerificationError::InvalidConfig("horizon must be positive"));
        }
        Ok(())
    }

    pub fn dt(&self) -> T {
        self.horizon / T::count(self.n_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub n_paths: usize,
}

impl<T: Scalar> McEstimate<T> {
    /// Mean and standard error from per-path samples (pairwise sums, two passes).
    pub fn from_samples(samples: &[T]) -> Self {
        let n = samples.len();
        let nf = T::count(n);
        let mean = pairwise_sum(samples) / nf;
        let std_error = if n > 1 {
            let dev: Vec<T> = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (nf - T::one()) / nf).sqrt()
        } else {
            T::zero()
        };
        McEstimate {
            mean,
            std_error,
            n_paths: n,
        }
    }

    /// `|mean - target| ≤ k·std_error + allowance`.
    pub fn within(&self, target: T, k: T, allowance: T) -> bool {
        (self.mean - target).abs() <= k * self.std_error + allowance
    }
}

/// Sum with a fixed binary tree over the slice; the result depends only on
/// the order of `xs`.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::zero(), |s, &x| s + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Runs `job` on a dedicated pool with `workers` threads.
pub fn with_workers<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

/// The normal stream for path `index`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
fn normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Drift `a` of `log X` per unit time under consumption fraction `z`.
pub fn wealth_log_drift<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>, z: T) -> T {
    let p = prefs.p;
    let one = T::one();
    let q = one - p;
    market.r + (one - T::lit(2.0) * p) * market.mu * market.mu
        / (T::lit(2.0) * q * q * market.sigma * market.sigma)
        - z
}

/// Volatility `b` of `log X`.
pub fn wealth_log_volatility<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>) -> T {
    market.mu / ((T::one() - prefs.p) * market.sigma)
}

fn check_inputs<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    z: T,
    config: &SimConfig<T>,
) -> Result<(), VerificationError> {
    market.validate()?;
    prefs.validate()?;
    config.validate()?;
    if !(z.is_finite() && z >= T::zero()) {
        return Err(VerificationError::InvalidFraction);
    }
    Ok(())
}

/// Equilibrium wealth on the uniform grid `0, H/n, …, H`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthPaths<T> {
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: T,
    pub values: Vec<T>,
}

impl<T: Scalar> WealthPaths<T> {
    pub fn path(&self, i: usize) -> &[T] {
        let w = self.n_steps + 1;
        &self.values[i * w..(i + 1) * w]
    }
}

pub fn simulate_wealth<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    z: T,
    config: &SimConfig<T>,
) -> Result<WealthPaths<T>, VerificationError> {
    check_inputs(market, prefs, z, config)?;
    let dt = config.dt();
    let drift = wealth_log_drift(market, prefs, z) * dt;
    let vol = wealth_log_volatility(market, prefs) * dt.sqrt();
    let log_x0 = config.x0.ln();
    let rows: Vec<Vec<T>> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            let mut row = Vec::with_capacity(config.n_steps + 1);
            row.push(config.x0);
            let mut log_x = log_x0;
            for _ in 0..config.n_steps {
                log_x = log_x + drift + vol * normal::<T>(&mut rng);
                row.push(log_x.exp());
            }
            row
        })
        .collect();
    Ok(WealthPaths {
        n_paths: config.n_paths,
        n_steps: config.n_steps,
        dt,
        values: rows.into_iter().flatten().collect(),
    })
}

/// `E[X(t)^p] = x0^p e^{k̃t}` for consumption fraction `z`.
pub fn moment_oracle<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>, z: T, x0: T, t: T) -> T {
    x0.powf(prefs.p) * (k_tilde(market, prefs, z) * t).exp()
}

/// Sample mean of `X(t)^p` at each requested time; times are rounded to the
/// nearest grid node of `config`.
pub fn mc_power_moments<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    z: T,
    config: &SimConfig<T>,
    times: &[T],
) -> Result<Vec<McEstimate<T>>, VerificationError> {
    check_inputs(market, prefs, z, config)?;
    let dt = config.dt();
    let mut nodes = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= T::zero() && t <= config.horizon) {
            return Err(VerificationError::InvalidTime);
        }
        nodes.push((t / dt).round().to_usize().unwrap_or(0).min(config.n_steps));
    }
    let p = prefs.p;
    let drift = wealth_log_drift(market, prefs, z) * dt;
    let vol = wealth_log_volatility(market, prefs) * dt.sqrt();
    let log_x0 = config.x0.ln();
    let last = nodes.iter().copied().max().unwrap_or(0);
    let per_path: Vec<Vec<T>> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            let mut logs = Vec::with_capacity(last + 1);
            let mut log_x = log_x0;
            logs.push(log_x);
            for _ in 0..last {
                log_x = log_x + drift + vol * normal::<T>(&mut rng);
                logs.push(log_x);
            }
            nodes.iter().map(|&j| (p * logs[j]).exp()).collect()
        })
        .collect();
    Ok((0..nodes.len())
        .map(|k| {
            let column: Vec<T> = per_path.iter().map(|row| row[k]).collect();
            McEstimate::from_samples(&column)
        })
        .collect())
}

/// Trapezoid weights on a uniform grid with `n` intervals of width `dt`.
fn trapezoid_weight<T: Scalar>(j: usize, n: usize, dt: T) -> T {
    if j == 0 || j == n {
        T::lit(0.5) * dt
    } else {
        dt
    }
}

/// Expectation of the truncated, trapezoidal estimator used by
/// [`mc_infinite_value`], in closed form. Its distance from `k x0^p/p` is
/// the deterministic bias of the estimator (truncation plus time grid).
pub fn infinite_estimator_expectation<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
    config: &SimConfig<T>,
) -> T {
    let p = prefs.p;
    let kt = k_tilde(market, prefs, z);
    let dt = config.dt();
    let scale = (z * config.x0).powf(p) / p;
    let terms: Vec<T> = (0..=config.n_steps)
        .map(|j| {
            let t = dt * T::count(j);
            trapezoid_weight(j, config.n_steps, dt) * discount.weighted(t, kt)
        })
        .collect();
    scale * pairwise_sum(&terms)
}

/// Analytic bound on the part of `E ∫ h(t)U(zX(t))dt` beyond the horizon.
pub fn infinite_tail_bound<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
    x0: T,
    horizon: T,
) -> Option<T> {
    let p = prefs.p;
    let tail = discount.exp_weighted_tail(k_tilde(market, prefs, z), horizon)?;
    Some(((z * x0).powf(p) / p).abs() * tail)
}

/// Smallest horizon (doubling from 1) whose analytic tail bound is below `tol`.
pub fn horizon_for_tail<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
    x0: T,
    tol: T,
) -> Option<T> {
    let mut h = T::one();
    for _ in 0..64 {
        if infinite_tail_bound(market, prefs, discount, z, x0, h)? < tol {
            return Some(h);
        }
        h = h * T::lit(2.0);
    }
    None
}

/// Monte Carlo estimate of `E ∫₀^∞ h(t) U(z X(t)) dt`, to be compared with
/// `v(x0) = k x0^p/p`.
///
/// The integral is truncated at `config.horizon` and evaluated with the
/// trapezoid rule on the simulation grid. Fails with `TailTooLarge` when the
/// analytic tail beyond the horizon exceeds a tenth of the standard error
/// (plus a rounding floor of a few ulps of the value).
pub fn mc_infinite_value<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
    config: &SimConfig<T>,
) -> Result<McEstimate<T>, VerificationError> {
    check_inputs(market, prefs, z, config)?;
    discount.validate()?;
    let p = prefs.p;
    let kt = k_tilde(market, prefs, z);
    let target_scale = discount
        .exp_weighted_integral(kt)
        .value()
        .ok_or(VerificationError::Divergent)?;

    let n = config.n_steps;
    let dt = config.dt();
    // h(t_j)·w_j·z^p/p, shared by every path
    let zp = z.powf(p) / p;
    let weights: Vec<T> = (0..=n)
        .map(|j| trapezoid_weight(j, n, dt) * discount.eval_unchecked(dt * T::count(j)) * zp)
        .collect();
    let drift = wealth_log_drift(market, prefs, z) * dt;
    let vol = wealth_log_volatility(market, prefs) * dt.sqrt();
    let p_log_x0 = p * config.x0.ln();
    let (p_drift, p_vol) = (p * drift, p * vol);

    let samples: Vec<T> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            // p·log X
            let mut y = p_log_x0;
            let mut acc = weights[0] * y.exp();
            for w in &weights[1..] {
                y = y + p_drift + p_vol * normal::<T>(&mut rng);
                acc = acc + *w * y.exp();
            }
            acc
        })
        .collect();
    let est = McEstimate::from_samples(&samples);

    let tail = infinite_tail_bound(market, prefs, discount, z, config.x0, config.horizon)
        .ok_or(VerificationError::Divergent)?;
    let value = (zp * config.x0.powf(p) * target_scale).abs();
    let allowed = T::lit(0.1) * est.std_error + T::lit(4.0) * T::epsilon() * value;
    if tail > allowed {
        return Err(VerificationError::TailTooLarge {
            tail: tail.to_f64_lossy(),
            std_error: est.std_error.to_f64_lossy(),
        });
    }
    Ok(est)
}

/// Monte Carlo estimate of
/// `E[∫ₜ^T h(s-t)U(c*(s)X(s))ds + h(T-t)Û(X(T))]` with `X(t) = x0`, to be
/// compared with `v(t, x0)` from the same solution.
///
/// Uses `config.n_steps` uniform steps over `[t, T]` (`config.horizon` is not
/// used). The consumption fraction is frozen at its left-node value on each
/// step, which makes every step an exact lognormal update.
pub fn mc_finite_value<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    sol: &FgSolution<T>,
    t: T,
    x0: T,
    config: &SimConfig<T>,
) -> Result<McEstimate<T>, VerificationError> {
    let cfg = SimConfig { x0, ..*config };
    check_inputs(market, prefs, T::zero(), &cfg)?;
    discount.validate()?;
    let horizon = sol.horizon;
    if !(t >= T::zero() && t <= horizon) {
        return Err(VerificationError::InvalidTime);
    }
    let terminal_weight = discount.eval_unchecked(horizon - t);
    if t == horizon {
        return Ok(McEstimate {
            mean: terminal_weight * prefs.terminal_utility(x0)?,
            std_error: T::zero(),
            n_paths: cfg.n_paths,
        });
    }

    let p = prefs.p;
    let n = cfg.n_steps;
    let dt = (horizon - t) / T::count(n);
    let policy = sol.policy(market);
    let mut consumption = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let s = if j == n { horizon } else { t + dt * T::count(j) };
        consumption.push(policy.consumption_at(s).ok_or(VerificationError::InvalidTime)?);
    }
    // h(s_j - t)·w_j·c_j^p/p
    let weights: Vec<T> = (0..=n)
        .map(|j| {
            trapezoid_weight(j, n, dt) * discount.eval_unchecked(dt * T::count(j)) * consumption[j].powf(p) / p
        })
        .collect();
    let base_drift = wealth_log_drift(market, prefs, T::zero());
    let p_drifts: Vec<T> = consumption[..n]
        .iter()
        .map(|&c| p * (base_drift - c) * dt)
        .collect();
    let p_vol = p * wealth_log_volatility(market, prefs) * dt.sqrt();
    let terminal = if prefs.include_terminal {
        terminal_weight / p
    } else {
        T::zero()
    };
    let p_log_x0 = p * x0.ln();

    let samples: Vec<T> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let mut y = p_log_x0;
            let mut acc = weights[0] * y.exp();
            for j in 0..n {
                y = y + p_drifts[j] + p_vol * normal::<T>(&mut rng);
                acc = acc + weights[j + 1] * y.exp();
            }
            acc + terminal * y.exp()
        })
        .collect();
    Ok(McEstimate::from_samples(&samples))
}

/// `μM + σN` at the diagonal for CRRA, with `M = v_x = f x^{p-1}` and
/// `N = σF₁v_xx`, `F₁ = μx/((1-p)σ²)`.
pub fn adjoint_identity<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>, f_t: T, x: T) -> T {
    let p = prefs.p;
    let one = T::one();
    let m = f_t * x.powf(p - one);
    let invest = market.mu * x / ((one - p) * market.sigma * market.sigma);
    let n = market.sigma * invest * f_t * (p - one) * x.powf(p - T::lit(2.0));
    market.mu * m + market.sigma * n
}

/// `∫₀^∞ h(u)e^{k̃u}du - 1/z` with the integral computed by adaptive
/// quadrature on `[0, U]`, `U` chosen so the analytic tail is below
/// [`IE_TAIL_BOUND`].
pub fn ie_quadrature_check<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
) -> Result<T, VerificationError> {
    market.validate()?;
    prefs.validate()?;
    discount.validate()?;
    if !(z > T::zero()) {
        return Err(VerificationError::InvalidFraction);
    }
    let kt = k_tilde(market, prefs, z);
    let tail_goal = T::lit(0.1 * IE_TAIL_BOUND);
    let mut upper = T::one();
    loop {
        let tail = discount
            .exp_weighted_tail(kt, upper)
            .ok_or(VerificationError::Divergent)?;
        if tail < tail_goal {
            break;
        }
        upper = upper * T::lit(2.0);
        if !upper.is_finite() {
            return Err(VerificationError::Divergent);
        }
    }
    let q = quadrature::integrate(
        |u: T| discount.weighted(u, kt),
        T::zero(),
        upper,
        tail_goal,
        T::lit(1e-14),
        20_000,
    );
    if !q.converged && q.abs_error > T::lit(IE_TAIL_BOUND) {
        return Err(VerificationError::QuadratureFailed);
    }
    Ok(q.value - z.recip())
}
