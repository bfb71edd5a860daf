//! Stationary (infinite-horizon) CRRA equilibria.
//!
//! Looking for `v(x) = k x^p/p` turns the integral equation into
//! `1/z = ∫₀^∞ h(u)e^{k̃u} du` for the consumption fraction `z = k^{1/(p-1)}`,
//! with `k̃ = p(r + μ²/(2(1-p)σ²) - z)`. For exponential discounting this has
//! a closed form; for type I and type II kernels it is equivalent to the
//! quadratic `(1-p)z² + Bz + C = 0`, whose real roots are screened for
//! positivity, integrability (`ρ > k̃`) and transversality.

use thiserror::Error;

use crate::discounting::{DiscountError, DiscountSpec, WeightedIntegral};
use crate::preferences::{CrraPreferences, MarketError, MarketParams, PreferenceError};
use crate::roots::real_quadratic_roots;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InfiniteHorizonError {
    #[error("exponential discounting has a closed form, not a quadratic")]
    WrongDiscountKind,
    #[error("consumption fraction must be positive")]
    NonPositiveFraction,
    #[error("discounted utility integral diverges at this consumption fraction")]
    Divergent,
    #[error(transparent)]
    Discount(#[from] DiscountError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Preference(#[from] PreferenceError),
}

/// `Q(z) = A z² + B z + C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> QuadraticCoefficients<T> {
    pub fn eval(&self, z: T) -> T {
        crate::roots::eval_quadratic(self.a, self.b, self.c, z)
    }

    pub fn roots(&self) -> Vec<T> {
        real_quadratic_roots(self.a, self.b, self.c)
    }
}

/// One real root of the stationarity equation with all admissibility flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCandidate<T> {
    /// Consumption fraction.
    pub z: T,
    /// Value coefficient `k = z^{p-1}` (NaN for `z ≤ 0`).
    pub k: T,
    pub k_tilde: T,
    pub positive: bool,
    pub integrable: bool,
    pub transversal: bool,
    /// Merton's stronger condition at the dominant rate; informational.
    pub merton_transversal: bool,
    /// Some rejecting inequality holds with equality up to rounding.
    pub boundary: bool,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineRegime {
    /// Both conditions hold: the equilibrium is also the optimal policy.
    EquilibriumIsOptimal,
    /// Equilibrium exists but optimality cannot be verified.
    EquilibriumOnly,
    NoEquilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertonBaseline<T> {
    pub delta: T,
    pub candidate: EquilibriumCandidate<T>,
    /// `δ > (p∨0)[μ²/(2(1-p)σ²) + r]`
    pub weak_transversal: bool,
    /// `δ > (p∨0)[(2-p)μ²/(2(1-p)σ²) + r]`
    pub strong_transversal: bool,
    pub regime: BaselineRegime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<T> {
    pub discount: DiscountSpec<T>,
    /// Every real root, accepted or not, in ascending `z`.
    pub candidates: Vec<EquilibriumCandidate<T>>,
    /// Present for exponential discounting.
    pub baseline: Option<MertonBaseline<T>>,
}

impl<T: Scalar> EquilibriumReport<T> {
    pub fn accepted(&self) -> impl Iterator<Item = &EquilibriumCandidate<T>> {
        self.candidates.iter().filter(|c| c.accepted)
    }
}

fn validate<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
) -> Result<(), InfiniteHorizonError> {
    market.validate()?;
    prefs.validate()?;
    discount.validate()?;
    Ok(())
}

/// Equal up to a few ulps; such inequalities count as boundary cases and fail.
fn on_edge<T: Scalar>(lhs: T, rhs: T) -> bool {
    (lhs - rhs).abs() <= T::lit(64.0) * T::epsilon() * lhs.abs().max(rhs.abs())
}

/// `(z < bound strictly and not on the edge, on the edge)`.
fn below_bound<T: Scalar>(z: T, bound: T) -> (bool, bool) {
    let edge = on_edge(z, bound);
    (z < bound && !edge, edge)
}

/// `k̃ = p(r + μ²/(2(1-p)σ²) - z)`.
pub fn k_tilde<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>, z: T) -> T {
    prefs.p * (market.certainty_growth(prefs.p) - z)
}

/// Coefficients of the type I / type II stationarity quadratic.
pub fn quadratic_coefficients<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
) -> Result<QuadraticCoefficients<T>, InfiniteHorizonError> {
    validate(market, prefs, discount)?;
    let p = prefs.p;
    let one = T::one();
    let two = T::lit(2.0);
    let y = market.certainty_growth(p);
    let premium = market.premium(p);
    // ρ - rp - pμ²/(2(1-p)σ²)
    let shifted = |rho: T| rho - market.r * p - p * premium;
    let a = one - p;
    match *discount {
        DiscountSpec::Exponential { .. } => Err(InfiniteHorizonError::WrongDiscountKind),
        DiscountSpec::TypeI { lambda, rho1, rho2 } => Ok(QuadraticCoefficients {
            a,
            b: (two * p - one) * y + (lambda * rho2 + (one - lambda) * rho1) / p - (rho1 + rho2),
            c: -shifted(rho1) * shifted(rho2) / p,
        }),
        DiscountSpec::TypeII { lambda, rho } => Ok(QuadraticCoefficients {
            a,
            b: (two * p - one) * y + rho * (one - two * p) / p + lambda / p,
            c: -shifted(rho) * shifted(rho) / p,
        }),
    }
}

/// Upper bound on `z` from the transversality condition at rate `rho`:
/// `r + [ρ - (2p-1)μ²/(2(1-p)σ²)]/(1-p)`.
pub fn transversality_bound<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>, rho: T) -> T {
    let p = prefs.p;
    let one = T::one();
    market.r + (rho - (T::lit(2.0) * p - one) * market.premium(p)) / (one - p)
}

/// Merton's condition `δ > (p∨0)[(2-p)μ²/(2(1-p)σ²) + r]` and its threshold.
fn strong_threshold<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>) -> T {
    let p = prefs.p;
    p.max(T::zero()) * ((T::lit(2.0) - p) * market.premium(p) + market.r)
}

fn weak_threshold<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>) -> T {
    let p = prefs.p;
    p.max(T::zero()) * (market.premium(p) + market.r)
}

fn candidate<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
) -> EquilibriumCandidate<T> {
    let p = prefs.p;
    let zero = T::zero();
    let kt = k_tilde(market, prefs, z);
    let positive = z > zero;
    let mut boundary = !positive && z == zero;

    let rates: Vec<T> = match *discount {
        DiscountSpec::Exponential { delta } => vec![delta],
        DiscountSpec::TypeI { lambda, rho1, rho2 } => [(lambda, rho1), (T::one() - lambda, rho2)]
            .into_iter()
            .filter(|&(w, _)| w != zero)
            .map(|(_, rho)| rho)
            .collect(),
        DiscountSpec::TypeII { rho, .. } => vec![rho],
    };
    let integrability_edge = rates.iter().any(|&rho| on_edge(rho, kt));
    boundary |= integrability_edge;
    let integrable = discount.exp_weighted_integral(kt).is_convergent() && !integrability_edge;

    let transversal = match *discount {
        // the adjoint vanishes at infinity without further conditions
        DiscountSpec::Exponential { .. } => true,
        DiscountSpec::TypeI { rho1, rho2, .. } => [rho1, rho2].into_iter().fold(true, |all, rho| {
            let (ok, edge) = below_bound(z, transversality_bound(market, prefs, rho));
            boundary |= edge;
            all && ok
        }),
        DiscountSpec::TypeII { rho, .. } => {
            let (ok, edge) = below_bound(z, transversality_bound(market, prefs, rho));
            boundary |= edge;
            ok
        }
    };
    let merton_transversal = discount.dominant_rate() > strong_threshold(market, prefs);

    EquilibriumCandidate {
        z,
        k: if positive { z.powf(p - T::one()) } else { T::nan() },
        k_tilde: kt,
        positive,
        integrable,
        transversal,
        merton_transversal,
        boundary,
        accepted: positive && integrable && transversal,
    }
}

/// Closed-form exponential consumption fraction `(δ - rp - pμ²/(2(1-p)σ²))/(1-p)`.
pub fn exponential_fraction<T: Scalar>(market: &MarketParams<T>, prefs: &CrraPreferences<T>, delta: T) -> T {
    let p = prefs.p;
    (delta - market.r * p - p * market.premium(p)) / (T::one() - p)
}

pub fn merton_baseline<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    delta: T,
) -> Result<MertonBaseline<T>, InfiniteHorizonError> {
    let discount = DiscountSpec::exponential(delta)?;
    validate(market, prefs, &discount)?;
    let cand = candidate(market, prefs, &discount, exponential_fraction(market, prefs, delta));
    let weak = delta > weak_threshold(market, prefs);
    let strong = delta > strong_threshold(market, prefs);
    let regime = match (weak, strong) {
        (true, true) => BaselineRegime::EquilibriumIsOptimal,
        (true, false) => BaselineRegime::EquilibriumOnly,
        _ => BaselineRegime::NoEquilibrium,
    };
    Ok(MertonBaseline {
        delta,
        candidate: cand,
        weak_transversal: weak,
        strong_transversal: strong,
        regime,
    })
}

pub fn enumerate_equilibria<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
) -> Result<EquilibriumReport<T>, InfiniteHorizonError> {
    validate(market, prefs, discount)?;
    if let DiscountSpec::Exponential { delta } = *discount {
        let baseline = merton_baseline(market, prefs, delta)?;
        return Ok(EquilibriumReport {
            discount: *discount,
            candidates: vec![baseline.candidate],
            baseline: Some(baseline),
        });
    }
    let quad = quadratic_coefficients(market, prefs, discount)?;
    let candidates = quad
        .roots()
        .into_iter()
        .map(|z| candidate(market, prefs, discount, z))
        .collect();
    Ok(EquilibriumReport {
        discount: *discount,
        candidates,
        baseline: None,
    })
}

/// `1/z - ∫₀^∞ h(u)e^{k̃(z)u} du`, zero exactly at stationary equilibria.
pub fn residual<T: Scalar>(
    market: &MarketParams<T>,
    prefs: &CrraPreferences<T>,
    discount: &DiscountSpec<T>,
    z: T,
) -> Result<T, InfiniteHorizonError> {
    validate(market, prefs, discount)?;
    if !(z > T::zero()) {
        return Err(InfiniteHorizonError::NonPositiveFraction);
    }
    match discount.exp_weighted_integral(k_tilde(market, prefs, z)) {
        WeightedIntegral::Convergent(v) => Ok(z.recip() - v),
        WeightedIntegral::Divergent => Err(InfiniteHorizonError::Divergent),
    }
}
