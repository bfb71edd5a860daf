//! CRRA preferences `U(x) = x^p / p` and the market they trade in.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PreferenceError {
    #[error("risk exponent p must satisfy p < 1 and p != 0")]
    InvalidExponent,
    #[error("wealth must be positive")]
    NonPositiveWealth,
    #[error("marginal utility must be positive")]
    NonPositiveMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("volatility sigma must be positive")]
    NonPositiveVolatility,
    #[error("excess return mu must be non-negative")]
    NegativeExcessReturn,
    #[error("riskless rate r must be non-negative")]
    NegativeRate,
}

/// Riskless rate `r`, excess return `μ = α - r` and volatility `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams<T> {
    pub r: T,
    pub mu: T,
    pub sigma: T,
}

impl<T: Scalar> MarketParams<T> {
    pub fn new(r: T, mu: T, sigma: T) -> Result<Self, MarketError> {
        let m = MarketParams { r, mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        if !(self.sigma.is_finite() && self.sigma > T::zero()) {
            return Err(MarketError::NonPositiveVolatility);
        }
        if !(self.mu.is_finite() && self.mu >= T::zero()) {
            return Err(MarketError::NegativeExcessReturn);
        }
        if !(self.r.is_finite() && self.r >= T::zero()) {
            return Err(MarketError::NegativeRate);
        }
        Ok(())
    }

    /// `μ² / (2(1-p)σ²)`, the risk premium term that recurs in every CRRA formula.
    pub fn premium(&self, p: T) -> T {
        self.mu * self.mu / (T::lit(2.0) * (T::one() - p) * self.sigma * self.sigma)
    }

    /// `y = r + μ² / (2(1-p)σ²)`.
    pub fn certainty_growth(&self, p: T) -> T {
        self.r + self.premium(p)
    }

    /// Equilibrium fraction of wealth held in the risky asset, `μ / ((1-p)σ²)`.
    pub fn investment_fraction(&self, p: T) -> T {
        self.mu / ((T::one() - p) * self.sigma * self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrraPreferences<T> {
    pub p: T,
    /// Terminal utility `Û = U` when set, `Û ≡ 0` otherwise.
    pub include_terminal: bool,
}

impl<T: Scalar> CrraPreferences<T> {
    pub fn new(p: T, include_terminal: bool) -> Result<Self, PreferenceError> {
        let prefs = CrraPreferences { p, include_terminal };
        prefs.validate()?;
        Ok(prefs)
    }

    pub fn validate(&self) -> Result<(), PreferenceError> {
        if self.p.is_finite() && self.p < T::one() && self.p != T::zero() {
            Ok(())
        } else {
            Err(PreferenceError::InvalidExponent)
        }
    }

    pub fn utility(&self, x: T) -> Result<T, PreferenceError> {
        if !(x > T::zero()) {
            return Err(PreferenceError::NonPositiveWealth);
        }
        Ok(x.powf(self.p) / self.p)
    }

    /// `U'(x) = x^{p-1}`.
    pub fn marginal(&self, x: T) -> Result<T, PreferenceError> {
        if !(x > T::zero()) {
            return Err(PreferenceError::NonPositiveWealth);
        }
        Ok(x.powf(self.p - T::one()))
    }

    /// `I(y) = y^{1/(p-1)}`, the inverse of `U'`.
    pub fn inverse_marginal(&self, y: T) -> Result<T, PreferenceError> {
        if !(y > T::zero()) {
            return Err(PreferenceError::NonPositiveMarginal);
        }
        Ok(y.powf((self.p - T::one()).recip()))
    }

    /// `Ũ(y) = sup_x [U(x) - xy] = ((1-p)/p) y^{p/(p-1)}`.
    pub fn legendre(&self, y: T) -> Result<T, PreferenceError> {
        if !(y > T::zero()) {
            return Err(PreferenceError::NonPositiveMarginal);
        }
        let p = self.p;
        Ok((T::one() - p) / p * y.powf(p / (p - T::one())))
    }

    /// Terminal utility `Û(x)`.
    pub fn terminal_utility(&self, x: T) -> Result<T, PreferenceError> {
        if self.include_terminal {
            self.utility(x)
        } else if x > T::zero() {
            Ok(T::zero())
        } else {
            Err(PreferenceError::NonPositiveWealth)
        }
    }
}
