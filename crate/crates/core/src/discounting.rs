//! Discount functions: exponential and the two pseudo-exponential families.
//!
//! * exponential: `h(t) = e^{-δt}`
//! * type I: `h(t) = λe^{-ρ₁t} + (1-λ)e^{-ρ₂t}`, `λ ∈ [0, 1]`
//! * type II: `h(t) = (1 + λt)e^{-ρt}`, `λ ≥ 0`
//!
//! Besides evaluation this module provides the coupling coefficients of the
//! `(v, w)` equilibrium system and the closed form of `∫₀^∞ h(u)e^{au} du`.

use thiserror::Error;

use crate::scalar::Scalar;

/// h(t) below this is treated as zero when forming `h'/h`.
pub const ZERO_WEIGHT_TOL: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DiscountError {
    #[error("discount rate must be positive and finite")]
    NonPositiveRate,
    #[error("discount weight lambda out of range")]
    WeightOutOfRange,
    #[error("discount evaluated at negative time")]
    NegativeTime,
    #[error("discount weight is zero, impatience rate undefined")]
    ZeroDiscountWeight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscountSpec<T> {
    Exponential { delta: T },
    TypeI { lambda: T, rho1: T, rho2: T },
    TypeII { lambda: T, rho: T },
}

/// Coupling coefficients `(α₁, α₂, β₁, β₂)` of the equilibrium system
/// `v-eq: ... = α₁v + β₁w`, `w-eq: ... = α₂v + β₂w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientMatrix<T> {
    pub alpha1: T,
    pub alpha2: T,
    pub beta1: T,
    pub beta2: T,
}

/// Outcome of `∫₀^∞ h(u)e^{au} du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightedIntegral<T> {
    Convergent(T),
    /// Some exponential rate of `h` does not exceed `a`.
    Divergent,
}

impl<T: Copy> WeightedIntegral<T> {
    pub fn value(self) -> Option<T> {
        match self {
            WeightedIntegral::Convergent(v) => Some(v),
            WeightedIntegral::Divergent => None,
        }
    }

    pub fn is_convergent(self) -> bool {
        matches!(self, WeightedIntegral::Convergent(_))
    }
}

fn positive_rate<T: Scalar>(x: T) -> Result<(), DiscountError> {
    if x.is_finite() && x > T::zero() {
        Ok(())
    } else {
        Err(DiscountError::NonPositiveRate)
    }
}

impl<T: Scalar> DiscountSpec<T> {
    pub fn exponential(delta: T) -> Result<Self, DiscountError> {
        let spec = DiscountSpec::Exponential { delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn type_one(lambda: T, rho1: T, rho2: T) -> Result<Self, DiscountError> {
        let spec = DiscountSpec::TypeI { lambda, rho1, rho2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn type_two(lambda: T, rho: T) -> Result<Self, DiscountError> {
        let spec = DiscountSpec::TypeII { lambda, rho };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks `h(0) = 1`, `h ≥ 0` and integrability of `h`.
    ///
    /// Rates are checked before weights, so a spec with both problems reports
    /// `NonPositiveRate`.
    pub fn validate(&self) -> Result<(), DiscountError> {
        match *self {
            DiscountSpec::Exponential { delta } => positive_rate(delta),
            DiscountSpec::TypeI { lambda, rho1, rho2 } => {
                positive_rate(rho1)?;
                positive_rate(rho2)?;
                if !(lambda >= T::zero() && lambda <= T::one()) {
                    return Err(DiscountError::WeightOutOfRange);
                }
                Ok(())
            }
            DiscountSpec::TypeII { lambda, rho } => {
                positive_rate(rho)?;
                if !(lambda.is_finite() && lambda >= T::zero()) {
                    return Err(DiscountError::WeightOutOfRange);
                }
                Ok(())
            }
        }
    }

    /// `h(t)`.
    pub fn evaluate(&self, t: T) -> Result<T, DiscountError> {
        if !(t >= T::zero()) {
            return Err(DiscountError::NegativeTime);
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: T) -> T {
        match *self {
            DiscountSpec::Exponential { delta } => (-delta * t).exp(),
            DiscountSpec::TypeI { lambda, rho1, rho2 } => {
                lambda * (-rho1 * t).exp() + (T::one() - lambda) * (-rho2 * t).exp()
            }
            DiscountSpec::TypeII { lambda, rho } => (T::one() + lambda * t) * (-rho * t).exp(),
        }
    }

    /// `h(t)e^{at}`, with the exponentials combined so neither factor
    /// overflows on its own.
    pub fn weighted(&self, t: T, a: T) -> T {
        match *self {
            DiscountSpec::Exponential { delta } => ((a - delta) * t).exp(),
            DiscountSpec::TypeI { lambda, rho1, rho2 } => [(lambda, rho1), (T::one() - lambda, rho2)]
                .into_iter()
                .filter(|&(w, _)| w != T::zero())
                .fold(T::zero(), |acc, (w, rho)| acc + w * ((a - rho) * t).exp()),
            DiscountSpec::TypeII { lambda, rho } => (T::one() + lambda * t) * ((a - rho) * t).exp(),
        }
    }

    /// Rate of impatience `-h'(t)/h(t)`.
    pub fn impatience_rate(&self, t: T) -> Result<T, DiscountError> {
        let h = self.evaluate(t)?;
        if h <= T::lit(ZERO_WEIGHT_TOL) {
            return Err(DiscountError::ZeroDiscountWeight);
        }
        Ok(self.impatience_unchecked(t))
    }

    pub(crate) fn impatience_unchecked(&self, t: T) -> T {
        match *self {
            DiscountSpec::Exponential { delta } => delta,
            DiscountSpec::TypeI { lambda, rho1, rho2 } => {
                // weights rescaled by e^{ρ_min t} so neither term underflows first
                let slow = rho1.min(rho2);
                let w1 = lambda * (-(rho1 - slow) * t).exp();
                let w2 = (T::one() - lambda) * (-(rho2 - slow) * t).exp();
                (w1 * rho1 + w2 * rho2) / (w1 + w2)
            }
            DiscountSpec::TypeII { lambda, rho } => rho - lambda / (T::one() + lambda * t),
        }
    }

    /// The rate that governs `h` at long horizons.
    pub fn dominant_rate(&self) -> T {
        match *self {
            DiscountSpec::Exponential { delta } => delta,
            DiscountSpec::TypeI { lambda, rho1, rho2 } => {
                if lambda == T::one() {
                    rho1
                } else if lambda == T::zero() {
                    rho2
                } else {
                    rho1.min(rho2)
                }
            }
            DiscountSpec::TypeII { rho, .. } => rho,
        }
    }

    pub fn hjb_coefficients(&self) -> CoefficientMatrix<T> {
        let zero = T::zero();
        let one = T::one();
        match *self {
            DiscountSpec::Exponential { delta } => CoefficientMatrix {
                alpha1: delta,
                alpha2: zero,
                beta1: zero,
                beta2: zero,
            },
            DiscountSpec::TypeI { lambda, rho1, rho2 } => CoefficientMatrix {
                alpha1: lambda * rho1 + (one - lambda) * rho2,
                alpha2: rho1 - rho2,
                beta1: lambda * (one - lambda) * (rho1 - rho2),
                beta2: lambda * rho2 + (one - lambda) * rho1,
            },
            DiscountSpec::TypeII { lambda, rho } => CoefficientMatrix {
                alpha1: rho - lambda,
                alpha2: -lambda,
                beta1: lambda,
                beta2: rho + lambda,
            },
        }
    }

    /// `∫₀^∞ h(u)e^{au} du` in closed form.
    ///
    /// Type I terms with zero weight do not constrain convergence.
    pub fn exp_weighted_integral(&self, a: T) -> WeightedIntegral<T> {
        let zero = T::zero();
        let one = T::one();
        match *self {
            DiscountSpec::Exponential { delta } => {
                if delta > a {
                    WeightedIntegral::Convergent(one / (delta - a))
                } else {
                    WeightedIntegral::Divergent
                }
            }
            DiscountSpec::TypeI { lambda, rho1, rho2 } => {
                let mut total = zero;
                for (w, rho) in [(lambda, rho1), (one - lambda, rho2)] {
                    if w == zero {
                        continue;
                    }
                    if rho <= a {
                        return WeightedIntegral::Divergent;
                    }
                    total = total + w / (rho - a);
                }
                WeightedIntegral::Convergent(total)
            }
            DiscountSpec::TypeII { lambda, rho } => {
                if rho > a {
                    let gap = rho - a;
                    WeightedIntegral::Convergent(one / gap + lambda / (gap * gap))
                } else {
                    WeightedIntegral::Divergent
                }
            }
        }
    }

    /// `∫_H^∞ h(u)e^{au} du` in closed form, `None` when divergent.
    pub fn exp_weighted_tail(&self, a: T, from: T) -> Option<T> {
        let zero = T::zero();
        let one = T::one();
        match *self {
            DiscountSpec::Exponential { delta } => {
                (delta > a).then(|| (-(delta - a) * from).exp() / (delta - a))
            }
            DiscountSpec::TypeI { lambda, rho1, rho2 } => {
                let mut total = zero;
                for (w, rho) in [(lambda, rho1), (one - lambda, rho2)] {
                    if w == zero {
                        continue;
                    }
                    if rho <= a {
                        return None;
                    }
                    total = total + w * (-(rho - a) * from).exp() / (rho - a);
                }
                Some(total)
            }
            DiscountSpec::TypeII { lambda, rho } => (rho > a).then(|| {
                let gap = rho - a;
                (-gap * from).exp() * ((one + lambda * from) / gap + lambda / (gap * gap))
            }),
        }
    }
}
