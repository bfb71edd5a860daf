//! Time-consistent (equilibrium) investment and consumption policies for a
//! Merton market when the agent discounts with a non-exponential kernel.
//!
//! The crate covers CRRA utility `U(x) = x^p / p` under three discount
//! families and provides:
//!
//! * [`discounting`]: discount kernels, their impatience rates, the coupling
//!   coefficients of the `(v, w)` equilibrium system and closed-form
//!   exponentially weighted integrals.
//! * [`preferences`]: CRRA utility, inverse marginal utility, Legendre dual,
//!   and market parameters.
//! * [`finite_horizon`]: backward RK4 solve of the `(f, g)` system, the
//!   resulting equilibrium policy and value, and the naive (precommitted)
//!   plan of a time-`t` self.
//! * [`infinite_horizon`]: stationary equilibria as roots of a quadratic,
//!   with integrability and transversality filters.
//! * [`verification`]: exact lognormal Monte Carlo of equilibrium wealth,
//!   moment oracles, quadrature of the integral equation and adjoint checks.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below fix the common double precision instantiation.

pub mod discounting;
pub mod finite_horizon;
pub mod infinite_horizon;
pub mod preferences;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod verification;

pub use discounting::{CoefficientMatrix, DiscountError, DiscountSpec, WeightedIntegral};
pub use finite_horizon::{FgSolution, FiniteEquilibriumPolicy, FiniteHorizonError, NaiveCurve};
pub use infinite_horizon::{
    BaselineRegime, EquilibriumCandidate, EquilibriumReport, MertonBaseline,
    QuadraticCoefficients, InfiniteHorizonError,
};
pub use preferences::{CrraPreferences, MarketError, MarketParams, PreferenceError};
pub use scalar::Scalar;
pub use verification::{McEstimate, SimConfig, VerificationError, WealthPaths};

pub type DiscountSpecF64 = DiscountSpec<f64>;
pub type CoefficientMatrixF64 = CoefficientMatrix<f64>;
pub type MarketParamsF64 = MarketParams<f64>;
pub type CrraPreferencesF64 = CrraPreferences<f64>;
pub type FgSolutionF64 = FgSolution<f64>;
pub type FiniteEquilibriumPolicyF64 = FiniteEquilibriumPolicy<f64>;
pub type NaiveCurveF64 = NaiveCurve<f64>;
pub type QuadraticCoefficientsF64 = QuadraticCoefficients<f64>;
pub type EquilibriumCandidateF64 = EquilibriumCandidate<f64>;
pub type EquilibriumReportF64 = EquilibriumReport<f64>;
pub type MertonBaselineF64 = MertonBaseline<f64>;
pub type SimConfigF64 = SimConfig<f64>;
pub type McEstimateF64 = McEstimate<f64>;
pub type WealthPathsF64 = WealthPaths<f64>;

pub type DiscountSpecF32 = DiscountSpec<f32>;
pub type MarketParamsF32 = MarketParams<f32>;
pub type CrraPreferencesF32 = CrraPreferences<f32>;
pub type FgSolutionF32 = FgSolution<f32>;
pub type EquilibriumReportF32 = EquilibriumReport<f32>;
