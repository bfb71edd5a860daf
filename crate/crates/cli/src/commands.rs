//! Subcommands. Each returns the tables it produced so callers can inspect
//! them before (or instead of) writing CSV files.

use merton_equilibrium::finite_horizon::{naive_consumption_fraction, solve_fg, stationary_residual};
use merton_equilibrium::infinite_horizon::{enumerate_equilibria, merton_baseline};
use merton_equilibrium::verification::{
    adjoint_identity, ie_quadrature_check, mc_finite_value, mc_infinite_value, mc_power_moments, moment_oracle,
};
use merton_equilibrium::{BaselineRegime, FiniteHorizonError, InfiniteHorizonError, VerificationError};
use thiserror::Error;

use crate::config::{FiniteSettings, RunConfig};
use crate::table::Table;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("this command needs a [finite] section in the config")]
    NeedsFinite,
    #[error(transparent)]
    Finite(#[from] FiniteHorizonError),
    #[error(transparent)]
    Infinite(#[from] InfiniteHorizonError),
    #[error(transparent)]
    Verification(#[from] VerificationError),
}

impl CommandError {
    pub fn is_blow_up(&self) -> bool {
        matches!(
            self,
            CommandError::Finite(FiniteHorizonError::BlowUp { .. })
                | CommandError::Verification(VerificationError::FiniteHorizon(FiniteHorizonError::BlowUp { .. }))
        )
    }
}

fn finite(config: &RunConfig) -> Result<&FiniteSettings, CommandError> {
    config.finite.as_ref().ok_or(CommandError::NeedsFinite)
}

pub fn coeffs(config: &RunConfig) -> Table {
    let c = config.discount.hjb_coefficients();
    let mut t = Table::new(&["alpha1", "alpha2", "beta1", "beta2"]);
    t.push(vec![c.alpha1.into(), c.alpha2.into(), c.beta1.into(), c.beta2.into()]);
    t
}

pub fn solve_finite(config: &RunConfig) -> Result<Table, CommandError> {
    let fs = finite(config)?;
    let sol = solve_fg(
        &config.market,
        &config.preferences,
        &config.discount,
        fs.horizon,
        fs.steps,
    )?;
    let policy = sol.policy(&config.market);
    let mut t = Table::new(&["t", "f", "g", "c_star"]);
    for i in 0..sol.times.len() {
        t.push(vec![
            sol.times[i].into(),
            sol.f[i].into(),
            sol.g[i].into(),
            policy.consumption[i].into(),
        ]);
    }
    Ok(t)
}

pub fn solve_infinite(config: &RunConfig) -> Result<Table, CommandError> {
    let rep = enumerate_equilibria(&config.market, &config.preferences, &config.discount)?;
    let mut t = Table::new(&[
        "z",
        "k",
        "k_tilde",
        "positive",
        "integrable",
        "transversal",
        "merton_transversal",
        "accepted",
    ]);
    for c in &rep.candidates {
        t.push(vec![
            c.z.into(),
            c.k.into(),
            c.k_tilde.into(),
            c.positive.into(),
            c.integrable.into(),
            c.transversal.into(),
            c.merton_transversal.into(),
            c.accepted.into(),
        ]);
    }
    Ok(t)
}

/// Merton baseline at the configured rate (exponential) or at the kernel's
/// dominant rate otherwise.
pub fn baseline(config: &RunConfig) -> Result<Table, CommandError> {
    let delta = config.discount.dominant_rate();
    let b = merton_baseline(&config.market, &config.preferences, delta)?;
    let regime = match b.regime {
        BaselineRegime::EquilibriumIsOptimal => "equilibrium_is_optimal",
        BaselineRegime::EquilibriumOnly => "equilibrium_only",
        BaselineRegime::NoEquilibrium => "no_equilibrium",
    };
    let mut t = Table::new(&[
        "delta",
        "z",
        "k",
        "accepted",
        "weak_transversal",
        "strong_transversal",
        "regime",
    ]);
    t.push(vec![
        delta.into(),
        b.candidate.z.into(),
        b.candidate.k.into(),
        b.candidate.accepted.into(),
        b.weak_transversal.into(),
        b.strong_transversal.into(),
        regime.into(),
    ]);
    Ok(t)
}

pub fn demo_inconsistency(config: &RunConfig) -> Result<Table, CommandError> {
    let fs = finite(config)?;
    let mut t = Table::new(&["t", "s", "c_naive"]);
    for start in fs.demo_times() {
        let curve = naive_consumption_fraction(
            &config.market,
            &config.preferences,
            &config.discount,
            fs.horizon,
            start,
            fs.steps,
        )?;
        for (s, c) in curve.s.iter().zip(&curve.consumption) {
            t.push(vec![start.into(), (*s).into(), (*c).into()]);
        }
    }
    Ok(t)
}

/// Tolerances of the `verify` checks.
pub mod tolerance {
    pub const RESIDUAL: f64 = 1e-9;
    pub const QUADRATURE: f64 = 1e-8;
    pub const STATIONARY: f64 = 1e-10;
    pub const ADJOINT: f64 = 1e-12;
    pub const MC_SIGMAS: f64 = 3.0;
    pub const MOMENT_SIGMAS: f64 = 4.0;
    pub const MOMENT_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
}

/// One `verify` row: `error` is a residual for analytic checks and a standard
/// error for Monte Carlo checks.
struct Check {
    name: String,
    target: f64,
    estimate: f64,
    error: f64,
    pass: bool,
}

fn analytic(name: String, target: f64, estimate: f64, tol: f64) -> Check {
    let error = estimate - target;
    Check {
        name,
        target,
        estimate,
        error,
        pass: error.abs() <= tol,
    }
}

fn failed(name: String, target: f64) -> Check {
    Check {
        name,
        target,
        estimate: f64::NAN,
        error: f64::NAN,
        pass: false,
    }
}

/// Runs every check that applies to the configured case. Returns the table
/// and whether all checks passed.
pub fn verify(config: &RunConfig) -> Result<(Table, bool), CommandError> {
    use tolerance::*;
    let (m, prefs, d, sim) = (&config.market, &config.preferences, &config.discount, &config.simulation);
    let p = prefs.p;
    let x0 = sim.x0;
    let mut checks = Vec::new();

    let rep = enumerate_equilibria(m, prefs, d)?;
    let accepted: Vec<_> = rep.accepted().copied().collect();
    if accepted.is_empty() {
        checks.push(failed("equilibrium_exists".into(), 1.0));
    }
    for (i, c) in accepted.iter().enumerate() {
        let tag = format!("z{}", i + 1);
        let inv_z = c.z.recip();
        let closed = d.exp_weighted_integral(c.k_tilde).value().unwrap_or(f64::NAN);
        checks.push(analytic(format!("fixed_point_{tag}"), inv_z, closed, RESIDUAL));
        checks.push(match ie_quadrature_check(m, prefs, d, c.z) {
            Ok(r) => analytic(format!("ie_quadrature_{tag}"), inv_z, inv_z + r, QUADRATURE),
            Err(_) => failed(format!("ie_quadrature_{tag}"), inv_z),
        });
        let stationary = stationary_residual(m, prefs, d, c.z).unwrap_or(f64::NAN);
        checks.push(analytic(format!("stationary_{tag}"), 0.0, stationary, STATIONARY));
        let adj = adjoint_identity(m, prefs, c.k, x0);
        let scale = m.mu * c.k * x0.powf(p - 1.0);
        checks.push(analytic(format!("adjoint_{tag}"), 0.0, adj, ADJOINT * scale.max(f64::MIN_POSITIVE)));

        let times: Vec<f64> = MOMENT_TIMES.iter().copied().filter(|&t| t <= sim.horizon).collect();
        let moments = mc_power_moments(m, prefs, c.z, sim, &times)?;
        for (t, e) in times.iter().zip(&moments) {
            let target = moment_oracle(m, prefs, c.z, x0, *t);
            checks.push(Check {
                name: format!("moment_{tag}_t{t}"),
                target,
                estimate: e.mean,
                error: e.std_error,
                pass: e.within(target, MOMENT_SIGMAS, 0.0),
            });
        }

        let target = c.k * x0.powf(p) / p;
        checks.push(match mc_infinite_value(m, prefs, d, c.z, sim) {
            Ok(e) => Check {
                name: format!("mc_infinite_{tag}"),
                target,
                estimate: e.mean,
                error: e.std_error,
                pass: e.within(target, MC_SIGMAS, 0.0),
            },
            Err(VerificationError::TailTooLarge { .. }) => failed(format!("mc_infinite_{tag}"), target),
            Err(e) => return Err(e.into()),
        });
    }

    if let Some(fs) = &config.finite {
        let sol = solve_fg(m, prefs, d, fs.horizon, fs.steps)?;
        let last = sol.steps();
        checks.push(Check {
            name: "finite_boundary".into(),
            target: 1.0,
            estimate: sol.f[last],
            error: sol.g[last],
            pass: sol.f[last] == 1.0 && sol.g[last] == 0.0,
        });
        let (v, _) = sol.value_at(0.0, x0)?;
        let cfg = merton_equilibrium::SimConfigF64 {
            n_steps: fs.steps,
            horizon: fs.horizon,
            ..*sim
        };
        let e = mc_finite_value(m, prefs, d, &sol, 0.0, x0, &cfg)?;
        let dt = fs.horizon / fs.steps as f64;
        checks.push(Check {
            name: "mc_finite_t0".into(),
            target: v,
            estimate: e.mean,
            error: e.std_error,
            pass: e.within(v, MC_SIGMAS, 2.0 * dt),
        });
    }

    let all = checks.iter().all(|c| c.pass);
    let mut t = Table::new(&["check", "target", "estimate", "error", "pass"]);
    for c in checks {
        t.push(vec![c.name.into(), c.target.into(), c.estimate.into(), c.error.into(), c.pass.into()]);
    }
    Ok((t, all))
}
