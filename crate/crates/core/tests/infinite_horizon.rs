mod common;

use common::{bisect, premium, rel, sign_changes, two_equilibria, type_one_gap, type_two_gap};
use merton_equilibrium::finite_horizon::kappa;
use merton_equilibrium::infinite_horizon::{enumerate_equilibria, quadratic_coefficients, residual};
use merton_equilibrium::{CrraPreferencesF64, DiscountSpecF64, EquilibriumReportF64, MarketParamsF64};
use proptest::prelude::*;

fn prefs(p: f64) -> CrraPreferencesF64 {
    CrraPreferencesF64::new(p, true).unwrap()
}

fn accepted_z(rep: &EquilibriumReportF64) -> Vec<f64> {
    rep.accepted().map(|c| c.z).collect()
}

#[test]
fn two_equilibria_against_bisection() {
    let (r, mu, sigma, p, lambda, rho1, rho2) = two_equilibria(0.01);
    let m = MarketParamsF64::new(r, mu, sigma).unwrap();
    let d = DiscountSpecF64::type_one(lambda, rho1, rho2).unwrap();
    let rep = enumerate_equilibria(&m, &prefs(p), &d).unwrap();
    let z = accepted_z(&rep);
    assert_eq!(z.len(), 2);

    let gap = |z: f64| type_one_gap(r, mu, sigma, p, lambda, rho1, rho2, z);
    let brackets = sign_changes(gap, 1e-4, 1.0, 20_000);
    assert_eq!(brackets.len(), 2, "{brackets:?}");
    for (i, &(lo, hi)) in brackets.iter().enumerate() {
        let oracle = bisect(gap, lo, hi);
        assert!(rel(z[i], oracle) <= 1e-9, "{} vs {}", z[i], oracle);
    }

    let predicted = 0.01 / (p * (1.0 - p)).sqrt();
    for c in rep.accepted() {
        assert!(rel(c.z, predicted) < 0.2);
        assert!(residual(&m, &prefs(p), &d, c.z).unwrap().abs() <= 1e-9);
        // flags from their definitions
        let kt = p * (r + premium(mu, sigma, p) - c.z);
        assert!(rho1 > kt && rho2 > kt);
        for rho in [rho1, rho2] {
            let bound = r + (rho - (2.0 * p - 1.0) * premium(mu, sigma, p)) / (1.0 - p);
            assert!(c.z < bound);
        }
    }
    // B = ε(1-2λ)/p, C = ε²/p for this construction
    let q = quadratic_coefficients(&m, &prefs(p), &d).unwrap();
    assert!(rel(q.b, 0.01 * (1.0 - 2.0 * lambda) / p) < 1e-9);
    assert!(rel(q.c, 1e-4 / p) < 1e-9);
}

#[test]
fn residual_sign_changes_only_at_accepted_roots() {
    let markets = [(0.02, 0.05, 0.25), (0.0, 0.0, 0.2), (0.03, 0.1, 0.3)];
    let ones = [(0.3, 0.2, 0.05), (0.7, 0.1, 0.3), (0.5, 0.15, 0.12)];
    let twos = [(0.02, 0.1), (0.5, 0.3), (1.0, 0.6)];
    for &(r, mu, sigma) in &markets {
        let m = MarketParamsF64::new(r, mu, sigma).unwrap();
        for p in [-1.0, 0.3, 0.5] {
            for &(lambda, rho1, rho2) in &ones {
                let d = DiscountSpecF64::type_one(lambda, rho1, rho2).unwrap();
                let rep = enumerate_equilibria(&m, &prefs(p), &d).unwrap();
                let gap = |z: f64| type_one_gap(r, mu, sigma, p, lambda, rho1, rho2, z);
                check_scan(&rep, gap, &format!("{d:?} p={p}"));
            }
            for &(lambda, rho) in &twos {
                let d = DiscountSpecF64::type_two(lambda, rho).unwrap();
                let rep = enumerate_equilibria(&m, &prefs(p), &d).unwrap();
                let gap = |z: f64| type_two_gap(r, mu, sigma, p, lambda, rho, z);
                check_scan(&rep, gap, &format!("{d:?} p={p}"));
            }
        }
    }
}

/// Every sign change of the fixed-point gap is a positive, integrable
/// candidate; those failing only transversality are fixed points too, but
/// rejected.
fn check_scan(rep: &EquilibriumReportF64, gap: impl Fn(f64) -> f64 + Copy, label: &str) {
    let fixed: Vec<f64> = rep.candidates.iter().filter(|c| c.positive && c.integrable).map(|c| c.z).collect();
    let changes = sign_changes(gap, 1e-3, 1.0, 10_000);
    for &(lo, hi) in &changes {
        let root = bisect(gap, lo, hi);
        assert!(
            fixed.iter().any(|&z| (z - root).abs() <= 1e-6),
            "{label}: sign change at {root} not among {fixed:?}"
        );
    }
    for c in rep.accepted() {
        assert!(gap(c.z).abs() * c.z <= 1e-9, "{label}: z={}", c.z);
        if c.z > 1e-3 {
            assert!(changes.iter().any(|&(lo, hi)| lo <= c.z && c.z <= hi), "{label}: z={}", c.z);
        }
    }
}

#[test]
fn exponential_closed_form() {
    for &(r, mu, sigma) in &[(0.0, 0.0, 0.2), (0.02, 0.05, 0.25), (0.03, 0.1, 0.3)] {
        let m = MarketParamsF64::new(r, mu, sigma).unwrap();
        for p in [-2.0, -0.5, 0.3, 0.5, 0.8] {
            for delta in [0.005, 0.01, 0.05, 0.1, 0.3] {
                let d = DiscountSpecF64::exponential(delta).unwrap();
                let rep = enumerate_equilibria(&m, &prefs(p), &d).unwrap();
                let c = rep.candidates[0];
                let want = (delta - r * p - p * premium(mu, sigma, p)) / (1.0 - p);
                assert!(rel(c.z, want) <= 1e-14);
                assert_eq!(c.accepted, want > 0.0);
                assert_eq!(c.integrable, want > 0.0);
            }
        }
    }
}

#[test]
fn degenerate_type_one_root_set() {
    for &(r, mu, sigma) in &[(0.02, 0.05, 0.25), (0.0, 0.05, 0.3), (0.03, 0.0, 0.2)] {
        let m = MarketParamsF64::new(r, mu, sigma).unwrap();
        for p in [-1.0, 0.3, 0.5] {
            for delta in [0.05, 0.1, 0.3] {
                let shifted = delta - r * p - p * premium(mu, sigma, p);
                let d = DiscountSpecF64::type_one(0.5, delta, delta).unwrap();
                let rep = enumerate_equilibria(&m, &prefs(p), &d).unwrap();
                let mut want = vec![shifted / (1.0 - p), -shifted / p];
                want.sort_by(f64::total_cmp);
                let got: Vec<f64> = rep.candidates.iter().map(|c| c.z).collect();
                assert_eq!(got.len(), 2);
                for (a, b) in got.iter().zip(&want) {
                    assert!(rel(*a, *b) <= 1e-9, "{got:?} vs {want:?}");
                }
                let exp = enumerate_equilibria(&m, &prefs(p), &DiscountSpecF64::exponential(delta).unwrap()).unwrap();
                let two = enumerate_equilibria(&m, &prefs(p), &DiscountSpecF64::type_two(0.0, delta).unwrap()).unwrap();
                let e = accepted_z(&exp);
                for other in [accepted_z(&rep), accepted_z(&two)] {
                    assert_eq!(other.len(), e.len(), "p={p} δ={delta}");
                    for (a, b) in other.iter().zip(&e) {
                        assert!(rel(*a, *b) <= 1e-9);
                    }
                }
                if p > 0.0 && shifted > 0.0 {
                    let artificial = rep.candidates.iter().find(|c| c.z < 0.0).unwrap();
                    assert!(!artificial.positive && !artificial.accepted);
                }
            }
        }
    }
}

#[test]
fn degenerate_root_on_transversality_edge_without_drift() {
    // with r = μ = 0 the exponential root sits exactly on the transversality bound
    let m = MarketParamsF64::new(0.0, 0.0, 0.2).unwrap();
    let d = DiscountSpecF64::type_one(0.5, 0.1, 0.1).unwrap();
    let rep = enumerate_equilibria(&m, &prefs(0.5), &d).unwrap();
    let z: Vec<f64> = rep.candidates.iter().map(|c| c.z).collect();
    assert!((z[0] + 0.2).abs() < 1e-15 && (z[1] - 0.2).abs() < 1e-15);
    assert!(!rep.candidates[0].positive);
    assert!(rep.candidates[1].boundary && !rep.candidates[1].accepted);
}

#[test]
fn continuity_in_rate_gap() {
    let m = MarketParamsF64::new(0.02, 0.05, 0.25).unwrap();
    for p in [-1.0, 0.5] {
        let delta = 0.1;
        let exp_z = accepted_z(&enumerate_equilibria(&m, &prefs(p), &DiscountSpecF64::exponential(delta).unwrap()).unwrap())[0];
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let d = DiscountSpecF64::type_one(0.5, delta + eps, delta - eps).unwrap();
            let z = accepted_z(&enumerate_equilibria(&m, &prefs(p), &d).unwrap());
            let gap = z.iter().map(|z| (z - exp_z).abs()).fold(f64::INFINITY, f64::min);
            assert!(gap < last, "p={p} ε={eps}: {gap} !< {last}");
            last = gap;
        }
        assert!(last < 1e-4);
    }
}

proptest! {
    #[test]
    fn candidates_are_consistent(p in prop_oneof![-3.0f64..-0.1, 0.1f64..0.9], lambda in 0.0f64..=1.0,
                                 rho1 in 0.01f64..0.5, rho2 in 0.01f64..0.5, r in 0.0f64..0.05,
                                 mu in 0.0f64..0.1, sigma in 0.15f64..0.5, two in any::<bool>()) {
        let m = MarketParamsF64::new(r, mu, sigma).unwrap();
        let d = if two {
            DiscountSpecF64::type_two(lambda * 0.3, rho1).unwrap()
        } else {
            DiscountSpecF64::type_one(lambda, rho1, rho2).unwrap()
        };
        let pr = prefs(p);
        let q = quadratic_coefficients(&m, &pr, &d).unwrap();
        prop_assert_eq!(q.a, 1.0 - p);
        let rep = enumerate_equilibria(&m, &pr, &d).unwrap();
        prop_assert!(rep.accepted().count() <= 2);
        let k = kappa(&m, &pr);
        for c in &rep.candidates {
            let scale = (q.a * c.z * c.z).abs().max((q.b * c.z).abs()).max(q.c.abs()).max(1e-30);
            prop_assert!(q.eval(c.z).abs() <= 1e-10 * scale);
            prop_assert!((c.k_tilde - (k - p * c.z)).abs() <= 1e-12 * c.k_tilde.abs().max(k.abs()).max(1e-300));
            prop_assert_eq!(c.accepted, c.positive && c.integrable && c.transversal);
            if c.accepted {
                prop_assert!(residual(&m, &pr, &d, c.z).unwrap().abs() <= 1e-9 / c.z);
            }
        }
    }
}
