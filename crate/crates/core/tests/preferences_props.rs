use merton_equilibrium::CrraPreferencesF64;
use proptest::prelude::*;

const EXPONENTS: [f64; 6] = [-3.0, -1.0, -0.2, 0.3, 0.5, 0.9];

fn log_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / n as f64)).collect()
}

#[test]
fn legendre_derivative_is_minus_inverse_marginal() {
    for p in EXPONENTS {
        let u = CrraPreferencesF64::new(p, true).unwrap();
        for y in log_grid(120) {
            let h = 1e-6 * y;
            let d = (u.legendre(y + h).unwrap() - u.legendre(y - h).unwrap()) / (2.0 * h);
            let i = u.inverse_marginal(y).unwrap();
            assert!((d + i).abs() <= 1e-4 * i, "p={p} y={y}");
        }
    }
}

#[test]
fn envelope_identity() {
    for p in EXPONENTS {
        let u = CrraPreferencesF64::new(p, true).unwrap();
        for y in log_grid(120) {
            let x = u.inverse_marginal(y).unwrap();
            let lhs = u.legendre(y).unwrap();
            let rhs = u.utility(x).unwrap() - y * x;
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs(), "p={p} y={y}");
            assert!((u.marginal(x).unwrap() - y).abs() <= 1e-12 * y);
        }
    }
}

#[test]
fn inada_limits() {
    for p in EXPONENTS {
        let u = CrraPreferencesF64::new(p, true).unwrap();
        let values: Vec<f64> = log_grid(120).into_iter().map(|y| u.inverse_marginal(y).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        // I(10^{∓6}) = 10^{±6/(1-p)}
        let reach = 10f64.powf(6.0 / (1.0 - p));
        assert!((values[0] / reach - 1.0).abs() < 1e-12);
        assert!((values.last().unwrap() * reach - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fenchel_inequality_grid() {
    let grid: Vec<f64> = (0..100).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 99.0)).collect();
    for p in EXPONENTS {
        let u = CrraPreferencesF64::new(p, true).unwrap();
        for &x in &grid {
            for &y in &grid {
                let slack = u.legendre(y).unwrap() - (u.utility(x).unwrap() - x * y);
                let scale = u.legendre(y).unwrap().abs().max(u.utility(x).unwrap().abs()).max(1.0);
                assert!(slack >= -1e-12 * scale, "p={p} x={x} y={y} slack={slack}");
            }
        }
    }
}

proptest! {
    #[test]
    fn utility_increasing_and_concave(p in prop_oneof![-4.0f64..-0.01, 0.01f64..0.99], x in 0.01f64..100.0, h in 0.001f64..1.0) {
        let u = CrraPreferencesF64::new(p, true).unwrap();
        let (a, b, c) = (u.utility(x).unwrap(), u.utility(x + h).unwrap(), u.utility(x + 2.0 * h).unwrap());
        prop_assert!(b > a);
        prop_assert!(b - a >= c - b);
    }
}
