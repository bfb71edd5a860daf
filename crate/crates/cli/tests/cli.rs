use std::path::{Path, PathBuf};
use std::process::Command;

use merton_cli::config::{default_simulation, FiniteSettings};
use merton_cli::{parse_config, RunConfig};
use merton_equilibrium::{CrraPreferencesF64, DiscountSpecF64, MarketParamsF64, SimConfigF64};
use proptest::prelude::*;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_merton-eq"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove(merton_cli::WORKERS_ENV)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap())
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("case.ini");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_infinite_two_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_equilibria.ini");
    let (code, stdout) = run(&["solve-infinite", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("infinite.csv")).unwrap();
    assert_eq!(csv, stdout);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "z,k,k_tilde,positive,integrable,transversal,merton_transversal,accepted"
    );
    assert_eq!(lines.filter(|l| l.ends_with(",true")).count(), 2);
}

#[test]
fn solve_finite_ends_on_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("exponential.ini");
    let (code, _) = run(&["solve-finite", "-c", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("finite.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,f,g,c_star");
    assert_eq!(csv.lines().count(), 202);
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last, vec![1.0, 1.0, 0.0, 1.0]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let exp = configs().join("exponential.ini");
    let exp = exp.to_str().unwrap();
    // validation error
    assert_eq!(run(&["coeffs", "-c", exp, "--set", "market.sigma=0"], dir.path()).0, 1);
    // parse error
    assert_eq!(run(&["coeffs", "-c", exp, "--set", "discount.kind=type3"], dir.path()).0, 1);
    assert_eq!(run(&["coeffs", "-c", "/nonexistent.ini"], dir.path()).0, 1);
    // blow-up: K = 50 drives f past its bound
    let blow = ["solve-finite", "-c", exp, "--set", "market.r=100", "--set", "market.mu=0"];
    assert_eq!(run(&blow, dir.path()).0, 3);
    // failing verification: too few paths for the tail requirement is reported, not fatal
    let failing = ["verify", "-c", exp, "--set", "simulation.horizon=5", "--set", "simulation.n_steps=50",
                   "--set", "simulation.n_paths=1000"];
    let (code, stdout) = run(&failing, dir.path());
    assert_eq!(code, 2);
    assert!(stdout.lines().any(|l| l.starts_with("mc_infinite_z1,") && l.ends_with(",false")));
}

#[test]
fn demo_uses_default_times() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("time_inconsistency.ini"))
        .unwrap()
        .replace("demo_times = 0, 0.5, 1\n", "");
    let cfg = write_config(dir.path(), &text);
    let (code, stdout) = run(&["demo-inconsistency", "-c", &cfg], dir.path());
    assert_eq!(code, 0);
    let starts: std::collections::BTreeSet<String> =
        stdout.lines().skip(1).map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(starts.into_iter().collect::<Vec<_>>(), vec!["0.0", "0.5", "1.0"]);
}

#[test]
fn output_is_stable_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("exponential.ini");
    let cfg = cfg.to_str().unwrap();
    let small = ["--set", "simulation.n_paths=4000"];
    let mut outputs = Vec::new();
    for workers in ["1", "3", "1"] {
        let mut args = vec!["verify", "-c", cfg, "--workers", workers];
        args.extend(small);
        outputs.push(run(&args, dir.path()).1);
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

fn market() -> impl Strategy<Value = MarketParamsF64> {
    (0.0f64..0.2, 0.0f64..0.3, 0.01f64..1.0).prop_map(|(r, mu, sigma)| MarketParamsF64 { r, mu, sigma })
}

fn discount() -> impl Strategy<Value = DiscountSpecF64> {
    prop_oneof![
        (1e-4f64..2.0).prop_map(|delta| DiscountSpecF64::Exponential { delta }),
        (0.0f64..=1.0, 1e-4f64..2.0, 1e-4f64..2.0).prop_map(|(lambda, rho1, rho2)| DiscountSpecF64::TypeI {
            lambda,
            rho1,
            rho2
        }),
        (0.0f64..5.0, 1e-4f64..2.0).prop_map(|(lambda, rho)| DiscountSpecF64::TypeII { lambda, rho }),
    ]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        market(),
        prop_oneof![-5.0f64..-0.01, 0.01f64..0.99],
        any::<bool>(),
        discount(),
        proptest::option::of((0.01f64..10.0, 10usize..5000, proptest::option::of(proptest::collection::vec(0.0f64..0.999, 1..4)))),
        (0.01f64..100.0, 1usize..1_000_000, 1usize..10_000, 0.01f64..1e4, any::<u64>()),
        "[a-z][a-z0-9_/]{0,12}",
    )
        .prop_map(|(market, p, terminal, discount, finite, sim, dir)| RunConfig {
            market,
            preferences: CrraPreferencesF64 {
                p,
                include_terminal: terminal,
            },
            discount,
            finite: finite.map(|(horizon, steps, times)| FiniteSettings {
                horizon,
                steps,
                demo_times: times.map(|ts| ts.into_iter().map(|t| t * horizon).collect()),
            }),
            simulation: SimConfigF64 {
                x0: sim.0,
                n_paths: sim.1,
                n_steps: sim.2,
                horizon: sim.3,
                seed: sim.4,
            },
            output_dir: PathBuf::from(dir),
        })
}

proptest! {
    #[test]
    fn config_round_trips(c in run_config()) {
        let text = c.to_ini();
        prop_assert_eq!(parse_config(&text).unwrap(), c);
    }
}

#[test]
fn defaults_are_serialized() {
    let c = parse_config("[market]\nr=0\nmu=0\nsigma=0.2\n[preferences]\np=0.5\n[discount]\nkind=exponential\ndelta=0.1").unwrap();
    assert_eq!(c.simulation, default_simulation());
    assert_eq!(parse_config(&c.to_ini()).unwrap(), c);
}
