use nested_h2::ensemble::fixture_r;
use nested_h2::exec::Exec;
use nested_h2::linalg::Tolerances;
use nested_h2::synthesis::optimal_controller;
use nested_h2::validation::hat_pair;
use nested_h2::validation::montecarlo::{zeta_error_covariance, MonteCarloConfig, DEFAULT_SEED};

const REL_TOL: f64 = 0.05;

fn run(cfg: &MonteCarloConfig) -> f64 {
    let plant = fixture_r();
    let synth = optimal_controller(&plant, &Tolerances::default()).unwrap();
    let hats = hat_pair(&plant, &synth).unwrap();
    let r = zeta_error_covariance(&plant, &synth, &hats.y_hat, cfg).unwrap();
    println!(
        "{} paths, {} samples: relative error {:.3e}",
        cfg.paths, r.samples, r.rel_error
    );
    r.rel_error
}

#[test]
fn zeta_error_covariance_matches_y_hat() {
    assert!(run(&MonteCarloConfig::reduced(DEFAULT_SEED)) <= REL_TOL);
}

#[test]
fn result_does_not_depend_on_scheduling() {
    let plant = fixture_r();
    let synth = optimal_controller(&plant, &Tolerances::default()).unwrap();
    let hats = hat_pair(&plant, &synth).unwrap();
    let base = MonteCarloConfig {
        horizon: 5.0,
        burn_in: 1.0,
        paths: 6,
        ..MonteCarloConfig::reduced(3)
    };
    let par = zeta_error_covariance(
        &plant,
        &synth,
        &hats.y_hat,
        &MonteCarloConfig {
            exec: Exec::Parallel,
            ..base
        },
    )
    .unwrap();
    let seq = zeta_error_covariance(
        &plant,
        &synth,
        &hats.y_hat,
        &MonteCarloConfig {
            exec: Exec::Sequential,
            ..base
        },
    )
    .unwrap();
    assert_eq!(par, seq);
}

#[test]
#[ignore = "ten thousand paths; run with --ignored"]
fn full_monte_carlo() {
    assert!(run(&MonteCarloConfig::full(DEFAULT_SEED)) <= REL_TOL);
}
