//! `nested-h2 check|synthesize|analyze|verify <plant.json>`
//!
//! Exit codes: 0 pass, 1 assumption or stabilizability failure, 2 numerical
//! or verification failure, 3 input error.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nested_h2::linalg::Tolerances;
use nested_h2::stabilization::{exists_centralized_stabilizing, exists_triangular_stabilizing};
use nested_h2::synthesis::{
    build_phi_psi_system, centralized_h2, closed_loop_norm, optimal_controller, Realization,
    SynthesisResult,
};
use nested_h2::sysmodel::plant_file::{matrix_to_json, plant_from_json};
use nested_h2::sysmodel::TwoPlayerPlant;
use nested_h2::validation::montecarlo::{zeta_error_covariance, MonteCarloConfig};
use nested_h2::validation::{
    closed_loop_gramian, delta_cost, estimator_systems, hat_pair, norm_gap,
    orthogonality_residuals, run_suite, SuiteOptions, ORACLE_GUARD,
};
use nested_h2::Error;
use report::{PlantDigest, RunReport};
use serde::Serialize;
use serde_json::value::RawValue;

const COMPARE_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-8;
/// Relative covariance error allowed for the reduced Monte Carlo run.
const MONTE_CARLO_TOL: f64 = 0.05;

const EXIT_ASSUMPTION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Standing assumptions and structured stabilizability.
    Check,
    /// Optimal controller, written to --out.
    Synthesize,
    /// Norms, cost of decentralization and the Gramian and orthogonality residuals.
    Analyze,
    /// The full identity suite; --oracle adds the Kronecker comparison.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Primary,
    Alternative,
}

#[derive(Debug, Parser)]
#[command(
    name = "nested-h2",
    version,
    about = "H2-optimal controllers for two-player nested systems"
)]
struct Cli {
    command: Command,
    /// Plant description in JSON.
    plant: PathBuf,
    /// Controller output file (synthesize).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "primary")]
    realization: Which,
    /// Also solve the vectorized model-matching problem (verify).
    #[arg(long)]
    oracle: bool,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Residual bound for synthesize (default 1e-8), comparison bound for
    /// analyze and verify (default 1e-6).
    #[arg(long)]
    tol: Option<f64>,
    /// Run the reduced Monte Carlo covariance check with this seed (verify).
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Assumption(_)
            | Error::NotStructurallyStabilizable(_)
            | Error::NotStabilizable => EXIT_ASSUMPTION,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

fn load(path: &Path) -> Result<TwoPlayerPlant, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    plant_from_json(&text).map_err(|e| input_error(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = RunReport::new(match cli.command {
        Command::Check => "check",
        Command::Synthesize => "synthesize",
        Command::Analyze => "analyze",
        Command::Verify => "verify",
    });
    let outcome = load(&cli.plant).and_then(|plant| {
        report.plant = Some(PlantDigest::of(&plant));
        match cli.command {
            Command::Check => check(&plant, &mut report),
            Command::Synthesize => synthesize(&plant, &cli, &mut report),
            Command::Analyze => analyze(&plant, &cli, &mut report),
            Command::Verify => verify(&plant, &cli, &mut report),
        }
    });
    match outcome {
        Err(f) => report.fail(f.code, Some(f.message)),
        Ok(code) if code != 0 => report.fail(code, None),
        Ok(_) => {}
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    let body = if cli.json {
        report.to_json() + "\n"
    } else {
        report.to_table()
    };
    // a closed pipe downstream is not an error worth a panic
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
    if let Some(e) = &report.error {
        eprintln!("nested-h2: {e}");
    }
    ExitCode::from(report.exit_code)
}

fn status(report: &RunReport, failure_code: u8) -> u8 {
    if report.all_pass() {
        0
    } else {
        failure_code
    }
}

fn check(plant: &TwoPlayerPlant, report: &mut RunReport) -> Result<u8, Failure> {
    let tol = Tolerances::default();
    let assumptions = plant.check_assumptions(&tol);
    for (i, c) in assumptions.checks.iter().enumerate() {
        report.holds(format!("A{}", i + 1), c.pass, Some(c.detail.clone()));
    }
    let structural = exists_triangular_stabilizing(plant, &tol);
    let reasons = structural.reasons();
    report.holds(
        "triangular stabilizing controller exists",
        structural.pass(),
        (!reasons.is_empty()).then(|| reasons.join("; ")),
    );
    report.holds(
        "centralized stabilizing controller exists",
        exists_centralized_stabilizing(plant, &tol),
        None,
    );
    if !assumptions.minimal {
        report
            .notes
            .push("the realization of the plant is not minimal".into());
    }
    Ok(status(report, EXIT_ASSUMPTION))
}

/// Relative residuals of the Riccati equations and of the coupled linear
/// equations, on the same scale the solver accepts them.
fn residual_checks(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    tol: f64,
    report: &mut RunReport,
) -> Result<(), Failure> {
    let names = [
        "control ARE",
        "filter ARE",
        "player 2 control ARE",
        "player 1 filter ARE",
    ];
    for (name, r) in names.iter().zip(synth.ares.residuals) {
        report.at_most(format!("{name} residual"), r, tol);
    }
    let (coef, rhs) = build_phi_psi_system(plant, &synth.ares)?;
    let c = &synth.coupling;
    let x = (c.phi.norm_squared() + c.psi.norm_squared()).sqrt();
    let scale = 1.0 + rhs.norm() + coef.norm() * x;
    report.at_most(
        "coupled equations residual",
        c.residuals[0].max(c.residuals[1]) / scale,
        tol,
    );
    Ok(())
}

fn synthesis(plant: &TwoPlayerPlant, residual: f64) -> Result<SynthesisResult, Failure> {
    let tol = Tolerances {
        residual,
        ..Tolerances::default()
    };
    Ok(optimal_controller(plant, &tol)?)
}

#[derive(Serialize)]
struct StateSpaceFile {
    #[serde(rename = "A")]
    a: Box<RawValue>,
    #[serde(rename = "B")]
    b: Box<RawValue>,
    #[serde(rename = "C")]
    c: Box<RawValue>,
    #[serde(rename = "D")]
    d: Box<RawValue>,
}

#[derive(Serialize)]
struct GainsFile {
    #[serde(rename = "K")]
    k: Box<RawValue>,
    #[serde(rename = "L")]
    l: Box<RawValue>,
    #[serde(rename = "K_hat")]
    k_hat: Box<RawValue>,
    #[serde(rename = "L_hat")]
    l_hat: Box<RawValue>,
    #[serde(rename = "Phi")]
    phi: Box<RawValue>,
    #[serde(rename = "Psi")]
    psi: Box<RawValue>,
}

#[derive(Serialize)]
struct NormsFile {
    decentralized: Box<RawValue>,
    centralized: Box<RawValue>,
}

#[derive(Serialize)]
struct ControllerFile {
    realization: &'static str,
    controller: StateSpaceFile,
    gains: GainsFile,
    norms: NormsFile,
}

fn scalar_json(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    };
    RawValue::from_string(text).expect("well-formed JSON number")
}

fn synthesize(plant: &TwoPlayerPlant, cli: &Cli, report: &mut RunReport) -> Result<u8, Failure> {
    let tol = cli.tol.unwrap_or(RESIDUAL_TOL);
    let synth = synthesis(plant, tol)?;
    residual_checks(plant, &synth, tol, report)?;
    let (which, label) = match cli.realization {
        Which::Primary => (Realization::Primary, "primary"),
        Which::Alternative => (Realization::Alternative, "alternative"),
    };
    let k = synth.realization(which);
    let decentralized = closed_loop_norm(plant, k)?;
    let centralized = centralized_h2(plant, &Tolerances::default())?.norm();
    report.result("controller states", k.order() as f64);
    report.result("decentralized norm", decentralized);
    report.result("centralized norm", centralized);

    let file = ControllerFile {
        realization: label,
        controller: StateSpaceFile {
            a: matrix_to_json(&k.a),
            b: matrix_to_json(&k.b),
            c: matrix_to_json(&k.c),
            d: matrix_to_json(&k.d),
        },
        gains: GainsFile {
            k: matrix_to_json(&synth.ares.k),
            l: matrix_to_json(&synth.ares.l),
            k_hat: matrix_to_json(&synth.k_hat),
            l_hat: matrix_to_json(&synth.l_hat),
            phi: matrix_to_json(&synth.coupling.phi),
            psi: matrix_to_json(&synth.coupling.psi),
        },
        norms: NormsFile {
            decentralized: scalar_json(decentralized),
            centralized: scalar_json(centralized),
        },
    };
    let code = status(report, EXIT_NUMERICAL);
    match &cli.out {
        Some(path) if code == 0 => {
            let text = serde_json::to_string_pretty(&file).expect("controller serializes");
            std::fs::write(path, text + "\n")
                .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
            report
                .notes
                .push(format!("controller written to {}", path.display()));
        }
        Some(_) => report
            .notes
            .push("residuals above tolerance, no file written".into()),
        None => report
            .notes
            .push("no --out given, controller not written".into()),
    }
    Ok(code)
}

fn analyze(plant: &TwoPlayerPlant, cli: &Cli, report: &mut RunReport) -> Result<u8, Failure> {
    let cmp = cli.tol.unwrap_or(COMPARE_TOL);
    let tol = Tolerances::default();
    let synth = synthesis(plant, RESIDUAL_TOL)?;
    let norms = norm_gap(plant, &synth, &tol)?;
    let hats = hat_pair(plant, &synth)?;
    let delta = delta_cost(plant, &synth, &hats)?;
    let gramian = closed_loop_gramian(plant, &synth)?;
    let est = estimator_systems(plant, &synth, &tol)?;
    let (orth1, orth2) = orthogonality_residuals(&est)?;

    report.result("centralized norm", norms.centralized);
    report.result("decentralized norm", norms.decentralized);
    report.result("squared norm gap", norms.squared_gap());
    report.result("delta (norm of the controller difference)", delta.norm_form);
    report.result("delta (trace with Y_hat - Y)", delta.trace_y);
    report.result("delta (trace with X_hat - X)", delta.trace_x);
    report.result("gramian off-diagonal residual", gramian.offdiag);
    report.result("gramian diagonal residual", gramian.diag_gap);
    report.result("orthogonality residual E1 R1*", orth1);
    report.result("orthogonality residual E2 R2*", orth2);

    report.at_most("delta formulas agree", delta.spread(), cmp);
    report.at_most("delta nonnegative", (-delta.min()).max(0.0), cmp);
    report.at_most(
        "delta equals norm-squared gap",
        (delta.norm_form - norms.squared_gap()).abs() / (1.0 + norms.decentralized.powi(2)),
        cmp,
    );
    report.at_most("gramian off-diagonal blocks", gramian.offdiag, cmp);
    report.at_most("gramian diagonal blocks", gramian.diag_gap, cmp);
    report.at_most("orthogonality E1 R1*", orth1, cmp);
    report.at_most("orthogonality E2 R2*", orth2, cmp);
    Ok(status(report, EXIT_NUMERICAL))
}

fn verify(plant: &TwoPlayerPlant, cli: &Cli, report: &mut RunReport) -> Result<u8, Failure> {
    let opts = SuiteOptions {
        compare_tol: cli.tol.unwrap_or(COMPARE_TOL),
        residual_tol: RESIDUAL_TOL,
        oracle: cli.oracle,
        guard: ORACLE_GUARD,
    };
    let tol = Tolerances::default();
    let synth = synthesis(plant, RESIDUAL_TOL)?;
    let suite = run_suite(plant, &synth, &opts, &tol)?;
    for c in &suite.checks {
        report.at_most(c.name, c.value, c.limit);
    }
    report.result("centralized norm", suite.norms.centralized);
    report.result("decentralized norm", suite.norms.decentralized);
    report.result("delta", suite.delta.norm_form);
    if let Some(o) = &suite.oracle {
        report.result("oracle norm", o.norm);
        report.result("oracle kronecker states", o.kron_states as f64);
    }
    if let Some(seed) = cli.seed {
        let mc = zeta_error_covariance(
            plant,
            &synth,
            &suite.hats.y_hat,
            &MonteCarloConfig::reduced(seed),
        )?;
        report.at_most(
            "monte carlo error covariance",
            mc.rel_error,
            MONTE_CARLO_TOL,
        );
        report.result("monte carlo samples", mc.samples as f64);
    }
    Ok(status(report, EXIT_NUMERICAL))
}
