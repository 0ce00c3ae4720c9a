use crate::linalg::{h2_norm, Tolerances};
use crate::stabilization::stabilizes;
use crate::synthesis::SynthesisResult;
use crate::sysmodel::TwoPlayerPlant;
use crate::Result;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Bound for relative comparisons between independently computed values.
    pub compare_tol: f64,
    /// Bound for relative residuals of matrix equations.
    pub residual_tol: f64,
    /// Also run the Kronecker oracle.
    pub oracle: bool,
    pub guard: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            compare_tol: 1e-6,
            residual_tol: 1e-8,
            oracle: false,
            guard: ORACLE_GUARD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
    pub hats: HatPair,
    pub gramian: GramianTriple,
    pub delta: DeltaCost,
    pub norms: NormGap,
    pub orthogonality: (f64, f64),
    pub oracle: Option<OracleResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn at_most(&mut self, name: &'static str, value: f64, limit: f64) {
        let pass = value <= limit;
        self.0.push(CheckResult {
            name,
            value,
            limit,
            pass,
        });
    }

    fn holds(&mut self, name: &'static str, ok: bool) {
        self.0.push(CheckResult {
            name,
            value: if ok { 0.0 } else { 1.0 },
            limit: 0.0,
            pass: ok,
        });
    }
}

/// Every identity the optimal controller is known to satisfy, each checked
/// against its bound. Numerical failures inside a check propagate as errors.
pub fn run_suite(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    opts: &SuiteOptions,
    tol: &Tolerances,
) -> Result<SuiteReport> {
    let cmp = opts.compare_tol;
    let p = &plant.partition;
    let mut c = Checks(Vec::new());

    let are_worst = synth.ares.residuals.iter().copied().fold(0.0, f64::max);
    c.at_most("riccati residuals", are_worst, opts.residual_tol);

    let hats = hat_pair(plant, synth)?;
    c.at_most(
        "Y_hat / X_hat identities",
        hats.checks.worst_identity(),
        cmp,
    );
    let psd = (-hats.checks.min_eig_y_gap)
        .max(-hats.checks.min_eig_x_gap)
        .max(0.0);
    c.at_most("Y_hat - Y and X_hat - X positive semidefinite", psd, cmp);

    let gramian = closed_loop_gramian(plant, synth)?;
    c.at_most("gramian off-diagonal blocks", gramian.offdiag, cmp);
    c.at_most("gramian diagonal blocks", gramian.diag_gap, cmp);

    let est = estimator_systems(plant, synth, tol)?;
    let orthogonality = orthogonality_residuals(&est)?;
    c.at_most("orthogonality E1 R1*", orthogonality.0, cmp);
    c.at_most("orthogonality E2 R2*", orthogonality.1, cmp);

    let delta = delta_cost(plant, synth, &hats)?;
    let norms = norm_gap(plant, synth, tol)?;
    c.at_most("delta formulas agree", delta.spread(), cmp);
    c.at_most("delta nonnegative", (-delta.min()).max(0.0), cmp);
    let gap = norms.squared_gap();
    c.at_most(
        "delta equals norm-squared gap",
        (delta.norm_form - gap).abs() / (1.0 + norms.decentralized.powi(2)),
        cmp,
    );

    let y = youla_parameters(plant, synth)?;
    let you_sq = h2_norm(&y.q_you.mul_left(&plant.d12)?.mul_right(&plant.d21)?)?.powi(2);
    c.at_most(
        "youla parameter cost equals delta",
        (you_sq - delta.norm_form).abs() / (1.0 + delta.norm_form),
        cmp,
    );
    c.at_most(
        "Q_opt closed form matches interconnection",
        y.q_opt.markov_distance(&y.q_opt_lft)?,
        cmp,
    );
    c.holds(
        "Q_opt block-lower",
        y.q_opt.is_block_lower_tf(p.m[0], p.k[0], 1e-8),
    );
    let opt = structured_optimality_residual(&y.data, &y.q_opt, p)?;
    // the residual scales with the loop, so compare it against the loop's norm
    c.at_most(
        "structured optimality residual",
        worst_block(&opt) / (1.0 + norms.decentralized),
        cmp,
    );

    let (g1, g2) = fixed_point_maps(plant, synth);
    let q11 = y.q_opt.block(0, p.m[0], 0, p.k[0]);
    let q22 = y.q_opt.block(p.m[0], p.m[1], p.k[0], p.k[1]);
    c.at_most("fixed point Q11 = g2", q11.markov_distance(&g2)?, cmp);
    c.at_most("fixed point Q22 = g1", q22.markov_distance(&g1)?, cmp);

    c.at_most(
        "realizations coincide",
        synth.controller.markov_distance(&synth.controller_alt)?,
        cmp,
    );
    c.holds(
        "controller block-lower",
        synth.controller.is_block_lower_tf(p.m[0], p.k[0], 1e-8),
    );
    c.holds(
        "controller stabilizing",
        stabilizes(plant, &synth.controller, tol.hurwitz_margin)?,
    );

    let oracle = if opts.oracle {
        let o = vectorization_oracle(&y.data, p, true, opts.guard, tol)?;
        c.at_most(
            "oracle norm matches closed form",
            (o.norm - norms.decentralized).abs() / (1.0 + norms.decentralized),
            cmp,
        );
        Some(o)
    } else {
        None
    };

    Ok(SuiteReport {
        checks: c.0,
        hats,
        gramian,
        delta,
        norms,
        orthogonality,
        oracle,
    })
}
