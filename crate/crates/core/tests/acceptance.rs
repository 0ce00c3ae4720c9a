//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! `cargo test --release --test acceptance` (also part of `cargo test`).

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use nested_h2::ensemble::{ensemble, random_decoupled_plant, SHAPES};
use nested_h2::exec::Exec;
use nested_h2::linalg::{h2_norm, spectral_abscissa, sub, Tolerances};
use nested_h2::stabilization::{
    exists_centralized_stabilizing, exists_triangular_stabilizing, stabilizes,
};
use nested_h2::synthesis::{
    closed_loop_norm, controller_from_gains, optimal_controller, SynthesisResult,
};
use nested_h2::sysmodel::{fixtures, StateSpace, TwoPlayerPlant};
use nested_h2::validation::{
    closed_loop_gramian, delta_cost, duality_gaps, estimator_systems, fixed_point_maps, hat_pair,
    kalman_filter, norm_gap, orthogonality_residuals, structured_optimality_residual,
    vectorization_oracle, worst_block, youla_parameters, ORACLE_GUARD,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Mat = DMatrix<f64>;

const ENSEMBLE_SIZE: usize = 32;
const ORACLE_SECONDS: f64 = 60.0;
const PERTURBATION: f64 = 1e-2;
const PERTURBATION_DRAWS: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Member {
    plant: TwoPlayerPlant,
    synth: SynthesisResult,
}

fn fold_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn oracle_equivalence(members: &[Member], tol: &Tolerances) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for m in members {
        let y = youla_parameters(&m.plant, &m.synth).unwrap();
        let o = vectorization_oracle(&y.data, &m.plant.partition, true, ORACLE_GUARD, tol).unwrap();
        let direct = closed_loop_norm(&m.plant, &m.synth.controller).unwrap();
        worst = worst.max((o.norm - direct).abs() / direct);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < ORACLE_SECONDS,
        format!("worst relative norm gap {worst:.2e} (limit 1e-6) in {secs:.2} s (limit {ORACLE_SECONDS} s)"),
    )
}

/// Random stable lower-triangular `Q` with `m = k = (1, 1)` and unit H2 norm.
fn random_lower_direction(rng: &mut ChaCha8Rng) -> StateSpace {
    let mut scalar = |n: usize| {
        let mut a = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let shift = spectral_abscissa(&a).unwrap() + 0.2 + rng.random::<f64>();
        a -= Mat::identity(n, n) * shift;
        StateSpace::new(
            a,
            Mat::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0)),
            Mat::from_fn(1, n, |_, _| rng.random_range(-1.0..1.0)),
            Mat::zeros(1, 1),
        )
        .unwrap()
    };
    let q11 = scalar(2);
    let q21 = scalar(1);
    let q22 = scalar(2);
    let q = q11
        .hstack(&StateSpace::zero(1, 1))
        .unwrap()
        .vstack(&q21.hstack(&q22).unwrap())
        .unwrap();
    let norm = h2_norm(&q).unwrap();
    q.mul_left(&(Mat::identity(2, 2) / norm)).unwrap()
}

fn optimality_certificate(members: &[Member]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut via_controller: f64 = 0.0;
    let mut detected = 0;
    let mut draws = 0;
    for m in members {
        let p = &m.plant.partition;
        let y = youla_parameters(&m.plant, &m.synth).unwrap();
        let q_k =
            nested_h2::stabilization::q_from_controller(&y.data, &m.synth.controller).unwrap();
        via_controller = via_controller.max(worst_block(
            &structured_optimality_residual(&y.data, &q_k, p).unwrap(),
        ));
        worst = worst.max(worst_block(
            &structured_optimality_residual(&y.data, &y.q_opt, p).unwrap(),
        ));
        for _ in 0..PERTURBATION_DRAWS {
            let dir = random_lower_direction(&mut rng)
                .mul_left(&(Mat::identity(2, 2) * PERTURBATION))
                .unwrap();
            let q = y.q_opt.add(&dir).unwrap();
            let r = worst_block(&structured_optimality_residual(&y.data, &q, p).unwrap());
            draws += 1;
            if r > 1e-4 {
                detected += 1;
            }
        }
    }
    let share = detected as f64 / draws as f64;
    outcome(
        worst <= 1e-6 && share >= 0.9,
        format!(
            "optimal residual {worst:.2e} (limit 1e-6); perturbed residual > 1e-4 in {detected}/{draws} draws (need 90%); \
             recovered from the controller {via_controller:.2e} (not gated)"
        ),
    )
}

fn identity_suite(members: &[Member]) -> Outcome {
    let worst = fold_max(members.iter().map(|m| {
        hat_pair(&m.plant, &m.synth)
            .unwrap()
            .checks
            .worst_identity()
    }));
    outcome(
        worst <= 1e-8,
        format!("worst identity gap {worst:.2e} (limit 1e-8)"),
    )
}

fn gramian(members: &[Member]) -> Outcome {
    let (mut off, mut diag): (f64, f64) = (0.0, 0.0);
    for m in members {
        let g = closed_loop_gramian(&m.plant, &m.synth).unwrap();
        off = off.max(g.offdiag);
        diag = diag.max(g.diag_gap);
    }
    outcome(
        off <= 1e-7 && diag <= 1e-7,
        format!("off-diagonal {off:.2e}·‖Θ‖ (limit 1e-7), diagonal gap {diag:.2e} (limit 1e-7)"),
    )
}

fn cost_of_decentralization(members: &[Member], tol: &Tolerances) -> Outcome {
    let (mut spread, mut lowest, mut gap): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for m in members {
        let hats = hat_pair(&m.plant, &m.synth).unwrap();
        let d = delta_cost(&m.plant, &m.synth, &hats).unwrap();
        let g = norm_gap(&m.plant, &m.synth, tol).unwrap();
        spread = spread.max(d.spread());
        lowest = lowest.min(d.min());
        gap = gap.max((d.norm_form - g.squared_gap()).abs() / g.decentralized.powi(2));
    }
    outcome(
        spread <= 1e-7 && lowest >= -1e-9 && gap <= 1e-6,
        format!(
            "formula spread {spread:.2e} (limit 1e-7), min delta {lowest:.2e} (limit -1e-9), norm-gap mismatch {gap:.2e} (limit 1e-6)"
        ),
    )
}

fn orthogonality(members: &[Member], tol: &Tolerances) -> Outcome {
    let worst = fold_max(members.iter().map(|m| {
        let (a, b) =
            orthogonality_residuals(&estimator_systems(&m.plant, &m.synth, tol).unwrap()).unwrap();
        a.max(b)
    }));
    outcome(
        worst <= 1e-7,
        format!("worst stable-part norm {worst:.2e} (limit 1e-7)"),
    )
}

fn worked_stabilization_examples(tol: &Tolerances) -> Outcome {
    let u = fixtures::unstabilizable();
    let rejected = !exists_triangular_stabilizing(&u, tol).pass();
    let centralized = exists_centralized_stabilizing(&u, tol);
    let s = fixtures::stabilizable();
    let accepted = exists_triangular_stabilizing(&s, tol).pass();
    let k0 = StateSpace::static_gain(fixtures::stabilizable_k0());
    let k0_ok = stabilizes(&s, &k0, tol.hurwitz_margin).unwrap();
    outcome(
        rejected && centralized && accepted && k0_ok,
        format!(
            "unstabilizable: rejected={rejected} centralized stabilizer={centralized}; stabilizable: accepted={accepted} K0 stabilizing={k0_ok}"
        ),
    )
}

fn tf_gap(sys: &StateSpace, tf: impl Fn(Complex64) -> Complex64) -> f64 {
    fold_max([0.1, 0.7, 2.0, 9.0, 40.0].iter().map(|&w| {
        let s = Complex64::new(0.0, w);
        let want = tf(s);
        (sys.eval_at(s).unwrap()[(0, 0)] - want).norm() / (1.0 + want.norm())
    }))
}

fn kalman_examples(tol: &Tolerances) -> Outcome {
    let m = |r: usize, c: usize, v: &[f64]| Mat::from_row_slice(r, c, v);
    let f = kalman_filter(
        &m(1, 1, &[-4.0]),
        &m(1, 2, &[3.0, 0.0]),
        &m(1, 1, &[1.0]),
        &m(1, 1, &[1.0]),
        &m(1, 2, &[0.0, 1.0]),
        tol,
    )
    .unwrap();
    let first = tf_gap(&f.select(&[0], &[0]), |s| 1.0 / (s + 5.0))
        .max(tf_gap(&f.select(&[0], &[1]), |s| 1.0 / (s + 5.0)));
    let law = StateSpace::new(
        m(1, 1, &[1.0]),
        m(1, 1, &[1.0]),
        m(1, 1, &[1.0]),
        m(1, 1, &[0.0]),
    )
    .unwrap();
    let after = f
        .mul(&StateSpace::identity(1).vstack(&law).unwrap())
        .unwrap();
    let after_gap = tf_gap(&after, |s| s / (s * s + 4.0 * s - 5.0));
    let g = kalman_filter(
        &m(2, 2, &[-4.0, 1.0, 1.0, 1.0]),
        &m(2, 2, &[3.0, 0.0, 0.0, 1.0]),
        &Mat::zeros(2, 0),
        &m(1, 2, &[1.0, 0.0]),
        &m(1, 2, &[0.0, 1.0]),
        tol,
    )
    .unwrap();
    let before_gap = tf_gap(&g.select(&[0], &[0]), |s| {
        (3.0 * s + 10.0) / (s * s + 6.0 * s + 5.0)
    });
    let worst = first.max(after_gap).max(before_gap);
    outcome(
        worst <= 1e-9,
        format!("known input {first:.2e}, law eliminated after {after_gap:.2e}, before {before_gap:.2e} (limit 1e-9)"),
    )
}

fn special_cases(tol: &Tolerances) -> Outcome {
    let mut plants = vec![fixtures::decoupled()];
    plants.extend((0..8u64).map(|seed| random_decoupled_plant(seed, SHAPES[seed as usize % 4])));
    let (mut y11, mut h_effect): (f64, f64) = (0.0, 0.0);
    for p in &plants {
        let s = optimal_controller(p, tol).unwrap();
        let hats = hat_pair(p, &s).unwrap();
        let n1 = p.partition.n[0];
        y11 = y11.max(sub(&(&hats.y_hat - &s.ares.y), 0, 0, n1, n1).norm());
        let mut k_hat = s.k_hat.clone();
        let m1 = p.partition.m[0];
        k_hat.view_mut((m1, 0), (p.partition.m[1], n1)).fill(0.0);
        let without_h = controller_from_gains(p, &s.ares.k, &s.ares.l, &k_hat, &s.l_hat);
        let a = closed_loop_norm(p, &s.controller).unwrap();
        let b = closed_loop_norm(p, &without_h).unwrap();
        h_effect = h_effect.max((a - b).abs());
    }
    let p = fixtures::uninformative_second_measurement();
    let s = optimal_controller(&p, tol).unwrap();
    let d = delta_cost(&p, &s, &hat_pair(&p, &s).unwrap()).unwrap();
    let g = norm_gap(&p, &s, tol).unwrap();
    let degenerate = fold_max(d.values().iter().map(|v| v.abs())).max(g.squared_gap().abs());
    outcome(
        y11 <= 1e-8 && h_effect <= 1e-8 && degenerate <= 1e-8,
        format!(
            "{} decoupled plants: (Ŷ-Y)11 {y11:.2e}, zeroing H moves norm {h_effect:.2e}; uninformative second measurement: delta and gap {degenerate:.2e} (limits 1e-8)",
            plants.len()
        ),
    )
}

fn duality(members: &[Member], tol: &Tolerances) -> Outcome {
    let worst = fold_max(
        members
            .iter()
            .map(|m| duality_gaps(&m.plant, &m.synth, tol).unwrap().worst()),
    );
    outcome(
        worst <= 1e-7,
        format!("worst dual gap {worst:.2e} (limit 1e-7)"),
    )
}

fn fixed_point(members: &[Member]) -> Outcome {
    let worst = fold_max(members.iter().map(|m| {
        let p = &m.plant.partition;
        let y = youla_parameters(&m.plant, &m.synth).unwrap();
        let (g1, g2) = fixed_point_maps(&m.plant, &m.synth);
        let q11 = y.q_opt.block(0, p.m[0], 0, p.k[0]);
        let q22 = y.q_opt.block(p.m[0], p.m[1], p.k[0], p.k[1]);
        q11.markov_distance(&g2)
            .unwrap()
            .max(q22.markov_distance(&g1).unwrap())
    }));
    outcome(
        worst <= 1e-7,
        format!("worst Markov gap {worst:.2e} (limit 1e-7)"),
    )
}

fn controller_shape(members: &[Member], tol: &Tolerances) -> Outcome {
    let mut order_ok = true;
    let mut lower = true;
    let mut stable = true;
    let mut realization_gap: f64 = 0.0;
    for m in members {
        let p = &m.plant.partition;
        let k = &m.synth.controller;
        order_ok &= k.order() == 2 * m.plant.states();
        lower &= k.is_block_lower_tf(p.m[0], p.k[0], 1e-8);
        stable &= stabilizes(&m.plant, k, tol.hurwitz_margin).unwrap();
        realization_gap = realization_gap.max(k.markov_distance(&m.synth.controller_alt).unwrap());
    }
    outcome(
        order_ok && lower && stable && realization_gap <= 1e-7,
        format!(
            "2n states={order_ok} block-lower={lower} stabilizing={stable}; realizations differ by {realization_gap:.2e} (limit 1e-7)"
        ),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let plants = ensemble(ENSEMBLE_SIZE);
    let members: Vec<Member> = nested_h2::ensemble::sweep(&plants, Exec::Parallel, |p| {
        optimal_controller(p, &tol).map(|synth| Member {
            plant: p.clone(),
            synth,
        })
    })
    .into_iter()
    .collect::<Result<_, _>>()
    .expect("ensemble members synthesize");

    let criteria: [Criterion<'_>; 12] = [
        (
            "oracle equivalence",
            Box::new(|| oracle_equivalence(&members, &tol)),
        ),
        (
            "optimality certificate",
            Box::new(|| optimality_certificate(&members)),
        ),
        (
            "covariance identities",
            Box::new(|| identity_suite(&members)),
        ),
        ("block-diagonal gramian", Box::new(|| gramian(&members))),
        (
            "cost of decentralization",
            Box::new(|| cost_of_decentralization(&members, &tol)),
        ),
        (
            "estimator orthogonality",
            Box::new(|| orthogonality(&members, &tol)),
        ),
        (
            "stabilizability examples",
            Box::new(|| worked_stabilization_examples(&tol)),
        ),
        ("kalman filter examples", Box::new(|| kalman_examples(&tol))),
        (
            "decoupled and degenerate cases",
            Box::new(|| special_cases(&tol)),
        ),
        ("duality", Box::new(|| duality(&members, &tol))),
        ("fixed point", Box::new(|| fixed_point(&members))),
        (
            "controller shape",
            Box::new(|| controller_shape(&members, &tol)),
        ),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
