//! Time-domain check of the `ζ` estimator: simulate plant and controller
//! under unit white noise with Euler–Maruyama and compare the stationary
//! covariance of `x - ζ` with `Ŷ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::exec::{map_indexed, CompensatedSum, Exec};
use crate::linalg::{hcat, spectral_abscissa, vcat, Mat};
use crate::synthesis::SynthesisResult;
use crate::sysmodel::TwoPlayerPlant;
use crate::Result;

/// Seed used by the test suite and the CLI unless overridden.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub dt: f64,
    /// Simulated time in units of the slowest closed-loop time constant.
    pub horizon: f64,
    /// Initial stretch discarded before sampling, same units.
    pub burn_in: f64,
    pub paths: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl MonteCarloConfig {
    /// Step `1e-3`, horizon 50 time constants, `10⁴` paths.
    pub fn full(seed: u64) -> Self {
        MonteCarloConfig {
            dt: 1e-3,
            horizon: 50.0,
            burn_in: 10.0,
            paths: 10_000,
            seed,
            exec: Exec::Parallel,
        }
    }

    /// Same step and horizon with far fewer paths; samples along each
    /// path after burn-in carry most of the statistics.
    pub fn reduced(seed: u64) -> Self {
        MonteCarloConfig {
            paths: 48,
            ..MonteCarloConfig::full(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    /// Sample covariance of `x - ζ`.
    pub covariance: Mat,
    /// `‖Σ - Ŷ‖ / ‖Ŷ‖`
    pub rel_error: f64,
    pub steps: usize,
    pub samples: usize,
}

/// Simulate `paths` independent closed-loop trajectories. Path `i` draws
/// from ChaCha8 stream `i` of `seed`, so results do not depend on
/// scheduling.
pub fn zeta_error_covariance(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    y_hat: &Mat,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloResult> {
    let n = plant.states();
    let k = &synth.controller;
    let acl = vcat(&[
        &hcat(&[&plant.a, &(&plant.b2 * &k.c)]),
        &hcat(&[&(&k.b * &plant.c2), &k.a]),
    ]);
    let bcl = vcat(&[&plant.b1, &(&k.b * &plant.d21)]);
    let dim = acl.nrows();
    let nw = bcl.ncols();
    let tau = 1.0 / spectral_abscissa(&acl)?.abs();
    let steps = (cfg.horizon * tau / cfg.dt).ceil() as usize;
    let skip = (cfg.burn_in * tau / cfg.dt).ceil() as usize;
    let sqdt = cfg.dt.sqrt();

    // x_{k+1} = (I + A dt) x_k + B sqrt(dt) ξ_k, row-major for tight loops
    let step_m: Vec<f64> = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| if i == j { 1.0 } else { 0.0 } + acl[(i, j)] * cfg.dt)
        .collect();
    let noise_m: Vec<f64> = (0..dim)
        .flat_map(|i| (0..nw).map(move |j| (i, j)))
        .map(|(i, j)| bcl[(i, j)] * sqdt)
        .collect();

    let per_path = map_indexed(cfg.paths, cfg.exec, |path| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(path as u64);
        let mut x = vec![0.0; dim];
        let mut next = vec![0.0; dim];
        let mut w = vec![0.0; nw];
        let mut err = vec![0.0; n];
        let mut acc = vec![CompensatedSum::default(); n * n];
        for step in 0..steps {
            for wi in w.iter_mut() {
                *wi = StandardNormal.sample(&mut rng);
            }
            for i in 0..dim {
                let row = &step_m[i * dim..(i + 1) * dim];
                let mut s: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
                let nrow = &noise_m[i * nw..(i + 1) * nw];
                s += nrow.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                next[i] = s;
            }
            std::mem::swap(&mut x, &mut next);
            if step >= skip {
                for i in 0..n {
                    err[i] = x[i] - x[n + i];
                }
                for i in 0..n {
                    for j in 0..n {
                        acc[i * n + j].add(err[i] * err[j]);
                    }
                }
            }
        }
        acc.iter().map(CompensatedSum::value).collect::<Vec<f64>>()
    });

    let samples = cfg.paths * steps.saturating_sub(skip);
    let mut cov = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = CompensatedSum::default();
            for p in &per_path {
                s.add(p[i * n + j]);
            }
            cov[(i, j)] = s.value() / samples.max(1) as f64;
        }
    }
    let rel_error = (&cov - y_hat).norm() / y_hat.norm();
    Ok(MonteCarloResult {
        covariance: cov,
        rel_error,
        steps,
        samples,
    })
}
