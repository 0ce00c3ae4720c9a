//! Seeded random plants for sweeps, and the data-parallel sweep itself.
//!
//! Candidates come from [`fixtures::random_candidate`] and are redrawn until
//! the structured synthesis goes through with comfortable stability margins,
//! so that every member is a well-conditioned test case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_indexed, Exec};
use crate::linalg::{spectral_abscissa, Mat, Tolerances};
use crate::synthesis::optimal_controller;
use crate::sysmodel::{fixtures, TwoPlayerPlant};

/// Seed of the default ensemble.
pub const ENSEMBLE_SEED: u64 = 0x00C0_FFEE;

/// Seed of the single random fixture with `n = (2, 1)`.
pub const FIXTURE_R_SEED: u64 = 7;

/// Every closed-loop matrix of the construction must have spectral
/// abscissa at most this.
pub const MIN_DECAY: f64 = 0.05;

/// The four state splits the ensemble cycles through.
pub const SHAPES: [[usize; 2]; 4] = [[1, 1], [2, 1], [1, 2], [2, 2]];

const MAX_DRAWS: usize = 10_000;

/// Whether a candidate passes the assumptions and synthesis with every
/// relevant matrix decaying at rate at least [`MIN_DECAY`].
pub fn acceptable(plant: &TwoPlayerPlant, tol: &Tolerances) -> bool {
    let Ok(s) = optimal_controller(plant, tol) else {
        return false;
    };
    let mats: [&Mat; 7] = [
        &s.ares.a_k,
        &s.ares.a_l,
        &s.ares.a_j,
        &s.ares.a_m,
        &s.nominal.a_kd,
        &s.nominal.a_ld,
        &s.a_hat,
    ];
    mats.iter()
        .all(|m| spectral_abscissa(m).is_ok_and(|x| x <= -MIN_DECAY))
}

/// First acceptable candidate from the ChaCha8 stream `seed`.
pub fn random_plant(seed: u64, n: [usize; 2]) -> TwoPlayerPlant {
    first_acceptable(seed, |rng| fixtures::random_candidate(rng, n))
}

/// Like [`random_plant`], restricted to dynamically decoupled plants.
pub fn random_decoupled_plant(seed: u64, n: [usize; 2]) -> TwoPlayerPlant {
    first_acceptable(seed, |rng| fixtures::random_decoupled_candidate(rng, n))
}

fn first_acceptable(
    seed: u64,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> TwoPlayerPlant,
) -> TwoPlayerPlant {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let p = draw(&mut rng);
        if acceptable(&p, &tol) {
            return p;
        }
    }
    panic!("no acceptable plant in {MAX_DRAWS} draws (seed {seed})");
}

/// The random fixture: `n = (2, 1)`, `m = k = (1, 1)`.
pub fn fixture_r() -> TwoPlayerPlant {
    random_plant(FIXTURE_R_SEED, [2, 1])
}

/// `count` plants cycling through [`SHAPES`]; member `i` uses seed
/// `seed + i`.
pub fn ensemble_with(count: usize, seed: u64, exec: Exec) -> Vec<TwoPlayerPlant> {
    map_indexed(count, exec, |i| {
        random_plant(seed.wrapping_add(i as u64), SHAPES[i % SHAPES.len()])
    })
}

pub fn ensemble(count: usize) -> Vec<TwoPlayerPlant> {
    ensemble_with(count, ENSEMBLE_SEED, Exec::Parallel)
}

/// Apply `f` to every plant, in order.
pub fn sweep<T, F>(plants: &[TwoPlayerPlant], exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&TwoPlayerPlant) -> T + Sync + Send,
{
    map_indexed(plants.len(), exec, |i| f(&plants[i]))
}
