use crate::linalg::{Mat, Tolerances};
use crate::synthesis::{optimal_controller, SynthesisResult};
use crate::sysmodel::{swap_permutation, TwoPlayerPlant};
use crate::Result;

use super::{hat_pair, rel_gap};

/// Gaps between quantities synthesized on the dual plant and the transposed,
/// player-swapped counterparts from the primal synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityGaps {
    /// Dual `X` against `Pn Y Pnᵀ`.
    pub x_vs_y: f64,
    /// Dual `K` against `Pk Lᵀ Pnᵀ`.
    pub k_vs_l: f64,
    pub x_hat_vs_y_hat: f64,
    pub k_hat_vs_l_hat: f64,
    /// Dual `Â` against `Pn Âᵀ Pnᵀ`.
    pub a_hat: f64,
}

impl DualityGaps {
    pub fn worst(&self) -> f64 {
        [
            self.x_vs_y,
            self.k_vs_l,
            self.x_hat_vs_y_hat,
            self.k_hat_vs_l_hat,
            self.a_hat,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Synthesizes on `plant.dual()` and compares with `synth`.
pub fn duality_gaps(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    tol: &Tolerances,
) -> Result<DualityGaps> {
    let dual_plant = plant.dual();
    let dual = optimal_controller(&dual_plant, tol)?;
    let p = &plant.partition;
    let pn = swap_permutation(p.n);
    let pk = swap_permutation(p.k);
    let flip = |m: &Mat| &pn * m * pn.transpose();
    let gain = |l: &Mat| &pk * l.transpose() * pn.transpose();

    let primal_hats = hat_pair(plant, synth)?;
    let dual_hats = hat_pair(&dual_plant, &dual)?;
    Ok(DualityGaps {
        x_vs_y: rel_gap(&dual.ares.x, &flip(&synth.ares.y)),
        k_vs_l: rel_gap(&dual.ares.k, &gain(&synth.ares.l)),
        x_hat_vs_y_hat: rel_gap(&dual_hats.x_hat, &flip(&primal_hats.y_hat)),
        k_hat_vs_l_hat: rel_gap(&dual.k_hat, &gain(&synth.l_hat)),
        a_hat: rel_gap(&dual.a_hat, &flip(&synth.a_hat.transpose())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::fixtures;

    #[test]
    fn fixtures_are_self_dual_up_to_the_swap() {
        let tol = Tolerances::default();
        for plant in [fixtures::decoupled(), fixtures::unstable_coupling()] {
            let synth = optimal_controller(&plant, &tol).unwrap();
            let gaps = duality_gaps(&plant, &synth, &tol).unwrap();
            assert!(gaps.worst() < 1e-7, "{gaps:?}");
        }
    }
}
