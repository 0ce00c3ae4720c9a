use crate::linalg::{diag2, h2_norm, hcat, sub, vcat, Mat};
use crate::stabilization::{q_from_controller, youla_data, ModelMatchData};
use crate::synthesis::SynthesisResult;
use crate::sysmodel::{selector, Partition, StateSpace, TwoPlayerPlant};
use crate::Result;

use super::{stable_part_left_adjoint, stable_part_right_adjoint};

#[derive(Debug, Clone, PartialEq)]
pub struct YoulaParameters {
    /// Structured parameter in closed form, `2n` states.
    pub q_opt: StateSpace,
    /// `F_u(J_d⁻¹, K_opt)` computed by interconnection.
    pub q_opt_lft: StateSpace,
    /// Centralized parameter `(Â, L̂ - L, K̂ - K, 0)`.
    pub q_you: StateSpace,
    pub data: ModelMatchData,
}

pub fn youla_parameters(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
) -> Result<YoulaParameters> {
    let ares = &synth.ares;
    let g = &synth.nominal;
    let q_opt = StateSpace {
        a: diag2(&ares.a_k, &ares.a_l),
        b: vcat(&[&synth.l_hat, &(&g.ld - &ares.l)]),
        c: hcat(&[&(&g.kd - &ares.k), &synth.k_hat]),
        d: Mat::zeros(plant.partition.controls(), plant.partition.measurements()),
    };
    let q_you = StateSpace {
        a: synth.a_hat.clone(),
        b: &synth.l_hat - &ares.l,
        c: &synth.k_hat - &ares.k,
        d: q_opt.d.clone(),
    };
    let data = youla_data(plant, g);
    let q_opt_lft = q_from_controller(&data, &synth.controller)?;
    Ok(YoulaParameters {
        q_opt,
        q_opt_lft,
        q_you,
        data,
    })
}

/// `T11 + T12 Q T21`.
pub fn model_match_loop(t: &ModelMatchData, q: &StateSpace) -> Result<StateSpace> {
    t.t11.add(&t.t12.mul(q)?.mul(&t.t21)?)
}

/// Residual of the structured optimality condition
/// `T12*(T11 + T12 Q T21)T21* ∈ [H2⊥ L2; H2⊥ H2⊥]`, one entry per block:
/// the H2 norm of that block's stable part.
/// Entry `[0][1]` is unconstrained and reported as zero.
pub fn structured_optimality_residual(
    t: &ModelMatchData,
    q: &StateSpace,
    partition: &Partition,
) -> Result<[[f64; 2]; 2]> {
    // T12 and T21 are stable and the loop is strictly proper, so the stable
    // part of the product peels off one adjoint factor at a time
    let inner = stable_part_left_adjoint(&t.t12, &model_match_loop(t, q)?)?;
    let omega = stable_part_right_adjoint(&inner, &t.t21)?;
    let left = omega.mul_right(&selector(partition.k, 0))?;
    let bottom = omega.mul_left(&selector(partition.m, 1).transpose())?;
    let (m1, m2) = (partition.m[0], partition.m[1]);
    let (k1, k2) = (partition.k[0], partition.k[1]);
    let b11 = left.block(0, m1, 0, k1);
    let b21 = left.block(m1, m2, 0, k1);
    let b22 = bottom.block(0, m2, k1, k2);
    Ok([[h2_norm(&b11)?, 0.0], [h2_norm(&b21)?, h2_norm(&b22)?]])
}

/// Largest constrained entry of a block residual.
pub fn worst_block(r: &[[f64; 2]; 2]) -> f64 {
    r[0][0].max(r[1][0]).max(r[1][1])
}

/// The best responses `g1(Q11) = (A_L, (L_d - L)E2, K̄2, 0)` and
/// `g2(Q22) = (A_K, L̄2, E1ᵀ(K_d - K), 0)`, where `K̄2` is the second block
/// row of `K̂` and `L̄2` the first block column of `L̂`.
pub fn fixed_point_maps(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
) -> (StateSpace, StateSpace) {
    let p = &plant.partition;
    let n = plant.states();
    let ares = &synth.ares;
    let g = &synth.nominal;
    let k_bar2 = sub(&synth.k_hat, p.m[0], 0, p.m[1], n);
    let l_bar2 = sub(&synth.l_hat, 0, 0, n, p.k[0]);
    let g1 = StateSpace {
        a: ares.a_l.clone(),
        b: (&g.ld - &ares.l) * selector(p.k, 1),
        c: k_bar2,
        d: Mat::zeros(p.m[1], p.k[1]),
    };
    let g2 = StateSpace {
        a: ares.a_k.clone(),
        b: l_bar2,
        c: selector(p.m, 0).transpose() * (&g.kd - &ares.k),
        d: Mat::zeros(p.m[0], p.k[0]),
    };
    (g1, g2)
}
