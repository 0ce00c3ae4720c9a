use crate::linalg::Tolerances;
use crate::linalg::{
    h2_norm_squared_pair, hcat, min_sym_eigenvalue, solve_lyapunov, sub, vcat, Mat,
};
use crate::synthesis::{centralized_h2, closed_loop_norm, SynthesisResult};
use crate::sysmodel::{selector, StateSpace, TwoPlayerPlant};
use crate::{Error, Result};

use super::rel_gap;

/// `Ŷ` and `X̂` from the two Lyapunov equations driven by `Â`, with the
/// identities they are supposed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct HatPair {
    pub y_hat: Mat,
    pub x_hat: Mat,
    pub checks: HatChecks,
}

/// Relative gaps `‖a - b‖ / (1 + ‖b‖)` of each identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatChecks {
    pub y11_vs_y_tilde: f64,
    pub y21_vs_psi: f64,
    pub x22_vs_x_tilde: f64,
    pub x21_vs_phi: f64,
    /// `L̂ = -(ŶC2ᵀ + Uᵀ)E1 V11⁻¹ E1ᵀ`
    pub l_hat_rebuild: f64,
    /// `K̂ = -E2 R22⁻¹ E2ᵀ(B2ᵀX̂ + Sᵀ)`
    pub k_hat_rebuild: f64,
    /// Smallest eigenvalues of `Ŷ - Y` and `X̂ - X`.
    pub min_eig_y_gap: f64,
    pub min_eig_x_gap: f64,
}

impl HatChecks {
    pub fn worst_identity(&self) -> f64 {
        [
            self.y11_vs_y_tilde,
            self.y21_vs_psi,
            self.x22_vs_x_tilde,
            self.x21_vs_phi,
            self.l_hat_rebuild,
            self.k_hat_rebuild,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn hat_pair(plant: &TwoPlayerPlant, synth: &SynthesisResult) -> Result<HatPair> {
    let p = &plant.partition;
    let (n1, n2) = (p.n[0], p.n[1]);
    let cc = plant.cost_covariance();
    let ares = &synth.ares;
    let dl = &synth.l_hat - &ares.l;
    let dk = &synth.k_hat - &ares.k;
    let y_gap = solve_lyapunov(&synth.a_hat, &(&dl * &cc.v * dl.transpose()))?;
    let x_gap = solve_lyapunov(&synth.a_hat.transpose(), &(dk.transpose() * &cc.r * &dk))?;
    let y_hat = &ares.y + &y_gap;
    let x_hat = &ares.x + &x_gap;

    let e1 = selector(p.k, 0);
    let e2 = selector(p.m, 1);
    let v11_inv = sub(&cc.v, 0, 0, p.k[0], p.k[0])
        .try_inverse()
        .ok_or(Error::Singular("V11"))?;
    let r22_inv = sub(&cc.r, p.m[0], p.m[0], p.m[1], p.m[1])
        .try_inverse()
        .ok_or(Error::Singular("R22"))?;
    let l_rebuilt =
        -(&y_hat * plant.c2.transpose() + cc.u.transpose()) * &e1 * v11_inv * e1.transpose();
    let k_rebuilt =
        -&e2 * r22_inv * e2.transpose() * (plant.b2.transpose() * &x_hat + cc.s.transpose());

    let checks = HatChecks {
        y11_vs_y_tilde: rel_gap(&sub(&y_hat, 0, 0, n1, n1), &ares.y_tilde),
        y21_vs_psi: rel_gap(&sub(&y_hat, n1, 0, n2, n1), &synth.coupling.psi),
        x22_vs_x_tilde: rel_gap(&sub(&x_hat, n1, n1, n2, n2), &ares.x_tilde),
        x21_vs_phi: rel_gap(&sub(&x_hat, n1, 0, n2, n1), &synth.coupling.phi),
        l_hat_rebuild: rel_gap(&l_rebuilt, &synth.l_hat),
        k_hat_rebuild: rel_gap(&k_rebuilt, &synth.k_hat),
        min_eig_y_gap: min_sym_eigenvalue(&y_gap),
        min_eig_x_gap: min_sym_eigenvalue(&x_gap),
    };
    Ok(HatPair {
        y_hat,
        x_hat,
        checks,
    })
}

/// Controllability Gramian of the closed loop in coordinates
/// `(ζ, ξ - ζ, x - ξ)` and its expected diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianTriple {
    pub theta: Mat,
    /// `A_K Z + Z A_Kᵀ + L̂VL̂ᵀ = 0`
    pub z: Mat,
    /// `Ŷ - Y`
    pub mid: Mat,
    pub y: Mat,
    /// Largest off-diagonal block norm over `‖Θ‖`.
    pub offdiag: f64,
    /// Largest relative gap between a diagonal block of `Θ` and `(Z, Ŷ-Y, Y)`.
    pub diag_gap: f64,
    /// Residual of the `Z` equation over `1 + ‖Z‖`.
    pub z_residual: f64,
}

/// The closed loop `w -> (ζ, ξ - ζ, x - ξ)`.
pub fn error_coordinates_loop(plant: &TwoPlayerPlant, synth: &SynthesisResult) -> StateSpace {
    let n = plant.states();
    let (c2, d21) = (&plant.c2, &plant.d21);
    let l = &synth.ares.l;
    let l_hat = &synth.l_hat;
    let dl = l_hat - l;
    let z = Mat::zeros(n, n);
    let a = vcat(&[
        &hcat(&[&synth.ares.a_k, &(-(l_hat * c2)), &(-(l_hat * c2))]),
        &hcat(&[&z, &synth.a_hat, &(&dl * c2)]),
        &hcat(&[&z, &z, &synth.ares.a_l]),
    ]);
    let b = vcat(&[&(-(l_hat * d21)), &(&dl * d21), &(&plant.b1 + l * d21)]);
    StateSpace {
        c: Mat::identity(3 * n, 3 * n),
        d: Mat::zeros(3 * n, b.ncols()),
        a,
        b,
    }
}

pub fn closed_loop_gramian(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
) -> Result<GramianTriple> {
    let n = plant.states();
    let cc = plant.cost_covariance();
    let sys = error_coordinates_loop(plant, synth);
    let theta = solve_lyapunov(&sys.a, &(&sys.b * sys.b.transpose()))?;
    let lvl = &synth.l_hat * &cc.v * synth.l_hat.transpose();
    let z = solve_lyapunov(&synth.ares.a_k, &lvl)?;
    let dl = &synth.l_hat - &synth.ares.l;
    let mid = solve_lyapunov(&synth.a_hat, &(&dl * &cc.v * dl.transpose()))?;
    let y = synth.ares.y.clone();

    let scale = theta.norm().max(f64::MIN_POSITIVE);
    let mut offdiag: f64 = 0.0;
    let mut diag_gap: f64 = 0.0;
    let expected = [&z, &mid, &y];
    for (i, want) in expected.iter().enumerate() {
        for j in 0..3 {
            let blk = sub(&theta, i * n, j * n, n, n);
            if i == j {
                diag_gap = diag_gap.max(rel_gap(&blk, want));
            } else {
                offdiag = offdiag.max(blk.norm() / scale);
            }
        }
    }
    let a_k = &synth.ares.a_k;
    let z_residual = (a_k * &z + &z * a_k.transpose() + &lvl).norm() / (1.0 + z.norm());
    Ok(GramianTriple {
        theta,
        z,
        mid,
        y,
        offdiag,
        diag_gap,
        z_residual,
    })
}

/// The extra cost of decentralization evaluated three ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaCost {
    /// `‖(Â, (L̂-L)D21, D12(K̂-K), 0)‖²`
    pub norm_form: f64,
    /// `tr((Ŷ-Y)(K̂-K)ᵀR(K̂-K))`
    pub trace_y: f64,
    /// `tr((X̂-X)(L̂-L)V(L̂-L)ᵀ)`
    pub trace_x: f64,
}

impl DeltaCost {
    pub fn values(&self) -> [f64; 3] {
        [self.norm_form, self.trace_y, self.trace_x]
    }

    /// Largest pairwise disagreement over `1 + |Δ|`.
    pub fn spread(&self) -> f64 {
        let v = self.values();
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        (hi - lo) / (1.0 + hi.abs())
    }

    pub fn min(&self) -> f64 {
        self.values().into_iter().fold(f64::MAX, f64::min)
    }
}

pub fn delta_cost(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    hats: &HatPair,
) -> Result<DeltaCost> {
    let cc = plant.cost_covariance();
    let ares = &synth.ares;
    let dl = &synth.l_hat - &ares.l;
    let dk = &synth.k_hat - &ares.k;
    let sys = StateSpace {
        a: synth.a_hat.clone(),
        b: &dl * &plant.d21,
        c: &plant.d12 * &dk,
        d: Mat::zeros(plant.regulated(), plant.disturbances()),
    };
    let (norm_form, _) = h2_norm_squared_pair(&sys)?;
    let trace_y = ((&hats.y_hat - &ares.y) * dk.transpose() * &cc.r * &dk).trace();
    let trace_x = ((&hats.x_hat - &ares.x) * &dl * &cc.v * dl.transpose()).trace();
    Ok(DeltaCost {
        norm_form,
        trace_y,
        trace_x,
    })
}

/// Closed-loop norms of the structured optimum and of the centralized one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormGap {
    pub decentralized: f64,
    pub centralized: f64,
}

impl NormGap {
    pub fn squared_gap(&self) -> f64 {
        self.decentralized.powi(2) - self.centralized.powi(2)
    }
}

pub fn norm_gap(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    tol: &Tolerances,
) -> Result<NormGap> {
    let decentralized = closed_loop_norm(plant, &synth.controller)?;
    let cen = centralized_h2(plant, tol)?;
    let centralized = closed_loop_norm(plant, &cen.controller)?;
    Ok(NormGap {
        decentralized,
        centralized,
    })
}
