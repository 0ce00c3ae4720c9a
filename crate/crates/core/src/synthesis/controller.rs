use std::ops::Range;

use super::{solve_four_ares, solve_phi_psi, AreBundle, CouplingSolution};
use crate::linalg::{h2_norm, hcat, is_hurwitz, spectral_abscissa, sub, vcat, Mat, Tolerances};
use crate::stabilization::{
    closed_loop, exists_centralized_stabilizing, exists_triangular_stabilizing, nominal_gains,
    NominalGains,
};
use crate::sysmodel::{StateSpace, TwoPlayerPlant};
use crate::{Error, Result};

/// Which of the two equivalent controller realizations to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Realization {
    #[default]
    Primary,
    Alternative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub ares: AreBundle,
    pub coupling: CouplingSolution,
    pub k_hat: Mat,
    pub l_hat: Mat,
    /// The `(2,1)` block of `K̂`.
    pub h: Mat,
    /// `A + B2 K̂ + L̂ C2`
    pub a_hat: Mat,
    pub nominal: NominalGains,
    /// States `(ζ, ξ)`: player 1's and player 2's estimates of `x`.
    pub controller: StateSpace,
    pub controller_alt: StateSpace,
}

impl SynthesisResult {
    /// State indices of `ζ` in [`SynthesisResult::controller`].
    pub fn zeta_states(&self) -> Range<usize> {
        0..self.a_hat.nrows()
    }

    /// State indices of `ξ` in [`SynthesisResult::controller`].
    pub fn xi_states(&self) -> Range<usize> {
        let n = self.a_hat.nrows();
        n..2 * n
    }

    pub fn realization(&self, which: Realization) -> &StateSpace {
        match which {
            Realization::Primary => &self.controller,
            Realization::Alternative => &self.controller_alt,
        }
    }
}

/// `K̂ = [0 0; -R22⁻¹(B22ᵀΦ + S12ᵀ), J]`, `L̂ = [M 0; -(ΨC11ᵀ + U12ᵀ)V11⁻¹, 0]`
/// and `H = K̂21`.
pub fn gains_hat(
    plant: &TwoPlayerPlant,
    ares: &AreBundle,
    coupling: &CouplingSolution,
) -> Result<(Mat, Mat, Mat)> {
    let p = &plant.partition;
    let (n1, n2) = (p.n[0], p.n[1]);
    let (m1, m2) = (p.m[0], p.m[1]);
    let (k1, k2) = (p.k[0], p.k[1]);
    let cc = plant.cost_covariance();
    let r22_inv = sub(&cc.r, m1, m1, m2, m2)
        .try_inverse()
        .ok_or(Error::Singular("R22"))?;
    let v11_inv = sub(&cc.v, 0, 0, k1, k1)
        .try_inverse()
        .ok_or(Error::Singular("V11"))?;
    let s12t = sub(&cc.s, 0, m1, n1, m2).transpose();
    let u12t = sub(&cc.u, 0, n1, k1, n2).transpose();
    let c11 = plant.c2_block(0, 0);
    let b22 = plant.b2_block(1, 1);

    let h = -&r22_inv * (b22.transpose() * &coupling.phi + s12t);
    let k_hat = vcat(&[&Mat::zeros(m1, n1 + n2), &hcat(&[&h, &ares.j])]);
    let l21 = -(&coupling.psi * c11.transpose() + u12t) * v11_inv;
    let l_hat = hcat(&[&vcat(&[&ares.m, &l21]), &Mat::zeros(n1 + n2, k2)]);
    Ok((k_hat, l_hat, h))
}

/// Controller with states `(ζ, ξ)`:
/// `[A+B2K+L̂C2, 0; B2K-B2K̂, A+LC2+B2K̂ | -L̂; -L | K-K̂, K̂ | 0]`.
pub fn controller_from_gains(
    plant: &TwoPlayerPlant,
    k: &Mat,
    l: &Mat,
    k_hat: &Mat,
    l_hat: &Mat,
) -> StateSpace {
    let (a, b2, c2) = (&plant.a, &plant.b2, &plant.c2);
    let n = plant.states();
    StateSpace {
        a: vcat(&[
            &hcat(&[&(a + b2 * k + l_hat * c2), &Mat::zeros(n, n)]),
            &hcat(&[&(b2 * k - b2 * k_hat), &(a + l * c2 + b2 * k_hat)]),
        ]),
        b: vcat(&[&(-l_hat), &(-l)]),
        c: hcat(&[&(k - k_hat), k_hat]),
        d: Mat::zeros(k.nrows(), l.ncols()),
    }
}

/// `[A+B2K+L̂C2, 0; LC2-L̂C2, A+LC2+B2K̂ | L̂; L-L̂ | -K, -K̂ | 0]`.
pub fn alternative_from_gains(
    plant: &TwoPlayerPlant,
    k: &Mat,
    l: &Mat,
    k_hat: &Mat,
    l_hat: &Mat,
) -> StateSpace {
    let (a, b2, c2) = (&plant.a, &plant.b2, &plant.c2);
    let n = plant.states();
    StateSpace {
        a: vcat(&[
            &hcat(&[&(a + b2 * k + l_hat * c2), &Mat::zeros(n, n)]),
            &hcat(&[&(l * c2 - l_hat * c2), &(a + l * c2 + b2 * k_hat)]),
        ]),
        b: vcat(&[l_hat, &(l - l_hat)]),
        c: hcat(&[&(-k), &(-k_hat)]),
        d: Mat::zeros(k.nrows(), l.ncols()),
    }
}

/// Full pipeline: structured stabilizability, assumptions, the four Riccati
/// equations, the coupled equations, the gains and both realizations.
pub fn optimal_controller(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<SynthesisResult> {
    let structural = exists_triangular_stabilizing(plant, tol);
    if !structural.pass() {
        return Err(Error::NotStructurallyStabilizable(
            structural.reasons().join("; "),
        ));
    }
    let report = plant.check_assumptions(tol);
    if !report.all_pass() {
        return Err(Error::Assumption(report.failures().join(", ")));
    }
    let ares = solve_four_ares(plant, tol)?;
    let coupling = solve_phi_psi(plant, &ares, tol)?;
    let (k_hat, l_hat, h) = gains_hat(plant, &ares, &coupling)?;
    let a_hat = &plant.a + &plant.b2 * &k_hat + &l_hat * &plant.c2;
    if !is_hurwitz(&a_hat, tol.hurwitz_margin)? {
        return Err(Error::NotHurwitz {
            op: "optimal_controller (A + B2 K̂ + L̂ C2)",
            abscissa: spectral_abscissa(&a_hat)?,
        });
    }
    let nominal = nominal_gains(plant, tol)?;
    let controller = controller_from_gains(plant, &ares.k, &ares.l, &k_hat, &l_hat);
    let controller_alt = alternative_from_gains(plant, &ares.k, &ares.l, &k_hat, &l_hat);
    Ok(SynthesisResult {
        ares,
        coupling,
        k_hat,
        l_hat,
        h,
        a_hat,
        nominal,
        controller,
        controller_alt,
    })
}

/// The unconstrained optimum: observer-based controller and its cost,
/// evaluated by both trace formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedH2 {
    pub controller: StateSpace,
    pub x: Mat,
    pub k: Mat,
    pub y: Mat,
    pub l: Mat,
    /// `tr(XW) + tr(Y KᵀRK)`
    pub norm_sq_control: f64,
    /// `tr(YQ) + tr(X L V Lᵀ)`
    pub norm_sq_filter: f64,
}

impl CentralizedH2 {
    pub fn norm(&self) -> f64 {
        self.norm_sq_control.max(0.0).sqrt()
    }
}

pub fn centralized_h2(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<CentralizedH2> {
    if !exists_centralized_stabilizing(plant, tol) {
        return Err(Error::NotStabilizable);
    }
    let (x, k, _) =
        super::ares::full_control_are(plant, tol).map_err(|e| Error::sub_are("control", e))?;
    let (y, l, _) =
        super::ares::full_filter_are(plant, tol).map_err(|e| Error::sub_are("filter", e))?;
    let cc = plant.cost_covariance();
    let controller = StateSpace {
        a: &plant.a + &plant.b2 * &k + &l * &plant.c2,
        b: -&l,
        c: k.clone(),
        d: Mat::zeros(k.nrows(), l.ncols()),
    };
    let norm_sq_control = (&x * &cc.w).trace() + (&y * k.transpose() * &cc.r * &k).trace();
    let norm_sq_filter = (&y * &cc.q).trace() + (&x * &l * &cc.v * l.transpose()).trace();
    Ok(CentralizedH2 {
        controller,
        x,
        k,
        y,
        l,
        norm_sq_control,
        norm_sq_filter,
    })
}

/// `‖F_l(P, K)‖₂` computed from the closed-loop realization.
pub fn closed_loop_norm(plant: &TwoPlayerPlant, k: &StateSpace) -> Result<f64> {
    h2_norm(&closed_loop(plant, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::fixtures;

    #[test]
    fn decoupled_gains() {
        let p = fixtures::decoupled();
        let r = optimal_controller(&p, &Tolerances::default()).unwrap();
        assert_eq!(r.controller.order(), 4);
        assert!(r.h.norm() == 0.0);
        assert_eq!(r.k_hat[(0, 0)], 0.0);
        assert_eq!(r.k_hat[(0, 1)], 0.0);
        assert_eq!(r.k_hat[(1, 1)], r.ares.j[(0, 0)]);
        assert_eq!(r.l_hat[(0, 0)], r.ares.m[(0, 0)]);
        assert_eq!(r.l_hat.column(1).norm(), 0.0);
        assert_eq!(r.l_hat[(1, 0)], 0.0);
    }

    #[test]
    fn realizations_agree_and_stabilize() {
        let tol = Tolerances::default();
        for p in [fixtures::decoupled(), fixtures::unstable_coupling()] {
            let r = optimal_controller(&p, &tol).unwrap();
            assert!(r.controller.markov_distance(&r.controller_alt).unwrap() < 1e-9);
            assert!(r.controller.is_block_lower_tf(1, 1, 1e-8));
            assert!(crate::stabilization::stabilizes(&p, &r.controller, 1e-9).unwrap());
        }
    }

    #[test]
    fn centralized_trace_formulas_agree() {
        let tol = Tolerances::default();
        for p in [fixtures::decoupled(), fixtures::unstable_coupling()] {
            let c = centralized_h2(&p, &tol).unwrap();
            assert!(
                (c.norm_sq_control - c.norm_sq_filter).abs() < 1e-9 * (1.0 + c.norm_sq_control)
            );
            let direct = closed_loop_norm(&p, &c.controller).unwrap();
            assert!((direct - c.norm()).abs() < 1e-9 * (1.0 + direct));
        }
    }

    #[test]
    fn structural_failure_is_reported() {
        let err =
            optimal_controller(&fixtures::unstabilizable(), &Tolerances::default()).unwrap_err();
        assert!(
            matches!(err, Error::NotStructurallyStabilizable(_)),
            "{err}"
        );
    }
}
