use crate::linalg::{
    h2_norm, hcat, solve_are_with, solve_sylvester, stable_antistable_decompose, vcat, Mat,
    Tolerances,
};
use crate::synthesis::SynthesisResult;
use crate::sysmodel::{selector, StateSpace, TwoPlayerPlant};
use crate::{Error, Result};

/// Steady-state Kalman filter `x̂ = (A_L, [-L, B2], I, 0) [y; u]` for
/// `x' = Ax + B1w + B2u`, `y = C2x + D21w`.
pub fn kalman_filter(
    a: &Mat,
    b1: &Mat,
    b2: &Mat,
    c2: &Mat,
    d21: &Mat,
    tol: &Tolerances,
) -> Result<StateSpace> {
    let s = solve_are_with(
        &a.transpose(),
        &c2.transpose(),
        &b1.transpose(),
        &d21.transpose(),
        tol,
    )
    .map_err(|e| Error::sub_are("filter", e))?;
    let l = s.k.transpose();
    let n = a.nrows();
    Ok(StateSpace {
        a: a + &l * c2,
        b: hcat(&[&(-&l), b2]),
        c: Mat::identity(n, n),
        d: Mat::zeros(n, c2.nrows() + b2.ncols()),
    })
}

/// Kalman filter of the full plant: the `ξ` estimator.
pub fn kalman_estimator(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<StateSpace> {
    kalman_filter(&plant.a, &plant.b1, &plant.b2, &plant.c2, &plant.d21, tol)
}

/// `(Â, [-L̂E1, B2], [I; I; K], 0)`: maps `(y1, u_ζ)` to `(x, ξ, û)`
/// estimates, all equal to `ζ` or `Kζ`.
pub fn zeta_estimator(plant: &TwoPlayerPlant, synth: &SynthesisResult) -> StateSpace {
    let n = plant.states();
    let e1 = selector(plant.partition.k, 0);
    let k = &synth.ares.k;
    let i = Mat::identity(n, n);
    let c = vcat(&[&i, &i, k]);
    StateSpace {
        a: synth.a_hat.clone(),
        b: hcat(&[&(-(&synth.l_hat * e1)), &plant.b2]),
        d: Mat::zeros(c.nrows(), plant.partition.k[0] + plant.partition.controls()),
        c,
    }
}

/// Error and residual maps of both players under the optimal controller.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSystems {
    /// `w -> x - ζ`
    pub e1: StateSpace,
    /// `w -> y1 - C11 ζ1`
    pub r1: StateSpace,
    /// `w -> x - ξ`
    pub e2: StateSpace,
    /// `w -> y - C2 ξ`
    pub r2: StateSpace,
    pub zeta_est: StateSpace,
    pub xi_est: StateSpace,
}

pub fn estimator_systems(
    plant: &TwoPlayerPlant,
    synth: &SynthesisResult,
    tol: &Tolerances,
) -> Result<EstimatorSystems> {
    let p = &plant.partition;
    let n = plant.states();
    let ares = &synth.ares;
    let l = &ares.l;
    let dl = &synth.l_hat - l;
    let bl = &plant.b1 + l * &plant.d21;
    let e2 = StateSpace {
        a: ares.a_l.clone(),
        b: bl.clone(),
        c: Mat::identity(n, n),
        d: Mat::zeros(n, plant.disturbances()),
    };
    let r2 = StateSpace {
        a: ares.a_l.clone(),
        b: bl.clone(),
        c: plant.c2.clone(),
        d: plant.d21.clone(),
    };
    let i = Mat::identity(n, n);
    let e1 = StateSpace {
        a: vcat(&[
            &hcat(&[&synth.a_hat, &(&dl * &plant.c2)]),
            &hcat(&[&Mat::zeros(n, n), &ares.a_l]),
        ]),
        b: vcat(&[&(&dl * &plant.d21), &bl]),
        c: hcat(&[&i, &i]),
        d: Mat::zeros(n, plant.disturbances()),
    };
    let ey = selector(p.k, 0);
    let ex = selector(p.n, 0);
    let front = StateSpace {
        a: ares.a_m.clone(),
        b: &ares.m * ey.transpose() - ex.transpose() * l,
        c: plant.c2_block(0, 0),
        d: ey.transpose(),
    };
    let r1 = front.mul(&r2)?;
    Ok(EstimatorSystems {
        e1,
        r1,
        e2,
        r2,
        zeta_est: zeta_estimator(plant, synth),
        xi_est: kalman_estimator(plant, tol)?,
    })
}

/// Distance of `G` from `H2⊥`: H2 norm of its stable part plus the norm of
/// its feedthrough.
pub fn distance_from_h2_perp(g: &StateSpace, tol: &Tolerances) -> Result<f64> {
    let (stable, _, d) = stable_antistable_decompose(g, tol)?;
    Ok(h2_norm(&stable)? + d.norm())
}

/// Stable part of `G* H` for stable `G` and stable, strictly proper `H`:
/// `(A_h, B_h, D_gᵀC_h + B_gᵀX, 0)` with `A_gᵀX + XA_h + C_gᵀC_h = 0`.
pub fn stable_part_left_adjoint(g: &StateSpace, h: &StateSpace) -> Result<StateSpace> {
    let x = solve_sylvester(&g.a.transpose(), &h.a, &(g.c.transpose() * &h.c))?;
    Ok(StateSpace {
        a: h.a.clone(),
        b: h.b.clone(),
        c: g.d.transpose() * &h.c + g.b.transpose() * x,
        d: Mat::zeros(g.inputs(), h.inputs()),
    })
}

/// Stable part of `H K*` for stable, strictly proper `H` and stable `K`:
/// `(A_h, B_hD_kᵀ + YC_kᵀ, C_h, 0)` with `A_hY + YA_kᵀ + B_hB_kᵀ = 0`.
pub fn stable_part_right_adjoint(h: &StateSpace, k: &StateSpace) -> Result<StateSpace> {
    let y = solve_sylvester(&h.a, &k.a.transpose(), &(&h.b * k.b.transpose()))?;
    Ok(StateSpace {
        a: h.a.clone(),
        b: &h.b * k.d.transpose() + y * k.c.transpose(),
        c: h.c.clone(),
        d: Mat::zeros(h.outputs(), k.outputs()),
    })
}

/// `(‖E1 R1*‖, ‖E2 R2*‖)` measured as distances from `H2⊥`. `E` is strictly
/// proper, so `E R*` has no feedthrough and its stable part is all that
/// can be nonzero.
pub fn orthogonality_residuals(sys: &EstimatorSystems) -> Result<(f64, f64)> {
    let p1 = stable_part_right_adjoint(&sys.e1, &sys.r1)?;
    let p2 = stable_part_right_adjoint(&sys.e2, &sys.r2)?;
    Ok((h2_norm(&p1)?, h2_norm(&p2)?))
}
