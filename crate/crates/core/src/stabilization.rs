//! Structured stabilization: existence test, nominal block-diagonal gains,
//! the nominal controller and the parameterization of all block-lower
//! stabilizing controllers.

use crate::linalg::{
    diag2, hcat, is_hurwitz, pbh_detectable, pbh_stabilizable, solve_are_with, spectral_abscissa,
    vcat, AreSolution, Mat, Tolerances,
};
use crate::sysmodel::{StateSpace, TwoPlayerPlant};
use crate::{Error, Result};

/// Stabilizability and detectability of the two diagonal triples
/// `(C_ii, A_ii, B_ii)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralReport {
    pub stabilizable: [bool; 2],
    pub detectable: [bool; 2],
}

impl StructuralReport {
    pub fn pass(&self) -> bool {
        self.stabilizable.iter().chain(&self.detectable).all(|&b| b)
    }

    pub fn reasons(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..2 {
            let ii = format!("{0}{0}", i + 1);
            if !self.stabilizable[i] {
                out.push(format!("(A{ii}, B{ii}) is not stabilizable"));
            }
            if !self.detectable[i] {
                out.push(format!("(C{ii}, A{ii}) is not detectable"));
            }
        }
        out
    }
}

pub fn exists_triangular_stabilizing(plant: &TwoPlayerPlant, tol: &Tolerances) -> StructuralReport {
    let margin = tol.hurwitz_margin;
    let yes = |r: Result<bool>| r.unwrap_or(false);
    StructuralReport {
        stabilizable: [0, 1].map(|i| {
            yes(pbh_stabilizable(
                &plant.a_block(i, i),
                &plant.b2_block(i, i),
                margin,
            ))
        }),
        detectable: [0, 1].map(|i| {
            yes(pbh_detectable(
                &plant.c2_block(i, i),
                &plant.a_block(i, i),
                margin,
            ))
        }),
    }
}

/// Whether `(A, B2)` is stabilizable and `(C2, A)` detectable, i.e. some
/// (unstructured) controller stabilizes the plant.
pub fn exists_centralized_stabilizing(plant: &TwoPlayerPlant, tol: &Tolerances) -> bool {
    let m = tol.hurwitz_margin;
    pbh_stabilizable(&plant.a, &plant.b2, m).unwrap_or(false)
        && pbh_detectable(&plant.c2, &plant.a, m).unwrap_or(false)
}

/// Block-diagonal gains `K_d = diag(K1, J)`, `L_d = diag(M, L2)` and the
/// matrices built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalGains {
    pub k1: Mat,
    pub j: Mat,
    pub m: Mat,
    pub l2: Mat,
    pub kd: Mat,
    pub ld: Mat,
    /// `A + B2 K_d`
    pub a_kd: Mat,
    /// `A + L_d C2`
    pub a_ld: Mat,
    /// `C1 + D12 K_d`
    pub c_kd: Mat,
    /// `B1 + L_d D21`
    pub b_ld: Mat,
}

/// Control gain for `(A, B)` from the Riccati equation with weights
/// `(C, D)`; if those weights are degenerate, retry with an identity state
/// penalty stacked on.
fn control_gain(a: &Mat, b: &Mat, c: &Mat, d: &Mat, tol: &Tolerances) -> Result<Mat> {
    match solve_are_with(a, b, c, d, tol) {
        Ok(sol) => Ok(sol.k),
        Err(_) => {
            let n = a.nrows();
            let m = b.ncols();
            let c_aug = vcat(&[c, &Mat::identity(n, n), &Mat::zeros(m, n)]);
            let d_aug = vcat(&[d, &Mat::zeros(n, m), &Mat::identity(m, m)]);
            Ok(solve_are_with(a, b, &c_aug, &d_aug, tol)?.k)
        }
    }
}

/// Player-2 control gain `J` from the Riccati equation on
/// `(A22, B22, C1 E2, D12 E2)`.
pub fn player2_control_are(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<AreSolution> {
    solve_are_with(
        &plant.a_block(1, 1),
        &plant.b2_block(1, 1),
        &plant.c1_cols(1),
        &plant.d12_cols(1),
        tol,
    )
}

/// Player-1 filter Riccati solution; the returned gain is already
/// transposed into the injection `M`.
pub fn player1_filter_are(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<AreSolution> {
    let sol = solve_are_with(
        &plant.a_block(0, 0).transpose(),
        &plant.c2_block(0, 0).transpose(),
        &plant.b1_rows(0).transpose(),
        &plant.d21_rows(0).transpose(),
        tol,
    )?;
    Ok(AreSolution {
        k: sol.k.transpose(),
        ..sol
    })
}

pub fn nominal_gains(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<NominalGains> {
    let j = player2_control_are(plant, tol)
        .map_err(|e| Error::sub_are("player-2 control", e))?
        .k;
    let m = player1_filter_are(plant, tol)
        .map_err(|e| Error::sub_are("player-1 filter", e))?
        .k;
    let k1 = control_gain(
        &plant.a_block(0, 0),
        &plant.b2_block(0, 0),
        &plant.c1_cols(0),
        &plant.d12_cols(0),
        tol,
    )
    .map_err(|e| Error::sub_are("player-1 nominal control", e))?;
    let l2 = control_gain(
        &plant.a_block(1, 1).transpose(),
        &plant.c2_block(1, 1).transpose(),
        &plant.b1_rows(1).transpose(),
        &plant.d21_rows(1).transpose(),
        tol,
    )
    .map_err(|e| Error::sub_are("player-2 nominal filter", e))?
    .transpose();

    let kd = diag2(&k1, &j);
    let ld = diag2(&m, &l2);
    let a_kd = &plant.a + &plant.b2 * &kd;
    let a_ld = &plant.a + &ld * &plant.c2;
    for (op, a) in [
        ("nominal_gains (A + B2 Kd)", &a_kd),
        ("nominal_gains (A + Ld C2)", &a_ld),
    ] {
        if !is_hurwitz(a, tol.hurwitz_margin)? {
            return Err(Error::NotHurwitz {
                op,
                abscissa: spectral_abscissa(a)?,
            });
        }
    }
    Ok(NominalGains {
        c_kd: &plant.c1 + &plant.d12 * &kd,
        b_ld: &plant.b1 + &ld * &plant.d21,
        k1,
        j,
        m,
        l2,
        kd,
        ld,
        a_kd,
        a_ld,
    })
}

/// `K0 = (A + B2 K_d + L_d C2, -L_d, K_d, 0)`.
pub fn nominal_controller(plant: &TwoPlayerPlant, g: &NominalGains) -> StateSpace {
    StateSpace {
        a: &plant.a + &plant.b2 * &g.kd + &g.ld * &plant.c2,
        b: -&g.ld,
        c: g.kd.clone(),
        d: Mat::zeros(g.kd.nrows(), g.ld.ncols()),
    }
}

/// The closed loop `w -> z` under controller `k` (`u = k y`).
pub fn closed_loop(plant: &TwoPlayerPlant, k: &StateSpace) -> Result<StateSpace> {
    plant.to_state_space().lft_lower(k)
}

/// Whether `k` internally stabilizes the plant.
pub fn stabilizes(plant: &TwoPlayerPlant, k: &StateSpace, margin: f64) -> Result<bool> {
    is_hurwitz(&closed_loop(plant, k)?.a, margin)
}

/// Data of the structured parameterization: the coprime factor `J_d`, its
/// inverse, and the model-matching blocks `T11`, `T12`, `T21`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatchData {
    pub t11: StateSpace,
    pub t12: StateSpace,
    pub t21: StateSpace,
    pub jd: StateSpace,
    pub jd_inv: StateSpace,
}

pub fn youla_data(plant: &TwoPlayerPlant, g: &NominalGains) -> ModelMatchData {
    let n = plant.states();
    let m = plant.partition.controls();
    let k = plant.partition.measurements();
    let nz = plant.regulated();
    let nw = plant.disturbances();
    let b2kd = &plant.b2 * &g.kd;
    let t11 = StateSpace {
        a: vcat(&[
            &hcat(&[&g.a_kd, &(-&b2kd)]),
            &hcat(&[&Mat::zeros(n, n), &g.a_ld]),
        ]),
        b: vcat(&[&plant.b1, &g.b_ld]),
        c: hcat(&[&g.c_kd, &(-(&plant.d12 * &g.kd))]),
        d: Mat::zeros(nz, nw),
    };
    let t12 = StateSpace {
        a: g.a_kd.clone(),
        b: plant.b2.clone(),
        c: g.c_kd.clone(),
        d: plant.d12.clone(),
    };
    let t21 = StateSpace {
        a: g.a_ld.clone(),
        b: g.b_ld.clone(),
        c: plant.c2.clone(),
        d: plant.d21.clone(),
    };
    let jd = StateSpace {
        a: &plant.a + &b2kd + &g.ld * &plant.c2,
        b: hcat(&[&(-&g.ld), &plant.b2]),
        c: vcat(&[&g.kd, &(-&plant.c2)]),
        d: vcat(&[
            &hcat(&[&Mat::zeros(m, k), &Mat::identity(m, m)]),
            &hcat(&[&Mat::identity(k, k), &Mat::zeros(k, m)]),
        ]),
    };
    let jd_inv = StateSpace {
        a: plant.a.clone(),
        b: hcat(&[&plant.b2, &(-&g.ld)]),
        c: vcat(&[&plant.c2, &(-&g.kd)]),
        d: vcat(&[
            &hcat(&[&Mat::zeros(k, m), &Mat::identity(k, k)]),
            &hcat(&[&Mat::identity(m, m), &Mat::zeros(m, k)]),
        ]),
    };
    ModelMatchData {
        t11,
        t12,
        t21,
        jd,
        jd_inv,
    }
}

/// `K = F_l(J_d, Q)`.
pub fn controller_from_q(data: &ModelMatchData, q: &StateSpace) -> Result<StateSpace> {
    data.jd.lft_lower(q)
}

/// `Q = F_u(J_d⁻¹, K)`.
pub fn q_from_controller(data: &ModelMatchData, k: &StateSpace) -> Result<StateSpace> {
    data.jd_inv.lft_upper(k)
}
