use crate::linalg::{solve_are_with, Mat, Tolerances};
use crate::stabilization::{player1_filter_are, player2_control_are};
use crate::sysmodel::TwoPlayerPlant;
use crate::{Error, Result};

/// Stabilizing solutions of the four Riccati equations and the closed-loop
/// matrices they make Hurwitz.
#[derive(Debug, Clone, PartialEq)]
pub struct AreBundle {
    /// Full-information control: `(X, K)`.
    pub x: Mat,
    pub k: Mat,
    /// Full filter: `(Y, Lᵀ)`.
    pub y: Mat,
    pub l: Mat,
    /// Player-2 control on the `(2,2)` subsystem.
    pub x_tilde: Mat,
    pub j: Mat,
    /// Player-1 filter on the `(1,1)` subsystem.
    pub y_tilde: Mat,
    pub m: Mat,
    /// `A + B2 K`
    pub a_k: Mat,
    /// `A + L C2`
    pub a_l: Mat,
    /// `A22 + B22 J`
    pub a_j: Mat,
    /// `A11 + M C11`
    pub a_m: Mat,
    /// Relative residuals in the order control, filter, player-2, player-1.
    pub residuals: [f64; 4],
}

pub fn full_control_are(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<(Mat, Mat, f64)> {
    let s = solve_are_with(&plant.a, &plant.b2, &plant.c1, &plant.d12, tol)?;
    Ok((s.x, s.k, s.residual))
}

/// Returns `(Y, L, residual)` with `L` already transposed into an injection.
pub fn full_filter_are(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<(Mat, Mat, f64)> {
    let s = solve_are_with(
        &plant.a.transpose(),
        &plant.c2.transpose(),
        &plant.b1.transpose(),
        &plant.d21.transpose(),
        tol,
    )?;
    Ok((s.x, s.k.transpose(), s.residual))
}

pub fn solve_four_ares(plant: &TwoPlayerPlant, tol: &Tolerances) -> Result<AreBundle> {
    let (x, k, r0) = full_control_are(plant, tol).map_err(|e| Error::sub_are("control", e))?;
    let (y, l, r1) = full_filter_are(plant, tol).map_err(|e| Error::sub_are("filter", e))?;
    let p2 = player2_control_are(plant, tol).map_err(|e| Error::sub_are("player-2 control", e))?;
    let p1 = player1_filter_are(plant, tol).map_err(|e| Error::sub_are("player-1 filter", e))?;
    let a_k = &plant.a + &plant.b2 * &k;
    let a_l = &plant.a + &l * &plant.c2;
    let a_j = plant.a_block(1, 1) + plant.b2_block(1, 1) * &p2.k;
    let a_m = plant.a_block(0, 0) + &p1.k * plant.c2_block(0, 0);
    Ok(AreBundle {
        x,
        k,
        y,
        l,
        x_tilde: p2.x,
        j: p2.k,
        y_tilde: p1.x,
        m: p1.k,
        a_k,
        a_l,
        a_j,
        a_m,
        residuals: [r0, r1, p2.residual, p1.residual],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_hurwitz;
    use crate::sysmodel::fixtures;

    #[test]
    fn decoupled_values() {
        let b = solve_four_ares(&fixtures::decoupled(), &Tolerances::default()).unwrap();
        let r2 = 2f64.sqrt() - 1.0;
        let r5 = 5f64.sqrt() - 2.0;
        let expect = Mat::from_row_slice(2, 2, &[r2, 0.0, 0.0, r5]);
        assert!((&b.x - &expect).norm() < 1e-12);
        assert!((&b.y - &expect).norm() < 1e-12);
        assert!((b.x_tilde[(0, 0)] - r5).abs() < 1e-12);
        assert!((b.y_tilde[(0, 0)] - r2).abs() < 1e-12);
        for a in [&b.a_k, &b.a_l, &b.a_j, &b.a_m] {
            assert!(is_hurwitz(a, 0.0).unwrap());
        }
    }

    #[test]
    fn failure_names_the_equation() {
        let mut p = fixtures::decoupled();
        p.d21.fill(0.0);
        let err = solve_four_ares(&p, &Tolerances::default()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::SubAre {
                    which: "filter",
                    ..
                }
            ),
            "{err}"
        );
    }
}
