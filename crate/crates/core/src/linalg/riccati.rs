use super::{
    axis_rank_ok, ensure_finite, ensure_square, hcat, is_hurwitz, matrix_sign, min_sym_eigenvalue,
    pbh_stabilizable, solve_lyapunov, sub, symmetrize, vcat, Mat, RankSide, Tolerances,
};
use crate::{Error, Result};

/// Stabilizing solution `X` of the Riccati equation together with the gain
/// `K = -(DᵀD)⁻¹(BᵀX + DᵀC)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreSolution {
    pub x: Mat,
    pub k: Mat,
    /// `‖ARE(X)‖_F / (1 + ‖X‖_F)`.
    pub residual: f64,
}

/// `AᵀX + XA + CᵀC - (XB + CᵀD)(DᵀD)⁻¹(BᵀX + DᵀC)`.
pub fn are_residual(a: &Mat, b: &Mat, c: &Mat, d: &Mat, x: &Mat) -> Result<Mat> {
    let r = d.transpose() * d;
    let rinv = r.try_inverse().ok_or(Error::Singular("are_residual"))?;
    let s = c.transpose() * d;
    let xbs = x * b + &s;
    Ok(a.transpose() * x + x * a + c.transpose() * c - &xbs * rinv * xbs.transpose())
}

/// [`solve_are_with`] at default tolerances.
pub fn solve_are(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<AreSolution> {
    solve_are_with(a, b, c, d, &Tolerances::default())
}

/// Stabilizing Riccati solution for the data `(A, B, C, D)`.
///
/// The cross term `S = CᵀD` is absorbed into a standard Hamiltonian, whose
/// stable invariant subspace is read off the matrix sign function and then
/// polished with Newton (Kleinman) steps.
pub fn solve_are_with(a: &Mat, b: &Mat, c: &Mat, d: &Mat, tol: &Tolerances) -> Result<AreSolution> {
    ensure_square("solve_are", a)?;
    let n = a.nrows();
    let m = b.ncols();
    if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != m {
        return Err(Error::shape(
            "solve_are",
            format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            ),
        ));
    }
    for mat in [a, b, c, d] {
        ensure_finite("solve_are", mat)?;
    }

    let r = d.transpose() * d;
    let min_eig = min_sym_eigenvalue(&r);
    if m == 0 || min_eig <= 1e-12 * r.norm().max(1.0) {
        return Err(Error::CostNotPositive { min_eig });
    }
    if !pbh_stabilizable(a, b, tol.hurwitz_margin)? {
        return Err(Error::NotStabilizable);
    }
    if !axis_rank_ok(a, b, c, d, RankSide::Column, tol)? {
        return Err(Error::AxisRankDeficient);
    }
    if n == 0 {
        return Ok(AreSolution {
            x: Mat::zeros(0, 0),
            k: Mat::zeros(m, 0),
            residual: 0.0,
        });
    }

    let rinv = symmetrize(
        &r.clone()
            .try_inverse()
            .ok_or(Error::Singular("solve_are"))?,
    );
    let s = c.transpose() * d;
    let at = a - b * &rinv * s.transpose();
    let qt = symmetrize(&(c.transpose() * c - &s * &rinv * s.transpose()));
    let g = symmetrize(&(b * &rinv * b.transpose()));

    let ham = vcat(&[&hcat(&[&at, &(-&g)]), &hcat(&[&(-&qt), &(-at.transpose())])]);
    let w = matrix_sign(&ham).map_err(|e| Error::AreCheck(format!("sign iteration: {e}")))?;
    let eye = Mat::identity(n, n);
    let lhs = vcat(&[&sub(&w, 0, n, n, n), &(sub(&w, n, n, n, n) + &eye)]);
    let rhs = -vcat(&[&(sub(&w, 0, 0, n, n) + &eye), &sub(&w, n, 0, n, n)]);
    let mut x = symmetrize(
        &super::svd(&lhs, true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::AreCheck(e.to_string()))?,
    );

    let raw_residual = |x: &Mat| (at.transpose() * x + x * &at + &qt - x * &g * x).norm();
    let mut res = raw_residual(&x);
    for _ in 0..20 {
        let acl = &at - &g * &x;
        if !is_hurwitz(&acl, 0.0)? {
            break;
        }
        let Ok(next) = solve_lyapunov(&acl.transpose(), &(&qt + &x * &g * &x)) else {
            break;
        };
        let next_res = raw_residual(&next);
        // also stops on NaN
        if next_res.partial_cmp(&res) != Some(std::cmp::Ordering::Less) {
            break;
        }
        let step = (&next - &x).norm();
        x = next;
        res = next_res;
        if step <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }

    let k = -&rinv * (b.transpose() * &x + s.transpose());
    let residual = are_residual(a, b, c, d, &x)?.norm() / (1.0 + x.norm());
    let data_scale = 1.0f64.max(a.norm()).max(qt.norm()).max(g.norm());
    if residual > tol.residual * data_scale {
        return Err(Error::AreCheck(format!("residual {residual:.3e}")));
    }
    let xmin = min_sym_eigenvalue(&x);
    if xmin < -tol.residual * (1.0 + x.norm()) {
        return Err(Error::AreCheck(format!(
            "solution indefinite, min eig {xmin:.3e}"
        )));
    }
    if !is_hurwitz(&(a + b * &k), tol.hurwitz_margin)? {
        return Err(Error::AreCheck("closed loop not Hurwitz".into()));
    }
    Ok(AreSolution { x, k, residual })
}
