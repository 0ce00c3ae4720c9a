//! Dense real-matrix kernels.
//!
//! Everything here works on `DMatrix<f64>` at desk scale: spectra and the
//! Hurwitz test, Sylvester/Lyapunov solvers, the stabilizing Riccati
//! solution, rank tests (PBH and imaginary-axis rank), Gramians, H2 norms
//! and the stable/antistable split of a state-space system.

mod blocks;
mod h2;
mod rank;
mod riccati;
mod spectrum;
mod svd;
mod sylvester;

pub use blocks::{block2, diag2, hcat, sub, vcat, zeros};
pub use h2::{
    gramian, gramian_factor, h2_norm, h2_norm_squared_pair, stable_antistable_decompose,
    GramianSide,
};
pub use rank::{
    axis_rank_ok, controllable_subspace, orth, orth_complement, pbh_detectable, pbh_stabilizable,
    RankSide,
};
pub use riccati::{are_residual, solve_are, solve_are_with, AreSolution};
pub use spectrum::{complex_schur, eigenvalues, is_hurwitz, matrix_sign, spectral_abscissa};
pub use sylvester::{
    solve_lyapunov, solve_sylvester, solve_sylvester_kronecker, solve_sylvester_schur,
};

use nalgebra::{ComplexField, DMatrix, SVD};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Numerical thresholds shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative residual bound for matrix-equation solutions.
    pub residual: f64,
    /// A matrix is Hurwitz when every eigenvalue has real part below `-hurwitz_margin`.
    pub hurwitz_margin: f64,
    /// Distance from the imaginary axis at which an invariant zero counts as on it.
    pub axis: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-8,
            hurwitz_margin: 1e-9,
            axis: 1e-7,
            rank: 1e-9,
        }
    }
}

pub(crate) fn ensure_square(op: &'static str, m: &Mat) -> crate::Result<()> {
    if m.nrows() != m.ncols() {
        return Err(crate::Error::NotSquare {
            op,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn ensure_finite(op: &'static str, m: &Mat) -> crate::Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(crate::Error::NonFinite(op))
    }
}

pub(crate) fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub(crate) fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of the symmetric part of `m`, with the same
/// iteration cap and restart policy as [`complex_schur`]. The restart uses
/// a real orthogonal similarity, so the result stays real.
pub(crate) fn symmetric_eigen(m: &Mat) -> nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    let sym = symmetrize(m);
    if let Some(e) = nalgebra::SymmetricEigen::try_new(sym.clone(), f64::EPSILON, 10_000) {
        return e;
    }
    let n = sym.nrows();
    let v = Mat::from_fn(n, 1, |i, _| (i as f64 + 1.0).sin() + 1.5).normalize();
    let h = Mat::identity(n, n) - &v * v.transpose() * 2.0;
    let mut e = symmetrize(&(&h * &sym * &h)).symmetric_eigen();
    e.eigenvectors = h * e.eigenvectors;
    e
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    symmetric_eigen(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest singular value, `0` for an empty column space.
pub(crate) fn min_singular_value_c(m: &CMat) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    svd(m, false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Thin SVD with singular values in descending order; see [`svd::jacobi_svd`]
/// for why nalgebra's own routine is not used.
pub fn svd<T: ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
    u: bool,
    v: bool,
) -> SVD<T, nalgebra::Dyn, nalgebra::Dyn> {
    svd::jacobi_svd(m, u, v)
}
