use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    blocks::{block2, hcat},
    eigenvalues, ensure_square, min_singular_value_c, to_complex, CMat, Mat, Tolerances,
};
use crate::{Error, Result};

/// Which rank condition of `[A - jωI, B; C, D]` to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSide {
    Column,
    Row,
}

/// Relative threshold on `σ_min([A - λI, B])` below which a mode counts as
/// uncontrollable.
const PBH_TOL: f64 = 1e-8;

/// PBH stabilizability: `rank [A - λI, B] = n` for every eigenvalue with
/// `Re λ ≥ -margin`.
pub fn pbh_stabilizable(a: &Mat, b: &Mat, margin: f64) -> Result<bool> {
    ensure_square("pbh_stabilizable", a)?;
    if b.nrows() != a.nrows() {
        return Err(Error::shape(
            "pbh_stabilizable",
            format!("A is {:?}, B is {:?}", a.shape(), b.shape()),
        ));
    }
    let n = a.nrows();
    let scale = 1.0f64.max(hcat(&[a, b]).norm());
    let ac = to_complex(a);
    let bc = to_complex(b);
    for lambda in eigenvalues(a)? {
        if lambda.re < -margin {
            continue;
        }
        let shifted = &ac - CMat::identity(n, n) * lambda;
        // test the adjoint so the SVD sees a tall matrix
        let pencil = CMat::from_fn(n + b.ncols(), n, |i, j| {
            if i < n {
                shifted[(j, i)].conj()
            } else {
                bc[(j, i - n)].conj()
            }
        });
        if min_singular_value_c(&pencil) <= PBH_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// PBH detectability of `(C, A)`, the dual of [`pbh_stabilizable`].
pub fn pbh_detectable(c: &Mat, a: &Mat, margin: f64) -> Result<bool> {
    if c.ncols() != a.ncols() {
        return Err(Error::shape(
            "pbh_detectable",
            format!("C is {:?}, A is {:?}", c.shape(), a.shape()),
        ));
    }
    pbh_stabilizable(&a.transpose(), &c.transpose(), margin)
}

/// Whether `[A - jωI, B; C, D]` keeps full column (or row) rank for every
/// real ω.
///
/// The finite invariant zeros are the generalized eigenvalues of the pencil
/// `([A B; C D], diag(I, 0))`. The rectangular pencil is squared up with a
/// fixed pseudo-random left factor; spurious eigenvalues that introduces are
/// discarded by re-checking the original pencil's smallest singular value.
/// A pencil whose normal rank is already deficient fails outright.
pub fn axis_rank_ok(
    a: &Mat,
    b: &Mat,
    c: &Mat,
    d: &Mat,
    side: RankSide,
    tol: &Tolerances,
) -> Result<bool> {
    ensure_square("axis_rank_ok", a)?;
    let n = a.nrows();
    if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
        return Err(Error::shape(
            "axis_rank_ok",
            format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            ),
        ));
    }
    match side {
        RankSide::Column => column_rank_on_axis(a, b, c, d, tol),
        RankSide::Row => column_rank_on_axis(
            &a.transpose(),
            &c.transpose(),
            &b.transpose(),
            &d.transpose(),
            tol,
        ),
    }
}

fn column_rank_on_axis(a: &Mat, b: &Mat, c: &Mat, d: &Mat, tol: &Tolerances) -> Result<bool> {
    let n = a.nrows();
    let (p, m) = d.shape();
    if p < m {
        return Ok(false);
    }
    let big = block2(a, b, c, d);
    let scale = 1.0f64.max(big.norm());
    let cols = n + m;
    let e = {
        let mut e = Mat::zeros(n + p, cols);
        for i in 0..n {
            e[(i, i)] = 1.0;
        }
        e
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a515);
    let proj = if p == m {
        Mat::identity(cols, cols)
    } else {
        Mat::from_fn(cols, n + p, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let m_sq = &proj * &big;
    let e_sq = &proj * &e;

    // find a shift where the squared pencil is comfortably regular
    let mut resolvent = None;
    for k in 0..8 {
        let sigma = 0.37 + 1.3 * k as f64 + rng.random::<f64>();
        let shifted = &m_sq - &e_sq * sigma;
        let sv = super::svd(&shifted, false, false).singular_values;
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        if smin > 1e-10 * smax.max(1.0) {
            let inv = shifted
                .try_inverse()
                .ok_or(Error::Singular("axis_rank_ok"))?;
            resolvent = Some((sigma, inv * &e_sq));
            break;
        }
    }
    let Some((sigma, g)) = resolvent else {
        // singular for every shift: normal rank below full
        return Ok(false);
    };

    let bigc = to_complex(&big);
    let ec = to_complex(&e);
    for mu in eigenvalues(&g)? {
        if mu.norm() <= 1e-12 {
            continue; // infinite zero
        }
        let lambda = Complex64::new(sigma, 0.0) + mu.inv();
        if lambda.re.abs() > tol.axis * (1.0 + lambda.norm()) {
            continue;
        }
        let pencil = &bigc - &ec * lambda;
        if min_singular_value_c(&pencil) <= 1e-8 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Orthonormal basis for the range of `m`, with rank decided at
/// `rel_tol · max(σ_max, 1)`. Each basis vector is sign-normalized so that its
/// largest-magnitude entry is positive.
pub fn orth(m: &Mat, rel_tol: f64) -> Mat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Mat::zeros(rows, 0);
    }
    let svd = super::svd(m, true, false);
    let u = svd.u.expect("svd with u");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thresh = rel_tol * smax.max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thresh)
        .collect();
    let mut out = Mat::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    normalize_signs(&mut out);
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `v` (in `R^n`).
pub fn orth_complement(v: &Mat, n: usize) -> Mat {
    let r = v.ncols();
    if r == 0 {
        return Mat::identity(n, n);
    }
    if r >= n {
        return Mat::zeros(n, 0);
    }
    let proj = Mat::identity(n, n) - v * v.transpose();
    let eig = crate::linalg::symmetric_eigen(&proj);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut out = Mat::zeros(n, n - r);
    for (k, &i) in idx.iter().take(n - r).enumerate() {
        out.set_column(k, &eig.eigenvectors.column(i));
    }
    // re-orthonormalize against v to clean up rounding
    let out = orth(&(&out - v * (v.transpose() * &out)), 1e-6);
    debug_assert_eq!(out.ncols(), n - r);
    out
}

fn normalize_signs(m: &mut Mat) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for x in col.iter() {
            if x.abs() > best + 1e-12 {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            col *= -1.0;
        }
    }
}

/// Orthonormal basis of the controllable subspace of `(A, B)`, built by a
/// staircase: each step maps the newest block through `A`, projects out the
/// span found so far and keeps the directions above `rel_tol` after scaling
/// by `max(1, ‖A‖, ‖B‖)`.
pub fn controllable_subspace(a: &Mat, b: &Mat, rel_tol: f64) -> Result<Mat> {
    ensure_square("controllable_subspace", a)?;
    let n = a.nrows();
    if b.nrows() != n {
        return Err(Error::shape(
            "controllable_subspace",
            format!("A is {:?}, B is {:?}", a.shape(), b.shape()),
        ));
    }
    let scale = 1.0f64.max(a.norm()).max(b.norm());
    let mut v = orth(&(b / scale), rel_tol);
    let mut newest = v.clone();
    // staircase: only the directions added last can produce new ones
    while v.ncols() < n && newest.ncols() > 0 {
        let mut w = a * &newest / scale;
        for _ in 0..2 {
            w -= &v * (v.transpose() * &w);
        }
        newest = orth(&w, rel_tol);
        if newest.ncols() > 0 {
            newest -= &v * (v.transpose() * &newest);
            newest = orth(&newest, 0.5);
            v = hcat(&[&v, &newest]);
        }
    }
    Ok(v)
}
