use num_complex::Complex64;

use super::{
    complex_schur, eigenvalues, ensure_finite, ensure_square, symmetrize, to_complex, CMat, Mat,
};
use crate::{Error, Result};

/// Unknown count up to which the dense Kronecker system is used.
const KRONECKER_LIMIT: usize = 400;

/// Solve `A1 Ω + Ω A2 + A0 = 0`.
///
/// Small problems go through the Kronecker-vectorized linear system, larger
/// ones through a complex Schur (Bartels-Stewart) back substitution. Either
/// way one step of iterative refinement is applied.
pub fn solve_sylvester(a1: &Mat, a2: &Mat, a0: &Mat) -> Result<Mat> {
    check_operands(a1, a2, a0)?;
    let (p, q) = a0.shape();
    if p == 0 || q == 0 {
        return Ok(Mat::zeros(p, q));
    }
    let solve = |rhs: &Mat| {
        if p * q <= KRONECKER_LIMIT {
            kronecker_solve(a1, a2, rhs)
        } else {
            schur_solve(a1, a2, rhs)
        }
    };
    let mut x = solve(a0)?;
    let r = a1 * &x + &x * a2 + a0;
    if r.norm() > 0.0 {
        x += solve(&r)?;
    }
    Ok(x)
}

/// Dense Kronecker solve, exposed for cross-checking.
pub fn solve_sylvester_kronecker(a1: &Mat, a2: &Mat, a0: &Mat) -> Result<Mat> {
    check_operands(a1, a2, a0)?;
    kronecker_solve(a1, a2, a0)
}

/// Schur-based solve, exposed for cross-checking.
pub fn solve_sylvester_schur(a1: &Mat, a2: &Mat, a0: &Mat) -> Result<Mat> {
    check_operands(a1, a2, a0)?;
    schur_solve(a1, a2, a0)
}

/// Solve `A P + P Aᵀ + Q = 0` and symmetrize.
pub fn solve_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    ensure_square("solve_lyapunov", a)?;
    if q.shape() != a.shape() {
        return Err(Error::shape(
            "solve_lyapunov",
            format!("A is {:?}, Q is {:?}", a.shape(), q.shape()),
        ));
    }
    let p = solve_sylvester(a, &a.transpose(), q)?;
    Ok(symmetrize(&p))
}

fn check_operands(a1: &Mat, a2: &Mat, a0: &Mat) -> Result<()> {
    ensure_square("solve_sylvester", a1)?;
    ensure_square("solve_sylvester", a2)?;
    if a0.nrows() != a1.nrows() || a0.ncols() != a2.nrows() {
        return Err(Error::shape(
            "solve_sylvester",
            format!(
                "A1 {:?}, A2 {:?}, A0 {:?}",
                a1.shape(),
                a2.shape(),
                a0.shape()
            ),
        ));
    }
    ensure_finite("solve_sylvester", a1)?;
    ensure_finite("solve_sylvester", a2)?;
    ensure_finite("solve_sylvester", a0)?;
    if a1.nrows() == 0 || a2.nrows() == 0 {
        return Ok(());
    }
    let l1 = eigenvalues(a1)?;
    let l2 = eigenvalues(a2)?;
    let gap = l1
        .iter()
        .flat_map(|x| l2.iter().map(move |y| (x + y).norm()))
        .fold(f64::INFINITY, f64::min);
    let scale = 1.0f64.max(a1.norm()).max(a2.norm());
    if gap <= 1e-10 * scale {
        return Err(Error::SingularOperator {
            op: "solve_sylvester",
            gap,
        });
    }
    Ok(())
}

fn kronecker_solve(a1: &Mat, a2: &Mat, a0: &Mat) -> Result<Mat> {
    let (p, q) = a0.shape();
    let n = p * q;
    let mut k = Mat::zeros(n, n);
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for c in 0..p {
                k[(row, j * p + c)] += a1[(i, c)];
            }
            for l in 0..q {
                k[(row, l * p + i)] += a2[(l, j)];
            }
        }
    }
    // column-major storage is exactly vec(A0)
    let rhs = nalgebra::DVector::from_column_slice(a0.as_slice()) * -1.0;
    let x = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("solve_sylvester"))?;
    Ok(Mat::from_column_slice(p, q, x.as_slice()))
}

fn schur_solve(a1: &Mat, a2: &Mat, a0: &Mat) -> Result<Mat> {
    let (p, q) = a0.shape();
    let (u, t1) = complex_schur(&to_complex(a1))?;
    let (v, t2) = complex_schur(&to_complex(a2))?;
    let c = u.adjoint() * to_complex(a0) * &v;
    let mut y = CMat::zeros(p, q);
    for j in 0..q {
        let mut rhs: Vec<Complex64> = (0..p).map(|i| -c[(i, j)]).collect();
        for l in 0..j {
            let t = t2[(l, j)];
            if t != Complex64::new(0.0, 0.0) {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= y[(i, l)] * t;
                }
            }
        }
        let shift = t2[(j, j)];
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for k in i + 1..p {
                acc -= t1[(i, k)] * y[(k, j)];
            }
            let piv = t1[(i, i)] + shift;
            if piv.norm() == 0.0 {
                return Err(Error::Singular("solve_sylvester"));
            }
            y[(i, j)] = acc / piv;
        }
    }
    let x = u * y * v.adjoint();
    Ok(x.map(|z| z.re))
}
