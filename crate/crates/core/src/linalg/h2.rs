use num_complex::Complex64;

use super::{
    complex_schur, eigenvalues, is_hurwitz, matrix_sign, solve_lyapunov, spectral_abscissa, sub,
    to_complex, CMat, Mat, Tolerances,
};
use crate::sysmodel::StateSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramianSide {
    Controllability,
    Observability,
}

/// Controllability (`AW + WAᵀ + BBᵀ = 0`) or observability
/// (`AᵀW + WA + CᵀC = 0`) Gramian of a stable system.
pub fn gramian(sys: &StateSpace, side: GramianSide) -> Result<Mat> {
    ensure_stable("gramian", &sys.a)?;
    match side {
        GramianSide::Controllability => solve_lyapunov(&sys.a, &(&sys.b * sys.b.transpose())),
        GramianSide::Observability => {
            solve_lyapunov(&sys.a.transpose(), &(sys.c.transpose() * &sys.c))
        }
    }
}

/// H2 norm of a stable, strictly proper system, evaluated as `‖C S‖_F`
/// with `S` a square-root factor of the controllability Gramian. Going
/// through the factor keeps small norms accurate to working precision
/// instead of its square root.
pub fn h2_norm(sys: &StateSpace) -> Result<f64> {
    if sys.d.iter().any(|&x| x != 0.0) {
        return Err(Error::Feedthrough { op: "h2_norm" });
    }
    if sys.order() == 0 || sys.outputs() == 0 || sys.inputs() == 0 {
        return Ok(0.0);
    }
    ensure_stable("h2_norm", &sys.a)?;
    let s = gramian_factor(&sys.a, &sys.b)?;
    Ok((to_complex(&sys.c) * s).norm())
}

/// `S` with `S Sᴴ = W` and `AW + WAᵀ + BBᵀ = 0`, for Hurwitz `A`.
///
/// Hammarling's recursion on the complex Schur form: with
/// `T = [T1 t; 0 λ]` and `B̃ = [B1; bᴴ]`, the last row of the triangular
/// factor is `ν = ‖b‖/√(-2 Re λ)`, `u = -(T1 + λ̄)⁻¹(tν² + B1 b)/ν`, and the
/// leading block solves the same problem with `B1 - u bᴴ/ν`.
pub fn gramian_factor(a: &Mat, b: &Mat) -> Result<CMat> {
    let n = a.nrows();
    let (q, t) = complex_schur(&to_complex(a))?;
    let mut rhs = q.adjoint() * to_complex(b);
    let mut u = CMat::zeros(n, n);
    for k in (0..n).rev() {
        let lambda = t[(k, k)];
        if lambda.re >= 0.0 {
            return Err(Error::NotHurwitz {
                op: "gramian_factor",
                abscissa: lambda.re,
            });
        }
        let last: Vec<Complex64> = rhs.row(k).iter().map(|x| x.conj()).collect();
        let bnorm = last.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let nu = bnorm / (-2.0 * lambda.re).sqrt();
        u[(k, k)] = Complex64::new(nu, 0.0);
        if nu == 0.0 || k == 0 {
            continue;
        }
        // (T1 + λ̄) x = -(t ν² + B1 b) by back substitution
        let mut x: Vec<Complex64> = (0..k)
            .map(|i| {
                let b1b: Complex64 = (0..last.len()).map(|j| rhs[(i, j)] * last[j]).sum();
                -(t[(i, k)] * nu * nu + b1b)
            })
            .collect();
        for i in (0..k).rev() {
            let mut acc = x[i];
            for j in i + 1..k {
                acc -= t[(i, j)] * x[j];
            }
            x[i] = acc / (t[(i, i)] + lambda.conj());
        }
        for i in 0..k {
            let ui = x[i] / nu;
            u[(i, k)] = ui;
            for (j, bj) in last.iter().enumerate() {
                rhs[(i, j)] -= ui * bj.conj() / nu;
            }
        }
    }
    Ok(q * u)
}

/// Squared H2 norm computed twice: `tr(C Wc Cᵀ)` and `tr(Bᵀ Wo B)`.
pub fn h2_norm_squared_pair(sys: &StateSpace) -> Result<(f64, f64)> {
    if sys.d.iter().any(|&x| x != 0.0) {
        return Err(Error::Feedthrough { op: "h2_norm" });
    }
    if sys.order() == 0 {
        return Ok((0.0, 0.0));
    }
    let wc = gramian(sys, GramianSide::Controllability)?;
    let wo = gramian(sys, GramianSide::Observability)?;
    let from_c = (&sys.c * wc * sys.c.transpose()).trace();
    let from_o = (sys.b.transpose() * wo * &sys.b).trace();
    Ok((from_c, from_o))
}

fn ensure_stable(op: &'static str, a: &Mat) -> Result<()> {
    if !is_hurwitz(a, 0.0)? {
        return Err(Error::NotHurwitz {
            op,
            abscissa: spectral_abscissa(a)?,
        });
    }
    Ok(())
}

/// Split `sys` additively into a stable part, an antistable part and the
/// feedthrough.
///
/// The spectral projector `(I - sign(A))/2` gives the stable invariant
/// subspace; in the adapted basis the realization is block-diagonalized and
/// the cross blocks are set to exact zeros.
pub fn stable_antistable_decompose(
    sys: &StateSpace,
    tol: &Tolerances,
) -> Result<(StateSpace, StateSpace, Mat)> {
    let n = sys.order();
    let (p, q) = sys.d.shape();
    if n == 0 {
        return Ok((
            StateSpace::zero(p, q),
            StateSpace::zero(p, q),
            sys.d.clone(),
        ));
    }
    for l in eigenvalues(&sys.a)? {
        if l.re.abs() <= tol.axis * (1.0 + l.norm()) {
            return Err(Error::NearAxis {
                op: "stable_antistable_decompose",
                re: l.re,
                tol: tol.axis,
            });
        }
    }
    let sign = matrix_sign(&sys.a)?;
    let eye = Mat::identity(n, n);
    let ps = (&eye - &sign) * 0.5;
    let pa = (&eye + &sign) * 0.5;
    let r = ps.trace().round().clamp(0.0, n as f64) as usize;
    let vs = leading_left_singular(&ps, r);
    let va = leading_left_singular(&pa, n - r);
    let t = super::hcat(&[&vs, &va]);
    let ti = t
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("stable_antistable_decompose"))?;
    let at = &ti * &sys.a * &t;
    let bt = &ti * &sys.b;
    let ct = &sys.c * &t;
    let stable = StateSpace::new(
        sub(&at, 0, 0, r, r),
        sub(&bt, 0, 0, r, q),
        sub(&ct, 0, 0, p, r),
        Mat::zeros(p, q),
    )?;
    let anti = StateSpace::new(
        sub(&at, r, r, n - r, n - r),
        sub(&bt, r, 0, n - r, q),
        sub(&ct, 0, r, p, n - r),
        Mat::zeros(p, q),
    )?;
    if r > 0 {
        ensure_stable("stable_antistable_decompose", &stable.a)?;
    }
    if r < n {
        ensure_stable("stable_antistable_decompose", &(-&anti.a))?;
    }
    Ok((stable, anti, sys.d.clone()))
}

fn leading_left_singular(m: &Mat, r: usize) -> Mat {
    let n = m.nrows();
    if r == 0 {
        return Mat::zeros(n, 0);
    }
    let svd = super::svd(m, true, false);
    let u = svd.u.expect("svd with u");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = Mat::zeros(n, r);
    for (k, &i) in idx.iter().take(r).enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}
