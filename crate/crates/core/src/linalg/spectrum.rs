use num_complex::Complex64;

use super::{ensure_finite, ensure_square, to_complex, CMat, Mat};
use crate::{Error, Result};

/// Iteration budget per eigenvalue.
const SWEEPS_PER_EIGENVALUE: usize = 60;

/// Complex Schur form `A = Q T Qᴴ`, returned as `(Q, T)`.
///
/// Hessenberg reduction followed by single-shift QR with Wilkinson shifts,
/// the Ahues-Tisseur deflation test and periodic exceptional shifts. The
/// QR iteration in nalgebra 0.35 cycles on matrices with many repeated
/// eigenvalues (Kronecker-structured realizations), which is why this exists.
pub fn complex_schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let (mut z, mut h) = a.clone().hessenberg().unpack();
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    let ulp = f64::EPSILON;
    let small = f64::MIN_POSITIVE * (n as f64 / ulp);
    let mut hi = n - 1;
    let mut its = 0usize;
    let budget = SWEEPS_PER_EIGENVALUE * n;
    let mut total = 0usize;
    while hi > 0 {
        let lo = deflation_point(&h, hi, ulp, small);
        if lo > 0 {
            h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
        }
        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        if total > budget {
            return Err(Error::NoConvergence("complex_schur"));
        }
        its += 1;
        let shift = if its.is_multiple_of(10) {
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].re.abs(), 0.0)
        } else if its % 10 == 5 {
            h[(lo, lo)] + Complex64::new(0.75 * h[(lo + 1, lo)].re.abs(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_sweep(&mut h, &mut z, lo, hi, shift);
    }
    Ok((z, h))
}

fn cabs1(x: Complex64) -> f64 {
    x.re.abs() + x.im.abs()
}

/// Largest `k ≤ hi` whose subdiagonal entry is negligible (`0` if none).
fn deflation_point(h: &CMat, hi: usize, ulp: f64, small: f64) -> usize {
    let mut k = hi;
    while k > 0 {
        let sub = cabs1(h[(k, k - 1)]);
        if sub <= small {
            return k;
        }
        let mut tst = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
        if tst == 0.0 {
            if k >= 2 {
                tst += h[(k - 1, k - 2)].re.abs();
            }
            if k < hi {
                tst += h[(k + 1, k)].re.abs();
            }
        }
        if sub <= ulp * tst {
            let ab = sub.max(cabs1(h[(k - 1, k)]));
            let ba = sub.min(cabs1(h[(k - 1, k)]));
            let diff = cabs1(h[(k - 1, k - 1)] - h[(k, k)]);
            let aa = cabs1(h[(k, k)]).max(diff);
            let bb = cabs1(h[(k, k)]).min(diff);
            let s = aa + ab;
            if ba * (ab / s) <= small.max(ulp * (bb * (aa / s))) {
                return k;
            }
        }
        k -= 1;
    }
    0
}

/// Eigenvalue of the trailing 2×2 block of the active window closest to
/// its last diagonal entry.
fn wilkinson_shift(h: &CMat, hi: usize) -> Complex64 {
    let (a, b, c, d) = (
        h[(hi - 1, hi - 1)],
        h[(hi - 1, hi)],
        h[(hi, hi - 1)],
        h[(hi, hi)],
    );
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let r1 = d + half + disc;
    let r2 = d + half - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Unitary `G = [c s; -s̄ c]` with `G [x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    (ax / r, (x / ax) * y.conj() / r)
}

/// One implicit single-shift QR step on rows and columns `lo..=hi`,
/// applied to the full matrix so that `H` stays a Schur-form candidate.
fn qr_sweep(h: &mut CMat, z: &mut CMat, lo: usize, hi: usize, shift: Complex64) {
    let n = h.nrows();
    for k in lo..hi {
        let (x, y) = if k == lo {
            (h[(lo, lo)] - shift, h[(lo + 1, lo)])
        } else {
            (h[(k, k - 1)], h[(k + 1, k - 1)])
        };
        let (c, s) = givens(x, y);
        let first = if k == lo { lo } else { k - 1 };
        for j in first..n {
            let (p, q) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = p * c + s * q;
            h[(k + 1, j)] = -s.conj() * p + q * c;
        }
        if k > lo {
            h[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
        }
        let last = (k + 2).min(hi);
        for i in 0..=last {
            let (p, q) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = p * c + s.conj() * q;
            h[(i, k + 1)] = -s * p + q * c;
        }
        for i in 0..n {
            let (p, q) = (z[(i, k)], z[(i, k + 1)]);
            z[(i, k)] = p * c + s.conj() * q;
            z[(i, k + 1)] = -s * p + q * c;
        }
    }
}

/// Eigenvalues of a real square matrix (unordered).
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    ensure_square("eigenvalues", a)?;
    ensure_finite("eigenvalues", a)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = complex_schur(&to_complex(a))?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Largest real part over the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// True iff every eigenvalue has real part `< -margin`.
pub fn is_hurwitz(a: &Mat, margin: f64) -> Result<bool> {
    Ok(spectral_abscissa(a)? < -margin)
}

/// Matrix sign function by scaled Newton iteration.
///
/// Fails when an eigenvalue sits on the imaginary axis (the iterates lose
/// invertibility or stall).
pub fn matrix_sign(a: &Mat) -> Result<Mat> {
    ensure_square("matrix_sign", a)?;
    ensure_finite("matrix_sign", a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let mut z = a.clone();
    let mut scaling = true;
    let mut last_change = f64::INFINITY;
    for _ in 0..200 {
        let lu = z.clone().lu();
        let log_det: f64 = lu.u().diagonal().iter().map(|d| d.abs().ln()).sum();
        let zinv = lu.try_inverse().ok_or(Error::Singular("matrix_sign"))?;
        let mut c = 1.0;
        if scaling {
            let cand = (-log_det / n as f64).exp();
            if cand.is_finite() && cand > 0.0 {
                c = cand;
            }
        }
        let next = (&z * c + zinv * (1.0 / c)) * 0.5;
        ensure_finite("matrix_sign", &next)?;
        let change = (&next - &z).abs().row_sum().max();
        let size = next.abs().row_sum().max();
        z = next;
        if scaling {
            if change <= 1e-6 * size {
                scaling = false;
            }
            continue;
        }
        // unscaled Newton converges quadratically; stop at the rounding floor
        if change <= 1e-13 * size || change >= last_change {
            let defect = (&z * &z - Mat::identity(n, n)).norm();
            if defect > 1e-6 * size.max(1.0).powi(2) {
                return Err(Error::NoConvergence("matrix_sign"));
            }
            return Ok(z);
        }
        last_change = change;
    }
    Err(Error::NoConvergence("matrix_sign"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_hurwitz() {
        assert!(is_hurwitz(&Mat::from_element(1, 1, -1.0), 0.0).unwrap());
        assert!(!is_hurwitz(&Mat::from_element(1, 1, 1.0), 0.0).unwrap());
    }

    #[test]
    fn damped_oscillator_is_hurwitz() {
        // s^2 + s + 1: real part -1/2
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -1.0]);
        assert!(is_hurwitz(&a, 0.0).unwrap());
        assert!((spectral_abscissa(&a).unwrap() + 0.5).abs() < 1e-12);
        assert!(!is_hurwitz(&a, 0.6).unwrap());
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            is_hurwitz(&Mat::zeros(2, 3), 0.0),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn sign_of_split_spectrum() {
        let a = Mat::from_row_slice(2, 2, &[-1.0, 5.0, 0.0, 2.0]);
        let s = matrix_sign(&a).unwrap();
        assert!((&s * &s - Mat::identity(2, 2)).norm() < 1e-12);
        assert!((s.trace()).abs() < 1e-12);
        // stable eigenvector e1 maps to -e1
        assert!((s[(0, 0)] + 1.0).abs() < 1e-12);
    }

    fn assert_schur(a: &Mat) {
        let ac = to_complex(a);
        let (q, t) = complex_schur(&ac).unwrap();
        let n = a.nrows();
        let scale = 1.0 + a.norm();
        assert!((&q * &t * q.adjoint() - &ac).norm() < 1e-12 * scale);
        assert!((q.adjoint() * &q - CMat::identity(n, n)).norm() < 1e-12 * n as f64);
        for j in 0..n {
            for i in j + 1..n {
                assert_eq!(t[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn schur_of_general_matrix() {
        let a = Mat::from_fn(7, 7, |i, j| {
            ((3 * i + 5 * j) as f64).sin() * (1.0 + i as f64)
        });
        assert_schur(&a);
        let sum: Complex64 = eigenvalues(&a).unwrap().iter().sum();
        assert!((sum - Complex64::new(a.trace(), 0.0)).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn schur_with_highly_repeated_eigenvalues() {
        let block = Mat::from_row_slice(3, 3, &[-0.5, 2.0, 0.0, -2.0, -0.5, 1.0, 0.0, 0.0, -1.0]);
        let kron = Mat::identity(12, 12).kronecker(&block);
        let v = Mat::from_fn(36, 1, |i, _| (i as f64 * 0.37).cos() + 0.2).normalize();
        let house = Mat::identity(36, 36) - &v * v.transpose() * 2.0;
        let a = &house * kron * &house;
        assert_schur(&a);
        let abscissa = spectral_abscissa(&a).unwrap();
        assert!((abscissa + 0.5).abs() < 1e-8, "{abscissa}");
    }
}
