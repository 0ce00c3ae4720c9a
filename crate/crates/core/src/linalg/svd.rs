//! One-sided Jacobi SVD.
//!
//! nalgebra's bidiagonal QR divides by the smaller singular value when it
//! finishes on a 2×2 block, so on rank-deficient input (projectors, rank
//! tests) it can return a wrong basis and even a wrong largest singular
//! value. Hestenes' method has no such step and is accurate to rounding
//! relative to each singular value.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, SVD};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `m = U diag(s) Vᴴ` with singular values in descending order.
pub fn jacobi_svd<T: ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
    compute_u: bool,
    compute_v: bool,
) -> SVD<T, Dyn, Dyn> {
    let (rows, cols) = m.shape();
    if rows < cols {
        let s = jacobi_svd(&m.adjoint(), compute_v, compute_u);
        return SVD {
            u: s.v_t.map(|v| v.adjoint()),
            v_t: s.u.map(|u| u.adjoint()),
            singular_values: s.singular_values,
        };
    }
    let mut a = m.clone();
    let mut v = DMatrix::<T>::identity(cols, cols);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.clone().modulus();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate (a_i, phase·a_j) so that the pair becomes orthogonal
                let phase = gamma.conjugate().unscale(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, c, s, &phase);
                rotate(&mut v, i, j, c, s, &phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|k| a.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let singular_values = DVector::from_iterator(cols, order.iter().map(|&k| norms[k]));
    let smax = singular_values.iter().copied().fold(0.0, f64::max);

    let u = compute_u.then(|| {
        let mut u = DMatrix::<T>::zeros(rows, cols);
        let mut filled = Vec::new();
        for (dst, &k) in order.iter().enumerate() {
            if norms[k] > f64::MIN_POSITIVE.max(1e-300 * smax) {
                u.set_column(dst, &a.column(k).unscale(norms[k]));
                filled.push(dst);
            }
        }
        complete_basis(&mut u, &filled);
        u
    });
    let v_t = compute_v.then(|| {
        let mut sorted = DMatrix::<T>::zeros(cols, cols);
        for (dst, &k) in order.iter().enumerate() {
            sorted.set_column(dst, &v.column(k));
        }
        sorted.adjoint()
    });
    SVD {
        u,
        v_t,
        singular_values,
    }
}

fn rotate<T: ComplexField<RealField = f64>>(
    m: &mut DMatrix<T>,
    i: usize,
    j: usize,
    c: f64,
    s: f64,
    phase: &T,
) {
    for r in 0..m.nrows() {
        let x = m[(r, i)].clone();
        let y = m[(r, j)].clone() * phase.clone();
        m[(r, i)] = x.clone().scale(c) - y.clone().scale(s);
        m[(r, j)] = x.scale(s) + y.scale(c);
    }
}

/// Fill the columns of `u` not listed in `filled` with unit vectors
/// orthogonal to everything before them.
fn complete_basis<T: ComplexField<RealField = f64>>(u: &mut DMatrix<T>, filled: &[usize]) {
    let (rows, cols) = u.shape();
    let mut have: Vec<usize> = filled.to_vec();
    let mut candidate = 0;
    for k in 0..cols {
        if filled.contains(&k) {
            continue;
        }
        while candidate < rows {
            let mut e = DVector::<T>::zeros(rows);
            e[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for &h in &have {
                    let proj = u.column(h).dotc(&e);
                    e -= u.column(h) * proj;
                }
            }
            let n = e.norm();
            if n > 0.5 {
                u.set_column(k, &e.unscale(n));
                have.push(k);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    fn check<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) {
        let s = jacobi_svd(m, true, true);
        let u = s.u.clone().unwrap();
        let vt = s.v_t.clone().unwrap();
        let k = s.singular_values.len();
        let sigma = DMatrix::<T>::from_fn(k, k, |i, j| {
            if i == j {
                T::from_real(s.singular_values[i])
            } else {
                T::zero()
            }
        });
        let scale = 1.0 + m.norm();
        assert!((&u * sigma * &vt - m).norm() < 1e-13 * scale);
        assert!((u.adjoint() * &u - DMatrix::<T>::identity(k, k)).norm() < 1e-13);
        assert!((&vt * vt.adjoint() - DMatrix::<T>::identity(k, k)).norm() < 1e-13);
        for w in s.singular_values.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn rank_one_projector() {
        let p = DMatrix::<f64>::from_row_slice(
            2,
            2,
            &[
                -0.008466769368936866,
                -0.28641889410517407,
                0.029811076462533306,
                1.0084667693689369,
            ],
        );
        let s = jacobi_svd(&p, true, false);
        assert!((s.singular_values[0] - p.norm()).abs() < 1e-14);
        assert!(s.singular_values[1] < 1e-15);
        let col = p.column(1) / p.column(1).norm();
        assert!((s.u.as_ref().unwrap().column(0).dot(&col).abs() - 1.0).abs() < 1e-14);
        check(&p);
    }

    #[test]
    fn shapes_and_complex_entries() {
        let tall = DMatrix::from_fn(7, 4, |i, j| ((i * 5 + j * 3) as f64).sin());
        check(&tall);
        check(&tall.transpose());
        let deficient =
            &tall * DMatrix::from_fn(4, 4, |i, j| if j == 3 { 0.0 } else { (i + j) as f64 });
        check(&deficient);
        let c = DMatrix::from_fn(5, 3, |i, j| {
            Complex::new((i as f64 + 0.5 * j as f64).cos(), (i * j) as f64 * 0.1)
        });
        check(&c);
        check(&DMatrix::<f64>::zeros(3, 2));
    }

    #[test]
    fn solve_matches_least_squares() {
        let a = DMatrix::from_fn(6, 3, |i, j| {
            ((i * j) as f64 + 0.3 * (j * j) as f64).sin() + if i == j { 2.0 } else { 0.0 }
        });
        let b = DMatrix::from_fn(6, 1, |i, _| i as f64);
        let x = jacobi_svd(&a, true, true).solve(&b, 1e-14).unwrap();
        let normal = (a.transpose() * &a)
            .lu()
            .solve(&(a.transpose() * &b))
            .unwrap();
        assert!((x - normal).norm() < 1e-10);
    }
}
