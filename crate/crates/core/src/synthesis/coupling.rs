use nalgebra::DVector;

use super::AreBundle;
use crate::linalg::{sub, Mat, Tolerances};
use crate::sysmodel::TwoPlayerPlant;
use crate::{Error, Result};

/// Solution `(Φ, Ψ)` of the coupled linear equations, both `n2 × n1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSolution {
    pub phi: Mat,
    pub psi: Mat,
    /// Frobenius norms of the two equation residuals.
    pub residuals: [f64; 2],
}

/// Everything the two equations need, pre-sliced.
struct Terms {
    a_j: Mat,
    a_m: Mat,
    c11: Mat,
    b22: Mat,
    r22_inv: Mat,
    v11_inv: Mat,
    x_gap: Mat,
    y_gap: Mat,
    phi_const: Mat,
    psi_const: Mat,
}

impl Terms {
    fn new(plant: &TwoPlayerPlant, b: &AreBundle) -> Result<Terms> {
        let p = &plant.partition;
        let (n1, n2) = (p.n[0], p.n[1]);
        let (m1, m2) = (p.m[0], p.m[1]);
        let k1 = p.k[0];
        let cc = plant.cost_covariance();
        let a21 = plant.a_block(1, 0);
        let c11 = plant.c2_block(0, 0);
        let b22 = plant.b2_block(1, 1);
        let q21 = sub(&cc.q, n1, 0, n2, n1);
        let s12t = sub(&cc.s, 0, m1, n1, m2).transpose();
        let r22_inv = sub(&cc.r, m1, m1, m2, m2)
            .try_inverse()
            .ok_or(Error::Singular("R22"))?;
        let w21 = sub(&cc.w, n1, 0, n2, n1);
        let u12t = sub(&cc.u, 0, n1, k1, n2).transpose();
        let v11_inv = sub(&cc.v, 0, 0, k1, k1)
            .try_inverse()
            .ok_or(Error::Singular("V11"))?;
        let x21 = sub(&b.x, n1, 0, n2, n1);
        let x22 = sub(&b.x, n1, n1, n2, n2);
        let y11 = sub(&b.y, 0, 0, n1, n1);
        let y21 = sub(&b.y, n1, 0, n2, n1);

        let x_gap = &b.x_tilde - x22;
        let y_gap = &b.y_tilde - y11;
        let phi_const = &b.x_tilde * &a21 + b.j.transpose() * &s12t + q21
            - x21 * &b.m * &c11
            - &x_gap * &u12t * &v11_inv * &c11;
        let psi_const = &a21 * &b.y_tilde + &u12t * b.m.transpose() + w21
            - &b22 * &b.j * y21
            - &b22 * &r22_inv * &s12t * &y_gap;
        Ok(Terms {
            a_j: b.a_j.clone(),
            a_m: b.a_m.clone(),
            x_gap,
            y_gap,
            c11,
            b22,
            r22_inv,
            v11_inv,
            phi_const,
            psi_const,
        })
    }

    /// Linear part of both equations at `(Φ, Ψ)`.
    fn linear(&self, phi: &Mat, psi: &Mat) -> (Mat, Mat) {
        let f = self.a_j.transpose() * phi + phi * &self.a_m
            - &self.x_gap * psi * self.c11.transpose() * &self.v11_inv * &self.c11;
        let g = &self.a_j * psi + psi * self.a_m.transpose()
            - &self.b22 * &self.r22_inv * self.b22.transpose() * phi * &self.y_gap;
        (f, g)
    }

    /// Full left-hand sides at `(Φ, Ψ)`.
    fn eval(&self, phi: &Mat, psi: &Mat) -> (Mat, Mat) {
        let (f, g) = self.linear(phi, psi);
        (f + &self.phi_const, g + &self.psi_const)
    }
}

/// Residual matrices of the two coupled equations at `(Φ, Ψ)`.
pub fn phi_psi_residuals(
    plant: &TwoPlayerPlant,
    bundle: &AreBundle,
    phi: &Mat,
    psi: &Mat,
) -> Result<(Mat, Mat)> {
    Ok(Terms::new(plant, bundle)?.eval(phi, psi))
}

/// The stacked linear system `M [vec Φ; vec Ψ] = rhs`, built by probing the
/// linear part at unit vectors.
pub fn build_phi_psi_system(
    plant: &TwoPlayerPlant,
    bundle: &AreBundle,
) -> Result<(Mat, DVector<f64>)> {
    let t = Terms::new(plant, bundle)?;
    let (n1, n2) = (plant.partition.n[0], plant.partition.n[1]);
    let half = n1 * n2;
    let mut coef = Mat::zeros(2 * half, 2 * half);
    for col in 0..2 * half {
        let mut phi = Mat::zeros(n2, n1);
        let mut psi = Mat::zeros(n2, n1);
        if col < half {
            phi.as_mut_slice()[col] = 1.0;
        } else {
            psi.as_mut_slice()[col - half] = 1.0;
        }
        let (f, g) = t.linear(&phi, &psi);
        coef.view_mut((0, col), (half, 1))
            .copy_from_slice(f.as_slice());
        coef.view_mut((half, col), (half, 1))
            .copy_from_slice(g.as_slice());
    }
    let rhs = -DVector::from_iterator(
        2 * half,
        t.phi_const.iter().chain(t.psi_const.iter()).copied(),
    );
    Ok((coef, rhs))
}

/// Solve the coupled equations: dense LU first, minimum-norm least squares
/// if that is unavailable or inaccurate. Either way the residuals of both
/// equations must come out below tolerance.
pub fn solve_phi_psi(
    plant: &TwoPlayerPlant,
    bundle: &AreBundle,
    tol: &Tolerances,
) -> Result<CouplingSolution> {
    let t = Terms::new(plant, bundle)?;
    let (coef, rhs) = build_phi_psi_system(plant, bundle)?;
    let (n1, n2) = (plant.partition.n[0], plant.partition.n[1]);
    let half = n1 * n2;
    let scale = 1.0 + rhs.norm();
    let unpack = |x: &DVector<f64>| {
        (
            Mat::from_column_slice(n2, n1, &x.as_slice()[..half]),
            Mat::from_column_slice(n2, n1, &x.as_slice()[half..]),
        )
    };
    let attempt = |x: &DVector<f64>| {
        let (phi, psi) = unpack(x);
        let (f, g) = t.eval(&phi, &psi);
        let res = [f.norm(), g.norm()];
        (phi, psi, res)
    };
    let accept = |res: [f64; 2], x: &DVector<f64>| {
        res[0].max(res[1]) <= tol.residual * (scale + coef.norm() * x.norm())
    };

    if let Some(x) = coef.clone().lu().solve(&rhs) {
        let (phi, psi, res) = attempt(&x);
        if accept(res, &x) {
            return Ok(CouplingSolution {
                phi,
                psi,
                residuals: res,
            });
        }
    }
    let svd = crate::linalg::svd(&coef, true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(&rhs, 1e-12 * smax.max(1.0))
        .map_err(|_| Error::IllPosed("solve_phi_psi"))?;
    let (phi, psi, res) = attempt(&x);
    if !accept(res, &x) {
        return Err(Error::Inconsistent {
            residual: res[0].max(res[1]),
        });
    }
    Ok(CouplingSolution {
        phi,
        psi,
        residuals: res,
    })
}
