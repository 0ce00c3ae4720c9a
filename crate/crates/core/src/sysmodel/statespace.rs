use num_complex::Complex64;

use crate::linalg::{
    controllable_subspace, diag2, ensure_finite, hcat, min_singular_value_c, sub, to_complex, vcat,
    CMat, Mat,
};
use crate::{Error, Result};

/// `D + C (sI - A)⁻¹ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl StateSpace {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n
            || b.nrows() != n
            || c.ncols() != n
            || d.nrows() != c.nrows()
            || d.ncols() != b.ncols()
        {
            return Err(Error::shape(
                "StateSpace",
                format!(
                    "A {:?}, B {:?}, C {:?}, D {:?}",
                    a.shape(),
                    b.shape(),
                    c.shape(),
                    d.shape()
                ),
            ));
        }
        for m in [&a, &b, &c, &d] {
            ensure_finite("StateSpace", m)?;
        }
        Ok(StateSpace { a, b, c, d })
    }

    /// Memoryless system `D`.
    pub fn static_gain(d: Mat) -> Self {
        let (p, q) = d.shape();
        StateSpace {
            a: Mat::zeros(0, 0),
            b: Mat::zeros(0, q),
            c: Mat::zeros(p, 0),
            d,
        }
    }

    pub fn zero(outputs: usize, inputs: usize) -> Self {
        Self::static_gain(Mat::zeros(outputs, inputs))
    }

    pub fn identity(size: usize) -> Self {
        Self::static_gain(Mat::identity(size, size))
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    fn expect_io(&self, op: &'static str, outputs: usize, inputs: usize) -> Result<()> {
        if self.outputs() != outputs || self.inputs() != inputs {
            return Err(Error::shape(
                op,
                format!(
                    "expected {outputs}x{inputs} system, got {}x{}",
                    self.outputs(),
                    self.inputs()
                ),
            ));
        }
        Ok(())
    }

    /// Parallel connection `self + other`.
    pub fn add(&self, other: &StateSpace) -> Result<StateSpace> {
        other.expect_io("add", self.outputs(), self.inputs())?;
        Ok(StateSpace {
            a: diag2(&self.a, &other.a),
            b: vcat(&[&self.b, &other.b]),
            c: hcat(&[&self.c, &other.c]),
            d: &self.d + &other.d,
        })
    }

    pub fn sub(&self, other: &StateSpace) -> Result<StateSpace> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: -&self.c,
            d: -&self.d,
        }
    }

    /// Transfer product `self · rhs` (the signal passes through `rhs` first).
    pub fn mul(&self, rhs: &StateSpace) -> Result<StateSpace> {
        if self.inputs() != rhs.outputs() {
            return Err(Error::shape(
                "mul",
                format!("{} inputs vs {} outputs", self.inputs(), rhs.outputs()),
            ));
        }
        let (n1, n2) = (self.order(), rhs.order());
        Ok(StateSpace {
            a: vcat(&[
                &hcat(&[&self.a, &(&self.b * &rhs.c)]),
                &hcat(&[&Mat::zeros(n2, n1), &rhs.a]),
            ]),
            b: vcat(&[&(&self.b * &rhs.d), &rhs.b]),
            c: hcat(&[&self.c, &(&self.d * &rhs.c)]),
            d: &self.d * &rhs.d,
        })
    }

    /// `second · first`: feed the output of `first` into `second`.
    pub fn series(first: &StateSpace, second: &StateSpace) -> Result<StateSpace> {
        second.mul(first)
    }

    /// Constant pre-gain `self · m`.
    pub fn mul_right(&self, m: &Mat) -> Result<StateSpace> {
        if m.nrows() != self.inputs() {
            return Err(Error::shape(
                "mul_right",
                format!("gain {:?} vs {} inputs", m.shape(), self.inputs()),
            ));
        }
        Ok(StateSpace {
            a: self.a.clone(),
            b: &self.b * m,
            c: self.c.clone(),
            d: &self.d * m,
        })
    }

    /// Constant post-gain `m · self`.
    pub fn mul_left(&self, m: &Mat) -> Result<StateSpace> {
        if m.ncols() != self.outputs() {
            return Err(Error::shape(
                "mul_left",
                format!("gain {:?} vs {} outputs", m.shape(), self.outputs()),
            ));
        }
        Ok(StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: m * &self.c,
            d: m * &self.d,
        })
    }

    /// `[G1 G2]`: shared output, stacked inputs.
    pub fn hstack(&self, other: &StateSpace) -> Result<StateSpace> {
        if self.outputs() != other.outputs() {
            return Err(Error::shape("hstack", "output counts differ"));
        }
        Ok(StateSpace {
            a: diag2(&self.a, &other.a),
            b: diag2(&self.b, &other.b),
            c: hcat(&[&self.c, &other.c]),
            d: hcat(&[&self.d, &other.d]),
        })
    }

    /// `[G1; G2]`: shared input, stacked outputs.
    pub fn vstack(&self, other: &StateSpace) -> Result<StateSpace> {
        if self.inputs() != other.inputs() {
            return Err(Error::shape("vstack", "input counts differ"));
        }
        Ok(StateSpace {
            a: diag2(&self.a, &other.a),
            b: vcat(&[&self.b, &other.b]),
            c: diag2(&self.c, &other.c),
            d: vcat(&[&self.d, &other.d]),
        })
    }

    pub fn block_diag(&self, other: &StateSpace) -> StateSpace {
        StateSpace {
            a: diag2(&self.a, &other.a),
            b: diag2(&self.b, &other.b),
            c: diag2(&self.c, &other.c),
            d: diag2(&self.d, &other.d),
        }
    }

    /// Transfer transpose `G(s)ᵀ`.
    pub fn transpose(&self) -> StateSpace {
        StateSpace {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
        }
    }

    /// `G*(s) = G(-s)ᵀ`, realized as `(-Aᵀ, Cᵀ, -Bᵀ, Dᵀ)`.
    pub fn conjugate_transpose(&self) -> StateSpace {
        StateSpace {
            a: -self.a.transpose(),
            b: self.c.transpose(),
            c: -self.b.transpose(),
            d: self.d.transpose(),
        }
    }

    /// Change of state coordinates `x ↦ T x`.
    pub fn similarity(&self, t: &Mat) -> Result<StateSpace> {
        let ti = t
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("similarity"))?;
        Ok(StateSpace {
            a: t * &self.a * &ti,
            b: t * &self.b,
            c: &self.c * ti,
            d: self.d.clone(),
        })
    }

    /// Subsystem from the listed inputs to the listed outputs.
    pub fn select(&self, outputs: &[usize], inputs: &[usize]) -> StateSpace {
        let pick_rows = |m: &Mat| Mat::from_fn(outputs.len(), m.ncols(), |i, j| m[(outputs[i], j)]);
        let pick_cols = |m: &Mat| Mat::from_fn(m.nrows(), inputs.len(), |i, j| m[(i, inputs[j])]);
        StateSpace {
            a: self.a.clone(),
            b: pick_cols(&self.b),
            c: pick_rows(&self.c),
            d: pick_cols(&pick_rows(&self.d)),
        }
    }

    /// Contiguous sub-block: outputs `r0..r0+rows`, inputs `c0..c0+cols`.
    pub fn block(&self, r0: usize, rows: usize, c0: usize, cols: usize) -> StateSpace {
        let o: Vec<usize> = (r0..r0 + rows).collect();
        let i: Vec<usize> = (c0..c0 + cols).collect();
        self.select(&o, &i)
    }

    pub fn eval_at(&self, s: Complex64) -> Result<CMat> {
        let n = self.order();
        if n == 0 {
            return Ok(to_complex(&self.d));
        }
        let m = CMat::identity(n, n) * s - to_complex(&self.a);
        let scale = 1.0 + self.a.norm() + s.norm();
        if min_singular_value_c(&m) <= 1e-13 * scale {
            return Err(Error::Singular("eval_at"));
        }
        let x = m
            .lu()
            .solve(&to_complex(&self.b))
            .ok_or(Error::Singular("eval_at"))?;
        Ok(to_complex(&self.d) + to_complex(&self.c) * x)
    }

    /// `[D, CB, CAB, CA²B, …]`, `count` terms.
    pub fn markov_parameters(&self, count: usize) -> Vec<Mat> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(self.d.clone());
        let mut ab = self.b.clone();
        for _ in 1..count {
            out.push(&self.c * &ab);
            ab = &self.a * ab;
        }
        out
    }

    /// Drop uncontrollable, then unobservable, states by orthogonal
    /// projection onto the controllable (observable) subspace.
    pub fn minimal(&self, rel_tol: f64) -> Result<StateSpace> {
        let v = controllable_subspace(&self.a, &self.b, rel_tol)?;
        let r = StateSpace {
            a: v.transpose() * &self.a * &v,
            b: v.transpose() * &self.b,
            c: &self.c * &v,
            d: self.d.clone(),
        };
        let w = controllable_subspace(&r.a.transpose(), &r.c.transpose(), rel_tol)?;
        Ok(StateSpace {
            a: w.transpose() * &r.a * &w,
            b: w.transpose() * &r.b,
            c: &r.c * &w,
            d: r.d,
        })
    }

    /// Block-lower check on the transfer function: the `(1,2)` block
    /// (outputs `..row_split`, inputs `col_split..`) of `D` and of the first
    /// `2n` Markov parameters must vanish relative to the full parameter.
    pub fn is_block_lower_tf(&self, row_split: usize, col_split: usize, tol: f64) -> bool {
        let count = 2 * self.order() + 1;
        self.markov_parameters(count).iter().all(|m| {
            let blk = sub(m, 0, col_split, row_split, m.ncols() - col_split);
            blk.norm() <= tol * (1.0 + m.norm())
        })
    }

    /// Largest relative Markov-parameter discrepancy between two systems,
    /// over enough terms to pin both transfer functions.
    pub fn markov_distance(&self, other: &StateSpace) -> Result<f64> {
        other.expect_io("markov_distance", self.outputs(), self.inputs())?;
        let count = self.order() + other.order() + 1;
        let a = self.markov_parameters(count);
        let b = other.markov_parameters(count);
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm() / (1.0 + x.norm().max(y.norm())))
            .fold(0.0, f64::max))
    }

    /// Close the lower loop through `k`: `k` maps the last `k.inputs()`
    /// outputs of `self` to its last `k.outputs()` inputs.
    pub fn lft_lower(&self, k: &StateSpace) -> Result<StateSpace> {
        let ny = k.inputs();
        let nu = k.outputs();
        if ny > self.outputs() || nu > self.inputs() {
            return Err(Error::shape("lft_lower", "controller larger than plant"));
        }
        let nz = self.outputs() - ny;
        let nw = self.inputs() - nu;
        let n = self.order();
        let nk = k.order();
        let b1 = sub(&self.b, 0, 0, n, nw);
        let b2 = sub(&self.b, 0, nw, n, nu);
        let c1 = sub(&self.c, 0, 0, nz, n);
        let c2 = sub(&self.c, nz, 0, ny, n);
        let d11 = sub(&self.d, 0, 0, nz, nw);
        let d12 = sub(&self.d, 0, nw, nz, nu);
        let d21 = sub(&self.d, nz, 0, ny, nw);
        let d22 = sub(&self.d, nz, nw, ny, nu);

        let theta = (Mat::identity(nu, nu) - &k.d * &d22)
            .try_inverse()
            .ok_or(Error::IllPosed("lft_lower"))?;
        // u = Uc [x; xk] + Uw w,  y = Yc [x; xk] + Yw w
        let uc = &theta * hcat(&[&(&k.d * &c2), &k.c]);
        let uw = &theta * &k.d * &d21;
        let yc = hcat(&[&c2, &Mat::zeros(ny, nk)]) + &d22 * &uc;
        let yw = &d21 + &d22 * &uw;

        let a = vcat(&[
            &(hcat(&[&self.a, &Mat::zeros(n, nk)]) + &b2 * &uc),
            &(hcat(&[&Mat::zeros(nk, n), &k.a]) + &k.b * &yc),
        ]);
        let b = vcat(&[&(&b1 + &b2 * &uw), &(&k.b * &yw)]);
        let c = hcat(&[&c1, &Mat::zeros(nz, nk)]) + &d12 * &uc;
        let d = &d11 + &d12 * &uw;
        StateSpace::new(a, b, c, d)
    }

    /// Close the upper loop through `k`: `k` maps the first `k.inputs()`
    /// outputs of `self` to its first `k.outputs()` inputs.
    pub fn lft_upper(&self, k: &StateSpace) -> Result<StateSpace> {
        let ny = k.inputs();
        let nu = k.outputs();
        if ny > self.outputs() || nu > self.inputs() {
            return Err(Error::shape("lft_upper", "controller larger than plant"));
        }
        let p = self.outputs();
        let q = self.inputs();
        let outs: Vec<usize> = (ny..p).chain(0..ny).collect();
        let ins: Vec<usize> = (nu..q).chain(0..nu).collect();
        self.select(&outs, &ins).lft_lower(k).map_err(|e| match e {
            Error::IllPosed(_) => Error::IllPosed("lft_upper"),
            other => other,
        })
    }
}
