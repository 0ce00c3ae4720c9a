use std::fmt;

use super::StateSpace;
use crate::linalg::{
    axis_rank_ok, controllable_subspace, hcat, min_sym_eigenvalue, pbh_detectable,
    pbh_stabilizable, sub, vcat, Mat, RankSide, Tolerances,
};
use crate::{Error, Result};

/// Two-player split of states, inputs and measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Partition {
    pub n: [usize; 2],
    pub m: [usize; 2],
    pub k: [usize; 2],
}

impl Partition {
    /// Every block must be non-empty.
    pub fn new(n: [usize; 2], m: [usize; 2], k: [usize; 2]) -> Result<Self> {
        for (name, v) in [("n", n), ("m", m), ("k", k)] {
            if v[0] == 0 || v[1] == 0 {
                return Err(Error::InvalidPlant(format!(
                    "partition {name} = {v:?} has an empty block"
                )));
            }
        }
        Ok(Partition { n, m, k })
    }

    pub fn states(&self) -> usize {
        self.n[0] + self.n[1]
    }

    pub fn controls(&self) -> usize {
        self.m[0] + self.m[1]
    }

    pub fn measurements(&self) -> usize {
        self.k[0] + self.k[1]
    }

    /// Player roles exchanged and inputs/measurements swapped, as needed for
    /// the dual plant.
    pub fn dual(&self) -> Partition {
        Partition {
            n: [self.n[1], self.n[0]],
            m: [self.k[1], self.k[0]],
            k: [self.m[1], self.m[0]],
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n=({},{}) m=({},{}) k=({},{})",
            self.n[0], self.n[1], self.m[0], self.m[1], self.k[0], self.k[1]
        )
    }
}

/// Column selector `E_i` for block `i` of a two-way split.
pub fn selector(split: [usize; 2], i: usize) -> Mat {
    let total = split[0] + split[1];
    let off = if i == 0 { 0 } else { split[0] };
    let mut e = Mat::zeros(total, split[i]);
    for j in 0..split[i] {
        e[(off + j, j)] = 1.0;
    }
    e
}

/// Permutation moving the second block of `split` in front of the first.
pub fn swap_permutation(split: [usize; 2]) -> Mat {
    let total = split[0] + split[1];
    let mut p = Mat::zeros(total, total);
    for i in 0..split[1] {
        p[(i, split[0] + i)] = 1.0;
    }
    for i in 0..split[0] {
        p[(split[1] + i, i)] = 1.0;
    }
    p
}

/// The generalized plant
///
/// ```text
///   x' = A x + B1 w + B2 u
///   z  = C1 x        + D12 u
///   y  = C2 x + D21 w
/// ```
///
/// with `A`, `B2`, `C2` block-lower-triangular under `partition`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPlayerPlant {
    pub a: Mat,
    pub b1: Mat,
    pub b2: Mat,
    pub c1: Mat,
    pub c2: Mat,
    pub d12: Mat,
    pub d21: Mat,
    pub partition: Partition,
}

/// `[Q S; Sᵀ R] = [C1 D12]ᵀ[C1 D12]` and `[W Uᵀ; U V] = [B1; D21][B1; D21]ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCovariance {
    pub q: Mat,
    pub s: Mat,
    pub r: Mat,
    pub w: Mat,
    pub u: Mat,
    pub v: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Check {
            pass,
            detail: detail.into(),
        }
    }
}

/// Outcome of the six standing assumptions plus the minimality warning.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub checks: [Check; 6],
    pub minimal: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Labels `A1`..`A6` of the failing assumptions.
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.pass)
            .map(|(i, _)| format!("A{}", i + 1))
            .collect()
    }
}

impl TwoPlayerPlant {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: Mat,
        b1: Mat,
        b2: Mat,
        c1: Mat,
        c2: Mat,
        d12: Mat,
        d21: Mat,
        partition: Partition,
    ) -> Result<Self> {
        let n = partition.states();
        let m = partition.controls();
        let k = partition.measurements();
        let nw = b1.ncols();
        let nz = c1.nrows();
        let expect = [
            ("A", &a, (n, n)),
            ("B1", &b1, (n, nw)),
            ("B2", &b2, (n, m)),
            ("C1", &c1, (nz, n)),
            ("C2", &c2, (k, n)),
            ("D12", &d12, (nz, m)),
            ("D21", &d21, (k, nw)),
        ];
        for (name, mat, shape) in expect {
            if mat.shape() != shape {
                return Err(Error::InvalidPlant(format!(
                    "{name} is {}x{}, expected {}x{}",
                    mat.nrows(),
                    mat.ncols(),
                    shape.0,
                    shape.1
                )));
            }
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPlant(format!(
                    "{name} has a non-finite entry"
                )));
            }
        }
        let upper = [
            ("A", &a, partition.n, partition.n),
            ("B2", &b2, partition.n, partition.m),
            ("C2", &c2, partition.k, partition.n),
        ];
        for (name, mat, rows, cols) in upper {
            let blk = sub(mat, 0, cols[0], rows[0], cols[1]);
            if blk.iter().any(|&x| x != 0.0) {
                return Err(Error::InvalidPlant(format!(
                    "{name} is not block-lower-triangular (nonzero (1,2) block)"
                )));
            }
        }
        Ok(TwoPlayerPlant {
            a,
            b1,
            b2,
            c1,
            c2,
            d12,
            d21,
            partition,
        })
    }

    pub fn states(&self) -> usize {
        self.partition.states()
    }

    pub fn disturbances(&self) -> usize {
        self.b1.ncols()
    }

    pub fn regulated(&self) -> usize {
        self.c1.nrows()
    }

    fn offsets(split: [usize; 2], i: usize) -> (usize, usize) {
        if i == 0 {
            (0, split[0])
        } else {
            (split[0], split[1])
        }
    }

    /// Block `(i, j)` of `A` (0-based player indices).
    pub fn a_block(&self, i: usize, j: usize) -> Mat {
        let (r0, r) = Self::offsets(self.partition.n, i);
        let (c0, c) = Self::offsets(self.partition.n, j);
        sub(&self.a, r0, c0, r, c)
    }

    pub fn b2_block(&self, i: usize, j: usize) -> Mat {
        let (r0, r) = Self::offsets(self.partition.n, i);
        let (c0, c) = Self::offsets(self.partition.m, j);
        sub(&self.b2, r0, c0, r, c)
    }

    pub fn c2_block(&self, i: usize, j: usize) -> Mat {
        let (r0, r) = Self::offsets(self.partition.k, i);
        let (c0, c) = Self::offsets(self.partition.n, j);
        sub(&self.c2, r0, c0, r, c)
    }

    /// Rows of `B1` for player `i`'s states.
    pub fn b1_rows(&self, i: usize) -> Mat {
        let (r0, r) = Self::offsets(self.partition.n, i);
        sub(&self.b1, r0, 0, r, self.disturbances())
    }

    /// Rows of `D21` for player `i`'s measurements.
    pub fn d21_rows(&self, i: usize) -> Mat {
        let (r0, r) = Self::offsets(self.partition.k, i);
        sub(&self.d21, r0, 0, r, self.disturbances())
    }

    /// Columns of `C1` for player `i`'s states.
    pub fn c1_cols(&self, i: usize) -> Mat {
        let (c0, c) = Self::offsets(self.partition.n, i);
        sub(&self.c1, 0, c0, self.regulated(), c)
    }

    /// Columns of `D12` for player `i`'s inputs.
    pub fn d12_cols(&self, i: usize) -> Mat {
        let (c0, c) = Self::offsets(self.partition.m, i);
        sub(&self.d12, 0, c0, self.regulated(), c)
    }

    pub fn cost_covariance(&self) -> CostCovariance {
        CostCovariance {
            q: self.c1.transpose() * &self.c1,
            s: self.c1.transpose() * &self.d12,
            r: self.d12.transpose() * &self.d12,
            w: &self.b1 * self.b1.transpose(),
            u: &self.d21 * self.b1.transpose(),
            v: &self.d21 * self.d21.transpose(),
        }
    }

    /// The full plant as a state-space system from `[w; u]` to `[z; y]`.
    pub fn to_state_space(&self) -> StateSpace {
        let nz = self.regulated();
        let k = self.partition.measurements();
        let nw = self.disturbances();
        let m = self.partition.controls();
        StateSpace {
            a: self.a.clone(),
            b: hcat(&[&self.b1, &self.b2]),
            c: vcat(&[&self.c1, &self.c2]),
            d: vcat(&[
                &hcat(&[&Mat::zeros(nz, nw), &self.d12]),
                &hcat(&[&self.d21, &Mat::zeros(k, m)]),
            ]),
        }
    }

    /// The control channel `u -> y`.
    pub fn p22(&self) -> StateSpace {
        let k = self.partition.measurements();
        let m = self.partition.controls();
        StateSpace {
            a: self.a.clone(),
            b: self.b2.clone(),
            c: self.c2.clone(),
            d: Mat::zeros(k, m),
        }
    }

    /// Evaluate the six standing assumptions; failures are reported, not
    /// raised.
    pub fn check_assumptions(&self, tol: &Tolerances) -> AssumptionReport {
        let margin = tol.hurwitz_margin;
        let cc = self.cost_covariance();
        let pd = |m: &Mat| {
            let e = min_sym_eigenvalue(m);
            (e > 1e-12 * m.norm().max(1.0), e)
        };
        let (a1, r_min) = pd(&cc.r);
        let (a4, v_min) = pd(&cc.v);
        let yes = |r: Result<bool>| r.unwrap_or(false);

        let stab = [0, 1].map(|i| {
            yes(pbh_stabilizable(
                &self.a_block(i, i),
                &self.b2_block(i, i),
                margin,
            ))
        });
        let det = [0, 1].map(|i| {
            yes(pbh_detectable(
                &self.c2_block(i, i),
                &self.a_block(i, i),
                margin,
            ))
        });
        let a3 = yes(axis_rank_ok(
            &self.a,
            &self.b2,
            &self.c1,
            &self.d12,
            RankSide::Column,
            tol,
        ));
        let a6 = yes(axis_rank_ok(
            &self.a,
            &self.b1,
            &self.c2,
            &self.d21,
            RankSide::Row,
            tol,
        ));

        let pair = |ok: [bool; 2], what: &str| {
            let names = ["(1,1)", "(2,2)"];
            let bad: Vec<&str> = (0..2).filter(|&i| !ok[i]).map(|i| names[i]).collect();
            if bad.is_empty() {
                format!("{what} holds for both diagonal blocks")
            } else {
                format!("{what} fails for block {}", bad.join(" and "))
            }
        };

        let checks = [
            Check::new(a1, format!("D12'D12 min eigenvalue {r_min:.3e}")),
            Check::new(stab[0] && stab[1], pair(stab, "stabilizability")),
            Check::new(a3, "column rank of [A - jwI, B2; C1, D12] on the axis"),
            Check::new(a4, format!("D21 D21' min eigenvalue {v_min:.3e}")),
            Check::new(det[0] && det[1], pair(det, "detectability")),
            Check::new(a6, "row rank of [A - jwI, B1; C2, D21] on the axis"),
        ];

        let n = self.states();
        let rank = |a: &Mat, b: &Mat| {
            controllable_subspace(a, b, tol.rank)
                .map(|v| v.ncols())
                .unwrap_or(0)
        };
        let minimal = rank(&self.a, &hcat(&[&self.b1, &self.b2])) == n
            && rank(
                &self.a.transpose(),
                &vcat(&[&self.c1, &self.c2]).transpose(),
            ) == n;
        AssumptionReport { checks, minimal }
    }

    /// The dual plant: transpose everything and exchange the players so the
    /// result is again block-lower-triangular.
    pub fn dual(&self) -> TwoPlayerPlant {
        let p = &self.partition;
        let pn = swap_permutation(p.n);
        let pm = swap_permutation(p.m);
        let pk = swap_permutation(p.k);
        TwoPlayerPlant {
            a: &pn * self.a.transpose() * pn.transpose(),
            b1: &pn * self.c1.transpose(),
            b2: &pn * self.c2.transpose() * pk.transpose(),
            c1: self.b1.transpose() * pn.transpose(),
            c2: &pm * self.b2.transpose() * pn.transpose(),
            d12: self.d21.transpose() * pk.transpose(),
            d21: &pm * self.d12.transpose(),
            partition: p.dual(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::fixtures;

    #[test]
    fn cost_covariance_of_decoupled_fixture() {
        let cc = fixtures::decoupled().cost_covariance();
        let i2 = Mat::identity(2, 2);
        assert_eq!(cc.q, i2);
        assert_eq!(cc.r, i2);
        assert_eq!(cc.w, i2);
        assert_eq!(cc.v, i2);
        assert!(cc.s.iter().all(|&x| x == 0.0));
        assert!(cc.u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cost_covariance_zero_cost_output() {
        let mut p = fixtures::decoupled();
        p.c1.fill(0.0);
        let cc = p.cost_covariance();
        assert!(cc.q.iter().chain(cc.s.iter()).all(|&x| x == 0.0));
    }

    #[test]
    fn scalar_filter_covariance() {
        let b1 = Mat::from_row_slice(1, 2, &[3.0, 0.0]);
        let d21 = Mat::from_row_slice(1, 2, &[0.0, 1.0]);
        assert_eq!((&b1 * b1.transpose())[(0, 0)], 9.0);
        assert_eq!((&d21 * d21.transpose())[(0, 0)], 1.0);
        assert_eq!((&d21 * b1.transpose())[(0, 0)], 0.0);
    }

    #[test]
    fn decoupled_fixture_passes_all_assumptions() {
        let rep = fixtures::decoupled().check_assumptions(&Tolerances::default());
        assert!(rep.all_pass(), "{rep:?}");
        assert!(rep.minimal);
    }

    #[test]
    fn uncontrollable_unstable_block_fails_a2() {
        let mut p = fixtures::decoupled();
        p.a[(0, 0)] = 1.0;
        p.b2[(0, 0)] = 0.0;
        let rep = p.check_assumptions(&Tolerances::default());
        assert!(!rep.checks[1].pass);
        assert_eq!(rep.failures()[0], "A2");
    }

    #[test]
    fn missing_measurement_noise_fails_a4() {
        let mut p = fixtures::decoupled();
        p.d21.fill(0.0);
        let rep = p.check_assumptions(&Tolerances::default());
        assert!(!rep.checks[3].pass);
    }

    #[test]
    fn rejects_upper_blocks_and_empty_splits() {
        let p = fixtures::decoupled();
        let mut a = p.a.clone();
        a[(0, 1)] = 1.0;
        let err = TwoPlayerPlant::new(
            a,
            p.b1.clone(),
            p.b2.clone(),
            p.c1.clone(),
            p.c2.clone(),
            p.d12.clone(),
            p.d21.clone(),
            p.partition,
        );
        assert!(matches!(err, Err(Error::InvalidPlant(_))));
        assert!(Partition::new([1, 1], [0, 2], [1, 1]).is_err());
    }

    #[test]
    fn dual_is_involutive_and_lower() {
        let p = fixtures::unstable_coupling();
        let d = p.dual();
        let d =
            TwoPlayerPlant::new(d.a, d.b1, d.b2, d.c1, d.c2, d.d12, d.d21, d.partition).unwrap();
        assert_eq!(d.dual(), p);
    }

    #[test]
    fn selectors() {
        let e = selector([2, 1], 1);
        assert_eq!(e.shape(), (3, 1));
        assert_eq!(e[(2, 0)], 1.0);
        let p = swap_permutation([2, 1]);
        let x = Mat::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert_eq!((&p * x).as_slice(), &[3.0, 1.0, 2.0]);
    }
}
