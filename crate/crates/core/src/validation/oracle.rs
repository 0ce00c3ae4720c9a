use crate::linalg::{h2_norm, hcat, solve_are_with, vcat, Mat, Tolerances};
use crate::stabilization::ModelMatchData;
use crate::sysmodel::{Partition, StateSpace};
use crate::{Error, Result};

use super::model_match_loop;

/// Default bound on the Kronecker state dimension.
pub const ORACLE_GUARD: usize = 200;

/// Truncation tolerance of the structural reduction.
const REDUCTION_TOL: f64 = 1e-9;

/// `G ⊗ H` as `(G ⊗ I)(I ⊗ H)`.
pub fn kron(g: &StateSpace, h: &StateSpace) -> Result<StateSpace> {
    let lift = |s: &StateSpace, left: usize, right: usize| {
        let il = Mat::identity(left, left);
        let ir = Mat::identity(right, right);
        StateSpace {
            a: il.kronecker(&s.a).kronecker(&ir),
            b: il.kronecker(&s.b).kronecker(&ir),
            c: il.kronecker(&s.c).kronecker(&ir),
            d: il.kronecker(&s.d).kronecker(&ir),
        }
    };
    let outer = lift(g, 1, h.outputs());
    let inner = lift(h, g.inputs(), 1);
    outer.mul(&inner)
}

/// Column-stacking `vec(G)` as a system with one input.
pub fn vectorize(g: &StateSpace) -> Result<StateSpace> {
    let mut cols = (0..g.inputs()).map(|j| g.select(&(0..g.outputs()).collect::<Vec<_>>(), &[j]));
    let first = cols.next().unwrap_or_else(|| StateSpace::zero(0, 1));
    cols.try_fold(first, |acc, c| acc.vstack(&c))
}

/// Optimal `Q` for `min ‖T11 + T12 Q T21‖₂` over stable `Q`, from the
/// stabilizing Riccati solutions of a minimal joint realization.
pub fn centralized_model_match(
    t11: &StateSpace,
    t12: &StateSpace,
    t21: &StateSpace,
    tol: &Tolerances,
) -> Result<StateSpace> {
    if t11.d.iter().any(|&x| x != 0.0) {
        return Err(Error::Feedthrough {
            op: "centralized_model_match (T11)",
        });
    }
    let (nz, nw) = (t11.outputs(), t11.inputs());
    let (nu, ny) = (t12.inputs(), t21.outputs());
    if t12.outputs() != nz || t21.inputs() != nw {
        return Err(Error::shape(
            "centralized_model_match",
            "T11, T12, T21 do not conform",
        ));
    }
    let (o1, o2, o3) = (t11.order(), t12.order(), t21.order());
    let z = |r, c| Mat::zeros(r, c);
    let joint = StateSpace {
        a: vcat(&[
            &hcat(&[&t11.a, &z(o1, o2), &z(o1, o3)]),
            &hcat(&[&z(o2, o1), &t12.a, &z(o2, o3)]),
            &hcat(&[&z(o3, o1), &z(o3, o2), &t21.a]),
        ]),
        b: vcat(&[
            &hcat(&[&t11.b, &z(o1, nu)]),
            &hcat(&[&z(o2, nw), &t12.b]),
            &hcat(&[&t21.b, &z(o3, nu)]),
        ]),
        c: vcat(&[
            &hcat(&[&t11.c, &t12.c, &z(nz, o3)]),
            &hcat(&[&z(ny, o1), &z(ny, o2), &t21.c]),
        ]),
        d: vcat(&[&hcat(&[&z(nz, nw), &t12.d]), &hcat(&[&t21.d, &z(ny, nu)])]),
    }
    .minimal(REDUCTION_TOL)?;
    let n = joint.order();
    let b1 = joint.b.columns(0, nw).into_owned();
    let b2 = joint.b.columns(nw, nu).into_owned();
    let c1 = joint.c.rows(0, nz).into_owned();
    let c2 = joint.c.rows(nz, ny).into_owned();
    let d12 = joint.d.view((0, nw), (nz, nu)).into_owned();
    let d21 = joint.d.view((nz, 0), (ny, nw)).into_owned();
    let ctrl = solve_are_with(&joint.a, &b2, &c1, &d12, tol)
        .map_err(|e| Error::sub_are("model-matching control", e))?;
    let filt = solve_are_with(
        &joint.a.transpose(),
        &c2.transpose(),
        &b1.transpose(),
        &d21.transpose(),
        tol,
    )
    .map_err(|e| Error::sub_are("model-matching filter", e))?;
    let (k, l) = (ctrl.k, filt.k.transpose());
    Ok(StateSpace {
        a: vcat(&[
            &hcat(&[&(&joint.a + &b2 * &k), &(&b2 * &k)]),
            &hcat(&[&z(n, n), &(&joint.a + &l * &c2)]),
        ]),
        b: vcat(&[&z(n, ny), &(-&l)]),
        c: hcat(&[&k, &k]),
        d: z(nu, ny),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Block-lower `Q` recovered from the vectorized problem.
    pub q: StateSpace,
    /// `‖T11 + T12 Q T21‖₂`
    pub norm: f64,
    /// State dimension of the Kronecker system before reduction.
    pub kron_states: usize,
}

/// Positions in `vec(Q)` (column-major, `m × k`) that the structure allows.
pub fn free_entries(partition: &Partition, structured: bool) -> Vec<usize> {
    let m = partition.controls();
    let k = partition.measurements();
    (0..k)
        .flat_map(|j| (0..m).map(move |i| (i, j)))
        .filter(|&(i, j)| !structured || !(i < partition.m[0] && j >= partition.k[0]))
        .map(|(i, j)| j * m + i)
        .collect()
}

/// Solve the structured model-matching problem by vectorization:
/// `min ‖vec T11 + (T21ᵀ ⊗ T12) E q‖₂` is centralized, with `E` dropping the
/// entries of `vec Q` that must vanish. Set `structured = false` to keep
/// every entry.
pub fn vectorization_oracle(
    t: &ModelMatchData,
    partition: &Partition,
    structured: bool,
    guard: usize,
    tol: &Tolerances,
) -> Result<OracleResult> {
    let m = partition.controls();
    let k = partition.measurements();
    let keep = free_entries(partition, structured);
    let mut e = Mat::zeros(m * k, keep.len());
    for (c, &r) in keep.iter().enumerate() {
        e[(r, c)] = 1.0;
    }
    let kron_states = t.t11.order() * t.t11.inputs()
        + t.t21.order() * t.t12.outputs()
        + t.t21.outputs() * t.t12.order();
    if kron_states > guard {
        return Err(Error::SizeGuard {
            what: "Kronecker state dimension",
            size: kron_states,
            limit: guard,
        });
    }
    let vec_t11 = vectorize(&t.t11)?;
    let big = kron(&t.t21.transpose(), &t.t12)?.mul_right(&e)?;
    let one = StateSpace::static_gain(Mat::identity(1, 1));
    let q_vec = centralized_model_match(&vec_t11, &big, &one, tol)?;

    // un-vectorize: Q(i, j) = q[position of j*m + i]
    let (a, b, c) = (&q_vec.a, &q_vec.b, &q_vec.c);
    let nq = a.nrows();
    let mut qc = Mat::zeros(m, k * nq);
    for (r, &idx) in keep.iter().enumerate() {
        let (i, j) = (idx % m, idx / m);
        qc.view_mut((i, j * nq), (1, nq)).copy_from(&c.row(r));
    }
    let ik = Mat::identity(k, k);
    let q = StateSpace {
        a: ik.kronecker(a),
        b: ik.kronecker(b),
        c: qc,
        d: Mat::zeros(m, k),
    }
    .minimal(REDUCTION_TOL)?;
    let norm = h2_norm(&model_match_loop(t, &q)?)?;
    Ok(OracleResult {
        q,
        norm,
        kron_states,
    })
}
