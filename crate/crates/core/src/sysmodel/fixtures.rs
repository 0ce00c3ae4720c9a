//! Small reference plants used by tests, benches and the CLI examples.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Partition, TwoPlayerPlant};
use crate::linalg::{diag2, hcat, vcat, Mat};

fn m(rows: usize, cols: usize, v: &[f64]) -> Mat {
    Mat::from_row_slice(rows, cols, v)
}

/// Orthonormal completion of a plant given its control channel: `B1 = [I 0]`,
/// `D21 = [0 I]`, `C1 = [I; 0]`, `D12 = [0; I]`.
pub fn complete(a: Mat, b2: Mat, c2: Mat, partition: Partition) -> TwoPlayerPlant {
    let n = a.nrows();
    let mm = b2.ncols();
    let k = c2.nrows();
    let b1 = hcat(&[&Mat::identity(n, n), &Mat::zeros(n, k)]);
    let d21 = hcat(&[&Mat::zeros(k, n), &Mat::identity(k, k)]);
    let c1 = vcat(&[&Mat::identity(n, n), &Mat::zeros(mm, n)]);
    let d12 = vcat(&[&Mat::zeros(n, mm), &Mat::identity(mm, mm)]);
    TwoPlayerPlant::new(a, b1, b2, c1, c2, d12, d21, partition)
        .expect("completed plant is well formed")
}

/// Two stable, fully decoupled scalar players.
pub fn decoupled() -> TwoPlayerPlant {
    complete(
        m(2, 2, &[-1.0, 0.0, 0.0, -2.0]),
        Mat::identity(2, 2),
        Mat::identity(2, 2),
        Partition::new([1, 1], [1, 1], [1, 1]).unwrap(),
    )
}

/// `P22 = [1/(s+1) 0; 1/(s-1) 1/(s+1)]` with its three-state realization and
/// the `n = (2,1)` grouping. Not stabilizable by a block-lower controller.
pub fn unstabilizable() -> TwoPlayerPlant {
    complete(
        m(3, 3, &[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]),
        m(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
        m(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
        Partition::new([2, 1], [1, 1], [1, 1]).unwrap(),
    )
}

/// `P22 = [1/(s-1) 0; 1/(s-1) 1/(s+1)]`, stabilized by `K0 = diag(-2, 0)`.
pub fn stabilizable() -> TwoPlayerPlant {
    complete(
        m(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        Mat::identity(2, 2),
        m(2, 2, &[1.0, 0.0, 1.0, 1.0]),
        Partition::new([1, 1], [1, 1], [1, 1]).unwrap(),
    )
}

/// The static controller that stabilizes [`stabilizable`].
pub fn stabilizable_k0() -> Mat {
    m(2, 2, &[-2.0, 0.0, 0.0, 0.0])
}

/// A coupled plant with an unstable first player, `n = (2,1)`.
pub fn unstable_coupling() -> TwoPlayerPlant {
    let a = m(3, 3, &[0.5, 1.0, 0.0, -1.0, -0.3, 0.0, 0.7, -0.4, -1.5]);
    let b2 = m(3, 2, &[1.0, 0.0, 0.2, 0.0, -0.5, 1.0]);
    let c2 = m(2, 3, &[1.0, 0.0, 0.0, 0.3, -1.0, 1.0]);
    let b1 = m(
        3,
        5,
        &[
            1.0, 0.2, 0.0, 0.0, 0.1, //
            0.0, 0.8, 0.0, 0.3, 0.0, //
            0.1, 0.0, 1.2, 0.0, 0.0,
        ],
    );
    let d21 = m(2, 5, &[0.2, 0.0, 0.0, 1.0, 0.0, 0.0, 0.1, 0.0, 0.4, 0.9]);
    let c1 = m(
        5,
        3,
        &[
            1.0, 0.0, 0.3, //
            0.0, 1.0, 0.0, //
            0.2, 0.0, 1.0, //
            0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0,
        ],
    );
    let d12 = m(5, 2, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.3, 0.0, 1.0]);
    TwoPlayerPlant::new(
        a,
        b1,
        b2,
        c1,
        c2,
        d12,
        d21,
        Partition::new([2, 1], [1, 1], [1, 1]).unwrap(),
    )
    .expect("fixture is well formed")
}

/// Plant whose second measurement carries no state information: `y2` is
/// pure noise independent of everything else, so the second player knows
/// nothing the first does not and the structured optimum equals the
/// centralized one.
pub fn uninformative_second_measurement() -> TwoPlayerPlant {
    let a = m(2, 2, &[0.4, 0.0, 1.0, -1.0]);
    let b2 = m(2, 2, &[1.0, 0.0, 0.5, 1.0]);
    let c2 = m(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let b1 = m(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.3, 1.0, 0.0, 0.0]);
    let d21 = m(2, 4, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let c1 = m(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let d12 = m(4, 2, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    TwoPlayerPlant::new(
        a,
        b1,
        b2,
        c1,
        c2,
        d12,
        d21,
        Partition::new([1, 1], [1, 1], [1, 1]).unwrap(),
    )
    .expect("fixture is well formed")
}

/// One random candidate plant with `m = k = (1,1)` and state split `n`.
/// `A`, `B2`, `C2` are drawn block-lower; `B1`, `D21`, `C1`, `D12` are full
/// with `n + k` disturbances and `n + m` regulated outputs.
pub fn random_candidate<R: Rng>(rng: &mut R, n: [usize; 2]) -> TwoPlayerPlant {
    let partition = Partition::new(n, [1, 1], [1, 1]).expect("non-empty split");
    let nt = n[0] + n[1];
    let mut draw = |rows: usize, cols: usize| {
        Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let mut a = draw(nt, nt);
    let mut b2 = draw(nt, 2);
    let mut c2 = draw(2, nt);
    let nw = nt + 2;
    let nz = nt + 2;
    let b1 = draw(nt, nw) * 0.7;
    let d21 = draw(2, nw);
    let c1 = draw(nz, nt) * 0.7;
    let d12 = draw(nz, 2);
    for i in 0..n[0] {
        for j in n[0]..nt {
            a[(i, j)] = 0.0;
        }
        b2[(i, 1)] = 0.0;
    }
    for j in n[0]..nt {
        c2[(0, j)] = 0.0;
    }
    a *= 0.8;
    TwoPlayerPlant::new(a, b1, b2, c1, c2, d12, d21, partition)
        .expect("random candidate is well formed")
}

/// Random dynamically decoupled candidate: `A21`, the `(2,1)` blocks of `B2`
/// and `C2` vanish, each subsystem and each measurement has its own noise
/// channel (so `W` and `V` are block-diagonal and `U = 0`), and the cost is
/// drawn full.
pub fn random_decoupled_candidate<R: Rng>(rng: &mut R, n: [usize; 2]) -> TwoPlayerPlant {
    let partition = Partition::new(n, [1, 1], [1, 1]).expect("non-empty split");
    let nt = n[0] + n[1];
    let mut draw = |rows: usize, cols: usize| {
        Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let a = diag2(&draw(n[0], n[0]), &draw(n[1], n[1])) * 0.8;
    let b2 = diag2(&draw(n[0], 1), &draw(n[1], 1));
    let c2 = diag2(&draw(1, n[0]), &draw(1, n[1]));
    let g = diag2(&draw(n[0], n[0]), &draw(n[1], n[1])) * 0.7;
    let b1 = hcat(&[&g, &Mat::zeros(nt, 2)]);
    let scales = draw(2, 1).map(|v| 0.5 + v.abs());
    let noise = Mat::from_diagonal(&scales.column(0));
    let d21 = hcat(&[&Mat::zeros(2, nt), &noise]);
    let c1 = draw(nt + 2, nt) * 0.7;
    let d12 = draw(nt + 2, 2);
    TwoPlayerPlant::new(a, b1, b2, c1, c2, d12, d21, partition)
        .expect("random candidate is well formed")
}
