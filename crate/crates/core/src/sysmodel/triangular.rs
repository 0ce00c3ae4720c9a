use super::StateSpace;
use crate::linalg::{controllable_subspace, hcat, orth_complement, sub, Mat};
use crate::{Error, Result};

/// A realization brought into block-lower-triangular coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangularized {
    pub sys: StateSpace,
    pub n: [usize; 2],
    /// New coordinates `z` relate to the old ones by `x = T z`.
    pub t: Mat,
}

/// Find a state split and coordinates in which `A`, `B`, `C`, `D` of a
/// transfer-lower `sys` (outputs split by `k`, inputs by `m`) are all
/// block-lower-triangular.
///
/// Player 2's states span the controllable subspace of the second input
/// block; everything else, including modes neither reachable from player 2's
/// inputs nor visible in player 1's outputs, goes to player 1. A
/// coordinate-aligned subspace yields a permutation; otherwise an orthogonal
/// basis is used. The upper blocks are written as exact zeros.
pub fn triangularize_realization(
    sys: &StateSpace,
    k: [usize; 2],
    m: [usize; 2],
) -> Result<Triangularized> {
    if k[0] + k[1] != sys.outputs() || m[0] + m[1] != sys.inputs() {
        return Err(Error::shape(
            "triangularize_realization",
            format!(
                "splits {k:?}/{m:?} vs {}x{} system",
                sys.outputs(),
                sys.inputs()
            ),
        ));
    }
    if !sys.is_block_lower_tf(k[0], m[0], 1e-9) {
        return Err(Error::NotLowerTriangular);
    }
    let n = sys.order();
    let b_second = sub(&sys.b, 0, m[0], n, m[1]);
    let s = controllable_subspace(&sys.a, &b_second, 1e-9)?;
    let n2 = s.ncols();
    let n1 = n - n2;

    let t = match coordinate_support(&s) {
        Some(second) => {
            let first: Vec<usize> = (0..n).filter(|i| !second.contains(i)).collect();
            let mut t = Mat::zeros(n, n);
            for (col, &row) in first.iter().chain(second.iter()).enumerate() {
                t[(row, col)] = 1.0;
            }
            t
        }
        None => hcat(&[&orth_complement(&s, n), &s]),
    };
    // t is orthogonal in both branches
    let tt = t.transpose();
    let mut a = &tt * &sys.a * &t;
    let mut b = &tt * &sys.b;
    let mut c = &sys.c * &t;
    let scale = 1.0 + sys.a.norm() + sys.b.norm() + sys.c.norm();
    let upper = [
        sub(&a, 0, n1, n1, n2).norm(),
        sub(&b, 0, m[0], n1, m[1]).norm(),
        sub(&c, 0, n1, k[0], n2).norm(),
    ];
    if upper.iter().any(|&x| x > 1e-8 * scale) {
        return Err(Error::NotLowerTriangular);
    }
    a.view_mut((0, n1), (n1, n2)).fill(0.0);
    b.view_mut((0, m[0]), (n1, m[1])).fill(0.0);
    c.view_mut((0, n1), (k[0], n2)).fill(0.0);
    Ok(Triangularized {
        sys: StateSpace {
            a,
            b,
            c,
            d: sys.d.clone(),
        },
        n: [n1, n2],
        t,
    })
}

/// If the orthonormal columns of `s` span a set of coordinate axes, return
/// those axes in increasing order.
fn coordinate_support(s: &Mat) -> Option<Vec<usize>> {
    let mut axes = Vec::new();
    for i in 0..s.nrows() {
        let w = s.row(i).norm();
        if (w - 1.0).abs() <= 1e-10 {
            axes.push(i);
        } else if w > 1e-10 {
            return None;
        }
    }
    (axes.len() == s.ncols()).then_some(axes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::fixtures;

    #[test]
    fn already_triangular_is_kept() {
        let p = fixtures::unstabilizable().p22();
        let tr = triangularize_realization(&p, [1, 1], [1, 1]).unwrap();
        assert_eq!(tr.n, [2, 1]);
        assert_eq!(tr.t, Mat::identity(3, 3));
        assert_eq!(tr.sys, p);
    }

    #[test]
    fn permuted_states_are_recovered() {
        // diag(1/(s+1), 1/(s+2)) with the states listed in reverse
        let sys = StateSpace::new(
            Mat::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -1.0]),
            Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            Mat::zeros(2, 2),
        )
        .unwrap();
        let tr = triangularize_realization(&sys, [1, 1], [1, 1]).unwrap();
        assert_eq!(tr.n, [1, 1]);
        assert_eq!(tr.t, Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(tr.sys.a, Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]));
    }

    #[test]
    fn rotated_realization() {
        let p = fixtures::unstabilizable().p22();
        let c = 0.6f64;
        let s = 0.8f64;
        let rot = Mat::from_row_slice(3, 3, &[c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c]);
        let mixed = p.similarity(&rot).unwrap();
        let tr = triangularize_realization(&mixed, [1, 1], [1, 1]).unwrap();
        assert_eq!(tr.n, [2, 1]);
        assert_eq!(tr.sys.a[(0, 2)], 0.0);
        assert_eq!(tr.sys.a[(1, 2)], 0.0);
        assert_eq!(tr.sys.b[(0, 1)], 0.0);
        assert_eq!(tr.sys.c[(0, 2)], 0.0);
        assert!(tr.sys.markov_distance(&p).unwrap() < 1e-9);
    }

    #[test]
    fn upper_block_rejected() {
        let sys = StateSpace::new(
            Mat::from_element(1, 1, -1.0),
            Mat::from_row_slice(1, 2, &[0.0, 1.0]),
            Mat::from_row_slice(2, 1, &[1.0, 0.0]),
            Mat::zeros(2, 2),
        )
        .unwrap();
        assert!(matches!(
            triangularize_realization(&sys, [1, 1], [1, 1]),
            Err(Error::NotLowerTriangular)
        ));
    }
}
