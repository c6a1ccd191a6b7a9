//! Orientation and in-sphere predicates.
//!
//! Determinants are evaluated in double precision first. When the result is
//! small relative to the Hadamard bound of the matrix the sign is not trusted
//! and the determinant is recomputed exactly over the rationals (every `f64`
//! is a dyadic rational, so the fallback is exact for the given inputs).

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

const N: usize = super::MAX_DIM + 2;

/// Relative threshold below which the floating-point sign is re-derived
/// exactly. LU with partial pivoting on matrices of order ≤ 6 has a
/// determinant error far below this fraction of the Hadamard bound.
const FILTER: f64 = 1e-10;

type Mat = [[f64; N]; N];

fn det_lu(mut m: Mat, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f != 0.0 {
                for k in col + 1..n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    det
}

fn hadamard(m: &Mat, n: usize) -> f64 {
    (0..n)
        .map(|i| m[i][..n].iter().map(|x| x * x).sum::<f64>().sqrt())
        .product()
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn det_exact(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::from_integer(BigInt::from(1));
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let f = &m[row][col] / &p;
            for k in col + 1..n {
                let delta = &f * &m[col][k];
                m[row][k] -= delta;
            }
        }
    }
    det
}

fn sign_of(det: &BigRational) -> Ordering {
    if det.is_zero() {
        Ordering::Equal
    } else if det.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn float_sign(m: &Mat, n: usize) -> Option<Ordering> {
    let det = det_lu(*m, n);
    let bound = hadamard(m, n);
    if det.is_finite() && bound.is_finite() && det.abs() > FILTER * bound {
        Some(det.partial_cmp(&0.0).unwrap())
    } else {
        None
    }
}

/// Sign of `det[p_i − p_0]_{i=1..d}` for `d + 1` points in ℝᵈ.
pub(crate) fn orient(pts: &[&[f64]]) -> Ordering {
    let d = pts.len() - 1;
    debug_assert!(pts.iter().all(|p| p.len() == d));
    let mut m: Mat = [[0.0; N]; N];
    for i in 0..d {
        for k in 0..d {
            m[i][k] = pts[i + 1][k] - pts[0][k];
        }
    }
    if let Some(s) = float_sign(&m, d) {
        return s;
    }
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| exact(pts[i + 1][k]) - exact(pts[0][k]))
                .collect()
        })
        .collect();
    sign_of(&det_exact(rows))
}

/// Sign of the lifted determinant `det[a_i − q, |a_i − q|²]_{i=0..d}`.
///
/// For a simplex with orientation sign `o`, `q` lies strictly inside the
/// circumsphere iff `insphere · (−1)^d · o > 0`.
pub(crate) fn insphere(simplex: &[&[f64]], q: &[f64]) -> Ordering {
    let d = q.len();
    debug_assert_eq!(simplex.len(), d + 1);
    let mut m: Mat = [[0.0; N]; N];
    for (i, a) in simplex.iter().enumerate() {
        let mut s = 0.0;
        for k in 0..d {
            let diff = a[k] - q[k];
            m[i][k] = diff;
            s += diff * diff;
        }
        m[i][d] = s;
    }
    if let Some(s) = float_sign(&m, d + 1) {
        return s;
    }
    let rows = simplex
        .iter()
        .map(|a| {
            let diffs: Vec<BigRational> = (0..d).map(|k| exact(a[k]) - exact(q[k])).collect();
            let lift = diffs
                .iter()
                .fold(BigRational::zero(), |acc, x| acc + x * x);
            let mut row = diffs;
            row.push(lift);
            row
        })
        .collect();
    sign_of(&det_exact(rows))
}

/// True when `q` is strictly inside the circumsphere of a full-dimensional
/// simplex with orientation sign `orientation`; `None` when `q` is on it.
pub(crate) fn in_circumsphere(simplex: &[&[f64]], orientation: Ordering, q: &[f64]) -> Option<bool> {
    let s = insphere(simplex, q);
    if s == Ordering::Equal {
        return None;
    }
    let d = q.len();
    let mut expected = orientation;
    if d % 2 == 1 {
        expected = expected.reverse();
    }
    Some(s == expected)
}
