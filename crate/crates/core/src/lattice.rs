//! Integer lattice kernels, Hermite normal form and unimodular completion.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Replaces rows `p` and `r` by a unimodular combination so that column `c`
/// of row `r` becomes zero and row `p` carries the gcd.
fn eliminate_rows(rows: &mut [Vec<BigInt>], p: usize, r: usize, c: usize) {
    let a = rows[p][c].clone();
    let b = rows[r][c].clone();
    if b.is_zero() {
        return;
    }
    let e = a.extended_gcd(&b);
    let (g, s, t) = (e.gcd, e.x, e.y);
    let a_g = &a / &g;
    let b_g = &b / &g;
    let width = rows[p].len();
    for k in 0..width {
        let vp = rows[p][k].clone();
        let vr = rows[r][k].clone();
        rows[p][k] = &s * &vp + &t * &vr;
        rows[r][k] = &a_g * &vr - &b_g * &vp;
    }
}

fn negate_row(row: &mut [BigInt]) {
    for v in row.iter_mut() {
        *v = -v.clone();
    }
}

/// Reduces the first `cols` columns of `rows` to row echelon form by unimodular
/// row operations, returning the number of pivot rows.
fn echelon(rows: &mut [Vec<BigInt>], cols: usize) -> usize {
    let mut pivot = 0;
    for c in 0..cols {
        if pivot == rows.len() {
            break;
        }
        // move a nonzero entry into the pivot row
        let Some(src) = (pivot..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(pivot, src);
        for r in pivot + 1..rows.len() {
            eliminate_rows(rows, pivot, r, c);
        }
        if rows[pivot][c].is_negative() {
            negate_row(&mut rows[pivot]);
        }
        pivot += 1;
    }
    pivot
}

/// Basis of the left integer kernel `{k in Z^n : k^T A = 0}` of an `n x c` integer matrix.
///
/// The basis is saturated by construction: it is read off from a unimodular
/// transformation.
pub fn left_kernel(a: &IntMatrix, n: usize) -> IntMatrix {
    let cols = a.first().map_or(0, Vec::len);
    let mut rows: IntMatrix = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let rank = echelon(&mut rows, cols);
    rows[rank..].iter().map(|row| row[cols..].to_vec()).collect()
}

/// Row-style Hermite normal form of the lattice spanned by `basis`: positive
/// pivots, entries above each pivot reduced into `[0, pivot)`, zero rows dropped.
pub fn hermite_normal_form(basis: &IntMatrix) -> IntMatrix {
    let Some(width) = basis.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut rows = basis.clone();
    let rank = echelon(&mut rows, width);
    rows.truncate(rank);
    for p in 0..rank {
        let c = pivot_column(&rows[p]).expect("echelon row is nonzero");
        let pivot = rows[p][c].clone();
        for r in 0..p {
            let q = rows[r][c].div_floor(&pivot);
            if !q.is_zero() {
                for k in 0..width {
                    let v = &q * &rows[p][k];
                    rows[r][k] -= v;
                }
            }
        }
    }
    rows
}

pub(crate) fn pivot_column(row: &[BigInt]) -> Option<usize> {
    row.iter().position(|v| !v.is_zero())
}

/// For a saturated `q x n` basis `u` (full row rank), returns a unimodular
/// `n x n` matrix `b` with `u b = [I_q | 0]`.
pub fn unimodular_completion(u: &IntMatrix, n: usize) -> Result<IntMatrix> {
    let q = u.len();
    // column operations on u are row operations on its transpose augmented by I_n
    let mut rows: IntMatrix = (0..n)
        .map(|j| {
            let mut row: Vec<BigInt> = (0..q).map(|h| u[h][j].clone()).collect();
            row.extend((0..n).map(|k| if j == k { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let rank = echelon(&mut rows, q);
    if rank != q {
        return Err(Error::Inconsistent("resonance basis is rank deficient".into()));
    }
    // rows now hold (u b)^T | b^T, lower-triangular in the u block
    for h in 0..q {
        if !rows[h][h].is_one() {
            return Err(Error::NonSaturated);
        }
    }
    // clear the entries of u b left of the diagonal: column c -= (u b)[h][c] column h
    for h in 0..q {
        for c in 0..h {
            let f = rows[c][h].clone();
            if f.is_zero() {
                continue;
            }
            for k in 0..q + n {
                let v = &f * &rows[h][k];
                rows[c][k] -= v;
            }
        }
    }
    // b[j][k] = rows[k][q + j]
    Ok((0..n)
        .map(|j| (0..n).map(|k| rows[k][q + j].clone()).collect())
        .collect())
}

/// Exact determinant of a square integer matrix (fraction-free elimination).
pub fn determinant(m: &IntMatrix) -> BigInt {
    let n = m.len();
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(s) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, s);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &a[n - 1][n - 1]
}

pub fn to_i64_matrix(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|v| v.to_i64().ok_or_else(|| Error::Overflow(v.to_string())))
                .collect()
        })
        .collect()
}

pub fn from_i64_matrix(m: &[Vec<i64>]) -> IntMatrix {
    m.iter()
        .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        from_i64_matrix(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn kernel_of_single_relation() {
        // k1 + 2 k2 = 0
        let k = left_kernel(&mat(&[&[1], &[2]]), 2);
        let h = hermite_normal_form(&k);
        assert_eq!(h, mat(&[&[2, -1]]));
    }

    #[test]
    fn hnf_reduces_above_pivots() {
        let h = hermite_normal_form(&mat(&[&[2, 3, 1], &[0, 4, 2], &[4, 6, 2]]));
        // third row is dependent; 3 is already reduced modulo the pivot 4
        assert_eq!(h, mat(&[&[2, 3, 1], &[0, 4, 2]]));
    }

    #[test]
    fn completion_of_saturated_row() {
        let u = mat(&[&[2, -1]]);
        let b = unimodular_completion(&u, 2).unwrap();
        // u b = [1, 0]
        let ub: Vec<BigInt> = (0..2).map(|k| &u[0][0] * &b[0][k] + &u[0][1] * &b[1][k]).collect();
        assert_eq!(ub, vec![BigInt::one(), BigInt::zero()]);
        assert!(determinant(&b).abs().is_one());
    }

    #[test]
    fn completion_rejects_non_saturated() {
        assert_eq!(unimodular_completion(&mat(&[&[2, 0]]), 2), Err(Error::NonSaturated));
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&mat(&[&[2, 1], &[1, 1]])), BigInt::one());
        assert_eq!(
            determinant(&mat(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]])),
            BigInt::from(-3)
        );
        assert_eq!(determinant(&mat(&[&[1, 2], &[2, 4]])), BigInt::zero());
    }
}
