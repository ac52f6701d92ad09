//! Small dense matrices over a coefficient field.

use std::fmt;

use num_complex::Complex64;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix<C> {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl<C: Coefficient> Matrix<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<C> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out: Matrix<C> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)].add_assign_ref(&a.mul_ref(b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C]) -> Vec<C> {
        (0..self.rows)
            .map(|i| {
                let mut acc = C::zero();
                for (j, x) in v.iter().enumerate() {
                    acc.add_assign_ref(&self[(i, j)].mul_ref(x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].add_ref(&rhs[(i, j)]))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].sub_ref(&rhs[(i, j)]))
    }

    pub fn scale(&self, k: &C) -> Self {
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mul_ref(k))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Coefficient::is_zero)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Coefficient::magnitude).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Coefficient::to_complex).collect(),
        }
    }

    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        if C::EXACT {
            (from..self.rows).find(|&r| !self[(r, col)].is_zero())
        } else {
            let best =
                (from..self.rows).max_by(|&a, &b| self[(a, col)].magnitude().total_cmp(&self[(b, col)].magnitude()))?;
            (!self[(best, col)].is_zero()).then_some(best)
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    ///
    /// In float mode entries below `tol * max_abs` are treated as zero.
    pub fn row_reduce(&mut self, tol: f64) -> Vec<usize> {
        let scale = self.max_abs();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = self.pivot_row(c, r) else {
                continue;
            };
            if !C::EXACT && self[(p, c)].magnitude() <= tol * scale {
                continue;
            }
            self.swap_rows(r, p);
            let inv = C::one().div_ref(&self[(r, c)]).expect("nonzero pivot");
            for j in 0..self.cols {
                self[(r, j)] = self[(r, j)].mul_ref(&inv);
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in 0..self.cols {
                    let v = self[(r, j)].mul_ref(&f);
                    self[(i, j)] = self[(i, j)].sub_ref(&v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.clone().row_reduce(tol).len()
    }

    /// Basis of the right null space (exact mode; float mode uses `tol`).
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<C>> {
        let mut m = self.clone();
        let pivots = m.row_reduce(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![C::zero(); self.cols];
                v[f] = C::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = m[(row, f)].neg_ref();
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = b` for a consistent (possibly overdetermined) system
    /// with full column rank.
    pub fn solve(&self, b: &[C]) -> Result<Vec<C>> {
        let mut aug = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let pivots = aug.row_reduce(1e-13);
        if pivots.contains(&self.cols) {
            return Err(Error::Inconsistent("right-hand side outside the column space".into()));
        }
        if pivots.len() != self.cols {
            return Err(Error::Inconsistent("system is rank deficient".into()));
        }
        Ok((0..self.cols).map(|i| aug[(i, self.cols)].clone()).collect())
    }

    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                C::one()
            } else {
                C::zero()
            }
        });
        let pivots = aug.row_reduce(1e-14);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Inconsistent("matrix is singular".into()));
        }
        Ok(Matrix::from_fn(n, n, |i, j| aug[(i, n + j)].clone()))
    }

    /// Evaluates the polynomial `sum_k coeffs[k] X^k` at this square matrix (Horner).
    pub fn polynomial(&self, coeffs: &[C]) -> Self {
        let n = self.rows;
        let mut acc = Matrix::zeros(n, n);
        for c in coeffs.iter().rev() {
            acc = acc.mul(self);
            for i in 0..n {
                acc[(i, i)].add_assign_ref(c);
            }
        }
        acc
    }
}

impl<C> std::ops::Index<(usize, usize)> for Matrix<C> {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl<C> std::ops::IndexMut<(usize, usize)> for Matrix<C> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

impl<C: fmt::Debug> fmt::Debug for Matrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Polynomials in one variable, coefficients in ascending degree.
pub(crate) mod poly {
    use crate::coeff::Coefficient;

    pub fn trim<C: Coefficient>(mut p: Vec<C>) -> Vec<C> {
        while p.last().is_some_and(Coefficient::is_zero) {
            p.pop();
        }
        p
    }

    pub fn derivative<C: Coefficient>(p: &[C]) -> Vec<C> {
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale_i64(k as i64))
            .collect()
    }

    /// Quotient and remainder of `a / b`, `b` nonzero.
    pub fn div_rem<C: Coefficient>(a: &[C], b: &[C]) -> (Vec<C>, Vec<C>) {
        let b = trim(b.to_vec());
        let lead = b.last().expect("division by zero polynomial").clone();
        let mut r = trim(a.to_vec());
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let mut q = vec![C::zero(); r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let f = r.last().unwrap().div_ref(&lead).unwrap();
            for (k, bk) in b.iter().enumerate() {
                r[shift + k] = r[shift + k].sub_ref(&bk.mul_ref(&f));
            }
            q[shift] = f;
            r.pop();
            r = trim(r);
        }
        (q, r)
    }

    /// Monic gcd.
    pub fn gcd<C: Coefficient>(a: &[C], b: &[C]) -> Vec<C> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let (_, r) = div_rem(&a, &b);
            a = b;
            b = r;
        }
        monic(a)
    }

    pub fn monic<C: Coefficient>(p: Vec<C>) -> Vec<C> {
        let Some(lead) = p.last().cloned() else {
            return p;
        };
        p.iter().map(|c| c.div_ref(&lead).unwrap()).collect()
    }

    pub fn from_roots<C: Coefficient>(roots: &[C]) -> Vec<C> {
        let mut p = vec![C::one()];
        for r in roots {
            let mut next = vec![C::zero(); p.len() + 1];
            for (k, c) in p.iter().enumerate() {
                next[k + 1].add_assign_ref(c);
                next[k] = next[k].sub_ref(&c.mul_ref(r));
            }
            p = next;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaussRational;

    fn q(n: i64) -> GaussRational {
        GaussRational::from_i64(n)
    }

    #[test]
    fn exact_inverse_and_nullspace() {
        let m = Matrix::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        let s = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        let ns = s.nullspace(0.0);
        assert_eq!(ns, vec![vec![q(-2), q(1)]]);
        assert!(s.inverse().is_err());
    }

    #[test]
    fn overdetermined_consistent_solve() {
        let m = Matrix::from_rows(vec![vec![q(1)], vec![q(2)]]);
        assert_eq!(m.solve(&[q(3), q(6)]).unwrap(), vec![q(3)]);
        assert!(m.solve(&[q(3), q(5)]).is_err());
    }

    #[test]
    fn polynomial_gcd() {
        // (x-1)^2 (x+2) and its derivative share x - 1
        let p = poly::from_roots(&[q(1), q(1), q(-2)]);
        let g = poly::gcd(&p, &poly::derivative(&p));
        assert_eq!(g, vec![q(-1), q(1)]);
    }
}
