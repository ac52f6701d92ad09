//! Resonance lattice of a frequency vector, its dual basis and the torus generators.
//!
//! Frequencies are declared structurally: `gamma_j = sum_l C[j][l] omega_l` over a
//! basis `omega_1..omega_d` assumed linearly independent over the Gaussian
//! rationals. An integer vector `k` is a resonance iff `k^T C = 0` exactly; no
//! floating-point threshold ever enters the decision.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coeff::{Coefficient, GaussRational};
use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};
use crate::linalg::Matrix;
use crate::monomial::Monomial;
use crate::series::{ExactSeries, TruncatedSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyModel {
    coords: Vec<Vec<GaussRational>>,
    d: usize,
    numeric: Option<Vec<Complex64>>,
}

/// Element of the span of the frequency basis: exact coordinates plus its value
/// when the basis has numeric values.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanElement {
    pub coords: Vec<GaussRational>,
    pub value: Option<Complex64>,
}

impl SpanElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Coefficient::is_zero)
    }
}

impl FrequencyModel {
    /// `coords` is `n x d`; `numeric`, if given, holds the `d` basis values.
    pub fn new(coords: Vec<Vec<GaussRational>>, d: usize, numeric: Option<Vec<Complex64>>) -> Result<Self> {
        for row in &coords {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
        }
        if let Some(values) = &numeric {
            if values.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: values.len(),
                });
            }
        }
        Ok(FrequencyModel { coords, d, numeric })
    }

    /// Single-element basis `omega_1 = 1`: each frequency is its own coordinate.
    pub fn rational(gamma: &[GaussRational]) -> Self {
        FrequencyModel {
            coords: gamma.iter().map(|g| vec![g.clone()]).collect(),
            d: 1,
            numeric: Some(vec![Complex64::new(1.0, 0.0)]),
        }
    }

    /// Frequencies declared independent: `gamma_j = omega_j` with the given values.
    pub fn independent(values: &[Complex64]) -> Self {
        let n = values.len();
        FrequencyModel {
            coords: (0..n)
                .map(|j| {
                    (0..n)
                        .map(|l| {
                            if j == l {
                                GaussRational::one()
                            } else {
                                GaussRational::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
            d: n,
            numeric: Some(values.to_vec()),
        }
    }

    pub fn dof(&self) -> usize {
        self.coords.len()
    }

    pub fn basis_dim(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[Vec<GaussRational>] {
        &self.coords
    }

    pub fn numeric(&self) -> Option<&[Complex64]> {
        self.numeric.as_deref()
    }

    /// Numeric frequency values, when the basis has numeric values.
    pub fn values(&self) -> Option<Vec<Complex64>> {
        let omega = self.numeric.as_ref()?;
        Some(
            self.coords
                .iter()
                .map(|row| row.iter().zip(omega).map(|(c, w)| c.to_complex() * w).sum())
                .collect(),
        )
    }

    /// `sum_j k_j gamma_j` in frequency coordinates.
    pub fn combination(&self, k: &[i64]) -> SpanElement {
        let mut coords = vec![GaussRational::zero(); self.d];
        for (kj, row) in k.iter().zip(&self.coords) {
            if *kj == 0 {
                continue;
            }
            for (acc, c) in coords.iter_mut().zip(row) {
                acc.add_assign_ref(&c.scale_i64(*kj));
            }
        }
        let value = self
            .numeric
            .as_ref()
            .map(|omega| coords.iter().zip(omega).map(|(c, w)| c.to_complex() * w).sum());
        SpanElement { coords, value }
    }

    pub fn is_resonance(&self, k: &[i64]) -> bool {
        self.combination(k).is_zero()
    }

    /// `lambda(m) = sum_j (b_j - a_j) gamma_j` as an element of the frequency span.
    pub fn mono_eigenvalue(&self, m: &Monomial) -> SpanElement {
        self.combination(&m.weight())
    }

    /// `true` iff the monomial satisfies a resonance relation.
    pub fn is_resonant(&self, m: &Monomial) -> bool {
        self.is_resonance(&m.weight())
    }

    /// Integer `n x 2d` matrix whose left kernel is the resonance lattice.
    fn integer_relations(&self) -> IntMatrix {
        let n = self.dof();
        let mut columns: Vec<Vec<BigRational>> = Vec::with_capacity(2 * self.d);
        for l in 0..self.d {
            columns.push(self.coords.iter().map(|row| row[l].re.clone()).collect());
            columns.push(self.coords.iter().map(|row| row[l].im.clone()).collect());
        }
        let columns: Vec<Vec<BigInt>> = columns
            .into_iter()
            .map(|col| {
                let lcm = col.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
                col.iter().map(|v| (v * &lcm).to_integer()).collect()
            })
            .collect();
        (0..n)
            .map(|j| columns.iter().map(|col| col[j].clone()).collect())
            .collect()
    }
}

/// Degree of resonance `q` and a Hermite-normal-form basis `mu` of the lattice
/// `{k in Z^n : sum_j k_j gamma_j = 0}`.
pub fn resonance_lattice(model: &FrequencyModel) -> Result<(usize, Vec<Vec<i64>>)> {
    let n = model.dof();
    let kernel = lattice::left_kernel(&model.integer_relations(), n);
    let mu = lattice::hermite_normal_form(&kernel);
    Ok((mu.len(), lattice::to_i64_matrix(&mu)?))
}

/// Unimodular basis `rho^(1..n)` of `Z^n` with `rho^(k) . mu^(h) = 0` for
/// `k <= n - q` and `rho^(n-q+h) . mu^(h') = delta_{h h'}`.
///
/// The first `n - q` vectors are a Hermite basis of the lattice orthogonal to
/// `mu`; the last `q` are size-reduced against them.
pub fn dual_basis(mu: &[Vec<i64>], n: usize) -> Result<Vec<Vec<i64>>> {
    let q = mu.len();
    let u = lattice::from_i64_matrix(mu);
    let b = lattice::unimodular_completion(&u, n)?;
    let column = |c: usize| -> Vec<BigInt> { (0..n).map(|j| b[j][c].clone()).collect() };
    let top: IntMatrix = (q..n).map(column).collect();
    let top = lattice::hermite_normal_form(&top);
    if top.len() != n - q {
        return Err(Error::Invariant("orthogonal complement lost rank".into()));
    }
    let mut rho = top.clone();
    for h in 0..q {
        let mut v = column(h);
        for row in &top {
            let pc = lattice::pivot_column(row).expect("nonzero Hermite row");
            let f = v[pc].div_floor(&row[pc]);
            if !f.is_zero() {
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        rho.push(v);
    }
    let det = lattice::determinant(&rho);
    if det != BigInt::one() && det != -BigInt::one() {
        return Err(Error::Invariant(format!("dual basis has determinant {det}")));
    }
    lattice::to_i64_matrix(&rho)
}

/// `F^(k) = sum_j rho^(k)_j x_j y_j` for `k = 1..n-q`.
pub fn torus_generators(rho: &[Vec<i64>], q: usize, n: usize, order: u32) -> Vec<ExactSeries> {
    rho.iter().take(n - q).map(|r| weighted_action(r, order)).collect()
}

/// `sum_j w_j x_j y_j` with integer weights.
pub fn weighted_action<C: Coefficient>(weights: &[i64], order: u32) -> TruncatedSeries<C> {
    let n = weights.len();
    TruncatedSeries::from_terms(
        n,
        order,
        weights
            .iter()
            .enumerate()
            .map(|(j, &w)| (Monomial::action(n, j), C::from_i64(w))),
    )
}

/// Solves `gamma = sum_{k <= n-q} alpha_k rho^(k)` exactly; `alpha_k` is returned
/// in frequency coordinates (`d` entries each).
pub fn alpha_coefficients(model: &FrequencyModel, rho: &[Vec<i64>], q: usize) -> Result<Vec<Vec<GaussRational>>> {
    let n = model.dof();
    let r = n - q;
    let mut alpha = vec![vec![GaussRational::zero(); model.basis_dim()]; r];
    if r == 0 {
        if model.coords.iter().flatten().all(Coefficient::is_zero) {
            return Ok(alpha);
        }
        return Err(Error::Inconsistent("nonzero frequencies with full resonance".into()));
    }
    // n x r system with columns rho^(k)
    let a = Matrix::from_fn(n, r, |j, k| GaussRational::from_i64(rho[k][j]));
    for l in 0..model.basis_dim() {
        let rhs: Vec<GaussRational> = model.coords.iter().map(|row| row[l].clone()).collect();
        let sol = a.solve(&rhs)?;
        for (k, v) in sol.into_iter().enumerate() {
            alpha[k][l] = v;
        }
    }
    Ok(alpha)
}

/// Everything derived from the resonance structure of a frequency model.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceBasis {
    pub q: usize,
    pub mu: Vec<Vec<i64>>,
    pub rho: Vec<Vec<i64>>,
    pub alpha: Vec<Vec<GaussRational>>,
}

impl ResonanceBasis {
    pub fn compute(model: &FrequencyModel) -> Result<Self> {
        let (q, mu) = resonance_lattice(model)?;
        let rho = dual_basis(&mu, model.dof())?;
        let alpha = alpha_coefficients(model, &rho, q)?;
        Ok(ResonanceBasis { q, mu, rho, alpha })
    }

    pub fn dof(&self) -> usize {
        self.rho.len()
    }

    /// Number of torus generators, `n - q`.
    pub fn rank(&self) -> usize {
        self.dof() - self.q
    }

    pub fn torus_generators(&self, order: u32) -> Vec<ExactSeries> {
        torus_generators(&self.rho, self.q, self.dof(), order)
    }

    /// Lattice membership via the dual basis: `rho^(k) . v = 0` for all `k <= n - q`.
    pub fn contains(&self, v: &[i64]) -> bool {
        self.rho
            .iter()
            .take(self.rank())
            .all(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> GaussRational {
        GaussRational::from_i64(v)
    }

    fn dot(a: &[i64], b: &[i64]) -> i64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn one_two_resonance() {
        let model = FrequencyModel::rational(&[q(1), q(2)]);
        let (rank, mu) = resonance_lattice(&model).unwrap();
        assert_eq!(rank, 1);
        assert_eq!(mu, vec![vec![2, -1]]);
        let rho = dual_basis(&mu, 2).unwrap();
        assert_eq!(rho[0], vec![1, 2]);
        assert_eq!(dot(&rho[0], &mu[0]), 0);
        assert_eq!(dot(&rho[1], &mu[0]), 1);
        let alpha = alpha_coefficients(&model, &rho, 1).unwrap();
        assert_eq!(alpha, vec![vec![q(1)]]);
    }

    #[test]
    fn independent_frequencies() {
        let model = FrequencyModel::independent(&[Complex64::new(1.0, 0.0), Complex64::new(2f64.sqrt(), 0.0)]);
        let basis = ResonanceBasis::compute(&model).unwrap();
        assert_eq!(basis.q, 0);
        assert!(basis.mu.is_empty());
        assert_eq!(basis.rho, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(basis.alpha, vec![vec![q(1), q(0)], vec![q(0), q(1)]]);
    }

    #[test]
    fn opposite_frequencies() {
        let (rank, mu) = resonance_lattice(&FrequencyModel::rational(&[q(1), q(-1)])).unwrap();
        assert_eq!(rank, 1);
        assert_eq!(mu, vec![vec![1, 1]]);
    }

    #[test]
    fn all_zero_frequencies() {
        let model = FrequencyModel::rational(&[q(0), q(0), q(0)]);
        let basis = ResonanceBasis::compute(&model).unwrap();
        assert_eq!(basis.q, 3);
        assert_eq!(basis.rank(), 0);
        let det = lattice::determinant(&lattice::from_i64_matrix(&basis.rho));
        assert_eq!(det.magnitude(), &num_bigint::BigUint::one());
        assert!(basis.torus_generators(4).is_empty());
    }

    #[test]
    fn resonant_monomials() {
        let model = FrequencyModel::rational(&[q(1), q(2)]);
        assert!(model.is_resonant(&Monomial::from_ab(&[1, 0], &[1, 0])));
        assert!(model.is_resonant(&Monomial::from_ab(&[2, 0], &[0, 1])));
        assert!(!model.is_resonant(&Monomial::from_ab(&[3, 0], &[0, 0])));
        let lam = model.mono_eigenvalue(&Monomial::from_ab(&[3, 0], &[0, 0]));
        assert_eq!(lam.coords, vec![q(-3)]);
    }

    #[test]
    fn torus_generator_from_dual() {
        let gens = torus_generators(&[vec![1, 2], vec![0, -1]], 1, 2, 4);
        assert_eq!(gens.len(), 1);
        let expected = ExactSeries::from_terms(2, 4, [(Monomial::action(2, 0), q(1)), (Monomial::action(2, 1), q(2))]);
        assert_eq!(gens[0], expected);
    }

    #[test]
    fn complex_frequencies_resonate_over_gaussian_rationals() {
        // gamma = (i, 2i): resonance (2, -1) through the imaginary parts
        let i = GaussRational::imag_unit();
        let model = FrequencyModel::rational(&[i.clone(), i.scale_i64(2)]);
        let (rank, mu) = resonance_lattice(&model).unwrap();
        assert_eq!((rank, mu), (1, vec![vec![2, -1]]));
    }
}
