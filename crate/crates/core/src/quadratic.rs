//! Quadratic part of a Hamiltonian: its matrix in `sp(2n)`, the
//! Jordan-Chevalley splitting, and symplectic diagonalisation of the semisimple part.
//!
//! Conventions: phase coordinates are ordered `z = (x_1..x_n, y_1..y_n)` and the
//! Hamiltonian vector field is `x_j' = -dH/dy_j`, `y_j' = dH/dx_j`, so that
//! `{H, F} = X_H(F)` with the bracket of [`crate::series`]. The symplectic matrix
//! is `Omega = [[0, I], [-I, 0]]`, and `M` is infinitesimally symplectic iff
//! `Omega M` is symmetric.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coeff::{Coefficient, GaussRational};
use crate::error::{Error, Result};
use crate::linalg::{poly, Matrix};
use crate::monomial::Monomial;
use crate::series::TruncatedSeries;

/// Eigenvalue and null-space primitives that differ between exact and float mode.
pub trait SpectralField: Coefficient {
    /// Monic squarefree polynomial whose roots are the distinct eigenvalues of `m`
    /// (ascending coefficients).
    fn annihilator(m: &Matrix<Self>, tol: f64) -> Result<Vec<Self>>;

    /// Eigenvalues of `m` with algebraic multiplicity.
    fn eigenvalues(m: &Matrix<Self>, tol: f64) -> Result<Vec<Self>>;

    /// Basis of the null space of `m`, expected to have dimension `dim`.
    fn null_vectors(m: &Matrix<Self>, dim: usize, tol: f64) -> Result<Vec<Vec<Self>>>;

    /// Whether a Newton step of the Jordan-Chevalley iteration has converged.
    fn converged(residual: &Matrix<Self>, scale: f64) -> bool;
}

/// Characteristic polynomial (ascending coefficients) via Faddeev-LeVerrier.
pub fn characteristic_polynomial<C: Coefficient>(m: &Matrix<C>) -> Vec<C> {
    let n = m.nrows();
    let mut coeffs = vec![C::zero(); n + 1];
    coeffs[n] = C::one();
    let mut mk: Matrix<C> = Matrix::zeros(n, n);
    for k in 1..=n {
        mk = m.mul(&mk);
        for i in 0..n {
            mk[(i, i)].add_assign_ref(&coeffs[n - k + 1]);
        }
        let am = m.mul(&mk);
        let mut trace = C::zero();
        for i in 0..n {
            trace.add_assign_ref(&am[(i, i)]);
        }
        coeffs[n - k] = trace.neg_ref().div_ref(&C::from_i64(k as i64)).expect("k > 0");
    }
    coeffs
}

fn horner<C: Coefficient>(p: &[C], x: &C) -> C {
    p.iter().rev().fold(C::zero(), |acc, c| acc.mul_ref(x).add_ref(c))
}

fn to_nalgebra(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn float_eigenvalues(m: &Matrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::new(to_nalgebra(m));
    schur
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::UnsupportedEigenstructure("Schur form did not converge".into()))
}

/// Single-linkage clusters of `values` with linkage distance `tol`, as
/// `(center, multiplicity)`; errors when two clusters are separated by less
/// than `1e4 * tol`, which signals an ambiguous (numerically defective) spectrum.
fn cluster(values: &[Complex64], tol: f64) -> Result<Vec<(Complex64, usize)>> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &v in values {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|w| (w - v).norm() <= tol))
            .map(|(i, _)| i)
            .collect();
        match hits.split_first() {
            None => groups.push(vec![v]),
            Some((&first, rest)) => {
                for &i in rest.iter().rev() {
                    let g = groups.remove(i);
                    groups[first].extend(g);
                }
                groups[first].push(v);
            }
        }
    }
    let centers: Vec<(Complex64, usize)> = groups
        .iter()
        .map(|g| (g.iter().sum::<Complex64>() / g.len() as f64, g.len()))
        .collect();
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            let gap = (a.0 - b.0).norm();
            if gap < 1e4 * tol {
                return Err(Error::EigenvalueClustering { gap, tol });
            }
        }
    }
    Ok(centers)
}

impl SpectralField for Complex64 {
    fn annihilator(m: &Matrix<Self>, tol: f64) -> Result<Vec<Self>> {
        let centers: Vec<Complex64> = cluster(&float_eigenvalues(m)?, tol)?
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        Ok(poly::from_roots(&centers))
    }

    fn eigenvalues(m: &Matrix<Self>, tol: f64) -> Result<Vec<Self>> {
        Ok(cluster(&float_eigenvalues(m)?, tol)?
            .into_iter()
            .flat_map(|(c, k)| std::iter::repeat_n(c, k))
            .collect())
    }

    fn null_vectors(m: &Matrix<Self>, dim: usize, _tol: f64) -> Result<Vec<Vec<Self>>> {
        let svd = nalgebra::linalg::SVD::new(to_nalgebra(m), false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::UnsupportedEigenstructure("SVD failed".into()))?;
        // singular values are sorted in descending order
        let k = svd.singular_values.len();
        Ok((k - dim..k)
            .map(|r| (0..m.ncols()).map(|c| v_t[(r, c)].conj()).collect())
            .collect())
    }

    fn converged(residual: &Matrix<Self>, scale: f64) -> bool {
        residual.max_abs() <= 1e-14 * scale.max(1.0)
    }
}

impl SpectralField for GaussRational {
    fn annihilator(m: &Matrix<Self>, _tol: f64) -> Result<Vec<Self>> {
        let chi = characteristic_polynomial(m);
        let g = poly::gcd(&chi, &poly::derivative(&chi));
        let (q, r) = poly::div_rem(&chi, &g);
        debug_assert!(r.is_empty());
        Ok(poly::monic(q))
    }

    /// Roots of the squarefree annihilator, located in floating point, rounded to
    /// nearby Gaussian rationals and confirmed exactly; multiplicities come from
    /// dividing them out of the characteristic polynomial.
    fn eigenvalues(m: &Matrix<Self>, tol: f64) -> Result<Vec<Self>> {
        let mut chi = characteristic_polynomial(m);
        let p = Self::annihilator(m, tol)?;
        let k = p.len() - 1;
        let companion = Matrix::from_fn(k, k, |i, j| {
            if j == k - 1 {
                p[i].neg_ref().to_complex()
            } else if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let mut out = Vec::new();
        for (approx, _) in cluster(&float_eigenvalues(&companion)?, 1e-7)? {
            let cand = GaussRational::approximate(approx, 1_000_000)
                .filter(|c| horner(&p, c).is_zero())
                .ok_or_else(|| {
                    Error::UnsupportedEigenstructure(format!(
                        "eigenvalue {approx} is not a Gaussian rational; use float mode"
                    ))
                })?;
            let factor = vec![cand.neg_ref(), GaussRational::one()];
            loop {
                let (q, r) = poly::div_rem(&chi, &factor);
                if !r.is_empty() {
                    break;
                }
                chi = q;
                out.push(cand.clone());
            }
        }
        if out.len() != m.nrows() {
            return Err(Error::UnsupportedEigenstructure(
                "could not account for every eigenvalue exactly".into(),
            ));
        }
        Ok(out)
    }

    fn null_vectors(m: &Matrix<Self>, dim: usize, _tol: f64) -> Result<Vec<Vec<Self>>> {
        let ns = m.nullspace(0.0);
        if ns.len() != dim {
            return Err(Error::UnsupportedEigenstructure(format!(
                "eigenspace has dimension {} instead of {dim}",
                ns.len()
            )));
        }
        Ok(ns)
    }

    fn converged(residual: &Matrix<Self>, _scale: f64) -> bool {
        residual.is_zero()
    }
}

/// `Omega = [[0, I], [-I, 0]]`.
pub fn symplectic_form<C: Coefficient>(n: usize) -> Matrix<C> {
    Matrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            C::one()
        } else if i == j + n {
            C::from_i64(-1)
        } else {
            C::zero()
        }
    })
}

/// Matrix of the linear vector field `X_{H2}` acting on `z`.
pub fn hamiltonian_matrix<C: Coefficient>(h2: &TruncatedSeries<C>) -> Result<Matrix<C>> {
    let n = h2.dof();
    if h2.terms().any(|(m, _)| m.degree() != 2) {
        return Err(Error::NotHomogeneous { expected: 2 });
    }
    // grad[p][l]: coefficient of z_l in dH/dz_p
    let mut grad: Matrix<C> = Matrix::zeros(2 * n, 2 * n);
    for (m, c) in h2.terms() {
        let vars: Vec<usize> = m
            .exponents()
            .iter()
            .enumerate()
            .flat_map(|(v, &e)| std::iter::repeat_n(v, e as usize))
            .collect();
        let (p, q) = (vars[0], vars[1]);
        if p == q {
            grad[(p, p)].add_assign_ref(&c.scale_i64(2));
        } else {
            grad[(p, q)].add_assign_ref(c);
            grad[(q, p)].add_assign_ref(c);
        }
    }
    Ok(Matrix::from_fn(2 * n, 2 * n, |i, l| {
        if i < n {
            grad[(i + n, l)].neg_ref()
        } else {
            grad[(i - n, l)].clone()
        }
    }))
}

/// Quadratic Hamiltonian `1/2 z^T (Omega M) z` whose vector field has matrix `m`.
pub fn quadratic_form<C: Coefficient>(m: &Matrix<C>, order: u32) -> TruncatedSeries<C> {
    let dim = m.nrows();
    let n = dim / 2;
    let a = symplectic_form::<C>(n).mul(m);
    let half = C::from_ratio(1, 2);
    let mut terms = Vec::new();
    for p in 0..dim {
        for q in p..dim {
            let mut exps = vec![0u16; dim];
            exps[p] += 1;
            exps[q] += 1;
            let c = if p == q {
                a[(p, p)].mul_ref(&half)
            } else {
                a[(p, q)].add_ref(&a[(q, p)]).mul_ref(&half)
            };
            terms.push((Monomial::new(exps), c));
        }
    }
    TruncatedSeries::from_terms(n, order, terms)
}

/// `Omega M` symmetric, exactly or within `tol`.
pub fn is_infinitesimally_symplectic<C: Coefficient>(m: &Matrix<C>, tol: f64) -> bool {
    let a = symplectic_form::<C>(m.nrows() / 2).mul(m);
    let d = a.sub(&a.transpose());
    if C::EXACT {
        d.is_zero()
    } else {
        d.max_abs() <= tol * m.max_abs().max(1.0)
    }
}

/// Jordan-Chevalley decomposition `M = S + N` with `S` semisimple, `N` nilpotent
/// and `SN = NS`, by Newton iteration `S <- S - p(S) p'(S)^{-1}` on the
/// squarefree annihilator `p` of the spectrum.
pub fn jordan_chevalley<C: SpectralField>(m: &Matrix<C>, tol: f64) -> Result<(Matrix<C>, Matrix<C>)> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok((m.clone(), m.clone()));
    }
    let p = C::annihilator(m, tol)?;
    let dp = poly::derivative(&p);
    let scale = m.max_abs();
    let mut s = m.clone();
    for _ in 0..64 {
        let ps = s.polynomial(&p);
        if C::converged(&ps, scale.powi(p.len() as i32 - 1)) {
            break;
        }
        let step = ps.mul(&s.polynomial(&dp).inverse()?);
        s = s.sub(&step);
        if C::converged(&step, scale) {
            break;
        }
    }
    let nil = m.sub(&s);
    Ok((s, nil))
}

/// Linear change of coordinates `z = P z'`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSymplecticMap<C> {
    pub p: Matrix<C>,
}

impl<C: Coefficient> LinearSymplecticMap<C> {
    pub fn identity(n: usize) -> Self {
        LinearSymplecticMap {
            p: Matrix::identity(2 * n),
        }
    }

    /// `P^T Omega P - Omega`, exactly zero or within `tol`.
    pub fn is_symplectic(&self, tol: f64) -> bool {
        let n = self.p.nrows() / 2;
        let omega = symplectic_form::<C>(n);
        let d = self.p.transpose().mul(&omega).mul(&self.p).sub(&omega);
        if C::EXACT {
            d.is_zero()
        } else {
            d.max_abs() <= tol
        }
    }

    /// `P^{-1} = -Omega P^T Omega`.
    pub fn inverse(&self) -> Self {
        let n = self.p.nrows() / 2;
        let omega = symplectic_form::<C>(n);
        LinearSymplecticMap {
            p: omega.mul(&self.p.transpose()).mul(&omega).scale(&C::from_i64(-1)),
        }
    }
}

fn canonical_sign(g: Complex64, tol: f64) -> bool {
    let scale = g.norm();
    if g.re.abs() > tol * scale {
        g.re > 0.0
    } else {
        g.im > 0.0
    }
}

fn frequency_order(a: Complex64, b: Complex64) -> Ordering {
    a.norm().total_cmp(&b.norm()).then_with(|| a.arg().total_cmp(&b.arg()))
}

fn omega_pairing<C: Coefficient>(u: &[C], w: &[C]) -> C {
    let n = u.len() / 2;
    let mut acc = C::zero();
    for j in 0..n {
        acc.add_assign_ref(&u[j].mul_ref(&w[n + j]));
        acc = acc.sub_ref(&u[n + j].mul_ref(&w[j]));
    }
    acc
}

/// Symplectic basis of eigenvectors of a semisimple `S`: returns `P` with
/// `P^{-1} S P = diag(-gamma, gamma)` and the canonical frequencies `gamma`,
/// sorted by `(|gamma|, arg)` with `arg(gamma_j)` in `(-pi/2, pi/2]`.
///
/// Supported spectra: eigenvalues pairwise distinct apart from the forced
/// `+-gamma` pairing, with at most one zero pair.
pub fn eigen_symplectic_basis<C: SpectralField>(s: &Matrix<C>, tol: f64) -> Result<(LinearSymplecticMap<C>, Vec<C>)> {
    let dim = s.nrows();
    let n = dim / 2;
    let eig = C::eigenvalues(s, tol)?;
    let mut zeros = 0usize;
    let mut positive: Vec<C> = Vec::new();
    let mut negative: Vec<C> = Vec::new();
    for e in eig {
        let z = e.to_complex();
        if e.is_zero() || (!C::EXACT && z.norm() <= tol) {
            zeros += 1;
        } else if canonical_sign(z, tol) {
            positive.push(e);
        } else {
            negative.push(e);
        }
    }
    if zeros > 2 || zeros % 2 == 1 || positive.len() != negative.len() {
        return Err(Error::UnsupportedEigenstructure(
            "spectrum is not paired as +-gamma with distinct frequencies".into(),
        ));
    }
    positive.sort_by(|a, b| frequency_order(a.to_complex(), b.to_complex()));
    for w in positive.windows(2) {
        if (w[0].to_complex() - w[1].to_complex()).norm() <= tol.max(if C::EXACT { 0.0 } else { 1e-12 })
            || (C::EXACT && w[0] == w[1])
        {
            return Err(Error::UnsupportedEigenstructure("repeated frequency".into()));
        }
    }
    let mut gamma: Vec<C> = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<C>> = Vec::with_capacity(n);
    let mut w_cols: Vec<Vec<C>> = Vec::with_capacity(n);
    let shifted = |lambda: &C| -> Matrix<C> {
        let mut m = s.clone();
        for i in 0..dim {
            m[(i, i)] = m[(i, i)].sub_ref(lambda);
        }
        m
    };
    if zeros == 2 {
        let basis = C::null_vectors(s, 2, tol)?;
        let c = omega_pairing(&basis[0], &basis[1]);
        let inv = C::one()
            .div_ref(&c)
            .ok_or_else(|| Error::UnsupportedEigenstructure("zero eigenspace is isotropic".into()))?;
        gamma.push(C::zero());
        u_cols.push(basis[0].clone());
        w_cols.push(basis[1].iter().map(|v| v.mul_ref(&inv)).collect());
    }
    for g in positive {
        let neg = negative
            .iter()
            .position(|e| {
                if C::EXACT {
                    e.add_ref(&g).is_zero()
                } else {
                    (e.to_complex() + g.to_complex()).norm() <= 1e3 * tol.max(1e-12) * g.magnitude().max(1.0)
                }
            })
            .ok_or_else(|| Error::UnsupportedEigenstructure("eigenvalue without its negative".into()))?;
        let minus_g = negative.remove(neg);
        let w = C::null_vectors(&shifted(&g), 1, tol)?.remove(0);
        let u = C::null_vectors(&shifted(&minus_g), 1, tol)?.remove(0);
        let c = omega_pairing(&u, &w);
        let inv = C::one()
            .div_ref(&c)
            .ok_or_else(|| Error::UnsupportedEigenstructure("degenerate eigenvector pairing".into()))?;
        gamma.push(g);
        u_cols.push(u);
        w_cols.push(w.iter().map(|v| v.mul_ref(&inv)).collect());
    }
    let cols: Vec<Vec<C>> = u_cols.into_iter().chain(w_cols).collect();
    let p = Matrix::from_fn(dim, dim, |i, j| cols[j][i].clone());
    Ok((LinearSymplecticMap { p }, gamma))
}

/// Substitutes `z = P z'` into `a`.
pub fn apply_linear<C: Coefficient>(
    a: &TruncatedSeries<C>,
    map: &LinearSymplecticMap<C>,
) -> Result<TruncatedSeries<C>> {
    let n = a.dof();
    let dim = 2 * n;
    if map.p.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: map.p.nrows(),
        });
    }
    let order = a.order();
    let forms: Vec<TruncatedSeries<C>> = (0..dim)
        .map(|i| {
            TruncatedSeries::from_terms(
                n,
                order,
                (0..dim).map(|k| (Monomial::variable(n, k), map.p[(i, k)].clone())),
            )
        })
        .collect();
    let mut powers: BTreeMap<(usize, u16), TruncatedSeries<C>> = BTreeMap::new();
    let one = TruncatedSeries::constant(n, order, C::one());
    let mut out = TruncatedSeries::zero(n, order);
    for (m, c) in a.terms() {
        let mut prod = one.scale(c);
        for (v, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = match powers.entry((v, e)) {
                Entry::Occupied(slot) => slot.into_mut(),
                Entry::Vacant(slot) => {
                    let mut pw = one.clone();
                    for _ in 0..e {
                        pw = pw.mul(&forms[v])?;
                    }
                    slot.insert(pw)
                }
            };
            prod = prod.mul(pw)?;
        }
        out = out.plus(&prod);
    }
    Ok(out)
}

/// Quadratic part split into a diagonal semisimple part `H_ss = sum gamma_j x_j y_j`
/// and a remainder `H_nil`.
#[derive(Clone, PartialEq)]
pub struct QuadraticData<C> {
    pub h2: TruncatedSeries<C>,
    pub hss: TruncatedSeries<C>,
    pub hnil: TruncatedSeries<C>,
    pub gamma: Vec<C>,
}

impl<C: Coefficient> std::fmt::Debug for QuadraticData<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadraticData")
            .field("gamma", &self.gamma)
            .field("hss", &self.hss)
            .field("hnil", &self.hnil)
            .finish()
    }
}

impl<C: SpectralField> QuadraticData<C> {
    /// Splits `h2` in the working coordinates: the `x_j y_j` terms form `H_ss`, the
    /// rest `H_nil`. Requires `H_nil` to be nilpotent and `H_2` to have the same
    /// spectrum as `H_ss`, which holds for the Jordan-Chevalley split and also for
    /// triangular perturbations such as `xy + x^2`.
    pub fn working(h2: &TruncatedSeries<C>, tol: f64) -> Result<Self> {
        let n = h2.dof();
        let h2 = h2.homogeneous(2);
        if h2.len() != h2.truncate(2).len() {
            return Err(Error::NotHomogeneous { expected: 2 });
        }
        let gamma: Vec<C> = (0..n)
            .map(|j| h2.coefficient(&Monomial::action(n, j)).cloned().unwrap_or_else(C::zero))
            .collect();
        let hss = crate::series::diagonal_quadratic(&gamma, h2.order());
        let hnil = h2.minus(&hss);
        let data = QuadraticData { h2, hss, hnil, gamma };
        data.check_spectrum(tol)?;
        Ok(data)
    }

    fn check_spectrum(&self, tol: f64) -> Result<()> {
        if self.hnil.is_zero() {
            return Ok(());
        }
        let mn = hamiltonian_matrix(&self.hnil)?;
        let dim = mn.nrows();
        let nil_power = (0..dim).fold(Matrix::identity(dim), |acc, _| acc.mul(&mn));
        let m = hamiltonian_matrix(&self.h2)?;
        let d = hamiltonian_matrix(&self.hss)?;
        let ok = if C::EXACT {
            nil_power.is_zero() && characteristic_polynomial(&m) == characteristic_polynomial(&d)
        } else {
            let scale = m.max_abs().max(1.0);
            let chi_m = characteristic_polynomial(&m);
            let chi_d = characteristic_polynomial(&d);
            nil_power.max_abs() <= tol * scale.powi(dim as i32)
                && chi_m
                    .iter()
                    .zip(&chi_d)
                    .all(|(a, b)| a.sub_ref(b).magnitude() <= tol * scale.powi(dim as i32))
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedEigenstructure(
                "quadratic part is not in working form sum gamma_j x_j y_j + nilpotent; diagonalise first".into(),
            ))
        }
    }

    /// Whether `{H_ss, H_nil} = 0` (true Jordan-Chevalley split).
    pub fn commuting(&self) -> bool {
        self.hss.bracket_unchecked(&self.hnil).is_zero()
    }
}

/// Diagonalises the quadratic part: Jordan-Chevalley on its matrix, a symplectic
/// eigenbasis of the semisimple part, and the transformed Hamiltonian.
pub fn diagonalize<C: SpectralField>(
    h: &TruncatedSeries<C>,
    tol: f64,
) -> Result<(LinearSymplecticMap<C>, TruncatedSeries<C>, Vec<C>)> {
    let m = hamiltonian_matrix(&h.homogeneous(2))?;
    let (s, _) = jordan_chevalley(&m, tol)?;
    let (p, gamma) = eigen_symplectic_basis(&s, tol)?;
    let transformed = apply_linear(h, &p)?;
    Ok((p, transformed, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ExactSeries;

    fn q(n: i64) -> GaussRational {
        GaussRational::from_i64(n)
    }

    fn quad(n: usize, terms: &[(&[u16], GaussRational)]) -> ExactSeries {
        ExactSeries::from_terms(n, 2, terms.iter().map(|(e, c)| (Monomial::new(e.to_vec()), c.clone())))
    }

    #[test]
    fn matrix_of_action() {
        let m = hamiltonian_matrix(&quad(1, &[(&[1, 1], q(1))])).unwrap();
        assert_eq!(m, Matrix::from_rows(vec![vec![q(-1), q(0)], vec![q(0), q(1)]]));
        let z = hamiltonian_matrix(&ExactSeries::zero(1, 2)).unwrap();
        assert!(z.is_zero());
        let nil = hamiltonian_matrix(&quad(1, &[(&[2, 0], q(1))])).unwrap();
        assert_eq!(nil, Matrix::from_rows(vec![vec![q(0), q(0)], vec![q(2), q(0)]]));
        assert!(hamiltonian_matrix(&ExactSeries::variable(1, 2, 0)).is_err());
    }

    #[test]
    fn quadratic_round_trip() {
        let h = quad(
            2,
            &[
                (&[1, 0, 1, 0], q(3)),
                (&[2, 0, 0, 0], q(-1)),
                (&[0, 1, 1, 0], q(5)),
                (&[0, 0, 0, 2], q(2)),
            ],
        );
        let m = hamiltonian_matrix(&h).unwrap();
        assert!(is_infinitesimally_symplectic(&m, 0.0));
        assert_eq!(quadratic_form(&m, 2), h);
    }

    #[test]
    fn jordan_block_split() {
        let m = Matrix::from_rows(vec![vec![q(1), q(1)], vec![q(0), q(1)]]);
        let (s, nil) = jordan_chevalley(&m, 1e-9).unwrap();
        assert_eq!(s, Matrix::identity(2));
        assert_eq!(nil, Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(0), q(0)]]));
    }

    #[test]
    fn semisimple_and_nilpotent_inputs() {
        let m = Matrix::from_rows(vec![vec![q(-2), q(0)], vec![q(3), q(2)]]);
        let (s, nil) = jordan_chevalley(&m, 1e-9).unwrap();
        assert_eq!((s, nil.is_zero()), (m.clone(), true));
        let n = Matrix::from_rows(vec![vec![q(0), q(0)], vec![q(2), q(0)]]);
        let (s, nil) = jordan_chevalley(&n, 1e-9).unwrap();
        assert!(s.is_zero());
        assert_eq!(nil, n);
    }

    #[test]
    fn harmonic_oscillator_diagonalises_exactly() {
        // (x^2 + y^2)/2 has eigenvalues +-i
        let h = quad(
            1,
            &[
                (&[2, 0], GaussRational::from_ratio(1, 2)),
                (&[0, 2], GaussRational::from_ratio(1, 2)),
            ],
        );
        let (p, transformed, gamma) = diagonalize(&h, 1e-9).unwrap();
        assert_eq!(gamma, vec![GaussRational::imag_unit()]);
        assert!(p.is_symplectic(0.0));
        assert_eq!(transformed, quad(1, &[(&[1, 1], GaussRational::imag_unit())]));
    }

    #[test]
    fn swap_map_negates_action() {
        let p = LinearSymplecticMap {
            p: Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]),
        };
        assert!(p.is_symplectic(0.0));
        let h = quad(1, &[(&[1, 1], q(1))]);
        assert_eq!(apply_linear(&h, &p).unwrap(), quad(1, &[(&[1, 1], q(-1))]));
        assert_eq!(apply_linear(&h, &LinearSymplecticMap::identity(1)).unwrap(), h);
        assert_eq!(p.inverse().p.mul(&p.p), Matrix::identity(2));
    }

    #[test]
    fn float_diagonalisation_of_irrational_frequencies() {
        // positive definite coupled oscillators: purely imaginary, irrational frequencies
        let h = quad(
            2,
            &[
                (&[2, 0, 0, 0], q(1)),
                (&[0, 0, 2, 0], q(1)),
                (&[0, 2, 0, 0], q(2)),
                (&[0, 0, 0, 2], q(2)),
                (&[1, 1, 0, 0], q(1)),
            ],
        )
        .to_float();
        let (p, transformed, gamma) = diagonalize(&h, 1e-9).unwrap();
        assert!(p.is_symplectic(1e-10));
        for g in &gamma {
            assert!(g.re.abs() < 1e-12 && g.im > 0.0);
        }
        let n = 2;
        for (m, c) in transformed.terms() {
            let diag = (0..n).any(|j| *m == Monomial::action(n, j));
            assert!(diag || c.norm() < 1e-10, "off-diagonal term {m} = {c}");
        }
    }

    #[test]
    fn float_jordan_block_is_flagged_at_default_tolerance() {
        let m = Matrix::from_rows(vec![vec![q(1), q(1)], vec![q(0), q(1)]]).to_complex();
        let perturbed = {
            let mut p = m.clone();
            p[(1, 0)] = Complex64::new(1e-16, 0.0);
            p
        };
        match jordan_chevalley(&perturbed, 1e-9) {
            Ok((s, nil)) => {
                assert!(s.add(&nil).sub(&perturbed).max_abs() < 1e-12);
                assert!(nil.mul(&nil).max_abs() < 1e-8);
            }
            Err(e) => assert!(matches!(e, Error::EigenvalueClustering { .. })),
        }
        let (s, nil) = jordan_chevalley(&m, 1e-6).unwrap();
        assert!(s.sub(&Matrix::identity(2)).max_abs() < 1e-10);
        assert!(nil.mul(&nil).max_abs() < 1e-10);
    }
}
