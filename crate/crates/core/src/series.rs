//! Sparse truncated polynomials on `C^{2n}` and their Poisson algebra.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::coeff::{Coefficient, GaussRational};
use crate::error::{Error, Result};
use crate::monomial::Monomial;

/// Polynomial in `(x_1..x_n, y_1..y_n)` with every term of degree at most `order`.
///
/// Zero coefficients are never stored, so two series are equal exactly when their
/// term maps, dimensions and orders agree.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    n: usize,
    order: u32,
    terms: BTreeMap<Monomial, C>,
}

pub type ExactSeries = TruncatedSeries<GaussRational>;
pub type FloatSeries = TruncatedSeries<Complex64>;

impl<C: Coefficient> TruncatedSeries<C> {
    pub fn zero(n: usize, order: u32) -> Self {
        TruncatedSeries {
            n,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a series from terms, summing duplicates and dropping zeros and
    /// anything above `order`.
    pub fn from_terms<I>(n: usize, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut s = TruncatedSeries::zero(n, order);
        for (m, c) in terms {
            assert_eq!(m.dof(), n, "monomial dimension mismatch");
            s.add_term(m, &c);
        }
        s
    }

    pub fn monomial(n: usize, order: u32, m: Monomial, c: C) -> Self {
        TruncatedSeries::from_terms(n, order, [(m, c)])
    }

    /// Coordinate function `x_j` (`j < n`) or `y_{j-n}`.
    pub fn variable(n: usize, order: u32, j: usize) -> Self {
        TruncatedSeries::monomial(n, order, Monomial::variable(n, j), C::one())
    }

    pub fn constant(n: usize, order: u32, c: C) -> Self {
        TruncatedSeries::monomial(n, order, Monomial::one(n), c)
    }

    pub fn dof(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same as [`Self::is_zero`].
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Lowest degree among non-constant terms.
    pub fn min_positive_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).find(|&d| d > 0)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &C) {
        if m.degree() > self.order || c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Degree-`k` homogeneous part (order unchanged).
    pub fn homogeneous(&self, k: u32) -> Self {
        TruncatedSeries {
            n: self.n,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Terms with degree in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> Self {
        TruncatedSeries {
            n: self.n,
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| (lo..=hi).contains(&m.degree()))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops terms of degree above `m`; the new order is `min(order, m)`.
    pub fn truncate(&self, m: u32) -> Self {
        let order = self.order.min(m);
        TruncatedSeries {
            n: self.n,
            order,
            terms: self
                .terms
                .iter()
                .filter(|(mono, _)| mono.degree() <= order)
                .map(|(mono, c)| (mono.clone(), c.clone()))
                .collect(),
        }
    }

    /// Same terms, with the order replaced (terms above a lower order are dropped).
    pub fn with_order(&self, order: u32) -> Self {
        let mut s = self.truncate(order);
        s.order = order;
        s
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.plus(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.plus(&other.neg()))
    }

    pub(crate) fn plus(&self, other: &Self) -> Self {
        let mut out = self.with_order(self.order.min(other.order));
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub(crate) fn minus(&self, other: &Self) -> Self {
        self.plus(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(|c| c.neg_ref())
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return TruncatedSeries::zero(self.n, self.order);
        }
        self.map_coefficients(|c| c.mul_ref(k))
    }

    fn map_coefficients(&self, f: impl Fn(&C) -> C) -> Self {
        TruncatedSeries {
            n: self.n,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Product truncated at the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let order = self.order.min(other.order);
        let mut acc: HashMap<Monomial, C> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() > order {
                    // terms of `other` are sorted by degree
                    break;
                }
                let c = ca.mul_ref(cb);
                accumulate(&mut acc, ma.mul(mb), c);
            }
        }
        Ok(TruncatedSeries::collect(self.n, order, acc))
    }

    fn collect(n: usize, order: u32, acc: HashMap<Monomial, C>) -> Self {
        TruncatedSeries {
            n,
            order,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Partial derivative with respect to variable `var` (`x_j` for `var < n`,
    /// `y_{var-n}` otherwise). The order drops by one.
    pub fn derivative(&self, var: usize) -> Self {
        let order = self.order.saturating_sub(1);
        let mut out = TruncatedSeries::zero(self.n, order);
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lower(var) {
                out.add_term(lowered, &c.scale_i64(e as i64));
            }
        }
        out
    }

    /// Poisson bracket `{self, other} = sum_j dA/dx_j dB/dy_j - dA/dy_j dB/dx_j`,
    /// truncated at the smaller order.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.bracket_unchecked(other))
    }

    pub(crate) fn bracket_unchecked(&self, other: &Self) -> Self {
        let n = self.n;
        let order = self.order.min(other.order);
        let mut acc: HashMap<Monomial, C> = HashMap::new();
        for (ma, ca) in &self.terms {
            if ma.degree() == 0 {
                continue;
            }
            for (mb, cb) in &other.terms {
                if mb.degree() == 0 {
                    continue;
                }
                if ma.degree() + mb.degree() - 2 > order {
                    break;
                }
                let ea = ma.exponents();
                let eb = mb.exponents();
                let mut prod: Option<C> = None;
                for j in 0..n {
                    let f = ea[j] as i64 * eb[n + j] as i64 - ea[n + j] as i64 * eb[j] as i64;
                    if f == 0 {
                        continue;
                    }
                    let base = prod.get_or_insert_with(|| ca.mul_ref(cb));
                    let mut exps = Vec::with_capacity(2 * n);
                    exps.extend(ea.iter().zip(eb.iter()).map(|(p, q)| p + q));
                    exps[j] -= 1;
                    exps[n + j] -= 1;
                    accumulate(&mut acc, Monomial::new(exps), base.scale_i64(f));
                }
            }
        }
        TruncatedSeries::collect(n, order, acc)
    }

    /// Value at `z = (x_1..x_n, y_1..y_n)`, coefficients converted to floats.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: z.len(),
            });
        }
        let powers = PowerTable::new(z, self.max_exponent());
        Ok(self.evaluate_with(&powers))
    }

    pub(crate) fn max_exponent(&self) -> u16 {
        self.terms
            .keys()
            .flat_map(|m| m.exponents().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn evaluate_with(&self, powers: &PowerTable) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            sum += c.to_complex() * powers.monomial(m);
        }
        sum
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(Coefficient::magnitude).fold(0.0, f64::max)
    }

    /// Every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(Coefficient::is_real)
    }

    pub fn to_float(&self) -> FloatSeries {
        TruncatedSeries {
            n: self.n,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.to_complex()))
                .filter(|(_, c)| !Coefficient::is_zero(c))
                .collect(),
        }
    }
}

fn accumulate<C: Coefficient>(acc: &mut HashMap<Monomial, C>, m: Monomial, c: C) {
    match acc.entry(m) {
        std::collections::hash_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::hash_map::Entry::Occupied(mut o) => o.get_mut().add_assign_ref(&c),
    }
}

/// Cached integer powers of each coordinate of a point.
pub(crate) struct PowerTable {
    powers: Vec<Vec<Complex64>>,
}

impl PowerTable {
    pub(crate) fn new(z: &[Complex64], max_exp: u16) -> Self {
        let powers = z
            .iter()
            .map(|&v| {
                let mut row = Vec::with_capacity(max_exp as usize + 1);
                let mut p = Complex64::new(1.0, 0.0);
                row.push(p);
                for _ in 0..max_exp {
                    p *= v;
                    row.push(p);
                }
                row
            })
            .collect();
        PowerTable { powers }
    }

    pub(crate) fn monomial(&self, m: &Monomial) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for (row, &e) in self.powers.iter().zip(m.exponents()) {
            if e > 0 {
                v *= row[e as usize];
            }
        }
        v
    }
}

/// `lambda(m) = sum_j (b_j - a_j) gamma_j` for numeric frequencies.
pub fn mono_eigenvalue<C: Coefficient>(m: &Monomial, gamma: &[C]) -> C {
    let mut acc = C::zero();
    for (w, g) in m.weight().into_iter().zip(gamma) {
        if w != 0 {
            acc.add_assign_ref(&g.scale_i64(w));
        }
    }
    acc
}

/// `sum_j gamma_j x_j y_j`.
pub fn diagonal_quadratic<C: Coefficient>(gamma: &[C], order: u32) -> TruncatedSeries<C> {
    let n = gamma.len();
    TruncatedSeries::from_terms(
        n,
        order,
        gamma
            .iter()
            .enumerate()
            .map(|(j, g)| (Monomial::action(n, j), g.clone())),
    )
}

impl<C: Coefficient> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.order + 1);
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}*{m}")?;
        }
        write!(f, " + O({})", self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(num: i64, den: i64) -> GaussRational {
        GaussRational::from_ratio(num, den)
    }

    fn mono(exps: &[u16]) -> Monomial {
        Monomial::new(exps.to_vec())
    }

    fn series(n: usize, order: u32, terms: &[(&[u16], GaussRational)]) -> ExactSeries {
        TruncatedSeries::from_terms(n, order, terms.iter().map(|(e, c)| (mono(e), c.clone())))
    }

    #[test]
    fn bracket_of_action_with_coordinate() {
        let a = series(1, 5, &[(&[1, 1], q(1, 1))]);
        let b = series(1, 5, &[(&[1, 0], q(1, 1))]);
        assert_eq!(a.poisson_bracket(&b).unwrap(), series(1, 5, &[(&[1, 0], q(-1, 1))]));
        assert!(a.poisson_bracket(&a).unwrap().is_zero());
    }

    #[test]
    fn bracket_of_squares() {
        let a = series(1, 2, &[(&[2, 0], q(1, 1))]);
        let b = series(1, 2, &[(&[0, 2], q(1, 1))]);
        assert_eq!(a.poisson_bracket(&b).unwrap(), series(1, 2, &[(&[1, 1], q(4, 1))]));
    }

    #[test]
    fn bracket_rejects_dimension_mismatch() {
        let a = ExactSeries::variable(1, 3, 0);
        let b = ExactSeries::variable(2, 3, 0);
        assert!(matches!(a.poisson_bracket(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eigenvalues_of_monomials() {
        assert_eq!(mono_eigenvalue(&mono(&[1, 0]), &[q(1, 1)]), q(-1, 1));
        assert_eq!(mono_eigenvalue(&mono(&[1, 1]), &[q(3, 7)]), q(0, 1));
        assert_eq!(mono_eigenvalue(&mono(&[2, 0, 0, 1]), &[q(1, 1), q(2, 1)]), q(0, 1));
    }

    #[test]
    fn truncation() {
        let a = series(1, 3, &[(&[1, 1], q(1, 1)), (&[3, 0], q(1, 1))]);
        let t = a.truncate(2);
        assert_eq!(t, series(1, 2, &[(&[1, 1], q(1, 1))]));
        assert_eq!(a.truncate(7), a);
        let b = series(1, 2, &[(&[1, 0], q(1, 1)), (&[2, 0], q(1, 1))]);
        assert!(b.truncate(0).is_zero());
        assert_eq!(b.truncate(0).order(), 0);
    }

    #[test]
    fn evaluation() {
        let a = series(1, 4, &[(&[1, 1], q(1, 1))]);
        let z = [Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.0)];
        assert!((a.evaluate(&z).unwrap() - Complex64::new(0.02, 0.0)).norm() < 1e-15);
        assert_eq!(ExactSeries::zero(1, 4).evaluate(&z).unwrap(), Complex64::new(0.0, 0.0));
        let b = series(1, 4, &[(&[2, 0], q(1, 1)), (&[0, 2], q(1, 1))]);
        let w = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        assert!((b.evaluate(&w).unwrap() - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
        assert!(b.evaluate(&z[..1]).is_err());
    }

    #[test]
    fn duplicates_sum_and_cancel() {
        let a = series(
            1,
            3,
            &[
                (&[1, 1], q(1, 2)),
                (&[1, 1], q(1, 2)),
                (&[2, 0], q(1, 1)),
                (&[2, 0], q(-1, 1)),
            ],
        );
        assert_eq!(a.len(), 1);
        assert_eq!(a.coefficient(&mono(&[1, 1])), Some(&q(1, 1)));
    }

    #[test]
    fn derivative_lowers_order() {
        let a = series(1, 4, &[(&[3, 1], q(2, 1))]);
        let d = a.derivative(0);
        assert_eq!(d, series(1, 3, &[(&[2, 1], q(6, 1))]));
    }
}
