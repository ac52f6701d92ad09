use std::fmt;

/// Monomial `x^a y^b` in `2n` variables, exponents stored as `(a_1..a_n, b_1..b_n)`.
///
/// Ordering is graded lexicographic: total degree first, then lexicographic on
/// the concatenated exponent vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u16]>,
}

impl Monomial {
    /// `exps` holds the `x` exponents followed by the `y` exponents.
    pub fn new(exps: Vec<u16>) -> Self {
        assert!(
            exps.len().is_multiple_of(2),
            "monomial needs an even number of exponents"
        );
        let degree = exps.iter().map(|&e| e as u32).sum();
        Monomial {
            degree,
            exps: exps.into_boxed_slice(),
        }
    }

    pub fn from_ab(a: &[u16], b: &[u16]) -> Self {
        assert_eq!(a.len(), b.len());
        let mut exps = a.to_vec();
        exps.extend_from_slice(b);
        Monomial::new(exps)
    }

    pub fn one(n: usize) -> Self {
        Monomial::new(vec![0; 2 * n])
    }

    /// The coordinate function `x_j` (`j < n`) or `y_{j-n}` (`j >= n`).
    pub fn variable(n: usize, j: usize) -> Self {
        let mut exps = vec![0; 2 * n];
        exps[j] = 1;
        Monomial::new(exps)
    }

    /// `x_j y_j`.
    pub fn action(n: usize, j: usize) -> Self {
        let mut exps = vec![0; 2 * n];
        exps[j] = 1;
        exps[n + j] = 1;
        Monomial::new(exps)
    }

    pub fn dof(&self) -> usize {
        self.exps.len() / 2
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn a(&self) -> &[u16] {
        &self.exps[..self.dof()]
    }

    pub fn b(&self) -> &[u16] {
        &self.exps[self.dof()..]
    }

    /// Integer weight vector `b - a`.
    pub fn weight(&self) -> Vec<i64> {
        let n = self.dof();
        (0..n).map(|j| self.exps[n + j] as i64 - self.exps[j] as i64).collect()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps: Vec<u16> = self.exps.iter().zip(other.exps.iter()).map(|(p, q)| p + q).collect();
        Monomial {
            degree: self.degree + other.degree,
            exps: exps.into_boxed_slice(),
        }
    }

    /// Divides by variable `var`, returning the exponent it had, or `None` if absent.
    pub fn lower(&self, var: usize) -> Option<(u16, Monomial)> {
        let e = self.exps[var];
        if e == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[var] -= 1;
        Some((
            e,
            Monomial {
                degree: self.degree - 1,
                exps,
            },
        ))
    }

    /// All monomials of total degree `degree` in `2n` variables, in canonical order.
    pub fn all_of_degree(n: usize, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut current = vec![0u16; 2 * n];
        fill(&mut current, 0, degree, &mut out);
        out.sort();
        out
    }
}

fn fill(current: &mut Vec<u16>, pos: usize, remaining: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u16;
        out.push(Monomial::new(current.clone()));
        return;
    }
    for e in 0..=remaining {
        current[pos] = e as u16;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dof();
        let mut first = true;
        for (idx, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let name = if idx < n { 'x' } else { 'y' };
            let j = idx % n + 1;
            if e == 1 {
                write!(f, "{name}{j}")?;
            } else {
                write!(f, "{name}{j}^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let x2 = Monomial::new(vec![2, 0]);
        let xy = Monomial::new(vec![1, 1]);
        let x3 = Monomial::new(vec![3, 0]);
        assert!(xy < x2);
        assert!(x2 < x3);
    }

    #[test]
    fn enumeration_counts() {
        // C(d + 3, 3) monomials of degree d in four variables
        assert_eq!(Monomial::all_of_degree(2, 3).len(), 20);
        assert_eq!(Monomial::all_of_degree(2, 8).len(), 165);
        assert_eq!(Monomial::all_of_degree(1, 4).len(), 5);
    }

    #[test]
    fn weight_and_display() {
        let m = Monomial::from_ab(&[2, 0], &[0, 1]);
        assert_eq!(m.weight(), vec![-2, 1]);
        assert_eq!(m.to_string(), "x1^2*y2");
        assert_eq!(Monomial::one(2).to_string(), "1");
    }
}
