//! Lie transforms: action of time-one Hamiltonian flows on truncated series.

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Orientation of a Lie transform generated by `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `sum_i (-1)^i / i! ad_L^i A`: expresses `A` in the coordinates produced by
    /// the time-one flow of `L`.
    Forward,
    /// `sum_i 1 / i! ad_L^i A`, with `ad_L A = {L, A}`: composition with the flow.
    Inverse,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

/// Truncated exponential Lie series of `a` generated by `l`, up to degree `m`.
///
/// `l` must start at degree 3 so that each bracket raises the lowest degree of
/// the running term by at least one and the series terminates.
pub fn lie_transform<C: Coefficient>(
    a: &TruncatedSeries<C>,
    l: &TruncatedSeries<C>,
    direction: Direction,
    m: u32,
) -> Result<TruncatedSeries<C>> {
    if a.dof() != l.dof() {
        return Err(Error::DimensionMismatch {
            expected: a.dof(),
            found: l.dof(),
        });
    }
    let a = a.truncate(m);
    let l = l.truncate(m);
    let Some(lmin) = l.min_degree() else {
        return Ok(a);
    };
    if lmin < 3 {
        return Err(Error::GeneratorDegree { degree: lmin });
    }
    let Some(amin) = a.min_positive_degree() else {
        // constants are invariant
        return Ok(a);
    };
    if amin > m {
        return Ok(a);
    }
    // ad_L^i A starts at degree amin + i (lmin - 2)
    let i_max = (m - amin) / (lmin - 2);
    let sign: i64 = match direction {
        Direction::Forward => -1,
        Direction::Inverse => 1,
    };
    // Horner: r <- A + (sign / i) {L, r}, for i = i_max..1
    let mut r = a.clone();
    for i in (1..=i_max).rev() {
        let factor = C::from_ratio(sign, i as i64);
        let ad = l.bracket_unchecked(&r).scale(&factor);
        r = a.plus(&ad);
    }
    // the next term of the series would start above the cutoff
    debug_assert!(amin + (i_max + 1) * (lmin - 2) > m);
    Ok(r)
}

/// Applies a sequence of generators: in list order for [`Direction::Forward`],
/// in reverse order for [`Direction::Inverse`], so that the two are mutually inverse.
pub fn compose_transforms<C: Coefficient>(
    a: &TruncatedSeries<C>,
    gens: &[TruncatedSeries<C>],
    direction: Direction,
    m: u32,
) -> Result<TruncatedSeries<C>> {
    let mut out = a.truncate(m);
    match direction {
        Direction::Forward => {
            for l in gens {
                out = lie_transform(&out, l, direction, m)?;
            }
        }
        Direction::Inverse => {
            for l in gens.iter().rev() {
                out = lie_transform(&out, l, direction, m)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaussRational;
    use crate::monomial::Monomial;
    use crate::series::ExactSeries;

    fn q(num: i64, den: i64) -> GaussRational {
        GaussRational::from_ratio(num, den)
    }

    fn s(order: u32, terms: &[(&[u16], GaussRational)]) -> ExactSeries {
        ExactSeries::from_terms(
            1,
            order,
            terms.iter().map(|(e, c)| (Monomial::new(e.to_vec()), c.clone())),
        )
    }

    #[test]
    fn cubic_generator_removes_cubic_term() {
        let a = s(10, &[(&[1, 1], q(1, 1)), (&[3, 0], q(1, 1))]);
        let l = s(10, &[(&[3, 0], q(1, 3))]);
        let t = lie_transform(&a, &l, Direction::Forward, 10).unwrap();
        assert_eq!(t, s(10, &[(&[1, 1], q(1, 1))]));
    }

    #[test]
    fn zero_generator_is_identity() {
        let a = s(6, &[(&[1, 1], q(1, 1)), (&[2, 3], q(5, 2))]);
        let l = ExactSeries::zero(1, 6);
        assert_eq!(lie_transform(&a, &l, Direction::Forward, 6).unwrap(), a);
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let a = s(8, &[(&[1, 1], q(1, 1)), (&[1, 2], q(-2, 3)), (&[4, 0], q(1, 5))]);
        let l = s(8, &[(&[2, 1], q(3, 4)), (&[0, 3], q(1, 1)), (&[1, 3], q(-1, 2))]);
        let f = lie_transform(&a, &l, Direction::Forward, 8).unwrap();
        let back = lie_transform(&f, &l, Direction::Inverse, 8).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn low_degree_generator_rejected() {
        let a = s(6, &[(&[1, 1], q(1, 1))]);
        let l = s(6, &[(&[2, 0], q(1, 1))]);
        assert_eq!(
            lie_transform(&a, &l, Direction::Forward, 6),
            Err(Error::GeneratorDegree { degree: 2 })
        );
    }

    #[test]
    fn coordinate_functions_follow_the_flow() {
        // x' = x - dL/dy for L = y^3: x' = x - 3 y^2 exactly (higher brackets vanish)
        let x = ExactSeries::variable(1, 6, 0);
        let l = s(6, &[(&[0, 3], q(1, 1))]);
        let t = lie_transform(&x, &l, Direction::Inverse, 6).unwrap();
        assert_eq!(t, s(6, &[(&[1, 0], q(1, 1)), (&[0, 2], q(-3, 1))]));
    }
}
