use birkhoff::series::{diagonal_quadratic, mono_eigenvalue};
use birkhoff::{Coefficient, ExactSeries, FrequencyModel, GaussRational, Monomial, ResonanceBasis};
use proptest::prelude::*;

const N: usize = 2;
const ORDER: u32 = 7;

fn coefficient() -> impl Strategy<Value = GaussRational> {
    (-3i64..=3, 1i64..=3, -3i64..=3, 1i64..=3).prop_map(|(a, b, c, d)| GaussRational::from_parts(a, b, c, d))
}

fn monomial(min_degree: u16, max_degree: u16) -> impl Strategy<Value = Monomial> {
    (
        min_degree..=max_degree,
        prop::collection::vec(0usize..2 * N, max_degree as usize),
    )
        .prop_map(|(d, slots)| {
            let mut exps = vec![0u16; 2 * N];
            for v in slots.into_iter().take(d as usize) {
                exps[v] += 1;
            }
            Monomial::new(exps)
        })
}

fn series_from(min_degree: u16, max_degree: u16) -> impl Strategy<Value = ExactSeries> {
    prop::collection::vec((monomial(min_degree, max_degree), coefficient()), 0..5)
        .prop_map(|terms| ExactSeries::from_terms(N, ORDER, terms))
}

fn series(max_degree: u16) -> impl Strategy<Value = ExactSeries> {
    prop::collection::vec((monomial(1, max_degree), coefficient()), 0..5)
        .prop_map(|terms| ExactSeries::from_terms(N, ORDER, terms))
}

fn bracket(a: &ExactSeries, b: &ExactSeries) -> ExactSeries {
    a.poisson_bracket(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(a in series(4), b in series(4)) {
        prop_assert_eq!(bracket(&a, &b), bracket(&b, &a).neg());
    }

    #[test]
    fn bracket_is_bilinear(a in series(4), b in series(4), c in series(4), k in coefficient()) {
        let lhs = bracket(&a.scale(&k).add(&b).unwrap(), &c);
        let rhs = bracket(&a, &c).scale(&k).add(&bracket(&b, &c)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_identity(a in series_from(2, 3), b in series_from(2, 3), c in series_from(2, 3)) {
        let total = bracket(&a, &bracket(&b, &c))
            .add(&bracket(&b, &bracket(&c, &a))).unwrap()
            .add(&bracket(&c, &bracket(&a, &b))).unwrap();
        // inputs start at degree 2, so every kept degree is computed exactly
        prop_assert!(total.is_zero());
    }

    #[test]
    fn leibniz_rule(a in series(3), b in series(2), c in series(2)) {
        let lhs = bracket(&a, &b.mul(&c).unwrap());
        let rhs = bracket(&a, &b).mul(&c).unwrap().add(&b.mul(&bracket(&a, &c)).unwrap()).unwrap();
        prop_assert_eq!(lhs.truncate(ORDER - 3), rhs.truncate(ORDER - 3));
    }

    #[test]
    fn resonant_iff_commutes_with_torus(
        gamma in prop::collection::vec(-3i64..=3, 3),
        exps in prop::collection::vec(0u16..=3, 6),
    ) {
        let gamma: Vec<GaussRational> = gamma.into_iter().map(GaussRational::from_i64).collect();
        let model = FrequencyModel::rational(&gamma);
        let basis = ResonanceBasis::compute(&model).unwrap();
        let m = Monomial::new(exps);
        let mono = ExactSeries::monomial(3, 18, m.clone(), GaussRational::one());
        let commutes = basis
            .torus_generators(18)
            .iter()
            .all(|f| f.poisson_bracket(&mono).unwrap().is_zero());
        prop_assert_eq!(model.is_resonant(&m), commutes);
        let h2 = diagonal_quadratic(&gamma, 18);
        let expected = mono.scale(&mono_eigenvalue(&m, &gamma));
        prop_assert_eq!(h2.poisson_bracket(&mono).unwrap(), expected);
    }
}
