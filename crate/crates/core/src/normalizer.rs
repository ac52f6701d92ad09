//! Order-by-order Birkhoff normalisation.
//!
//! At degree `k` the homogeneous part `H_k` is split as `H_k = -{H_2, L_k} + H'_k`
//! with `H'_k` resonant, and the whole series is replaced by
//! `sum_i (-1)^i / i! ad_{L_k}^i H` ([`Direction::Forward`]). Degrees below `k`
//! are untouched by construction and this is checked after every step.

use std::fmt::Write as _;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::lie::{compose_transforms, lie_transform, Direction};
use crate::linalg::Matrix;
use crate::monomial::Monomial;
use crate::quadratic::QuadraticData;
use crate::resonance::{resonance_lattice, FrequencyModel};
use crate::series::{mono_eigenvalue, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizerConfig {
    /// Float mode only: a non-resonant monomial with `|lambda|` below this aborts.
    pub near_resonance_floor: f64,
    /// Relative tolerance when comparing float frequencies against the model.
    pub frequency_tolerance: f64,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            near_resonance_floor: 1e-8,
            frequency_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeStats {
    pub degree: u32,
    pub gen_max: f64,
    pub nf_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationResult<C: Coefficient> {
    pub order: u32,
    pub normal_form: TruncatedSeries<C>,
    /// `L_3..L_m`, zero where nothing had to be removed.
    pub gens: Vec<TruncatedSeries<C>>,
    pub per_degree: Vec<DegreeStats>,
}

/// Checks that the frequency model describes the exact frequencies `gamma`.
///
/// Every lattice vector must annihilate `gamma`; when the basis carries numeric
/// values the frequencies must also agree numerically, and a one-element basis
/// without values is read as `omega_1 = 1`.
pub fn validate_frequencies<C: Coefficient>(model: &FrequencyModel, gamma: &[C], tol: f64) -> Result<()> {
    if model.dof() != gamma.len() {
        return Err(Error::DimensionMismatch {
            expected: gamma.len(),
            found: model.dof(),
        });
    }
    let close = |a: &C, b: num_complex::Complex64| -> bool {
        if C::EXACT {
            a.to_complex() == b
        } else {
            (a.to_complex() - b).norm() <= tol * (1.0 + b.norm())
        }
    };
    let (_, mu) = resonance_lattice(model)?;
    for row in &mu {
        let mut acc = C::zero();
        for (k, g) in row.iter().zip(gamma) {
            acc.add_assign_ref(&g.scale_i64(*k));
        }
        let scale = gamma.iter().map(Coefficient::magnitude).fold(0.0, f64::max);
        let vanishes = if C::EXACT {
            acc.is_zero()
        } else {
            acc.magnitude() <= tol * (1.0 + scale)
        };
        if !vanishes {
            return Err(Error::FrequencyMismatch(format!(
                "resonance {row:?} is not satisfied by the quadratic part"
            )));
        }
    }
    match model.values() {
        Some(values) => {
            // exact frequencies are compared through their float images
            for (j, (g, v)) in gamma.iter().zip(values).enumerate() {
                let ok = if C::EXACT {
                    (g.to_complex() - v).norm() <= tol * (1.0 + v.norm())
                } else {
                    close(g, v)
                };
                if !ok {
                    return Err(Error::FrequencyMismatch(format!(
                        "gamma_{} = {:?} but the model gives {v}",
                        j + 1,
                        g
                    )));
                }
            }
        }
        None if model.basis_dim() == 1 => {
            for (j, (g, row)) in gamma.iter().zip(model.coords()).enumerate() {
                let ok = if C::EXACT {
                    g.to_complex() == row[0].to_complex()
                } else {
                    close(g, row[0].to_complex())
                };
                if !ok {
                    return Err(Error::FrequencyMismatch(format!(
                        "gamma_{} differs from the model",
                        j + 1
                    )));
                }
            }
        }
        None => {}
    }
    Ok(())
}

fn resonant_part<C: Coefficient>(
    a: &TruncatedSeries<C>,
    model: &FrequencyModel,
) -> (TruncatedSeries<C>, TruncatedSeries<C>) {
    let mut res = TruncatedSeries::zero(a.dof(), a.order());
    let mut non = TruncatedSeries::zero(a.dof(), a.order());
    for (m, c) in a.terms() {
        if model.is_resonant(m) {
            res.add_term(m.clone(), c);
        } else {
            non.add_term(m.clone(), c);
        }
    }
    (res, non)
}

/// Divides each coefficient by `lambda(m)`.
fn divide_by_eigenvalue<C: Coefficient>(
    a: &TruncatedSeries<C>,
    gamma: &[C],
    config: &NormalizerConfig,
) -> Result<TruncatedSeries<C>> {
    let mut out = TruncatedSeries::zero(a.dof(), a.order());
    for (m, c) in a.terms() {
        let lambda = mono_eigenvalue(m, gamma);
        if lambda.is_zero() {
            return Err(Error::ZeroDivisor {
                monomial: m.to_string(),
            });
        }
        if !C::EXACT && lambda.magnitude() < config.near_resonance_floor {
            return Err(Error::NearResonance {
                monomial: m.to_string(),
                magnitude: lambda.magnitude(),
                floor: config.near_resonance_floor,
            });
        }
        out.add_term(m.clone(), &c.div_ref(&lambda).expect("nonzero eigenvalue"));
    }
    Ok(out)
}

/// Dense solve of `(Lambda + P ad_R) u = h` on the non-resonant monomials of degree `k`.
fn dense_solve<C: Coefficient>(
    h: &TruncatedSeries<C>,
    hnil: &TruncatedSeries<C>,
    gamma: &[C],
    model: &FrequencyModel,
    k: u32,
) -> Result<TruncatedSeries<C>> {
    let n = h.dof();
    let basis: Vec<Monomial> = Monomial::all_of_degree(n, k)
        .into_iter()
        .filter(|m| !model.is_resonant(m))
        .collect();
    let index = |m: &Monomial| basis.binary_search(m).ok();
    let mut a: Matrix<C> = Matrix::zeros(basis.len(), basis.len());
    for (col, m) in basis.iter().enumerate() {
        a[(col, col)] = mono_eigenvalue(m, gamma);
        let e = TruncatedSeries::monomial(n, h.order(), m.clone(), C::one());
        for (img, c) in hnil.bracket_unchecked(&e).terms() {
            if let Some(row) = index(img) {
                a[(row, col)].add_assign_ref(c);
            }
        }
    }
    let rhs: Vec<C> = basis
        .iter()
        .map(|m| h.coefficient(m).cloned().unwrap_or_else(C::zero))
        .collect();
    let sol = a.solve(&rhs).map_err(|_| Error::SingularHomological { degree: k })?;
    Ok(TruncatedSeries::from_terms(n, h.order(), basis.into_iter().zip(sol)))
}

/// Solves `H_k = -{H_2, L_k} + H'_k` with `H'_k` in the kernel of `ad_{H_ss}` and
/// `L_k` supported on non-resonant monomials.
///
/// With `H_nil = 0` this is `L_k = -H_k / lambda` monomialwise. Otherwise the
/// operator `Lambda + P ad_{H_nil}` (`P` the projection onto non-resonant
/// monomials) is inverted by its Neumann series, which terminates when
/// `Lambda^{-1} P ad_{H_nil}` is nilpotent, with a dense solve as fallback.
pub fn homological_split<C: Coefficient>(
    hk: &TruncatedSeries<C>,
    h2data: &QuadraticData<C>,
    model: &FrequencyModel,
) -> Result<(TruncatedSeries<C>, TruncatedSeries<C>)> {
    homological_split_with(hk, h2data, model, &NormalizerConfig::default())
}

pub fn homological_split_with<C: Coefficient>(
    hk: &TruncatedSeries<C>,
    h2data: &QuadraticData<C>,
    model: &FrequencyModel,
    config: &NormalizerConfig,
) -> Result<(TruncatedSeries<C>, TruncatedSeries<C>)> {
    let k = match (hk.min_degree(), hk.max_degree()) {
        (None, _) => return Ok((hk.clone(), hk.clone())),
        (Some(lo), Some(hi)) if lo == hi => lo,
        (Some(lo), _) => return Err(Error::NotHomogeneous { expected: lo }),
    };
    if k < 3 {
        return Err(Error::GeneratorDegree { degree: k });
    }
    let gamma = &h2data.gamma;
    let (_, non) = resonant_part(hk, model);
    let u = if h2data.hnil.is_zero() {
        divide_by_eigenvalue(&non, gamma, config)?
    } else {
        let cap = Monomial::all_of_degree(hk.dof(), k).len() + 1;
        let mut term = divide_by_eigenvalue(&non, gamma, config)?;
        let mut sum = term.clone();
        let mut converged = false;
        for _ in 0..cap {
            let (_, pushed) = resonant_part(&h2data.hnil.bracket_unchecked(&term), model);
            if pushed.is_zero() {
                converged = true;
                break;
            }
            term = divide_by_eigenvalue(&pushed, gamma, config)?.neg();
            sum = sum.plus(&term);
        }
        if converged {
            sum
        } else {
            dense_solve(&non, &h2data.hnil, gamma, model, k)?
        }
    };
    let l = u.neg();
    let h_prime = hk.plus(&h2data.h2.bracket_unchecked(&l));
    let (res, rest) = resonant_part(&h_prime, model);
    if C::EXACT {
        if !rest.is_zero() {
            return Err(Error::Invariant(format!("non-resonant remainder at degree {k}")));
        }
        Ok((l, h_prime))
    } else {
        // round-off in the non-resonant directions is discarded
        Ok((l, res))
    }
}

fn check_equilibrium<C: Coefficient>(h: &TruncatedSeries<C>, h2data: &QuadraticData<C>) -> Result<()> {
    if h.dof() != h2data.h2.dof() {
        return Err(Error::DimensionMismatch {
            expected: h2data.h2.dof(),
            found: h.dof(),
        });
    }
    if let Some(d) = h.min_degree().filter(|&d| d < 2) {
        return Err(Error::NotAnEquilibrium { degree: d });
    }
    let quad = h.homogeneous(2);
    let same = if C::EXACT {
        quad.terms().eq(h2data.h2.terms())
    } else {
        quad.plus(&h2data.h2.neg()).max_coefficient() <= 1e-12 * h2data.h2.max_coefficient().max(1.0)
    };
    if same {
        Ok(())
    } else {
        Err(Error::QuadraticMismatch)
    }
}

/// Normalises `h` through degree `m`.
pub fn normalize<C: Coefficient>(
    h: &TruncatedSeries<C>,
    m: u32,
    h2data: &QuadraticData<C>,
    model: &FrequencyModel,
) -> Result<NormalizationResult<C>> {
    normalize_with(h, m, h2data, model, &NormalizerConfig::default())
}

pub fn normalize_with<C: Coefficient>(
    h: &TruncatedSeries<C>,
    m: u32,
    h2data: &QuadraticData<C>,
    model: &FrequencyModel,
    config: &NormalizerConfig,
) -> Result<NormalizationResult<C>> {
    check_equilibrium(h, h2data)?;
    validate_frequencies(model, &h2data.gamma, config.frequency_tolerance)?;
    if m < 3 {
        return Ok(NormalizationResult {
            order: m,
            normal_form: h.clone(),
            gens: Vec::new(),
            per_degree: Vec::new(),
        });
    }
    let mut current = h.truncate(m);
    let mut gens = Vec::with_capacity(m as usize - 2);
    let mut per_degree = Vec::with_capacity(m as usize - 2);
    for k in 3..=m {
        let hk = current.homogeneous(k);
        let (l, h_prime) = homological_split_with(&hk, h2data, model, config)?;
        let lower = current.degree_range(0, k - 1);
        let mut next = lie_transform(&current, &l, Direction::Forward, m)?;
        if next.degree_range(0, k - 1) != lower {
            return Err(Error::Invariant(format!("step {k} changed lower degrees")));
        }
        let produced = next.homogeneous(k);
        if C::EXACT {
            if produced != h_prime {
                return Err(Error::Invariant(format!(
                    "degree {k} part differs from the homological solution"
                )));
            }
        } else {
            next = next.plus(&produced.neg()).plus(&h_prime);
        }
        per_degree.push(DegreeStats {
            degree: k,
            gen_max: l.max_coefficient(),
            nf_max: h_prime.max_coefficient(),
        });
        gens.push(l.with_order(m));
        current = next;
    }
    Ok(NormalizationResult {
        order: m,
        normal_form: current,
        gens,
        per_degree,
    })
}

/// Applies the composed transformation of a normalisation to another function.
/// [`Direction::Forward`] expresses `g` in the normalised coordinates.
pub fn transform_function<C: Coefficient>(
    g: &TruncatedSeries<C>,
    gens: &[TruncatedSeries<C>],
    direction: Direction,
    m: u32,
) -> Result<TruncatedSeries<C>> {
    compose_transforms(g, gens, direction, m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormCheck<C: Coefficient> {
    pub residual: TruncatedSeries<C>,
    pub is_normal: bool,
}

/// `{H_ss, A}` restricted to degree `m` and whether it vanishes exactly.
pub fn check_normal_form<C: Coefficient>(
    a: &TruncatedSeries<C>,
    hss: &TruncatedSeries<C>,
    m: u32,
) -> Result<NormalFormCheck<C>> {
    if a.dof() != hss.dof() {
        return Err(Error::DimensionMismatch {
            expected: hss.dof(),
            found: a.dof(),
        });
    }
    let a = a.truncate(m);
    let residual = hss.with_order(m).bracket_unchecked(&a);
    let is_normal = residual.is_zero();
    Ok(NormalFormCheck { residual, is_normal })
}

/// Average over the torus action generated by the `F^(k)`: keeps exactly the
/// resonant monomials.
pub fn torus_average<C: Coefficient>(a: &TruncatedSeries<C>, model: &FrequencyModel) -> Result<TruncatedSeries<C>> {
    if a.dof() != model.dof() {
        return Err(Error::DimensionMismatch {
            expected: model.dof(),
            found: a.dof(),
        });
    }
    Ok(resonant_part(a, model).0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub degree: u32,
    pub gen_maxcoef: f64,
    pub nf_maxcoef: f64,
    pub nf_root: f64,
}

pub fn convergence_report<C: Coefficient>(result: &NormalizationResult<C>) -> Vec<ConvergenceRow> {
    result
        .per_degree
        .iter()
        .map(|s| ConvergenceRow {
            degree: s.degree,
            gen_maxcoef: s.gen_max,
            nf_maxcoef: s.nf_max,
            nf_root: s.nf_max.powf(1.0 / s.degree as f64),
        })
        .collect()
}

pub fn report_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("degree,gen_maxcoef,nf_maxcoef,nf_root\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.12e},{:.12e},{:.12e}",
            r.degree, r.gen_maxcoef, r.nf_maxcoef, r.nf_root
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::GaussRational;
    use crate::series::ExactSeries;

    fn q(num: i64, den: i64) -> GaussRational {
        GaussRational::from_ratio(num, den)
    }

    fn s(n: usize, order: u32, terms: &[(&[u16], GaussRational)]) -> ExactSeries {
        ExactSeries::from_terms(
            n,
            order,
            terms.iter().map(|(e, c)| (Monomial::new(e.to_vec()), c.clone())),
        )
    }

    fn setup(h: &ExactSeries) -> (QuadraticData<GaussRational>, FrequencyModel) {
        let data = QuadraticData::working(&h.homogeneous(2), 0.0).unwrap();
        let model = FrequencyModel::rational(&data.gamma);
        (data, model)
    }

    #[test]
    fn single_cubic_monomial() {
        let h = s(1, 10, &[(&[1, 1], q(1, 1)), (&[3, 0], q(1, 1))]);
        let (data, model) = setup(&h);
        let (l, hp) = homological_split(&h.homogeneous(3), &data, &model).unwrap();
        assert_eq!(l, s(1, 10, &[(&[3, 0], q(1, 3))]));
        assert!(hp.is_zero());

        let res = normalize(&h, 10, &data, &model).unwrap();
        assert_eq!(res.normal_form, s(1, 10, &[(&[1, 1], q(1, 1))]));
        assert_eq!(res.gens.len(), 8);
        assert_eq!(res.gens[0], l);
        assert!(res.gens[1..].iter().all(TruncatedSeries::is_zero));
        assert_eq!(convergence_report(&res).len(), 8);
    }

    #[test]
    fn resonant_input_is_kept() {
        let h = s(
            2,
            6,
            &[
                (&[1, 0, 1, 0], q(1, 1)),
                (&[0, 1, 0, 1], q(3, 1)),
                (&[2, 0, 2, 0], q(5, 1)),
            ],
        );
        let (data, model) = setup(&h);
        let (l, hp) = homological_split(&h.homogeneous(4), &data, &model).unwrap();
        assert!(l.is_zero());
        assert_eq!(hp, h.homogeneous(4));
        let res = normalize(&h, 6, &data, &model).unwrap();
        assert_eq!(res.normal_form, h);
        assert!(res.gens.iter().all(TruncatedSeries::is_zero));
    }

    #[test]
    fn nilpotent_quadratic_part() {
        // H_2 = xy + x^2, H_3 = x^2 y
        let h2 = s(1, 6, &[(&[1, 1], q(1, 1)), (&[2, 0], q(1, 1))]);
        let data = QuadraticData::working(&h2, 0.0).unwrap();
        assert!(!data.commuting());
        let model = FrequencyModel::rational(&data.gamma);
        let hk = s(1, 6, &[(&[2, 1], q(1, 1))]);
        let (l, hp) = homological_split(&hk, &data, &model).unwrap();
        assert_eq!(hp.plus(&h2.bracket_unchecked(&l).neg()), hk);
        assert!(data.hss.bracket_unchecked(&hp).is_zero());
    }

    #[test]
    fn parity_removes_cubic_terms() {
        let h = s(
            2,
            5,
            &[
                (&[1, 0, 1, 0], q(1, 1)),
                (&[0, 1, 0, 1], q(-1, 1)),
                (&[1, 1, 1, 0], q(2, 1)),
                (&[0, 0, 3, 0], q(-1, 2)),
                (&[1, 0, 1, 1], q(1, 1)),
            ],
        );
        let (data, model) = setup(&h);
        let res = normalize(&h, 5, &data, &model).unwrap();
        assert!(res.normal_form.homogeneous(3).is_zero());
        assert!(check_normal_form(&res.normal_form, &data.hss, 5).unwrap().is_normal);
    }

    #[test]
    fn check_and_average() {
        let gamma = [q(1, 1)];
        let hss = crate::series::diagonal_quadratic(&gamma, 6);
        let model = FrequencyModel::rational(&gamma);
        let x3 = s(1, 6, &[(&[3, 0], q(1, 1))]);
        let check = check_normal_form(&x3, &hss, 6).unwrap();
        assert!(!check.is_normal);
        // {xy, x^3} = -3 x^3
        assert_eq!(check.residual, s(1, 6, &[(&[3, 0], q(-3, 1))]));
        let a = hss.plus(&x3);
        assert_eq!(torus_average(&a, &model).unwrap(), hss);
        assert_eq!(torus_average(&hss, &model).unwrap(), hss);
    }

    #[test]
    fn frequency_mismatch_detected() {
        let h = s(2, 4, &[(&[1, 0, 1, 0], q(1, 1)), (&[0, 1, 0, 1], q(3, 1))]);
        let data = QuadraticData::working(&h, 0.0).unwrap();
        let wrong = FrequencyModel::rational(&[q(1, 1), q(2, 1)]);
        assert!(matches!(
            normalize(&h, 4, &data, &wrong),
            Err(Error::FrequencyMismatch(_))
        ));
    }

    #[test]
    fn float_near_resonance_is_reported() {
        let h = s(
            2,
            4,
            &[
                (&[1, 0, 1, 0], q(1, 1)),
                (&[0, 1, 0, 1], q(-1, 1)),
                (&[1, 1, 1, 1], q(1, 1)),
            ],
        )
        .to_float();
        let mut data = QuadraticData::working(&h, 1e-12).unwrap();
        data.gamma[1] += num_complex::Complex64::new(1e-10, 0.0);
        data.hss = crate::series::diagonal_quadratic(&data.gamma, 4);
        data.h2 = data.hss.clone();
        let h = h.plus(&h.homogeneous(2).neg()).plus(&data.h2);
        let h = h.plus(&TruncatedSeries::monomial(
            2,
            4,
            Monomial::new(vec![2, 2, 0, 0]),
            num_complex::Complex64::new(1.0, 0.0),
        ));
        let model = FrequencyModel::independent(&data.gamma);
        assert!(matches!(
            normalize(&h, 4, &data, &model),
            Err(Error::NearResonance { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let rows = vec![ConvergenceRow {
            degree: 3,
            gen_maxcoef: 0.5,
            nf_maxcoef: 0.0,
            nf_root: 0.0,
        }];
        assert_eq!(
            report_csv(&rows),
            "degree,gen_maxcoef,nf_maxcoef,nf_root\n3,5.000000000000e-1,0.000000000000e0,0.000000000000e0\n"
        );
    }
}
