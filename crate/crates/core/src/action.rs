//! Action functions from period integrals.
//!
//! For a base point `z` the orbit of the linear circle action generated by
//! `i F^(k)` in normalised coordinates is pulled back through the truncated
//! normalising map, projected onto the fibre of the momentum map through `z`,
//! and `(1 / 2 pi) \oint sum_j x_j dy_j` is evaluated on the projected curve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::lie::{compose_transforms, Direction};
use crate::series::{FloatSeries, TruncatedSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    z: Vec<Complex64>,
}

impl PhasePoint {
    /// `z = (x_1..x_n, y_1..y_n)`.
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if !z.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: z.len() + 1,
                found: z.len(),
            });
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::EvaluationOverflow);
        }
        Ok(PhasePoint { z })
    }

    pub fn from_xy(x: &[Complex64], y: &[Complex64]) -> Result<Self> {
        PhasePoint::new(x.iter().chain(y).copied().collect())
    }

    pub fn dof(&self) -> usize {
        self.z.len() / 2
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.z
    }

    pub fn x(&self) -> &[Complex64] {
        &self.z[..self.dof()]
    }

    pub fn y(&self) -> &[Complex64] {
        &self.z[self.dof()..]
    }

    /// Hermitian norm.
    pub fn norm(&self) -> f64 {
        self.z.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Uniformly parametrised closed curve, `t_i = 2 pi i / N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    samples: Vec<PhasePoint>,
}

impl ClosedCurve {
    pub fn new(samples: Vec<PhasePoint>) -> Result<Self> {
        let n = samples.len();
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::DegenerateCurve(n));
        }
        let gaps: Vec<f64> = (0..n).map(|i| samples[i].distance(&samples[(i + 1) % n])).collect();
        let mean_gap = gaps.iter().sum::<f64>() / n as f64;
        let max_gap = gaps.iter().copied().fold(0.0, f64::max);
        if max_gap > 4.0 * mean_gap {
            return Err(Error::UnevenCurve { max_gap, mean_gap });
        }
        Ok(ClosedCurve { samples })
    }

    pub fn samples(&self) -> &[PhasePoint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn reversed(&self) -> ClosedCurve {
        let mut samples = self.samples.clone();
        samples[1..].reverse();
        ClosedCurve { samples }
    }
}

/// Commuting integrals `G_1 = H, G_2, ..., G_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumMap {
    components: Vec<FloatSeries>,
    gradients: Vec<Vec<FloatSeries>>,
}

impl MomentumMap {
    /// Checks `|{G_i, G_j}| <= tol` coefficientwise through the common order.
    pub fn new(components: Vec<FloatSeries>, tol: f64) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        };
        let n = first.dof();
        if components.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: components.len(),
            });
        }
        let order = components.iter().map(TruncatedSeries::order).min().unwrap_or(0);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let b = components[i]
                    .with_order(order)
                    .poisson_bracket(&components[j].with_order(order))?;
                worst = worst.max(b.max_coefficient());
            }
        }
        if worst > tol {
            return Err(Error::NotInvolutive(worst));
        }
        let gradients = components
            .iter()
            .map(|g| (0..2 * n).map(|v| g.derivative(v)).collect())
            .collect();
        Ok(MomentumMap { components, gradients })
    }

    pub fn dof(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FloatSeries] {
        &self.components
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.components.iter().map(|g| finite(g.evaluate(z)?)).collect()
    }

    /// `n x 2n` complex Jacobian.
    pub fn jacobian(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let n = self.dof();
        let mut j = DMatrix::zeros(n, 2 * n);
        for (i, row) in self.gradients.iter().enumerate() {
            for (v, d) in row.iter().enumerate() {
                j[(i, v)] = finite(d.evaluate(z)?)?;
            }
        }
        Ok(j)
    }
}

fn finite(c: Complex64) -> Result<Complex64> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::EvaluationOverflow)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionConfig {
    /// Samples per orbit; even and at least 16.
    pub steps: usize,
    /// Target residual `|G(w) - G(z)|` after projection.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admissible singular value of `DG` along the curve.
    pub regularity_floor: f64,
    /// Base points with larger Hermitian norm are rejected.
    pub working_radius: f64,
}

impl Default for ActionConfig {
    fn default() -> Self {
        ActionConfig {
            steps: 256,
            tol: 1e-12,
            max_iter: 50,
            regularity_floor: 1e-8,
            working_radius: 1.0,
        }
    }
}

/// Time-`t` flow of `X_{i F}` for `F = sum_j w_j x_j y_j`:
/// `x_j e^{-i w_j t}`, `y_j e^{i w_j t}`.
pub fn linear_circle_flow(weights: &[i64], t: f64, z: &PhasePoint) -> PhasePoint {
    let n = z.dof();
    let mut out = z.z.clone();
    for (j, &w) in weights.iter().enumerate().take(n) {
        let phase = Complex64::from_polar(1.0, w as f64 * t);
        out[j] *= phase.conj();
        out[n + j] *= phase;
    }
    PhasePoint { z: out }
}

/// The truncated normalising map `Phi_m` and its inverse as polynomial maps,
/// built from the generators of a normalisation.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizingMap {
    forward: Vec<FloatSeries>,
    inverse: Vec<FloatSeries>,
}

impl NormalizingMap {
    pub fn from_generators<C: Coefficient>(n: usize, gens: &[TruncatedSeries<C>], m: u32) -> Result<Self> {
        let coord = |v: usize, direction: Direction| -> Result<FloatSeries> {
            Ok(compose_transforms(&TruncatedSeries::<C>::variable(n, m, v), gens, direction, m)?.to_float())
        };
        Ok(NormalizingMap {
            forward: (0..2 * n)
                .map(|v| coord(v, Direction::Inverse))
                .collect::<Result<_>>()?,
            inverse: (0..2 * n)
                .map(|v| coord(v, Direction::Forward))
                .collect::<Result<_>>()?,
        })
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<FloatSeries> = (0..2 * n).map(|v| FloatSeries::variable(n, 1, v)).collect();
        NormalizingMap {
            forward: id.clone(),
            inverse: id,
        }
    }

    fn apply(maps: &[FloatSeries], z: &PhasePoint) -> Result<PhasePoint> {
        let out = maps
            .iter()
            .map(|p| finite(p.evaluate(z.coords())?))
            .collect::<Result<Vec<_>>>()?;
        PhasePoint::new(out)
    }

    /// Normalised coordinates of `z`.
    pub fn to_normal(&self, z: &PhasePoint) -> Result<PhasePoint> {
        Self::apply(&self.forward, z)
    }

    pub fn from_normal(&self, w: &PhasePoint) -> Result<PhasePoint> {
        Self::apply(&self.inverse, w)
    }
}

/// Samples of `Phi_m^{-1}(flow_t(Phi_m(z)))`, translated so that the first
/// sample is exactly `z`.
pub fn normalized_circle_orbit(
    z: &PhasePoint,
    weights: &[i64],
    map: &NormalizingMap,
    steps: usize,
    working_radius: f64,
) -> Result<ClosedCurve> {
    let norm = z.norm();
    if norm > working_radius {
        return Err(Error::OutsideRadius {
            norm,
            radius: working_radius,
        });
    }
    if steps < 16 || !steps.is_multiple_of(2) {
        return Err(Error::DegenerateCurve(steps));
    }
    let w = map.to_normal(z)?;
    let base = map.from_normal(&w)?;
    let samples = (0..steps)
        .map(|i| {
            if i == 0 {
                return Ok(z.clone());
            }
            let t = 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
            let p = map.from_normal(&linear_circle_flow(weights, t, &w))?;
            let shifted = p.z.iter().zip(&base.z).zip(&z.z).map(|((a, b), c)| a - b + c).collect();
            PhasePoint::new(shifted)
        })
        .collect::<Result<Vec<_>>>()?;
    ClosedCurve::new(samples)
}

/// Per-sample outcome of a fibre projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub curve: ClosedCurve,
    pub displacement: Vec<f64>,
    pub iterations: Vec<usize>,
}

fn singular_values(j: &DMatrix<Complex64>) -> Vec<f64> {
    j.clone().svd(false, false).singular_values.iter().copied().collect()
}

fn project_point(
    index: usize,
    z: &PhasePoint,
    g: &MomentumMap,
    target: &[Complex64],
    config: &ActionConfig,
) -> Result<(PhasePoint, f64, usize)> {
    let residual_of = |w: &[Complex64]| -> Result<DVector<Complex64>> {
        let v = g.evaluate(w)?;
        Ok(DVector::from_iterator(
            v.len(),
            v.iter().zip(target).map(|(a, b)| a - b),
        ))
    };
    let mut w = z.z.clone();
    let mut r = residual_of(&w)?;
    let mut first_step: Option<f64> = None;
    for iter in 0..=config.max_iter {
        if r.norm() <= config.tol {
            let point = PhasePoint::new(w)?;
            let moved = point.distance(z);
            if let Some(s) = first_step {
                if moved > 10.0 * s {
                    return Err(Error::NoConvergence {
                        sample: index,
                        residual: r.norm(),
                    });
                }
            }
            return Ok((point, moved, iter));
        }
        if iter == config.max_iter {
            break;
        }
        let jac = g.jacobian(&w)?;
        let svd = jac.svd(true, true);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        if sigma_min < config.regularity_floor {
            return Err(Error::Singular {
                sigma: sigma_min,
                floor: config.regularity_floor,
            });
        }
        let pinv = svd
            .pseudo_inverse(1e-12 * sigma_max)
            .map_err(|e| Error::Invariant(e.to_string()))?;
        let step = pinv * &r;
        first_step.get_or_insert(step.norm());
        for (wi, si) in w.iter_mut().zip(step.iter()) {
            *wi -= si;
        }
        r = residual_of(&w)?;
    }
    Err(Error::NoConvergence {
        sample: index,
        residual: r.norm(),
    })
}

/// Gauss-Newton projection of every sample onto `{G = target}` along the range of `DG^+`.
pub fn project_to_fiber(
    curve: &ClosedCurve,
    g: &MomentumMap,
    target: &[Complex64],
    config: &ActionConfig,
) -> Result<Projection> {
    if target.len() != g.dof() {
        return Err(Error::DimensionMismatch {
            expected: g.dof(),
            found: target.len(),
        });
    }
    let work = |(i, z): (usize, &PhasePoint)| project_point(i, z, g, target, config);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(PhasePoint, f64, usize)>> = curve.samples.par_iter().enumerate().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(PhasePoint, f64, usize)>> = curve.samples.iter().enumerate().map(work).collect();
    let mut samples = Vec::with_capacity(curve.len());
    let mut displacement = Vec::with_capacity(curve.len());
    let mut iterations = Vec::with_capacity(curve.len());
    for r in results {
        let (p, d, it) = r?;
        samples.push(p);
        displacement.push(d);
        iterations.push(it);
    }
    Ok(Projection {
        curve: ClosedCurve::new(samples)?,
        displacement,
        iterations,
    })
}

/// Derivative with respect to the curve parameter of periodic samples.
fn periodic_derivative(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    if n < 64 {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        return (0..n)
            .map(|i| (values[(i + 1) % n] - values[(i + n - 1) % n]) / (2.0 * h))
            .collect();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = values.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, c) in buf.iter_mut().enumerate() {
        let k = match j.cmp(&(n / 2)) {
            std::cmp::Ordering::Less => j as f64,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => j as f64 - n as f64,
        };
        *c *= Complex64::new(0.0, k / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// `(1 / 2 pi) \oint sum_j x_j dy_j` by the periodic trapezoidal rule.
pub fn period_integral(curve: &ClosedCurve) -> Result<Complex64> {
    let n_steps = curve.len();
    if n_steps < 16 || !n_steps.is_multiple_of(2) {
        return Err(Error::DegenerateCurve(n_steps));
    }
    let dof = curve.samples[0].dof();
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..dof {
        let y: Vec<Complex64> = curve.samples.iter().map(|p| p.y()[j]).collect();
        let dy = periodic_derivative(&y);
        for (p, d) in curve.samples.iter().zip(&dy) {
            total += p.x()[j] * d;
        }
    }
    Ok(total / n_steps as f64)
}

/// Orbit, projection onto the fibre through `z`, and period integral.
pub fn action_function(
    z: &PhasePoint,
    weights: &[i64],
    map: &NormalizingMap,
    g: &MomentumMap,
    config: &ActionConfig,
) -> Result<Complex64> {
    let curve = normalized_circle_orbit(z, weights, map, config.steps, config.working_radius)?;
    let target = g.evaluate(z.coords())?;
    let projected = project_to_fiber(&curve, g, &target, config)?;
    period_integral(&projected.curve)
}

/// Smallest singular value of `DG(z)` and the product of all of them.
pub fn regularity_diagnostic(g: &MomentumMap, z: &PhasePoint) -> Result<(f64, f64)> {
    let sv = singular_values(&g.jacobian(z.coords())?);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, sv.iter().product()))
}

/// Classical RK4 integration of `x' = -dH/dy`, `y' = dH/dx` over real time `t`.
pub fn hamiltonian_flow(h: &FloatSeries, z: &PhasePoint, t: f64, steps: usize) -> Result<PhasePoint> {
    let n = h.dof();
    let grads: Vec<FloatSeries> = (0..2 * n).map(|v| h.derivative(v)).collect();
    let field = |w: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
        for j in 0..n {
            out[j] = -finite(grads[n + j].evaluate(w)?)?;
            out[n + j] = finite(grads[j].evaluate(w)?)?;
        }
        Ok(out)
    };
    let dt = t / steps as f64;
    let mut w = z.z.clone();
    let axpy = |a: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
        a.iter().zip(k).map(|(x, d)| x + d * s).collect()
    };
    for _ in 0..steps {
        let k1 = field(&w)?;
        let k2 = field(&axpy(&w, &k1, dt / 2.0))?;
        let k3 = field(&axpy(&w, &k2, dt / 2.0))?;
        let k4 = field(&axpy(&w, &k3, dt))?;
        for i in 0..2 * n {
            w[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }
    PhasePoint::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::Monomial;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn point(v: &[f64]) -> PhasePoint {
        PhasePoint::new(v.iter().map(|&r| c(r)).collect()).unwrap()
    }

    fn action_map(n: usize, j: usize) -> FloatSeries {
        FloatSeries::monomial(n, 4, Monomial::action(n, j), c(1.0))
    }

    #[test]
    fn flow_closed_form() {
        let z = point(&[1.0, 1.0]);
        let half = linear_circle_flow(&[1], PI, &z);
        assert!(half.distance(&point(&[-1.0, -1.0])) < 1e-15);
        let full = linear_circle_flow(&[1], 2.0 * PI, &z);
        assert!(full.distance(&z) < 1e-14);
        assert_eq!(linear_circle_flow(&[1], 0.0, &z), z);
        let p = linear_circle_flow(&[1], 0.7, &z);
        assert!((p.x()[0] * p.y()[0] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn model_period_integral() {
        let z = point(&[0.1, 0.2]);
        let orbit = normalized_circle_orbit(&z, &[1], &NormalizingMap::identity(1), 256, 1.0).unwrap();
        let p = period_integral(&orbit).unwrap();
        assert!((p - Complex64::new(0.0, 0.02)).norm() < 1e-15);
        let back = period_integral(&orbit.reversed()).unwrap();
        assert!((back + p).norm() < 1e-15);
        let coarse = normalized_circle_orbit(&z, &[1], &NormalizingMap::identity(1), 32, 1.0).unwrap();
        // centred differences scale the derivative of e^{it} by sin(h) / h
        let h = 2.0 * PI / 32.0;
        assert!((period_integral(&coarse).unwrap() - p * (h.sin() / h)).norm() < 1e-15);
    }

    #[test]
    fn constant_curve_has_zero_period() {
        let z = point(&[0.3, -0.2]);
        let curve = ClosedCurve::new(vec![z; 16]).unwrap();
        assert_eq!(period_integral(&curve).unwrap(), c(0.0));
        assert!(matches!(
            ClosedCurve::new(vec![point(&[0.0, 0.0]); 15]),
            Err(Error::DegenerateCurve(15))
        ));
    }

    #[test]
    fn projection_newton_on_quadratic() {
        let g = MomentumMap::new(vec![action_map(1, 0)], 1e-12).unwrap();
        let target = [c(0.02)];
        // gradient of xy at (0.1, 0.2) is (0.2, 0.1)
        let eps = 1e-3;
        let off = point(&[0.1 + 0.2 * eps, 0.2 + 0.1 * eps]);
        let config = ActionConfig::default();
        let (p, _, iters) = project_point(0, &off, &g, &target, &config).unwrap();
        assert!((g.evaluate(p.coords()).unwrap()[0] - target[0]).norm() <= 1e-12);
        assert!(iters <= 5);
        let on = point(&[0.1, 0.2]);
        let (same, moved, zero) = project_point(0, &on, &g, &target, &config).unwrap();
        assert_eq!((same, moved, zero), (on, 0.0, 0));
    }

    #[test]
    fn regularity_values() {
        let g = MomentumMap::new(vec![action_map(1, 0)], 1e-12).unwrap();
        let (min, prod) = regularity_diagnostic(&g, &point(&[0.1, 0.2])).unwrap();
        assert!((min - 0.05f64.sqrt()).abs() < 1e-15);
        assert!((prod - min).abs() < 1e-15);
        assert_eq!(regularity_diagnostic(&g, &point(&[0.0, 0.0])).unwrap().0, 0.0);
        let coords = MomentumMap::new(
            vec![FloatSeries::variable(2, 3, 0), FloatSeries::variable(2, 3, 1)],
            1e-12,
        )
        .unwrap();
        let (min, _) = regularity_diagnostic(&coords, &point(&[0.3, 0.1, -0.4, 2.0])).unwrap();
        assert!((min - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_commuting_components_rejected() {
        let g = MomentumMap::new(
            vec![FloatSeries::variable(2, 3, 0), FloatSeries::variable(2, 3, 2)],
            1e-12,
        );
        assert!(matches!(g, Err(Error::NotInvolutive(_))));
    }

    #[test]
    fn normal_form_action_matches_generator() {
        let g = MomentumMap::new(vec![action_map(2, 0), action_map(2, 1)], 1e-12).unwrap();
        let z = PhasePoint::new(vec![c(0.05), Complex64::new(0.02, 0.01), c(-0.03), c(0.04)]).unwrap();
        let p = action_function(&z, &[1, 2], &NormalizingMap::identity(2), &g, &ActionConfig::default()).unwrap();
        let f = z.x()[0] * z.y()[0] + 2.0 * z.x()[1] * z.y()[1];
        assert!((p - Complex64::i() * f).norm() < 1e-15);
    }

    #[test]
    fn flow_preserves_hamiltonian() {
        let h = action_map(1, 0).plus(&FloatSeries::monomial(1, 4, Monomial::new(vec![2, 2]), c(1.0)));
        let z = point(&[0.1, 0.3]);
        let w = hamiltonian_flow(&h, &z, 1.0, 1000).unwrap();
        let before = h.evaluate(z.coords()).unwrap();
        let after = h.evaluate(w.coords()).unwrap();
        assert!((before - after).norm() < 1e-12);
        assert!(w.distance(&z) > 1e-3);
    }

    #[test]
    fn radius_is_enforced() {
        let z = point(&[2.0, 0.0]);
        assert!(matches!(
            normalized_circle_orbit(&z, &[1], &NormalizingMap::identity(1), 64, 1.0),
            Err(Error::OutsideRadius { .. })
        ));
    }
}
