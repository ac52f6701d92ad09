//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Each export is a thin wrapper over a plain function so the logic can be
//! tested natively.

use birkhoff::action::{normalized_circle_orbit, period_integral, project_to_fiber};
use birkhoff::coeff::parse_complex;
use birkhoff::lie::compose_transforms;
use birkhoff::normalizer::{convergence_report, report_csv};
use birkhoff::resonance::weighted_action;
use birkhoff::{
    emit_system, lie_transform, normal_form_spec, normalize, parse_system, ActionConfig, Complex64, Direction,
    ExactSeries, FloatSeries, GaussRational, MomentumMap, Monomial, NormalizationResult, NormalizingMap, PhasePoint,
    QuadraticData, ResonanceBasis, SystemSpec,
};
use wasm_bindgen::prelude::*;

fn js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

fn text(e: birkhoff::Error) -> String {
    format!("[{}] {e}", e.code())
}

/// Integrable two-degree-of-freedom example: `x1y1 + 2x2y2 + (x1y1)^2` and
/// `x2y2`, pulled back through a cubic generator so that neither is normal.
pub fn example_system(order: u32) -> Result<String, String> {
    let q = |n: i64, d: i64| GaussRational::from_parts(n, d, 0, 1);
    let s = |terms: &[([u16; 4], GaussRational)]| {
        ExactSeries::from_terms(
            2,
            order,
            terms.iter().map(|(e, c)| (Monomial::new(e.to_vec()), c.clone())),
        )
    };
    let l = s(&[
        ([3, 0, 0, 0], q(1, 3)),
        ([1, 0, 0, 2], q(1, 2)),
        ([0, 1, 1, 1], q(-1, 1)),
    ]);
    let n0 = s(&[
        ([1, 0, 1, 0], q(1, 1)),
        ([0, 1, 0, 1], q(2, 1)),
        ([2, 0, 2, 0], q(1, 1)),
    ]);
    let g2 = s(&[([0, 1, 0, 1], q(1, 1))]);
    let h = lie_transform(&n0, &l, Direction::Inverse, order).map_err(text)?;
    let mut spec = SystemSpec::new(h);
    spec.integrals
        .push((2, lie_transform(&g2, &l, Direction::Inverse, order).map_err(text)?));
    Ok(emit_system(&spec))
}

struct Normalized {
    spec: SystemSpec,
    data: QuadraticData<GaussRational>,
    basis: ResonanceBasis,
    result: NormalizationResult<GaussRational>,
}

fn run_normalize(system: &str, order: u32) -> Result<Normalized, String> {
    let spec = parse_system(system).map_err(text)?;
    let data = QuadraticData::working(&spec.hamiltonian.homogeneous(2), 1e-12).map_err(text)?;
    let model = spec.frequency_model(&data.gamma);
    let basis = ResonanceBasis::compute(&model).map_err(text)?;
    let result = normalize(&spec.hamiltonian, order, &data, &model).map_err(text)?;
    Ok(Normalized {
        spec,
        data,
        basis,
        result,
    })
}

/// Normal-form file followed by a blank line and the convergence CSV.
pub fn normalize_report(system: &str, order: u32) -> Result<String, String> {
    let n = run_normalize(system, order)?;
    let mut out = emit_system(&normal_form_spec(&n.spec, &n.result));
    let gamma: Vec<String> = n.data.gamma.iter().map(|g| format!("{g:?}")).collect();
    out.push_str(&format!(
        "\n# gamma = ({}), resonance degree q = {}\n\n",
        gamma.join(", "),
        n.basis.q
    ));
    out.push_str(&report_csv(&convergence_report(&n.result)));
    Ok(out)
}

/// Projected circle orbit through `point` and its period integral.
#[wasm_bindgen]
pub struct OrbitResult {
    action: Complex64,
    expected: Complex64,
    curve: Vec<f64>,
    max_displacement: f64,
}

#[wasm_bindgen]
impl OrbitResult {
    pub fn action_re(&self) -> f64 {
        self.action.re
    }

    pub fn action_im(&self) -> f64 {
        self.action.im
    }

    /// Real and imaginary part of `i F^(k)_m(z)`.
    pub fn expected_re(&self) -> f64 {
        self.expected.re
    }

    pub fn expected_im(&self) -> f64 {
        self.expected.im
    }

    /// Interleaved `(Re x_1, Re y_1)` of the projected samples.
    pub fn curve(&self) -> Vec<f64> {
        self.curve.clone()
    }

    pub fn max_displacement(&self) -> f64 {
        self.max_displacement
    }
}

pub fn compute_orbit(system: &str, order: u32, k: usize, point: &str, steps: usize) -> Result<OrbitResult, String> {
    let n = run_normalize(system, order)?;
    let dof = n.spec.n;
    let coords = point
        .split(',')
        .map(|t| parse_complex(t).ok_or_else(|| format!("invalid coordinate `{}`", t.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != 2 * dof {
        return Err(format!("point needs {} coordinates", 2 * dof));
    }
    let z = PhasePoint::new(coords).map_err(text)?;
    if k == 0 || k > n.basis.rank() {
        return Err(format!("k must lie in 1..={}", n.basis.rank()));
    }
    let mut components: Vec<FloatSeries> = vec![n.spec.hamiltonian.to_float()];
    components.extend(n.spec.integrals.iter().map(|(_, g)| g.to_float()));
    if components.len() != dof {
        return Err(format!("the system needs integrals 2..{dof}"));
    }
    let g = MomentumMap::new(components, 1e-9).map_err(text)?;
    let config = ActionConfig {
        steps,
        ..ActionConfig::default()
    };
    let weights = &n.basis.rho[k - 1];
    let map = NormalizingMap::from_generators(dof, &n.result.gens, order).map_err(text)?;
    let curve = normalized_circle_orbit(&z, weights, &map, config.steps, config.working_radius).map_err(text)?;
    let target = g.evaluate(z.coords()).map_err(text)?;
    let projected = project_to_fiber(&curve, &g, &target, &config).map_err(text)?;
    let action = period_integral(&projected.curve).map_err(text)?;
    let fm = compose_transforms(
        &weighted_action::<GaussRational>(weights, order),
        &n.result.gens,
        Direction::Inverse,
        order,
    )
    .map_err(text)?;
    let expected = Complex64::i() * fm.to_float().evaluate(z.coords()).map_err(text)?;
    let curve = projected
        .curve
        .samples()
        .iter()
        .flat_map(|p| [p.x()[0].re, p.y()[0].re])
        .collect();
    Ok(OrbitResult {
        action,
        expected,
        curve,
        max_displacement: projected.displacement.iter().copied().fold(0.0, f64::max),
    })
}

#[wasm_bindgen(js_name = exampleSystem)]
pub fn example_system_js(order: u32) -> Result<String, JsValue> {
    example_system(order).map_err(js)
}

#[wasm_bindgen(js_name = normalizeReport)]
pub fn normalize_report_js(system: &str, order: u32) -> Result<String, JsValue> {
    normalize_report(system, order).map_err(js)
}

#[wasm_bindgen(js_name = computeOrbit)]
pub fn compute_orbit_js(system: &str, order: u32, k: usize, point: &str, steps: usize) -> Result<OrbitResult, JsValue> {
    compute_orbit(system, order, k, point, steps).map_err(js)
}
