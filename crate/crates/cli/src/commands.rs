use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use birkhoff::action::{normalized_circle_orbit, period_integral, project_to_fiber, regularity_diagnostic};
use birkhoff::coeff::parse_complex;
use birkhoff::io::emit_float_series;
use birkhoff::lie::compose_transforms;
use birkhoff::normalizer::{check_normal_form, convergence_report, normalize_with, report_csv};
use birkhoff::quadratic::{apply_linear, diagonalize};
use birkhoff::resonance::weighted_action;
use birkhoff::{
    emit_system, normal_form_spec, parse_system, ActionConfig, Complex64, Direction, ExactSeries, FloatSeries,
    FrequencyModel, GaussRational, MomentumMap, NormalizationResult, NormalizerConfig, NormalizingMap, PhasePoint,
    QuadraticData, ResonanceBasis, SystemSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Domain(birkhoff::Error),
    NotNormal(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::Io(..) => "E_IO",
            CliError::Domain(e) => e.code(),
            CliError::NotNormal(_) => "E_NOT_NORMAL",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::NotNormal(m) => m.clone(),
            CliError::Io(path, e) => format!("{}: {e}", path.display()),
            CliError::Domain(e) => e.to_string(),
        }
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<birkhoff::Error> for CliError {
    fn from(e: birkhoff::Error) -> Self {
        CliError::Domain(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "birkhoff",
    version,
    about = "Birkhoff normal forms of polynomial Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resonance lattice, dual basis and torus generators of the frequencies.
    Resonance(SystemArgs),
    /// Normalise the Hamiltonian and write the normal form with its generators.
    Normalize(NormalizeArgs),
    /// Apply the generators of a normal-form file to the Hamiltonian and integrals.
    Transform(TransformArgs),
    /// Check whether the Hamiltonian and integrals commute with H_ss.
    Check(CheckArgs),
    /// Action function P^(k) at a point via a projected circle orbit.
    Actions(ActionArgs),
    /// Per-degree coefficient growth of the normalisation as CSV.
    Diagnose(NormalizeArgs),
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// System file.
    system: PathBuf,
    /// Bring the quadratic part to diagonal form first.
    #[arg(long)]
    diagonalize: bool,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Truncation order; defaults to the `order` line of the file.
    #[arg(long)]
    order: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-degree diagnostics CSV here.
    #[arg(long)]
    diag: Option<PathBuf>,
    /// Double-precision arithmetic instead of exact.
    #[arg(long)]
    float: bool,
    /// Smallest admissible |lambda| in float mode.
    #[arg(long)]
    near_resonance_floor: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Forward,
    Inverse,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// File with `generator` blocks, as written by `normalize`.
    #[arg(long)]
    generators: PathBuf,
    #[arg(long, value_enum, default_value = "forward")]
    direction: DirectionArg,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long)]
    order: Option<u32>,
}

#[derive(Debug, Args)]
struct ActionArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long)]
    order: Option<u32>,
    /// Index of the torus generator, 1-based.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Comma-separated coordinates x_1..x_n, y_1..y_n; entries like `0.1`, `0.2i`, `0.1-0.2i`.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long)]
    steps: Option<usize>,
    /// Fibre projection residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Smallest admissible singular value of DG.
    #[arg(long)]
    floor: Option<f64>,
    /// Largest admissible norm of the base point.
    #[arg(long)]
    radius: Option<f64>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Resonance(args) => resonance(&args),
        Command::Normalize(args) => normalize_cmd(&args),
        Command::Transform(args) => transform(&args),
        Command::Check(args) => check(&args),
        Command::Actions(args) => actions(&args),
        Command::Diagnose(args) => diagnose(&args),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn quadratic_tol(spec: &SystemSpec) -> f64 {
    spec.tolerance("quadratic").unwrap_or(1e-12)
}

/// Exact system in working form: Hamiltonian, integrals and quadratic data.
struct Prepared {
    spec: SystemSpec,
    data: QuadraticData<GaussRational>,
    model: FrequencyModel,
}

fn prepare(args: &SystemArgs) -> Result<Prepared> {
    let mut spec = parse_system(&read(&args.system)?)?;
    let tol = quadratic_tol(&spec);
    if args.diagonalize {
        let (p, h, _) = diagonalize(&spec.hamiltonian, tol)?;
        for (_, g) in &mut spec.integrals {
            *g = apply_linear(g, &p)?;
        }
        spec.hamiltonian = h;
    }
    let data = QuadraticData::working(&spec.hamiltonian.homogeneous(2), tol)?;
    let model = spec.frequency_model(&data.gamma);
    Ok(Prepared { spec, data, model })
}

fn normalizer_config(spec: &SystemSpec, floor: Option<f64>) -> NormalizerConfig {
    let mut config = NormalizerConfig::default();
    if let Some(v) = floor.or(spec.tolerance("near_resonance")) {
        config.near_resonance_floor = v;
    }
    if let Some(v) = spec.tolerance("frequency") {
        config.frequency_tolerance = v;
    }
    config
}

fn resonance(args: &SystemArgs) -> Result<()> {
    let p = prepare(args)?;
    let basis = ResonanceBasis::compute(&p.model)?;
    let mut out = String::new();
    let gamma: Vec<String> = p.data.gamma.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "gamma {}", gamma.join(" "));
    let _ = writeln!(out, "q {}", basis.q);
    let n = basis.dof();
    let join = |v: &[i64]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    for (h, mu) in basis.mu.iter().enumerate() {
        let _ = writeln!(out, "mu {} {}", n - basis.q + h + 1, join(mu));
    }
    for (k, rho) in basis.rho.iter().enumerate() {
        let _ = writeln!(out, "rho {} {}", k + 1, join(rho));
    }
    for (k, alpha) in basis.alpha.iter().enumerate() {
        let a: Vec<String> = alpha.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "alpha {} {}", k + 1, a.join(" "));
    }
    for (k, rho) in basis.rho.iter().take(basis.rank()).enumerate() {
        let _ = writeln!(
            out,
            "F {} {}",
            k + 1,
            torus_display(&weighted_action::<GaussRational>(rho, 2))
        );
    }
    print!("{out}");
    Ok(())
}

/// `c*x1*y1 + ...` rendering of a torus generator.
fn torus_display(f: &ExactSeries) -> String {
    let mut terms: Vec<(usize, String)> = f
        .terms()
        .map(|(m, c)| (m.a().iter().position(|&a| a == 1).unwrap_or(0), c.re.to_string()))
        .collect();
    terms.sort();
    let parts: Vec<String> = terms.iter().map(|(j, c)| format!("{c}*x{0}*y{0}", j + 1)).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn exact_normalization(p: &Prepared, order: u32, floor: Option<f64>) -> Result<NormalizationResult<GaussRational>> {
    let config = normalizer_config(&p.spec, floor);
    Ok(normalize_with(&p.spec.hamiltonian, order, &p.data, &p.model, &config)?)
}

fn float_normalization(p: &Prepared, order: u32, floor: Option<f64>) -> Result<NormalizationResult<Complex64>> {
    let config = normalizer_config(&p.spec, floor);
    let h = p.spec.hamiltonian.to_float();
    let data = QuadraticData::working(&h.homogeneous(2), quadratic_tol(&p.spec))?;
    Ok(normalize_with(&h, order, &data, &p.model, &config)?)
}

fn normalize_cmd(args: &NormalizeArgs) -> Result<()> {
    let p = prepare(&args.sys)?;
    let order = args.order.unwrap_or(p.spec.order);
    let (text, csv) = if args.float {
        let result = float_normalization(&p, order, args.near_resonance_floor)?;
        let mut text = format!("dof {}\norder {}\n", p.spec.n, order);
        text.push_str(&emit_float_series(&result.normal_form));
        for (k, l) in (3..).zip(&result.gens) {
            let _ = writeln!(text, "generator {k}");
            text.push_str(&emit_float_series(l));
        }
        (text, report_csv(&convergence_report(&result)))
    } else {
        let result = exact_normalization(&p, order, args.near_resonance_floor)?;
        let text = emit_system(&normal_form_spec(&p.spec, &result));
        (text, report_csv(&convergence_report(&result)))
    };
    if let Some(path) = &args.diag {
        write_or_print(Some(path), &csv)?;
    }
    write_or_print(args.out.as_deref(), &text)
}

fn diagnose(args: &NormalizeArgs) -> Result<()> {
    let p = prepare(&args.sys)?;
    let order = args.order.unwrap_or(p.spec.order);
    let csv = if args.float {
        report_csv(&convergence_report(&float_normalization(
            &p,
            order,
            args.near_resonance_floor,
        )?))
    } else {
        report_csv(&convergence_report(&exact_normalization(
            &p,
            order,
            args.near_resonance_floor,
        )?))
    };
    write_or_print(args.out.as_deref(), &csv)
}

fn transform(args: &TransformArgs) -> Result<()> {
    let p = prepare(&args.sys)?;
    let gens_file = parse_system(&read(&args.generators)?)?;
    if gens_file.n != p.spec.n {
        return Err(birkhoff::Error::DimensionMismatch {
            expected: p.spec.n,
            found: gens_file.n,
        }
        .into());
    }
    let order = args.order.unwrap_or(p.spec.order);
    let gens: Vec<ExactSeries> = gens_file.generators.iter().map(|(_, l)| l.clone()).collect();
    let direction = match args.direction {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Inverse => Direction::Inverse,
    };
    let mut spec = p.spec.clone();
    spec.order = order;
    spec.hamiltonian = compose_transforms(&spec.hamiltonian, &gens, direction, order)?;
    for (_, g) in &mut spec.integrals {
        *g = compose_transforms(g, &gens, direction, order)?;
    }
    spec.generators.clear();
    write_or_print(args.out.as_deref(), &emit_system(&spec))
}

fn check(args: &CheckArgs) -> Result<()> {
    let p = prepare(&args.sys)?;
    let order = args.order.unwrap_or(p.spec.order);
    let mut functions = vec![("hamiltonian".to_string(), &p.spec.hamiltonian)];
    functions.extend(p.spec.integrals.iter().map(|(i, g)| (format!("integral {i}"), g)));
    let mut offenders = Vec::new();
    for (name, f) in functions {
        let result = check_normal_form(f, &p.data.hss, order)?;
        if result.is_normal {
            println!("{name}: normal");
        } else {
            println!(
                "{name}: {} residual terms, max |coefficient| {:e}",
                result.residual.len(),
                result.residual.max_coefficient()
            );
            offenders.push(name);
        }
    }
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotNormal(format!(
            "not in normal form through order {order}: {}",
            offenders.join(", ")
        )))
    }
}

fn parse_point(text: &str, n: usize) -> Result<PhasePoint> {
    let coords = text
        .split(',')
        .map(|t| parse_complex(t).ok_or_else(|| CliError::Usage(format!("invalid coordinate `{}`", t.trim()))))
        .collect::<Result<Vec<_>>>()?;
    if coords.len() != 2 * n {
        return Err(CliError::Usage(format!(
            "--point needs {} coordinates, found {}",
            2 * n,
            coords.len()
        )));
    }
    Ok(PhasePoint::new(coords)?)
}

fn action_config(args: &ActionArgs, spec: &SystemSpec) -> ActionConfig {
    let mut c = ActionConfig::default();
    let pick = |flag: Option<f64>, key: &str, default: f64| flag.or(spec.tolerance(key)).unwrap_or(default);
    c.tol = pick(args.tol, "projection", c.tol);
    c.regularity_floor = pick(args.floor, "regularity", c.regularity_floor);
    c.working_radius = pick(args.radius, "radius", c.working_radius);
    if let Some(s) = args.steps {
        c.steps = s;
    }
    if let Some(m) = args.max_iter {
        c.max_iter = m;
    }
    c
}

fn actions(args: &ActionArgs) -> Result<()> {
    let p = prepare(&args.sys)?;
    let n = p.spec.n;
    let order = args.order.unwrap_or(p.spec.order);
    let config = action_config(args, &p.spec);
    let z = parse_point(&args.point, n)?;

    let mut components: Vec<FloatSeries> = vec![p.spec.hamiltonian.to_float()];
    components.extend(p.spec.integrals.iter().map(|(_, g)| g.to_float()));
    if components.len() != n {
        return Err(CliError::Usage(format!(
            "actions needs integrals 2..{n} in the system file, found {}",
            components.len() - 1
        )));
    }
    let g = MomentumMap::new(components, config.tol.max(1e-12) * 1e3)?;

    let basis = ResonanceBasis::compute(&p.model)?;
    if args.k == 0 || args.k > basis.rank() {
        return Err(CliError::Usage(format!("--k must lie in 1..={}", basis.rank())));
    }
    let weights = &basis.rho[args.k - 1];
    let result = exact_normalization(&p, order, None)?;
    let map = NormalizingMap::from_generators(n, &result.gens, order)?;
    let fm = compose_transforms(
        &weighted_action::<GaussRational>(weights, order),
        &result.gens,
        Direction::Inverse,
        order,
    )?;

    let curve = normalized_circle_orbit(&z, weights, &map, config.steps, config.working_radius)?;
    let target = g.evaluate(z.coords())?;
    let projected = project_to_fiber(&curve, &g, &target, &config)?;
    let action = period_integral(&projected.curve)?;
    let expected = Complex64::i() * fm.to_float().evaluate(z.coords())?;
    let (min_sv, _) = regularity_diagnostic(&g, &z)?;

    let fmt = |c: Complex64| format!("{:.15e} {:.15e}", c.re, c.im);
    println!("P {} {}", args.k, fmt(action));
    println!("iF_m {} {}", args.k, fmt(expected));
    println!("difference {:.3e}", (action - expected).norm());
    println!(
        "max_displacement {:.3e}",
        projected.displacement.iter().copied().fold(0.0, f64::max)
    );
    println!(
        "max_iterations {}",
        projected.iterations.iter().copied().max().unwrap_or(0)
    );
    println!("min_singular_value {min_sv:.3e}");
    Ok(())
}
