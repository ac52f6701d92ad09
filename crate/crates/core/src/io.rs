//! Line-oriented system files.
//!
//! ```text
//! # comment
//! dof 1
//! order 10
//! freqbasis 1
//! freq 1 1/1,0/1
//! term 1/1,0/1 : 1 1
//! term 1/1,0/1 : 3 0
//! ```
//!
//! Other directives: `numericfreq <l> <re> <im>`, `tolerance <key> <value>`,
//! `integral <i>` (following terms belong to `G_i`), `generator <k>` (terms of
//! `L_k`) and `hamiltonian` (switch back). Exponents list `a_1..a_n b_1..b_n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::coeff::{parse_gauss, Coefficient, GaussRational};
use crate::error::{Error, Result};
use crate::monomial::Monomial;
use crate::normalizer::{validate_frequencies, NormalizationResult};
use crate::quadratic::QuadraticData;
use crate::resonance::FrequencyModel;
use crate::series::{ExactSeries, TruncatedSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub order: u32,
    pub model: Option<FrequencyModel>,
    pub hamiltonian: ExactSeries,
    /// `(i, G_i)` for `i = 2..n`, sorted by `i`.
    pub integrals: Vec<(usize, ExactSeries)>,
    /// `(k, L_k)`, sorted by `k`.
    pub generators: Vec<(u32, ExactSeries)>,
    pub tolerances: BTreeMap<String, f64>,
}

impl SystemSpec {
    pub fn new(hamiltonian: ExactSeries) -> Self {
        SystemSpec {
            n: hamiltonian.dof(),
            order: hamiltonian.order(),
            model: None,
            hamiltonian,
            integrals: Vec::new(),
            generators: Vec::new(),
            tolerances: BTreeMap::new(),
        }
    }

    /// The declared model, or the frequencies of the quadratic part over the
    /// one-element basis `omega_1 = 1`.
    pub fn frequency_model(&self, gamma: &[GaussRational]) -> FrequencyModel {
        self.model.clone().unwrap_or_else(|| FrequencyModel::rational(gamma))
    }

    pub fn tolerance(&self, key: &str) -> Option<f64> {
        self.tolerances.get(key).copied()
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn locate(e: Error, line: usize, column: usize) -> Error {
    match e {
        Error::Parse { message, .. } => err(line, column, message),
        other => other,
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

enum Section {
    Hamiltonian,
    Integral(usize),
    Generator(u32),
}

fn parse_usize(tok: Option<&(usize, &str)>, line: usize, what: &str, eol: usize) -> Result<usize> {
    let (col, t) = tok.ok_or_else(|| err(line, eol, format!("missing {what}")))?;
    t.parse().map_err(|_| err(line, *col, format!("invalid {what} `{t}`")))
}

fn parse_f64(tok: Option<&(usize, &str)>, line: usize, what: &str, eol: usize) -> Result<f64> {
    let (col, t) = tok.ok_or_else(|| err(line, eol, format!("missing {what}")))?;
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, *col, format!("invalid {what} `{t}`")))
}

/// Parses and validates a system file.
pub fn parse_system(text: &str) -> Result<SystemSpec> {
    let mut n: Option<usize> = None;
    let mut order: Option<u32> = None;
    let mut d: Option<usize> = None;
    let mut freq: BTreeMap<usize, Vec<GaussRational>> = BTreeMap::new();
    let mut numeric: BTreeMap<usize, Complex64> = BTreeMap::new();
    let mut tolerances = BTreeMap::new();
    let mut h_terms: Vec<(Monomial, GaussRational)> = Vec::new();
    let mut integrals: BTreeMap<usize, Vec<(Monomial, GaussRational)>> = BTreeMap::new();
    let mut generators: BTreeMap<u32, Vec<(Monomial, GaussRational, usize)>> = BTreeMap::new();
    let mut section = Section::Hamiltonian;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(&(kcol, keyword)) = toks.first() else {
            continue;
        };
        let eol = content.trim_end().len() + 1;
        match keyword {
            "dof" => {
                if n.is_some() {
                    return Err(err(lineno, kcol, "duplicate `dof`"));
                }
                let v = parse_usize(toks.get(1), lineno, "degree of freedom count", eol)?;
                if v == 0 {
                    return Err(err(lineno, toks[1].0, "`dof` must be positive"));
                }
                n = Some(v);
            }
            "order" => {
                let v = parse_usize(toks.get(1), lineno, "order", eol)?;
                order = Some(u32::try_from(v).map_err(|_| err(lineno, toks[1].0, "order too large"))?);
            }
            "freqbasis" => d = Some(parse_usize(toks.get(1), lineno, "basis dimension", eol)?),
            "freq" => {
                let dim = d.ok_or_else(|| err(lineno, kcol, "`freq` before `freqbasis`"))?;
                let j = parse_usize(toks.get(1), lineno, "frequency index", eol)?;
                if toks.len() != 2 + dim {
                    return Err(err(lineno, kcol, format!("expected {dim} coordinates")));
                }
                let row = toks[2..]
                    .iter()
                    .map(|(c, t)| parse_gauss(t).map_err(|e| locate(e, lineno, *c)))
                    .collect::<Result<Vec<_>>>()?;
                if freq.insert(j, row).is_some() {
                    return Err(err(lineno, toks[1].0, format!("duplicate frequency {j}")));
                }
            }
            "numericfreq" => {
                let l = parse_usize(toks.get(1), lineno, "basis index", eol)?;
                let re = parse_f64(toks.get(2), lineno, "real part", eol)?;
                let im = parse_f64(toks.get(3), lineno, "imaginary part", eol)?;
                if numeric.insert(l, Complex64::new(re, im)).is_some() {
                    return Err(err(lineno, toks[1].0, format!("duplicate basis value {l}")));
                }
            }
            "tolerance" => {
                let (_, key) = toks.get(1).ok_or_else(|| err(lineno, eol, "missing tolerance name"))?;
                let v = parse_f64(toks.get(2), lineno, "tolerance value", eol)?;
                tolerances.insert(key.to_string(), v);
            }
            "hamiltonian" => section = Section::Hamiltonian,
            "integral" => {
                let i = parse_usize(toks.get(1), lineno, "integral index", eol)?;
                section = Section::Integral(i);
                integrals.entry(i).or_default();
            }
            "generator" => {
                let k = parse_usize(toks.get(1), lineno, "generator degree", eol)?;
                let k = u32::try_from(k).map_err(|_| err(lineno, toks[1].0, "generator degree too large"))?;
                section = Section::Generator(k);
                generators.entry(k).or_default();
            }
            "term" => {
                let dof = n.ok_or_else(|| err(lineno, kcol, "`term` before `dof`"))?;
                let colon = toks
                    .iter()
                    .position(|(_, t)| *t == ":")
                    .ok_or_else(|| err(lineno, eol, "expected `:` between coefficient and exponents"))?;
                if colon < 2 {
                    return Err(err(lineno, toks[colon].0, "missing coefficient"));
                }
                let coeff_text: String = toks[1..colon].iter().map(|(_, t)| *t).collect();
                let coeff = parse_gauss(&coeff_text).map_err(|e| locate(e, lineno, toks[1].0))?;
                let exps = &toks[colon + 1..];
                if exps.len() != 2 * dof {
                    let col = exps.first().map_or(eol, |t| t.0);
                    return Err(err(
                        lineno,
                        col,
                        format!("expected {} exponents, found {}", 2 * dof, exps.len()),
                    ));
                }
                let exps = exps
                    .iter()
                    .map(|(c, t)| {
                        t.parse::<u16>()
                            .map_err(|_| err(lineno, *c, format!("invalid exponent `{t}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let m = Monomial::new(exps);
                match section {
                    Section::Hamiltonian => h_terms.push((m, coeff)),
                    Section::Integral(i) => integrals.entry(i).or_default().push((m, coeff)),
                    Section::Generator(k) => generators.entry(k).or_default().push((m, coeff, lineno)),
                }
            }
            other => return Err(err(lineno, kcol, format!("unknown directive `{other}`"))),
        }
    }

    let n = n.ok_or_else(|| err(1, 1, "missing `dof`"))?;
    let order = order.ok_or_else(|| err(1, 1, "missing `order`"))?;
    let model = match d {
        None if freq.is_empty() && numeric.is_empty() => None,
        None => return Err(err(1, 1, "frequencies given without `freqbasis`")),
        Some(d) => {
            if freq.keys().copied().ne(1..=n) {
                return Err(err(1, 1, format!("`freq` lines must cover 1..{n} exactly once")));
            }
            let values = if numeric.is_empty() {
                None
            } else {
                if numeric.keys().copied().ne(1..=d) {
                    return Err(err(1, 1, format!("`numericfreq` lines must cover 1..{d}")));
                }
                Some(numeric.into_values().collect())
            };
            Some(FrequencyModel::new(freq.into_values().collect(), d, values)?)
        }
    };
    for &i in integrals.keys() {
        if i < 2 || i > n {
            return Err(err(1, 1, format!("integral index {i} outside 2..{n}")));
        }
    }
    let mut gens = Vec::new();
    for (k, terms) in generators {
        if k < 3 {
            return Err(err(1, 1, format!("generator degree {k} below 3")));
        }
        if let Some((_, _, line)) = terms.iter().find(|(m, _, _)| m.degree() != k) {
            return Err(err(*line, 1, format!("term of generator {k} has the wrong degree")));
        }
        gens.push((
            k,
            ExactSeries::from_terms(n, order, terms.into_iter().map(|(m, c, _)| (m, c))),
        ));
    }
    let spec = SystemSpec {
        n,
        order,
        model,
        hamiltonian: ExactSeries::from_terms(n, order, h_terms),
        integrals: integrals
            .into_iter()
            .map(|(i, t)| (i, ExactSeries::from_terms(n, order, t)))
            .collect(),
        generators: gens,
        tolerances,
    };
    validate(&spec)?;
    Ok(spec)
}

/// A declared frequency model must match the quadratic part whenever the latter
/// is already in working form; otherwise the check is left to diagonalisation.
fn validate(spec: &SystemSpec) -> Result<()> {
    let Some(model) = &spec.model else {
        return Ok(());
    };
    let h2 = spec.hamiltonian.homogeneous(2);
    if let Ok(data) = QuadraticData::working(&h2, 0.0) {
        validate_frequencies(model, &data.gamma, spec.tolerance("frequency").unwrap_or(1e-9))?;
    }
    Ok(())
}

fn write_terms<C: Coefficient>(out: &mut String, s: &TruncatedSeries<C>, coeff: impl Fn(&C) -> String) {
    for (m, c) in s.terms() {
        let exps: Vec<String> = m.exponents().iter().map(u16::to_string).collect();
        let _ = writeln!(out, "term {} : {}", coeff(c), exps.join(" "));
    }
}

/// Canonical text form; `parse_system` of the output reproduces `spec`.
pub fn emit_system(spec: &SystemSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dof {}", spec.n);
    let _ = writeln!(out, "order {}", spec.order);
    if let Some(model) = &spec.model {
        let _ = writeln!(out, "freqbasis {}", model.basis_dim());
        for (j, row) in model.coords().iter().enumerate() {
            let entries: Vec<String> = row.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "freq {} {}", j + 1, entries.join(" "));
        }
        if let Some(values) = model.numeric() {
            for (l, v) in values.iter().enumerate() {
                let _ = writeln!(out, "numericfreq {} {} {}", l + 1, v.re, v.im);
            }
        }
    }
    for (key, v) in &spec.tolerances {
        let _ = writeln!(out, "tolerance {key} {v:e}");
    }
    write_terms(&mut out, &spec.hamiltonian, ToString::to_string);
    for (i, g) in &spec.integrals {
        let _ = writeln!(out, "integral {i}");
        write_terms(&mut out, g, ToString::to_string);
    }
    for (k, l) in &spec.generators {
        let _ = writeln!(out, "generator {k}");
        write_terms(&mut out, l, ToString::to_string);
    }
    out
}

/// Output file of a normalisation: the normal form as Hamiltonian followed by
/// every generator block `L_3..L_m`, empty blocks included.
pub fn normal_form_spec(input: &SystemSpec, result: &NormalizationResult<GaussRational>) -> SystemSpec {
    SystemSpec {
        n: input.n,
        order: result.order,
        model: input.model.clone(),
        hamiltonian: result.normal_form.clone(),
        integrals: Vec::new(),
        generators: (3..).zip(result.gens.iter().cloned()).collect(),
        tolerances: input.tolerances.clone(),
    }
}

/// Emits a float series in the same term syntax; decimal output parses back to
/// the identical doubles.
pub fn emit_float_series(s: &TruncatedSeries<Complex64>) -> String {
    let mut out = String::new();
    write_terms(&mut out, s, |c| format!("{},{}", c.re, c.im));
    out
}
