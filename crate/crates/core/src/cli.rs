//! The `eigenform-lab` command line.
//!
//! Every subcommand prints one JSON document (or a short text summary with
//! `--format text`) on standard output. Exit codes: 0 success, 1 invalid input,
//! 2 numerical failure, 3 internal inconsistency.
//!
//! A fractal argument is either a path to a fractal file or `builtin:NAME`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{DirichletForm, FormFile};
use crate::fractal::{FractalFile, FractalTriple, Weights};
use crate::graphs::{all_components, hat_graph, tilde_graph};
use crate::solver::{find_eigenform, verify_eigenform, EigenResult, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::uniqueness::{decide, EigenformData, StabilityVerdict};

pub const THREADS_ENV: &str = "EIGENFORM_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "eigenform-lab", version, about = "Eigenforms and their uniqueness on finitely ramified fractals")]
pub struct RunConfig {
    /// Convergence and verification tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Suppress warnings on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the fractal axioms and report connectivity.
    Validate { fractal: String },
    /// G~, G^ and the per-index component data.
    Graphs { fractal: String },
    /// Search for an eigenform by normalized iteration.
    Solve {
        fractal: String,
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Check whether a given form is an eigenform.
    Verify { fractal: String, form: PathBuf },
    /// Decide uniqueness; solves first when no form is given.
    CheckUniqueness { fractal: String, form: Option<PathBuf> },
    /// Everything at once.
    Report { fractal: String },
    /// List the built-in fractals.
    Corpus,
}

/// Runs the command line with `argv` (program name first) on the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    if !(config.tol.is_finite() && config.tol > 0.0) {
        let _ = writeln!(err, "error: --tol must be positive");
        return 1;
    }
    init_threads();

    match execute(&config) {
        Ok(outcome) => {
            if !config.quiet {
                for w in &outcome.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
            }
            let body = match config.format {
                Format::Json => serde_json::to_string_pretty(&outcome.json).expect("serializable") + "\n",
                Format::Text => outcome.text,
            };
            let _ = out.write_all(body.as_bytes());
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.kind().exit_code()
        }
    }
}

fn init_threads() {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    // a second call in the same process keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

struct Outcome {
    json: Value,
    text: String,
    code: i32,
    warnings: Vec<String>,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Self {
            json,
            text,
            code: 0,
            warnings: Vec::new(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn load_file(arg: &str) -> Result<FractalFile> {
    match arg.strip_prefix("builtin:") {
        Some(name) => Ok(FractalFile::from_triple(&FractalTriple::builtin(name)?, None)),
        None => FractalFile::read(arg),
    }
}

fn load(arg: &str) -> Result<(FractalTriple, Weights)> {
    load_file(arg)?.into_parts()
}

fn load_form(path: &PathBuf, triple: &FractalTriple) -> Result<DirichletForm> {
    let form = FormFile::read(path)?.into_form()?;
    if form.n() != triple.n() {
        return Err(Error::DimensionMismatch {
            what: "form size",
            expected: triple.n(),
            found: form.n(),
        });
    }
    Ok(form)
}

fn opts(config: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: config.tol,
        max_iter: config.max_iter,
    }
}

fn execute(config: &RunConfig) -> Result<Outcome> {
    match &config.command {
        Command::Validate { fractal } => validate(fractal),
        Command::Graphs { fractal } => graphs(fractal),
        Command::Solve { fractal, init } => {
            let (triple, weights) = load(fractal)?;
            let init = init.as_ref().map(|p| load_form(p, &triple)).transpose()?;
            let res = find_eigenform(&triple, &weights, init.as_ref(), opts(config))?;
            let mut outcome = Outcome::ok(to_value(&res), eigen_text(&res));
            if !res.converged {
                outcome.code = 2;
                outcome.warnings.extend(res.stop_reason.clone());
            }
            Ok(outcome)
        }
        Command::Verify { fractal, form } => {
            let (triple, weights) = load(fractal)?;
            let form = load_form(form, &triple)?;
            let res = verify_eigenform(&triple, &weights, &form, config.tol)?;
            Ok(Outcome::ok(to_value(&res), eigen_text(&res)))
        }
        Command::CheckUniqueness { fractal, form } => {
            let (triple, weights) = load(fractal)?;
            let form = match form {
                Some(p) => load_form(p, &triple)?,
                None => solved(&triple, &weights, config)?.form,
            };
            let data = EigenformData::new(&triple, &weights, &form, config.tol)?;
            let verdict = decide(&data)?;
            let mut outcome = Outcome::ok(verdict_json(&verdict), verdict_text(&verdict));
            outcome.warnings = verdict.warnings.clone();
            Ok(outcome)
        }
        Command::Report { fractal } => report(fractal, config),
        Command::Corpus => {
            let files: Vec<FractalFile> = FractalTriple::builtin_names()
                .iter()
                .map(|n| FractalFile::from_triple(&FractalTriple::builtin(n).expect("builtin"), None))
                .collect();
            let mut text = String::new();
            for f in &files {
                let _ = writeln!(text, "{}: N={} k={} vertices={}", f.name, f.n, f.k, f.vertices);
            }
            Ok(Outcome::ok(json!({ "builtins": files }), text))
        }
    }
}

/// Solver output that must be a verified eigenform.
fn solved(triple: &FractalTriple, weights: &Weights, config: &RunConfig) -> Result<EigenResult> {
    let res = find_eigenform(triple, weights, None, opts(config))?;
    if !res.verified {
        return Err(Error::NonConvergence {
            what: "eigenform search",
            iterations: res.iterations,
        });
    }
    Ok(res)
}

fn validate(fractal: &str) -> Result<Outcome> {
    let file = load_file(fractal)?;
    let report = file.validate();
    let triple = file.triple_unchecked();
    let valid = report.is_valid();
    let messages: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    let mut json = json!({
        "name": file.name,
        "valid": valid,
        "violations": report.violations,
        "messages": messages,
    });
    let mut text = format!("{}: {report}\n", file.name);
    if valid {
        let flags = triple.connectivity_flags();
        json["cell_graph"] = to_value(&triple.cell_graph());
        json["connectivity"] = to_value(&flags);
        let _ = writeln!(
            text,
            "cell graph {}\na_connected={} o_connected={}",
            triple.cell_graph(),
            flags.a_connected,
            flags.o_connected
        );
    }
    let mut outcome = Outcome::ok(json, text);
    if !valid {
        outcome.code = 1;
    }
    Ok(outcome)
}

fn graphs_json(triple: &FractalTriple) -> Result<(Value, String)> {
    let tilde = tilde_graph(triple);
    let hat = hat_graph(triple)?;
    let comps = all_components(triple, &hat)?;
    let mut text = format!("G~ = {tilde}\nG^ = {hat}\n");
    for c in &comps {
        let _ = writeln!(
            text,
            "j={}: components {:?} beta {:?} periods {:?} C' {:?} C'' {:?}",
            c.j, c.components, c.beta, c.periods, c.c_prime, c.c_second
        );
    }
    let json = json!({
        "tilde_graph": tilde,
        "hat_graph": hat,
        "components": comps,
    });
    Ok((json, text))
}

fn graphs(fractal: &str) -> Result<Outcome> {
    let (triple, _) = load(fractal)?;
    let (json, text) = graphs_json(&triple)?;
    Ok(Outcome::ok(json, text))
}

fn report(fractal: &str, config: &RunConfig) -> Result<Outcome> {
    let (triple, weights) = load(fractal)?;
    let (graphs, graphs_text) = graphs_json(&triple)?;
    let flags = triple.connectivity_flags();
    let res = find_eigenform(&triple, &weights, None, opts(config))?;
    let mut text = format!("{}\n{graphs_text}{}", triple.name(), eigen_text(&res));
    let mut json = json!({
        "name": triple.name(),
        "N": triple.n(),
        "k": triple.k(),
        "vertices": triple.num_v1(),
        "weights": weights,
        "cell_graph": triple.cell_graph(),
        "connectivity": flags,
        "graphs": graphs,
        "eigenform": res,
        "perron": Value::Null,
        "uniqueness": Value::Null,
    });
    if !res.verified {
        let mut outcome = Outcome::ok(json, text);
        outcome.code = 2;
        outcome.warnings.extend(res.stop_reason.clone());
        return Ok(outcome);
    }
    let data = EigenformData::new(&triple, &weights, &res.form, config.tol)?;
    let verdict = decide(&data)?;
    json["perron"] = to_value(&data.perron);
    json["uniqueness"] = verdict_json(&verdict);
    text.push_str(&verdict_text(&verdict));
    let mut outcome = Outcome::ok(json, text);
    outcome.warnings = verdict.warnings;
    Ok(outcome)
}

fn verdict_json(v: &StabilityVerdict) -> Value {
    to_value(v)
}

fn eigen_text(r: &EigenResult) -> String {
    let mut s = String::new();
    let coeffs: Vec<String> = r.form.entries().map(|(a, b, c)| format!("c{a}{b}={c:.12}")).collect();
    let _ = writeln!(s, "form {}", coeffs.join(" "));
    let _ = writeln!(
        s,
        "rho={:.15} residual={:.3e} ratio_spread={:.3e} iterations={}",
        r.rho, r.residual, r.ratio_spread, r.iterations
    );
    let _ = writeln!(
        s,
        "converged={} verified={} weights_exceed_rho={} support_matches_hat={}",
        r.converged, r.verified, r.checks.weights_exceed_rho, r.checks.support_matches_hat
    );
    if !r.checks.extra_edges.is_empty() {
        let _ = writeln!(s, "support edges outside G^: {:?}", r.checks.extra_edges);
    }
    if !r.checks.missing_edges.is_empty() {
        let _ = writeln!(s, "G^ edges missing from support: {:?}", r.checks.missing_edges);
    }
    if let Some(reason) = &r.stop_reason {
        let _ = writeln!(s, "stopped: {reason}");
    }
    s
}

fn verdict_text(v: &StabilityVerdict) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} (rho={:.15}, {} sink SCCs: {:?})",
        if v.unique { "unique" } else { "not unique" },
        v.rho,
        v.sink_scc_count,
        v.sink_sccs
    );
    if let Some([a, b]) = &v.witnesses {
        let _ = writeln!(s, "disjoint stable sets {a:?} and {b:?}");
    }
    s
}
