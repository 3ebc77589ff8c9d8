//! Normalized fixed-point iteration for `r`-eigenforms and the eigenform check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::{FractalTriple, Weights};
use crate::forms::DirichletForm;
use crate::graph::Edge;
use crate::graphs::hat_graph;
use crate::renorm::renormalize;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Structural conditions every eigenform satisfies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenChecks {
    pub irreducible: bool,
    /// `r_j > rho` for every boundary cell `j`.
    pub weights_exceed_rho: bool,
    /// Support graph equals `G^`.
    pub support_matches_hat: bool,
    /// Support edges outside `G^`.
    pub extra_edges: Vec<Edge>,
    /// Edges of `G^` missing from the support.
    pub missing_edges: Vec<Edge>,
}

impl EigenChecks {
    pub fn all(&self) -> bool {
        self.irreducible && self.weights_exceed_rho && self.support_matches_hat
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub form: DirichletForm,
    pub rho: f64,
    /// `max |Lambda(E) - rho E|` over coefficients, divided by the largest coefficient of `E`.
    pub residual: f64,
    /// `max |Lambda(E)_e / (rho E_e) - 1|` over the support of `E`.
    pub ratio_spread: f64,
    pub iterations: usize,
    /// `residual <= tol` and `ratio_spread <= sqrt(tol)`.
    pub converged: bool,
    /// `converged` and every structural check passes.
    pub verified: bool,
    pub checks: EigenChecks,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<String>,
}

/// Fits `rho` by least squares and reports how far `form` is from an `r`-eigenform.
pub fn verify_eigenform(triple: &FractalTriple, weights: &Weights, form: &DirichletForm, tol: f64) -> Result<EigenResult> {
    if form.n() != triple.n() {
        return Err(Error::DimensionMismatch {
            what: "form size",
            expected: triple.n(),
            found: form.n(),
        });
    }
    if !form.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let image = renormalize(triple, weights, form)?;
    let e = form.coefficients();
    let l = image.coefficients();
    let rho = l.iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / e.iter().map(|b| b * b).sum::<f64>();
    let maxc = form.max_coefficient();
    let residual = l.iter().zip(e).fold(0.0_f64, |m, (a, b)| m.max((a - rho * b).abs())) / maxc;
    let ratio_spread = form
        .entries()
        .zip(l)
        .filter(|((a, b, _), _)| form.is_positive_coefficient(*a, *b))
        .fold(0.0_f64, |m, ((_, _, c), lc)| m.max((lc / (rho * c) - 1.0).abs()));

    let hat = hat_graph(triple)?;
    let support = form.support_graph();
    let extra_edges: Vec<Edge> = support.edges().filter(|&(a, b)| !hat.has_edge(a, b)).collect();
    let missing_edges: Vec<Edge> = hat.edges().filter(|&(a, b)| !support.has_edge(a, b)).collect();
    let checks = EigenChecks {
        irreducible: true,
        weights_exceed_rho: weights.as_slice()[..triple.n()].iter().all(|&r| r > rho),
        support_matches_hat: extra_edges.is_empty() && missing_edges.is_empty(),
        extra_edges,
        missing_edges,
    };
    let converged = residual <= tol && ratio_spread <= tol.sqrt();
    Ok(EigenResult {
        form: form.clone(),
        rho,
        residual,
        ratio_spread,
        iterations: 0,
        converged,
        verified: converged && checks.all(),
        checks,
        stop_reason: None,
    })
}

/// Iterates `E <- Lambda(E) / |Lambda(E)|_1` from `init` (default: all coefficients one).
///
/// Stalling, hitting `max_iter`, or an iterate that loses irreducibility are
/// reported through `converged = false` and `stop_reason`, not as errors.
pub fn find_eigenform(
    triple: &FractalTriple,
    weights: &Weights,
    init: Option<&DirichletForm>,
    opts: SolverOptions,
) -> Result<EigenResult> {
    let n = triple.n();
    let mut e = match init {
        Some(f) if f.n() != n => {
            return Err(Error::DimensionMismatch {
                what: "initial form size",
                expected: n,
                found: f.n(),
            })
        }
        Some(f) => f.clamped().normalized(),
        None => DirichletForm::unit(n).normalized(),
    };
    if !e.is_irreducible() {
        return Err(Error::NotIrreducible);
    }

    let mut iterations = 0;
    let mut settled = false;
    let mut stop_reason = None;
    while iterations < opts.max_iter {
        let next = renormalize(triple, weights, &e)?.normalized();
        iterations += 1;
        if !next.is_irreducible() {
            stop_reason = Some(format!("iterate {iterations} lost irreducibility: support {}", next.support_graph()));
            break;
        }
        let change = next
            .coefficients()
            .iter()
            .zip(e.coefficients())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            / next.max_coefficient();
        e = next;
        if change < opts.tol {
            settled = true;
            break;
        }
    }
    if !settled && stop_reason.is_none() {
        stop_reason = Some(format!("no convergence within {} iterations", opts.max_iter));
    }

    let mut result = verify_eigenform(triple, weights, &e, opts.tol)?;
    result.iterations = iterations;
    if !settled {
        result.converged = false;
        result.verified = false;
    } else if !result.converged {
        stop_reason = Some("iteration settled but the eigenform residual exceeds tolerance".into());
    }
    result.stop_reason = stop_reason;
    Ok(result)
}

/// Independent solves from several starting forms, run in parallel.
pub fn find_eigenforms(
    triple: &FractalTriple,
    weights: &Weights,
    inits: &[DirichletForm],
    opts: SolverOptions,
) -> Vec<Result<EigenResult>> {
    inits
        .par_iter()
        .map(|init| find_eigenform(triple, weights, Some(init), opts))
        .collect()
}
