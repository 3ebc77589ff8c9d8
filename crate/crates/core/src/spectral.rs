//! Perron data of the cell operators.
//!
//! For a component `C = C_{j,s}` with period `n` and core `C' = C'_{j,s}`,
//! `T_j^n` restricted to vectors supported in `C'` is a positive matrix. Its
//! Perron vector `u_bar` (sup-norm 1) is pushed forward once more to
//! `u_tilde = T_j^n(u_bar)`, which is positive on all of `C`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::ComponentData;
use crate::linalg::{perron_pair, sup_norm};
use crate::renorm::{apply, Renormalizer};

/// Entries of `u_tilde` outside `C` must vanish to this relative accuracy.
const SUPPORT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronData {
    pub j: usize,
    pub s: usize,
    pub n_js: usize,
    pub u_bar: Vec<f64>,
    pub u_tilde: Vec<f64>,
    pub l: f64,
}

/// `(u_bar_j, l_j)`: Perron pair of `T_j` on `{u : u(P_j) = 0}`. Requires a positive form.
pub fn perron_positive(rn: &Renormalizer<'_>, j: usize) -> Result<(Vec<f64>, f64)> {
    if let Some(pair) = rn.form().first_vanishing_pair() {
        return Err(Error::NotPositive(pair));
    }
    let n = rn.triple().n();
    let t = &rn.cell_operator(j).matrix;
    let idx: Vec<usize> = (0..n).filter(|&x| x != j).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |p, q| t[(idx[p], idx[q])]);
    let (l, v) = perron_pair(&sub)?;
    let mut u = vec![0.0; n];
    for (p, &x) in idx.iter().enumerate() {
        u[x] = v[p];
    }
    Ok((u, l))
}

pub fn perron_component(rn: &Renormalizer<'_>, comp: &ComponentData, s: usize) -> Result<PerronData> {
    let j = comp.j;
    let n = rn.triple().n();
    let period = comp.periods[s];
    let core = &comp.c_prime[s];
    let full = &comp.components[s];
    let power = rn.cell_power(j, period);

    let sub = DMatrix::from_fn(core.len(), core.len(), |p, q| power[(core[p], core[q])]);
    let cut = 1e-12 * power.amax();
    if let Some((p, q)) = (0..core.len())
        .flat_map(|p| (0..core.len()).map(move |q| (p, q)))
        .find(|&(p, q)| !(sub[(p, q)] > cut))
    {
        return Err(Error::Consistency(format!(
            "T_{j}^{period} is not positive on C' of ({j},{s}): entry ({}, {}) = {}",
            core[p],
            core[q],
            sub[(p, q)]
        )));
    }
    let (l, v) = perron_pair(&sub)?;
    let mut u_bar = vec![0.0; n];
    for (p, &x) in core.iter().enumerate() {
        u_bar[x] = v[p];
    }

    let mut u_tilde = apply(&power, &u_bar);
    let scale = sup_norm(&u_tilde);
    for (x, val) in u_tilde.iter_mut().enumerate() {
        if full.contains(&x) {
            if !(*val > SUPPORT_TOL * scale) {
                return Err(Error::Consistency(format!(
                    "u~ of ({j},{s}) is not positive at {x} ({val})"
                )));
            }
        } else {
            if val.abs() > SUPPORT_TOL * scale {
                return Err(Error::Consistency(format!(
                    "u~ of ({j},{s}) leaks outside its component at {x} ({val})"
                )));
            }
            *val = 0.0;
        }
    }
    Ok(PerronData {
        j,
        s,
        n_js: period,
        u_bar,
        u_tilde,
        l,
    })
}

/// Perron data for every `(j, s)`, in the order of `comps` and then `s`.
pub fn perron_all(rn: &Renormalizer<'_>, comps: &[ComponentData]) -> Result<Vec<PerronData>> {
    comps
        .iter()
        .flat_map(|c| (0..c.m()).map(move |s| perron_component(rn, c, s)))
        .collect()
}

/// `g_{j,s}(u) = (u - u(P_j)) chi_C`.
pub fn project_g(u: &[f64], comp: &ComponentData, s: usize) -> Vec<f64> {
    let base = u[comp.j];
    let mut out = vec![0.0; u.len()];
    for &x in &comp.components[s] {
        out[x] = u[x] - base;
    }
    out
}

/// `g~_{j,s}(u) = u chi_{C'}`.
pub fn project_g_tilde(u: &[f64], comp: &ComponentData, s: usize) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for &x in &comp.c_prime[s] {
        out[x] = u[x];
    }
    out
}

/// `pi_{j,s}(u)`: the limit of `T_j^{h n}(u) / l^h` expressed as a multiple of `u_tilde`.
///
/// With this scaling `pi(u_tilde) = 1`.
pub fn pi_limit(rn: &Renormalizer<'_>, pd: &PerronData, u: &[f64], tol: f64, max_iter: usize) -> Result<f64> {
    let n = rn.triple().n();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            what: "vector",
            expected: n,
            found: u.len(),
        });
    }
    if let Some(x) = (0..n).find(|&x| pd.u_tilde[x] == 0.0 && u[x] != 0.0) {
        return Err(Error::InvalidInput(format!(
            "vector is not supported on the component of ({}, {}): nonzero at {x}",
            pd.j, pd.s
        )));
    }
    let power = rn.cell_power(pd.j, pd.n_js);
    let scale = sup_norm(u).max(f64::MIN_POSITIVE);
    let mut x = u.to_vec();
    for _ in 0..max_iter {
        let next: Vec<f64> = apply(&power, &x).into_iter().map(|v| v / pd.l).collect();
        let change = next.iter().zip(&x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        if change <= tol * scale {
            let num: f64 = x.iter().zip(&pd.u_tilde).map(|(a, b)| a * b).sum();
            let den: f64 = pd.u_tilde.iter().map(|b| b * b).sum();
            return Ok(num / den);
        }
    }
    Err(Error::NonConvergence {
        what: "pi limit",
        iterations: max_iter,
    })
}
