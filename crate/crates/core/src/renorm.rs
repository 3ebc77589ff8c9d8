//! Harmonic extension to the first-level vertex set, the renormalization map
//! and the cell operators `T_i(u) = H(u) o psi_i`.
//!
//! Everything is assembled from one weighted conductance Laplacian on the
//! first-level vertices: the edge `psi_i(P_a) - psi_i(P_b)` carries conductance
//! `r_i * c_ab`, and coincident edges from different cells add up.
//!
//! Word operators compose left to right: `word_operator(&[i1, i2])` is
//! `T_{i1} * T_{i2}`, so the rightmost letter acts first. The operator of the
//! level-`n` cell `(i1, ..., in)` is the reverse composition `T_{in} ... T_{i1}`.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::{FractalTriple, Weights};
use crate::forms::{DirichletForm, POSITIVITY_TOL};
use crate::linalg::lu_solve;

/// Minimizer of the one-step energy for prescribed values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionResult {
    pub values: Vec<f64>,
    pub achieved_energy: f64,
}

/// `T_{i;E;r}` as an `N x N` matrix; row `p` expresses `H(u)(cells[i][p])` in terms of `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOperator {
    pub cell: usize,
    pub matrix: DMatrix<f64>,
}

impl CellOperator {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        apply(&self.matrix, u)
    }
}

pub(crate) fn apply(m: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), u.len());
    (0..m.nrows())
        .map(|p| (0..m.ncols()).map(|q| m[(p, q)] * u[q]).sum())
        .collect()
}

/// `S_{1;r}(E)(v) = sum_i r_i E(v o psi_i)`, computed cell by cell.
pub fn one_step_energy(triple: &FractalTriple, weights: &Weights, form: &DirichletForm, v: &[f64]) -> f64 {
    assert_eq!(v.len(), triple.num_v1());
    triple
        .cells()
        .iter()
        .zip(weights.as_slice())
        .map(|(cell, r)| {
            let restricted: Vec<f64> = cell.iter().map(|&id| v[id]).collect();
            r * form.energy(&restricted)
        })
        .sum()
}

/// Conductance Laplacian on the first-level vertices.
pub fn conductance_laplacian(triple: &FractalTriple, weights: &Weights, form: &DirichletForm) -> DMatrix<f64> {
    let m = triple.num_v1();
    let mut lap = DMatrix::zeros(m, m);
    for (cell, &r) in triple.cells().iter().zip(weights.as_slice()) {
        for (a, b, c) in form.entries() {
            let w = r * c;
            if w == 0.0 {
                continue;
            }
            let (x, y) = (cell[a], cell[b]);
            lap[(x, x)] += w;
            lap[(y, y)] += w;
            lap[(x, y)] -= w;
            lap[(y, x)] -= w;
        }
    }
    lap
}

/// Minimizes `v^T lap v` subject to `v = fixed` on the fixed vertices.
fn minimize_with(lap: &DMatrix<f64>, fixed: &BTreeMap<usize, f64>) -> Result<Vec<f64>> {
    let m = lap.nrows();
    if fixed.is_empty() {
        return Err(Error::InvalidInput("constrained extension needs at least one fixed vertex".into()));
    }
    let mut is_fixed = vec![false; m];
    for &id in fixed.keys() {
        if id >= m {
            return Err(Error::InvalidInput(format!("fixed vertex {id} out of range")));
        }
        is_fixed[id] = true;
    }
    check_reachable(lap, &is_fixed)?;

    let free: Vec<usize> = (0..m).filter(|&x| !is_fixed[x]).collect();
    let mut values = vec![0.0; m];
    for (&id, &val) in fixed {
        values[id] = val;
    }
    if free.is_empty() {
        return Ok(values);
    }
    let a = DMatrix::from_fn(free.len(), free.len(), |p, q| lap[(free[p], free[q])]);
    let rhs = DMatrix::from_fn(free.len(), 1, |p, _| {
        -fixed.iter().map(|(&id, &val)| lap[(free[p], id)] * val).sum::<f64>()
    });
    let sol = lu_solve(a, &rhs, "constrained extension")?;
    for (p, &x) in free.iter().enumerate() {
        values[x] = sol[(p, 0)];
    }
    Ok(values)
}

/// Every free vertex must see a fixed one through edges of positive conductance.
fn check_reachable(lap: &DMatrix<f64>, is_fixed: &[bool]) -> Result<()> {
    let m = lap.nrows();
    let mut seen = is_fixed.to_vec();
    let mut queue: VecDeque<usize> = (0..m).filter(|&x| is_fixed[x]).collect();
    while let Some(x) = queue.pop_front() {
        for y in 0..m {
            if !seen[y] && x != y && lap[(x, y)] < 0.0 {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(vertex) => Err(Error::SingularInterior { vertex }),
        None => Ok(()),
    }
}

/// Harmonic-extension machinery for a fixed `(triple, r, E)`.
///
/// Construction factorizes the interior block once; the extension matrix, the
/// renormalized form and all `k` cell operators are read off it.
#[derive(Debug, Clone)]
pub struct Renormalizer<'a> {
    triple: &'a FractalTriple,
    weights: &'a Weights,
    form: DirichletForm,
    laplacian: DMatrix<f64>,
    extension: DMatrix<f64>,
    renormalized: DirichletForm,
    cell_ops: Vec<CellOperator>,
}

impl<'a> Renormalizer<'a> {
    pub fn new(triple: &'a FractalTriple, weights: &'a Weights, form: &DirichletForm) -> Result<Self> {
        weights.check_for(triple)?;
        if form.n() != triple.n() {
            return Err(Error::DimensionMismatch {
                what: "form size",
                expected: triple.n(),
                found: form.n(),
            });
        }
        let n = triple.n();
        let m = triple.num_v1();
        let laplacian = conductance_laplacian(triple, weights, form);
        let mut is_fixed = vec![false; m];
        is_fixed[..n].iter_mut().for_each(|f| *f = true);
        check_reachable(&laplacian, &is_fixed)?;

        // interior rows: H_I = -L_II^{-1} L_IB
        let interior = m - n;
        let l_ii = laplacian.view((n, n), (interior, interior)).clone_owned();
        let l_ib = laplacian.view((n, 0), (interior, n)).clone_owned();
        let h_i = -lu_solve(l_ii, &l_ib, "harmonic extension")?;
        let mut extension = DMatrix::zeros(m, n);
        extension.view_mut((0, 0), (n, n)).fill_with_identity();
        extension.view_mut((n, 0), (interior, n)).copy_from(&h_i);

        // Schur complement onto the boundary: L_BB + L_BI H_I
        let schur = laplacian.view((0, 0), (n, n)).clone_owned()
            + laplacian.view((0, n), (n, interior)) * &h_i;
        let max_off = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| -schur[(a, b)])
            .fold(0.0, f64::max);
        let mut coeffs = Vec::with_capacity(n * (n - 1) / 2);
        for (a, b) in crate::forms::pairs(n) {
            let c = -0.5 * (schur[(a, b)] + schur[(b, a)]);
            if c < -POSITIVITY_TOL * max_off {
                return Err(Error::Consistency(format!(
                    "renormalized coefficient ({a},{b}) = {c} is negative"
                )));
            }
            coeffs.push(c.max(0.0));
        }
        let renormalized = DirichletForm::from_coefficients(n, coeffs)?.clamped();

        let cell_ops = triple
            .cells()
            .iter()
            .enumerate()
            .map(|(i, cell)| CellOperator {
                cell: i,
                matrix: DMatrix::from_fn(n, n, |p, q| extension[(cell[p], q)]),
            })
            .collect();

        Ok(Self {
            triple,
            weights,
            form: form.clone(),
            laplacian,
            extension,
            renormalized,
            cell_ops,
        })
    }

    pub fn triple(&self) -> &'a FractalTriple {
        self.triple
    }

    pub fn weights(&self) -> &'a Weights {
        self.weights
    }

    pub fn form(&self) -> &DirichletForm {
        &self.form
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// `num_v1 x N` matrix of the map `u -> H_{1,E;r}(u)`.
    pub fn extension_matrix(&self) -> &DMatrix<f64> {
        &self.extension
    }

    /// `Lambda_r(E)`, with round-off below the positivity tolerance set to zero.
    pub fn renormalized(&self) -> &DirichletForm {
        &self.renormalized
    }

    pub fn harmonic_extension(&self, u: &[f64]) -> ExtensionResult {
        assert_eq!(u.len(), self.triple.n());
        let values = apply(&self.extension, u);
        let achieved_energy = one_step_energy(self.triple, self.weights, &self.form, &values);
        ExtensionResult { values, achieved_energy }
    }

    /// Energy minimizer among vectors on the first-level vertices that agree with `fixed`.
    pub fn constrained_extension(&self, fixed: &BTreeMap<usize, f64>) -> Result<ExtensionResult> {
        let values = minimize_with(&self.laplacian, fixed)?;
        let achieved_energy = one_step_energy(self.triple, self.weights, &self.form, &values);
        Ok(ExtensionResult { values, achieved_energy })
    }

    pub fn cell_operator(&self, i: usize) -> &CellOperator {
        &self.cell_ops[i]
    }

    pub fn cell_operators(&self) -> &[CellOperator] {
        &self.cell_ops
    }

    /// `T_{w_0} T_{w_1} ... T_{w_last}`; the empty word gives the identity.
    pub fn word_operator(&self, word: &[usize]) -> DMatrix<f64> {
        let n = self.triple.n();
        word.iter()
            .fold(DMatrix::identity(n, n), |acc, &i| acc * &self.cell_ops[i].matrix)
    }

    /// `T_j^power`.
    pub fn cell_power(&self, j: usize, power: usize) -> DMatrix<f64> {
        self.word_operator(&vec![j; power])
    }
}

/// `Lambda_r(E)`.
pub fn renormalize(triple: &FractalTriple, weights: &Weights, form: &DirichletForm) -> Result<DirichletForm> {
    Ok(Renormalizer::new(triple, weights, form)?.renormalized)
}

/// `H_{1,E;r}(u)` together with its one-step energy.
pub fn harmonic_extension(
    triple: &FractalTriple,
    weights: &Weights,
    form: &DirichletForm,
    u: &[f64],
) -> Result<ExtensionResult> {
    if u.len() != triple.n() {
        return Err(Error::DimensionMismatch {
            what: "boundary data",
            expected: triple.n(),
            found: u.len(),
        });
    }
    Ok(Renormalizer::new(triple, weights, form)?.harmonic_extension(u))
}

pub fn constrained_extension(
    triple: &FractalTriple,
    weights: &Weights,
    form: &DirichletForm,
    fixed: &BTreeMap<usize, f64>,
) -> Result<ExtensionResult> {
    weights.check_for(triple)?;
    let lap = conductance_laplacian(triple, weights, form);
    let values = minimize_with(&lap, fixed)?;
    let achieved_energy = one_step_energy(triple, weights, form, &values);
    Ok(ExtensionResult { values, achieved_energy })
}

pub fn cell_operator(triple: &FractalTriple, weights: &Weights, form: &DirichletForm, i: usize) -> Result<CellOperator> {
    Ok(Renormalizer::new(triple, weights, form)?.cell_ops.swap_remove(i))
}

pub fn word_operator(
    triple: &FractalTriple,
    weights: &Weights,
    form: &DirichletForm,
    word: &[usize],
) -> Result<DMatrix<f64>> {
    Ok(Renormalizer::new(triple, weights, form)?.word_operator(word))
}
