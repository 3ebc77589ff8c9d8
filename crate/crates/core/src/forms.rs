//! Dirichlet forms on the boundary set: `E(u) = sum c_{ab} (u_a - u_b)^2`.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Edge, UndirectedGraph};

/// A coefficient counts as positive iff it exceeds this fraction of the largest coefficient.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Index of the unordered pair `{a, b}` (`a != b`) in lexicographic pair order.
pub fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    debug_assert!(b < n && a != b);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(a, b)` with `a < b < n` in [`pair_index`] order.
pub fn pairs(n: usize) -> impl Iterator<Item = Edge> {
    (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
}

/// Nonnegative coefficients on unordered boundary pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletForm {
    n: usize,
    coeffs: Vec<f64>,
}

impl DirichletForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    /// All coefficients equal to one.
    pub fn unit(n: usize) -> Self {
        let mut f = Self::zero(n);
        f.coeffs.iter_mut().for_each(|c| *c = 1.0);
        f
    }

    /// Coefficients in [`pairs`] order.
    pub fn from_coefficients(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "form coefficients",
                expected,
                found: coeffs.len(),
            });
        }
        if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidInput(format!("coefficient #{i} = {c} is not a nonnegative number")));
        }
        Ok(Self { n, coeffs })
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize, f64)>>(n: usize, entries: I) -> Result<Self> {
        let mut f = Self::zero(n);
        let mut seen = vec![false; f.coeffs.len()];
        for (a, b, c) in entries {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidInput(format!("pair ({a},{b}) invalid for N={n}")));
            }
            let idx = pair_index(n, a, b);
            if seen[idx] {
                return Err(Error::InvalidInput(format!("pair ({a},{b}) given twice")));
            }
            seen[idx] = true;
            f.set(a, b, c)?;
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.coeffs[pair_index(self.n, a, b)]
        }
    }

    pub fn set(&mut self, a: usize, b: usize, c: f64) -> Result<()> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidInput(format!("coefficient ({a},{b}) = {c} is negative")));
        }
        let idx = pair_index(self.n, a, b);
        self.coeffs[idx] = c;
        Ok(())
    }

    /// `(a, b, c_ab)` for every pair.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        pairs(self.n).zip(&self.coeffs).map(|((a, b), &c)| (a, b, c))
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        assert!(s.is_finite() && s >= 0.0);
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Rescaled to unit [`l1_norm`](Self::l1_norm).
    pub fn normalized(&self) -> Self {
        let s = self.l1_norm();
        if s > 0.0 {
            self.scaled(1.0 / s)
        } else {
            self.clone()
        }
    }

    /// Zeroes every coefficient at or below `POSITIVITY_TOL * max`.
    pub fn clamped(&self) -> Self {
        let cut = POSITIVITY_TOL * self.max_coefficient();
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|&c| if c > cut { c } else { 0.0 }).collect(),
        }
    }

    pub fn is_positive_coefficient(&self, a: usize, b: usize) -> bool {
        let max = self.max_coefficient();
        max > 0.0 && self.get(a, b) > POSITIVITY_TOL * max
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.n);
        self.entries().map(|(a, b, c)| c * (u[a] - u[b]).powi(2)).sum()
    }

    /// `L_E(u)(P_j) = sum_{h != j} c_{jh} (u_h - u_j)`.
    pub fn laplacian_at(&self, u: &[f64], j: usize) -> f64 {
        (0..self.n).filter(|&h| h != j).map(|h| self.get(j, h) * (u[h] - u[j])).sum()
    }

    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n);
        (0..self.n).map(|j| self.laplacian_at(u, j)).collect()
    }

    /// `G_0(E)`: pairs with a positive coefficient.
    pub fn support_graph(&self) -> UndirectedGraph {
        UndirectedGraph::from_edges(
            self.n,
            pairs(self.n).filter(|&(a, b)| self.is_positive_coefficient(a, b)),
        )
    }

    /// Irreducible iff the energy vanishes only on constants, i.e. the support graph is connected.
    pub fn is_irreducible(&self) -> bool {
        self.support_graph().is_connected()
    }

    pub fn is_positive(&self) -> bool {
        self.first_vanishing_pair().is_none()
    }

    pub(crate) fn first_vanishing_pair(&self) -> Option<Edge> {
        pairs(self.n).find(|&(a, b)| !self.is_positive_coefficient(a, b))
    }

    /// Relative harmonicity test: `|L_E(u)(P_j)| <= tol * max_coeff * osc(u)`.
    pub fn is_harmonic_at(&self, u: &[f64], j: usize, tol: f64) -> bool {
        let scale = self.max_coefficient() * oscillation(u);
        if scale == 0.0 {
            return true;
        }
        self.laplacian_at(u, j).abs() <= tol * scale
    }

    /// Dense `N x N` Laplacian matrix `M` with `E(u) = u^T M u`.
    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for (a, b, c) in self.entries() {
            m[(a, a)] += c;
            m[(b, b)] += c;
            m[(a, b)] -= c;
            m[(b, a)] -= c;
        }
        m
    }

    /// Largest coefficient-wise ratio discrepancy: `max |c_e / d_e - 1|` over the
    /// union of both supports (`inf` when supports differ).
    pub fn proportionality_gap(&self, other: &Self) -> f64 {
        let s = self.l1_norm();
        let t = other.l1_norm();
        if s == 0.0 || t == 0.0 {
            return f64::INFINITY;
        }
        let a = self.clamped();
        let b = other.clamped();
        let mut gap: f64 = 0.0;
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            let (x, y) = (x / s, y / t);
            match (x > 0.0, y > 0.0) {
                (false, false) => {}
                (true, true) => gap = gap.max((x / y - 1.0).abs()),
                _ => return f64::INFINITY,
            }
        }
        gap
    }

    pub fn to_file(&self) -> FormFile {
        FormFile {
            n: self.n,
            coefficients: self.entries().collect(),
        }
    }
}

impl Serialize for DirichletForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(serializer)
    }
}

pub fn oscillation(u: &[f64]) -> f64 {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    if u.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// On-disk form: `{"N": 3, "coefficients": [[0, 1, 1.0], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub coefficients: Vec<(usize, usize, f64)>,
}

impl FormFile {
    pub fn into_form(self) -> Result<DirichletForm> {
        if let Some(&(a, b, _)) = self.coefficients.iter().find(|(a, b, _)| a >= b) {
            return Err(Error::InvalidInput(format!("pair ({a},{b}) must satisfy j1 < j2")));
        }
        DirichletForm::from_pairs(self.n, self.coefficients)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
