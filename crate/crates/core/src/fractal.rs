//! Combinatorial fractal triples `(V0, V1, cell maps)` and their weights.
//!
//! Vertices of the first-level set are integer ids `0..num_v1`; ids `0..n` are the
//! boundary points `P_0..P_{n-1}`. Cell `i` is the list `cells[i]` with
//! `cells[i][a]` the image of boundary point `a` under the `i`-th contraction.
//! Cells `0..n` are the boundary cells (cell `j` fixes `P_j`).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractalTriple {
    name: String,
    n: usize,
    num_v1: usize,
    cells: Vec<Vec<usize>>,
}

/// One violated axiom of a fractal triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    TooFewBoundaryPoints { n: usize },
    TooFewCells { k: usize, n: usize },
    DeclaredCellCount { declared: usize, actual: usize },
    CellLength { cell: usize, len: usize },
    VertexOutOfRange { cell: usize, position: usize, id: usize },
    RepeatedVertex { cell: usize, id: usize },
    FixedPoint { j: usize },
    BoundaryPointShared { j: usize, cell: usize },
    UncoveredVertex { id: usize },
    CellGraphDisconnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::TooFewBoundaryPoints { n } => write!(f, "need at least 2 boundary points, got {n}"),
            Violation::TooFewCells { k, n } => write!(f, "need at least N={n} cells, got {k}"),
            Violation::DeclaredCellCount { declared, actual } => {
                write!(f, "declared k={declared} but {actual} cells given")
            }
            Violation::CellLength { cell, len } => write!(f, "cell {cell} has {len} vertices"),
            Violation::VertexOutOfRange { cell, position, id } => {
                write!(f, "cell {cell} position {position}: vertex id {id} out of range")
            }
            Violation::RepeatedVertex { cell, id } => write!(f, "cell {cell} repeats vertex {id}"),
            Violation::FixedPoint { j } => write!(f, "fixed-point condition at j={j}"),
            Violation::BoundaryPointShared { j, cell } => {
                write!(f, "boundary point {j} appears in cell {cell}")
            }
            Violation::UncoveredVertex { id } => write!(f, "vertex {id} lies in no cell"),
            Violation::CellGraphDisconnected => write!(f, "cell graph disconnected"),
        }
    }
}

/// Every violated axiom, in a stable order. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConnectivityFlags {
    pub a_connected: bool,
    pub o_connected: bool,
}

impl FractalTriple {
    /// Assembles a triple without checking it; see [`FractalTriple::validate`].
    pub fn from_parts(name: impl Into<String>, n: usize, num_v1: usize, cells: Vec<Vec<usize>>) -> Self {
        Self {
            name: name.into(),
            n,
            num_v1,
            cells,
        }
    }

    /// Assembles a triple and rejects it unless every axiom holds.
    pub fn new(name: impl Into<String>, n: usize, num_v1: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        let t = Self::from_parts(name, n, num_v1, cells);
        let report = t.validate();
        if report.is_valid() {
            Ok(t)
        } else {
            Err(Error::InvalidTriple(report))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of boundary points `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells `k`.
    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn num_v1(&self) -> usize {
        self.num_v1
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &[usize] {
        &self.cells[i]
    }

    pub fn is_boundary_vertex(&self, id: usize) -> bool {
        id < self.n
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n;
        let k = self.cells.len();
        let mut violations = Vec::new();
        if n < 2 {
            violations.push(Violation::TooFewBoundaryPoints { n });
        }
        if k < n {
            violations.push(Violation::TooFewCells { k, n });
        }

        let mut covered = vec![false; self.num_v1];
        let mut well_formed = true;
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.len() != n {
                violations.push(Violation::CellLength { cell: i, len: cell.len() });
                well_formed = false;
            }
            for (p, &id) in cell.iter().enumerate() {
                if id >= self.num_v1 {
                    violations.push(Violation::VertexOutOfRange { cell: i, position: p, id });
                    well_formed = false;
                } else {
                    covered[id] = true;
                }
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    violations.push(Violation::RepeatedVertex { cell: i, id: w[0] });
                }
            }
        }

        for j in 0..n.min(k) {
            if self.cells[j].get(j) != Some(&j) {
                violations.push(Violation::FixedPoint { j });
            }
        }
        for j in 0..n {
            for (i, cell) in self.cells.iter().enumerate() {
                if i != j && cell.contains(&j) {
                    violations.push(Violation::BoundaryPointShared { j, cell: i });
                }
            }
        }
        for (id, c) in covered.iter().enumerate() {
            if !c {
                violations.push(Violation::UncoveredVertex { id });
            }
        }
        if well_formed && k > 0 && !self.cell_graph().is_connected() {
            violations.push(Violation::CellGraphDisconnected);
        }
        ValidationReport { violations }
    }

    /// Graph on cell indices, `{i1, i2}` an edge iff the two cells share a vertex.
    pub fn cell_graph(&self) -> UndirectedGraph {
        let k = self.cells.len();
        let mut g = UndirectedGraph::empty(k);
        let mut owners: Vec<Vec<usize>> = vec![Vec::new(); self.num_v1];
        for (i, cell) in self.cells.iter().enumerate() {
            for &id in cell {
                if id < self.num_v1 {
                    owners[id].push(i);
                }
            }
        }
        for cells_at in owners {
            for (x, &a) in cells_at.iter().enumerate() {
                for &b in &cells_at[x + 1..] {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    pub fn connectivity_flags(&self) -> ConnectivityFlags {
        let n = self.n;
        let k = self.k();
        let g = self.cell_graph();

        let mut a_connected = true;
        'outer: for j in 0..n {
            let mut allowed = vec![true; k];
            allowed[j] = false;
            let comps = g.components_within(&allowed);
            let comp_of = |x: usize| comps.iter().position(|c| c.contains(&x));
            let first = (0..n).find(|&x| x != j).map(comp_of);
            for j2 in (0..n).filter(|&x| x != j) {
                if Some(comp_of(j2)) != first {
                    a_connected = false;
                    break 'outer;
                }
            }
        }

        let disjoint = (0..n).all(|a| {
            (a + 1..n).all(|b| !self.cells[a].iter().any(|id| self.cells[b].contains(id)))
        });
        let mut interior = vec![false; k];
        for flag in interior.iter_mut().skip(n) {
            *flag = true;
        }
        let o_connected = disjoint && k > n && g.components_within(&interior).len() == 1;

        ConnectivityFlags {
            a_connected,
            o_connected,
        }
    }

    /// One of the shipped encodings: `gasket`, `vicsek`, `tree_gasket`.
    pub fn builtin(name: &str) -> Result<Self> {
        let (n, num_v1, cells): (usize, usize, Vec<Vec<usize>>) = match name {
            // corners 0,1,2; midpoints 3 = P0P1, 4 = P0P2, 5 = P1P2
            "gasket" => (3, 6, vec![vec![0, 3, 4], vec![3, 1, 5], vec![4, 5, 2]]),
            // square corners 0..3 counter-clockwise; center cell corners 4..7,
            // each corner cell touches the center cell at its inner corner
            "vicsek" => (
                4,
                16,
                vec![
                    vec![0, 8, 4, 9],
                    vec![10, 1, 11, 5],
                    vec![6, 12, 2, 13],
                    vec![14, 7, 15, 3],
                    vec![4, 5, 6, 7],
                ],
            ),
            // the gasket with cells 1 and 2 pulled apart
            "tree_gasket" => (3, 7, vec![vec![0, 3, 4], vec![3, 1, 5], vec![4, 6, 2]]),
            other => return Err(Error::UnknownBuiltin(other.to_string())),
        };
        Self::new(name, n, num_v1, cells)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["gasket", "vicsek", "tree_gasket"]
    }
}

/// Strictly positive cell weights `r_0..r_{k-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if let Some((i, x)) = r.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidInput(format!("weight r[{i}] = {x} is not strictly positive")));
        }
        Ok(Self(r))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Checks the weight vector against the number of cells of `triple`.
    pub fn check_for(&self, triple: &FractalTriple) -> Result<()> {
        if self.len() != triple.k() {
            return Err(Error::DimensionMismatch {
                what: "weights",
                expected: triple.k(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// On-disk fractal description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalFile {
    pub name: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub vertices: usize,
    pub cells: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl FractalFile {
    pub fn from_triple(triple: &FractalTriple, weights: Option<&Weights>) -> Self {
        Self {
            name: triple.name.clone(),
            n: triple.n,
            k: triple.k(),
            vertices: triple.num_v1,
            cells: triple.cells.clone(),
            weights: weights.map(|w| w.as_slice().to_vec()),
        }
    }

    /// The triple exactly as written, without validation.
    pub fn triple_unchecked(&self) -> FractalTriple {
        FractalTriple::from_parts(self.name.clone(), self.n, self.vertices, self.cells.clone())
    }

    /// Validation report including the declared-`k` check.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.triple_unchecked().validate();
        if self.k != self.cells.len() {
            report.violations.insert(
                0,
                Violation::DeclaredCellCount {
                    declared: self.k,
                    actual: self.cells.len(),
                },
            );
        }
        report
    }

    pub fn into_parts(self) -> Result<(FractalTriple, Weights)> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidTriple(report));
        }
        let triple = self.triple_unchecked();
        let weights = match self.weights {
            Some(w) => Weights::new(w)?,
            None => Weights::uniform(triple.k()),
        };
        weights.check_for(&triple)?;
        Ok((triple, weights))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
