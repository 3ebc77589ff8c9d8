//! Renormalization of Dirichlet forms on finitely ramified self-similar fractals,
//! eigenform search, and a decision procedure for uniqueness of the eigenform.
//!
//! A fractal is given combinatorially by a [`FractalTriple`]. For cell weights
//! `r` and a form `E` on the boundary points, [`renorm::Renormalizer`] computes
//! the harmonic extension, the renormalized form `Lambda_r(E)` and the cell
//! operators `T_i`. [`solver::find_eigenform`] iterates the normalized map,
//! and [`uniqueness::decide_uniqueness`] tells whether the eigenform it found
//! is the only one up to scaling.
//!
//! ```
//! use eigenform_lab::{FractalTriple, Weights, solver, uniqueness};
//!
//! let gasket = FractalTriple::builtin("gasket").unwrap();
//! let r = Weights::uniform(gasket.k());
//! let found = solver::find_eigenform(&gasket, &r, None, Default::default()).unwrap();
//! assert!(found.verified);
//! assert!((found.rho - 0.6).abs() < 1e-12);
//!
//! let verdict = uniqueness::decide_uniqueness(&gasket, &r, &found.form, 1e-12).unwrap();
//! assert!(verdict.unique);
//! ```
//!
//! Boundary indices, cells and component indices are zero-based throughout.

pub mod cli;
pub mod error;
pub mod forms;
pub mod fractal;
pub mod graph;
pub mod graphs;
pub mod linalg;
pub mod renorm;
pub mod solver;
pub mod spectral;
pub mod uniqueness;

pub use error::{Error, ErrorKind, Result};
pub use forms::{DirichletForm, FormFile};
pub use fractal::{FractalFile, FractalTriple, ValidationReport, Violation, Weights};
pub use graph::UndirectedGraph;
pub use graphs::{BoundaryGraph, ComponentData};
pub use renorm::{CellOperator, ExtensionResult, Renormalizer};
pub use solver::{EigenResult, SolverOptions};
pub use spectral::PerronData;
pub use uniqueness::{EigenformData, StabilityDigraph, StabilityVerdict};
