//! Normalized iteration on each built-in triple, then the weighted tree gasket
//! where no eigenform exists.

use eigenform_lab::solver::{find_eigenform, SolverOptions};
use eigenform_lab::{FractalTriple, Weights};

fn main() {
    let opts = SolverOptions::default();
    for name in FractalTriple::builtin_names() {
        let triple = FractalTriple::builtin(name).unwrap();
        let r = find_eigenform(&triple, &Weights::uniform(triple.k()), None, opts).unwrap();
        println!(
            "{name}: rho={:.12} verified={} after {} iterations, E={:?}",
            r.rho,
            r.verified,
            r.iterations,
            r.form.coefficients()
        );
    }

    let tree = FractalTriple::builtin("tree_gasket").unwrap();
    let weights = Weights::new(vec![1.0, 2.0, 3.0]).unwrap();
    let r = find_eigenform(&tree, &weights, None, opts).unwrap();
    println!(
        "tree_gasket r=(1,2,3): converged={} residual={:.3e} {}",
        r.converged,
        r.residual,
        r.stop_reason.unwrap_or_default()
    );
}
