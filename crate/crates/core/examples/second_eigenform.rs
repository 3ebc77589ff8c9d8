//! Builds a penalty form from a sink component and restarts the iteration from
//! the penalized form, producing an eigenform not proportional to the first.

use eigenform_lab::solver::SolverOptions;
use eigenform_lab::uniqueness::{decide, explore_nonuniqueness, penalty_form, EigenformData};
use eigenform_lab::{DirichletForm, FractalTriple, Weights};

fn main() {
    let tree = FractalTriple::builtin("tree_gasket").unwrap();
    let weights = Weights::uniform(3);
    let form = DirichletForm::from_coefficients(3, vec![1.0, 1.0, 0.0]).unwrap();
    let data = EigenformData::new(&tree, &weights, &form, 1e-12).unwrap();
    let verdict = decide(&data).unwrap();

    let [_, b2] = verdict.witnesses.clone().expect("not unique");
    for &node in &b2 {
        let p = penalty_form(&data, node).unwrap();
        println!("penalty form at {node:?}: {:?}", p.coefficients);
    }

    let ex = explore_nonuniqueness(&data, &verdict, 0.5, SolverOptions::default()).unwrap();
    println!("start {:?} (delta {})", ex.start.coefficients(), ex.delta_used);
    println!(
        "found {:?}, rho={}, proportional to E: {} (gap {:.3})",
        ex.result.form.coefficients(),
        ex.result.rho,
        ex.proportional,
        ex.proportionality_gap
    );
}
