use eigenform_lab::solver::{find_eigenform, SolverOptions};
use eigenform_lab::uniqueness::{decide, EigenformData};
use eigenform_lab::{FractalTriple, Weights};

fn main() {
    for name in FractalTriple::builtin_names() {
        let triple = FractalTriple::builtin(name).unwrap();
        let weights = Weights::uniform(triple.k());
        let solved = find_eigenform(&triple, &weights, None, SolverOptions::default()).unwrap();
        let data = EigenformData::new(&triple, &weights, &solved.form, 1e-12).unwrap();
        let verdict = decide(&data).unwrap();
        println!("{name}: unique={} sink SCCs={:?}", verdict.unique, verdict.sink_sccs);
        for (from, to) in &verdict.digraph.edges {
            println!("  {from:?} -> {to:?}");
        }
        if let Some([a, b]) = &verdict.witnesses {
            println!("  disjoint closed sets {a:?} and {b:?}");
        }
    }
}
