//! A triple defined in code: the gasket with unequal weights, written to a file
//! and run through the command line.

use eigenform_lab::solver::{find_eigenform, SolverOptions};
use eigenform_lab::{cli, FractalFile, FractalTriple, Weights};

fn main() {
    let cells = vec![vec![0, 3, 4], vec![3, 1, 5], vec![4, 5, 2]];
    let triple = FractalTriple::new("lopsided gasket", 3, 6, cells).unwrap();
    let weights = Weights::new(vec![1.0, 1.2, 1.2]).unwrap();

    let r = find_eigenform(&triple, &weights, None, SolverOptions::default()).unwrap();
    println!("rho={:.10} E={:?} verified={}", r.rho, r.form.coefficients(), r.verified);

    let file = FractalFile::from_triple(&triple, Some(&weights));
    let path = std::env::temp_dir().join("lopsided_gasket.json");
    std::fs::write(&path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let code = cli::run(["eigenform-lab", "--format", "text", "report", path.to_str().unwrap()]);
    println!("exit code {code}");
}
