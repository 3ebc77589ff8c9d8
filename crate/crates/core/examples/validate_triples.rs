//! Checks every built-in triple and a deliberately broken one.

use eigenform_lab::{FractalFile, FractalTriple};

fn main() {
    for name in FractalTriple::builtin_names() {
        let triple = FractalTriple::builtin(name).unwrap();
        let report = triple.validate();
        println!(
            "{name}: N={} k={} |V1|={} valid={} cell graph {}",
            triple.n(),
            triple.k(),
            triple.num_v1(),
            report.violations.is_empty(),
            triple.cell_graph()
        );
    }

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/broken.json");
    let file = FractalFile::read(path).unwrap();
    let report = file.validate();
    println!("broken.json:\n{report}");
}
