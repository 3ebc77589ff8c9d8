//! Graph fixed points: G~, G^ and the component data of each boundary index.

use eigenform_lab::graphs::{all_components, hat_graph, lambda_graph, tilde_graph};
use eigenform_lab::FractalTriple;

fn main() {
    for name in FractalTriple::builtin_names() {
        let triple = FractalTriple::builtin(name).unwrap();
        let tilde = tilde_graph(&triple);
        let hat = hat_graph(&triple).unwrap();
        assert_eq!(lambda_graph(&triple, &hat), hat);
        println!("{name}: G~ = {tilde}, G^ = {hat}");
        for comp in all_components(&triple, &hat).unwrap() {
            println!(
                "  j={} components={:?} beta={:?} periods={:?}",
                comp.j, comp.components, comp.beta, comp.periods
            );
        }
    }
}
