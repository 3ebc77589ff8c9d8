use eigenform_lab::graphs::{all_components, hat_graph};
use eigenform_lab::spectral::{perron_all, pi_limit, project_g};
use eigenform_lab::{DirichletForm, FractalTriple, Renormalizer, Weights};

fn main() {
    let tree = FractalTriple::builtin("tree_gasket").unwrap();
    let weights = Weights::uniform(3);
    let form = DirichletForm::from_coefficients(3, vec![1.0, 1.0, 0.0]).unwrap();
    let rn = Renormalizer::new(&tree, &weights, &form).unwrap();
    let comps = all_components(&tree, &hat_graph(&tree).unwrap()).unwrap();

    for pd in perron_all(&rn, &comps).unwrap() {
        let u = project_g(&[0.0, 1.0, 0.5], &comps[pd.j], pd.s);
        let pi = pi_limit(&rn, &pd, &u, 1e-13, 10_000).unwrap();
        println!(
            "(j={}, s={}) n={} l={:.6} u~={:?} pi(g u)={pi:.6}",
            pd.j, pd.s, pd.n_js, pd.l, pd.u_tilde
        );
    }
}
