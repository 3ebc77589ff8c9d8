mod common;

use common::*;
use eigenform_lab::graphs::{hat_graph, lambda_graph};
use eigenform_lab::renorm::{one_step_energy, renormalize};
use eigenform_lab::{DirichletForm, FractalTriple, Renormalizer, UndirectedGraph, Weights};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: [&str; 3] = ["gasket", "tree_gasket", "vicsek"];

fn setup(which: usize, seed: u64) -> (FractalTriple, Weights, DirichletForm, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = builtin(NAMES[which]);
    let w = random_weights(&mut rng, t.k());
    let hat = hat_graph(&t).unwrap();
    let support = if rng.gen_bool(0.5) { hat } else { UndirectedGraph::complete(t.n()) };
    let e = random_form_on(&mut rng, t.n(), &support);
    (t, w, e, rng)
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> UndirectedGraph {
    let mut g = UndirectedGraph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_matches_coefficients(which in 0..3usize, seed: u64) {
        let (t, _, e, mut rng) = setup(which, seed);
        let n = t.n();
        for b in 0..n {
            let chi: Vec<f64> = (0..n).map(|x| if x == b { 1.0 } else { 0.0 }).collect();
            for a in (0..n).filter(|&a| a != b) {
                prop_assert!((e.laplacian_at(&chi, a) - e.get(a, b)).abs() < 1e-14);
                prop_assert!(e.laplacian_at(&chi, a) >= 0.0);
            }
        }
        let u = random_vec(&mut rng, n);
        let lu = e.laplacian(&u);
        let total: f64 = lu.iter().sum();
        prop_assert!(total.abs() < 1e-12);
        let pairing: f64 = u.iter().zip(&lu).map(|(x, y)| x * y).sum();
        prop_assert!((pairing + e.energy(&u)).abs() < 1e-12 * (1.0 + e.energy(&u)));
    }

    #[test]
    fn energy_invariant_under_constants_and_homogeneous(which in 0..3usize, seed: u64, c in -5.0..5.0f64, s in -3.0..3.0f64) {
        let (t, _, e, mut rng) = setup(which, seed);
        let u = random_vec(&mut rng, t.n());
        let shifted: Vec<f64> = u.iter().map(|x| x + c).collect();
        let scaled: Vec<f64> = u.iter().map(|x| x * s).collect();
        let base = e.energy(&u);
        prop_assert!((e.energy(&shifted) - base).abs() <= 1e-11 * (1.0 + base));
        prop_assert!((e.energy(&scaled) - s * s * base).abs() <= 1e-11 * (1.0 + s * s * base));
    }

    #[test]
    fn renormalization_is_homogeneous(which in 0..3usize, seed: u64, s in 0.1..10.0f64) {
        let (t, w, e, _) = setup(which, seed);
        let once = renormalize(&t, &w, &e).unwrap();
        let scaled = renormalize(&t, &w, &e.scaled(s)).unwrap();
        for (a, b) in once.coefficients().iter().zip(scaled.coefficients()) {
            prop_assert!((s * a - b).abs() <= 1e-10 * s * once.max_coefficient());
        }
    }

    #[test]
    fn support_of_renormalized_form_is_lambda_of_support(which in 0..3usize, seed: u64) {
        let (t, w, e, _) = setup(which, seed);
        let once = renormalize(&t, &w, &e).unwrap();
        prop_assert_eq!(once.support_graph(), lambda_graph(&t, &e.support_graph()));
    }

    #[test]
    fn graph_lambda_is_monotone_and_keeps_connectivity(which in 0..3usize, seed: u64, p in 0.1..0.9f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = builtin(NAMES[which]);
        let g = random_graph(&mut rng, t.n(), p);
        let mut bigger = g.clone();
        for (a, b) in random_graph(&mut rng, t.n(), p).edges() {
            bigger.add_edge(a, b);
        }
        let lg = lambda_graph(&t, &g);
        prop_assert!(lg.is_subgraph_of(&lambda_graph(&t, &bigger)));
        if g.is_connected() {
            prop_assert!(lg.is_connected());
        }
    }

    #[test]
    fn two_steps_equal_second_level_network(which in 0..3usize, seed: u64) {
        let (t, w, e, _) = setup(which, seed);
        let twice = renormalize(&t, &w, &renormalize(&t, &w, &e).unwrap()).unwrap();
        let brute = two_level_lambda(&t, &w, &e);
        for (a, b) in twice.coefficients().iter().zip(brute.coefficients()) {
            prop_assert!((a - b).abs() <= 1e-9 * twice.max_coefficient());
        }
    }

    #[test]
    fn extension_minimizes_and_obeys_maximum_principle(which in 0..3usize, seed: u64) {
        let (t, w, e, mut rng) = setup(which, seed);
        let rn = Renormalizer::new(&t, &w, &e).unwrap();
        let u = random_vec(&mut rng, t.n());
        let ext = rn.harmonic_extension(&u);
        let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(ext.values.iter().all(|&x| lo - 1e-12 <= x && x <= hi + 1e-12));
        let energy = rn.renormalized().energy(&u);
        prop_assert!((ext.achieved_energy - energy).abs() <= 1e-10 * (1.0 + energy));
        let mut perturbed = ext.values.clone();
        for x in perturbed.iter_mut().skip(t.n()) {
            *x += rng.gen_range(-0.1..0.1);
        }
        prop_assert!(one_step_energy(&t, &w, &e, &perturbed) >= ext.achieved_energy - 1e-12);
    }
}
