use eigenform_lab::renorm::{cell_operator, harmonic_extension, renormalize};
use eigenform_lab::{DirichletForm, FractalTriple, Weights};

fn main() {
    let gasket = FractalTriple::builtin("gasket").unwrap();
    let weights = Weights::uniform(3);
    let unit = DirichletForm::unit(3);

    // Lambda of the unit form is 3/5 times the unit form.
    let once = renormalize(&gasket, &weights, &unit).unwrap();
    println!("Lambda(E) = {:?}", once.coefficients());

    let ext = harmonic_extension(&gasket, &weights, &unit, &[1.0, 0.0, 0.0]).unwrap();
    println!("harmonic extension of chi_0: {:?}", ext.values);
    println!("one-step energy {} vs Lambda(E)(u) {}", ext.achieved_energy, once.energy(&[1.0, 0.0, 0.0]));

    let t0 = cell_operator(&gasket, &weights, &unit, 0).unwrap();
    println!("T_0 = {}", t0.matrix);
}
