//! Small dense helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Power iteration stops once successive sup-normalized iterates differ by less than this.
pub const PERRON_DIRECTION_TOL: f64 = 1e-13;
const PERRON_MAX_ITER: usize = 20_000;

/// Solves `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: DMatrix<f64>, b: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let scale = a.amax();
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-14 * scale) {
        return Err(Error::SingularSystem(what));
    }
    lu.solve(b).ok_or(Error::SingularSystem(what))
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Perron pair of a nonnegative irreducible matrix: the eigenvalue of largest
/// modulus and its positive eigenvector, scaled to sup-norm 1.
///
/// Power iteration with a Rayleigh-quotient eigenvalue; on stagnation falls back
/// to the dense spectrum plus a null vector of `a - l I`.
pub fn perron_pair(a: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let m = a.nrows();
    assert_eq!(m, a.ncols());
    if m == 0 {
        return Err(Error::Consistency("Perron pair of an empty matrix".into()));
    }
    let mut x = DVector::from_element(m, 1.0);
    for _ in 0..PERRON_MAX_ITER {
        let y = a * &x;
        let norm = y.amax();
        if !(norm > 0.0) {
            break;
        }
        let y = y / norm;
        let change = (&y - &x).amax();
        x = y;
        if change < PERRON_DIRECTION_TOL {
            let ax = a * &x;
            let l = x.dot(&ax) / x.dot(&x);
            return Ok((l, x));
        }
    }
    perron_pair_dense(a)
}

fn perron_pair_dense(a: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let m = a.nrows();
    let eig = a.clone().complex_eigenvalues();
    let l = eig
        .iter()
        .max_by(|p, q| p.re.total_cmp(&q.re))
        .map(|z| z.re)
        .ok_or(Error::NonConvergence {
            what: "dense eigensolver",
            iterations: 0,
        })?;
    let shifted = a - DMatrix::identity(m, m) * l;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.ok_or(Error::NonConvergence {
        what: "dense eigensolver",
        iterations: 0,
    })?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.total_cmp(q.1))
        .expect("nonempty");
    let mut v: DVector<f64> = vt.row(idx).transpose();
    if v.sum() < 0.0 {
        v = -v;
    }
    let norm = v.amax();
    Ok((l, v / norm))
}
