use ndarray::Array2;
use num_complex::Complex64;

/// Relative norm below which a vector is treated as linearly dependent.
const RANK_TOL: f64 = 1e-13;

fn inner(a: &Array2<Complex64>, b: &Array2<Complex64>, w: f64) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>() * w
}

/// Orthonormal basis of a set of transverse profiles under ⟨a, b⟩ = Σ a*·b·w.
///
/// Returns `(basis, coeff)` with `images[i] = Σ_m coeff[[i, m]]·basis[m]`.
/// Modified Gram–Schmidt with one re-orthogonalization pass; directions whose
/// residual norm falls below `1e-13` of the largest input norm are dropped.
pub fn orthonormalize(images: &[Array2<Complex64>], w: f64) -> (Vec<Array2<Complex64>>, Array2<Complex64>) {
    let n = images.len();
    let scale = images
        .iter()
        .map(|a| inner(a, a, w).re.sqrt())
        .fold(0.0, f64::max);
    let mut basis: Vec<Array2<Complex64>> = Vec::new();
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for img in images {
        let mut v = img.clone();
        let mut c = vec![Complex64::new(0.0, 0.0); basis.len()];
        for _ in 0..2 {
            for (m, q) in basis.iter().enumerate() {
                let r = inner(q, &v, w);
                c[m] += r;
                v.zip_mut_with(q, |x, y| *x -= r * y);
            }
        }
        let norm = inner(&v, &v, w).re.sqrt();
        if scale > 0.0 && norm > RANK_TOL * scale {
            v.mapv_inplace(|x| x / norm);
            basis.push(v);
            c.push(Complex64::new(norm, 0.0));
        }
        rows.push(c);
    }
    let k = basis.len();
    let mut coeff = Array2::zeros((n, k));
    for (i, r) in rows.iter().enumerate() {
        for (m, v) in r.iter().enumerate() {
            coeff[[i, m]] = *v;
        }
    }
    (basis, coeff)
}
