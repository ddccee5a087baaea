//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything is built on `nalgebra` dynamic matrices over `Complex<f64>`.
//! Matrices are vectorized column-major wherever a matrix space is treated
//! as a Hilbert space with the trace inner product `<a, b> = tr(a† b)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tol;

pub type Complex = num_complex::Complex<f64>;
pub type CMat = DMatrix<Complex>;
pub type CVec = DVector<Complex>;

pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Deterministic RNG used by every seeded routine in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize, m: usize) -> CMat {
    CMat::zeros(n, m)
}

/// Matrix unit e_{ij} (1 in row i, column j).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Trace inner product `<a, b> = tr(a† b)`.
pub fn trace_inner(a: &CMat, b: &CMat) -> Complex {
    let mut acc = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn is_close(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs(&(a - b)) <= tol
}

/// Hermiticity defect `max |a - a†|`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Column-major vectorization of a matrix.
pub fn mat_to_vec(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

pub fn vec_to_mat(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns in the
/// same order.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    // Symmetrize first so tiny anti-Hermitian noise cannot poison the solver.
    let h = (a + a.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Group sorted eigenvalues into clusters with relative gap tolerance.
///
/// Returns index ranges into the sorted list; two neighbours are merged when
/// their gap is below `rel_tol * max(1, spread)`.
pub fn cluster_sorted(values: &[f64], rel_tol: f64) -> Vec<std::ops::Range<usize>> {
    if values.is_empty() {
        return vec![];
    }
    let spread = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let gap = rel_tol * spread;
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        if values[i] - values[i - 1] > gap {
            ranges.push(start..i);
            start = i;
        }
    }
    ranges.push(start..values.len());
    ranges
}

/// Right nullspace of `a` via SVD, with singular values below
/// `tol::SV_CUTOFF * max(1, σ_max)` treated as zero.
pub fn nullspace(a: &CMat) -> Vec<CVec> {
    let ncols = a.ncols();
    if a.nrows() == 0 {
        return (0..ncols)
            .map(|j| {
                let mut v = CVec::zeros(ncols);
                v[j] = ONE;
                v
            })
            .collect();
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let cutoff = tol::SV_CUTOFF * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    (rank..v_t.nrows())
        .map(|i| v_t.row(i).adjoint())
        .chain((v_t.nrows()..ncols).map(|j| {
            // Wide input: svd only returns min(r, c) right singular vectors;
            // pad with unit vectors orthogonalized afterwards by the caller.
            let mut v = CVec::zeros(ncols);
            v[j] = ONE;
            v
        }))
        .collect()
}

/// Numerical rank of `a` with the crate-wide singular value cutoff.
pub fn rank(a: &CMat) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let cutoff = tol::SV_CUTOFF * smax.max(1.0);
    svd.singular_values.iter().filter(|&&s| s > cutoff).count()
}

/// Gram–Schmidt over matrices with the trace inner product.
///
/// Returns an orthonormal basis of the span; directions with residual below
/// `tol` are dropped. A second orthogonalization pass keeps the basis
/// orthonormal to machine precision.
pub fn orthonormalize(mats: &[CMat], tol: f64) -> Vec<CMat> {
    let mut basis: Vec<CMat> = Vec::new();
    for m in mats {
        let mut v = m.clone();
        for _ in 0..2 {
            for b in &basis {
                let coeff = trace_inner(b, &v);
                v -= b.scale_complex(coeff);
            }
        }
        let norm = frobenius_norm(&v);
        if norm > tol {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

/// Orthogonal projection of `m` onto the span of a trace-orthonormal basis;
/// returns (projection, residual norm).
pub fn project_span(basis: &[CMat], m: &CMat) -> (CMat, f64) {
    let mut proj = CMat::zeros(m.nrows(), m.ncols());
    for b in basis {
        let coeff = trace_inner(b, m);
        proj += b.scale_complex(coeff);
    }
    let residual = frobenius_norm(&(m - &proj));
    (proj, residual)
}

/// Random matrix with independent entries uniform in the complex unit square.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

/// Random density matrix (normalized Wishart: g g† / tr).
pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = random_matrix(rng, n, n);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    w.unscale(tr)
}

/// Random unit vector.
pub fn random_state_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    let v = CVec::from_fn(n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let norm = v.norm();
    v.unscale(norm)
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(a);
    vals.iter().map(|v| v.abs()).sum()
}

/// Scale helper: nalgebra's `scale` wants a real factor, this one is complex.
pub trait ScaleComplex {
    fn scale_complex(&self, z: Complex) -> CMat;
}

impl ScaleComplex for CMat {
    fn scale_complex(&self, z: Complex) -> CMat {
        self.map(|e| e * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_units_are_trace_orthonormal() {
        let units: Vec<CMat> = (0..3)
            .flat_map(|i| (0..3).map(move |j| matrix_unit(3, i, j)))
            .collect();
        for (p, a) in units.iter().enumerate() {
            for (q, b) in units.iter().enumerate() {
                let ip = trace_inner(a, b);
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((ip - cr(expect)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn nullspace_of_rank_one() {
        // [[1, 1], [1, 1]] has nullspace spanned by (1, -1)/sqrt(2)
        let a = CMat::from_row_slice(2, 2, &[ONE, ONE, ONE, ONE]);
        let ns = nullspace(&a);
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        assert!((v[0] + v[1]).norm() < 1e-12);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut rng = seeded_rng(7);
        let h = random_hermitian(&mut rng, 5);
        let (vals, vecs) = hermitian_eigen(&h);
        let d = CMat::from_diagonal(&CVec::from_iterator(5, vals.iter().map(|&v| cr(v))));
        let rec = &vecs * d * vecs.adjoint();
        assert!(is_close(&rec, &h, 1e-10));
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn orthonormalize_finds_span_dimension() {
        let a = matrix_unit(2, 0, 0);
        let b = matrix_unit(2, 1, 1);
        let sum = &a + &b;
        let basis = orthonormalize(&[a.clone(), b.clone(), sum], 1e-12);
        assert_eq!(basis.len(), 2);
        let (_, res) = project_span(&basis, &(&a - &b));
        assert!(res < 1e-12);
    }

    #[test]
    fn cluster_sorted_groups_degenerate_values() {
        let vals = [1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0 + 1e-13];
        let ranges = cluster_sorted(&vals, 1e-9);
        assert_eq!(ranges.len(), 3);
        assert_eq!(ranges[0], 0..2);
        assert_eq!(ranges[2], 3..5);
    }
}
