//! Small dense complex linear algebra helpers shared across the crate.
//!
//! Everything here operates on `nalgebra::DMatrix<Complex64>`; the matrices
//! involved are at most `D^2 x D^2` with `D <= 4` on the computational space
//! and a few hundred on modulator windows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest entry-wise deviation from Hermiticity, `max |A - A'|`.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
///
/// The input is symmetrized first so ~1e-16 Hermiticity noise cannot leak
/// into complex eigenvalues.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = a.nrows();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigen(a).0[0]
}

/// Principal square root of a Hermitian PSD matrix; eigenvalues below zero
/// (numerical noise) are clamped.
pub fn sqrtm_psd(a: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let roots: Vec<Complex64> = values
        .iter()
        .map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0))
        .collect();
    let d = CMatrix::from_diagonal(&CVector::from_vec(roots));
    &vectors * d * vectors.adjoint()
}

/// Real part of the trace.
pub fn trace_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Trace norm (sum of singular values), via the Hermitian dilation
/// `[[0, B], [B', 0]]` whose eigenvalues are `±σ_i`. Additively accurate even
/// when most singular values vanish, unlike `sqrt` of a Gram spectrum.
pub fn trace_norm(b: &CMatrix) -> f64 {
    let (r, c) = b.shape();
    let n = r + c;
    let mut dil = CMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            dil[(i, r + j)] = b[(i, j)];
            dil[(r + j, i)] = b[(i, j)].conj();
        }
    }
    let (values, _) = hermitian_eigen(&dil);
    values.iter().filter(|&&v| v > 0.0).sum()
}

/// Lower-triangular Cholesky factor `L` with `A = L L'` for a Hermitian
/// positive-definite matrix. Hand-rolled so near-singular inputs get a clear
/// error instead of a panic.
pub fn cholesky_lower(a: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag <= 0.0 {
            return None;
        }
        let d = diag.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Rank of the span of a set of Hermitian operators, via the Gram matrix of
/// their vectorizations.
pub fn operator_span_rank(ops: &[CMatrix], tol: f64) -> usize {
    let m = ops.len();
    let mut gram = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            // <A, B> = Tr(A' B)
            let mut s = Complex64::new(0.0, 0.0);
            for r in 0..ops[i].nrows() {
                for c in 0..ops[i].ncols() {
                    s += ops[i][(r, c)].conj() * ops[j][(r, c)];
                }
            }
            gram[(i, j)] = s;
        }
    }
    let (values, _) = hermitian_eigen(&gram);
    let scale = values.last().copied().unwrap_or(0.0).max(0.0);
    values.iter().filter(|&&v| v > tol * scale.max(1e-300)).count()
}

/// Orthonormal Hermitian operator basis of the `n x n` matrices: the `n`
/// diagonal units followed by the symmetric and antisymmetric pair
/// combinations for each `i < j`.
pub fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
            sym[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
            basis.push(sym);
            let mut asym = CMatrix::zeros(n, n);
            asym[(i, j)] = Complex64::new(0.0, inv_sqrt2);
            asym[(j, i)] = Complex64::new(0.0, -inv_sqrt2);
            basis.push(asym);
        }
    }
    basis
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let v = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian_psd(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        &a * a.adjoint()
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian_psd(6, &mut rng);
        let (values, vectors) = hermitian_eigen(&a);
        let d = CMatrix::from_diagonal(&CVector::from_vec(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        ));
        let rebuilt = &vectors * d * vectors.adjoint();
        assert!((&a - rebuilt).norm() < 1e-10);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sqrtm_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_hermitian_psd(5, &mut rng);
        let r = sqrtm_psd(&a);
        assert!((&r * &r - &a).norm() < 1e-10);
    }

    #[test]
    fn cholesky_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = random_hermitian_psd(4, &mut rng)
                + CMatrix::identity(4, 4).scale(0.1);
            let l = cholesky_lower(&a).expect("positive definite");
            assert!((&l * l.adjoint() - &a).norm() < 1e-10);
            for j in 0..4 {
                assert!(l[(j, j)].im.abs() < 1e-14);
                for i in 0..j {
                    assert_eq!(l[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn kron_matches_definition() {
        let a = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        let b = CMatrix::identity(2, 2);
        let k = kron(&a, &b);
        assert_eq!(k[(0, 2)], Complex64::new(0.0, 1.0));
        assert_eq!(k[(1, 3)], Complex64::new(0.0, 1.0));
        assert_eq!(k[(2, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(k[(3, 1)], Complex64::new(2.0, 0.0));
    }
}
