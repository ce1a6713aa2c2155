//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`. Bipartite vectors
//! use the row-major product basis `|i⟩_A|j⟩_B ↦ i·d_b + j`, so the matrix
//! view of a vector is its reshape into a `d_a × d_b` matrix.

mod random;
mod spectral;

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use random::{
    gaussian_matrix, haar_basis, haar_projector, haar_unitary, real_gaussian_matrix, real_haar_basis, Seed,
};
pub use spectral::{
    column_space, complement_basis, eigh, hermitian_deviation, pinv_sqrt, psd_sqrt, real_column_space, PinvSqrt,
};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default guard on the ambient (vector-space) dimension of any object built.
pub const DEFAULT_MAX_AMBIENT: usize = 4096;

static MAX_AMBIENT: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_AMBIENT);

/// Current ambient-dimension guard.
pub fn max_ambient() -> usize {
    MAX_AMBIENT.load(Ordering::Relaxed)
}

/// Replace the ambient-dimension guard for the whole process.
pub fn set_max_ambient(limit: usize) {
    MAX_AMBIENT.store(limit.max(1), Ordering::Relaxed);
}

pub fn check_ambient(requested: usize) -> Result<()> {
    let limit = max_ambient();
    if requested > limit {
        Err(Error::AmbientOverflow { requested, limit })
    } else {
        Ok(())
    }
}

/// Which factor of a bipartite system to trace out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Kronecker product `a ⊗ b` with the `(i, j)` block equal to `a[(i, j)] · b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) => {
            check_ambient(r.max(c))?;
            Ok(a.kronecker(b))
        }
        _ => Err(Error::AmbientOverflow {
            requested: usize::MAX,
            limit: max_ambient(),
        }),
    }
}

/// Trace out one factor of an operator on `C^{d_a} ⊗ C^{d_b}`.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), traced: Subsystem) -> Result<ComplexMatrix> {
    let (d_a, d_b) = dims;
    let n = d_a * d_b;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "{}x{} matrix does not factor as ({d_a}·{d_b})²",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match traced {
        Subsystem::B => ComplexMatrix::from_fn(d_a, d_a, |i, k| (0..d_b).map(|j| m[(i * d_b + j, k * d_b + j)]).sum()),
        Subsystem::A => ComplexMatrix::from_fn(d_b, d_b, |j, l| (0..d_a).map(|i| m[(i * d_b + j, i * d_b + l)]).sum()),
    })
}

/// The `d × d` antidiagonal permutation (generalised Pauli X).
pub fn antidiagonal(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i + j + 1 == d { ONE } else { ZERO })
}

/// `P± = (I ± X)/2` for the antidiagonal `X`.
pub fn parity_projectors(d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let id = ComplexMatrix::identity(d, d);
    let x = antidiagonal(d);
    let half = C64::new(0.5, 0.0);
    ((&id + &x) * half, (&id - &x) * half)
}

/// Unnormalised maximally entangled vector `Σ_i |i⟩|i⟩` in `C^d ⊗ C^d`.
pub fn omega(d: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    v
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    outer(v, v)
}

/// Projector `B·B†` onto the span of orthonormal columns.
pub fn projector_from_basis(basis: &ComplexMatrix) -> ComplexMatrix {
    basis * basis.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().sum()
}

/// `tr(a·b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Frobenius norm.
pub fn fro(m: &ComplexMatrix) -> f64 {
    m.norm()
}

/// Reshape a bipartite vector into its `d_a × d_b` matrix view.
pub fn matrix_view(v: &ComplexVector, d_a: usize, d_b: usize) -> ComplexMatrix {
    assert_eq!(v.len(), d_a * d_b, "vector length does not factor");
    ComplexMatrix::from_fn(d_a, d_b, |i, j| v[i * d_b + j])
}

/// Inverse of [`matrix_view`].
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    let (d_a, d_b) = m.shape();
    ComplexVector::from_fn(d_a * d_b, |k, _| m[(k / d_b, k % d_b)])
}

/// Product vector `a ⊗ b`.
pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let db = b.len();
    ComplexVector::from_fn(a.len() * db, |k, _| a[k / db] * b[k % db])
}

/// Real-valued helper for embedding real matrices.
pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Maximum entrywise deviation from the identity of `B†B`.
pub fn orthonormality_defect(basis: &ComplexMatrix) -> f64 {
    let g = basis.adjoint() * basis;
    let id = ComplexMatrix::identity(g.nrows(), g.ncols());
    fro(&(g - id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rand_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = Seed(seed).rng();
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn rand_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let g = rand_matrix(n, n, seed);
        (&g + g.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn identity_tensor_identity() {
        let got = tensor_product(&ComplexMatrix::identity(2, 2), &ComplexMatrix::identity(3, 3)).unwrap();
        assert_eq!(got, ComplexMatrix::identity(6, 6));
    }

    #[test]
    fn x_tensor_x_is_antidiagonal() {
        let x = antidiagonal(2);
        let got = tensor_product(&x, &x).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r + c == 3 { ONE } else { ZERO };
                assert_eq!(got[(r, c)], want);
            }
        }
    }

    #[test]
    fn tensor_acts_factorwise() {
        let a = rand_matrix(3, 3, 1);
        let b = rand_matrix(4, 4, 2);
        let u = rand_matrix(3, 1, 3).column(0).into_owned();
        let v = rand_matrix(4, 1, 4).column(0).into_owned();
        let lhs = tensor_product(&a, &b).unwrap() * kron_vec(&u, &v);
        let rhs = kron_vec(&(&a * &u), &(&b * &v));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn tensor_is_associative() {
        let a = rand_matrix(2, 2, 5);
        let b = rand_matrix(2, 2, 6);
        let c = rand_matrix(3, 3, 7);
        let left = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
        assert!(fro(&(left - right)) <= 1e-12);
    }

    #[test]
    fn tensor_guard_trips() {
        let big = ComplexMatrix::identity(65, 1);
        let err = tensor_product(&big, &big).unwrap_err();
        assert!(matches!(err, Error::AmbientOverflow { .. }));
    }

    #[test]
    fn partial_trace_of_omega_is_identity() {
        let w = omega(3);
        let got = partial_trace(&projector(&w), (3, 3), Subsystem::B).unwrap();
        assert!((got - ComplexMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = rand_hermitian(2, 8);
        let sigma = rand_hermitian(3, 9);
        let m = tensor_product(&rho, &sigma).unwrap();
        let over_a = partial_trace(&m, (2, 3), Subsystem::A).unwrap();
        assert!((over_a - &sigma * trace(&rho)).norm() < 1e-12);
        let over_b = partial_trace(&m, (2, 3), Subsystem::B).unwrap();
        assert!((over_b - &rho * trace(&sigma)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_contraction() {
        let m = rand_hermitian(4, 10);
        // Explicit four-index loop over m[(i j),(k l)].
        let mut over_a = ComplexMatrix::zeros(2, 2);
        let mut over_b = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let e = m[(2 * i + j, 2 * k + l)];
                        if i == k {
                            over_a[(j, l)] += e;
                        }
                        if j == l {
                            over_b[(i, k)] += e;
                        }
                    }
                }
            }
        }
        assert!((partial_trace(&m, (2, 2), Subsystem::A).unwrap() - over_a).norm() < 1e-12);
        assert!((partial_trace(&m, (2, 2), Subsystem::B).unwrap() - over_b).norm() < 1e-12);
        let t = partial_trace(&m, (2, 2), Subsystem::A).unwrap();
        assert!((trace(&t) - trace(&m)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(6, 6);
        assert!(partial_trace(&m, (2, 2), Subsystem::A).is_err());
    }

    #[test]
    fn matrix_view_round_trip() {
        let v = rand_matrix(6, 1, 11).column(0).into_owned();
        assert_eq!(vectorize(&matrix_view(&v, 2, 3)), v);
        let w = omega(3);
        assert_eq!(matrix_view(&w, 3, 3), ComplexMatrix::identity(3, 3));
    }
}
