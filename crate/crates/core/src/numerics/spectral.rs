use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use super::{fro, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// `‖M − M†‖_F / max(‖M‖_F, 1)`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    fro(&(m - m.adjoint())) / fro(m).max(1.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the Hermitian part `(M + M†)/2` is decomposed.
pub fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Square root of the Moore–Penrose pseudo-inverse together with the kernel projector.
#[derive(Clone, Debug)]
pub struct PinvSqrt {
    pub inv_sqrt: ComplexMatrix,
    pub kernel_projector: ComplexMatrix,
    pub rank: usize,
}

/// `M^{-1/2}` on the support of a Hermitian PSD matrix and `I − Π_supp`.
///
/// Eigenvalues at or below `tol · λ_max` count as zero; an eigenvalue below
/// `−tol · λ_max` is rejected.
pub fn pinv_sqrt(m: &ComplexMatrix, tol: f64) -> Result<PinvSqrt> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let dev = hermitian_deviation(m);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.nrows();
    let (values, vectors) = eigh(m);
    let scale = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let cutoff = tol * scale;
    if let Some(&lowest) = values.first() {
        if lowest < -cutoff {
            return Err(Error::NotPsd(lowest));
        }
    }
    let mut inv_sqrt = ComplexMatrix::zeros(n, n);
    let mut kernel = ComplexMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &lambda) in values.iter().enumerate() {
        let v = vectors.column(k);
        let vv = v * v.adjoint();
        if scale > 0.0 && lambda > cutoff {
            inv_sqrt += vv * C64::new(1.0 / lambda.sqrt(), 0.0);
            rank += 1;
        } else {
            kernel += vv;
        }
    }
    Ok(PinvSqrt {
        inv_sqrt,
        kernel_projector: kernel,
        rank,
    })
}

/// Principal square root of a Hermitian PSD matrix (negative rounding noise clipped).
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (values, vectors) = eigh(m);
    let n = m.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda > 0.0 {
            let v = vectors.column(k);
            out += (v * v.adjoint()) * C64::new(lambda.sqrt(), 0.0);
        }
    }
    out
}

/// Orthonormal basis for the column space of `g`.
///
/// Gram–Schmidt with column pivoting and one re-orthogonalisation pass;
/// columns whose remaining norm falls to `rel_tol` times the largest column
/// norm are dropped.
pub fn column_space(g: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    orthonormal_columns(g, rel_tol)
}

/// [`column_space`] for real matrices.
pub fn real_column_space(g: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    orthonormal_columns(g, rel_tol)
}

fn orthonormal_columns<T: ComplexField<RealField = f64>>(g: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    let n = g.nrows();
    let mut rest: Vec<DVector<T>> = g.column_iter().map(|c| c.into_owned()).collect();
    let scale = rest.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut q: Vec<DVector<T>> = Vec::new();
    if scale == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    while !rest.is_empty() && q.len() < n {
        let (k, norm) = rest
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.norm()))
            .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if norm <= rel_tol * scale {
            break;
        }
        let mut v = rest.swap_remove(k);
        for u in &q {
            let c = u.dotc(&v);
            v.axpy(-c, u, T::one());
        }
        let nv = v.norm();
        if nv <= rel_tol * scale {
            continue;
        }
        v.unscale_mut(nv);
        for c in rest.iter_mut() {
            let p = v.dotc(c);
            c.axpy(-p, &v, T::one());
        }
        q.push(v);
    }
    if q.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&q)
}

/// Orthonormal basis of the orthogonal complement of the span of orthonormal columns.
pub fn complement_basis(basis: &ComplexMatrix) -> ComplexMatrix {
    let (n, d) = basis.shape();
    if d == 0 {
        return ComplexMatrix::identity(n, n);
    }
    if d >= n {
        return ComplexMatrix::zeros(n, 0);
    }
    let mut aug = ComplexMatrix::zeros(n, d + n);
    aug.columns_mut(0, d).copy_from(basis);
    aug.columns_mut(d, n).fill_with_identity();
    let q = aug.qr().q();
    q.columns(d, n - d).into_owned()
}
