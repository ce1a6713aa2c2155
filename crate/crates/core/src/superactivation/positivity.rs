//! Positive-definite elements of a Hermitian-closed matrix subspace.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eigh, real_column_space, real_gaussian_matrix, trace, vectorize, ComplexMatrix, Seed, C64};
use crate::subspace::BipartiteSubspace;

/// Largest tolerated `‖Π_{flip S} − Π_S‖_F` before the certificate is refused.
pub const FLIP_TOL: f64 = 1e-8;

const ASCENT_STEPS: usize = 500;
const ASCENT_RESTARTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdCertificate {
    /// Unit-trace element of `M(S)` with `λ_min > tol`.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_matrix")]
    pub witness: Option<ComplexMatrix>,
    /// `λ_min` of the witness, or the best value reached when there is none.
    pub min_eig: f64,
}

mod opt_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<ComplexMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(crate::json::MatrixJson::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<ComplexMatrix>, D::Error> {
        Option::<crate::json::MatrixJson>::deserialize(d)?
            .map(|j| ComplexMatrix::try_from(j).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// `‖vec(W) − Π_S vec(W)‖` for a square matrix `W`.
pub fn membership_residual(s: &BipartiteSubspace, w: &ComplexMatrix) -> f64 {
    s.distance(&vectorize(w))
}

pub fn min_eig(w: &ComplexMatrix) -> f64 {
    eigh(w).0[0]
}

/// Real orthonormal basis (Frobenius inner product) of the Hermitian
/// matrices in `M(S)`.
fn hermitian_basis(s: &BipartiteSubspace) -> Vec<ComplexMatrix> {
    let d = s.d_a();
    let views = s.matrix_basis();
    let half = C64::new(0.5, 0.0);
    let half_i = C64::new(0.0, -0.5);
    let mut cols = Vec::with_capacity(2 * views.len());
    for m in &views {
        let md = m.adjoint();
        cols.push((m + &md) * half);
        cols.push((m - &md) * half_i);
    }
    let real = DMatrix::from_fn(2 * d * d, cols.len(), |r, c| {
        let z = cols[c][((r / 2) / d, (r / 2) % d)];
        if r % 2 == 0 {
            z.re
        } else {
            z.im
        }
    });
    let u = real_column_space(&real, 1e-10);
    u.column_iter()
        .map(|c| ComplexMatrix::from_fn(d, d, |i, j| C64::new(c[2 * (i * d + j)], c[2 * (i * d + j) + 1])))
        .collect()
}

fn combine(base: &ComplexMatrix, dirs: &[ComplexMatrix], c: &[f64]) -> ComplexMatrix {
    let mut w = base.clone();
    for (t, &x) in dirs.iter().zip(c) {
        w += t * C64::new(x, 0.0);
    }
    w
}

/// Look for a positive-definite element of `M(S)`.
///
/// Starts from the projection of `I`, normalised to unit trace. If its
/// smallest eigenvalue does not exceed `tol`, runs projected subgradient
/// ascent on `λ_min` over the unit-trace slice. The search is deterministic.
pub fn psd_span_certificate(s: &BipartiteSubspace, tol: f64) -> Result<PsdCertificate> {
    if s.d_a() != s.d_b() {
        return Err(Error::UnequalDimensions {
            d_a: s.d_a(),
            d_b: s.d_b(),
        });
    }
    if s.dim() == 0 {
        return Ok(PsdCertificate {
            witness: None,
            min_eig: 0.0,
        });
    }
    let flip_residual = s.flip()?.distance_to(s);
    if flip_residual > FLIP_TOL {
        return Err(Error::NotFlipSymmetric(flip_residual));
    }
    let d = s.d_a();
    let herm = hermitian_basis(s);
    let traces: Vec<f64> = herm.iter().map(|h| trace(h).re).collect();
    let t2: f64 = traces.iter().map(|t| t * t).sum();
    if t2 <= 1e-20 {
        // Every element is traceless, so none is positive definite.
        let best = herm
            .iter()
            .flat_map(|h| [min_eig(h), min_eig(&-h)])
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(PsdCertificate {
            witness: None,
            min_eig: best,
        });
    }
    // Projection of I, scaled to unit trace.
    let mut base = ComplexMatrix::zeros(d, d);
    for (h, &t) in herm.iter().zip(&traces) {
        base += h * C64::new(t / t2, 0.0);
    }
    let start = min_eig(&base);
    if start > tol {
        return Ok(PsdCertificate {
            witness: Some(base),
            min_eig: start,
        });
    }

    // Traceless directions: orthonormal complement of the trace vector.
    let m = herm.len();
    let tangent: Vec<ComplexMatrix> = if m > 1 {
        let mut full = DMatrix::<f64>::zeros(m, m + 1);
        for (k, &t) in traces.iter().enumerate() {
            full[(k, 0)] = t;
        }
        full.columns_mut(1, m).fill_with_identity();
        let q = full.qr().q();
        (1..m)
            .map(|c| {
                let mut t = ComplexMatrix::zeros(d, d);
                for (h, k) in herm.iter().zip(0..m) {
                    t += h * C64::new(q[(k, c)], 0.0);
                }
                t
            })
            .collect()
    } else {
        Vec::new()
    };
    if tangent.is_empty() {
        return Ok(PsdCertificate {
            witness: None,
            min_eig: start,
        });
    }

    let mut best_val = start;
    let mut best_c = vec![0.0; tangent.len()];
    let step0 = 1.0 / d as f64;
    for restart in 0..ASCENT_RESTARTS {
        let mut c = if restart == 0 {
            vec![0.0; tangent.len()]
        } else {
            let g = real_gaussian_matrix(tangent.len(), 1, &mut Seed(0).derive(restart as u64).rng());
            g.iter().map(|x| x * step0).collect()
        };
        for step in 0..ASCENT_STEPS {
            let w = combine(&base, &tangent, &c);
            let (values, vectors) = eigh(&w);
            if values[0] > best_val {
                best_val = values[0];
                best_c.clone_from(&c);
            }
            if best_val > tol {
                break;
            }
            let v = vectors.column(0).into_owned();
            let grad: Vec<f64> = tangent.iter().map(|t| (v.adjoint() * t * &v)[(0, 0)].re).collect();
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < 1e-14 {
                break;
            }
            let alpha = step0 / ((step + 1) as f64).sqrt();
            for (x, g) in c.iter_mut().zip(&grad) {
                *x += alpha * g / norm;
            }
        }
        if best_val > tol {
            break;
        }
    }
    let w = combine(&base, &tangent, &best_c);
    Ok(PsdCertificate {
        witness: (best_val > tol).then_some(w),
        min_eig: best_val,
    })
}
