//! Random subspaces `S ⊆ C^{d_a} ⊗ C^{d_a}` with `flip(S) = S`,
//! `flip(local_x S) = local_x S` and `S ⊥ (I+X)⊗(I−X)·S⊥`.
//!
//! These constraints make `S` invariant under `X⊗X` and make its projector
//! commute with `P₊⊗P₋` and `P₋⊗P₊`. On the pair support `R` the map `X⊗X`
//! acts as `−1`, and on its complement `W` as `+1`. The flip-even part of
//! `S ∩ R` must be invariant under `J = i(P₊⊗P₋ − P₋⊗P₊)`, so its complex
//! dimension `r` is even. A [`StructureIndex`] records `r` and the split of
//! each part across the `X⊗X = ±1` eigenspaces: `k1` is the `+1` share of the
//! `R` part and `k2` the `+1` share of the `W` part.

mod embedding;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    check_ambient, fro, omega, parity_projectors, projector_from_basis, real_column_space, real_haar_basis,
    tensor_product, ComplexMatrix, Seed,
};
use crate::subspace::{BipartiteSubspace, Provenance};

pub use embedding::{complexify, embed_operator, embed_vector, Block, RealEmbedding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StructureIndex {
    pub d_a: usize,
    pub d: usize,
    pub r: usize,
    pub k1: usize,
    pub k2: usize,
}

const R_PLUS: Block = Block {
    pair_support: true,
    flip_plus: true,
    xx_plus: true,
};
const R_MINUS: Block = Block {
    pair_support: true,
    flip_plus: true,
    xx_plus: false,
};
const W_PLUS: Block = Block {
    pair_support: false,
    flip_plus: true,
    xx_plus: true,
};
const W_MINUS: Block = Block {
    pair_support: false,
    flip_plus: true,
    xx_plus: false,
};

fn check_dims(d_a: usize, d: usize) -> Result<()> {
    if d_a == 0 || d_a % 2 == 1 {
        return Err(Error::OddDimension(d_a));
    }
    check_ambient(2 * d_a * d_a)?;
    if d == 0 || d > d_a * d_a {
        return Err(Error::InvalidArgument(format!(
            "subspace dimension {d} outside 1..={}",
            d_a * d_a
        )));
    }
    Ok(())
}

impl StructureIndex {
    /// Complex dimensions of the four blocks `(R,+), (R,−), (W,+), (W,−)`.
    pub fn block_dims(&self) -> Option<[usize; 4]> {
        let rest = self.d.checked_sub(self.r)?;
        Some([
            self.k1,
            self.r.checked_sub(self.k1)?,
            self.k2,
            rest.checked_sub(self.k2)?,
        ])
    }

    /// Why the index is not admissible, if it is not.
    pub fn defect(&self, emb: &RealEmbedding) -> Option<String> {
        let half = self.d_a * self.d_a / 2;
        let lo = self.d.saturating_sub(half);
        let hi = self.d.min(half);
        if self.r < lo || self.r > hi {
            return Some(format!("r = {} outside {lo}..={hi}", self.r));
        }
        let Some(dims) = self.block_dims() else {
            return Some(format!("k1 = {} or k2 = {} exceeds its part", self.k1, self.k2));
        };
        if dims[0] % 2 == 1 || dims[1] % 2 == 1 {
            return Some(format!(
                "pair-support shares (k1, r−k1) = ({}, {}) must be even",
                dims[0], dims[1]
            ));
        }
        for (dim, block) in dims.iter().zip([R_PLUS, R_MINUS, W_PLUS, W_MINUS]) {
            let cap = emb.capacity(block);
            if *dim > cap {
                return Some(format!("block {block:?} needs {dim} dimensions but has capacity {cap}"));
            }
        }
        None
    }
}

/// Every admissible `(r, k1, k2)` for `(d_a, d)`, ordered by `(r, k1, k2)`.
pub fn admissible_indices(d_a: usize, d: usize) -> Result<Vec<StructureIndex>> {
    check_dims(d_a, d)?;
    let emb = RealEmbedding::cached(d_a)?;
    let half = d_a * d_a / 2;
    let mut out = Vec::new();
    for r in d.saturating_sub(half)..=d.min(half) {
        for k1 in 0..=r {
            for k2 in 0..=d - r {
                let idx = StructureIndex { d_a, d, r, k1, k2 };
                if idx.defect(&emb).is_none() {
                    out.push(idx);
                }
            }
        }
    }
    Ok(out)
}

/// `J`-invariant subspace of real dimension `dim` inside a block: the real
/// span of `g_j, J g_j` for Gaussian `g_j`.
fn pair_block(emb: &RealEmbedding, block: Block, dim: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let e = emb.block(block);
    let n = e.nrows();
    if dim == 0 {
        return DMatrix::zeros(n, 0);
    }
    let j = emb.pair_structure();
    let jb = e.transpose() * &j * e;
    let g = crate::numerics::real_gaussian_matrix(e.ncols(), dim / 2, rng);
    let mut gen = DMatrix::zeros(e.ncols(), dim);
    gen.columns_mut(0, dim / 2).copy_from(&g);
    gen.columns_mut(dim / 2, dim / 2).copy_from(&(&jb * &g));
    e * gen.qr().q()
}

/// Uniform real subspace of a block.
fn plain_block(emb: &RealEmbedding, block: Block, dim: usize, rng: &mut impl rand::Rng) -> Result<DMatrix<f64>> {
    let e = emb.block(block);
    Ok(e * real_haar_basis(e.ncols(), dim, rng)?)
}

/// `W`-block sample containing `ω` and orthogonal to `(I⊗X)ω`.
fn seeded_block(emb: &RealEmbedding, dim: usize, rng: &mut impl rand::Rng) -> Result<DMatrix<f64>> {
    let d_a = emb.d_a;
    let e = emb.block(W_PLUS);
    let w = omega(d_a).normalize();
    let x_w = {
        let mut v = w.clone();
        for a in 0..d_a {
            for b in 0..d_a {
                v[a * d_a + b] = w[a * d_a + (d_a - 1 - b)];
            }
        }
        v
    };
    // Coordinates inside the block.
    let cw = e.transpose() * embed_vector(&w);
    let cx = e.transpose() * embed_vector(&x_w);
    let m = e.ncols();
    let mut fixed = DMatrix::zeros(m, 2);
    fixed.set_column(0, &cw);
    fixed.set_column(1, &cx);
    let q = fixed.qr().q();
    // Orthogonal complement of {ω, (I⊗X)ω} inside the block.
    let mut aug = DMatrix::zeros(m, m + 2);
    aug.columns_mut(0, 2).copy_from(&q);
    aug.columns_mut(2, m).fill_with_identity();
    let full = aug.qr().q();
    let rest = full.columns(2, m - 2).into_owned();
    let fill = real_haar_basis(m - 2, dim - 1, rng)?;
    let mut coords = DMatrix::zeros(m, dim);
    coords.set_column(0, &q.column(0));
    coords.columns_mut(1, dim - 1).copy_from(&(rest * fill));
    Ok(e * coords)
}

/// Sample a constrained subspace with structure `idx`.
///
/// Each block is drawn independently from `seed.derive(block)`. With
/// `positivity_seed`, `ω` lies in `S` and `(I⊗X)ω` in `S⊥`, so the identity
/// belongs to both `M(S)` and `M(local_x S⊥)`.
pub fn sample_constrained(idx: &StructureIndex, seed: Seed, positivity_seed: bool) -> Result<BipartiteSubspace> {
    check_dims(idx.d_a, idx.d)?;
    let emb = RealEmbedding::cached(idx.d_a)?;
    if let Some(why) = idx.defect(&emb) {
        return Err(Error::InadmissibleIndex(why));
    }
    let dims = idx.block_dims().expect("checked by defect");
    if positivity_seed && (dims[2] == 0 || dims[2] + 1 > emb.capacity(W_PLUS)) {
        return Err(Error::InadmissibleIndex(format!(
            "positivity seeding needs 1 ≤ k2 ≤ {} (got k2 = {})",
            emb.capacity(W_PLUS).saturating_sub(1),
            dims[2]
        )));
    }
    let parts = [
        pair_block(&emb, R_PLUS, dims[0], &mut seed.derive(0).rng()),
        pair_block(&emb, R_MINUS, dims[1], &mut seed.derive(1).rng()),
        if positivity_seed {
            seeded_block(&emb, dims[2], &mut seed.derive(2).rng())?
        } else {
            plain_block(&emb, W_PLUS, dims[2], &mut seed.derive(2).rng())?
        },
        plain_block(&emb, W_MINUS, dims[3], &mut seed.derive(3).rng())?,
    ];
    let n2 = 2 * idx.d_a * idx.d_a;
    let mut real = DMatrix::zeros(n2, idx.d);
    let mut col = 0;
    for p in &parts {
        real.columns_mut(col, p.ncols()).copy_from(p);
        col += p.ncols();
    }
    // Flip-even real vectors that are real-orthonormal are complex-orthonormal.
    let basis = complexify(&real);
    Ok(BipartiteSubspace::from_orthonormal(idx.d_a, idx.d_a, basis, Provenance::Sampled)?.with_index(*idx))
}

/// Frobenius residuals of the constraint identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `‖Π_{flip S} − Π_S‖`
    pub flip_residual: f64,
    /// `‖Π_{flip(local_x S)} − Π_{local_x S}‖`
    pub flip_x_residual: f64,
    /// `‖Π_S·(I+X)⊗(I−X)·Π_{S⊥}‖`
    pub ortho_residual: f64,
    /// `‖[Π_S, P₊⊗P₋]‖`
    pub commutant_residual: f64,
    pub pass: bool,
}

impl SymmetryReport {
    pub fn max_residual(&self) -> f64 {
        self.flip_residual
            .max(self.flip_x_residual)
            .max(self.ortho_residual)
            .max(self.commutant_residual)
    }
}

/// `‖Π_S·(I+X)⊗(I−X)·Π_{S⊥}‖_F`.
pub fn ortho_residual(s: &BipartiteSubspace) -> Result<f64> {
    let d_b = s.d_b();
    let id = ComplexMatrix::identity(d_b, d_b);
    let x = crate::numerics::antidiagonal(d_b);
    let id_a = ComplexMatrix::identity(s.d_a(), s.d_a());
    let xa = crate::numerics::antidiagonal(s.d_a());
    let op = tensor_product(&(id_a + xa), &(&id - &x))?;
    let p = s.projector();
    let perp = ComplexMatrix::identity(p.nrows(), p.nrows()) - &p;
    Ok(fro(&(&p * op * perp)))
}

/// Residuals of the flip, flip-after-local-X and orthogonality constraints.
pub fn verify_symmetries(s: &BipartiteSubspace, tol: f64) -> Result<SymmetryReport> {
    let p = s.projector();
    let flip_residual = fro(&(projector_from_basis(s.flip()?.basis()) - &p));
    let lx = s.local_x();
    let flip_x_residual = lx.flip()?.distance_to(&lx);
    let ortho = ortho_residual(s)?;
    let (pp, pm) = parity_projectors(s.d_a());
    let q = tensor_product(&pp, &pm)?;
    let commutant_residual = fro(&(&p * &q - &q * &p));
    let report = SymmetryReport {
        flip_residual,
        flip_x_residual,
        ortho_residual: ortho,
        commutant_residual,
        pass: false,
    };
    Ok(SymmetryReport {
        pass: report.max_residual() <= tol,
        ..report
    })
}

/// Ranks of `Π`, `Π·P_R` and `Π·P_W` for the embedded projector.
pub fn rank_profile(s: &BipartiteSubspace) -> Result<(usize, usize, usize)> {
    let emb = RealEmbedding::cached(s.d_a())?;
    let pi = emb.embed_projector(s.basis());
    let r_proj = &emb.plus_minus + &emb.minus_plus;
    let n = pi.nrows();
    let w_proj = DMatrix::<f64>::identity(n, n) - &r_proj;
    let rank = |m: DMatrix<f64>| {
        if m.norm() <= 1e-8 {
            0
        } else {
            real_column_space(&m, 1e-8).ncols()
        }
    };
    Ok((rank(pi.clone()), rank(&pi * r_proj), rank(&pi * w_proj)))
}

/// `‖Π(P₊⊗P₋)Π − (P₊⊗P₋)Π‖_F`, zero iff `Π` commutes with `P₊⊗P₋`.
pub fn compressed_commutation_residual(s: &BipartiteSubspace) -> Result<f64> {
    let (pp, pm) = parity_projectors(s.d_a());
    let q = tensor_product(&pp, &pm)?;
    let p = s.projector();
    Ok(fro(&(&p * &q * &p - &q * &p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::haar_basis;

    #[test]
    fn index_window_at_four_six() {
        let idx = admissible_indices(4, 6).unwrap();
        let rs: std::collections::BTreeSet<usize> = idx.iter().map(|i| i.r).collect();
        assert_eq!(rs.into_iter().collect::<Vec<_>>(), vec![0, 2, 4, 6]);
        assert!(idx.iter().all(|i| i.k1 == 0 && i.k2 == i.d - i.r));
        assert_eq!(idx.len(), 4);
    }

    #[test]
    fn full_dimension_forces_r() {
        let idx = admissible_indices(4, 16).unwrap();
        assert_eq!(
            idx,
            vec![StructureIndex {
                d_a: 4,
                d: 16,
                r: 8,
                k1: 0,
                k2: 8
            }]
        );
    }

    #[test]
    fn odd_and_out_of_range_rejected() {
        assert!(matches!(admissible_indices(3, 2), Err(Error::OddDimension(3))));
        assert!(admissible_indices(4, 0).is_err());
        assert!(admissible_indices(4, 17).is_err());
    }

    #[test]
    fn inadmissible_index_rejected() {
        let idx = StructureIndex {
            d_a: 4,
            d: 6,
            r: 3,
            k1: 1,
            k2: 2,
        };
        assert!(matches!(
            sample_constrained(&idx, Seed(7), false),
            Err(Error::InadmissibleIndex(_))
        ));
    }

    #[test]
    fn sampled_subspace_meets_constraints() {
        for idx in admissible_indices(4, 6).unwrap() {
            let s = sample_constrained(&idx, Seed(3), false).unwrap();
            assert_eq!(s.dim(), 6);
            let rep = verify_symmetries(&s, 1e-10).unwrap();
            assert!(rep.pass, "{idx:?}: {rep:?}");
            assert!(compressed_commutation_residual(&s).unwrap() < 1e-10);
            assert_eq!(rank_profile(&s).unwrap(), (12, 2 * idx.r, 2 * (6 - idx.r)));
        }
    }

    #[test]
    fn sampled_projector_commutes_with_i() {
        let idx = admissible_indices(4, 6).unwrap()[2];
        let s = sample_constrained(&idx, Seed(4), false).unwrap();
        let emb = RealEmbedding::cached(4).unwrap();
        let p = emb.embed_projector(s.basis());
        let i = &emb.i;
        assert!((i * &p * i.transpose() - &p).norm() < 1e-10);
        assert!((&emb.flip * &p - &p * &emb.flip).norm() < 1e-10);
        assert!((&emb.xx * &p - &p * &emb.xx).norm() < 1e-10);
        assert!((&emb.plus_minus * &p - &p * &emb.plus_minus).norm() < 1e-10);
    }

    #[test]
    fn positivity_seed_places_omega() {
        for idx in admissible_indices(4, 6).unwrap().into_iter().filter(|i| i.k2 >= 1) {
            let s = sample_constrained(&idx, Seed(9), true).unwrap();
            let w = omega(4).normalize();
            assert!(s.distance(&w) < 1e-10);
            let mut xw = w.clone();
            for a in 0..4 {
                for b in 0..4 {
                    xw[a * 4 + b] = w[a * 4 + 3 - b];
                }
            }
            assert!((s.basis().adjoint() * xw).norm() < 1e-10);
        }
        let no_w = StructureIndex {
            d_a: 4,
            d: 6,
            r: 6,
            k1: 0,
            k2: 0,
        };
        assert!(sample_constrained(&no_w, Seed(1), true).is_err());
    }

    #[test]
    fn deterministic_bits() {
        let idx = admissible_indices(4, 6).unwrap()[1];
        let a = sample_constrained(&idx, Seed(42), true).unwrap();
        let b = sample_constrained(&idx, Seed(42), true).unwrap();
        assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn full_space_has_zero_residuals() {
        let rep = verify_symmetries(&BipartiteSubspace::full(4, 4), 0.0).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn unconstrained_subspaces_fail() {
        for seed in 0..100 {
            let b = haar_basis(16, 6, &mut Seed(seed).rng()).unwrap();
            let s = BipartiteSubspace::from_orthonormal(4, 4, b, Provenance::Random).unwrap();
            assert!(verify_symmetries(&s, 1e-10).unwrap().max_residual() > 1e-3);
        }
    }

    #[test]
    fn complement_of_sample_passes() {
        let idx = admissible_indices(4, 6).unwrap()[1];
        let s = sample_constrained(&idx, Seed(5), false).unwrap();
        assert!(verify_symmetries(&s.complement(), 1e-10).unwrap().pass);
    }
}
