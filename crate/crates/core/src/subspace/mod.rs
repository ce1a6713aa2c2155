//! Subspaces of `C^{d_a} ⊗ C^{d_b}` and the maps that act on them.
//!
//! A subspace is stored as a `(d_a·d_b) × dim` matrix with orthonormal
//! columns. The matrix view `M(ψ)` of a column is its row-major reshape, so
//! `flip` acts as `M ↦ M†`, `local_x` as `M ↦ M·X`, `conjugate` as
//! `M ↦ conj(M)` and `transpose_view` as `M ↦ Mᵀ`.

mod plucker;
mod product;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    antidiagonal, check_ambient, column_space, complement_basis, fro, haar_basis, matrix_view, orthonormality_defect,
    projector_from_basis, ComplexMatrix, ComplexVector, Seed,
};
use crate::sampler::StructureIndex;

pub use plucker::{plucker, PluckerCoordinates, DEFAULT_PLUCKER_LIMIT};
pub use product::{
    find_product_state, k_unextendible, search_k_unextendible, seesaw_trace, KUnextendibility, ProductSearch,
    ProductStateWitness, SearchMode, SearchParams, Unextendibility,
};

/// Tolerance on `B†B = I` for stored bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Rank cutoff (relative to the largest singular value) when orthonormalising spans.
pub const RANK_TOL: f64 = 1e-10;

/// How a subspace came to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Random,
    UpbSpan,
    Symmetrized,
    Sampled,
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSubspace")]
pub struct BipartiteSubspace {
    d_a: usize,
    d_b: usize,
    #[serde(with = "crate::json::matrix")]
    basis: ComplexMatrix,
    provenance: Provenance,
    /// Carries an unextendible-product-basis certificate (the span contains the
    /// span of a certified UPB).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<StructureIndex>,
}

#[derive(Deserialize)]
struct RawSubspace {
    d_a: usize,
    d_b: usize,
    #[serde(with = "crate::json::matrix")]
    basis: ComplexMatrix,
    provenance: Provenance,
    #[serde(default)]
    certified: bool,
    #[serde(default)]
    index: Option<StructureIndex>,
}

impl TryFrom<RawSubspace> for BipartiteSubspace {
    type Error = Error;
    fn try_from(raw: RawSubspace) -> Result<Self> {
        let mut s = BipartiteSubspace::from_orthonormal(raw.d_a, raw.d_b, raw.basis, raw.provenance)?;
        s.certified = raw.certified;
        s.index = raw.index;
        Ok(s)
    }
}

impl BipartiteSubspace {
    /// Wrap a basis that is already orthonormal (to [`ORTHONORMAL_TOL`]).
    pub fn from_orthonormal(d_a: usize, d_b: usize, basis: ComplexMatrix, provenance: Provenance) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::Dimension("local dimensions must be positive".into()));
        }
        let n = d_a * d_b;
        if basis.nrows() != n {
            return Err(Error::Dimension(format!(
                "basis has {} rows, expected {d_a}·{d_b} = {n}",
                basis.nrows()
            )));
        }
        if basis.ncols() > n {
            return Err(Error::Dimension(format!(
                "{} basis vectors exceed ambient {n}",
                basis.ncols()
            )));
        }
        if basis.ncols() > 0 {
            let defect = orthonormality_defect(&basis);
            if defect > ORTHONORMAL_TOL {
                return Err(Error::NotOrthonormal(defect));
            }
        }
        Ok(BipartiteSubspace {
            d_a,
            d_b,
            basis,
            provenance,
            certified: false,
            index: None,
        })
    }

    /// Orthonormalised column span of `vectors`.
    pub fn span(d_a: usize, d_b: usize, vectors: &ComplexMatrix, provenance: Provenance) -> Result<Self> {
        if vectors.nrows() != d_a * d_b {
            return Err(Error::Dimension(format!(
                "vectors have {} rows, expected {}",
                vectors.nrows(),
                d_a * d_b
            )));
        }
        let basis = column_space(vectors, RANK_TOL);
        BipartiteSubspace::from_orthonormal(d_a, d_b, basis, provenance)
    }

    pub fn full(d_a: usize, d_b: usize) -> Self {
        let n = d_a * d_b;
        BipartiteSubspace {
            d_a,
            d_b,
            basis: ComplexMatrix::identity(n, n),
            provenance: Provenance::Derived,
            certified: false,
            index: None,
        }
    }

    /// Haar-random subspace of the given dimension.
    pub fn random(d_a: usize, d_b: usize, dim: usize, seed: Seed) -> Result<Self> {
        check_ambient(d_a * d_b)?;
        let basis = haar_basis(d_a * d_b, dim, &mut seed.rng())?;
        BipartiteSubspace::from_orthonormal(d_a, d_b, basis, Provenance::Random)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn ambient(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn index(&self) -> Option<&StructureIndex> {
        self.index.as_ref()
    }

    /// The zero space or the whole space.
    pub fn is_degenerate(&self) -> bool {
        self.dim() == 0 || self.dim() == self.ambient()
    }

    pub fn with_certificate(mut self, certified: bool) -> Self {
        self.certified = certified;
        self
    }

    pub fn with_index(mut self, index: StructureIndex) -> Self {
        self.index = Some(index);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn projector(&self) -> ComplexMatrix {
        projector_from_basis(&self.basis)
    }

    /// Matrix views `M(b_i)` of the basis vectors.
    pub fn matrix_basis(&self) -> Vec<ComplexMatrix> {
        (0..self.dim())
            .map(|k| matrix_view(&self.basis.column(k).into_owned(), self.d_a, self.d_b))
            .collect()
    }

    /// `‖(I − Π)v‖` for a vector of the ambient space.
    pub fn distance(&self, v: &ComplexVector) -> f64 {
        let proj = &self.basis * (self.basis.adjoint() * v);
        (v - proj).norm()
    }

    /// `‖Π_self − Π_other‖_F`; zero iff the column spaces agree.
    pub fn distance_to(&self, other: &BipartiteSubspace) -> f64 {
        fro(&(self.projector() - other.projector()))
    }

    fn derived(&self, d_a: usize, d_b: usize, basis: ComplexMatrix) -> Self {
        BipartiteSubspace {
            d_a,
            d_b,
            basis,
            provenance: Provenance::Derived,
            certified: false,
            index: None,
        }
    }

    fn require_square(&self) -> Result<()> {
        if self.d_a != self.d_b {
            return Err(Error::UnequalDimensions {
                d_a: self.d_a,
                d_b: self.d_b,
            });
        }
        Ok(())
    }

    /// Orthogonal complement. The complement of the whole space is the zero
    /// space, which reports `is_degenerate()`.
    pub fn complement(&self) -> BipartiteSubspace {
        self.derived(self.d_a, self.d_b, complement_basis(&self.basis))
    }

    /// Swap the factors and conjugate: `M ↦ M†`.
    pub fn flip(&self) -> Result<BipartiteSubspace> {
        self.require_square()?;
        let d = self.d_a;
        let basis = ComplexMatrix::from_fn(self.ambient(), self.dim(), |r, c| {
            let (i, j) = (r / d, r % d);
            self.basis[(j * d + i, c)].conj()
        });
        Ok(self.derived(d, d, basis))
    }

    /// `(I ⊗ X)S` with `X` the antidiagonal permutation on the second factor.
    pub fn local_x(&self) -> BipartiteSubspace {
        let d_b = self.d_b;
        let basis = ComplexMatrix::from_fn(self.ambient(), self.dim(), |r, c| {
            let (i, j) = (r / d_b, r % d_b);
            self.basis[(i * d_b + (d_b - 1 - j), c)]
        });
        self.derived(self.d_a, self.d_b, basis)
    }

    /// `(X ⊗ I)S`.
    pub fn local_x_first(&self) -> BipartiteSubspace {
        let (d_a, d_b) = (self.d_a, self.d_b);
        let basis = ComplexMatrix::from_fn(self.ambient(), self.dim(), |r, c| {
            let (i, j) = (r / d_b, r % d_b);
            self.basis[((d_a - 1 - i) * d_b + j, c)]
        });
        self.derived(d_a, d_b, basis)
    }

    /// Entrywise complex conjugate: `M ↦ conj(M)`.
    pub fn conjugate(&self) -> BipartiteSubspace {
        self.derived(self.d_a, self.d_b, self.basis.map(|z| z.conj()))
    }

    /// `flip ∘ conjugate`: `M ↦ Mᵀ`.
    pub fn transpose_view(&self) -> Result<BipartiteSubspace> {
        self.conjugate().flip()
    }

    /// `(A ⊗ B)·S` followed by re-orthonormalisation.
    pub fn apply_local(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<BipartiteSubspace> {
        let op = crate::numerics::tensor_product(a, b)?;
        BipartiteSubspace::span(self.d_a, self.d_b, &(op * &self.basis), Provenance::Derived)
    }

    /// `S^{⊗k}` regrouped from `A₁B₁A₂B₂…` to `A₁A₂…:B₁B₂…`.
    pub fn tensor_power(&self, k: usize) -> Result<BipartiteSubspace> {
        if k == 0 {
            return Err(Error::InvalidArgument("tensor power must be at least 1".into()));
        }
        let n = self.ambient();
        let total = n.checked_pow(k as u32).ok_or(Error::AmbientOverflow {
            requested: usize::MAX,
            limit: crate::numerics::max_ambient(),
        })?;
        check_ambient(total)?;
        let mut basis = self.basis.clone();
        for _ in 1..k {
            basis = basis.kronecker(&self.basis);
        }
        let dims = vec![(self.d_a, self.d_b); k];
        let perm = regroup_permutation(&dims);
        let regrouped = ComplexMatrix::from_fn(total, basis.ncols(), |r, c| basis[(perm[r], c)]);
        let mut out = self.derived(self.d_a.pow(k as u32), self.d_b.pow(k as u32), regrouped);
        out.certified = self.certified;
        Ok(out)
    }

    /// Residual `‖Π_{X⊗X·S} − Π_S‖_F`.
    pub fn parity_residual(&self) -> f64 {
        self.local_x().local_x_first().distance_to(self)
    }
}

/// Row permutation taking `A₁B₁A₂B₂…` ordering to `A₁A₂…B₁B₂…`.
///
/// `perm[new] = old`: entry `new` of the regrouped vector is entry `perm[new]`
/// of the interleaved one. Factor pairs may have different dimensions.
pub fn regroup_permutation(dims: &[(usize, usize)]) -> Vec<usize> {
    let total: usize = dims.iter().map(|(a, b)| a * b).product();
    let da: Vec<usize> = dims.iter().map(|d| d.0).collect();
    let db: Vec<usize> = dims.iter().map(|d| d.1).collect();
    let mut perm = vec![0; total];
    let k = dims.len();
    let mut a_digits = vec![0usize; k];
    let mut b_digits = vec![0usize; k];
    for (new, slot) in perm.iter_mut().enumerate() {
        // Decode new = (a_1 … a_k, b_1 … b_k) in mixed radix, last digit fastest.
        let mut rest = new;
        for t in (0..k).rev() {
            b_digits[t] = rest % db[t];
            rest /= db[t];
        }
        for t in (0..k).rev() {
            a_digits[t] = rest % da[t];
            rest /= da[t];
        }
        let mut old = 0;
        for t in 0..k {
            old = old * da[t] + a_digits[t];
            old = old * db[t] + b_digits[t];
        }
        *slot = old;
    }
    perm
}

/// Antidiagonal `X` of the second factor's dimension.
pub fn local_x_matrix(d: usize) -> ComplexMatrix {
    antidiagonal(d)
}
