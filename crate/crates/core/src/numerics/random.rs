use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Seed for every random object in the crate.
///
/// A seed owns a ChaCha20 stream. Independent sub-streams (per restart, per
/// trial, per block) come from [`Seed::derive`], so parallel callers never
/// share generator state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.0)
    }

    /// Child seed for sub-stream `stream` (SplitMix64 finaliser).
    pub fn derive(self, stream: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(stream.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Standard complex Gaussian entries, `E|z|² = 1`.
pub fn gaussian_matrix<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

pub fn real_gaussian_matrix<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Orthonormal basis of a Haar-random `rank`-dimensional subspace of `C^ambient`.
pub fn haar_basis<R: rand::Rng + ?Sized>(ambient: usize, rank: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if rank > ambient {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} exceeds ambient dimension {ambient}"
        )));
    }
    if rank == 0 {
        return Ok(ComplexMatrix::zeros(ambient, 0));
    }
    let g = gaussian_matrix(ambient, rank, rng);
    Ok(g.qr().q())
}

/// Orthonormal basis of a uniformly random `rank`-dimensional subspace of `R^ambient`.
pub fn real_haar_basis<R: rand::Rng + ?Sized>(ambient: usize, rank: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if rank > ambient {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} exceeds ambient dimension {ambient}"
        )));
    }
    if rank == 0 {
        return Ok(DMatrix::zeros(ambient, 0));
    }
    Ok(real_gaussian_matrix(ambient, rank, rng).qr().q())
}

/// Haar-random unitary (QR of a Gaussian matrix with the phases of `R` removed).
pub fn haar_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Projector onto a Haar-random subspace of the given rank.
pub fn haar_projector(ambient: usize, rank: usize, seed: Seed) -> Result<ComplexMatrix> {
    if rank > ambient {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} out of range 0..={ambient}"
        )));
    }
    if rank == ambient {
        return Ok(ComplexMatrix::identity(ambient, ambient));
    }
    let b = haar_basis(ambient, rank, &mut seed.rng())?;
    Ok(&b * b.adjoint())
}
