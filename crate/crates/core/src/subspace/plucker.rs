use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::BipartiteSubspace;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64, ONE, ZERO};

pub const DEFAULT_PLUCKER_LIMIT: u64 = 1_000_000;

/// Coordinates below this fraction of the largest one are treated as zero
/// when choosing the normalising coordinate.
const ZERO_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PluckerCoordinates {
    pub dim: usize,
    pub ambient: usize,
    pub coords: Vec<C64>,
}

impl PluckerCoordinates {
    /// Row subsets in the order of `coords`.
    pub fn subsets(&self) -> impl Iterator<Item = Vec<usize>> {
        (0..self.ambient).combinations(self.dim)
    }

    /// Coordinate of a sorted subset.
    pub fn get(&self, subset: &[usize]) -> Option<C64> {
        self.subsets().position(|s| s == subset).map(|k| self.coords[k])
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k) as u64;
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n as u64 - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Determinant by LU with partial pivoting.
fn determinant(mut m: ComplexMatrix) -> C64 {
    let n = m.nrows();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[(a, col)].norm().total_cmp(&m[(b, col)].norm()))
            .expect("non-empty range");
        if m[(pivot, col)] == ZERO {
            return ZERO;
        }
        if pivot != col {
            m.swap_rows(pivot, col);
            det = -det;
        }
        let p = m[(col, col)];
        det *= p;
        for r in col + 1..n {
            let f = m[(r, col)] / p;
            if f != ZERO {
                for c in col..n {
                    let v = m[(col, c)];
                    m[(r, c)] -= f * v;
                }
            }
        }
    }
    det
}

/// Plücker coordinates of `s`: the `dim × dim` minors of the basis over
/// lexicographically ordered row subsets, scaled so that the first
/// non-negligible coordinate equals 1.
pub fn plucker(s: &BipartiteSubspace, limit: u64) -> Result<PluckerCoordinates> {
    let (n, d) = s.basis().shape();
    if d == 0 {
        return Err(Error::Dimension("the zero space has no Plücker coordinates".into()));
    }
    let count = binomial(n, d);
    if count > limit {
        return Err(Error::LimitExceeded(format!(
            "{count} Plücker coordinates exceed the limit of {limit}"
        )));
    }
    let basis = s.basis();
    let mut coords: Vec<C64> = (0..n)
        .combinations(d)
        .map(|rows| determinant(basis.select_rows(rows.iter())))
        .collect();
    let max = coords.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let pivot = coords
        .iter()
        .find(|z| z.norm() > ZERO_REL * max)
        .copied()
        .expect("an orthonormal basis has a non-zero maximal minor");
    for z in &mut coords {
        *z /= pivot;
    }
    Ok(PluckerCoordinates {
        dim: d,
        ambient: n,
        coords,
    })
}
