//! Real embedding `C^n ≅ R^{2n}`, `x + iy ↦ (x; y)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::numerics::{
    antidiagonal, check_ambient, parity_projectors, tensor_product, ComplexMatrix, ComplexVector, C64,
};

/// Joint eigenspace label: support (`R = ran(P₊⊗P₋ + P₋⊗P₊)` or its
/// complement `W`), flip sign, and `X⊗X` sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub pair_support: bool,
    pub flip_plus: bool,
    pub xx_plus: bool,
}

/// Real-linear avatars of `i`, `F`, `X⊗X`, `P₊⊗P₋`, `P₋⊗P₊` and the
/// joint eigenspaces of the flip-even sector.
#[derive(Clone, Debug)]
pub struct RealEmbedding {
    pub d_a: usize,
    pub i: DMatrix<f64>,
    pub flip: DMatrix<f64>,
    pub xx: DMatrix<f64>,
    pub plus_minus: DMatrix<f64>,
    pub minus_plus: DMatrix<f64>,
    blocks: HashMap<Block, DMatrix<f64>>,
}

/// `A ↦ [[Re A, −Im A], [Im A, Re A]]`.
pub fn embed_operator(a: &ComplexMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let m = a.ncols();
    DMatrix::from_fn(2 * n, 2 * m, |r, c| {
        let z = a[(r % n, c % m)];
        match (r < n, c < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn embed_vector(v: &ComplexVector) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |r, _| if r < n { v[r].re } else { v[r - n].im })
}

/// Complex vectors `x + iy` from the columns `(x; y)`.
pub fn complexify(m: &DMatrix<f64>) -> ComplexMatrix {
    let n = m.nrows() / 2;
    ComplexMatrix::from_fn(n, m.ncols(), |r, c| C64::new(m[(r, c)], m[(r + n, c)]))
}

/// Orthonormal basis of the range of a symmetric projector.
fn range_of(p: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(p.clone());
    let cols: Vec<usize> = (0..p.nrows()).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    let mut out = DMatrix::zeros(p.nrows(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(k));
    }
    out
}

impl RealEmbedding {
    pub fn new(d_a: usize) -> Result<Self> {
        if d_a == 0 || d_a % 2 == 1 {
            return Err(Error::OddDimension(d_a));
        }
        let n = d_a * d_a;
        check_ambient(2 * n)?;
        let x = antidiagonal(d_a);
        let (pp, pm) = parity_projectors(d_a);
        let plus_minus = embed_operator(&tensor_product(&pp, &pm)?);
        let minus_plus = embed_operator(&tensor_product(&pm, &pp)?);
        let xx = embed_operator(&tensor_product(&x, &x)?);

        let mut i = DMatrix::zeros(2 * n, 2 * n);
        let mut flip = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..d_a {
            for b in 0..d_a {
                let (r, c) = (a * d_a + b, b * d_a + a);
                flip[(r, c)] = 1.0;
                flip[(n + r, n + c)] = -1.0;
            }
        }
        for k in 0..n {
            i[(k, n + k)] = -1.0;
            i[(n + k, k)] = 1.0;
        }

        let id = DMatrix::<f64>::identity(2 * n, 2 * n);
        let r_proj = &plus_minus + &minus_plus;
        let w_proj = &id - &r_proj;
        let f_plus = (&id + &flip) * 0.5;
        let f_minus = (&id - &flip) * 0.5;
        let xx_p = (&id + &xx) * 0.5;
        let xx_m = (&id - &xx) * 0.5;

        let mut blocks = HashMap::new();
        for pair_support in [true, false] {
            for flip_plus in [true, false] {
                for xx_plus in [true, false] {
                    let s = if pair_support { &r_proj } else { &w_proj };
                    let f = if flip_plus { &f_plus } else { &f_minus };
                    let p = if xx_plus { &xx_p } else { &xx_m };
                    let joint = s * f * p;
                    let sym = (&joint + joint.transpose()) * 0.5;
                    blocks.insert(
                        Block {
                            pair_support,
                            flip_plus,
                            xx_plus,
                        },
                        range_of(&sym),
                    );
                }
            }
        }
        Ok(RealEmbedding {
            d_a,
            i,
            flip,
            xx,
            plus_minus,
            minus_plus,
            blocks,
        })
    }

    /// Shared instance for `d_a`, built on first use.
    pub fn cached(d_a: usize) -> Result<Arc<RealEmbedding>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<RealEmbedding>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(e) = cache.lock().expect("cache poisoned").get(&d_a) {
            return Ok(Arc::clone(e));
        }
        let built = Arc::new(RealEmbedding::new(d_a)?);
        let mut guard = cache.lock().expect("cache poisoned");
        Ok(Arc::clone(guard.entry(d_a).or_insert(built)))
    }

    /// Orthonormal basis (columns in `R^{2n}`) of a joint eigenspace.
    pub fn block(&self, b: Block) -> &DMatrix<f64> {
        &self.blocks[&b]
    }

    /// Real dimension of a joint eigenspace.
    pub fn capacity(&self, b: Block) -> usize {
        self.blocks[&b].ncols()
    }

    /// Pair-support complex structure `J = i(P₊⊗P₋ − P₋⊗P₊)`, which commutes with
    /// the flip and squares to `−I` on the pair support.
    pub fn pair_structure(&self) -> DMatrix<f64> {
        &self.i * (&self.plus_minus - &self.minus_plus)
    }

    /// Real projector `Π` of a complex subspace: `BBᵀ + (iB)(iB)ᵀ` for the embedded basis `B`.
    pub fn embed_projector(&self, basis: &ComplexMatrix) -> DMatrix<f64> {
        let b = embed_operator(basis);
        // Columns of embed_operator are (B; Im-rotated B) = [B, iB] in real form.
        &b * b.transpose()
    }
}
