//! Seesaw search for product states inside (or orthogonal to) a subspace.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BipartiteSubspace;
use crate::error::Result;
use crate::numerics::{eigh, gaussian_matrix, kron_vec, ComplexMatrix, ComplexVector, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Product state lying in `S`.
    Inside,
    /// Product state orthogonal to `S`.
    OrthogonalTo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub restarts: usize,
    pub iters: usize,
    pub tol: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            restarts: 100,
            iters: 500,
            tol: 1e-8,
        }
    }
}

/// A unit product state `a ⊗ b` with its distance from the target.
///
/// `residual` is `‖(I − Π_S)(a⊗b)‖²` for [`SearchMode::Inside`] and
/// `‖Π_S(a⊗b)‖²` for [`SearchMode::OrthogonalTo`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductStateWitness {
    #[serde(with = "crate::json::vector")]
    pub a: ComplexVector,
    #[serde(with = "crate::json::vector")]
    pub b: ComplexVector,
    pub mode: SearchMode,
    pub residual: f64,
}

impl ProductStateWitness {
    pub fn state(&self) -> ComplexVector {
        kron_vec(&self.a, &self.b)
    }

    /// Residual recomputed against `s` from the stored factors.
    pub fn evaluate(&self, s: &BipartiteSubspace) -> f64 {
        product_residual(s, self.mode, &self.a, &self.b)
    }
}

/// Outcome of a search. `found` is set iff `best.residual ≤ tol`; otherwise
/// `best` is the closest candidate seen, which is evidence and not a proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSearch {
    pub found: bool,
    pub restarts_run: usize,
    pub best: Option<ProductStateWitness>,
}

impl ProductSearch {
    pub fn witness(&self) -> Option<&ProductStateWitness> {
        if self.found {
            self.best.as_ref()
        } else {
            None
        }
    }

    pub fn best_residual(&self) -> f64 {
        self.best.as_ref().map_or(1.0, |w| w.residual)
    }
}

fn product_residual(s: &BipartiteSubspace, mode: SearchMode, a: &ComplexVector, b: &ComplexVector) -> f64 {
    let x = kron_vec(&a.normalize(), &b.normalize());
    match mode {
        SearchMode::Inside => s.distance(&x).powi(2),
        SearchMode::OrthogonalTo => (s.basis().adjoint() * x).norm_squared(),
    }
}

/// Basis vectors of `S` reshaped and conjugated: `C_v = conj(M(v))`, so that
/// `⟨v|a⊗b⟩ = aᵀ C_v b`. The objective `‖Π_S(a⊗b)‖²` is maximised when
/// looking inside `S` and minimised when looking orthogonal to it.
struct Target {
    d_a: usize,
    d_b: usize,
    minimize: bool,
    conj_views: Vec<ComplexMatrix>,
}

impl Target {
    fn new(basis: &ComplexMatrix, d_a: usize, d_b: usize, minimize: bool) -> Self {
        let conj_views = (0..basis.ncols())
            .map(|k| ComplexMatrix::from_fn(d_a, d_b, |i, j| basis[(i * d_b + j, k)].conj()))
            .collect();
        Target {
            d_a,
            d_b,
            minimize,
            conj_views,
        }
    }

    /// `Σ_v |⟨v|a⊗b⟩|²`.
    fn objective(&self, a: &ComplexVector, b: &ComplexVector) -> f64 {
        self.conj_views
            .iter()
            .map(|c| (a.transpose() * c * b)[(0, 0)].norm_sqr())
            .sum()
    }

    /// Optimal `b` for fixed `a`: extremal eigenvector of `Σ_v conj(c_v) c_vᵀ`, `c_v = C_vᵀ a`.
    fn best_b(&self, a: &ComplexVector) -> ComplexVector {
        let mut k = ComplexMatrix::zeros(self.d_b, self.d_b);
        for c in &self.conj_views {
            let cv = c.transpose() * a;
            k += cv.conjugate() * cv.transpose();
        }
        self.extremal(&k)
    }

    /// Optimal `a` for fixed `b`: extremal eigenvector of `Σ_v conj(e_v) e_vᵀ`, `e_v = C_v b`.
    fn best_a(&self, b: &ComplexVector) -> ComplexVector {
        let mut k = ComplexMatrix::zeros(self.d_a, self.d_a);
        for c in &self.conj_views {
            let ev = c * b;
            k += ev.conjugate() * ev.transpose();
        }
        self.extremal(&k)
    }

    fn extremal(&self, k: &ComplexMatrix) -> ComplexVector {
        let (_, vectors) = eigh(k);
        let col = if self.minimize { 0 } else { k.nrows() - 1 };
        vectors.column(col).into_owned()
    }

    /// Objective oriented so that larger is better.
    fn score(&self, f: f64) -> f64 {
        if self.minimize {
            -f
        } else {
            f
        }
    }

    fn run(&self, a0: ComplexVector, b0: ComplexVector, iters: usize, good_enough: f64) -> Run {
        let mut a = a0.normalize();
        let mut b = b0.normalize();
        let mut history = vec![self.objective(&a, &b)];
        for _ in 0..iters {
            b = self.best_b(&a);
            a = self.best_a(&b);
            let f = self.objective(&a, &b);
            let prev = *history.last().expect("history starts non-empty");
            history.push(f);
            if self.score(f) >= good_enough || self.score(f) - self.score(prev) <= 1e-15 {
                break;
            }
        }
        Run { a, b, history }
    }
}

struct Run {
    a: ComplexVector,
    b: ComplexVector,
    history: Vec<f64>,
}

fn random_unit(n: usize, rng: &mut impl rand::Rng) -> ComplexVector {
    gaussian_matrix(n, 1, rng).column(0).into_owned().normalize()
}

/// Objective values `‖Π_T(a⊗b)‖²` of a single seesaw restart, where `T` is
/// `S` itself; the sequence is non-decreasing.
pub fn seesaw_trace(s: &BipartiteSubspace, iters: usize, seed: Seed) -> Vec<f64> {
    let target = Target::new(s.basis(), s.d_a(), s.d_b(), false);
    let mut rng = seed.rng();
    let a0 = random_unit(s.d_a(), &mut rng);
    let b0 = random_unit(s.d_b(), &mut rng);
    target.run(a0, b0, iters, f64::INFINITY).history
}

const CHUNK: usize = 32;

/// Seesaw search with independent restarts.
///
/// Restart `i` draws its start from `seed.derive(i)`. Restarts run in
/// parallel in fixed chunks; the search stops after the first chunk that
/// contains a witness, and ties are broken by the lowest restart index, so
/// the result does not depend on thread scheduling.
pub fn find_product_state(s: &BipartiteSubspace, mode: SearchMode, params: &SearchParams, seed: Seed) -> ProductSearch {
    let empty_target = match mode {
        SearchMode::Inside => s.dim() == 0,
        SearchMode::OrthogonalTo => s.dim() == s.ambient(),
    };
    if empty_target {
        return ProductSearch {
            found: false,
            restarts_run: 0,
            best: None,
        };
    }
    let minimize = mode == SearchMode::OrthogonalTo;
    let target = Target::new(s.basis(), s.d_a(), s.d_b(), minimize);
    let good_enough = if minimize {
        -params.tol * 1e-3
    } else {
        1.0 - params.tol * 1e-3
    };

    let mut best: Option<(usize, ProductStateWitness)> = None;
    let mut run = 0;
    while run < params.restarts {
        let end = (run + CHUNK).min(params.restarts);
        let results: Vec<(usize, ProductStateWitness)> = (run..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed.derive(i as u64).rng();
                let a0 = random_unit(s.d_a(), &mut rng);
                let b0 = random_unit(s.d_b(), &mut rng);
                let r = target.run(a0, b0, params.iters, good_enough);
                let residual = product_residual(s, mode, &r.a, &r.b);
                (
                    i,
                    ProductStateWitness {
                        a: r.a,
                        b: r.b,
                        mode,
                        residual,
                    },
                )
            })
            .collect();
        for (i, w) in results {
            let better = match &best {
                None => true,
                Some((j, cur)) => w.residual < cur.residual || (w.residual == cur.residual && i < *j),
            };
            if better {
                best = Some((i, w));
            }
        }
        run = end;
        if best.as_ref().is_some_and(|(_, w)| w.residual <= params.tol) {
            break;
        }
    }
    let best = best.map(|(_, w)| w);
    ProductSearch {
        found: best.as_ref().is_some_and(|w| w.residual <= params.tol),
        restarts_run: run,
        best,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Unextendibility {
    /// `(S^{⊗k})⊥` is the zero space or a certified UPB span is contained in `S`.
    Certified,
    /// No product state found in `(S^{⊗k})⊥`; heuristic. `best` is the
    /// candidate closest to orthogonal.
    HoldsUpToK {
        best: Option<ProductStateWitness>,
        restarts: usize,
    },
    /// A product state orthogonal to `S^{⊗k}`.
    Fails { witness: ProductStateWitness },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KUnextendibility {
    pub k: usize,
    #[serde(flatten)]
    pub verdict: Unextendibility,
}

/// k-unextendibility of `s`, short-circuiting on a UPB certificate.
pub fn k_unextendible(s: &BipartiteSubspace, k: usize, params: &SearchParams, seed: Seed) -> Result<KUnextendibility> {
    if s.certified() {
        return Ok(KUnextendibility {
            k,
            verdict: Unextendibility::Certified,
        });
    }
    search_k_unextendible(s, k, params, seed)
}

/// k-unextendibility decided by search alone, ignoring any certificate.
pub fn search_k_unextendible(
    s: &BipartiteSubspace,
    k: usize,
    params: &SearchParams,
    seed: Seed,
) -> Result<KUnextendibility> {
    let power = if k == 1 { s.clone() } else { s.tensor_power(k)? };
    if power.dim() == power.ambient() {
        return Ok(KUnextendibility {
            k,
            verdict: Unextendibility::Certified,
        });
    }
    let result = find_product_state(&power, SearchMode::OrthogonalTo, params, seed);
    let verdict = match result.witness() {
        Some(w) => Unextendibility::Fails { witness: w.clone() },
        None => Unextendibility::HoldsUpToK {
            best: result.best.clone(),
            restarts: result.restarts_run,
        },
    };
    Ok(KUnextendibility { k, verdict })
}
