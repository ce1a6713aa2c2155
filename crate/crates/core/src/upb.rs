//! Unextendible product bases.
//!
//! Shipped families are the Tiles basis of `C³⊗C³` (five states) and the
//! computational product basis of any `C^{d_a}⊗C^{d_b}`, whose span is the
//! whole space. Tensor products of certified bases are certified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    antidiagonal, check_ambient, column_space, kron_vec, matrix_view, parity_projectors, vectorize, ComplexMatrix,
    ComplexVector, C64, ONE,
};
use crate::subspace::{BipartiteSubspace, Provenance, RANK_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    #[serde(with = "crate::json::vector")]
    pub a: ComplexVector,
    #[serde(with = "crate::json::vector")]
    pub b: ComplexVector,
}

impl ProductState {
    pub fn new(a: ComplexVector, b: ComplexVector) -> Self {
        ProductState {
            a: a.normalize(),
            b: b.normalize(),
        }
    }

    pub fn vector(&self) -> ComplexVector {
        kron_vec(&self.a, &self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUpb")]
pub struct Upb {
    d_a: usize,
    d_b: usize,
    states: Vec<ProductState>,
    #[serde(default)]
    certified: bool,
}

#[derive(Deserialize)]
struct RawUpb {
    d_a: usize,
    d_b: usize,
    states: Vec<ProductState>,
    #[serde(default)]
    certified: bool,
}

impl TryFrom<RawUpb> for Upb {
    type Error = Error;
    fn try_from(raw: RawUpb) -> Result<Self> {
        let u = Upb::new(raw.d_a, raw.d_b, raw.states)?;
        Ok(Upb {
            certified: raw.certified,
            ..u
        })
    }
}

/// Tolerance for unit norms and mutual orthogonality of listed states.
pub const STATE_TOL: f64 = 1e-10;

impl Upb {
    /// An uncertified set of mutually orthogonal unit product states.
    pub fn new(d_a: usize, d_b: usize, states: Vec<ProductState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument(
                "a product basis needs at least one state".into(),
            ));
        }
        for (k, s) in states.iter().enumerate() {
            if s.a.len() != d_a || s.b.len() != d_b {
                return Err(Error::Dimension(format!(
                    "state {k} has factors of length {} and {}, expected {d_a} and {d_b}",
                    s.a.len(),
                    s.b.len()
                )));
            }
            let dev = (s.a.norm() - 1.0).abs().max((s.b.norm() - 1.0).abs());
            if dev > STATE_TOL {
                return Err(Error::NotOrthonormal(dev));
            }
        }
        for (i, s) in states.iter().enumerate() {
            for t in &states[i + 1..] {
                let overlap = s.a.dotc(&t.a) * s.b.dotc(&t.b);
                if overlap.norm() > STATE_TOL {
                    return Err(Error::NotOrthonormal(overlap.norm()));
                }
            }
        }
        Ok(Upb {
            d_a,
            d_b,
            states,
            certified: false,
        })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn states(&self) -> &[ProductState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// `(d_a·d_b) × len` matrix of the product vectors.
    pub fn vectors(&self) -> ComplexMatrix {
        let cols: Vec<ComplexVector> = self.states.iter().map(ProductState::vector).collect();
        ComplexMatrix::from_columns(&cols)
    }
}

fn real(v: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

/// The Tiles UPB of `C³⊗C³`.
pub fn tiles_upb() -> Upb {
    let pairs = [
        ([1.0, 0.0, 0.0], [1.0, -1.0, 0.0]),
        ([1.0, -1.0, 0.0], [0.0, 0.0, 1.0]),
        ([0.0, 0.0, 1.0], [0.0, 1.0, -1.0]),
        ([0.0, 1.0, -1.0], [1.0, 0.0, 0.0]),
        ([1.0, 1.0, 1.0], [1.0, 1.0, 1.0]),
    ];
    let states = pairs.iter().map(|(a, b)| ProductState::new(real(a), real(b))).collect();
    Upb {
        d_a: 3,
        d_b: 3,
        states,
        certified: true,
    }
}

/// The computational basis `{|i⟩|j⟩}`; its span is the whole space.
pub fn full_product_basis(d_a: usize, d_b: usize) -> Result<Upb> {
    if d_a == 0 || d_b == 0 {
        return Err(Error::Dimension("local dimensions must be positive".into()));
    }
    check_ambient(d_a * d_b)?;
    let ket = |d: usize, i: usize| {
        let mut v = ComplexVector::zeros(d);
        v[i] = ONE;
        v
    };
    let states = (0..d_a)
        .flat_map(|i| (0..d_b).map(move |j| (i, j)))
        .map(|(i, j)| ProductState::new(ket(d_a, i), ket(d_b, j)))
        .collect();
    Ok(Upb {
        d_a,
        d_b,
        states,
        certified: true,
    })
}

/// All products `ψ_i ⊗ φ_j` regrouped to `(A₁A₂ : B₁B₂)`: the factors become
/// `a_i ⊗ a_j` and `b_i ⊗ b_j`.
pub fn product_upb(u1: &Upb, u2: &Upb) -> Result<Upb> {
    let d_a = u1.d_a * u2.d_a;
    let d_b = u1.d_b * u2.d_b;
    check_ambient(d_a * d_b)?;
    let mut states = Vec::with_capacity(u1.len() * u2.len());
    for s in &u1.states {
        for t in &u2.states {
            states.push(ProductState {
                a: kron_vec(&s.a, &t.a),
                b: kron_vec(&s.b, &t.b),
            });
        }
    }
    Ok(Upb {
        d_a,
        d_b,
        states,
        certified: u1.certified && u2.certified,
    })
}

/// Orthonormalised span, carrying the certificate flag.
pub fn upb_span(u: &Upb) -> Result<BipartiteSubspace> {
    Ok(BipartiteSubspace::span(u.d_a, u.d_b, &u.vectors(), Provenance::UpbSpan)?.with_certificate(u.certified))
}

/// Span of the twelve-term family
/// `{M, XMX, M†, XM†X}` together with `P₊(·)P₋` and `P₋(·)P₊` of each.
///
/// The result contains `S`, is closed under `M ↦ M†`, `M ↦ XMX` and
/// `M ↦ P±MP∓`, and keeps any certificate of `S`.
pub fn symmetrize(s: &BipartiteSubspace) -> Result<BipartiteSubspace> {
    if s.d_a() != s.d_b() {
        return Err(Error::UnequalDimensions {
            d_a: s.d_a(),
            d_b: s.d_b(),
        });
    }
    let d = s.d_a();
    if d % 2 == 1 {
        return Err(Error::OddDimension(d));
    }
    let x = antidiagonal(d);
    let (pp, pm) = parity_projectors(d);
    let mut family = Vec::with_capacity(12 * s.dim());
    for k in 0..s.dim() {
        let m = matrix_view(&s.basis().column(k).into_owned(), d, d);
        let md = m.adjoint();
        let base = [&x * &m * &x, &x * &md * &x, m, md];
        for t in &base {
            family.push(vectorize(t));
            family.push(vectorize(&(&pp * t * &pm)));
            family.push(vectorize(&(&pm * t * &pp)));
        }
    }
    let gen = ComplexMatrix::from_columns(&family);
    let basis = column_space(&gen, RANK_TOL);
    Ok(BipartiteSubspace::from_orthonormal(d, d, basis, Provenance::Symmetrized)?.with_certificate(s.certified()))
}
