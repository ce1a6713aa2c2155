//! Signal states, the joint orthogonality checks and the `P₊⊗P₋` trace identity.

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiMatrix, LinearMap};
use crate::error::{Error, Result};
use crate::numerics::{
    antidiagonal, fro, gaussian_matrix, omega, parity_projectors, projector, tensor_product, trace, trace_product,
    ComplexMatrix, ComplexVector, Seed, C64,
};
use crate::sampler::ortho_residual;
use crate::subspace::BipartiteSubspace;

#[derive(Clone, Debug, PartialEq)]
pub struct SignalStates {
    pub phi0: ComplexVector,
    pub phi1: ComplexVector,
    pub phi_plus: ComplexVector,
    pub phi_minus: ComplexVector,
}

fn require_even_square(s: &BipartiteSubspace) -> Result<usize> {
    if s.d_a() != s.d_b() {
        return Err(Error::UnequalDimensions {
            d_a: s.d_a(),
            d_b: s.d_b(),
        });
    }
    if s.d_a() % 2 == 1 {
        return Err(Error::OddDimension(s.d_a()));
    }
    Ok(s.d_a())
}

/// `φ₀ = ω`, `φ₁ = (I⊗X)ω`, `φ± = (φ₀ ± φ₁)/√2`, all normalised.
pub fn signal_states(d_a: usize) -> Result<SignalStates> {
    if d_a == 0 || d_a % 2 == 1 {
        return Err(Error::OddDimension(d_a));
    }
    let phi0 = omega(d_a).normalize();
    let x = antidiagonal(d_a);
    let phi1 = tensor_product(&ComplexMatrix::identity(d_a, d_a), &x)? * &phi0;
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi_plus = (&phi0 + &phi1) * s;
    let phi_minus = (&phi0 - &phi1) * s;
    Ok(SignalStates {
        phi0,
        phi1,
        phi_plus,
        phi_minus,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointOrthogonality {
    pub classical_ok: bool,
    pub quantum_ok: bool,
    /// `‖Π_{conj S} · Π_{(I⊗X)·conj S₂}‖_F`: the supports of `σ₁ᵀ` and
    /// `(I⊗X)σ₂(I⊗X)`.
    pub classical_residual: f64,
    /// `‖Π_S·(I+X)⊗(I−X)·Π_{S⊥}‖_F`.
    pub quantum_residual: f64,
    pub degenerate: bool,
}

/// `S₂ = (I⊗X)·S⊥`, the support of `σ₂ᵀ`.
pub fn second_support(s: &BipartiteSubspace) -> BipartiteSubspace {
    s.complement().local_x()
}

pub fn joint_orthogonality(s: &BipartiteSubspace, tol: f64) -> Result<JointOrthogonality> {
    require_even_square(s)?;
    let s2 = second_support(s);
    let lhs = s.conjugate().projector();
    let rhs = s2.conjugate().local_x().projector();
    let classical_residual = fro(&(lhs * rhs));
    let quantum_residual = ortho_residual(s)?;
    Ok(JointOrthogonality {
        classical_ok: classical_residual <= tol,
        quantum_ok: quantum_residual <= tol,
        classical_residual,
        quantum_residual,
        degenerate: s.is_degenerate(),
    })
}

/// Choi matrices `σ₁` supported on `S` and `σ₂` with `σ₂ᵀ` supported on `S₂`,
/// each of trace `d_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiPair {
    pub sigma1: ChoiMatrix,
    pub sigma2: ChoiMatrix,
}

fn scaled_to_trace(m: ComplexMatrix, target: f64) -> ComplexMatrix {
    let t = trace(&m).re;
    m * C64::new(target / t, 0.0)
}

fn degenerate_error(s: &BipartiteSubspace) -> Error {
    Error::InvalidArgument(format!(
        "subspace of dimension {} in {}-dimensional space leaves one Choi support empty",
        s.dim(),
        s.ambient()
    ))
}

/// Normalised projectors: `σ₁ ∝ Π_S`, `σ₂ ∝ Π_{S₂}ᵀ`.
pub fn choi_pair_from_subspace(s: &BipartiteSubspace) -> Result<ChoiPair> {
    let d = require_even_square(s)?;
    if s.is_degenerate() {
        return Err(degenerate_error(s));
    }
    let s2 = second_support(s);
    Ok(ChoiPair {
        sigma1: ChoiMatrix::new(d, d, scaled_to_trace(s.projector(), d as f64))?,
        sigma2: ChoiMatrix::new(d, d, scaled_to_trace(s2.projector().transpose(), d as f64))?,
    })
}

/// Random full-rank PSD operators on the same supports.
pub fn random_choi_pair(s: &BipartiteSubspace, seed: Seed) -> Result<ChoiPair> {
    let d = require_even_square(s)?;
    if s.is_degenerate() {
        return Err(degenerate_error(s));
    }
    let s2 = second_support(s);
    let psd_on = |b: &ComplexMatrix, seed: Seed| {
        let g = gaussian_matrix(b.ncols(), b.ncols(), &mut seed.rng());
        let inner = &g * g.adjoint();
        scaled_to_trace(b * inner * b.adjoint(), d as f64)
    };
    Ok(ChoiPair {
        sigma1: ChoiMatrix::new(d, d, psd_on(s.basis(), seed.derive(0)))?,
        sigma2: ChoiMatrix::new(d, d, psd_on(s2.basis(), seed.derive(1)).transpose())?,
    })
}

/// `tr[(E₁⊗E₂)(φ₊)·(E₁⊗E₂)(φ₋)]` evaluated on the channel outputs.
pub fn output_overlap(e1: &LinearMap, e2: &LinearMap) -> Result<f64> {
    let states = signal_states(e1.d_in())?;
    let joint = e1.tensor(e2)?;
    let plus = joint.apply(&projector(&states.phi_plus));
    let minus = joint.apply(&projector(&states.phi_minus));
    Ok(trace_product(&plus, &minus).re)
}

/// `tr[(N₁⊗N₂)(φ₊)·φ₋]` for the maps whose Choi matrices are `σ₁`, `σ₂`.
pub fn plus_minus_overlap(pair: &ChoiPair) -> Result<f64> {
    let n1 = pair.sigma1.to_map(1e-12)?;
    let n2 = pair.sigma2.to_map(1e-12)?;
    let states = signal_states(pair.sigma1.d_in)?;
    let out = n1.tensor(&n2)?.apply(&projector(&states.phi_plus));
    Ok(trace_product(&out, &projector(&states.phi_minus)).re)
}

/// `(2/d_a)² · tr[[(P₊⊗P₋)σ₂(P₊⊗P₋)]ᵀ σ₁]`.
///
/// The prefactor is the normalisation of `φ±`.
pub fn choi_overlap(pair: &ChoiPair) -> Result<f64> {
    let d = pair.sigma1.d_in;
    let (pp, pm) = parity_projectors(d);
    let q = tensor_product(&pp, &pm)?;
    let inner = &q * &pair.sigma2.matrix * &q;
    let scale = (2.0 / d as f64).powi(2);
    Ok(scale * trace_product(&inner.transpose(), &pair.sigma1.matrix).re)
}
