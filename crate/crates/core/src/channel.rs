//! Completely positive maps in Kraus form.
//!
//! [`LinearMap`] is any CP map `ρ ↦ Σ_k A_k ρ A_k†`; [`Channel`] additionally
//! carries the trace-preservation invariant `Σ_k A_k†A_k = I`. Choi matrices
//! use the unnormalised convention `σ = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, input factor
//! first, so `tr σ = d_in` for a channel.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    column_space, eigh, fro, gaussian_matrix, hermitian_deviation, partial_trace, pinv_sqrt, tensor_product, trace,
    trace_product, ComplexMatrix, ComplexVector, Subsystem, C64, ONE, ZERO,
};

/// Trace-preservation tolerance for [`Channel`].
pub const TP_TOL: f64 = 1e-8;

/// Default tolerance for "zero" overlaps between unit-trace outputs.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// A completely positive map given by Kraus operators, each `d_out × d_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMap")]
pub struct LinearMap {
    d_in: usize,
    d_out: usize,
    #[serde(with = "crate::json::matrix_list")]
    kraus: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct RawMap {
    d_in: usize,
    d_out: usize,
    #[serde(with = "crate::json::matrix_list")]
    kraus: Vec<ComplexMatrix>,
}

impl TryFrom<RawMap> for LinearMap {
    type Error = Error;
    fn try_from(raw: RawMap) -> Result<Self> {
        LinearMap::new(raw.d_in, raw.d_out, raw.kraus)
    }
}

impl LinearMap {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::Dimension("map dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("Kraus list is empty".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::Dimension(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        Ok(LinearMap { d_in, d_out, kraus })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for a in &self.kraus {
            out += a * rho * a.adjoint();
        }
        out
    }

    /// `Σ_k A_k†A_k`.
    pub fn effect(&self) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, a| {
                acc + a.adjoint() * a
            })
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        fro(&(self.effect() - ComplexMatrix::identity(self.d_in, self.d_in)))
    }

    pub fn choi(&self) -> ChoiMatrix {
        let n = self.d_in * self.d_out;
        let mut m = ComplexMatrix::zeros(n, n);
        for a in &self.kraus {
            let v = choi_vector(a);
            m += &v * v.adjoint();
        }
        ChoiMatrix {
            d_in: self.d_in,
            d_out: self.d_out,
            matrix: m,
        }
    }

    /// Hilbert–Schmidt dual: Kraus operators `A_k†`.
    pub fn adjoint(&self) -> LinearMap {
        LinearMap {
            d_in: self.d_out,
            d_out: self.d_in,
            kraus: self.kraus.iter().map(|a| a.adjoint()).collect(),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &LinearMap) -> Result<LinearMap> {
        if first.d_out != self.d_in {
            return Err(Error::Dimension(format!(
                "cannot compose {}→{} after {}→{}",
                self.d_in, self.d_out, first.d_in, first.d_out
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for b in &self.kraus {
            for a in &first.kraus {
                kraus.push(b * a);
            }
        }
        LinearMap::new(first.d_in, self.d_out, kraus)
    }

    /// `N = E* ∘ E` with Kraus set `{A_j†A_k}`.
    pub fn compose_self_adjoint(&self) -> LinearMap {
        let mut kraus = Vec::with_capacity(self.kraus.len() * self.kraus.len());
        for aj in &self.kraus {
            let ajd = aj.adjoint();
            for ak in &self.kraus {
                kraus.push(&ajd * ak);
            }
        }
        LinearMap {
            d_in: self.d_in,
            d_out: self.d_in,
            kraus,
        }
    }

    /// `self ⊗ other` acting on the joint input `C^{d_in} ⊗ C^{other.d_in}`.
    pub fn tensor(&self, other: &LinearMap) -> Result<LinearMap> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(tensor_product(a, b)?);
            }
        }
        LinearMap::new(self.d_in * other.d_in, self.d_out * other.d_out, kraus)
    }
}

/// `vec(A) = Σ_i |i⟩ ⊗ A|i⟩`, entry `i·d_out + j = A[j, i]`.
fn choi_vector(a: &ComplexMatrix) -> ComplexVector {
    let (d_out, d_in) = a.shape();
    ComplexVector::from_fn(d_in * d_out, |k, _| a[(k % d_out, k / d_out)])
}

/// A trace-preserving [`LinearMap`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinearMap", into = "LinearMap")]
pub struct Channel(LinearMap);

impl TryFrom<LinearMap> for Channel {
    type Error = Error;
    fn try_from(map: LinearMap) -> Result<Self> {
        let defect = map.trace_preservation_defect();
        if defect > TP_TOL {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(Channel(map))
    }
}

impl From<Channel> for LinearMap {
    fn from(c: Channel) -> Self {
        c.0
    }
}

impl Deref for Channel {
    type Target = LinearMap;
    fn deref(&self) -> &LinearMap {
        &self.0
    }
}

impl Channel {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Channel::try_from(LinearMap::new(d_in, d_out, kraus)?)
    }

    pub fn as_map(&self) -> &LinearMap {
        &self.0
    }

    pub fn identity(d: usize) -> Self {
        Channel(LinearMap {
            d_in: d,
            d_out: d,
            kraus: vec![ComplexMatrix::identity(d, d)],
        })
    }

    /// `ρ ↦ VρV†` for an isometry `V` (`V†V = I`).
    pub fn isometric(v: ComplexMatrix) -> Result<Self> {
        let (d_out, d_in) = v.shape();
        Channel::new(d_in, d_out, vec![v])
    }

    /// `ρ ↦ tr(ρ)·I/d`.
    pub fn fully_depolarizing(d: usize) -> Self {
        let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = ComplexMatrix::zeros(d, d);
                k[(i, j)] = s;
                kraus.push(k);
            }
        }
        Channel(LinearMap {
            d_in: d,
            d_out: d,
            kraus,
        })
    }

    /// Complete dephasing in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut k = ComplexMatrix::zeros(d, d);
                k[(i, i)] = ONE;
                k
            })
            .collect();
        Channel(LinearMap {
            d_in: d,
            d_out: d,
            kraus,
        })
    }

    /// Random channel from a Haar-random Stinespring isometry `C^{d_in} → C^{d_out}⊗C^{n_kraus}`.
    pub fn random<R: rand::Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> Result<Self> {
        if d_out * n_kraus < d_in {
            return Err(Error::InvalidArgument(format!(
                "{n_kraus} Kraus operators of size {d_out}x{d_in} cannot be trace preserving"
            )));
        }
        let v = gaussian_matrix(d_out * n_kraus, d_in, rng).qr().q();
        let kraus = (0..n_kraus).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
        Channel::new(d_in, d_out, kraus)
    }
}

/// Choi–Jamiołkowski matrix of a map `C^{d_in} → C^{d_out}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub d_in: usize,
    pub d_out: usize,
    #[serde(with = "crate::json::matrix")]
    pub matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        let n = d_in * d_out;
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ChoiMatrix { d_in, d_out, matrix })
    }

    /// `E(ρ) = tr_A[σ · (ρᵀ ⊗ I)]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let lifted = tensor_product(&rho.transpose(), &ComplexMatrix::identity(self.d_out, self.d_out))?;
        partial_trace(&(&self.matrix * lifted), (self.d_in, self.d_out), Subsystem::A)
    }

    /// Kraus form from the spectral decomposition, one operator per eigenvalue
    /// above `tol · max(λ_max, 1)`, ordered by descending eigenvalue.
    ///
    /// Each eigenvector is phase-fixed so its first non-negligible component is
    /// real and positive.
    pub fn to_map(&self, tol: f64) -> Result<LinearMap> {
        let dev = hermitian_deviation(&self.matrix);
        if dev > tol.max(1e-10) {
            return Err(Error::NotHermitian(dev));
        }
        let (values, vectors) = eigh(&self.matrix);
        let lmax = values.last().copied().unwrap_or(0.0);
        let cutoff = tol * lmax.max(1.0);
        if values[0] < -cutoff {
            return Err(Error::NotPsd(values[0]));
        }
        let mut kraus = Vec::new();
        for k in (0..values.len()).rev() {
            let lambda = values[k];
            if lambda <= cutoff {
                break;
            }
            let mut v = vectors.column(k).into_owned();
            let vmax = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            if let Some(lead) = v.iter().find(|z| z.norm() > 1e-8 * vmax).copied() {
                v *= lead.conj() / lead.norm();
            }
            let s = lambda.sqrt();
            kraus.push(ComplexMatrix::from_fn(self.d_out, self.d_in, |j, i| {
                v[i * self.d_out + j] * s
            }));
        }
        if kraus.is_empty() {
            // Zero map: keep a single zero operator so the Kraus list is nonempty.
            kraus.push(ComplexMatrix::zeros(self.d_out, self.d_in));
        }
        LinearMap::new(self.d_in, self.d_out, kraus)
    }
}

/// Recovery map for the code `span{s0, s1}`:
/// `R(ρ) = Σ_k √φ A_k† E(φ)^{-1/2} ρ E(φ)^{-1/2} A_k √φ + (kernel term)`
/// with `φ = (|s0⟩⟨s0| + |s1⟩⟨s1|)/2`.
///
/// The kernel term sends the weight `tr(Πρ)` on the kernel `Π` of `E(φ)` to
/// `|s0⟩⟨s0|`, which keeps `R` trace preserving with input and output spaces
/// matching `E`'s output and input.
pub fn recovery_map(ch: &Channel, s0: &ComplexVector, s1: &ComplexVector, tol: f64) -> Result<Channel> {
    check_orthonormal_pair(ch.d_in(), s0, s1, tol)?;
    let code = s0 * s0.adjoint() + s1 * s1.adjoint();
    let phi = &code * C64::new(0.5, 0.0);
    let sqrt_phi = &code * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let e_phi = ch.apply(&phi);
    let ps = pinv_sqrt(&e_phi, tol)?;

    let mut kraus: Vec<ComplexMatrix> = ch
        .kraus()
        .iter()
        .map(|a| &sqrt_phi * a.adjoint() * &ps.inv_sqrt)
        .collect();
    let kernel = column_space(&ps.kernel_projector, 1e-8);
    for j in 0..kernel.ncols() {
        kraus.push(s0 * kernel.column(j).adjoint());
    }
    Channel::new(ch.d_out(), ch.d_in(), kraus)
}

fn check_orthonormal_pair(d: usize, s0: &ComplexVector, s1: &ComplexVector, tol: f64) -> Result<()> {
    if s0.len() != d || s1.len() != d {
        return Err(Error::Dimension(format!(
            "signal states must live in C^{d} (got {} and {})",
            s0.len(),
            s1.len()
        )));
    }
    let defect = (s0.norm() - 1.0)
        .abs()
        .max((s1.norm() - 1.0).abs())
        .max(s0.dotc(s1).norm());
    if defect > tol {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(())
}

/// Outcome of the two-overlap test for `Q₀ ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Q0Witness {
    pub holds: bool,
    /// `tr[E(s0)E(s1)]` on unit-trace outputs.
    pub overlap_01: f64,
    /// `tr[E(s+)E(s−)]` on unit-trace outputs.
    pub overlap_pm: f64,
    /// Largest deviation of `R∘E` from the identity on `span{s0, s1}`, when checked.
    pub recovery_deviation: Option<f64>,
}

/// The four code projectors `|s0⟩⟨s0|, |s1⟩⟨s1|, |s+⟩⟨s+|, |s−⟩⟨s−|`.
pub fn code_projectors(s0: &ComplexVector, s1: &ComplexVector) -> [ComplexMatrix; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let plus = (s0 + s1) * h;
    let minus = (s0 - s1) * h;
    [
        s0 * s0.adjoint(),
        s1 * s1.adjoint(),
        &plus * plus.adjoint(),
        &minus * minus.adjoint(),
    ]
}

fn unit_trace_overlap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let ta = trace(a).re;
    let tb = trace(b).re;
    if ta <= 0.0 || tb <= 0.0 {
        return 0.0;
    }
    trace_product(a, b).re / (ta * tb)
}

/// Tests `tr[E(s0)E(s1)] ≤ tol` and `tr[E(s+)E(s−)] ≤ tol`; when both hold,
/// also builds the recovery map and measures how far `R∘E` is from the
/// identity on the code space.
pub fn q0_witness(ch: &Channel, s0: &ComplexVector, s1: &ComplexVector, tol: f64) -> Result<Q0Witness> {
    check_orthonormal_pair(ch.d_in(), s0, s1, 1e-8)?;
    let [p0, p1, pp, pm] = code_projectors(s0, s1);
    let overlap_01 = unit_trace_overlap(&ch.apply(&p0), &ch.apply(&p1));
    let overlap_pm = unit_trace_overlap(&ch.apply(&pp), &ch.apply(&pm));
    let holds = overlap_01 <= tol && overlap_pm <= tol;
    let recovery_deviation = if holds {
        let r = recovery_map(ch, s0, s1, ORTHOGONALITY_TOL)?;
        let m = r.after(ch)?;
        let coherences = [s0 * s1.adjoint(), s1 * s0.adjoint()];
        let dev = [p0, p1, pp, pm]
            .iter()
            .chain(coherences.iter())
            .map(|x| fro(&(m.apply(x) - x)))
            .fold(0.0_f64, f64::max);
        Some(dev)
    } else {
        None
    };
    Ok(Q0Witness {
        holds,
        overlap_01,
        overlap_pm,
        recovery_deviation,
    })
}

/// Coefficients of `M(ρ) = p_I ρ + p_X XρX + p_Y YρY + p_Z ZρZ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliMixture {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    /// Frobenius residual of the least-squares fit over the matrix units.
    pub residual: f64,
}

pub fn paulis() -> [ComplexMatrix; 4] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        ComplexMatrix::identity(2, 2),
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
        ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)]),
    ]
}

/// Least-squares fit of a unital qubit map to a Pauli mixture.
pub fn pauli_mixture_fit(m: &LinearMap) -> Result<PauliMixture> {
    if m.d_in() != 2 || m.d_out() != 2 {
        return Err(Error::Dimension(format!(
            "Pauli fit needs a qubit map, got {}→{}",
            m.d_in(),
            m.d_out()
        )));
    }
    let id = ComplexMatrix::identity(2, 2);
    let unital = fro(&(m.apply(&id) - &id));
    if unital > 1e-8 {
        return Err(Error::NotUnital(unital));
    }
    let sigmas = paulis();
    // Rows: real and imaginary parts of M(E_ab)_{cd} for the four matrix units.
    let mut design = DMatrix::<f64>::zeros(32, 4);
    let mut target = DVector::<f64>::zeros(32);
    let mut row = 0;
    for a in 0..2 {
        for b in 0..2 {
            let mut unit = ComplexMatrix::zeros(2, 2);
            unit[(a, b)] = ONE;
            let image = m.apply(&unit);
            let columns: Vec<ComplexMatrix> = sigmas.iter().map(|s| s * &unit * s).collect();
            for c in 0..2 {
                for d in 0..2 {
                    for (k, col) in columns.iter().enumerate() {
                        design[(row, k)] = col[(c, d)].re;
                        design[(row + 1, k)] = col[(c, d)].im;
                    }
                    target[row] = image[(c, d)].re;
                    target[row + 1] = image[(c, d)].im;
                    row += 2;
                }
            }
        }
    }
    let p = (design.transpose() * &design)
        .cholesky()
        .ok_or_else(|| Error::Numerical("singular Pauli design matrix".into()))?
        .solve(&(design.transpose() * &target));
    let residual = (&design * &p - &target).norm();
    Ok(PauliMixture {
        p_i: p[0],
        p_x: p[1],
        p_y: p[2],
        p_z: p[3],
        residual,
    })
}

/// Channel `ρ ↦ Σ_c p_c σ_c ρ σ_c` for a probability vector over `(I, X, Y, Z)`.
pub fn pauli_channel(p: [f64; 4]) -> Result<Channel> {
    let kraus = paulis()
        .into_iter()
        .zip(p)
        .filter(|(_, w)| *w > 0.0)
        .map(|(s, w)| s * C64::new(w.sqrt(), 0.0))
        .collect();
    Channel::new(2, 2, kraus)
}
