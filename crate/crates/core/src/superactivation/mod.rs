//! The seven-condition suite on a subspace `S ⊆ C^{d_a} ⊗ C^{d_a}`:
//!
//! * (a) `S` strongly unextendible, (b) `S⊥` strongly unextendible;
//! * (c) `flip(S) = S`, (d) `flip(local_x S) = local_x S`;
//! * (e) `M(S)` and (f) `M(local_x S⊥)` spanned by PSD matrices;
//! * (g) `S ⊥ (I+X)⊗(I−X)·S⊥`.
//!
//! Unextendibility is only ever decided up to a tensor power `kmax`, by
//! seesaw search, unless a UPB certificate applies.

mod joint;
mod positivity;
mod search;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_ambient, ComplexMatrix, Seed};
use crate::sampler::verify_symmetries;
use crate::subspace::{search_k_unextendible, BipartiteSubspace, ProductStateWitness, SearchParams, Unextendibility};

pub use joint::{
    choi_overlap, choi_pair_from_subspace, joint_orthogonality, output_overlap, plus_minus_overlap, random_choi_pair,
    second_support, signal_states, ChoiPair, JointOrthogonality, SignalStates,
};
pub use positivity::{membership_residual, min_eig, psd_span_certificate, PsdCertificate, FLIP_TOL};
pub use search::{search, search_plan, SearchConfig, SearchRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    HoldsUpToK,
    Certified,
}

impl Verdict {
    pub fn ok(self) -> bool {
        self != Verdict::Fails
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Product state in `(T^{⊗k})⊥` (a failure) or the closest candidate found.
    ProductState { k: usize, state: ProductStateWitness },
    /// Unit-trace positive-definite element of the matrix view.
    PositiveElement {
        #[serde(with = "crate::json::matrix")]
        matrix: ComplexMatrix,
    },
}

/// One condition's outcome.
///
/// `residual` is a Frobenius deviation for (c), (d), (g); the witness
/// residual for (a), (b); and the smallest eigenvalue of the unit-trace
/// witness (or the best value found) for (e), (f).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub verdict: Verdict,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionEntry {
    fn threshold(residual: f64, tol: f64) -> Self {
        ConditionEntry {
            verdict: if residual <= tol {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            residual,
            witness: None,
            note: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub a: ConditionEntry,
    pub b: ConditionEntry,
    pub c: ConditionEntry,
    pub d: ConditionEntry,
    pub e: ConditionEntry,
    pub f: ConditionEntry,
    pub g: ConditionEntry,
}

impl Conditions {
    pub fn entries(&self) -> [(&'static str, &ConditionEntry); 7] {
        [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
            ("e", &self.e),
            ("f", &self.f),
            ("g", &self.g),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub kmax: usize,
    pub tol: f64,
    pub seed: Seed,
    pub search: SearchParams,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            kmax: 1,
            tol: 1e-10,
            seed: Seed(0),
            search: SearchParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub d_a: usize,
    pub d_b: usize,
    pub dim: usize,
    pub config: CheckConfig,
    /// `S` is the zero space or the whole space.
    pub degenerate: bool,
    /// The signal states need an even local dimension.
    pub even_dimension: bool,
    pub conditions: Conditions,
    /// (a)–(f) hold: both channels have no zero-error classical capacity.
    pub c0_zero: bool,
    /// All seven hold with even `d_a`: the joint channel carries a qubit.
    pub q0_joint: bool,
    pub pass: bool,
    pub subspace: BipartiteSubspace,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn unextendibility_entry(t: &BipartiteSubspace, cfg: &CheckConfig, stream: u64) -> Result<ConditionEntry> {
    if t.certified() {
        return Ok(ConditionEntry {
            verdict: Verdict::Certified,
            residual: 0.0,
            witness: None,
            note: Some("contains a certified unextendible product basis".into()),
        });
    }
    let mut exact = true;
    let mut closest: Option<(usize, ProductStateWitness)> = None;
    for k in 1..=cfg.kmax {
        let v = search_k_unextendible(t, k, &cfg.search, cfg.seed.derive(stream + k as u64))?;
        match v.verdict {
            Unextendibility::Certified => {}
            Unextendibility::Fails { witness } => {
                return Ok(ConditionEntry {
                    verdict: Verdict::Fails,
                    residual: witness.residual,
                    witness: Some(Witness::ProductState { k, state: witness }),
                    note: None,
                })
            }
            Unextendibility::HoldsUpToK { best, .. } => {
                exact = false;
                if let Some(w) = best {
                    if closest.as_ref().is_none_or(|(_, c)| w.residual < c.residual) {
                        closest = Some((k, w));
                    }
                }
            }
        }
    }
    if exact {
        return Ok(ConditionEntry {
            verdict: Verdict::Certified,
            residual: 0.0,
            witness: None,
            note: Some("orthogonal complement of every tensor power is empty".into()),
        });
    }
    Ok(ConditionEntry {
        verdict: Verdict::HoldsUpToK,
        residual: closest.as_ref().map_or(1.0, |(_, w)| w.residual),
        witness: closest.map(|(k, state)| Witness::ProductState { k, state }),
        note: Some(format!("no product state found up to k = {}", cfg.kmax)),
    })
}

fn positivity_entry(t: &BipartiteSubspace, tol: f64) -> Result<ConditionEntry> {
    if t.dim() == 0 {
        return Ok(ConditionEntry {
            verdict: Verdict::Fails,
            residual: 0.0,
            witness: None,
            note: Some("zero space".into()),
        });
    }
    match psd_span_certificate(t, tol) {
        Ok(cert) => Ok(match cert.witness {
            Some(w) => ConditionEntry {
                verdict: Verdict::Holds,
                residual: cert.min_eig,
                witness: Some(Witness::PositiveElement { matrix: w }),
                note: None,
            },
            None => ConditionEntry {
                verdict: Verdict::Fails,
                residual: cert.min_eig,
                witness: None,
                note: Some("no positive-definite element found".into()),
            },
        }),
        Err(Error::NotFlipSymmetric(r)) => Ok(ConditionEntry {
            verdict: Verdict::Fails,
            residual: 0.0,
            witness: None,
            note: Some(format!("matrix view not closed under conjugation (residual {r:e})")),
        }),
        Err(e) => Err(e),
    }
}

/// Evaluate (a)–(g) on `s`.
///
/// The ambient dimension of `S^{⊗kmax}` must be within the guard.
pub fn check_conditions(s: &BipartiteSubspace, cfg: &CheckConfig) -> Result<ConditionReport> {
    let start = Instant::now();
    if s.d_a() != s.d_b() {
        return Err(Error::UnequalDimensions {
            d_a: s.d_a(),
            d_b: s.d_b(),
        });
    }
    if cfg.kmax == 0 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    let n = s.ambient();
    let power = n.checked_pow(cfg.kmax as u32).ok_or(Error::AmbientOverflow {
        requested: usize::MAX,
        limit: crate::numerics::max_ambient(),
    })?;
    check_ambient(power)?;

    let perp = s.complement();
    let sym = verify_symmetries(s, cfg.tol)?;
    let conditions = Conditions {
        a: unextendibility_entry(s, cfg, 100)?,
        b: unextendibility_entry(&perp, cfg, 200)?,
        c: ConditionEntry::threshold(sym.flip_residual, cfg.tol),
        d: ConditionEntry::threshold(sym.flip_x_residual, cfg.tol),
        e: positivity_entry(s, cfg.tol)?,
        f: positivity_entry(&perp.local_x(), cfg.tol)?,
        g: ConditionEntry::threshold(sym.ortho_residual, cfg.tol),
    };
    let even_dimension = s.d_a().is_multiple_of(2);
    let c0_zero = conditions.entries()[..6].iter().all(|(_, e)| e.verdict.ok());
    let pass = conditions.entries().iter().all(|(_, e)| e.verdict.ok());
    Ok(ConditionReport {
        d_a: s.d_a(),
        d_b: s.d_b(),
        dim: s.dim(),
        config: *cfg,
        degenerate: s.is_degenerate(),
        even_dimension,
        c0_zero,
        q0_joint: pass && even_dimension,
        pass,
        conditions,
        subspace: s.clone(),
        wall_time: start.elapsed(),
    })
}

/// A stored residual next to its recomputed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reevaluation {
    pub condition: String,
    pub stored: f64,
    pub recomputed: f64,
}

impl Reevaluation {
    pub fn deviation(&self) -> f64 {
        (self.stored - self.recomputed).abs()
    }
}

fn reevaluate_unextendibility(t: &BipartiteSubspace, e: &ConditionEntry) -> Result<f64> {
    match (&e.witness, e.verdict) {
        (Some(Witness::ProductState { k, state }), _) => {
            let power = if *k == 1 { t.clone() } else { t.tensor_power(*k)? };
            Ok(state.evaluate(&power))
        }
        (_, Verdict::Certified) => Ok(if t.certified() || t.dim() == t.ambient() {
            0.0
        } else {
            1.0
        }),
        _ => Ok(e.residual),
    }
}

fn reevaluate_positivity(t: &BipartiteSubspace, e: &ConditionEntry, tol: f64) -> Result<Vec<Reevaluation>> {
    match &e.witness {
        Some(Witness::PositiveElement { matrix }) => Ok(vec![
            Reevaluation {
                condition: String::new(),
                stored: e.residual,
                recomputed: min_eig(matrix),
            },
            Reevaluation {
                condition: "membership".into(),
                stored: 0.0,
                recomputed: membership_residual(t, matrix),
            },
        ]),
        _ => {
            let again = positivity_entry(t, tol)?;
            Ok(vec![Reevaluation {
                condition: String::new(),
                stored: e.residual,
                recomputed: again.residual,
            }])
        }
    }
}

/// Recompute every residual of a stored report from its subspace and witnesses.
pub fn reevaluate(report: &ConditionReport) -> Result<Vec<Reevaluation>> {
    let s = &report.subspace;
    let perp = s.complement();
    let sym = verify_symmetries(s, report.config.tol)?;
    let c = &report.conditions;
    let mut out = vec![
        Reevaluation {
            condition: "a".into(),
            stored: c.a.residual,
            recomputed: reevaluate_unextendibility(s, &c.a)?,
        },
        Reevaluation {
            condition: "b".into(),
            stored: c.b.residual,
            recomputed: reevaluate_unextendibility(&perp, &c.b)?,
        },
        Reevaluation {
            condition: "c".into(),
            stored: c.c.residual,
            recomputed: sym.flip_residual,
        },
        Reevaluation {
            condition: "d".into(),
            stored: c.d.residual,
            recomputed: sym.flip_x_residual,
        },
    ];
    for (name, t, entry) in [("e", s.clone(), &c.e), ("f", perp.local_x(), &c.f)] {
        for mut r in reevaluate_positivity(&t, entry, report.config.tol)? {
            r.condition = if r.condition.is_empty() {
                name.to_string()
            } else {
                format!("{name}.{}", r.condition)
            };
            out.push(r);
        }
    }
    out.push(Reevaluation {
        condition: "g".into(),
        stored: c.g.residual,
        recomputed: sym.ortho_residual,
    });
    Ok(out)
}

impl ConditionReport {
    /// Human-readable lines, one per condition.
    pub fn summary(&self) -> String {
        let names = [
            "S strongly unextendible",
            "S⊥ strongly unextendible",
            "flip(S) = S",
            "flip(local_x S) = local_x S",
            "M(S) spanned by PSD",
            "M(local_x S⊥) spanned by PSD",
            "S ⊥ (I+X)⊗(I−X) S⊥",
        ];
        let mut out = format!(
            "subspace dim {} in C^{}⊗C^{} (kmax {}, tol {:e}){}\n",
            self.dim,
            self.d_a,
            self.d_b,
            self.config.kmax,
            self.config.tol,
            if self.degenerate { " [degenerate]" } else { "" }
        );
        for ((key, e), name) in self.conditions.entries().iter().zip(names) {
            let verdict = match e.verdict {
                Verdict::Holds => "holds",
                Verdict::Fails => "FAILS",
                Verdict::HoldsUpToK => "holds up to k",
                Verdict::Certified => "certified",
            };
            out.push_str(&format!(
                "({key}) {name:<30} {verdict:<14} residual {:.3e}\n",
                e.residual
            ));
        }
        out.push_str(&format!(
            "C0(E1)=C0(E2)=0: {}  Q0(E1⊗E2)≥1: {}  pass: {}  ({:.2?})\n",
            self.c0_zero, self.q0_joint, self.pass, self.wall_time
        ));
        out
    }
}
