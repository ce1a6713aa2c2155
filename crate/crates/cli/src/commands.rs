use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use zeq_core::channel::{
    pauli_mixture_fit, q0_witness, recovery_map, Channel, ChoiMatrix, LinearMap, PauliMixture, Q0Witness,
};
use zeq_core::numerics::{trace, ComplexVector, Seed};
use zeq_core::sampler::{admissible_indices, sample_constrained, verify_symmetries, StructureIndex};
use zeq_core::subspace::{find_product_state, SearchMode, SearchParams};
use zeq_core::superactivation::{
    check_conditions, reevaluate, search, CheckConfig, ConditionReport, SearchConfig, SearchRecord,
};
use zeq_core::upb::{full_product_basis, product_upb, symmetrize, tiles_upb, upb_span, Upb};
use zeq_core::C64;

use crate::io::{parse, read_json, read_subspace, read_text, BadInput, Sink};
use crate::{Command, Family, Mode, SearchOpts};

impl From<SearchOpts> for SearchParams {
    fn from(o: SearchOpts) -> Self {
        SearchParams {
            restarts: o.restarts,
            iters: o.iters,
            tol: o.search_tol,
        }
    }
}

#[derive(Deserialize)]
struct CodeStates {
    #[serde(with = "zeq_core::json::vector")]
    s0: ComplexVector,
    #[serde(with = "zeq_core::json::vector")]
    s1: ComplexVector,
}

fn code_states(path: Option<&Path>, d_in: usize) -> Result<(ComplexVector, ComplexVector)> {
    if let Some(p) = path {
        let c: CodeStates = read_json(p)?;
        return Ok((c.s0, c.s1));
    }
    if d_in < 2 {
        bail!(BadInput(format!("input dimension {d_in} cannot hold a qubit")));
    }
    let e = |k: usize| {
        ComplexVector::from_fn(
            d_in,
            |i, _| if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
        )
    };
    Ok((e(0), e(1)))
}

#[derive(Serialize)]
struct Q0Output {
    witness: Q0Witness,
    /// Pauli-mixture fit of `R∘E` for qubit inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pauli: Option<PauliMixture>,
}

/// Arithmetic of the environment and output dimensions and the window for `d`.
#[derive(Serialize)]
struct DimensionCheck {
    d_a: u64,
    d_e: u64,
    d_b: u64,
    window_lo: u64,
    window_hi: i128,
    window_nonempty: bool,
    min_d_a_with_window: u64,
}

fn window(d_a: u64) -> (u64, i128) {
    let d_e = 12 * (2 * d_a - 1);
    (d_e, (d_a as i128) * (d_a as i128) - d_e as i128)
}

fn dimension_check(d_a: usize) -> Result<DimensionCheck> {
    let d_a = d_a as u64;
    if d_a == 0 || d_a > u32::MAX as u64 {
        bail!(BadInput(format!("--da {d_a} out of range")));
    }
    let (d_e, hi) = window(d_a);
    let min = (1..)
        .find(|&n| {
            let (lo, hi) = window(n);
            lo as i128 <= hi
        })
        .expect("window opens for large d_a");
    Ok(DimensionCheck {
        d_a,
        d_e,
        d_b: d_a * d_e,
        window_lo: d_e,
        window_hi: hi,
        window_nonempty: d_e as i128 <= hi,
        min_d_a_with_window: min,
    })
}

fn index_triple(r: Option<usize>, k1: Option<usize>, k2: Option<usize>) -> Result<Option<(usize, usize, usize)>> {
    match (r, k1, k2) {
        (Some(r), Some(k1), Some(k2)) => Ok(Some((r, k1, k2))),
        (None, None, None) => Ok(None),
        _ => bail!(BadInput("--r, --k1 and --k2 must be given together".into())),
    }
}

fn seedable(idx: &StructureIndex) -> bool {
    idx.k2 >= 1 && idx.k2 < idx.d_a * idx.d_a / 2
}

pub fn run(command: Command, quiet: bool) -> Result<u8> {
    match command {
        Command::ChannelChoi {
            input,
            invert,
            tol,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            if invert {
                let c: ChoiMatrix = read_json(&input)?;
                let map = c.to_map(tol)?;
                sink.json(&map)?;
                sink.summary(&format!(
                    "{} Kraus operators, trace-preservation defect {:.3e}\n",
                    map.kraus().len(),
                    map.trace_preservation_defect()
                ));
            } else {
                let map: LinearMap = read_json(&input)?;
                let c = map.choi();
                sink.json(&c)?;
                sink.summary(&format!(
                    "Choi matrix {}→{}, trace {:.12}\n",
                    c.d_in,
                    c.d_out,
                    trace(&c.matrix).re
                ));
            }
            Ok(0)
        }
        Command::ChannelAdjoint { input, compose, out } => {
            let sink = Sink::new(out.output, quiet);
            let map: LinearMap = read_json(&input)?;
            let result = if compose {
                map.compose_self_adjoint()
            } else {
                map.adjoint()
            };
            sink.json(&result)?;
            sink.summary(&format!(
                "{}→{} map with {} Kraus operators\n",
                result.d_in(),
                result.d_out(),
                result.kraus().len()
            ));
            Ok(0)
        }
        Command::ChannelRecover {
            input,
            states,
            tol,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            let ch: Channel = read_json(&input)?;
            let (s0, s1) = code_states(states.as_deref(), ch.d_in())?;
            let r = recovery_map(&ch, &s0, &s1, tol)?;
            sink.json(&r)?;
            sink.summary(&format!(
                "recovery {}→{}, {} Kraus operators\n",
                r.d_in(),
                r.d_out(),
                r.kraus().len()
            ));
            Ok(0)
        }
        Command::Q0Witness {
            input,
            states,
            tol,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            let ch: Channel = read_json(&input)?;
            let (s0, s1) = code_states(states.as_deref(), ch.d_in())?;
            let witness = q0_witness(&ch, &s0, &s1, tol)?;
            let pauli = if witness.holds && ch.d_in() == 2 {
                let r = recovery_map(&ch, &s0, &s1, 1e-8)?;
                Some(pauli_mixture_fit(&r.after(ch.as_map())?)?)
            } else {
                None
            };
            let holds = witness.holds;
            sink.summary(&format!(
                "overlaps {:.3e} (0/1), {:.3e} (+/−): {}\n",
                witness.overlap_01,
                witness.overlap_pm,
                if holds { "qubit transmitted perfectly" } else { "fails" }
            ));
            sink.json(&Q0Output { witness, pauli })?;
            Ok(if holds { 0 } else { 1 })
        }
        Command::SubspaceCheck {
            input,
            kmax,
            tol,
            seed,
            search,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            let s = read_subspace(&input)?;
            let cfg = CheckConfig {
                kmax,
                tol,
                seed: Seed(seed),
                search: search.into(),
            };
            let report = check_conditions(&s, &cfg)?;
            sink.json(&report)?;
            sink.summary(&report.summary());
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::SubspaceProductState {
            input,
            mode,
            seed,
            search,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            let s = read_subspace(&input)?;
            let mode = match mode {
                Mode::Inside => SearchMode::Inside,
                Mode::OrthogonalTo => SearchMode::OrthogonalTo,
            };
            let result = find_product_state(&s, mode, &search.into(), Seed(seed));
            sink.json(&result)?;
            sink.summary(&format!(
                "{} after {} restarts, best residual {:.3e}\n",
                if result.found { "found" } else { "not found" },
                result.restarts_run,
                result.best_residual()
            ));
            Ok(0)
        }
        Command::UpbBuild {
            family,
            inputs,
            da,
            db,
            span,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            let upb = match family {
                Family::Tiles => tiles_upb(),
                Family::Full => {
                    let (Some(da), Some(db)) = (da, db) else {
                        bail!(BadInput("full needs --da and --db".into()));
                    };
                    full_product_basis(da, db)?
                }
                Family::Product => {
                    let [a, b] = inputs.as_slice() else {
                        bail!(BadInput("product needs exactly two UPB files".into()));
                    };
                    let a: Upb = read_json(a)?;
                    let b: Upb = read_json(b)?;
                    product_upb(&a, &b)?
                }
            };
            sink.summary(&format!(
                "{} product states in C^{}⊗C^{}, certified: {}\n",
                upb.len(),
                upb.d_a(),
                upb.d_b(),
                upb.certified()
            ));
            if span {
                sink.json(&upb_span(&upb)?)?;
            } else {
                sink.json(&upb)?;
            }
            Ok(0)
        }
        Command::UpbSymmetrize { input, out } => {
            let sink = Sink::new(out.output, quiet);
            let s = read_subspace(&input)?;
            let t = symmetrize(&s)?;
            let sym = verify_symmetries(&t, 1e-10)?;
            sink.json(&t)?;
            sink.summary(&format!(
                "dim {} → {}, certified: {}, max symmetry residual {:.3e}\n",
                s.dim(),
                t.dim(),
                t.certified(),
                sym.max_residual()
            ));
            Ok(0)
        }
        Command::Sample {
            da,
            d,
            r,
            k1,
            k2,
            seed,
            positivity_seed,
            list,
            check_only,
            out,
        } => {
            let sink = Sink::new(out.output, quiet);
            if check_only {
                let c = dimension_check(da)?;
                sink.summary(&format!(
                    "d_E = {}, d_B = {}, window {}..={} {}\n",
                    c.d_e,
                    c.d_b,
                    c.window_lo,
                    c.window_hi,
                    if c.window_nonempty { "nonempty" } else { "empty" }
                ));
                sink.json(&c)?;
                return Ok(0);
            }
            let Some(d) = d else {
                bail!(BadInput("--d is required unless --check-only".into()));
            };
            let all = admissible_indices(da, d)?;
            if list {
                sink.summary(&format!("{} admissible indices\n", all.len()));
                sink.json(&all)?;
                return Ok(0);
            }
            let idx = match index_triple(r, k1, k2)? {
                Some((r, k1, k2)) => StructureIndex { d_a: da, d, r, k1, k2 },
                None => *all
                    .iter()
                    .find(|i| !positivity_seed || seedable(i))
                    .ok_or_else(|| zeq_core::Error::InadmissibleIndex(format!("no admissible index for d = {d}")))?,
            };
            let s = sample_constrained(&idx, Seed(seed), positivity_seed)?;
            let sym = verify_symmetries(&s, 1e-10)?;
            sink.json(&s)?;
            sink.summary(&format!(
                "sampled dim {} at (r, k1, k2) = ({}, {}, {}), max symmetry residual {:.3e}\n",
                s.dim(),
                idx.r,
                idx.k1,
                idx.k2,
                sym.max_residual()
            ));
            Ok(0)
        }
        Command::Search {
            da,
            d,
            d_min,
            d_max,
            r,
            k1,
            k2,
            kmax,
            trials,
            seed,
            positivity_seed,
            tol,
            search: opts,
            out,
        } => {
            let (d_min, d_max) = match (d, d_min, d_max) {
                (Some(d), None, None) => (d, d),
                (None, Some(lo), Some(hi)) => (lo, hi),
                (None, Some(lo), None) => (lo, lo),
                _ => bail!(BadInput("give either --d or --d-min [--d-max]".into())),
            };
            let cfg = SearchConfig {
                d_a: da,
                d_min,
                d_max,
                kmax,
                trials,
                seed: Seed(seed),
                positivity_seed,
                tol,
                search: opts.into(),
                index: index_triple(r, k1, k2)?,
            };
            let sink = Sink::new(out.output.clone(), quiet);
            let mut writer: Box<dyn Write> = match sink.output() {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(BufWriter::new(std::io::stdout().lock())),
            };
            let mut passed = 0;
            let mut ok = [0usize; 7];
            search(&cfg, |rec| {
                let line = serde_json::to_string(&rec).map_err(|e| zeq_core::Error::Numerical(e.to_string()))?;
                writeln!(writer, "{line}").map_err(|e| zeq_core::Error::Numerical(e.to_string()))?;
                passed += usize::from(rec.report.pass);
                for (n, (_, e)) in ok.iter_mut().zip(rec.report.conditions.entries()) {
                    *n += usize::from(e.verdict.ok());
                }
                Ok(())
            })?;
            writer.flush()?;
            drop(writer);
            let mut text = format!("{trials} trials, {passed} passed all conditions\n");
            for (name, n) in ["a", "b", "c", "d", "e", "f", "g"].iter().zip(ok) {
                text.push_str(&format!("  ({name}) ok in {n}/{trials}\n"));
            }
            sink.summary(&text);
            Ok(0)
        }
        Command::VerifyReport { input, tol } => {
            let text = read_text(&input)?;
            let reports: Vec<(String, ConditionReport)> = match parse::<ConditionReport>(&input, &text) {
                Ok(r) => vec![("report".into(), r)],
                Err(whole) => {
                    let records: Result<Vec<SearchRecord>> = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| parse(&input, l))
                        .collect();
                    match records {
                        Ok(rs) => rs
                            .into_iter()
                            .map(|r| (format!("trial {}", r.trial), r.report))
                            .collect(),
                        Err(_) => return Err(whole),
                    }
                }
            };
            let mut worst = 0.0f64;
            for (label, report) in &reports {
                for r in reevaluate(report)? {
                    let dev = r.deviation();
                    worst = worst.max(dev);
                    if !quiet {
                        println!(
                            "{label} ({}) stored {:.6e} recomputed {:.6e} deviation {:.3e} {}",
                            r.condition,
                            r.stored,
                            r.recomputed,
                            dev,
                            if dev <= tol { "ok" } else { "MISMATCH" }
                        );
                    }
                }
            }
            Ok(if worst <= tol { 0 } else { 1 })
        }
    }
}
