//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use zeq_core::channel::{code_projectors, pauli_mixture_fit, q0_witness, recovery_map, Channel};
use zeq_core::numerics::{fro, gaussian_matrix, haar_unitary, trace, ComplexMatrix, ComplexVector, Seed, C64};
use zeq_core::sampler::{admissible_indices, rank_profile, sample_constrained, verify_symmetries, StructureIndex};
use zeq_core::subspace::{
    find_product_state, plucker, search_k_unextendible, BipartiteSubspace, Provenance, SearchMode, SearchParams,
    Unextendibility,
};
use zeq_core::superactivation::{
    choi_overlap, joint_orthogonality, plus_minus_overlap, psd_span_certificate, random_choi_pair,
};
use zeq_core::upb::{product_upb, symmetrize, tiles_upb, upb_span};

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(k: usize, d: usize) -> ComplexVector {
    ComplexVector::from_fn(d, |i, _| if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

// 1
fn dimension_arithmetic() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_zeq"))
        .args(["sample", "--da", "48", "--check-only", "-q"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("exit {:?}", out.status.code()))?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let get = |k: &str| v[k].as_i64().unwrap_or(-1);
    ensure(
        get("d_e") == 1140 && get("d_b") == 54720 && get("window_lo") == 1140 && get("window_hi") == 1164,
        || format!("unexpected arithmetic {v}"),
    )?;
    ensure(v["window_nonempty"] == true && get("min_d_a_with_window") == 48, || {
        format!("window {v}")
    })?;
    for d_a in 1..48 {
        let (lo, hi) = (12 * (2 * d_a - 1), d_a * d_a - 12 * (2 * d_a - 1));
        ensure(lo > hi, || format!("window open at d_a = {d_a}"))?;
    }
    Ok("d_E = 1140, d_B = 54720, window 1140..=1164, first nonempty at d_A = 48".into())
}

/// A channel C² → C^m correcting the qubit exactly: Kraus operators
/// `√p_k U (V_k ⊗ |k⟩)` with orthogonal environment labels.
fn correctable_channel(m: usize, seed: Seed) -> Channel {
    let mut rng = seed.rng();
    let n = 1 + (seed.0 as usize % (m / 2));
    let u = haar_unitary(m, &mut rng);
    let weights: Vec<f64> = (0..n).map(|k| 1.0 + k as f64).collect();
    let total: f64 = weights.iter().sum();
    let kraus = (0..n)
        .map(|k| {
            let v = haar_unitary(2, &mut rng);
            let embed = ComplexMatrix::from_fn(m, 2, |row, col| {
                if row % (m / 2) == k {
                    v[(row / (m / 2), col)]
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            &u * embed * C64::new((weights[k] / total).sqrt(), 0.0)
        })
        .collect();
    Channel::new(2, m, kraus).expect("trace preserving by construction")
}

// 2
fn lemma_one() -> Check {
    let (s0, s1) = (e(0, 2), e(1, 2));
    let mut worst_rec: f64 = 0.0;
    let mut worst_pauli: f64 = 0.0;
    for seed in 0..20u64 {
        let m = 2 * (1 + seed as usize % 4);
        let ch = correctable_channel(m, Seed(seed));
        let w = q0_witness(&ch, &s0, &s1, 1e-9).map_err(|e| e.to_string())?;
        ensure(w.holds, || format!("seed {seed}: witness fails {w:?}"))?;
        let r = recovery_map(&ch, &s0, &s1, 1e-8).map_err(|e| e.to_string())?;
        let rec = r.after(ch.as_map()).map_err(|e| e.to_string())?;
        for p in code_projectors(&s0, &s1) {
            worst_rec = worst_rec.max(fro(&(rec.apply(&p) - &p)));
        }
        let fit = pauli_mixture_fit(&rec).map_err(|e| e.to_string())?;
        worst_pauli = worst_pauli.max(fit.p_x.abs()).max(fit.p_y.abs()).max(fit.p_z.abs());
    }
    ensure(worst_rec <= 1e-7, || format!("recovery deviation {worst_rec:e}"))?;
    ensure(worst_pauli <= 1e-8, || format!("Pauli weight {worst_pauli:e}"))?;
    Ok(format!(
        "20 channels, recovery deviation {worst_rec:.1e}, max p_X/p_Y/p_Z {worst_pauli:.1e}"
    ))
}

// 3
fn adjoint_choi() -> Check {
    let mut duality: f64 = 0.0;
    let mut round: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = Seed(seed).rng();
        let d_in = 1 + seed as usize % 6;
        let d_out = 1 + (seed as usize / 6) % 6;
        let n = d_in.div_ceil(d_out) + seed as usize % 3;
        let ch = Channel::random(d_in, d_out, n, &mut rng).map_err(|e| e.to_string())?;
        let x = gaussian_matrix(d_out, d_out, &mut rng);
        let y = gaussian_matrix(d_in, d_in, &mut rng);
        let lhs = trace(&(x.adjoint() * ch.apply(&y)));
        let rhs = trace(&(ch.adjoint().apply(&x).adjoint() * y));
        duality = duality.max((lhs - rhs).norm());
        let c = ch.choi();
        let back = c.to_map(1e-12).map_err(|e| e.to_string())?.choi();
        round = round.max(fro(&(back.matrix - c.matrix)));
    }
    ensure(duality <= 1e-10, || format!("duality residual {duality:e}"))?;
    ensure(round <= 1e-9, || format!("Choi round trip {round:e}"))?;
    Ok(format!(
        "100 triples, duality {duality:.1e}, Choi round trip {round:.1e}"
    ))
}

// 4
fn calibration() -> Check {
    let tol = 1e-8;
    let mut found5 = 0;
    for seed in 0..100 {
        let s = BipartiteSubspace::random(3, 3, 5, Seed(seed)).map_err(|e| e.to_string())?;
        let r = find_product_state(&s, SearchMode::Inside, &SearchParams::default(), Seed(1000 + seed));
        found5 += usize::from(r.found);
    }
    ensure(found5 >= 95, || format!("dim 5: {found5}/100 found"))?;
    let p200 = SearchParams {
        restarts: 200,
        ..SearchParams::default()
    };
    let mut best4 = f64::INFINITY;
    for seed in 0..10 {
        let s = BipartiteSubspace::random(3, 3, 4, Seed(seed)).map_err(|e| e.to_string())?;
        let r = find_product_state(&s, SearchMode::Inside, &p200, Seed(2000 + seed));
        ensure(!r.found, || format!("dim 4 seed {seed}: product state reported"))?;
        best4 = best4.min(r.best_residual());
    }
    let tiles = upb_span(&tiles_upb()).map_err(|e| e.to_string())?;
    let p1e4 = SearchParams {
        restarts: 10_000,
        ..SearchParams::default()
    };
    let r = find_product_state(&tiles, SearchMode::OrthogonalTo, &p1e4, Seed(3000));
    ensure(!r.found, || "Tiles complement: product state reported".into())?;
    ensure(best4 > tol, || "dim 4 residual below tol".into())?;
    Ok(format!(
        "dim 5: {found5}/100 found; dim 4: 0/10 (best {best4:.1e}); Tiles complement best {:.1e}",
        r.best_residual()
    ))
}

// 5
fn upb_closure() -> Check {
    let u = product_upb(&tiles_upb(), &tiles_upb()).map_err(|e| e.to_string())?;
    let s = upb_span(&u).map_err(|e| e.to_string())?;
    ensure(s.dim() == 25 && s.ambient() == 81, || {
        format!("dim {} in {}", s.dim(), s.ambient())
    })?;
    ensure(u.certified() && s.certified(), || "certificate lost".into())?;
    let v = search_k_unextendible(&s, 1, &SearchParams::default(), Seed(5)).map_err(|e| e.to_string())?;
    match v.verdict {
        Unextendibility::HoldsUpToK { best, .. } => Ok(format!(
            "25-dim span in C⁹⊗C⁹ certified; search best residual {:.1e}",
            best.map_or(f64::NAN, |b| b.residual)
        )),
        other => Err(format!("search verdict {other:?}")),
    }
}

// 6
fn symmetrization() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let dim = 1 + seed as usize % 2;
        let s = BipartiteSubspace::random(4, 4, dim, Seed(seed)).map_err(|e| e.to_string())?;
        let t = symmetrize(&s).map_err(|e| e.to_string())?;
        let r = verify_symmetries(&t, 1e-10).map_err(|e| e.to_string())?;
        worst = worst.max(r.flip_residual).max(r.flip_x_residual).max(r.ortho_residual);
        ensure(t.dim() <= 12 * dim, || {
            format!("seed {seed}: dim {} > 12·{dim}", t.dim())
        })?;
    }
    ensure(worst <= 1e-10, || format!("residual {worst:e}"))?;
    Ok(format!("20 seeds, worst (c)/(d)/(g) residual {worst:.1e}"))
}

fn classes(d_a: usize, dims: &[usize]) -> Result<Vec<StructureIndex>, String> {
    let mut out = Vec::new();
    for &d in dims {
        out.extend(admissible_indices(d_a, d).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

// 7
fn sampler_contract() -> Check {
    let mut all = classes(4, &(1..=16).collect::<Vec<_>>())?;
    all.extend(classes(6, &[4, 10, 18, 26])?);
    let mut worst: f64 = 0.0;
    for idx in &all {
        for seed in 0..50 {
            let s = sample_constrained(idx, Seed(seed), false).map_err(|e| e.to_string())?;
            let a = verify_symmetries(&s, 1e-10).map_err(|e| e.to_string())?;
            let b = verify_symmetries(&s.complement(), 1e-10).map_err(|e| e.to_string())?;
            ensure(a.pass && b.pass, || format!("{idx:?} seed {seed}: {a:?} {b:?}"))?;
            worst = worst.max(a.max_residual()).max(b.max_residual());
            let ranks = rank_profile(&s).map_err(|e| e.to_string())?;
            ensure(ranks == (2 * idx.d, 2 * idx.r, 2 * (idx.d - idx.r)), || {
                format!("{idx:?} seed {seed}: ranks {ranks:?}")
            })?;
        }
    }
    Ok(format!(
        "{} index classes × 50 samples, worst residual {worst:.1e}",
        all.len()
    ))
}

// 8
fn positivity_seeding() -> Check {
    let mut all = classes(4, &[4, 6, 10])?;
    all.extend(classes(6, &[10, 20])?);
    all.retain(|i| i.k2 >= 1 && i.k2 < i.d_a * i.d_a / 2);
    let mut least = f64::INFINITY;
    for idx in &all {
        for seed in 0..5 {
            let s = sample_constrained(idx, Seed(seed), true).map_err(|e| e.to_string())?;
            for t in [s.clone(), s.complement().local_x()] {
                let c = psd_span_certificate(&t, 1e-10).map_err(|e| e.to_string())?;
                ensure(c.witness.is_some() && c.min_eig > 0.1, || {
                    format!("{idx:?} seed {seed}: min_eig {}", c.min_eig)
                })?;
                least = least.min(c.min_eig);
            }
        }
    }
    Ok(format!("{} samples, smallest λ_min {least:.3}", all.len() * 5))
}

// 9
fn identity_chain() -> Check {
    let all = admissible_indices(4, 6).map_err(|e| e.to_string())?;
    let mut gap: f64 = 0.0;
    let mut size: f64 = 0.0;
    for seed in 0..10u64 {
        let s = sample_constrained(&all[seed as usize % all.len()], Seed(seed), false).map_err(|e| e.to_string())?;
        let j = joint_orthogonality(&s, 1e-10).map_err(|e| e.to_string())?;
        ensure(j.quantum_ok, || format!("seed {seed}: quantum condition fails"))?;
        let pair = random_choi_pair(&s, Seed(100 + seed)).map_err(|e| e.to_string())?;
        let direct = plus_minus_overlap(&pair).map_err(|e| e.to_string())?;
        let chain = choi_overlap(&pair).map_err(|e| e.to_string())?;
        gap = gap.max((direct - chain).abs());
        size = size.max(direct.abs()).max(chain.abs());
    }
    ensure(gap <= 1e-9, || format!("chain gap {gap:e}"))?;
    ensure(size <= 1e-9, || format!("overlap {size:e}"))?;
    Ok(format!("10 pairs, chain gap {gap:.1e}, largest overlap {size:.1e}"))
}

// 10
fn plucker_suite() -> Check {
    let mut basis_gap: f64 = 0.0;
    let mut relation: f64 = 0.0;
    for seed in 0..50u64 {
        let s = BipartiteSubspace::random(2, 2, 2, Seed(seed)).map_err(|e| e.to_string())?;
        let u = haar_unitary(2, &mut Seed(seed).derive(1).rng());
        let rotated =
            BipartiteSubspace::from_orthonormal(2, 2, s.basis() * u, Provenance::Derived).map_err(|e| e.to_string())?;
        let p = plucker(&s, 1_000_000).map_err(|e| e.to_string())?;
        let q = plucker(&rotated, 1_000_000).map_err(|e| e.to_string())?;
        for (a, b) in p.coords.iter().zip(&q.coords) {
            basis_gap = basis_gap.max((a - b).norm());
        }
        let g = |x: usize, y: usize| p.get(&[x, y]).expect("subset exists");
        relation = relation.max((g(0, 1) * g(2, 3) - g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2)).norm());
    }
    ensure(basis_gap <= 1e-10, || format!("basis dependence {basis_gap:e}"))?;
    ensure(relation <= 1e-10, || format!("quadratic relation {relation:e}"))?;
    Ok(format!("50 seeds, basis gap {basis_gap:.1e}, relation {relation:.1e}"))
}

fn zeq(dir: &Path, args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_zeq"))
        .current_dir(dir)
        .args(args)
        .arg("-q")
        .output()
        .map_err(|e| e.to_string())?;
    Ok(out.status.code().unwrap_or(-1))
}

fn pipeline(dir: &Path) -> Result<(), String> {
    let ch = Channel::random(2, 3, 2, &mut Seed(11).rng()).map_err(|e| e.to_string())?;
    std::fs::write(
        dir.join("ch.json"),
        serde_json::to_string(&ch).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let steps: &[(&[&str], i32)] = &[
        (&["channel-choi", "ch.json", "-o", "choi.json"], 0),
        (&["channel-choi", "--invert", "choi.json", "-o", "kraus.json"], 0),
        (&["channel-adjoint", "--compose", "ch.json", "-o", "adj.json"], 0),
        (&["channel-recover", "ch.json", "-o", "rec.json"], 0),
        (&["q0-witness", "ch.json", "-o", "q0.json"], 1),
        (&["upb-build", "tiles", "-o", "tiles.json"], 0),
        (&["upb-build", "full", "--da", "2", "--db", "2", "-o", "full.json"], 0),
        (
            &["upb-build", "product", "tiles.json", "full.json", "-o", "prod.json"],
            0,
        ),
        (&["subspace-check", "tiles.json", "-o", "tiles_report.json"], 1),
        (
            &[
                "sample",
                "--da",
                "4",
                "--d",
                "6",
                "--r",
                "2",
                "--k1",
                "0",
                "--k2",
                "4",
                "--seed",
                "7",
                "--positivity-seed",
                "-o",
                "s.json",
            ],
            0,
        ),
        (&["upb-symmetrize", "s.json", "-o", "sym.json"], 0),
        (&["subspace-check", "s.json", "--seed", "3", "-o", "report.json"], 1),
        (&["subspace-product-state", "s.json", "--seed", "2", "-o", "ps.json"], 0),
        (
            &[
                "search",
                "--da",
                "4",
                "--d",
                "6",
                "--trials",
                "6",
                "--seed",
                "9",
                "--positivity-seed",
                "--restarts",
                "20",
                "-o",
                "search.ndjson",
            ],
            0,
        ),
        (&["sample", "--da", "48", "--check-only", "-o", "arith.json"], 0),
        (&["verify-report", "report.json"], 0),
        (&["verify-report", "search.ndjson"], 0),
    ];
    for (args, code) in steps {
        let got = zeq(dir, args)?;
        ensure(got == *code, || format!("{args:?}: exit {got}, expected {code}"))?;
    }
    Ok(())
}

// 11
fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(a.path())?;
    pipeline(b.path())?;
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.file_name()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    names.sort();
    for name in &names {
        let x = std::fs::read(a.path().join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{name:?} differs between runs"))?;
    }
    Ok(format!("{} output files byte-identical across two runs", names.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "AC-01",
            "dimension arithmetic",
            Duration::from_secs(1),
            dimension_arithmetic,
        ),
        ("AC-02", "qubit recovery end to end", Duration::from_secs(10), lemma_one),
        (
            "AC-03",
            "adjoint duality and Choi round trip",
            Duration::from_secs(10),
            adjoint_choi,
        ),
        (
            "AC-04",
            "product-state search calibration",
            Duration::from_secs(300),
            calibration,
        ),
        ("AC-05", "UPB product closure", Duration::from_secs(300), upb_closure),
        (
            "AC-06",
            "symmetrization contract",
            Duration::from_secs(30),
            symmetrization,
        ),
        ("AC-07", "sampler contract", Duration::from_secs(120), sampler_contract),
        (
            "AC-08",
            "positivity seeding",
            Duration::from_secs(60),
            positivity_seeding,
        ),
        (
            "AC-09",
            "trace identity chain",
            Duration::from_secs(120),
            identity_chain,
        ),
        ("AC-10", "Plücker suite", Duration::from_secs(10), plucker_suite),
        ("AC-11", "CLI determinism", Duration::from_secs(300), determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(_) if elapsed > limit => ("FAIL", format!("took {elapsed:.2?}, limit {limit:?}")),
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(status == "FAIL");
        println!("{id} {status} {name}: {detail} [{elapsed:.2?}]");
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
