//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use overlap_entangle::entanglement::{classify, fidelity_pure, optimize_w_phases, TargetState};
use overlap_entangle::oracle::{brute_density_matrix, permanent};
use overlap_entangle::tomography::{
    all_pauli_settings, reconstruct_mle, simulate_counts, CountsTable, MleOptions, SettingCounts,
};
use overlap_entangle::transform::{self, GhzParams};
use overlap_entangle::{simulate, Complex64, DensityMatrix, Error, GramMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

#[derive(Default)]
struct Produced(Vec<(String, DensityMatrix)>);

impl Produced {
    fn keep(&mut self, label: impl Into<String>, rho: &DensityMatrix) {
        self.0.push((label.into(), rho.clone()));
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn ghz_generation(out: &mut Produced) -> Outcome {
    let spec = transform::ghz_preset(&GhzParams::balanced()).map_err(|e| e.to_string())?;
    let gram = GramMatrix::all_ones(3);
    let (rho, p) = simulate(&spec, &gram).map_err(|e| e.to_string())?;
    out.keep("ghz all-ones", &rho);
    let f = fidelity_pure(&rho, &TargetState::ghz(3)).map_err(|e| e.to_string())?;
    let oracle = brute_density_matrix(&spec, &gram).map_err(|e| e.to_string())?;
    let diff = max_entry_diff(&rho, &oracle.rho);
    let report = classify(&rho).map_err(|e| e.to_string())?;
    check((f - 1.0).abs() < 1e-10, || format!("F_GHZ = {f}"))?;
    check((p - 0.25).abs() < 1e-10, || format!("p_success = {p}"))?;
    check((oracle.p_success - 0.25).abs() < 1e-10 && diff < 1e-10, || {
        format!("oracle differs by {diff}")
    })?;
    check(report.ghz_witness_passed, || "GHZ witness failed".into())?;
    Ok(format!("F_GHZ = {f:.12}, p = {p:.12}, oracle diff {diff:.1e}"))
}

fn ghz_decay(out: &mut Produced) -> Outcome {
    let spec = transform::ghz_preset(&GhzParams::balanced()).map_err(|e| e.to_string())?;
    let gram = GramMatrix::from_classes(&[0, 0, 1]);
    let (rho, _) = simulate(&spec, &gram).map_err(|e| e.to_string())?;
    out.keep("ghz third distinguishable", &rho);
    let off = rho.offdiag_norm();
    let report = classify(&rho).map_err(|e| e.to_string())?;
    check(off < 1e-12, || format!("off-diagonal norm {off}"))?;
    check((report.fidelity_ghz - 0.5).abs() < 1e-10, || {
        format!("F_GHZ = {}", report.fidelity_ghz)
    })?;
    check(!report.ghz_witness_passed, || {
        "witness passed on a separable state".into()
    })?;
    Ok(format!(
        "off-diagonal {off:.1e}, F_GHZ = {:.12}, witness fails",
        report.fidelity_ghz
    ))
}

fn w_ladder(out: &mut Produced) -> Outcome {
    let spec = balanced_w();
    let expected = [1.0, 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
    let mut found = Vec::new();
    let mut rhos = Vec::new();
    for (case, f_expected) in (1..=4u8).zip(expected) {
        let (rho, _) = simulate(&spec, &w_case_gram(case)).map_err(|e| e.to_string())?;
        out.keep(format!("w case {case}"), &rho);
        let report = classify(&rho).map_err(|e| e.to_string())?;
        check((report.fidelity_w_max - f_expected).abs() < 1e-6, || {
            format!("case {case}: F_W,max = {}", report.fidelity_w_max)
        })?;
        found.push(report.fidelity_w_max);
        rhos.push(rho);
    }
    let diff = rhos[2].max_abs_diff(&rhos[3]);
    check(diff < 1e-10, || format!("cases III and IV differ by {diff}"))?;
    Ok(format!(
        "F_W,max = {:.6} / {:.6} / {:.6} / {:.6}, III vs IV {diff:.1e}",
        found[0], found[1], found[2], found[3]
    ))
}

fn coherence_law(out: &mut Produced) -> Outcome {
    let spec = transform::ghz_preset(&GhzParams::balanced()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for g in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let gram = GramMatrix::uniform(3, g).map_err(|e| e.to_string())?;
        let (rho, _) = simulate(&spec, &gram).map_err(|e| e.to_string())?;
        out.keep(format!("ghz g = {g}"), &rho);
        let f = fidelity_pure(&rho, &TargetState::ghz(3)).map_err(|e| e.to_string())?;
        let err = (f - (1.0 + g * g * g) / 2.0).abs();
        check(err < 1e-9, || format!("g = {g}: F = {f}"))?;
        worst = worst.max(err);
    }
    Ok(format!("max |F - (1+g^3)/2| = {worst:.1e} over 5 points"))
}

fn oracle_equivalence(out: &mut Produced) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let (mut worst, mut worst_p, mut compared) = (0.0f64, 0.0f64, 0);
    for i in 0..200 {
        let spec = random_spec(&mut rng, 3);
        let gram = random_gram(&mut rng, 3, 1 + i % 3);
        match (simulate(&spec, &gram), brute_density_matrix(&spec, &gram)) {
            (Ok((rho, p)), Ok(reference)) => {
                worst = worst
                    .max(max_entry_diff(&rho, &reference.rho))
                    .max((p - reference.p_success).abs());
                out.keep(format!("random instance {i}"), &rho);
                compared += 1;
            }
            (Err(Error::PostselectionImpossible(_)), Err(Error::PostselectionImpossible(_))) => {}
            (a, b) => return Err(format!("instance {i}: {:?} vs {:?}", a.err(), b.err())),
        }
        let intensities: Vec<Vec<Complex64>> = (0..3)
            .map(|k| {
                (0..3)
                    .map(|j| Complex64::new(spec.amplitude(k, j).norm_sqr(), 0.0))
                    .collect()
            })
            .collect();
        let expected = permanent(&intensities).map_err(|e| e.to_string())?.re;
        match simulate(&spec, &GramMatrix::identity(3)) {
            Ok((rho, p)) => {
                worst_p = worst_p.max((p - expected).abs());
                out.keep(format!("random instance {i}, identity"), &rho);
            }
            Err(Error::PostselectionImpossible(_)) if expected <= 1e-15 => {}
            Err(e) => return Err(format!("instance {i}: {e}")),
        }
    }
    check(worst < 1e-10, || format!("pipeline vs oracle {worst}"))?;
    check(worst_p < 1e-10, || format!("p_success vs permanent {worst_p}"))?;
    Ok(format!(
        "{compared}/200 normalized (rest impossible in both), max diff {worst:.1e}, permanent diff {worst_p:.1e}"
    ))
}

fn phase_recovery(out: &mut Produced) -> Outcome {
    let (phi1, phi2) = (-0.21 * PI, 0.28 * PI);
    let rho = TargetState::w(phi1, phi2).density();
    out.keep("pure W with phases", &rho);
    let opt = optimize_w_phases(&rho).map_err(|e| e.to_string())?;
    let (e1, e2) = ((opt.phi1 - phi1).abs(), (opt.phi2 - phi2).abs());
    check(e1 < 1e-3 && e2 < 1e-3, || {
        format!("recovered ({}, {})", opt.phi1, opt.phi2)
    })?;
    check(opt.fidelity >= 1.0 - 1e-9, || format!("f_max = {}", opt.fidelity))?;
    Ok(format!(
        "phases ({:.4}pi, {:.4}pi), errors {e1:.1e}/{e2:.1e} rad, f_max = {:.12}",
        opt.phi1 / PI,
        opt.phi2 / PI,
        opt.fidelity
    ))
}

fn tomography_round_trip(out: &mut Produced) -> Outcome {
    let settings = all_pauli_settings(3);
    let ghz = TargetState::ghz(3).density();
    let counts = simulate_counts(&ghz, &settings, 100_000, 20240611).map_err(|e| e.to_string())?;
    let mle = reconstruct_mle(&counts, &MleOptions::default()).map_err(|e| e.to_string())?;
    out.keep("MLE from GHZ counts", &mle.rho);
    let f = fidelity_pure(&mle.rho, &TargetState::ghz(3)).map_err(|e| e.to_string())?;
    check(f >= 0.99, || format!("F = {f}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let options = MleOptions {
        max_iters: 500,
        ..MleOptions::default()
    };
    for k in 0..50 {
        let shots = 1000;
        let entries = settings
            .iter()
            .map(|s| {
                let mut counts = vec![0u64; 8];
                for _ in 0..shots {
                    counts[rng.random_range(0..8)] += 1;
                }
                SettingCounts {
                    setting: s.clone(),
                    counts,
                }
            })
            .collect();
        let table = CountsTable {
            num_qubits: 3,
            shots_per_setting: shots,
            seed: None,
            entries,
        };
        let fuzz = reconstruct_mle(&table, &options).map_err(|e| format!("fuzz {k}: {e}"))?;
        out.keep(format!("MLE fuzz {k}"), &fuzz.rho);
    }
    Ok(format!(
        "F(MLE, GHZ) = {f:.6} after {} iterations; 50 fuzz inputs reconstructed",
        mle.iterations
    ))
}

fn invariant_suite(produced: &Produced) -> Outcome {
    for (label, rho) in &produced.0 {
        rho.check_invariants().map_err(|e| format!("{label}: {e}"))?;
    }
    Ok(format!(
        "{} density matrices Hermitian, PSD and unit-trace",
        produced.0.len()
    ))
}

type Criterion = (&'static str, Duration, fn(&mut Produced) -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("GHZ generation", Duration::from_secs(1), ghz_generation),
        ("GHZ decay", Duration::from_secs(1), ghz_decay),
        ("W case ladder", Duration::from_secs(5), w_ladder),
        ("coherence law", Duration::from_secs(5), coherence_law),
        ("oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        ("phase recovery", Duration::from_secs(5), phase_recovery),
        ("tomography round trip", Duration::from_secs(60), tomography_round_trip),
    ];
    let mut produced = Produced::default();
    let mut failures = 0;
    let mut report = |index: usize, name: &str, result: Outcome, elapsed: Duration| match result {
        Ok(detail) => println!("criterion {index} [{name}]: PASS ({elapsed:.2?}) {detail}"),
        Err(why) => {
            failures += 1;
            println!("criterion {index} [{name}]: FAIL ({elapsed:.2?}) {why}");
        }
    };
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run(&mut produced);
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| within(*limit, elapsed).map(|()| detail));
        report(i + 1, name, result, elapsed);
    }
    let start = Instant::now();
    let result = invariant_suite(&produced);
    report(8, "invariant suite", result, start.elapsed());

    if failures > 0 {
        println!("acceptance: {failures} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 8 criteria passed");
}
