//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runtime bounds are checked alongside the numerical ones.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use weakrev::harness::cli::run_with;
use weakrev::harness::{run_fig2, run_fig3, ExperimentConfig, NoisePreset};
use weakrev::info::{estimation_fidelity_analytic, estimation_fidelity_mc, strategy_dominance_scan, GuessStrategy};
use weakrev::measurement::{
    partial_collapse, reversal_op, reversal_op_composed, weak_ops, PartialCollapseStrength, ReversalChain,
};
use weakrev::qubit::{fidelity_pure, max_abs, Mat2};
use weakrev::rng;
use weakrev::tomography::{mle_state, simulate_counts, MeasurementSetting, NoiseModel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn strength(v: f64) -> PartialCollapseStrength {
    PartialCollapseStrength::new(v).unwrap()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac1_identities() -> Outcome {
    let mut worst_completeness = 0.0f64;
    let mut worst_reversal = 0.0f64;
    for i in 0..50 {
        let p = strength(i as f64 / 50.0);
        let (m1, m2) = weak_ops(p);
        let sum = m1.effect() + m2.effect() - Mat2::identity();
        worst_completeness = worst_completeness.max(max_abs(&sum));
        let target = Mat2::identity().scale((1.0 - p.value()).sqrt());
        for rev in [reversal_op(p).unwrap(), reversal_op_composed(p).unwrap()] {
            worst_reversal = worst_reversal.max(max_abs(&(rev.matrix() * m2.matrix() - target)));
        }
    }
    check(
        worst_completeness < 1e-14 && worst_reversal < 1e-14,
        format!("completeness {worst_completeness:e}, reversal {worst_reversal:e}"),
    )
}

fn ac2_closed_form() -> Outcome {
    let states = rng::haar_states(1000, 2);
    let mut worst = 0.0f64;
    for k in 1..=9 {
        let pv = k as f64 / 10.0;
        for s in &states {
            let (closed, _) = partial_collapse(s, strength(pv)).unwrap();
            // Oracle: apply diag(1, √(1-p)) and renormalize by hand.
            let a = s.alpha();
            let b = s.beta() * (1.0 - pv).sqrt();
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            worst = worst
                .max((closed.alpha() - a / n).norm())
                .max((closed.beta() - b / n).norm());
        }
    }
    check(worst < 1e-12, format!("max amplitude deviation {worst:e}"))
}

fn ac3_state_independent_success() -> Outcome {
    let states = rng::haar_states(1000, 3);
    let mut worst = 0.0f64;
    for pv in [0.1, 0.4, 0.6, 0.895, 0.95] {
        let chain = ReversalChain::new(strength(pv)).unwrap();
        for s in &states {
            worst = worst.max((chain.success_probability(s) - (1.0 - pv)).abs());
        }
    }
    let p = strength(0.6);
    let psi = states[0];
    let summary = weakrev::harness::experiments::run_trajectories(&psi, p, 1_000_000, 33).unwrap();
    let z = (summary.success_frequency() - 0.4) / summary.success_sigma();
    check(
        worst < 1e-12 && z.abs() < 3.0,
        format!("analytic deviation {worst:e}, sampled z = {z:.3}"),
    )
}

fn noiseless_config() -> ExperimentConfig {
    ExperimentConfig::default().with_noise_preset(NoisePreset::Off)
}

fn ac4_noiseless_recovery() -> Outcome {
    let rows = run_fig2(&noiseless_config()).map_err(|e| e.to_string())?;
    let mut min = f64::INFINITY;
    for r in &rows {
        match &r.outcome {
            Ok(v) => min = min.min(v.fidelity_initial_vs_recovered),
            Err(e) => return Err(format!("{} at p = {} failed: {e}", r.state_label, r.p)),
        }
    }
    check(
        rows.len() == 14 * 9 && min >= 1.0 - 1e-6,
        format!("{} cells, min fidelity {min}", rows.len()),
    )
}

fn ac5_noiseless_qpt() -> Outcome {
    let rows = run_fig3(&noiseless_config()).map_err(|e| e.to_string())?;
    if !rows.iter().any(|r| r.p == 0.895) {
        return Err("grid lacks p = 0.895".into());
    }
    let mut worst_entry = 0.0f64;
    let mut min_f = f64::INFINITY;
    for r in &rows {
        let (chi, f) = r.outcome.as_ref().map_err(|e| format!("p = {} failed: {e}", r.p))?;
        let mut ideal = weakrev::tomography::process::Mat4::zeros();
        ideal[(0, 0)] = weakrev::qubit::C64::new(1.0, 0.0);
        worst_entry = worst_entry.max(max_abs(&(chi.matrix() - ideal)));
        min_f = min_f.min(*f);
    }
    check(
        worst_entry < 1e-6 && min_f >= 1.0 - 1e-6,
        format!("max |χ - χ_ideal| {worst_entry:e}, min F {min_f}"),
    )
}

fn ac6_paper_like() -> Outcome {
    let cfg = ExperimentConfig::default().with_noise_preset(NoisePreset::PaperLike);
    let in_band = |p: f64| (0.4..=0.9).contains(&p);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut n = 0;
    for r in run_fig2(&cfg)
        .map_err(|e| e.to_string())?
        .iter()
        .filter(|r| in_band(r.p))
    {
        let v = r
            .outcome
            .as_ref()
            .map_err(|e| format!("fig2 {} p = {}: {e}", r.state_label, r.p))?;
        lo = lo.min(v.fidelity_initial_vs_recovered);
        hi = hi.max(v.fidelity_initial_vs_recovered);
        n += 1;
    }
    let mut lo3 = f64::INFINITY;
    let mut hi3 = f64::NEG_INFINITY;
    for r in run_fig3(&cfg)
        .map_err(|e| e.to_string())?
        .iter()
        .filter(|r| in_band(r.p))
    {
        let f = r.process_fidelity().ok_or_else(|| format!("fig3 p = {} failed", r.p))?;
        lo3 = lo3.min(f);
        hi3 = hi3.max(f);
        n += 1;
    }
    let inside = |a: f64, b: f64| a >= 0.93 && b <= 1.0;
    check(
        inside(lo, hi) && inside(lo3, hi3),
        format!("{n} values; recovery in [{lo:.4}, {hi:.4}], process in [{lo3:.4}, {hi3:.4}]"),
    )
}

fn ac7_information_gain() -> Outcome {
    let mut worst_z = 0.0f64;
    let mut worst_se = 0.0f64;
    for k in 0..=10 {
        let p = strength(k as f64 / 10.0);
        for (i, strategy) in GuessStrategy::BOTH.into_iter().enumerate() {
            let mc = estimation_fidelity_mc(strategy, p, 1_000_000, rng::derive_seed(77, &[k, i as u64])).unwrap();
            let exact = estimation_fidelity_analytic(strategy, p).g_avg;
            let se = mc.std_error.unwrap();
            worst_se = worst_se.max(se);
            if se > 0.0 {
                worst_z = worst_z.max((mc.g_avg - exact).abs() / se);
            } else if mc.g_avg != exact {
                return Err(format!("{strategy:?} p = {p}: zero spread but {} ≠ {exact}", mc.g_avg));
            }
        }
    }
    let ends = [
        estimation_fidelity_analytic(GuessStrategy::I, strength(0.0)).g_avg == 0.5,
        estimation_fidelity_analytic(GuessStrategy::II, strength(0.0)).g_avg == 0.5,
        estimation_fidelity_analytic(GuessStrategy::I, strength(1.0)).g_avg == 2.0 / 3.0,
        estimation_fidelity_analytic(GuessStrategy::II, strength(1.0)).g_avg == 2.0 / 3.0,
    ];
    // The widest per-sample spread is σ = 1/√12 (strategy II at p = 0, where
    // G = |α|² is uniform), so n = 10⁶ gives se ≤ 2.9e-4.
    check(
        worst_z < 3.0 && worst_se < 3e-4 && ends.iter().all(|&b| b),
        format!(
            "max |MC - exact|/se {worst_z:.3}, max se {worst_se:.2e}, endpoints exact: {}",
            ends.iter().all(|&b| b)
        ),
    )
}

fn ac8_dominance() -> Outcome {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let rows = strategy_dominance_scan(&grid).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut min_interior = f64::INFINITY;
    for r in &rows {
        worst = worst.max((r.difference - (r.p - r.p * r.p) / 6.0).abs());
        if r.p > 0.0 && r.p < 1.0 {
            min_interior = min_interior.min(r.difference);
        }
    }
    check(
        worst < 1e-12 && min_interior > 0.0,
        format!("max deviation {worst:e}, min interior difference {min_interior:e}"),
    )
}

fn ac9_tomography_roundtrip() -> Outcome {
    let noise = NoiseModel {
        shots_per_setting: 100_000,
        ..NoiseModel::default()
    };
    let states = rng::haar_states(200, 9);
    let mut sum = 0.0;
    let mut min_eig = f64::INFINITY;
    for (i, s) in states.iter().enumerate() {
        let counts = simulate_counts(
            &s.density(),
            &MeasurementSetting::standard(),
            &noise,
            rng::derive_seed(9, &[i as u64]),
        )
        .map_err(|e| e.to_string())?;
        let rho = mle_state(&counts).map_err(|e| e.to_string())?;
        sum += fidelity_pure(s, &rho);
        min_eig = min_eig.min(rho.eigenvalues()[0]);
    }
    let mean = sum / states.len() as f64;
    check(
        mean >= 0.995 && min_eig >= -1e-10,
        format!("mean fidelity {mean:.6}, min eigenvalue {min_eig:e}"),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn ac10_determinism() -> Outcome {
    let commands: [&[&str]; 8] = [
        &["fig2", "--noise", "paper-like"],
        &["fig3", "--noise", "paper-like"],
        &["fig4"],
        &[
            "trajectory",
            "--state",
            "bloch:0.3,-0.5,0.8",
            "--p",
            "0.7",
            "--trials",
            "50000",
        ],
        &["qst", "--state", "amp:0.6,0,0,0.8"],
        &["qpt", "--p", "0.6", "--noise", "paper-like"],
        &["infogain"],
        &["fig2", "--noise", "custom"],
    ];
    for cmd in commands {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let mut args = vec!["weakrev"];
            args.extend_from_slice(cmd);
            let out = dir.path().to_str().unwrap().to_string();
            args.extend(["--seed", "7", "--out", &out]);
            let mut stdout = Vec::new();
            let mut stderr = Vec::new();
            let code = run_with(&args, &mut stdout, &mut stderr);
            if code != 0 {
                return Err(format!("{cmd:?} exited {code}: {}", String::from_utf8_lossy(&stderr)));
            }
            let text = String::from_utf8(stdout).unwrap().replace(&out, "<out>");
            outputs.push((snapshot(dir.path()), text));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{cmd:?} differs between runs"));
        }
        if outputs[0].0.is_empty() {
            return Err(format!("{cmd:?} wrote no files"));
        }
    }
    Ok(format!("{} subcommand runs byte-identical", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "AC1 completeness and reversal identities",
            Some(Duration::from_secs(1)),
            ac1_identities,
        ),
        (
            "AC2 closed-form partial collapse",
            Some(Duration::from_secs(5)),
            ac2_closed_form,
        ),
        (
            "AC3 state-independent reversal probability",
            Some(Duration::from_secs(30)),
            ac3_state_independent_success,
        ),
        (
            "AC4 noiseless recovery",
            Some(Duration::from_secs(120)),
            ac4_noiseless_recovery,
        ),
        (
            "AC5 noiseless process tomography",
            Some(Duration::from_secs(120)),
            ac5_noiseless_qpt,
        ),
        (
            "AC6 paper-like noise band",
            Some(Duration::from_secs(300)),
            ac6_paper_like,
        ),
        (
            "AC7 information-gain formulas",
            Some(Duration::from_secs(60)),
            ac7_information_gain,
        ),
        ("AC8 strategy dominance", None, ac8_dominance),
        (
            "AC9 tomography roundtrip",
            Some(Duration::from_secs(180)),
            ac9_tomography_roundtrip,
        ),
        ("AC10 determinism", None, ac10_determinism),
    ];
    let mut failures = 0;
    for (name, limit, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(msg), Some(limit)) if elapsed > limit => Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}")),
            (r, _) => r,
        };
        match result {
            Ok(msg) => println!("PASS {name}: {msg} ({elapsed:.2?})"),
            Err(msg) => {
                failures += 1;
                println!("FAIL {name}: {msg} ({elapsed:.2?})");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
