//! Acceptance suite: prints one PASS/FAIL line per criterion, then fails if any
//! criterion failed. Run with `cargo test --test acceptance -- --nocapture`.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use teich_lab::dimension::{estimate_dimension, synthetic, CoverReport, WidthConvention};
use teich_lab::dynamics::{correlation_decay_test, torus_cover_counts, ObservableF, Orbit};
use teich_lab::experiments::{height_study, random_rotation, run_config_str, HeightStudyParams, RunOptions};
use teich_lab::rational;
use teich_lab::surface::square_torus;
use teich_lab::suspension::first_return_oracle;
use teich_lab::{Permutation, SL2Matrix, SuspensionData};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

// --- 1 ----------------------------------------------------------------------

fn type_w() -> Outcome {
    let mut wrong = Vec::new();
    for d in 3..=11 {
        let w = Permutation::reversal(d).classify_type_w().unwrap().type_w;
        if w != (d % 2 == 1) {
            wrong.push(d);
        }
    }
    outcome(wrong.is_empty(), format!("reversals d = 3..11, misclassified: {wrong:?}"))
}

// --- 2 ----------------------------------------------------------------------

fn three_distance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..20 {
        let iet = random_rotation(&mut rng, 1_000_000);
        let alpha = iet.lengths()[1].clone();
        let mut tracker = iet.partition_tracker();
        for n in 1..=10_000u64 {
            tracker.advance_to(n as usize);
            if n % 97 != 0 && n != 10_000 && n > 50 {
                continue;
            }
            checked += 1;
            if tracker.epsilon() != common::three_distance_min_gap(&alpha, n) {
                mismatches += 1;
            }
        }
        let report = iet.partition_report(10_000).unwrap();
        if report.epsilon_n != common::three_distance_min_gap(&alpha, 10_000) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("20 rotations, {checked} values of n ≤ 10^4, exact mismatches: {mismatches}"),
    )
}

// --- 3, 4 -------------------------------------------------------------------

fn first_return() -> Outcome {
    let mut worst = 0.0f64;
    let shipped = SuspensionData::shipped();
    for s in &shipped {
        let x = s.suspend().unwrap();
        let emp = first_return_oracle(&x, &s.base_transversal(), 1000).unwrap();
        for r in &emp.samples {
            let exact = rational::from_f64(r.param).unwrap();
            let image = rational::to_f64(&s.iet().evaluate(&exact).unwrap());
            worst = worst.max((image - r.image).abs());
        }
    }
    outcome(
        worst <= 1e-8,
        format!("{} suspensions × 1000 points, max |error| {worst:.2e} (tol 1e-8)", shipped.len()),
    )
}

fn local_product() -> Outcome {
    let mut worst = 0.0f64;
    for s in SuspensionData::shipped() {
        let eps0 = s.max_symmetric_shear();
        let shears: Vec<f64> = (-10..=10).map(|k| k as f64 / 10.5 * eps0).collect();
        worst = worst.max(s.verify_local_product(&shears).unwrap().max_discrepancy);
    }
    outcome(worst <= 1e-9, format!("21 shears per suspension, max discrepancy {worst:.2e} (tol 1e-9)"))
}

// --- 5, 6 -------------------------------------------------------------------

fn matrix_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta = rng.random_range(-FRAC_PI_4..FRAC_PI_4);
        let tan = theta.tan();
        let product = SL2Matrix::opposite_horocycle(-tan)
            * SL2Matrix::geodesic(theta.cos().ln())
            * SL2Matrix::horocycle(tan);
        worst = worst.max(product.max_entry_diff(&SL2Matrix::rotation(theta)));
    }
    outcome(worst <= 1e-12, format!("100 angles, max entry error {worst:.2e} (tol 1e-12)"))
}

fn systole_flow() -> Outcome {
    let x = square_torus();
    let orbit = Orbit::new(&x);
    let mut worst = 0.0f64;
    for k in 0..=38 {
        let t = 0.1 + 0.05 * k as f64;
        let g = SL2Matrix::geodesic(t);
        let from_surface = x.act(&g).unwrap().systole().unwrap();
        let from_lattice = orbit.point(&g).unwrap().systole().unwrap();
        worst = worst
            .max((from_surface - (-t).exp()).abs())
            .max((from_lattice - (-t).exp()).abs());
    }
    let mut flips = true;
    for eps in [0.5, 0.3, 0.1, 0.05] {
        let t_star = (1.0f64 / eps).ln();
        let inside = orbit.in_compact_set(&SL2Matrix::geodesic(t_star - 1e-9), eps).unwrap();
        let outside = orbit.in_compact_set(&SL2Matrix::geodesic(t_star + 1e-9), eps).unwrap();
        flips &= inside && !outside;
    }
    outcome(
        worst <= 1e-9 && flips,
        format!("t ∈ [0.1, 2]: max |ℓ − e^-t| {worst:.2e} (tol 1e-9); K_ε flips at log(1/ε) ± 1e-9: {flips}"),
    )
}

// --- 7 ----------------------------------------------------------------------

fn heights() -> Outcome {
    let params = HeightStudyParams::default();
    let study = height_study(&params, 0).unwrap();
    let fresh = serde_json::to_value(&study.calibration).unwrap();
    let committed = common::golden("height_calibration.json", &fresh);
    let keys = ["b_circle", "b_interval", "b_gaussian"];
    let mut drift = 0.0f64;
    for k in keys {
        let (a, b) = (fresh[k].as_f64().unwrap(), committed[k].as_f64().unwrap());
        drift = drift.max((a - b).abs() / b.abs().max(1e-12));
    }
    // Holdout basepoints against the committed constants; reported only.
    let holdout = height_study(&params, 1).unwrap();
    let holdout_ok = holdout.rows.iter().filter(|r| {
        let b = committed[format!("b_{}", r.check)].as_f64().unwrap();
        r.lhs <= params.a * r.alpha_x + b
    });
    let holdout_frac = holdout_ok.count() as f64 / holdout.rows.len() as f64;
    outcome(
        study.all_satisfied && drift <= 1e-6,
        format!(
            "{} checks satisfied: {}; b (circle, interval, gaussian) = ({:.4}, {:.4}, {:.4}); \
             golden drift {drift:.1e} (tol 1e-6); holdout seed satisfied {:.1}%",
            study.rows.len(),
            study.all_satisfied,
            study.calibration.b_circle,
            study.calibration.b_interval,
            study.calibration.b_gaussian,
            100.0 * holdout_frac
        ),
    )
}

// --- 8 ----------------------------------------------------------------------

fn correlation() -> Outcome {
    let orbit = Orbit::new(&square_torus());
    let phi = ObservableF::torus_bump(Complex64::new(0.0, 1.5), 0.3);
    let pairs: Vec<(f64, f64)> = (0..=8).map(|k| (1.0, 1.0 + 0.5 * k as f64)).collect();
    let r = correlation_decay_test(&orbit, &phi, 1.0, &pairs, None).unwrap();
    let slope = r.slope.unwrap_or(f64::NAN);
    outcome(slope <= -1.5, format!("slope {slope:.3} (need ≤ −1.5)"))
}

// --- 9 ----------------------------------------------------------------------

fn cover_dimension(delta: f64) -> (teich_lab::dimension::DimensionEstimate, Vec<u64>) {
    let lat = square_torus().lattice().unwrap();
    let levels: Vec<usize> = (1..=12).collect();
    let counts = torus_cover_counts(&lat, 0.1, 1.0, delta, &levels).unwrap();
    let pairs: Vec<(usize, u64)> = counts.iter().map(|c| (c.level, c.centers)).collect();
    let report = CoverReport::from_counts(1.0, WidthConvention::Radius, &pairs).unwrap();
    (estimate_dimension(&report).unwrap(), pairs.iter().map(|p| p.1).collect())
}

fn divergence_cover() -> Outcome {
    let (est, counts) = cover_dimension(0.9);
    let (companion, companion_counts) = cover_dimension(0.5);
    outcome(
        est.dim_upper <= 0.75,
        format!(
            "δ = 0.9: dim_upper {:.3} (need ≤ 0.75), empty: {} (counts {:?}); \
             δ = 0.5 companion, not asserted: dim_upper {:.3}, top count {}",
            est.dim_upper,
            est.empty,
            counts,
            companion.dim_upper,
            companion_counts.last().unwrap()
        ),
    )
}

// --- 10 ---------------------------------------------------------------------

fn synthetics() -> Outcome {
    let cantor = estimate_dimension(&synthetic::cantor(12)).unwrap().dim_upper;
    let full = estimate_dimension(&synthetic::full(1.0, 10)).unwrap().dim_upper;
    let point = estimate_dimension(&synthetic::singleton(1.0, 10)).unwrap().dim_upper;
    let target = 2f64.ln() / 3f64.ln();
    outcome(
        (cantor - target).abs() <= 0.05 && (full - 1.0).abs() <= 0.02 && point.abs() <= 0.02,
        format!("cantor {cantor:.4} (target {target:.4} ± 0.05), full {full:.4} (1 ± 0.02), singleton {point:.4} (0 ± 0.02)"),
    )
}

// --- 11 ---------------------------------------------------------------------

fn small_configs() -> Vec<serde_json::Value> {
    vec![
        json!({"experiment": "typew_scan", "params": {"d_max": 7}}),
        json!({"experiment": "iet_epsn", "seed": 9,
               "params": {"random_rotations": {"count": 3, "max_denominator": 100000}, "n_max": 2000}}),
        json!({"experiment": "weakmix_pipeline",
               "params": {"iet": {"lengths": ["1/3", "1/4", "5/12"], "perm": [3, 2, 1]}, "depth": 100, "n_max": 200}}),
        json!({"experiment": "suspend_verify", "params": {"shipped_index": 4, "samples": 200, "shears": 5}}),
        json!({"experiment": "height_inequalities", "seed": 4, "params": {"basepoints": 3, "times": [2.0]}}),
        json!({"experiment": "correlation_decay", "params": {"deltas": [0.0, 1.0, 2.0]}}),
        json!({"experiment": "birkhoff_deviation", "seed": 11,
               "params": {"directions": 8, "total_time": 10.0, "dt": 0.02, "levels": [0, 1, 2]}}),
        json!({"experiment": "divergence_cover", "params": {"delta": 0.5, "levels": [1, 2, 3, 4, 5, 6]}}),
    ]
}

fn csv_bodies(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for config in small_configs() {
        let name = config["experiment"].as_str().unwrap().to_string();
        let text = config.to_string();
        let runs: Vec<_> = [1, 4]
            .iter()
            .map(|&threads| {
                let dir = root.path().join(format!("{name}-{threads}"));
                let opts = RunOptions {
                    out_dir: dir.clone(),
                    threads: Some(threads),
                    seed: None,
                };
                run_config_str(&text, &opts).unwrap();
                csv_bodies(&dir)
            })
            .collect();
        files += runs[0].len();
        if runs[0] != runs[1] || runs[0].is_empty() {
            differing.push(name);
        }
    }
    outcome(
        differing.is_empty(),
        format!("8 experiments on 1 and 4 threads, {files} CSV files; differing: {differing:?}"),
    )
}

/// Name, runtime budget and check.
type Criterion = (&'static str, Duration, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("type-W ground truth", Duration::from_secs(1), type_w),
        ("three-distance oracle", Duration::from_secs(60), three_distance),
        ("first-return oracle", Duration::from_secs(120), first_return),
        ("local product structure", Duration::from_secs(600), local_product),
        ("matrix reduction identity", Duration::from_secs(1), matrix_identity),
        ("systole under flow", Duration::from_secs(600), systole_flow),
        ("height-function inequalities", Duration::from_secs(600), heights),
        ("correlation decay", Duration::from_secs(300), correlation),
        ("divergence-on-average cover", Duration::from_secs(1800), divergence_cover),
        ("dimension estimator calibration", Duration::from_secs(10), synthetics),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let ok = o.passed && elapsed <= *budget;
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s of {}s]",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !ok {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
