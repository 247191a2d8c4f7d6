//! The registered experiments. Each `prepare` function validates its parameters
//! and returns the computation as a closure.

use itertools::Itertools;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parse_params, substream, Artifacts, Prepared};
use crate::dimension::{estimate_dimension_with, CoverReport, FitWindow, WidthConvention};
use crate::dynamics::{
    birkhoff_average_continuous, correlation_decay_test, deviation_masks,
    independence_diagnostic, recurrence_mask, recurrent_mask, torus_cover_counts, BadSetMask,
    DeviationParams, DirectionGrid, FlowMode, ObservableF, Orbit, RecurrenceParams, Shear,
};
use crate::error::{Error, Result};
use crate::iet::Schedule;
use crate::permutation::Permutation;
use crate::rational::{self, Rational};
use crate::surface::{
    builtin, HeightFunction, HorocycleMode, QuadratureOptions, SL2Matrix, TranslationSurface,
};
use crate::{Iet, SuspensionData};

fn num(x: f64) -> String {
    format!("{x}")
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn surface_named(name: &str) -> Result<TranslationSurface> {
    builtin(name).map_err(|e| config_err(e.to_string()))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(config_err(msg))
    }
}

// ---------------------------------------------------------------- typew_scan

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Family {
    #[default]
    Reversal,
    AllIrreducible,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeWParams {
    #[serde(default = "defaults::d_min")]
    d_min: usize,
    #[serde(default = "defaults::d_max")]
    d_max: usize,
    #[serde(default)]
    family: Family,
}

mod defaults {
    pub fn d_min() -> usize {
        3
    }
    pub fn d_max() -> usize {
        11
    }
    pub fn n_max() -> usize {
        1000
    }
    pub fn geometric() -> crate::iet::Schedule {
        crate::iet::Schedule::Geometric { ratio: 2.0 }
    }
    pub fn every() -> crate::iet::Schedule {
        crate::iet::Schedule::Every
    }
    pub fn threshold() -> String {
        "1/10".into()
    }
    pub fn samples() -> usize {
        1000
    }
    pub fn shears() -> usize {
        21
    }
    pub fn connection_n() -> Vec<usize> {
        vec![1, 5, 20]
    }
    pub fn torus() -> String {
        "square_torus".into()
    }
    pub fn half() -> f64 {
        0.5
    }
    pub fn margin() -> f64 {
        0.1
    }
    pub fn times() -> Vec<f64> {
        vec![2.0, 3.0, 4.0]
    }
    pub fn basepoints() -> usize {
        50
    }
    pub fn alpha_max() -> f64 {
        10.0
    }
    pub fn max_stretch() -> f64 {
        3.0
    }
    pub fn circle_nodes() -> usize {
        4096
    }
    pub fn center() -> [f64; 2] {
        [0.0, 1.5]
    }
    pub fn radius() -> f64 {
        0.3
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn deltas() -> Vec<f64> {
        (0..=8).map(|k| 0.5 * k as f64).collect()
    }
    pub fn directions() -> usize {
        100
    }
    pub fn total_time() -> f64 {
        50.0
    }
    pub fn dt() -> f64 {
        0.01
    }
    pub fn segment() -> f64 {
        1.5
    }
    pub fn beta() -> f64 {
        0.05
    }
    pub fn levels4() -> Vec<usize> {
        vec![0, 1, 2, 3]
    }
    pub fn segment_dt() -> f64 {
        0.05
    }
    pub fn recurrent_eps() -> f64 {
        0.3
    }
    pub fn eps() -> f64 {
        0.1
    }
    pub fn delta() -> f64 {
        0.9
    }
    pub fn levels12() -> Vec<usize> {
        (1..=12).collect()
    }
}

pub(super) fn typew_scan(params: &serde_json::Value, _seed: u64) -> Result<Prepared> {
    let p: TypeWParams = parse_params(params)?;
    require(2 <= p.d_min && p.d_min <= p.d_max, "need 2 ≤ d_min ≤ d_max")?;
    match p.family {
        Family::Reversal => require(p.d_max <= 10_000, "d_max ≤ 10000 for reversals")?,
        Family::AllIrreducible => require(p.d_max <= 8, "d_max ≤ 8 for all_irreducible")?,
    }
    Ok(Prepared::new(move || {
        let mut rows = Vec::new();
        let mut type_w = 0usize;
        for d in p.d_min..=p.d_max {
            let perms: Vec<Permutation> = match p.family {
                Family::Reversal => vec![Permutation::reversal(d)],
                Family::AllIrreducible => (1..=d)
                    .permutations(d)
                    .filter_map(|images| Permutation::new(images).ok())
                    .filter(Permutation::is_irreducible)
                    .collect(),
            };
            for perm in perms {
                let r = perm.classify_type_w()?;
                type_w += r.type_w as usize;
                rows.push(vec![
                    d.to_string(),
                    perm.to_string(),
                    r.type_w.to_string(),
                    r.trace.iter().join(" "),
                ]);
            }
        }
        let mut a = Artifacts::default();
        a.csv("typew.csv", &["d", "permutation", "type_w", "trace"], &rows)?;
        a.summary = serde_json::json!({ "permutations": rows.len(), "type_w": type_w });
        Ok(a)
    }))
}

// ------------------------------------------------------------------ iet_epsn

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomRotations {
    count: usize,
    max_denominator: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpsnParams {
    #[serde(default)]
    iets: Option<Vec<Iet>>,
    #[serde(default)]
    random_rotations: Option<RandomRotations>,
    #[serde(default = "defaults::n_max")]
    n_max: usize,
    #[serde(default = "defaults::geometric")]
    schedule: Schedule,
}

/// Rotation by `p/q` with `q` uniform in `[2, max_denominator]` and `p` uniform in `[1, q)`.
pub fn random_rotation<R: Rng>(rng: &mut R, max_denominator: u64) -> Iet {
    let q = rng.random_range(2..=max_denominator.max(2));
    let p = rng.random_range(1..q);
    let alpha = Rational::new(p.into(), q.into());
    let one = Rational::from_integer(1.into());
    Iet::new(vec![one - &alpha, alpha], Permutation::new(vec![2, 1]).expect("valid"))
        .expect("positive lengths")
}

pub(super) fn iet_epsn(params: &serde_json::Value, seed: u64) -> Result<Prepared> {
    let p: EpsnParams = parse_params(params)?;
    require((1..=10_000_000).contains(&p.n_max), "need 1 ≤ n_max ≤ 10^7")?;
    let iets = match (p.iets, p.random_rotations) {
        (Some(v), None) => v,
        (None, Some(r)) => {
            require(r.count >= 1 && r.max_denominator >= 2, "need count ≥ 1, max_denominator ≥ 2")?;
            (0..r.count)
                .map(|i| random_rotation(&mut substream(seed, i as u64), r.max_denominator))
                .collect()
        }
        _ => return Err(config_err("give exactly one of iets and random_rotations")),
    };
    let (n_max, schedule) = (p.n_max, p.schedule);
    Ok(Prepared::new(move || {
        let sweeps = iets
            .par_iter()
            .map(|iet| iet.short_intervals_diagnostic(n_max, schedule))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        let mut final_values = Vec::new();
        for (k, (iet, sweep)) in iets.iter().zip(&sweeps).enumerate() {
            for s in sweep {
                rows.push(vec![
                    k.to_string(),
                    iet.lengths().iter().map(rational::format_rational).join(" "),
                    s.n.to_string(),
                    rational::format_rational(&s.epsilon_n),
                    num(s.n_epsilon_f64()),
                ]);
            }
            final_values.push(sweep.last().map(|s| s.n_epsilon_f64()));
        }
        let mut a = Artifacts::default();
        a.csv("epsn.csv", &["iet", "lengths", "n", "epsilon_n", "n_epsilon_n"], &rows)?;
        a.summary = serde_json::json!({ "iets": iets.len(), "final_n_epsilon_n": final_values });
        Ok(a)
    }))
}

// ---------------------------------------------------------- weakmix_pipeline

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeakMixParams {
    iet: Iet,
    #[serde(default = "defaults::n_max")]
    depth: usize,
    #[serde(default = "defaults::n_max")]
    n_max: usize,
    #[serde(default = "defaults::threshold")]
    threshold: String,
    #[serde(default = "defaults::every")]
    schedule: Schedule,
}

pub(super) fn weakmix_pipeline(params: &serde_json::Value, _seed: u64) -> Result<Prepared> {
    let p: WeakMixParams = parse_params(params)?;
    let threshold = rational::parse_rational(&p.threshold)?;
    require(p.depth >= 1 && p.n_max >= 1, "depth and n_max must be ≥ 1")?;
    require(p.n_max <= 10_000_000 && p.depth <= 10_000_000, "depth and n_max ≤ 10^7")?;
    Ok(Prepared::new(move || {
        let report = p.iet.weak_mixing_verdict(p.depth, p.n_max, &threshold)?;
        let sweep = p.iet.short_intervals_diagnostic(p.n_max, p.schedule)?;
        let rows: Vec<Vec<String>> = sweep
            .iter()
            .map(|s| {
                vec![
                    s.n.to_string(),
                    rational::format_rational(&s.epsilon_n),
                    num(s.n_epsilon_f64()),
                ]
            })
            .collect();
        let mut a = Artifacts::default();
        a.csv("epsn.csv", &["n", "epsilon_n", "n_epsilon_n"], &rows)?;
        a.json("verdict.json", &report)?;
        a.summary = serde_json::json!({
            "verdict": report.verdict,
            "tail_max_n_epsilon": rational::format_rational(&report.evidence.tail_max_n_epsilon),
        });
        Ok(a)
    }))
}

// ------------------------------------------------------------ suspend_verify

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuspendParams {
    #[serde(default)]
    suspension: Option<SuspensionData>,
    #[serde(default)]
    shipped_index: Option<usize>,
    #[serde(default = "defaults::samples")]
    samples: usize,
    #[serde(default = "defaults::shears")]
    shears: usize,
    #[serde(default = "defaults::connection_n")]
    connection_n: Vec<usize>,
}

pub(super) fn suspend_verify(params: &serde_json::Value, _seed: u64) -> Result<Prepared> {
    let p: SuspendParams = parse_params(params)?;
    let s = match (p.suspension, p.shipped_index) {
        (Some(s), None) => s,
        (None, idx) => {
            let shipped = SuspensionData::shipped();
            let k = idx.unwrap_or(0);
            shipped
                .get(k)
                .cloned()
                .ok_or_else(|| config_err(format!("shipped_index must be < {}", shipped.len())))?
        }
        _ => return Err(config_err("give at most one of suspension and shipped_index")),
    };
    require((1..=1_000_000).contains(&p.samples), "need 1 ≤ samples ≤ 10^6")?;
    require((1..=10_000).contains(&p.shears), "need 1 ≤ shears ≤ 10^4")?;
    require(p.connection_n.iter().all(|&n| n >= 1), "connection_n entries must be ≥ 1")?;
    let (samples, n_shears, connection_n) = (p.samples, p.shears, p.connection_n);
    Ok(Prepared::new(move || {
        let x = s.suspend()?;
        let tr = s.base_transversal();
        let emp = crate::suspension::first_return_oracle(&x, &tr, samples)?;
        let heights = s.heights();
        let mut rows = Vec::new();
        let (mut image_err, mut time_err) = (0.0f64, 0.0f64);
        for r in &emp.samples {
            let exact = rational::from_f64(r.param)
                .ok_or_else(|| Error::Precondition("non-finite sample".into()))?;
            let image = rational::to_f64(&s.iet().evaluate(&exact)?);
            let h = heights[s.iet().letter_of(&exact)? - 1];
            image_err = image_err.max((image - r.image).abs());
            time_err = time_err.max((h - r.return_time).abs());
            rows.push(vec![num(r.param), num(r.image), num(image), num(r.return_time), num(h)]);
        }
        let eps0 = s.max_symmetric_shear();
        let sigmas: Vec<f64> = if n_shears == 1 {
            vec![0.0]
        } else {
            let half = (n_shears - 1) as f64 / 2.0;
            (0..n_shears)
                .map(|k| (k as f64 - half) / (half + 0.5) * eps0)
                .collect()
        };
        let lp = s.verify_local_product(&sigmas)?;
        let lp_rows: Vec<Vec<String>> = lp
            .samples
            .iter()
            .map(|x| {
                vec![
                    num(x.sigma),
                    num(x.vertex_gap),
                    num(x.holonomy_gap),
                    x.connections.to_string(),
                ]
            })
            .collect();
        let mut conn_rows = Vec::new();
        for &n in &connection_n {
            let c = s.short_interval_saddle_connection(n)?;
            let v = c.connection.holonomy;
            conn_rows.push(vec![
                n.to_string(),
                rational::format_rational(&c.epsilon_n),
                num(v.re),
                num(v.im),
                num(c.renormalized_max_norm()),
            ]);
        }
        let mut a = Artifacts::default();
        a.csv(
            "first_return.csv",
            &["param", "traced_image", "exact_image", "return_time", "height"],
            &rows,
        )?;
        a.csv(
            "local_product.csv",
            &["sigma", "vertex_gap", "holonomy_gap", "connections"],
            &lp_rows,
        )?;
        a.csv(
            "connections.csv",
            &["n", "epsilon_n", "re", "im", "renormalized_max_norm"],
            &conn_rows,
        )?;
        a.summary = serde_json::json!({
            "max_image_error": image_err,
            "max_return_time_error": time_err,
            "breakpoints": emp.breakpoints,
            "max_local_product_discrepancy": lp.max_discrepancy,
        });
        Ok(a)
    }))
}

// ------------------------------------------------------- height_inequalities

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightStudyParams {
    #[serde(default = "defaults::torus")]
    pub surface: String,
    #[serde(default = "defaults::half")]
    pub exponent: f64,
    #[serde(default = "defaults::half")]
    pub a: f64,
    /// Fixed `b` for every check; calibrated from the data when absent.
    #[serde(default)]
    pub b: Option<f64>,
    /// Relative slack added to the largest observed excess.
    #[serde(default = "defaults::margin")]
    pub margin: f64,
    #[serde(default = "defaults::times")]
    pub times: Vec<f64>,
    #[serde(default = "defaults::basepoints")]
    pub basepoints: usize,
    #[serde(default = "defaults::alpha_max")]
    pub alpha_max: f64,
    /// Basepoints are `g_u r_φ x` with `u` uniform in `[0, max_stretch]`.
    #[serde(default = "defaults::max_stretch")]
    pub max_stretch: f64,
    #[serde(default = "defaults::circle_nodes")]
    pub circle_nodes: usize,
    #[serde(default)]
    pub nodes_per_unit: Option<usize>,
}

impl Default for HeightStudyParams {
    fn default() -> Self {
        parse_params(&serde_json::json!({})).expect("defaults are valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightCalibration {
    pub a: f64,
    pub max_excess_circle: f64,
    pub max_excess_interval: f64,
    pub max_excess_gaussian: f64,
    pub b_circle: f64,
    pub b_interval: f64,
    pub b_gaussian: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightRow {
    pub basepoint: usize,
    pub u: f64,
    pub phi: f64,
    pub alpha_x: f64,
    pub t: f64,
    pub check: &'static str,
    pub lhs: f64,
    pub rhs_bound: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightStudy {
    pub calibration: HeightCalibration,
    pub rows: Vec<HeightRow>,
    pub all_satisfied: bool,
}

impl HeightStudyParams {
    fn validate(&self) -> Result<()> {
        surface_named(&self.surface)?;
        require(self.exponent > 0.0 && self.a > 0.0, "exponent and a must be positive")?;
        require(self.margin >= 0.0, "margin must be ≥ 0")?;
        require(!self.times.is_empty() && self.times.iter().all(|&t| t > 0.0 && t <= 8.0), "times must lie in (0, 8]")?;
        require((1..=10_000).contains(&self.basepoints), "need 1 ≤ basepoints ≤ 10^4")?;
        require(self.alpha_max >= 1.0 && self.max_stretch >= 0.0, "need alpha_max ≥ 1, max_stretch ≥ 0")?;
        require(self.circle_nodes >= 8, "circle_nodes must be ≥ 8")?;
        Ok(())
    }
}

/// Circle and horocycle averages of `α = max(1, ℓ^{-s})` over seeded basepoints, with
/// `b` set to the largest excess over `a α(x)` plus the margin, per check.
pub fn height_study(p: &HeightStudyParams, seed: u64) -> Result<HeightStudy> {
    p.validate()?;
    let x = surface_named(&p.surface)?;
    let probe = HeightFunction::new(p.exponent, p.a, 0.0, 0.0);
    let mut bases = Vec::with_capacity(p.basepoints);
    for i in 0..p.basepoints {
        let mut rng = substream(seed, i as u64);
        let mut found = None;
        for _ in 0..1000 {
            let u = rng.random_range(0.0..=p.max_stretch);
            let phi = rng.random_range(0.0..std::f64::consts::PI);
            let m = SL2Matrix::geodesic(u) * SL2Matrix::rotation(phi);
            let alpha = probe.eval_at(&x, &m)?;
            if alpha <= p.alpha_max {
                found = Some((u, phi, x.act(&m)?, alpha));
                break;
            }
        }
        bases.push(found.ok_or_else(|| config_err("no basepoint with α ≤ alpha_max found"))?);
    }
    let opts = QuadratureOptions {
        nodes_per_unit: p.nodes_per_unit,
    };
    let mut raw = Vec::new();
    for (i, (u, phi, y, alpha)) in bases.iter().enumerate() {
        for &t in &p.times {
            let c = probe.verify_circle_average(y, t, p.circle_nodes)?;
            let h = probe.verify_horocycle_average(y, t, HorocycleMode::Interval, opts)?;
            let g = probe.verify_horocycle_average(y, t, HorocycleMode::Gaussian, opts)?;
            for (check, lhs) in [("circle", c.lhs), ("interval", h.lhs), ("gaussian", g.lhs)] {
                raw.push((i, *u, *phi, *alpha, t, check, lhs));
            }
        }
    }
    let excess = |name: &str| {
        raw.iter()
            .filter(|r| r.5 == name)
            .map(|r| r.6 - p.a * r.3)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let calibrate = |e: f64| p.b.unwrap_or(e.max(0.0) * (1.0 + p.margin));
    let (ec, ei, eg) = (excess("circle"), excess("interval"), excess("gaussian"));
    let calibration = HeightCalibration {
        a: p.a,
        max_excess_circle: ec,
        max_excess_interval: ei,
        max_excess_gaussian: eg,
        b_circle: calibrate(ec),
        b_interval: calibrate(ei),
        b_gaussian: calibrate(eg),
    };
    let rows: Vec<HeightRow> = raw
        .into_iter()
        .map(|(basepoint, u, phi, alpha_x, t, check, lhs)| {
            let b = match check {
                "circle" => calibration.b_circle,
                "interval" => calibration.b_interval,
                _ => calibration.b_gaussian,
            };
            let rhs_bound = p.a * alpha_x + b;
            HeightRow {
                basepoint,
                u,
                phi,
                alpha_x,
                t,
                check,
                lhs,
                rhs_bound,
                satisfied: lhs <= rhs_bound,
            }
        })
        .collect();
    let all_satisfied = rows.iter().all(|r| r.satisfied);
    Ok(HeightStudy {
        calibration,
        rows,
        all_satisfied,
    })
}

pub(super) fn height_inequalities(params: &serde_json::Value, seed: u64) -> Result<Prepared> {
    let p: HeightStudyParams = parse_params(params)?;
    p.validate()?;
    Ok(Prepared::new(move || {
        let study = height_study(&p, seed)?;
        let rows: Vec<Vec<String>> = study
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.basepoint.to_string(),
                    num(r.u),
                    num(r.phi),
                    num(r.alpha_x),
                    num(r.t),
                    r.check.to_string(),
                    num(r.lhs),
                    num(r.rhs_bound),
                    r.satisfied.to_string(),
                ]
            })
            .collect();
        let mut a = Artifacts::default();
        a.csv(
            "heights.csv",
            &["basepoint", "u", "phi", "alpha_x", "t", "check", "lhs", "rhs_bound", "satisfied"],
            &rows,
        )?;
        a.json("calibration.json", &study.calibration)?;
        a.summary = serde_json::json!({
            "calibration": study.calibration,
            "all_satisfied": study.all_satisfied,
        });
        Ok(a)
    }))
}

// --------------------------------------------------------- correlation_decay

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrelationParams {
    #[serde(default = "defaults::torus")]
    surface: String,
    #[serde(default = "defaults::center")]
    center: [f64; 2],
    #[serde(default = "defaults::radius")]
    radius: f64,
    #[serde(default = "defaults::one")]
    beta: f64,
    #[serde(default = "defaults::one")]
    t1: f64,
    #[serde(default = "defaults::deltas")]
    deltas: Vec<f64>,
    #[serde(default)]
    nodes_per_unit: Option<usize>,
}

pub(super) fn correlation_decay(params: &serde_json::Value, _seed: u64) -> Result<Prepared> {
    let p: CorrelationParams = parse_params(params)?;
    let x = surface_named(&p.surface)?;
    require(x.lattice().is_some(), "correlation_decay needs a one-point torus")?;
    require(p.center[1] > 0.0 && p.radius > 0.0, "bump centre must lie in the upper half plane")?;
    require(p.t1 >= 0.0 && p.deltas.iter().all(|&d| d >= 0.0), "times must be ≥ 0")?;
    Ok(Prepared::new(move || {
        let orbit = Orbit::new(&x);
        let phi = ObservableF::torus_bump(Complex64::new(p.center[0], p.center[1]), p.radius);
        let pairs: Vec<(f64, f64)> = p.deltas.iter().map(|d| (p.t1, p.t1 + d)).collect();
        let r = correlation_decay_test(&orbit, &phi, p.beta, &pairs, p.nodes_per_unit)?;
        let rows: Vec<Vec<String>> = r
            .samples
            .iter()
            .map(|c| vec![num(c.t1), num(c.t2), num(c.value), num(c.quad_error), c.nodes.to_string()])
            .collect();
        let mut a = Artifacts::default();
        a.csv("correlations.csv", &["t1", "t2", "value", "quad_error", "nodes"], &rows)?;
        a.summary = serde_json::json!({ "slope": r.slope, "intercept": r.intercept, "beta": p.beta });
        Ok(a)
    }))
}

// -------------------------------------------------------- birkhoff_deviation

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviationConfig {
    #[serde(default = "defaults::torus")]
    surface: String,
    #[serde(default = "defaults::one")]
    cap: f64,
    #[serde(default = "defaults::directions")]
    directions: usize,
    #[serde(default = "defaults::total_time")]
    total_time: f64,
    #[serde(default = "defaults::dt")]
    dt: f64,
    #[serde(default = "defaults::segment")]
    segment: f64,
    #[serde(default = "defaults::beta")]
    beta: f64,
    #[serde(default = "defaults::levels4")]
    levels: Vec<usize>,
    #[serde(default = "defaults::segment_dt")]
    segment_dt: f64,
    #[serde(default = "defaults::recurrent_eps")]
    recurrent_eps: f64,
    /// Stand-in for the stratum mean; the median Birkhoff average when absent.
    #[serde(default)]
    reference_value: Option<f64>,
}

pub(super) fn birkhoff_deviation(params: &serde_json::Value, seed: u64) -> Result<Prepared> {
    let p: DeviationConfig = parse_params(params)?;
    let x = surface_named(&p.surface)?;
    require(p.cap > 0.0, "cap must be positive")?;
    require((1..=100_000).contains(&p.directions), "need 1 ≤ directions ≤ 10^5")?;
    require(p.total_time > 0.0 && p.dt > 0.0 && p.dt <= p.total_time / 10.0, "need 0 < dt ≤ total_time/10")?;
    require(p.segment > 0.0 && p.segment_dt > 0.0, "segment and segment_dt must be positive")?;
    require(!p.levels.is_empty() && p.levels.windows(2).all(|w| w[0] < w[1]), "levels must increase strictly")?;
    for &l in &p.levels {
        DirectionGrid::new(l, p.segment).map_err(|e| config_err(e.to_string()))?;
    }
    Ok(Prepared::new(move || {
        let orbit = Orbit::new(&x);
        let f = ObservableF::capped_systole(p.cap);
        let shears: Vec<Shear> = (0..p.directions)
            .map(|i| Shear::random(&mut substream(seed, i as u64), -1.0, 1.0))
            .collect();
        let averages = shears
            .par_iter()
            .map(|s| birkhoff_average_continuous(&orbit, s.clone(), p.total_time, &f, p.dt))
            .collect::<Result<Vec<_>>>()?;
        let reference = match p.reference_value {
            Some(v) => v,
            None => {
                let mut v: Vec<f64> = averages.iter().map(|a| a.value).collect();
                v.sort_by(f64::total_cmp);
                let n = v.len();
                if n % 2 == 1 {
                    v[n / 2]
                } else {
                    0.5 * (v[n / 2 - 1] + v[n / 2])
                }
            }
        };
        let dp = DeviationParams {
            reference_value: reference,
            segment: p.segment,
            dt: p.segment_dt,
        };
        let masks = deviation_masks(&orbit, &f, &dp, p.beta, &p.levels)?;
        let recurrent = p
            .levels
            .iter()
            .map(|&i| recurrent_mask(&orbit, p.segment, p.recurrent_eps, i))
            .collect::<Result<Vec<BadSetMask>>>()?;
        let k = p.levels.len();
        let tuples: Vec<Vec<usize>> = (2..=k.min(3))
            .flat_map(|size| (0..k).combinations(size))
            .collect();
        let independence = if tuples.is_empty() {
            None
        } else {
            Some(independence_diagnostic(&masks, Some(&recurrent), &tuples, None)?)
        };
        let rows: Vec<Vec<String>> = shears
            .iter()
            .zip(&averages)
            .enumerate()
            .map(|(i, (s, a))| vec![i.to_string(), num(s.value()), num(a.value), num(a.quad_error)])
            .collect();
        let mut a = Artifacts::default();
        a.csv("averages.csv", &["index", "s", "value", "quad_error"], &rows)?;
        a.json("masks.json", &serde_json::json!({ "f_masks": masks, "r_masks": recurrent }))?;
        if let Some(ind) = &independence {
            a.json("independence.json", ind)?;
        }
        a.summary = serde_json::json!({
            "reference_value": reference,
            "reference_is_empirical": p.reference_value.is_none(),
            "f_counts": masks.iter().map(BadSetMask::count).collect::<Vec<_>>(),
            "r_counts": recurrent.iter().map(BadSetMask::count).collect::<Vec<_>>(),
            "independence_satisfied_fraction": independence.as_ref().map(|r| r.satisfied_fraction),
        });
        Ok(a)
    }))
}

// ---------------------------------------------------------- divergence_cover

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CoverMethod {
    /// Exact continued-fraction sets, tori only.
    #[default]
    Exact,
    /// One sample per interval of each level's grid.
    Sampled,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverParams {
    #[serde(default = "defaults::torus")]
    surface: String,
    #[serde(default = "defaults::eps")]
    eps: f64,
    #[serde(default = "defaults::one")]
    t: f64,
    #[serde(default = "defaults::delta")]
    delta: f64,
    #[serde(default = "defaults::levels12")]
    levels: Vec<usize>,
    #[serde(default)]
    method: CoverMethod,
    #[serde(default)]
    convention: WidthConvention,
    #[serde(default)]
    window: FitWindow,
}

pub(super) fn divergence_cover(params: &serde_json::Value, _seed: u64) -> Result<Prepared> {
    let p: CoverParams = parse_params(params)?;
    let x = surface_named(&p.surface)?;
    require(p.eps > 0.0 && p.t > 0.0, "eps and t must be positive")?;
    require((0.0..=1.0).contains(&p.delta), "delta must lie in [0, 1]")?;
    require(
        p.levels.len() >= 3 && p.levels[0] >= 1 && p.levels.windows(2).all(|w| w[0] < w[1]),
        "need at least three strictly increasing levels ≥ 1",
    )?;
    match p.method {
        CoverMethod::Exact => require(x.lattice().is_some(), "exact covers need a one-point torus")?,
        CoverMethod::Sampled => {
            for &l in &p.levels {
                DirectionGrid::new(l, p.t).map_err(|e| config_err(e.to_string()))?;
            }
        }
    }
    Ok(Prepared::new(move || {
        let (counts, meets): (Vec<(usize, u64)>, Option<Vec<u64>>) = match p.method {
            CoverMethod::Exact => {
                let lat = x.lattice().expect("checked above");
                let c = torus_cover_counts(&lat, p.eps, p.t, p.delta, &p.levels)?;
                (
                    c.iter().map(|e| (e.level, e.centers)).collect(),
                    Some(c.iter().map(|e| e.meets).collect()),
                )
            }
            CoverMethod::Sampled => {
                let orbit = Orbit::new(&x);
                let mut out = Vec::new();
                for &l in &p.levels {
                    let grid = DirectionGrid::new(l, p.t)?;
                    let rp = RecurrenceParams {
                        eps: p.eps,
                        n: l,
                        t: p.t,
                        delta: p.delta,
                        mode: FlowMode::Horocycle,
                    };
                    out.push((l, recurrence_mask(&orbit, &grid, &rp)?.count() as u64));
                }
                (out, None)
            }
        };
        let report = CoverReport::from_counts(p.t, p.convention, &counts)?;
        let estimate = estimate_dimension_with(&report, p.window)?;
        let rows: Vec<Vec<String>> = report
            .levels
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let mut r = vec![l.n.to_string(), num(l.width), l.count.to_string(), l.total.to_string()];
                if let Some(m) = &meets {
                    r.push(m[k].to_string());
                }
                r
            })
            .collect();
        let mut header = vec!["n", "width", "count", "total"];
        if meets.is_some() {
            header.push("meets");
        }
        let mut a = Artifacts::default();
        a.csv("cover.csv", &header, &rows)?;
        a.json("dimension.json", &estimate)?;
        a.summary = serde_json::json!({
            "dim_upper": estimate.dim_upper,
            "empty": estimate.empty,
            "levels_used": estimate.levels_used,
        });
        Ok(a)
    }))
}
