use proptest::prelude::*;
use teich_lab::dimension::*;
use teich_lab::Error;

const LOG2_LOG3: f64 = std::f64::consts::LN_2 / 1.098_612_288_668_109_8;

#[test]
fn synthetic_families() {
    let cantor = estimate_dimension(&synthetic::cantor(12)).unwrap();
    assert!((cantor.dim_upper - LOG2_LOG3).abs() < 0.05, "{cantor:?}");
    for t in [0.5, 1.0, 1.7] {
        let full = estimate_dimension(&synthetic::full(t, 10)).unwrap();
        assert!((full.dim_upper - 1.0).abs() < 0.02, "t = {t}: {full:?}");
        let point = estimate_dimension(&synthetic::singleton(t, 10)).unwrap();
        assert!(point.dim_upper.abs() < 0.02);
    }
}

#[test]
fn full_set_hausdorff_sums_are_the_length() {
    let r = synthetic::full(1.0, 8);
    for s in hausdorff_sum_check(&r, 1.0).unwrap() {
        assert!((s.sum - 2.0).abs() < 2.0 * (-2.0 * s.n as f64).exp() * 2.0, "{s:?}");
    }
    assert!(hausdorff_sum_check(&r, 0.0).is_err());
    assert!(hausdorff_sum_check(&r, 1.5).is_err());
}

#[test]
fn cantor_tails_split_at_the_dimension() {
    let r = synthetic::cantor(40);
    let d = estimate_dimension(&r).unwrap().dim_upper;
    let above = hausdorff_sum_check(&r, (d + 0.05).min(1.0)).unwrap();
    assert!(above.windows(2).all(|w| w[1].sum < w[0].sum));
    assert!(above.last().unwrap().sum < 0.2 * above[0].sum);
    let below = hausdorff_sum_check(&r, d - 0.05).unwrap();
    assert!(below.windows(2).all(|w| w[1].sum > w[0].sum));
}

#[test]
fn appending_levels_to_nested_families_never_raises_the_estimate() {
    // A limsup-style family whose counts grow fast at first and then settle to 2^n.
    let t = synthetic::cantor_t();
    let counts: Vec<(usize, u64)> = (1..=14)
        .map(|n| (n, if n <= 4 { 3u64.pow(n as u32) } else { 81 * (1 << (n - 4)) }))
        .collect();
    let mut last = f64::INFINITY;
    for k in 6..=counts.len() {
        let r = CoverReport::from_counts(t, WidthConvention::Radius, &counts[..k]).unwrap();
        let d = estimate_dimension_with(&r, FitWindow::All).unwrap().dim_upper;
        assert!(d <= last + 1e-12, "{d} after {last}");
        last = d;
    }
}

#[test]
fn convention_only_changes_recorded_widths() {
    let counts = [(1, 3), (2, 9), (3, 20), (4, 50)];
    let a = CoverReport::from_counts(1.0, WidthConvention::Radius, &counts).unwrap();
    let b = CoverReport::from_counts(1.0, WidthConvention::Diameter, &counts).unwrap();
    for (x, y) in a.levels.iter().zip(&b.levels) {
        assert!((2.0 * x.width - y.width).abs() < 1e-15);
    }
    assert_eq!(estimate_dimension(&a).unwrap().slope, estimate_dimension(&b).unwrap().slope);
    assert!(matches!(
        CoverReport::from_counts(1.0, WidthConvention::Radius, &[(1, 100)]),
        Err(Error::InconsistentLevels(_))
    ));
}

proptest! {
    #[test]
    fn slope_is_scale_equivariant(
        counts in prop::collection::vec(1u64..1000, 4..10),
        factor in 1u64..50,
    ) {
        let t = 4.0;
        let base: Vec<(usize, u64)> = counts.iter().enumerate().map(|(i, &c)| (i + 2, c)).collect();
        let scaled: Vec<(usize, u64)> = base.iter().map(|&(n, c)| (n, c * factor)).collect();
        let a = estimate_dimension(&CoverReport::from_counts(t, WidthConvention::Radius, &base).unwrap()).unwrap();
        let b = estimate_dimension(&CoverReport::from_counts(t, WidthConvention::Radius, &scaled).unwrap()).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert!((b.intercept - a.intercept - (factor as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_exact_exponentials(rate in 0.0f64..1.5, c in 100.0f64..300.0) {
        let t = 2.0;
        let counts: Vec<(usize, u64)> = (3..=14)
            .map(|n| (n, (c * (rate * n as f64).exp()).round() as u64))
            .collect();
        let r = CoverReport::from_counts(t, WidthConvention::Radius, &counts).unwrap();
        let d = estimate_dimension(&r).unwrap();
        prop_assert!((d.dim_upper - rate / (2.0 * t)).abs() < 0.01);
    }
}
