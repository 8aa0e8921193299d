use elscreen::el_logratio;
use elscreen_web::{dual_curve, parse_values, profile_view, screen_view};

#[test]
fn screen_view_marks_selection() {
    let v = screen_view(1, 200, 40, 5, 6).unwrap();
    assert_eq!(v.names.len(), 40);
    assert_eq!(v.selected.iter().filter(|s| **s).count(), 6);
    for j in 0..40 {
        assert_eq!(v.selected[j], v.ranks[j] <= 6);
        assert!(v.stats[j].is_some() != v.infinite[j]);
    }
    // X1 and X4 are strong at this size
    assert!(v.ranks[0] <= 6 && v.ranks[3] <= 6, "{:?}", &v.ranks[..4]);
    assert_eq!(v, screen_view(1, 200, 40, 5, 6).unwrap());
}

#[test]
fn design_five_uses_the_index() {
    let v = screen_view(5, 150, 20, 1, 4).unwrap();
    assert_eq!(v.names.len(), 20);
    assert!(profile_view(5, 150, 20, 1, 0).is_err());
}

#[test]
fn limits_and_bad_input_are_errors() {
    assert!(screen_view(1, 5000, 20, 0, 4).is_err());
    assert!(screen_view(9, 100, 20, 0, 4).is_err());
    assert!(profile_view(1, 100, 20, 0, 20).is_err());
    assert!(parse_values("1, x").is_err());
    assert!(parse_values("  ").is_err());
    assert!(parse_values("1 inf").is_err());
    assert_eq!(parse_values("1, -2\n3.5").unwrap(), vec![1.0, -2.0, 3.5]);
}

#[test]
fn profile_max_is_the_reported_stat() {
    let v = profile_view(1, 150, 10, 3, 0).unwrap();
    assert_eq!(v.points.len(), 150);
    assert!(v.points.windows(2).all(|w| w[0] <= w[1]));
    let best = v.values.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if !v.infinite.iter().any(|b| *b) {
        let stat: f64 = v.stat.parse().unwrap();
        assert!((best - stat).abs() <= 1e-9 * stat.max(1.0));
    }
    assert!(v.bandwidth > 0.0);
}

#[test]
fn dual_curve_peaks_at_the_solution() {
    let v = [0.8, -0.3, 1.4, -1.1, 0.2, -0.6, 0.9];
    let c = dual_curve(&v).unwrap();
    let out = el_logratio(&v).unwrap();
    let peak = c.value.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(peak <= out.logratio + 1e-9);
    assert!(peak >= out.logratio - 0.05 * out.logratio.max(1.0));
    let (lo, hi) = c.feasible;
    assert!((lo.unwrap() + 1.0 / 1.4).abs() < 1e-12 && (hi.unwrap() - 1.0 / 1.1).abs() < 1e-12);
    assert!(c.lambda.iter().all(|l| *l > lo.unwrap() && *l < hi.unwrap()));
    let lh = c.lambda_hat.unwrap();
    assert!(lh > lo.unwrap() && lh < hi.unwrap());
}

#[test]
fn one_signed_values_are_infinite() {
    let c = dual_curve(&[1.0, 2.0, 0.5]).unwrap();
    assert_eq!(c.logratio, "inf");
    assert!(c.lambda_hat.is_none());
    assert_eq!(c.feasible.1, None);
    // the objective keeps increasing to the right
    assert!(c.value.windows(2).all(|w| w[1] > w[0]));
    let z = dual_curve(&[0.0, 0.0]).unwrap();
    assert_eq!(z.logratio, "0");
    assert!(z.value.iter().all(|v| *v == 0.0));
}
