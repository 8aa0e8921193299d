use elscreen::screening::EvalPolicy;
use elscreen::simgen::{gen_example, SimulationSpec};
use elscreen::vc::{estimate_nuisance, vc_feature_stat, vc_screen_with_nuisance};
use elscreen::{screen, vc_screen, Dataset, ScreeningConfig, VcConfig};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

fn vc_data(n: usize, p: usize, seed: u64) -> (Dataset, Vec<f64>) {
    let mut rng = elscreen::rng::stream_rng(seed, 30, 0, 0);
    let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let trend: Vec<f64> = z.iter().map(|v| (2.0 * PI * v).sin()).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| trend[i] + cols[0][i] * (2.0 * PI * z[i]).cos() + 0.3 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    (Dataset::new(cols, y, Some(z)).unwrap(), trend)
}

fn same_stat(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-8 * a.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn joint_response_scaling(seed in any::<u64>(), exp in -3i32..=3, neg in any::<bool>()) {
        let c = if neg { -(10f64.powi(exp)) } else { 10f64.powi(exp) };
        let (d, _) = vc_data(80, 5, seed);
        let scaled = d.with_response(d.y().iter().map(|v| c * v).collect()).unwrap();
        let cfg = VcConfig::default();
        let a = vc_screen(&d, &cfg).unwrap();
        let b = vc_screen(&scaled, &cfg).unwrap();
        for (u, v) in a.stats.iter().zip(&b.stats) {
            prop_assert!(same_stat(*u, *v), "{} vs {}", u, v);
        }
    }

    #[test]
    fn feature_scaling(seed in any::<u64>(), c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0]) {
        let (d, _) = vc_data(80, 2, seed);
        let z = d.z().unwrap();
        let cfg = VcConfig::default();
        for j in 0..2 {
            let x = d.column(j);
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            let a = vc_feature_stat(x, d.y(), z, &cfg).unwrap();
            let b = vc_feature_stat(&cx, d.y(), z, &cfg).unwrap();
            prop_assert!(same_stat(a.stat, b.stat), "{} vs {}", a.stat, b.stat);
            prop_assert_eq!(a.argmax_point, b.argmax_point);
        }
    }

    #[test]
    fn row_permutation(seed in any::<u64>()) {
        let (d, _) = vc_data(60, 4, seed);
        let mut perm: Vec<usize> = (0..d.n()).collect();
        let mut rng = elscreen::rng::stream_rng(seed, 31, 0, 0);
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let cfg = VcConfig::default();
        let a = vc_screen(&d, &cfg).unwrap();
        let b = vc_screen(&d.permute_rows(&perm).unwrap(), &cfg).unwrap();
        for (u, v) in a.stats.iter().zip(&b.stats) {
            prop_assert!(same_stat(*u, *v));
        }
        prop_assert_eq!(a.ranks, b.ranks);
    }
}

#[test]
fn nuisance_tracks_smooth_trend() {
    let n = 400;
    let mut rng = elscreen::rng::stream_rng(2, 32, 0, 0);
    let z: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let y: Vec<f64> = z
        .iter()
        .map(|v| (2.0 * PI * v).sin() + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let fit = estimate_nuisance(&z, &y, &VcConfig::default()).unwrap();
    let worst = z
        .iter()
        .zip(&fit)
        .map(|(v, f)| (f - (2.0 * PI * v).sin()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.15, "max error {worst}");
    let flat = estimate_nuisance(&z, &[1.5; 400], &VcConfig::default()).unwrap();
    assert!(flat.iter().all(|v| (v - 1.5).abs() < 1e-12));
}

#[test]
fn perfectly_fit_response_gives_zero() {
    let (d, trend) = vc_data(60, 3, 1);
    let exact = d.with_response(trend.clone()).unwrap();
    let r = vc_screen_with_nuisance(&exact, &trend, &VcConfig::default()).unwrap();
    assert!(r.stats.iter().all(|&s| s == 0.0));
}

#[test]
fn oracle_nuisance_null_is_calibrated() {
    // pointwise statistic at the middle of the index range
    let cfg = VcConfig {
        eval_policy: EvalPolicy::UniformGrid(1),
        ..Default::default()
    };
    let mut stats: Vec<f64> = (0..300)
        .map(|r| {
            let (d, trend) = vc_data(200, 2, 1000 + r);
            let r = vc_screen_with_nuisance(&d, &trend, &cfg).unwrap();
            r.stats[1]
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let median = stats[150];
    let chi = 0.4549;
    assert!(median >= chi / 2.0 && median <= chi * 2.0, "median {median}");
}

#[test]
fn null_feature_stays_finite_and_small() {
    let mut stats: Vec<f64> = (0..100)
        .map(|r| {
            let (d, _) = vc_data(200, 2, 5000 + r);
            vc_feature_stat(d.column(1), d.y(), d.z().unwrap(), &VcConfig::default())
                .unwrap()
                .stat
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    assert!(stats[50].is_finite() && stats[50] < 25.0, "median {}", stats[50]);
}

#[test]
fn first_coefficient_found_at_moderate_scale() {
    let spec = SimulationSpec::new(5, 200, 200);
    let hits = (0..100)
        .filter(|&rep| {
            let d = gen_example(&spec, rep).unwrap();
            vc_screen(&d, &VcConfig::default()).unwrap().is_selected(0)
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn plain_screen_misses_zero_average_coefficient() {
    let spec = SimulationSpec::new(5, 100, 1000);
    let hits = (0..100)
        .filter(|&rep| {
            let d = gen_example(&spec, rep).unwrap();
            screen(&d, &ScreeningConfig::default()).unwrap().is_selected(1)
        })
        .count();
    assert!(hits <= 20, "{hits}/100");
}

#[test]
fn missing_index_is_rejected() {
    let d = Dataset::new(vec![vec![1.0, 2.0, 3.0]], vec![1.0, 0.0, -1.0], None).unwrap();
    assert!(vc_screen(&d, &VcConfig::default()).is_err());
}
