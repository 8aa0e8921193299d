use elscreen::iterative::{
    fit_sparse_additive, iterative_screen, residualize_feature, IterativeConfig, Phase,
    SparseAdditiveConfig,
};
use elscreen::simgen::{gen_example, SimulationSpec};
use elscreen::{Dataset, ScreeningConfig};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn additive(n: usize, p: usize, active: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = elscreen::rng::stream_rng(seed, 50, 0, 0);
    let cols: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let signal: f64 = (0..active)
                .map(|j| match j % 3 {
                    0 => 3.0 * cols[j][i],
                    1 => 4.0 * (cols[j][i] - 0.5).powi(2),
                    _ => (2.0 * std::f64::consts::PI * cols[j][i]).sin(),
                })
                .sum();
            signal + noise * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Dataset::new(cols, y, None).unwrap().centered()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_respects_bounds(
        seed in any::<u64>(),
        recruit in 1usize..6,
        extra in 0usize..6,
        rounds in 1usize..5,
    ) {
        let d = additive(80, 30, 2, 0.5, seed);
        let icfg = IterativeConfig {
            per_round_recruit: recruit,
            max_total: recruit + extra,
            max_rounds: rounds,
            selector: SparseAdditiveConfig::default(),
        };
        let out = iterative_screen(&d, &ScreeningConfig::default(), &icfg).unwrap();
        prop_assert!(out.rounds() <= rounds);
        let selects: Vec<&Vec<usize>> = out
            .trace
            .iter()
            .filter(|t| t.phase == Phase::Select)
            .map(|t| &t.features)
            .collect();
        for s in &selects {
            prop_assert!(s.len() <= icfg.max_total);
        }
        for t in out.trace.iter().filter(|t| t.phase == Phase::Recruit) {
            prop_assert!(t.features.len() <= recruit);
        }
        prop_assert_eq!(selects.last().copied(), Some(&out.final_set));
        // a repeated set ends the loop
        for w in selects.windows(2) {
            if w[0] == w[1] {
                prop_assert_eq!(w[1], selects[selects.len() - 1]);
            }
        }
    }
}

#[test]
fn iterative_run_is_deterministic() {
    let d = additive(100, 40, 3, 0.5, 7);
    let icfg = IterativeConfig::for_n(100);
    let a = iterative_screen(&d, &ScreeningConfig::default(), &icfg).unwrap();
    let b = iterative_screen(&d, &ScreeningConfig::default(), &icfg).unwrap();
    assert_eq!(a, b);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write_trace_csv(&mut x).unwrap();
    b.write_trace_csv(&mut y).unwrap();
    assert_eq!(x, y);
}

#[test]
fn single_active_feature_converges_quickly() {
    for seed in 0..10 {
        let d = additive(150, 20, 1, 0.3, 100 + seed);
        let icfg = IterativeConfig {
            per_round_recruit: 1,
            max_total: 5,
            max_rounds: 5,
            selector: SparseAdditiveConfig::default(),
        };
        let out = iterative_screen(&d, &ScreeningConfig::default(), &icfg).unwrap();
        assert!(out.rounds() <= 2, "seed {seed}: {:?}", out.trace);
        assert!(out.final_set.contains(&0));
    }
}

#[test]
fn selector_keeps_only_the_signal() {
    let mut exact = 0;
    for seed in 0..100 {
        let d = additive(300, 3, 1, 0.5, 200 + seed);
        let cols: Vec<&[f64]> = (0..3).map(|j| d.column(j)).collect();
        let cfg = SparseAdditiveConfig {
            seed,
            ..Default::default()
        };
        let fit = fit_sparse_additive(&cols, d.y(), &cfg).unwrap();
        exact += (fit.retained == vec![0]) as usize;
    }
    assert!(exact >= 95, "{exact}/100");
}

#[test]
fn selector_on_noise_keeps_little() {
    let mut small = 0;
    for seed in 0..100 {
        let d = additive(150, 5, 0, 1.0, 400 + seed);
        let cols: Vec<&[f64]> = (0..5).map(|j| d.column(j)).collect();
        let cfg = SparseAdditiveConfig {
            seed,
            ..Default::default()
        };
        let fit = fit_sparse_additive(&cols, d.y(), &cfg).unwrap();
        small += (fit.retained.len() <= 1) as usize;
    }
    assert!(small >= 80, "{small}/100");
}

#[test]
fn residual_exposes_hidden_factor() {
    let spec = SimulationSpec::new(3, 20_000, 5);
    let d = gen_example(&spec, 0).unwrap();
    let corr = |a: &[f64], b: &[f64]| {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (u, v) in a.iter().zip(b) {
            sab += (u - ma) * (v - mb);
            saa += (u - ma).powi(2);
            sbb += (v - mb).powi(2);
        }
        sab / (saa * sbb).sqrt()
    };
    assert!(corr(d.column(3), d.y()).abs() < 0.03);
    let r = residualize_feature(d.column(0), &[d.column(3)]);
    assert!(corr(&r, d.y()).abs() > 0.2);
}

#[test]
fn recovers_marginally_hidden_feature() {
    let spec = SimulationSpec::new(3, 300, 200);
    let d = gen_example(&spec, 0).unwrap();
    let scfg = ScreeningConfig {
        rescale: elscreen::RescaleMode::Rank,
        ..Default::default()
    };
    let out = iterative_screen(&d, &scfg, &IterativeConfig::for_n(300)).unwrap();
    for j in 0..4 {
        assert!(out.final_set.contains(&j), "{:?}", out.trace);
    }
}
