mod common;

use pacman_core::measure::{ks_statistic, parse_measure, pushforward_check};
use pacman_core::ProbabilityMeasure;
use proptest::prelude::*;

proptest! {
    #[test]
    fn quantile_and_cdf_are_dual(mu in common::measure()) {
        let g = mu.quantile();
        let (lo, hi) = mu.support();
        for i in 1..200 {
            let t = i as f64 / 200.0;
            let gt = g.eval(t).unwrap();
            for j in 0..=80 {
                let u = lo - 0.5 + (hi - lo + 1.0) * j as f64 / 80.0;
                let f = mu.cdf(u);
                // Pairs sitting on a level of F or G within rounding are skipped.
                if (f - t).abs() < 1e-12 || (gt - u).abs() < 1e-12 {
                    continue;
                }
                prop_assert_eq!(gt <= u, f >= t, "t={} u={}", t, u);
            }
        }
    }

    #[test]
    fn quantile_is_monotone_and_left_continuous(mu in common::measure()) {
        let g = mu.quantile();
        prop_assert!(g.is_non_decreasing(0.0));
        for &b in g.interior_breaks() {
            prop_assert_eq!(g.eval(b).unwrap(), g.left_limit(b).unwrap());
        }
    }

    #[test]
    fn quantile_pushes_lebesgue_to_mu(mu in common::measure()) {
        let (lo, hi) = mu.support();
        let grid: Vec<f64> = (0..=64).map(|k| lo - 0.25 + (hi - lo + 0.5) * k as f64 / 64.0).collect();
        prop_assert!(pushforward_check(&mu, &mu.quantile(), &grid) <= 1e-12);
    }
}

#[test]
fn dyadic_duality_is_exact() {
    let mu = parse_measure("atom 0 0.25\nsegment 1 2 0.5\natom 3 0.25\n").unwrap();
    let g = mu.quantile();
    for i in 1..64 {
        let t = i as f64 / 64.0;
        for j in -8..=32 {
            let u = j as f64 / 8.0;
            assert_eq!(g.eval(t).unwrap() <= u, mu.cdf(u) >= t, "t={t} u={u}");
        }
    }
}

#[test]
fn sampling_regression() {
    let n = 100_000;
    let threshold = 1.95 / (n as f64).sqrt();
    let suite = [
        ProbabilityMeasure::uniform(0.0, 1.0).unwrap(),
        ProbabilityMeasure::atomic(&[(0.0, 0.5), (1.0, 0.5)]).unwrap(),
        parse_measure("atom 0 0.3\nsegment 0.5 1.5 0.4\natom 2 0.3\n").unwrap(),
        parse_measure("segment 0 1 0.5\nsegment 2 3 0.5\n").unwrap(),
    ];
    for (k, mu) in suite.iter().enumerate() {
        for seed in 0..3 {
            let ks = ks_statistic(&mu.sample(n, seed).unwrap(), mu);
            assert!(ks < threshold, "measure {k} seed {seed}: {ks}");
        }
    }
}
