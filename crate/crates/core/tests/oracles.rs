//! Fast statistics against direct-definition oracles.

mod support;

use std::f64::consts::PI;

use genspec::dists::{discrete_stable_pmf_upto, sample_discrete_stable, DiscreteStableParams};
use genspec::empirical::{bias_b, criterion_d, dft_kernels, Grid};
use genspec::models::{bias_term_model, divergence_d, Family, ModelSpec, QuadSpec};
use genspec::rng::stream;
use genspec::simulate::simulate_path;
use genspec::{Complex64, TimeSeries};
use support::exact::{kernels_worst_error, statistics_worst_error};

#[test]
fn statistics_match_direct_definitions() {
    let (err, at) = statistics_worst_error();
    assert!(err <= 1e-9, "{at} (relative error {err:e})");
}

#[test]
fn kernels_match_naive_summation() {
    let err = kernels_worst_error();
    assert!(err <= 1e-9, "relative error {err:e}");
}

#[test]
fn constant_series_statistics_vanish() {
    let z = TimeSeries::counts(vec![4; 24]);
    let grid = Grid::new(3.0, 5, 24).unwrap();
    assert!(bias_b(&z, &grid).unwrap().abs() < 1e-20);
    let k = dft_kernels(&z, &grid).unwrap();
    for a in 0..=5 {
        for j in 1..24 {
            assert!(k.get(a, j).norm() < 1e-10);
        }
    }
}

/// `P(W = k)` by trapezoid inversion of the pgf on a circle of radius `r`:
/// aliasing is damped by `r^N`, far below round-off.
fn contour_pmf(params: &DiscreteStableParams, k: usize, r: f64, nodes: usize) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..nodes {
        let th = 2.0 * PI * q as f64 / nodes as f64;
        let x = Complex64::from_polar(r, th);
        acc += params.pgf(x) * Complex64::from_polar(1.0, -(k as f64) * th);
    }
    acc.re / nodes as f64 / r.powi(k as i32)
}

#[test]
fn pmf_matches_quadrature_inversion() {
    for (delta, alpha) in [(2.0, 0.7), (0.283, 0.364), (5.0, 0.95), (1.0, 1.0)] {
        let params = DiscreteStableParams::new(delta, alpha).unwrap();
        let pmf = discrete_stable_pmf_upto(&params, 40);
        for k in 0..=40 {
            let want = contour_pmf(&params, k, 0.9, 1 << 13);
            assert!(
                (pmf.probs[k] - want).abs() < 1e-10,
                "({delta}, {alpha}) k={k}: {} vs {want}",
                pmf.probs[k]
            );
        }
    }
}

#[test]
fn sampler_matches_pmf() {
    let params = DiscreteStableParams::new(2.0, 0.7).unwrap();
    let pmf = discrete_stable_pmf_upto(&params, 20);
    let draws = 1_000_000;
    let mut counts = [0usize; 21];
    let mut rng = stream(99, 0);
    for _ in 0..draws {
        let w = sample_discrete_stable(&params, &mut rng) as usize;
        if w <= 20 {
            counts[w] += 1;
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        let p = pmf.probs[k];
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let freq = c as f64 / draws as f64;
        assert!((freq - p).abs() <= 4.0 * se, "k={k}: {freq} vs {p} (se {se})");
    }
}

#[test]
fn fractional_moment_is_stable_across_seeds() {
    let params = DiscreteStableParams::new(2.0, 0.7).unwrap();
    let means: Vec<f64> = (0..10)
        .map(|seed| {
            let mut rng = stream(500 + seed, 0);
            let draws = 1_000_000;
            (0..draws)
                .map(|_| (sample_discrete_stable(&params, &mut rng) as f64).sqrt())
                .sum::<f64>()
                / draws as f64
        })
        .collect();
    let mean = means.iter().sum::<f64>() / 10.0;
    let sd = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
    assert!(mean.is_finite() && sd / mean < 0.1, "mean {mean} sd {sd}");
}

/// Mean criterion over simulated paths against the divergence plus the bias
/// integral, both on the estimator's own lattice.
#[test]
fn criterion_mean_matches_divergence_plus_bias() {
    let (n, m, l, reps) = (512, 30, PI, 200);
    let truth = ModelSpec::new(Family::GaussAr1, vec![0.4, 1.0]).unwrap();
    let truth_full = truth.clone().with_lmax(50).unwrap();
    let quad = QuadSpec::new(l, n, m).unwrap();
    let bias = bias_term_model(&truth_full, &quad);
    let grid = Grid::new(l, m, n).unwrap();
    let paths: Vec<TimeSeries> = (0..reps).map(|r| simulate_path(&truth, n, 9000 + r).unwrap()).collect();
    for theta in [vec![0.4, 1.0], vec![0.1, 1.5]] {
        let candidate = truth.with_theta(theta.clone()).unwrap();
        let expected = divergence_d(&truth_full, &candidate, &quad) + bias;
        let values: Vec<f64> = paths
            .iter()
            .map(|z| criterion_d(z, &candidate, &grid).unwrap())
            .collect();
        let mean = values.iter().sum::<f64>() / reps as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "θ={theta:?}: mean {mean} vs {expected} (se {se})"
        );
    }
}
