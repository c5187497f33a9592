//! Path generation for every model family.

use rand_distr::{Distribution, Normal};

use crate::dists::{binomial_thin, sample_cauchy, sample_discrete_stable, DiscreteStableParams};
use crate::error::{Error, Result};
use crate::models::{Family, ModelSpec, TwoSidedFilter};
use crate::rng::{self, Stream};
use crate::series::TimeSeries;

pub const MIN_LENGTH: usize = 8;

fn burn_in(model: &ModelSpec) -> usize {
    1000 + 20 * model.lmax()
}

/// Draws a stationary path of length `n`. Identical seeds give identical paths.
pub fn simulate_path(model: &ModelSpec, n: usize, seed: u64) -> Result<TimeSeries> {
    if n < MIN_LENGTH {
        return Err(Error::InsufficientData(format!("path length {n} < {MIN_LENGTH}")));
    }
    let mut rng = rng::stream(seed, 0);
    let th = model.theta();
    match model.family() {
        Family::CauchyMa1 => {
            let filter = TwoSidedFilter::new(0, vec![1.0, -1.0 / th[0]])?;
            TimeSeries::real(linear_filter(&filter, n, |r| sample_cauchy(th[1], r), &mut rng))
        }
        Family::CauchyAr1 => TimeSeries::real(cauchy_ar1(th[0], th[1], n, burn_in(model), &mut rng)),
        Family::GaussMa1 => {
            let normal = Normal::new(0.0, th[1].sqrt()).map_err(|e| Error::param(e.to_string()))?;
            let filter = TwoSidedFilter::new(0, vec![1.0, -1.0 / th[0]])?;
            TimeSeries::real(linear_filter(&filter, n, |r| normal.sample(r), &mut rng))
        }
        Family::GaussAr1 => {
            let (a, s2) = (th[0], th[1]);
            let normal = Normal::new(0.0, s2.sqrt()).map_err(|e| Error::param(e.to_string()))?;
            let mut z = normal.sample(&mut rng) / (1.0 - a * a).sqrt();
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                z = a * z + normal.sample(&mut rng);
                out.push(z);
            }
            TimeSeries::real(out)
        }
        Family::Inma1 => {
            let innov = DiscreteStableParams::new(th[0], th[1])?;
            let p = th[2];
            let mut prev = sample_discrete_stable(&innov, &mut rng);
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let eps = sample_discrete_stable(&innov, &mut rng);
                out.push(binomial_thin(prev, p, &mut rng).saturating_add(eps));
                prev = eps;
            }
            Ok(TimeSeries::counts(out))
        }
        Family::Inar1 => Ok(TimeSeries::counts(inar_path(
            th[0],
            th[1],
            &[(n, th[2])],
            burn_in(model),
            &mut rng,
        )?)),
        Family::CauchyMaGen { causal, .. } => {
            let (xi, delta) = th.split_at(th.len() - 1);
            let filter = TwoSidedFilter::from_roots(&xi[..causal], &xi[causal..]);
            TimeSeries::real(linear_filter(&filter, n, |r| sample_cauchy(delta[0], r), &mut rng))
        }
    }
}

/// INAR(1) path whose thinning probability switches from the model's `p`
/// to `p_after` for `t > n/2`. The chain runs on through the switch.
pub fn simulate_change_point(model: &ModelSpec, p_after: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    if model.family() != Family::Inar1 {
        return Err(Error::param("change-point paths are defined for INAR(1) only"));
    }
    if n < MIN_LENGTH {
        return Err(Error::InsufficientData(format!("path length {n} < {MIN_LENGTH}")));
    }
    if !(0.0..1.0).contains(&p_after) {
        return Err(Error::NonStationary(format!("thinning probability p = {p_after}")));
    }
    let th = model.theta();
    let mut rng = rng::stream(seed, 0);
    let first = n / 2;
    let path = inar_path(
        th[0],
        th[1],
        &[(first, th[2]), (n - first, p_after)],
        burn_in(model),
        &mut rng,
    )?;
    Ok(TimeSeries::counts(path))
}

/// `regimes` lists (length, p) segments; the first regime's stationary law
/// initializes the chain.
fn inar_path(delta: f64, alpha: f64, regimes: &[(usize, f64)], burn: usize, rng: &mut Stream) -> Result<Vec<u64>> {
    let innov = DiscreteStableParams::new(delta, alpha)?;
    let p0 = regimes[0].1;
    let marginal = DiscreteStableParams::new(delta / (1.0 - p0.powf(alpha)), alpha)?;
    let mut z = sample_discrete_stable(&marginal, rng);
    for _ in 0..burn {
        z = binomial_thin(z, p0, rng).saturating_add(sample_discrete_stable(&innov, rng));
    }
    let mut out = Vec::with_capacity(regimes.iter().map(|r| r.0).sum());
    for &(len, p) in regimes {
        for _ in 0..len {
            z = binomial_thin(z, p, rng).saturating_add(sample_discrete_stable(&innov, rng));
            out.push(z);
        }
    }
    Ok(out)
}

fn cauchy_ar1(a: f64, delta: f64, n: usize, burn: usize, rng: &mut Stream) -> Vec<f64> {
    if a.abs() < 1.0 {
        let mut z = 0.0;
        for _ in 0..burn {
            z = a * z + sample_cauchy(delta, rng);
        }
        (0..n)
            .map(|_| {
                z = a * z + sample_cauchy(delta, rng);
                z
            })
            .collect()
    } else {
        // Z_t = -Σ_{j>=1} a^{-j} ε_{t+j}, run backwards from J steps past the end.
        let j = (1e-12f64.ln() / (1.0 / a.abs()).ln()).ceil() as usize;
        let eps: Vec<f64> = (0..n + j).map(|_| sample_cauchy(delta, rng)).collect();
        let mut out = vec![0.0; n];
        let mut z = 0.0;
        for t in (0..n + j - 1).rev() {
            z = (z - eps[t + 1]) / a;
            if t < n {
                out[t] = z;
            }
        }
        out
    }
}

/// `Z_t = Σ_k ψ_k ε_{t-k}` with innovations padded on both sides so every
/// output uses the complete filter.
fn linear_filter<F>(filter: &TwoSidedFilter, n: usize, mut draw: F, rng: &mut Stream) -> Vec<f64>
where
    F: FnMut(&mut Stream) -> f64,
{
    let past = filter.end().max(0) as usize;
    let future = (-filter.start).max(0) as usize;
    let eps: Vec<f64> = (0..n + past + future).map(|_| draw(rng)).collect();
    (0..n)
        .map(|t| {
            let centre = (t + past) as i64;
            filter
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, psi)| psi * eps[(centre - (filter.start + i as i64)) as usize])
                .sum()
        })
        .collect()
}
