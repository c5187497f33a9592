//! One-step median prediction for INAR(1) and Hill tail diagnostics.

use crate::dists::{binomial_pmf, discrete_stable_pmf_upto, DiscreteStableParams, Pmf, PMF_K_MAX_CAP};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Conditional median of `Bin(z, p) + DS(δ, α)`, caching the innovation pmf.
#[derive(Debug, Clone)]
pub struct MedianPredictor {
    p: f64,
    innovation: DiscreteStableParams,
    pmf: Pmf,
}

impl MedianPredictor {
    pub fn new(p: f64, delta: f64, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::NonStationary(format!("thinning probability p = {p}")));
        }
        let innovation = DiscreteStableParams::new(delta, alpha)?;
        let pmf = discrete_stable_pmf_upto(&innovation, 64);
        Ok(Self { p, innovation, pmf })
    }

    /// Pmf of `Bin(z, p) + DS(δ, α)` on `0..=K`. Every entry up to `K` is
    /// exact; the mass beyond `K` is reported as the tail. `K` doubles until
    /// the cumulative mass reaches one half.
    pub fn transition_pmf(&mut self, z_prev: u64) -> Result<Pmf> {
        let binom = binomial_pmf(z_prev, self.p);
        let mut k = self.pmf.k_max().max(z_prev as usize + 64);
        loop {
            if self.pmf.k_max() < k {
                self.pmf = discrete_stable_pmf_upto(&self.innovation, k);
            }
            // The binomial support is complete, so zero padding keeps the
            // truncated convolution exact on 0..=k.
            let mut padded = binom.clone();
            padded.resize(k + 1, 0.0);
            let sum = Pmf::from_probs(padded).convolve(&self.pmf);
            let mass: f64 = sum.probs.iter().sum();
            if mass >= 0.5 {
                return Ok(sum);
            }
            if k >= PMF_K_MAX_CAP.max(2 * z_prev as usize) {
                return Err(Error::TailCapExceeded {
                    tail_mass: 1.0 - mass,
                    tolerance: 0.5,
                    cap: k,
                });
            }
            k *= 2;
        }
    }

    pub fn predict(&mut self, z_prev: u64) -> Result<u64> {
        let pmf = self.transition_pmf(z_prev)?;
        pmf.median()
            .map(|m| m as u64)
            .ok_or_else(|| Error::NotConverged("median not reached".into()))
    }
}

/// `median(Bin(z_prev, p) + DS(δ, α))`.
pub fn median_predict_inar(z_prev: u64, p: f64, delta: f64, alpha: f64) -> Result<u64> {
    MedianPredictor::new(p, delta, alpha)?.predict(z_prev)
}

/// `(t, actual, predicted)` for every `t > split` (1-based), each predicted
/// from `Z_{t-1}`.
pub fn predictions_with<F>(series: &TimeSeries, split: usize, mut predictor: F) -> Result<Vec<(usize, u64, u64)>>
where
    F: FnMut(u64) -> Result<u64>,
{
    let values = series.values();
    if split == 0 || split >= values.len() {
        return Err(Error::param(format!("split {split} must lie in 1..{}", values.len())));
    }
    let as_count = |x: f64| {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as u64)
        } else {
            Err(Error::param(format!("observation {x} is not a count")))
        }
    };
    (split..values.len())
        .map(|t| {
            let prev = as_count(values[t - 1])?;
            Ok((t + 1, as_count(values[t])?, predictor(prev)?))
        })
        .collect()
}

pub fn predictions(
    series: &TimeSeries,
    split: usize,
    p: f64,
    delta: f64,
    alpha: f64,
) -> Result<Vec<(usize, u64, u64)>> {
    let mut predictor = MedianPredictor::new(p, delta, alpha)?;
    predictions_with(series, split, |z| predictor.predict(z))
}

pub fn mspe(rows: &[(usize, u64, u64)]) -> f64 {
    rows.iter()
        .map(|&(_, actual, pred)| (actual as f64 - pred as f64).powi(2))
        .sum::<f64>()
        / rows.len() as f64
}

/// Mean squared one-step error of the median predictor on `t > split`.
pub fn evaluate_mspe(series: &TimeSeries, split: usize, p: f64, delta: f64, alpha: f64) -> Result<f64> {
    Ok(mspe(&predictions(series, split, p, delta, alpha)?))
}

fn positive_descending(values: &[f64]) -> Vec<f64> {
    let mut pos: Vec<f64> = values.iter().copied().filter(|&x| x > 0.0).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    pos
}

/// `(1/k) Σ_{i<=k} ln(X_(i) / X_(k+1))` over the positive observations in
/// descending order.
pub fn hill_estimator(values: &[f64], k: usize) -> Result<f64> {
    let pos = positive_descending(values);
    hill_from_sorted(&pos, k)
}

fn hill_from_sorted(pos: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= pos.len() {
        return Err(Error::InsufficientData(format!(
            "Hill estimator with k = {k} needs more than {k} positive observations, got {}",
            pos.len()
        )));
    }
    let base = pos[k].ln();
    Ok(pos[..k].iter().map(|x| x.ln() - base).sum::<f64>() / k as f64)
}

/// `(k, estimate)` for every admissible `k`.
pub fn hill_plot(values: &[f64]) -> Vec<(usize, f64)> {
    let pos = positive_descending(values);
    let mut out = Vec::with_capacity(pos.len().saturating_sub(1));
    let mut log_sum = 0.0;
    for k in 1..pos.len() {
        log_sum += pos[k - 1].ln();
        out.push((k, log_sum / k as f64 - pos[k].ln()));
    }
    out
}
