//! Probability primitives: Cauchy and discrete stable laws, the positive
//! stable mixing variable, and binomial thinning.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Cauchy, Distribution, Exp1, Poisson};

use crate::error::{Error, Result};

/// Hard cap on the support computed by [`discrete_stable_pmf`].
pub const PMF_K_MAX_CAP: usize = 1 << 15;

/// Poisson means above this are drawn as their (rounded) mean; the relative
/// standard deviation is below 1e-7 there.
const POISSON_EXACT_LIMIT: f64 = 1e14;

/// Counts saturate here so that sums of counts cannot overflow `u64`.
pub const COUNT_SATURATION: u64 = 1 << 60;

/// Discrete stable law with pgf `E x^W = exp{-δ (1 - x)^α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteStableParams {
    delta: f64,
    alpha: f64,
}

impl DiscreteStableParams {
    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::param(format!(
                "discrete stable scale delta = {delta} must be > 0"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!(
                "discrete stable exponent alpha = {alpha} must lie in (0, 1]"
            )));
        }
        Ok(Self { delta, alpha })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Probability generating function on the closed unit disc.
    pub fn pgf(&self, x: Complex64) -> Complex64 {
        (-(Complex64::new(1.0, 0.0) - x).powf(self.alpha) * self.delta).exp()
    }

    /// Characteristic function `E e^{isW}`.
    pub fn chf(&self, s: f64) -> Complex64 {
        self.pgf(Complex64::from_polar(1.0, s))
    }
}

/// Probabilities `P(W = k)` for `k = 0..=k_max` plus the mass beyond `k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    pub probs: Vec<f64>,
    pub tail_mass: f64,
}

impl Pmf {
    /// Builds a pmf from raw probabilities: negative round-off is clamped and
    /// the tail is whatever mass is missing.
    pub fn from_probs(mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        let tail_mass = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Self { probs, tail_mass }
    }

    pub fn k_max(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.tail_mass
    }

    /// Smallest `k` with `P(W <= k) >= q`, or `None` if that `k` lies
    /// beyond the computed support.
    pub fn quantile(&self, q: f64) -> Option<usize> {
        let mut cdf = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            cdf += p;
            if cdf >= q {
                return Some(k);
            }
        }
        None
    }

    pub fn median(&self) -> Option<usize> {
        self.quantile(0.5)
    }

    /// Distribution of the sum of two independent variables, truncated to
    /// the shorter support (exact on that range).
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let len = self.probs.len().min(other.probs.len());
        let mut out = vec![0.0; len];
        for (i, a) in self.probs.iter().take(len).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (o, b) in out[i..].iter_mut().zip(&other.probs) {
                *o += a * b;
            }
        }
        Pmf::from_probs(out)
    }
}

/// Positive α-stable variable with Laplace transform `E e^{-sS} = exp(-s^α)`,
/// drawn with Kanter's representation.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    // U uniform on (0, π), E standard exponential.
    let u = PI * rng.random::<f64>().max(f64::MIN_POSITIVE);
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin();
    let b = ((1.0 - alpha) * u).sin() / ((alpha * u).sin() * e);
    a.powf(1.0 / alpha) * b.powf((1.0 - alpha) / alpha)
}

fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if !(mean < POISSON_EXACT_LIMIT) {
        return if mean >= COUNT_SATURATION as f64 {
            COUNT_SATURATION
        } else {
            mean.round() as u64
        };
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    draw as u64
}

/// One draw from the discrete stable law: a Poisson variable whose mean is
/// `δ^{1/α} S` with `S` positive α-stable.
pub fn sample_discrete_stable<R: Rng + ?Sized>(params: &DiscreteStableParams, rng: &mut R) -> u64 {
    if params.alpha >= 1.0 {
        return sample_poisson(params.delta, rng);
    }
    let s = sample_positive_stable(params.alpha, rng);
    sample_poisson(params.delta.powf(1.0 / params.alpha) * s, rng)
}

pub fn sample_cauchy<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    Cauchy::new(0.0, scale).expect("positive scale").sample(rng)
}

/// `p ∘ count`: the number of successes among `count` Bernoulli(p) trials.
pub fn binomial_thin<R: Rng + ?Sized>(count: u64, p: f64, rng: &mut R) -> u64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if count == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return count;
    }
    Binomial::new(count, p).expect("valid binomial").sample(rng)
}

/// Taylor coefficients of `log G(x) = -δ (1-x)^α`, indices `1..=k_max`
/// (index 0 is unused). All of them are nonnegative.
fn log_pgf_coefficients(params: &DiscreteStableParams, k_max: usize) -> Vec<f64> {
    let mut h = vec![0.0; k_max + 1];
    // b_j = binom(α, j) (-1)^j
    let mut b = 1.0;
    for (j, hj) in h.iter_mut().enumerate().skip(1) {
        b *= (j as f64 - 1.0 - params.alpha) / j as f64;
        *hj = -params.delta * b;
    }
    h
}

/// Extends `g` (pmf values `0..g.len()`) up to index `k_max` using
/// `k g_k = Σ_{j=1}^{k} j h_j g_{k-j}`, which follows from `G' = (log G)' G`.
fn extend_pmf(g: &mut Vec<f64>, h: &[f64], k_max: usize) {
    for k in g.len()..=k_max {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * h[j] * g[k - j];
        }
        g.push(acc / k as f64);
    }
}

/// Pmf values `0..=k_max`; the tail is the remaining mass.
pub fn discrete_stable_pmf_upto(params: &DiscreteStableParams, k_max: usize) -> Pmf {
    let h = log_pgf_coefficients(params, k_max);
    let mut g = vec![(-params.delta).exp()];
    extend_pmf(&mut g, &h, k_max);
    Pmf::from_probs(g)
}

/// Pmf of the discrete stable law computed until the tail mass drops to
/// `tail_tolerance`.
pub fn discrete_stable_pmf(params: &DiscreteStableParams, tail_tolerance: f64) -> Result<Pmf> {
    if !(tail_tolerance > 0.0 && tail_tolerance <= 1e-3) {
        return Err(Error::param(format!(
            "tail tolerance {tail_tolerance} must lie in (0, 1e-3]"
        )));
    }
    let h = log_pgf_coefficients(params, PMF_K_MAX_CAP);
    let mut g = vec![(-params.delta).exp()];
    let mut target = 64usize;
    loop {
        extend_pmf(&mut g, &h, target);
        let tail = 1.0 - g.iter().sum::<f64>();
        if tail <= tail_tolerance {
            // trim trailing entries that are not needed to stay below tolerance
            let mut pmf = Pmf::from_probs(g);
            while pmf.probs.len() > 1 {
                let last = *pmf.probs.last().unwrap();
                if pmf.tail_mass + last > tail_tolerance {
                    break;
                }
                pmf.probs.pop();
                pmf.tail_mass += last;
            }
            return Ok(pmf);
        }
        if target >= PMF_K_MAX_CAP {
            return Err(Error::TailCapExceeded {
                tail_mass: tail,
                tolerance: tail_tolerance,
                cap: PMF_K_MAX_CAP,
            });
        }
        target = (target * 2).min(PMF_K_MAX_CAP);
    }
}

/// Binomial(n, p) probabilities, built outward from the mode by ratio
/// recursion and normalised.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    let mut probs = vec![0.0; n_us + 1];
    if p <= 0.0 {
        probs[0] = 1.0;
        return probs;
    }
    if p >= 1.0 {
        probs[n_us] = 1.0;
        return probs;
    }
    let mode = (((n as f64 + 1.0) * p).floor() as usize).min(n_us);
    let odds = p / (1.0 - p);
    probs[mode] = 1.0;
    for k in mode..n_us {
        probs[k + 1] = probs[k] * (n_us - k) as f64 / (k + 1) as f64 * odds;
        if probs[k + 1] < 1e-300 {
            break;
        }
    }
    for k in (1..=mode).rev() {
        probs[k - 1] = probs[k] * k as f64 / (n_us - k + 1) as f64 / odds;
        if probs[k - 1] < 1e-300 {
            break;
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= total);
    probs
}
