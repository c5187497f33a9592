//! Closed-form parametric generalized spectra.
//!
//! For a strictly stationary `Z_t` the order-two generalized spectrum is
//!
//! ```text
//! f(λ; u, v) = (1/2π) Σ_ℓ C_ℓ(u, v) e^{-iℓλ},
//! C_ℓ(u, v)  = E e^{i(u Z_{t+ℓ} + v Z_t)} - E e^{iuZ} E e^{ivZ}.
//! ```
//!
//! Every family below has explicit lag coefficients `C_ℓ`; negative lags
//! follow from `C_{-ℓ}(u, v) = C_ℓ(v, u)`. Moving-average families have
//! finite support, autoregressive ones are truncated at `|ℓ| <= lmax`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LMAX: usize = 2;
pub const MAX_LMAX: usize = 50;
pub const DEFAULT_UNIT_BAND: f64 = 0.1;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    /// `Z_t = (1 - a^{-1} B) ε_t`, Cauchy(δ) innovations; θ = (a, δ).
    CauchyMa1,
    /// `Z_t = a Z_{t-1} + ε_t`, causal or not; θ = (a, δ).
    CauchyAr1,
    /// `Z_t = (1 - a^{-1} B) ε_t`, N(0, σ²) innovations; θ = (a, σ²).
    GaussMa1,
    /// `Z_t = a Z_{t-1} + ε_t`, `|a| < 1`; θ = (a, σ²).
    GaussAr1,
    /// `Z_t = p ∘ ε_{t-1} + ε_t`, discrete stable ε; θ = (δ, α, p).
    Inma1,
    /// `Z_t = p ∘ Z_{t-1} + ε_t`, discrete stable ε; θ = (δ, α, p).
    Inar1,
    /// `Z_t = Π_{i<=d1}(1 - ξ_i^{-1} B) Π_{j>d1}(1 - ξ_j B^{-1}) ε_t`,
    /// Cauchy(δ) innovations; θ = (ξ_1, ..., ξ_{d1+d2}, δ).
    CauchyMaGen { causal: usize, anticausal: usize },
}

impl Family {
    pub fn dim(&self) -> usize {
        match self {
            Family::CauchyMa1 | Family::CauchyAr1 | Family::GaussMa1 | Family::GaussAr1 => 2,
            Family::Inma1 | Family::Inar1 => 3,
            Family::CauchyMaGen { causal, anticausal } => causal + anticausal + 1,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match self {
            Family::CauchyMa1 | Family::CauchyAr1 => vec!["a".into(), "delta".into()],
            Family::GaussMa1 | Family::GaussAr1 => vec!["a".into(), "sigma2".into()],
            Family::Inma1 | Family::Inar1 => vec!["delta".into(), "alpha".into(), "p".into()],
            Family::CauchyMaGen { causal, anticausal } => (1..=causal + anticausal)
                .map(|i| format!("xi{i}"))
                .chain(std::iter::once("delta".to_string()))
                .collect(),
        }
    }

    /// Families whose observations are counts.
    pub fn is_count(&self) -> bool {
        matches!(self, Family::Inma1 | Family::Inar1)
    }

    /// Families with infinite Fourier support (truncated at `lmax`).
    pub fn is_autoregressive(&self) -> bool {
        matches!(self, Family::CauchyAr1 | Family::GaussAr1 | Family::Inar1)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::CauchyMa1 => write!(f, "cauchy-ma1"),
            Family::CauchyAr1 => write!(f, "cauchy-ar1"),
            Family::GaussMa1 => write!(f, "gauss-ma1"),
            Family::GaussAr1 => write!(f, "gauss-ar1"),
            Family::Inma1 => write!(f, "inma1"),
            Family::Inar1 => write!(f, "inar1"),
            Family::CauchyMaGen { causal, anticausal } => write!(f, "cauchy-ma:{causal},{anticausal}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        let simple = match norm.as_str() {
            "cauchyma1" => Some(Family::CauchyMa1),
            "cauchyar1" => Some(Family::CauchyAr1),
            "gaussma1" => Some(Family::GaussMa1),
            "gaussar1" => Some(Family::GaussAr1),
            "inma1" => Some(Family::Inma1),
            "inar1" => Some(Family::Inar1),
            _ => None,
        };
        if let Some(f) = simple {
            return Ok(f);
        }
        let bad = || Error::param(format!("unknown model family '{s}'"));
        let orders = norm.strip_prefix("cauchyma:").ok_or_else(bad)?;
        let (d1, d2) = orders.split_once(',').ok_or_else(bad)?;
        let causal: usize = d1.parse().map_err(|_| bad())?;
        let anticausal: usize = d2.parse().map_err(|_| bad())?;
        if causal + anticausal == 0 || causal + anticausal > 16 {
            return Err(Error::param(format!(
                "moving-average order {causal}+{anticausal} must lie in 1..=16"
            )));
        }
        Ok(Family::CauchyMaGen { causal, anticausal })
    }
}

impl TryFrom<String> for Family {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

/// A parametric spectrum: family, parameter vector and Fourier truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    family: Family,
    theta: Vec<f64>,
    lmax: usize,
    unit_band: f64,
}

impl ModelSpec {
    pub fn new(family: Family, theta: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec {
            family,
            theta,
            lmax: DEFAULT_LMAX,
            unit_band: DEFAULT_UNIT_BAND,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_lmax(mut self, lmax: usize) -> Result<Self> {
        self.lmax = lmax;
        self.validate()?;
        Ok(self)
    }

    /// Half-width `w` of the open band `| |a| - 1 | < w` excluded for the
    /// Cauchy AR(1) coefficient. `w = 0` only excludes `|a| = 1`.
    pub fn with_unit_band(mut self, width: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&width) {
            return Err(Error::param(format!("unit band width {width} must lie in [0, 1)")));
        }
        self.unit_band = width;
        self.validate()?;
        Ok(self)
    }

    /// Same settings, different parameter vector.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        let spec = ModelSpec {
            family: self.family,
            theta,
            lmax: self.lmax,
            unit_band: self.unit_band,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn unit_band(&self) -> f64 {
        self.unit_band
    }

    /// Largest `|ℓ|` entering the (possibly truncated) Fourier series.
    pub fn max_lag(&self) -> usize {
        match self.family {
            Family::CauchyMa1 | Family::GaussMa1 | Family::Inma1 => 1,
            Family::CauchyMaGen { causal, anticausal } => causal + anticausal,
            _ => self.lmax,
        }
    }

    fn validate(&self) -> Result<()> {
        let th = &self.theta;
        if th.len() != self.family.dim() {
            return Err(Error::LengthMismatch {
                expected: self.family.dim(),
                got: th.len(),
            });
        }
        if let Some(i) = th.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("theta[{i}] is not finite")));
        }
        if self.family.is_autoregressive() && self.lmax == 0 {
            return Err(Error::param("lmax must be >= 1 for autoregressive families"));
        }
        if self.lmax > MAX_LMAX {
            return Err(Error::param(format!("lmax {} exceeds {MAX_LMAX}", self.lmax)));
        }
        let positive = |x: f64, name: &str| {
            if x > 0.0 {
                Ok(())
            } else {
                Err(Error::param(format!("{name} = {x} must be > 0")))
            }
        };
        match self.family {
            Family::CauchyMa1 | Family::GaussMa1 => {
                if th[0] == 0.0 {
                    return Err(Error::param("MA coefficient a must be nonzero"));
                }
                positive(
                    th[1],
                    if self.family == Family::CauchyMa1 {
                        "delta"
                    } else {
                        "sigma2"
                    },
                )?;
            }
            Family::CauchyAr1 => {
                let a = th[0];
                // Open band; the small slack keeps its end points (e.g. 0.9) legal.
                if a.abs() == 1.0 || (a.abs() - 1.0).abs() < self.unit_band - 1e-12 {
                    return Err(Error::ExcludedBand { name: "a", value: a });
                }
                positive(th[1], "delta")?;
            }
            Family::GaussAr1 => {
                if th[0].abs() >= 1.0 {
                    return Err(Error::NonStationary(format!(
                        "Gaussian AR(1) needs |a| < 1, got {}",
                        th[0]
                    )));
                }
                positive(th[1], "sigma2")?;
            }
            Family::Inma1 | Family::Inar1 => {
                positive(th[0], "delta")?;
                if !(th[1] > 0.0 && th[1] <= 1.0) {
                    return Err(Error::param(format!("alpha = {} must lie in (0, 1]", th[1])));
                }
                let p_ok = if self.family == Family::Inar1 {
                    (0.0..1.0).contains(&th[2])
                } else {
                    (0.0..=1.0).contains(&th[2])
                };
                if !p_ok {
                    return Err(Error::NonStationary(format!("thinning probability p = {}", th[2])));
                }
            }
            Family::CauchyMaGen { .. } => {
                let (xi, delta) = th.split_at(th.len() - 1);
                if xi.contains(&0.0) {
                    return Err(Error::param("MA roots xi must be nonzero"));
                }
                positive(delta[0], "delta")?;
            }
        }
        Ok(())
    }

    /// Lag coefficient `C_ℓ(u, v)`.
    pub fn coeff(&self, ell: i64, u: f64, v: f64) -> Complex64 {
        // Covariance with a constant.
        if u == 0.0 || v == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if ell < 0 {
            return self.coeff(-ell, v, u);
        }
        let th = &self.theta;
        let ell_u = ell as u64;
        match self.family {
            Family::CauchyMa1 => Complex64::from(cauchy_ma1_coeff(th[0], th[1], ell_u, u, v)),
            Family::CauchyAr1 => Complex64::from(cauchy_ar1_coeff(th[0], th[1], ell_u, u, v)),
            Family::GaussMa1 => Complex64::from(gauss_ma1_coeff(th[0], th[1], ell_u, u, v)),
            Family::GaussAr1 => Complex64::from(gauss_ar1_coeff(th[0], th[1], ell_u, u, v)),
            Family::Inma1 => inma1_coeff(th[0], th[1], th[2], ell_u, u, v),
            Family::Inar1 => inar1_coeff(th[0], th[1], th[2], ell_u, u, v),
            Family::CauchyMaGen { causal, .. } => {
                let (xi, delta) = th.split_at(th.len() - 1);
                let psi = TwoSidedFilter::from_roots(&xi[..causal], &xi[causal..]);
                Complex64::from(psi.cauchy_coeff(delta[0], ell, u, v))
            }
        }
    }

    /// Characteristic function of the stationary marginal law.
    pub fn marginal_chf(&self, u: f64) -> Complex64 {
        let th = &self.theta;
        match self.family {
            Family::CauchyMa1 => ((-th[1] * u.abs() * (1.0 + 1.0 / th[0].abs())).exp()).into(),
            Family::CauchyAr1 => {
                let a = th[0].abs();
                let c = if a < 1.0 {
                    1.0 / (1.0 - a)
                } else {
                    (1.0 / a) / (1.0 - 1.0 / a)
                };
                ((-th[1] * c * u.abs()).exp()).into()
            }
            Family::GaussMa1 => ((-0.5 * th[1] * u * u * (1.0 + th[0].powi(-2))).exp()).into(),
            Family::GaussAr1 => ((-0.5 * th[1] * u * u / (1.0 - th[0] * th[0])).exp()).into(),
            Family::Inma1 => (-th[0] * (1.0 + th[2].powf(th[1])) * unit_root_pow(u, th[1])).exp(),
            Family::Inar1 => (-th[0] / (1.0 - th[2].powf(th[1])) * unit_root_pow(u, th[1])).exp(),
            Family::CauchyMaGen { causal, .. } => {
                let (xi, delta) = th.split_at(th.len() - 1);
                let psi = TwoSidedFilter::from_roots(&xi[..causal], &xi[causal..]);
                ((-delta[0] * u.abs() * psi.abs_sum()).exp()).into()
            }
        }
    }

    /// `f(λ; u, v)`, truncated at `|ℓ| <= max_lag()`.
    pub fn spectrum(&self, lambda: f64, u: f64, v: f64) -> Complex64 {
        let lags = self.max_lag() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for ell in -lags..=lags {
            acc += self.coeff(ell, u, v) * Complex64::from_polar(1.0, -(ell as f64) * lambda);
        }
        acc / (2.0 * PI)
    }
}

/// Lag coefficients on the symmetric lattice `x_k = -L + 2Lk/m`,
/// `k = 0..=m`, for `|ℓ| <= lags`.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    lags: usize,
    size: usize,
    values: Vec<Complex64>,
}

impl CoeffTable {
    pub fn new(model: &ModelSpec, half_width: f64, m: usize, lags: usize) -> Self {
        let size = m + 1;
        let points: Vec<f64> = (0..size).map(|k| lattice_point(half_width, m, k)).collect();
        let eval = LatticeEval::new(model, half_width, m, &points);
        let plane = size * size;
        let mut values = vec![Complex64::new(0.0, 0.0); (2 * lags + 1) * plane];
        for ell in 0..=lags {
            let block = (lags + ell) * plane;
            if ell > model.max_lag() {
                continue;
            }
            for a in 0..size {
                for b in 0..size {
                    let idx = a * size + b;
                    // C(-u, -v) = conj C(u, v); the lattice is symmetric.
                    let mirror = (size - 1 - a) * size + (size - 1 - b);
                    values[block + idx] = if mirror < idx {
                        values[block + mirror].conj()
                    } else {
                        eval.coeff(ell, a, b)
                    };
                }
            }
            if ell > 0 {
                let neg = (lags - ell) * plane;
                for a in 0..size {
                    for b in 0..size {
                        values[neg + a * size + b] = values[block + b * size + a];
                    }
                }
            }
        }
        CoeffTable { lags, size, values }
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    /// `C_ℓ(x_a, x_b)`.
    #[inline]
    pub fn get(&self, ell: i64, a: usize, b: usize) -> Complex64 {
        let plane = self.size * self.size;
        self.values[(self.lags as i64 + ell) as usize * plane + a * self.size + b]
    }
}

/// Per-point quantities reused across the lattice. For the count families
/// every exponential that factors over `a`, `b` or `a + b` is cached, so only
/// the thinning term needs a fresh power per pair.
struct LatticeEval<'a> {
    model: &'a ModelSpec,
    points: &'a [f64],
    // e^{i x_a} and e^{i(x_a + x_b)} indexed by a + b.
    phase: Vec<Complex64>,
    phase_sum: Vec<Complex64>,
    // Product of the two marginal characteristic functions, per point.
    indep: Vec<Complex64>,
    // Lag zero, indexed by a + b.
    zero_lag: Vec<Complex64>,
    // Lag ℓ >= 1 factors in `a` and in `b`, one row per lag.
    left: Vec<Vec<Complex64>>,
    right: Vec<Vec<Complex64>>,
}

impl<'a> LatticeEval<'a> {
    fn new(model: &'a ModelSpec, half_width: f64, m: usize, points: &'a [f64]) -> Self {
        let mut eval = LatticeEval {
            model,
            points,
            phase: Vec::new(),
            phase_sum: Vec::new(),
            indep: Vec::new(),
            zero_lag: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        if !model.family().is_count() {
            return eval;
        }
        let th = model.theta();
        let (delta, alpha, p) = (th[0], th[1], th[2]);
        let w: Vec<Complex64> = points.iter().map(|&x| unit_root_pow(x, alpha)).collect();
        // x_a + x_b = L(2(a + b) - 2m)/m
        let sums: Vec<f64> = (0..=2 * m)
            .map(|s| half_width * (2.0 * s as f64 - 2.0 * m as f64) / m as f64)
            .collect();
        let w_sum = sums.iter().map(|&x| unit_root_pow(x, alpha));
        let scale = match model.family() {
            Family::Inar1 => delta / (1.0 - p.powf(alpha)),
            _ => delta * (1.0 + p.powf(alpha)),
        };
        eval.phase = points.iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
        eval.phase_sum = sums.iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
        eval.indep = w.iter().map(|wa| (-wa * scale).exp()).collect();
        eval.zero_lag = w_sum.map(|ws| (-ws * scale).exp()).collect();
        let per_point = |c: f64| w.iter().map(|wa| (-wa * c).exp()).collect::<Vec<_>>();
        match model.family() {
            Family::Inar1 => {
                for ell in 1..=model.max_lag() {
                    let pla = p.powi(ell as i32).powf(alpha);
                    eval.left.push(per_point(scale * (1.0 - pla)));
                }
            }
            _ => {
                eval.left.push(per_point(delta));
                eval.right.push(per_point(delta * p.powf(alpha)));
            }
        }
        eval
    }

    fn coeff(&self, ell: usize, a: usize, b: usize) -> Complex64 {
        if self.points[a] == 0.0 || self.points[b] == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let th = self.model.theta();
        let family = self.model.family();
        if !family.is_count() {
            return self.model.coeff(ell as i64, self.points[a], self.points[b]);
        }
        let indep = self.indep[a] * self.indep[b];
        if ell == 0 {
            return self.zero_lag[a + b] - indep;
        }
        let (delta, alpha, p) = (th[0], th[1], th[2]);
        match family {
            Family::Inar1 => {
                let kappa = delta / (1.0 - p.powf(alpha));
                let pl = p.powi(ell as i32);
                let root = ONE - self.phase[b] * (1.0 - pl) - self.phase_sum[a + b] * pl;
                self.left[ell - 1][a] * exp_neg_pow(root, alpha, kappa) - indep
            }
            _ if ell == 1 => {
                let root = ONE - self.phase[b] * (1.0 - p) - self.phase_sum[a + b] * p;
                self.left[0][a] * self.right[0][b] * exp_neg_pow(root, alpha, delta) - indep
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// `exp(-k z^α)` on the principal branch, with `0^α = 0`.
#[inline]
fn exp_neg_pow(z: Complex64, alpha: f64, k: f64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return ONE;
    }
    let r = (0.5 * alpha * z.norm_sqr().ln()).exp();
    let (s, c) = (alpha * z.arg()).sin_cos();
    Complex64::from_polar((-k * r * c).exp(), -k * r * s)
}

/// `f_θ(λ; u, v)` for a validated model.
pub fn eval_spectrum(model: &ModelSpec, lambda: f64, u: f64, v: f64) -> Complex64 {
    model.spectrum(lambda, u, v)
}

/// `C_ℓ(u, v) = Cov(e^{iuZ_{t+ℓ}}, e^{-ivZ_t})` for a validated model.
pub fn fourier_coeff(model: &ModelSpec, ell: i64, u: f64, v: f64) -> Complex64 {
    model.coeff(ell, u, v)
}

/// `(1 - e^{ix})^α` on the principal branch.
pub fn unit_root_pow(x: f64, alpha: f64) -> Complex64 {
    principal_pow(ONE - Complex64::from_polar(1.0, x), alpha)
}

/// `z^α` on the principal branch with `0^α = 0`.
#[inline]
fn principal_pow(z: Complex64, alpha: f64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z.powf(alpha)
    }
}

/// `1 - e^{iv}(1 - q + q e^{iu})`, written with `e^{i(u+v)}` so that it is
/// exact on the slice `u + v = 0` at `q = 1`.
#[inline]
fn thinned_root(q: f64, v: f64, sum: f64) -> Complex64 {
    ONE - Complex64::from_polar(1.0 - q, v) - Complex64::from_polar(q, sum)
}

fn cauchy_ma1_coeff(a: f64, delta: f64, ell: u64, u: f64, v: f64) -> f64 {
    let b = 1.0 / a;
    let scale = 1.0 + b.abs();
    let indep = (-delta * (u.abs() + v.abs()) * scale).exp();
    match ell {
        0 => (-delta * (u + v).abs() * scale).exp() - indep,
        1 => (-delta * (u.abs() + (v - b * u).abs() + (b * v).abs())).exp() - indep,
        _ => 0.0,
    }
}

fn cauchy_ar1_coeff(a: f64, delta: f64, ell: u64, u: f64, v: f64) -> f64 {
    let abs_a = a.abs();
    if abs_a < 1.0 {
        let c = delta / (1.0 - abs_a);
        let al = a.powi(ell as i32);
        (-c * ((u * al + v).abs() + u.abs() * (1.0 - al.abs()))).exp() - (-c * (u.abs() + v.abs())).exp()
    } else {
        let b = 1.0 / a;
        let c = delta * b.abs() / (1.0 - b.abs());
        let bl = b.powi(ell as i32);
        (-c * ((v * bl + u).abs() + v.abs() * (1.0 - bl.abs()))).exp() - (-c * (u.abs() + v.abs())).exp()
    }
}

fn gauss_ma1_coeff(a: f64, sigma2: f64, ell: u64, u: f64, v: f64) -> f64 {
    let b = 1.0 / a;
    // Exponents are combined before exponentiating to avoid ∞ · 0.
    let base = -0.5 * sigma2 * (u * u + v * v) * (1.0 + b * b);
    match ell {
        0 => (base - sigma2 * u * v * (1.0 + b * b)).exp() - base.exp(),
        1 => (base + sigma2 * u * v * b).exp() - base.exp(),
        _ => 0.0,
    }
}

fn gauss_ar1_coeff(a: f64, sigma2: f64, ell: u64, u: f64, v: f64) -> f64 {
    let g = sigma2 / (1.0 - a * a);
    let base = -0.5 * g * (u * u + v * v);
    (base - g * u * v * a.powi(ell as i32)).exp() - base.exp()
}

fn inma1_coeff(delta: f64, alpha: f64, p: f64, ell: u64, u: f64, v: f64) -> Complex64 {
    let pa = p.powf(alpha);
    let wu = unit_root_pow(u, alpha);
    let wv = unit_root_pow(v, alpha);
    let indep = (-(wu + wv) * delta * (1.0 + pa)).exp();
    match ell {
        0 => (-unit_root_pow(u + v, alpha) * delta * (1.0 + pa)).exp() - indep,
        1 => (-(wv * pa + principal_pow(thinned_root(p, v, u + v), alpha) + wu) * delta).exp() - indep,
        _ => Complex64::new(0.0, 0.0),
    }
}

fn inar1_coeff(delta: f64, alpha: f64, p: f64, ell: u64, u: f64, v: f64) -> Complex64 {
    let kappa = delta / (1.0 - p.powf(alpha));
    let wu = unit_root_pow(u, alpha);
    let wv = unit_root_pow(v, alpha);
    let pl = p.powi(ell as i32);
    let pal = pl.powf(alpha);
    (-(wu * (1.0 - pal) + principal_pow(thinned_root(pl, v, u + v), alpha)) * kappa).exp() - (-(wu + wv) * kappa).exp()
}

/// Two-sided linear filter `Z_t = Σ_k ψ_k ε_{t-k}` with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedFilter {
    /// Index of `coeffs[0]`.
    pub start: i64,
    pub coeffs: Vec<f64>,
}

impl TwoSidedFilter {
    pub fn new(start: i64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("filter has empty support"));
        }
        Ok(Self { start, coeffs })
    }

    /// Expands `Π(1 - ξ_i^{-1} B) Π(1 - ξ_j B^{-1})`; support `[-d2, d1]`.
    pub fn from_roots(causal: &[f64], anticausal: &[f64]) -> Self {
        let mut filter = TwoSidedFilter {
            start: 0,
            coeffs: vec![1.0],
        };
        for &xi in causal {
            filter = filter.convolve(&TwoSidedFilter {
                start: 0,
                coeffs: vec![1.0, -1.0 / xi],
            });
        }
        for &xi in anticausal {
            filter = filter.convolve(&TwoSidedFilter {
                start: -1,
                coeffs: vec![-xi, 1.0],
            });
        }
        filter
    }

    pub fn convolve(&self, other: &TwoSidedFilter) -> TwoSidedFilter {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        TwoSidedFilter {
            start: self.start + other.start,
            coeffs,
        }
    }

    pub fn end(&self) -> i64 {
        self.start + self.coeffs.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> f64 {
        if k < self.start || k > self.end() {
            0.0
        } else {
            self.coeffs[(k - self.start) as usize]
        }
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Lag coefficient of the filtered Cauchy(δ) process:
    /// `exp(-δ Σ_k |u ψ_{k+ℓ} + v ψ_k|) - exp(-δ (|u| + |v|) Σ_k |ψ_k|)`.
    pub fn cauchy_coeff(&self, delta: f64, ell: i64, u: f64, v: f64) -> f64 {
        let lo = self.start - ell.abs();
        let hi = self.end() + ell.abs();
        let joint: f64 = (lo..=hi).map(|k| (u * self.get(k + ell) + v * self.get(k)).abs()).sum();
        (-delta * joint).exp() - (-delta * (u.abs() + v.abs()) * self.abs_sum()).exp()
    }
}

/// Generic Cauchy linear-process coefficient; see [`TwoSidedFilter::cauchy_coeff`].
pub fn linear_cauchy_coeff(psi: &TwoSidedFilter, delta: f64, ell: i64, u: f64, v: f64) -> Result<f64> {
    if psi.coeffs.is_empty() {
        return Err(Error::param("filter has empty support"));
    }
    if !(delta > 0.0) {
        return Err(Error::param(format!("delta = {delta} must be > 0")));
    }
    Ok(psi.cauchy_coeff(delta, ell, u, v))
}

/// Stationary marginal of an INAR(1) process: discrete stable with scale
/// `δ / (1 - p^α)` and the same exponent.
pub fn inar_marginal(delta: f64, alpha: f64, p: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::NonStationary(format!(
            "thinning probability p = {p} must be < 1"
        )));
    }
    if !(delta > 0.0) || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("invalid (delta, alpha) = ({delta}, {alpha})")));
    }
    Ok((delta / (1.0 - p.powf(alpha)), alpha))
}

/// `Σ_j |Σ_ℓ c_ℓ e^{-iℓλ_j}|²` over `λ_j = 2πj/n`, `j = 1..n-1`, where
/// `coeffs[k]` holds `c_ℓ` for `ℓ = k - max_lag`.
pub fn lag_energy(coeffs: &[Complex64], n: usize) -> f64 {
    let len = coeffs.len();
    if 2 * len <= n + 1 {
        // Orthogonality without aliasing: Σ_{j=0}^{n-1} e^{-ikλ_j} = n δ_k.
        let sum: Complex64 = coeffs.iter().sum();
        let energy: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        return n as f64 * energy - sum.norm_sqr();
    }
    let mut acc = 0.0;
    for (a, ca) in coeffs.iter().enumerate() {
        for (b, cb) in coeffs.iter().enumerate() {
            let k = a as i64 - b as i64;
            let s = if k.rem_euclid(n as i64) == 0 {
                n as f64 - 1.0
            } else {
                -1.0
            };
            acc += (ca * cb.conj()).re * s;
        }
    }
    acc
}

/// Rounding can push a sum of squares slightly below zero; NaN passes through.
pub(crate) fn clamp_nonnegative(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Lattice used by the theoretical quadratures. It mirrors the estimator:
/// `u_i = -L + 2Li/n_uv` (`i = 1..n_uv`) and `λ_j = 2πj/n_lambda`
/// (`j = 1..n_lambda-1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub half_width: f64,
    pub n_lambda: usize,
    pub n_uv: usize,
}

impl QuadSpec {
    pub fn new(half_width: f64, n_lambda: usize, n_uv: usize) -> Result<Self> {
        if !(half_width > 0.0) || n_lambda < 8 || n_uv < 8 {
            return Err(Error::param("quadrature needs L > 0 and at least 8 nodes per axis"));
        }
        Ok(Self {
            half_width,
            n_lambda,
            n_uv,
        })
    }

    pub fn uv_points(&self) -> Vec<f64> {
        uv_lattice(self.half_width, self.n_uv)
    }

    pub fn lambda_points(&self) -> Vec<f64> {
        (1..self.n_lambda)
            .map(|j| 2.0 * PI * j as f64 / self.n_lambda as f64)
            .collect()
    }

    /// Volume element `(2π / n_λ)(2L / n_uv)²`.
    pub fn weight(&self) -> f64 {
        let h = 2.0 * self.half_width / self.n_uv as f64;
        2.0 * PI / self.n_lambda as f64 * h * h
    }
}

/// `-L + 2Li/m` for `i = 1..=m`.
pub fn uv_lattice(half_width: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|i| lattice_point(half_width, m, i)).collect()
}

/// `x_k = -L + 2Lk/m`, evaluated as `L(2k - m)/m` so that `x_{m-k} = -x_k`
/// holds exactly. Closed forms with `|u + v|^α` terms are not Lipschitz at
/// `u + v = 0`, and a one-ulp miss there costs far more than one ulp.
pub fn lattice_point(half_width: f64, m: usize, k: usize) -> f64 {
    half_width * (2.0 * k as f64 - m as f64) / m as f64
}

/// Lattice quadrature of `∫∫∫ |f_a - f_b|² du dv dλ` over
/// `[0, 2π] × [-L, L]²`.
pub fn divergence_d(model_a: &ModelSpec, model_b: &ModelSpec, quad: &QuadSpec) -> f64 {
    let lags = model_a.max_lag().max(model_b.max_lag()) as i64;
    let pts = quad.uv_points();
    let mut diff = vec![Complex64::new(0.0, 0.0); (2 * lags + 1) as usize];
    let mut total = 0.0;
    for &u in &pts {
        for &v in &pts {
            for (slot, ell) in diff.iter_mut().zip(-lags..=lags) {
                let ca = if ell.unsigned_abs() as usize <= model_a.max_lag() {
                    model_a.coeff(ell, u, v)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let cb = if ell.unsigned_abs() as usize <= model_b.max_lag() {
                    model_b.coeff(ell, u, v)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                *slot = ca - cb;
            }
            total += lag_energy(&diff, quad.n_lambda);
        }
    }
    clamp_nonnegative(total * quad.weight() / (4.0 * PI * PI))
}

/// Lattice quadrature of `∫∫∫ f(λ; u, -u) f(-λ; v, -v) du dv dλ` for an
/// arbitrary spectrum (parametric or empirical).
pub fn bias_term<F>(spectrum: F, quad: &QuadSpec) -> f64
where
    F: Fn(f64, f64, f64) -> Complex64,
{
    let pts = quad.uv_points();
    let mut total = 0.0;
    for lambda in quad.lambda_points() {
        let a: Complex64 = pts.iter().map(|&u| spectrum(lambda, u, -u)).sum();
        let b: Complex64 = pts.iter().map(|&v| spectrum(-lambda, v, -v)).sum();
        total += (a * b).re;
    }
    total * quad.weight()
}

/// [`bias_term`] for a parametric spectrum.
pub fn bias_term_model(model: &ModelSpec, quad: &QuadSpec) -> f64 {
    bias_term(|l, u, v| model.spectrum(l, u, v), quad)
}
