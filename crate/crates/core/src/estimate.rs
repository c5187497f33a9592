//! Minimum-distance estimation: `θ̂ = argmin_θ D_n(I_n, f_θ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{Grid, Periodogram};
use crate::error::{Error, Result};
use crate::models::{Family, ModelSpec, DEFAULT_LMAX};
use crate::optim::{halton_starts, NelderMead};
use crate::rng;
use crate::series::TimeSeries;

/// Excluded open band `lo < |θ_coord| < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub coord: usize,
    pub lo: f64,
    pub hi: f64,
}

/// A labelled box searched independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }
}

/// Search space: a box, optional excluded bands and optional finite sets
/// for some coordinates (enumerated exhaustively).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub bands: Vec<Band>,
    #[serde(default)]
    pub discrete: Vec<(usize, Vec<f64>)>,
}

impl ParamSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let space = ParamSpace {
            lower,
            upper,
            bands: Vec::new(),
            discrete: Vec::new(),
        };
        space.validate()?;
        Ok(space)
    }

    pub fn with_band(mut self, coord: usize, lo: f64, hi: f64) -> Result<Self> {
        self.bands.push(Band { coord, lo, hi });
        self.validate()?;
        Ok(self)
    }

    pub fn with_discrete(mut self, coord: usize, values: Vec<f64>) -> Result<Self> {
        self.discrete.retain(|(c, _)| *c != coord);
        self.discrete.push((coord, values));
        self.discrete.sort_by_key(|(c, _)| *c);
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::LengthMismatch {
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::param(format!(
                    "bounds [{lo}, {hi}] of coordinate {i} are invalid"
                )));
            }
        }
        for b in &self.bands {
            if b.coord >= self.dim() || !(0.0 <= b.lo && b.lo < b.hi) {
                return Err(Error::param(format!("invalid band {b:?}")));
            }
            let (lo, hi) = (self.lower[b.coord], self.upper[b.coord]);
            if b.hi >= lo.abs().max(hi.abs()) {
                return Err(Error::param(format!("band {b:?} does not lie inside the bounds")));
            }
        }
        for (c, values) in &self.discrete {
            if *c >= self.dim() || values.is_empty() {
                return Err(Error::param(format!(
                    "discrete set for coordinate {c} is empty or out of range"
                )));
            }
            if values.iter().any(|v| !(self.lower[*c] <= *v && *v <= self.upper[*c])) {
                return Err(Error::param(format!(
                    "discrete values for coordinate {c} leave the bounds"
                )));
            }
        }
        Ok(())
    }

    /// Default search space for a family.
    pub fn default_for(family: Family, half_width: f64) -> Self {
        let space = match family {
            Family::CauchyMa1 | Family::CauchyMaGen { .. } => {
                let d = family.dim();
                ParamSpace::new(vec![1.0 / half_width; d], vec![half_width; d])
            }
            Family::CauchyAr1 => {
                ParamSpace::new(vec![-3.0, 0.05], vec![3.0, 10.0]).and_then(|s| s.with_band(0, 0.9, 1.1))
            }
            Family::GaussMa1 => {
                ParamSpace::new(vec![-10.0, 0.05], vec![10.0, 10.0]).and_then(|s| s.with_band(0, 0.0, 1.01))
            }
            Family::GaussAr1 => ParamSpace::new(vec![-0.99, 0.05], vec![0.99, 10.0]),
            Family::Inma1 | Family::Inar1 => ParamSpace::new(vec![0.01, 0.05, 0.001], vec![10.0, 1.0, 0.99]),
        };
        space.expect("default spaces are valid")
    }

    /// Continuous boxes left after removing the bands.
    pub fn regions(&self, family: Family) -> Vec<Region> {
        let mut regions = vec![Region {
            label: String::new(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }];
        for band in &self.bands {
            let mut next = Vec::new();
            for r in &regions {
                let (lo, hi) = (r.lower[band.coord], r.upper[band.coord]);
                let pieces = [
                    (lo, hi.min(-band.hi), "outer"),
                    (lo.max(-band.lo), hi.min(band.lo), "inner"),
                    (lo.max(band.hi), hi, "outer"),
                ];
                for (a, b, kind) in pieces {
                    if a <= b && !(band.lo == 0.0 && kind == "inner") {
                        let mut piece = r.clone();
                        piece.lower[band.coord] = a;
                        piece.upper[band.coord] = b;
                        piece.label = join_label(&r.label, region_name(family, kind));
                        next.push(piece);
                    }
                }
            }
            regions = next;
        }
        regions
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
            && self
                .bands
                .iter()
                .all(|b| !(b.lo < theta[b.coord].abs() && theta[b.coord].abs() < b.hi))
            && self.discrete.iter().all(|(c, values)| values.contains(&theta[*c]))
    }

    /// Every combination of discrete coordinate values (one empty
    /// combination when there are none).
    fn discrete_combinations(&self) -> Vec<Vec<(usize, f64)>> {
        let mut combos: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
        for (c, values) in &self.discrete {
            combos = combos
                .into_iter()
                .flat_map(|base| {
                    values.iter().map(move |v| {
                        let mut next = base.clone();
                        next.push((*c, *v));
                        next
                    })
                })
                .collect();
        }
        combos
    }
}

fn region_name(family: Family, kind: &str) -> &'static str {
    match (family, kind) {
        (Family::CauchyAr1, "inner") => "causal",
        (Family::CauchyAr1, _) => "noncausal",
        (_, "inner") => "inner",
        _ => "outer",
    }
}

fn join_label(base: &str, part: &str) -> String {
    if base.is_empty() {
        part.to_string()
    } else {
        format!("{base}/{part}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Quasi-random starts per (discrete choice, region).
    pub restarts: usize,
    /// Extra start tried first in every region it belongs to.
    pub warm_start: Option<Vec<f64>>,
    pub optimizer: NelderMead,
    pub lmax: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            warm_start: None,
            optimizer: NelderMead::default(),
            lmax: DEFAULT_LMAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub family: Family,
    pub theta_hat: Vec<f64>,
    pub objective: f64,
    pub n_restarts_used: usize,
    pub converged: bool,
    pub region: String,
}

/// Minimizes `D_n` for `series` over `space`.
pub fn fit(
    series: &TimeSeries,
    family: Family,
    space: &ParamSpace,
    grid: &Grid,
    config: &SearchConfig,
    seed: u64,
) -> Result<Estimate> {
    if series.is_constant() {
        return Err(Error::InsufficientData("series is constant".into()));
    }
    if grid.n() != series.len() {
        return Err(Error::LengthMismatch {
            expected: grid.n(),
            got: series.len(),
        });
    }
    let template = template_model(family, space, config.lmax)?;
    let periodogram = Periodogram::new(series, grid, template.max_lag())?;
    fit_periodogram(&periodogram, &template, space, config, seed)
}

/// [`fit`] on precomputed periodogram sums. `template` fixes the family,
/// `lmax` and unit-band settings.
pub fn fit_periodogram(
    periodogram: &Periodogram,
    template: &ModelSpec,
    space: &ParamSpace,
    config: &SearchConfig,
    seed: u64,
) -> Result<Estimate> {
    if template.max_lag() > periodogram.lags() {
        return Err(Error::param("periodogram holds fewer lags than the model needs"));
    }
    fit_objective(
        |theta| match template.with_theta(theta.to_vec()) {
            Ok(model) => periodogram.criterion(&model),
            Err(_) => f64::INFINITY,
        },
        template.family(),
        space,
        config,
        seed,
    )
}

/// A valid model of the family, used to carry `lmax` and unit-band settings.
pub fn template_model(family: Family, space: &ParamSpace, lmax: usize) -> Result<ModelSpec> {
    if space.dim() != family.dim() {
        return Err(Error::LengthMismatch {
            expected: family.dim(),
            got: space.dim(),
        });
    }
    let theta = match family {
        Family::CauchyMa1 | Family::CauchyAr1 => vec![0.5, 1.0],
        Family::GaussMa1 => vec![2.0, 1.0],
        Family::GaussAr1 => vec![0.5, 1.0],
        Family::Inma1 | Family::Inar1 => vec![1.0, 0.5, 0.5],
        Family::CauchyMaGen { .. } => vec![1.0; family.dim()],
    };
    let mut model = ModelSpec::new(family, theta)?;
    if family == Family::CauchyAr1 {
        // The search space carries the excluded band.
        model = model.with_unit_band(0.0)?;
    }
    if family.is_autoregressive() {
        model = model.with_lmax(lmax)?;
    }
    Ok(model)
}

/// Multi-start Nelder–Mead over every (discrete choice, region) pair.
/// Ties go to the lexicographically smallest θ, so the result does not
/// depend on the order in which starts are run.
pub fn fit_objective<F>(
    objective: F,
    family: Family,
    space: &ParamSpace,
    config: &SearchConfig,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    space.validate()?;
    if space.dim() != family.dim() {
        return Err(Error::LengthMismatch {
            expected: family.dim(),
            got: space.dim(),
        });
    }
    struct Task {
        fixed: Vec<(usize, f64)>,
        region: Region,
        start: Vec<f64>,
    }
    let mut tasks = Vec::new();
    let regions = space.regions(family);
    for (ci, fixed) in space.discrete_combinations().into_iter().enumerate() {
        for (ri, region) in regions.iter().enumerate() {
            let mut region = region.clone();
            for &(c, v) in &fixed {
                region.lower[c] = v;
                region.upper[c] = v;
            }
            if let Some(w) = &config.warm_start {
                let mut s = w.clone();
                for &(c, v) in &fixed {
                    s[c] = v;
                }
                if s.len() == space.dim() && region.contains(&s) {
                    tasks.push(Task {
                        fixed: fixed.clone(),
                        region: region.clone(),
                        start: s,
                    });
                }
            }
            let mut stream = rng::stream(seed, (ci * regions.len() + ri) as u64);
            for start in halton_starts(config.restarts, &region.lower, &region.upper, &mut stream) {
                tasks.push(Task {
                    fixed: fixed.clone(),
                    region: region.clone(),
                    start,
                });
            }
        }
    }
    if tasks.is_empty() {
        return Err(Error::param("search space yields no starting points"));
    }

    let results: Vec<(Vec<f64>, f64, bool, String)> = tasks
        .par_iter()
        .map(|task| {
            // Optimize over the free coordinates only.
            let free: Vec<usize> = (0..space.dim())
                .filter(|i| !task.fixed.iter().any(|(c, _)| c == i))
                .collect();
            let full = |x: &[f64]| {
                let mut theta = task.start.clone();
                for (k, &i) in free.iter().enumerate() {
                    theta[i] = x[k];
                }
                theta
            };
            let lower: Vec<f64> = free.iter().map(|&i| task.region.lower[i]).collect();
            let upper: Vec<f64> = free.iter().map(|&i| task.region.upper[i]).collect();
            let x0: Vec<f64> = free.iter().map(|&i| task.start[i]).collect();
            if free.is_empty() {
                let v = objective(&task.start);
                return (task.start.clone(), v, true, task.region.label.clone());
            }
            let min = config.optimizer.minimize(|x| objective(&full(x)), &x0, &lower, &upper);
            (full(&min.x), min.value, min.converged, task.region.label.clone())
        })
        .collect();

    let best = results
        .iter()
        .filter(|r| r.1.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lexicographic(&a.0, &b.0)))
        .ok_or_else(|| Error::NotConverged("objective was not finite at any start".into()))?;
    Ok(Estimate {
        family,
        theta_hat: best.0.clone(),
        objective: best.1,
        n_restarts_used: results.len(),
        converged: best.2,
        region: best.3.clone(),
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{divergence_d, QuadSpec};

    #[test]
    fn regions_split_bands() {
        let s = ParamSpace::default_for(Family::CauchyAr1, 3.14);
        let r = s.regions(Family::CauchyAr1);
        assert_eq!(r.len(), 3);
        assert_eq!(r.iter().filter(|x| x.label == "causal").count(), 1);
        let causal = r.iter().find(|x| x.label == "causal").unwrap();
        assert_eq!((causal.lower[0], causal.upper[0]), (-0.9, 0.9));
        assert!(s.contains(&[0.9, 1.0]) && s.contains(&[1.1, 1.0]) && !s.contains(&[1.0, 1.0]));

        let g = ParamSpace::default_for(Family::GaussMa1, 3.14).regions(Family::GaussMa1);
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|r| r.label == "outer"));
    }

    #[test]
    fn space_validation() {
        assert!(ParamSpace::new(vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(ParamSpace::new(vec![1.0], vec![0.0]).is_err());
        let s = ParamSpace::new(vec![-3.0, 0.1], vec![3.0, 5.0]).unwrap();
        assert!(s.clone().with_band(0, 3.5, 4.0).is_err());
        assert!(s.clone().with_discrete(1, vec![]).is_err());
        assert!(s.clone().with_discrete(1, vec![6.0]).is_err());
        assert!(s.with_discrete(1, vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn discrete_enumeration() {
        let s = ParamSpace::default_for(Family::Inar1, 3.14)
            .with_discrete(1, vec![0.3, 0.7, 0.9])
            .unwrap();
        assert_eq!(s.discrete_combinations().len(), 3);
        assert!(!s.contains(&[1.0, 0.5, 0.3]));
        assert!(s.contains(&[1.0, 0.7, 0.3]));
    }

    #[test]
    fn oracle_objective_recovers_truth() {
        let quad = QuadSpec::new(3.14, 64, 16).unwrap();
        let cases = [
            (Family::GaussAr1, vec![0.5, 1.0]),
            (Family::CauchyAr1, vec![1.3, 2.0]),
            (Family::Inar1, vec![2.0, 0.7, 0.3]),
        ];
        for (family, truth) in cases {
            let space = ParamSpace::default_for(family, 3.14);
            let template = template_model(family, &space, 2).unwrap();
            let target = template.with_theta(truth.clone()).unwrap();
            let config = SearchConfig {
                optimizer: NelderMead {
                    f_tol: 1e-14,
                    f_floor: 1e-14,
                    x_tol: 1e-10,
                    max_iter: 2000,
                    ..NelderMead::default()
                },
                ..SearchConfig::default()
            };
            let est = fit_objective(
                |th| match template.with_theta(th.to_vec()) {
                    Ok(m) => divergence_d(&target, &m, &quad),
                    Err(_) => f64::INFINITY,
                },
                family,
                &space,
                &config,
                11,
            )
            .unwrap();
            for (a, b) in est.theta_hat.iter().zip(&truth) {
                assert!((a - b).abs() < 1e-4, "{family}: {:?} vs {truth:?}", est.theta_hat);
            }
        }
    }

    #[test]
    fn estimate_respects_space_and_is_deterministic() {
        let model = ModelSpec::new(Family::GaussAr1, vec![0.5, 1.0]).unwrap();
        let z = crate::simulate::simulate_path(&model, 200, 1).unwrap();
        let grid = Grid::new(3.14, 10, 200).unwrap();
        let space = ParamSpace::default_for(Family::GaussAr1, 3.14);
        let config = SearchConfig::default();
        let a = fit(&z, Family::GaussAr1, &space, &grid, &config, 5).unwrap();
        let b = fit(&z, Family::GaussAr1, &space, &grid, &config, 5).unwrap();
        assert_eq!(a, b);
        assert!(space.contains(&a.theta_hat));
        assert!(a.objective >= 0.0);
        assert!(a.n_restarts_used >= 8);
        assert!(fit(
            &TimeSeries::real(vec![1.0; 200]).unwrap(),
            Family::GaussAr1,
            &space,
            &grid,
            &config,
            5
        )
        .is_err());
    }
}
