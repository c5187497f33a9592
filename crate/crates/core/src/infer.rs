//! Subsampling tests.
//!
//! Every test recomputes a root-scaled statistic on all `n - b + 1`
//! contiguous blocks of length `b` and reports the fraction of blocks whose
//! statistic strictly exceeds the full-sample one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::{Grid, Periodogram};
use crate::error::{Error, Result};
use crate::estimate::{fit_periodogram, template_model, Estimate, ParamSpace, SearchConfig};
use crate::models::Family;
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Gof,
    TwoSided,
    Greater,
    Less,
    UnitRoot,
    NonInvertibility,
}

/// Direction of a parameter test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `|√b(θ̂_b - κ)| > |√n(θ̂_n - κ)|`
    TwoSided,
    /// `√b(θ̂_b - κ) > √n(θ̂_n - κ)`
    Greater,
    /// `√b(κ - θ̂_b) > √n(κ - θ̂_n)`
    Less,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "two_sided" | "twosided" => Ok(Mode::TwoSided),
            "greater" => Ok(Mode::Greater),
            "less" => Ok(Mode::Less),
            _ => Err(Error::param(format!("unknown test mode '{s}'"))),
        }
    }
}

/// Map applied to the tested coordinate before centring at `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Abs,
}

impl Transform {
    fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub kind: TestKind,
    /// `√n T_n` for goodness of fit, `√n(g(θ̂_n) - κ)` for parameter tests.
    pub statistic_full: f64,
    pub block_length: usize,
    /// One entry per block start; `None` marks an excluded block.
    pub block_statistics: Vec<Option<f64>>,
    pub excluded_blocks: usize,
    pub p_value: f64,
    pub phi: f64,
    pub reject: bool,
    pub theta_hat: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

/// Applies `stat` to every block `Z_t, ..., Z_{t+b-1}` (`t` counted from
/// zero), in order.
pub fn subsample_statistics<T, F>(series: &TimeSeries, b: usize, stat: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&TimeSeries, usize) -> T + Sync,
{
    let n = series.len();
    if b == 0 || b >= n {
        return Err(Error::BlockLength { b, n });
    }
    Ok((0..=n - b)
        .into_par_iter()
        .map(|t| stat(&series.block(t, b), t))
        .collect())
}

/// Fraction of non-excluded blocks that strictly exceed the full statistic
/// in the direction given by `mode`, and the number of excluded blocks.
pub fn exceedance_p_value(full: f64, blocks: &[Option<f64>], mode: Mode) -> Result<(f64, usize)> {
    let used: Vec<f64> = blocks.iter().flatten().copied().collect();
    let excluded = blocks.len() - used.len();
    if used.is_empty() {
        return Err(Error::NotConverged("every block was excluded".into()));
    }
    let exceed = used
        .iter()
        .filter(|&&s| match mode {
            Mode::TwoSided => s.abs() > full.abs(),
            Mode::Greater => s > full,
            Mode::Less => s < full,
        })
        .count();
    Ok((exceed as f64 / used.len() as f64, excluded))
}

/// Search settings for the full sample and for the blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleConfig {
    pub search: SearchConfig,
    /// Quasi-random starts per region for block fits, on top of the warm
    /// start at the full-sample estimate.
    pub block_restarts: usize,
}

impl Default for SubsampleConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            block_restarts: 2,
        }
    }
}

fn block_seed(seed: u64, t: usize) -> u64 {
    seed ^ (t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Fitted {
    estimate: Estimate,
    periodogram: Periodogram,
}

fn fit_series(
    series: &TimeSeries,
    family: Family,
    space: &ParamSpace,
    grid: &Grid,
    search: &SearchConfig,
    seed: u64,
) -> Result<Fitted> {
    if series.is_constant() {
        return Err(Error::InsufficientData("constant block".into()));
    }
    let template = template_model(family, space, search.lmax)?;
    let grid = grid.with_len(series.len())?;
    let periodogram = Periodogram::new(series, &grid, template.max_lag())?;
    let estimate = fit_periodogram(&periodogram, &template, space, search, seed)?;
    Ok(Fitted { estimate, periodogram })
}

fn gof_value(fitted: &Fitted, family: Family, space: &ParamSpace, lmax: usize) -> Result<f64> {
    let model = template_model(family, space, lmax)?.with_theta(fitted.estimate.theta_hat.clone())?;
    Ok(fitted.periodogram.gof_statistic(&model))
}

fn check_block(b: usize, n: usize) -> Result<()> {
    if b < 8 || b >= n {
        return Err(Error::BlockLength { b, n });
    }
    Ok(())
}

/// Fits on the full sample and every block, compares `√b T_{b,t}` with
/// `√n T_n`. `grid` fixes `L` and `M`; its length is replaced per sample.
#[allow(clippy::too_many_arguments)]
pub fn gof_test(
    series: &TimeSeries,
    family: Family,
    space: &ParamSpace,
    grid: &Grid,
    b: usize,
    phi: f64,
    config: &SubsampleConfig,
    seed: u64,
) -> Result<TestReport> {
    let n = series.len();
    check_block(b, n)?;
    let lmax = config.search.lmax;
    let full = fit_series(series, family, space, grid, &config.search, seed)?;
    let t_n = gof_value(&full, family, space, lmax)?;
    let block_search = SearchConfig {
        restarts: config.block_restarts,
        warm_start: Some(full.estimate.theta_hat.clone()),
        ..config.search.clone()
    };
    let blocks = subsample_statistics(series, b, |block, t| {
        let fitted = fit_series(block, family, space, grid, &block_search, block_seed(seed, t)).ok()?;
        if !fitted.estimate.converged {
            return None;
        }
        gof_value(&fitted, family, space, lmax)
            .ok()
            .map(|v| (b as f64).sqrt() * v)
    })?;
    let statistic_full = (n as f64).sqrt() * t_n;
    let (p_value, excluded_blocks) = exceedance_p_value(statistic_full, &blocks, Mode::Greater)?;
    Ok(TestReport {
        kind: TestKind::Gof,
        statistic_full,
        block_length: b,
        block_statistics: blocks,
        excluded_blocks,
        p_value,
        phi,
        reject: p_value <= phi,
        theta_hat: full.estimate.theta_hat,
        coord: None,
        kappa: None,
    })
}

/// Subsampling test of `H: g(θ_coord) = κ` (two-sided), `<= κ` (greater)
/// or `>= κ` (less), with `g` the identity or the absolute value.
#[allow(clippy::too_many_arguments)]
pub fn parameter_test(
    series: &TimeSeries,
    family: Family,
    space: &ParamSpace,
    grid: &Grid,
    coord: usize,
    kappa: f64,
    mode: Mode,
    transform: Transform,
    b: usize,
    phi: f64,
    config: &SubsampleConfig,
    seed: u64,
) -> Result<TestReport> {
    let n = series.len();
    check_block(b, n)?;
    if coord >= family.dim() {
        return Err(Error::param(format!("coordinate {coord} out of range for {family}")));
    }
    if !kappa.is_finite() {
        return Err(Error::param("kappa must be finite"));
    }
    let full = fit_series(series, family, space, grid, &config.search, seed)?;
    let block_search = SearchConfig {
        restarts: config.block_restarts,
        warm_start: Some(full.estimate.theta_hat.clone()),
        ..config.search.clone()
    };
    let blocks = subsample_statistics(series, b, |block, t| {
        let fitted = fit_series(block, family, space, grid, &block_search, block_seed(seed, t)).ok()?;
        if !fitted.estimate.converged {
            return None;
        }
        Some((b as f64).sqrt() * (transform.apply(fitted.estimate.theta_hat[coord]) - kappa))
    })?;
    let statistic_full = (n as f64).sqrt() * (transform.apply(full.estimate.theta_hat[coord]) - kappa);
    let (p_value, excluded_blocks) = exceedance_p_value(statistic_full, &blocks, mode)?;
    let kind = match mode {
        Mode::TwoSided => TestKind::TwoSided,
        Mode::Greater => TestKind::Greater,
        Mode::Less => TestKind::Less,
    };
    Ok(TestReport {
        kind,
        statistic_full,
        block_length: b,
        block_statistics: blocks,
        excluded_blocks,
        p_value,
        phi,
        reject: p_value <= phi,
        theta_hat: full.estimate.theta_hat,
        coord: Some(coord),
        kappa: Some(kappa),
    })
}

/// Two-sided test of an MA root at one: `H: ξ_coord = 1`.
#[allow(clippy::too_many_arguments)]
pub fn unit_root_test(
    series: &TimeSeries,
    family: Family,
    space: &ParamSpace,
    grid: &Grid,
    coord: usize,
    b: usize,
    phi: f64,
    config: &SubsampleConfig,
    seed: u64,
) -> Result<TestReport> {
    let mut report = parameter_test(
        series,
        family,
        space,
        grid,
        coord,
        1.0,
        Mode::TwoSided,
        Transform::Identity,
        b,
        phi,
        config,
        seed,
    )?;
    report.kind = TestKind::UnitRoot;
    Ok(report)
}

/// One-sided test of `H: |ξ_coord| <= 1` against `|ξ_coord| > 1`.
#[allow(clippy::too_many_arguments)]
pub fn invertibility_test(
    series: &TimeSeries,
    family: Family,
    space: &ParamSpace,
    grid: &Grid,
    coord: usize,
    b: usize,
    phi: f64,
    config: &SubsampleConfig,
    seed: u64,
) -> Result<TestReport> {
    let mut report = parameter_test(
        series,
        family,
        space,
        grid,
        coord,
        1.0,
        Mode::Greater,
        Transform::Abs,
        b,
        phi,
        config,
        seed,
    )?;
    report.kind = TestKind::NonInvertibility;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;
    use crate::simulate::simulate_path;

    #[test]
    fn block_counts_and_order() {
        let z = TimeSeries::real(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let means = subsample_statistics(&z, 2, |blk, _| blk.values().iter().sum::<f64>() / 2.0).unwrap();
        assert_eq!(means, vec![1.5, 2.5, 3.5]);
        assert_eq!(subsample_statistics(&z, 3, |_, t| t).unwrap(), vec![0, 1]);
        assert!(subsample_statistics(&z, 4, |_, _| 0).is_err());
        assert_eq!(subsample_statistics(&z, 2, |_, _| 7).unwrap(), vec![7, 7, 7]);
    }

    #[test]
    fn synthetic_p_values() {
        let blocks = [Some(1.0), Some(2.0), Some(3.0)];
        assert_eq!(exceedance_p_value(2.5, &blocks, Mode::Greater).unwrap(), (1.0 / 3.0, 0));
        let blocks = [Some(0.1), Some(0.5), Some(0.9)];
        // Strict inequality: the tie at 0.5 does not count.
        assert_eq!(exceedance_p_value(0.5, &blocks, Mode::Greater).unwrap().0, 1.0 / 3.0);
        assert_eq!(exceedance_p_value(0.5, &blocks, Mode::Less).unwrap().0, 1.0 / 3.0);
        assert_eq!(exceedance_p_value(-0.5, &blocks, Mode::TwoSided).unwrap().0, 1.0 / 3.0);
        assert_eq!(exceedance_p_value(10.0, &blocks, Mode::Greater).unwrap().0, 0.0);
        let partial = [Some(1.0), None, Some(3.0)];
        assert_eq!(exceedance_p_value(2.0, &partial, Mode::Greater).unwrap(), (0.5, 1));
        assert!(exceedance_p_value(2.0, &[None, None], Mode::Greater).is_err());
    }

    #[test]
    fn gof_report_is_reproducible() {
        let model = ModelSpec::new(Family::Inar1, vec![2.0, 0.7, 0.3]).unwrap();
        let z = simulate_path(&model, 60, 4).unwrap();
        let space = ParamSpace::default_for(Family::Inar1, 3.14)
            .with_discrete(1, vec![0.3, 0.7, 0.9])
            .unwrap();
        let grid = Grid::new(3.14, 8, 60).unwrap();
        let config = SubsampleConfig::default();
        let a = gof_test(&z, Family::Inar1, &space, &grid, 50, 0.05, &config, 1).unwrap();
        let b = gof_test(&z, Family::Inar1, &space, &grid, 50, 0.05, &config, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.block_statistics.len(), 11);
        let used = (11 - a.excluded_blocks) as f64;
        assert!(((a.p_value * used).round() - a.p_value * used).abs() < 1e-9);
        assert_eq!(a.reject, a.p_value <= 0.05);
        assert!(gof_test(&z, Family::Inar1, &space, &grid, 60, 0.05, &config, 1).is_err());
        assert!(gof_test(&z, Family::Inar1, &space, &grid, 7, 0.05, &config, 1).is_err());
    }

    #[test]
    fn wrappers_set_kind() {
        let family = Family::CauchyMaGen {
            causal: 1,
            anticausal: 0,
        };
        let model = ModelSpec::new(family, vec![0.5, 2.0]).unwrap();
        let z = simulate_path(&model, 60, 9).unwrap();
        let space = ParamSpace::default_for(family, 3.14);
        let grid = Grid::new(3.14, 6, 60).unwrap();
        let config = SubsampleConfig::default();
        let r = unit_root_test(&z, family, &space, &grid, 0, 50, 0.05, &config, 3).unwrap();
        assert_eq!(r.kind, TestKind::UnitRoot);
        assert_eq!(r.kappa, Some(1.0));
        let r = invertibility_test(&z, family, &space, &grid, 0, 50, 0.05, &config, 3).unwrap();
        assert_eq!(r.kind, TestKind::NonInvertibility);
        assert!(parameter_test(
            &z,
            family,
            &space,
            &grid,
            5,
            1.0,
            Mode::Less,
            Transform::Identity,
            50,
            0.05,
            &config,
            3
        )
        .is_err());
    }
}
