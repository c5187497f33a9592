use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use genspec::empirical::{dft_kernels, write_grid_csv, Grid};
use genspec::estimate::{fit, Estimate, ParamSpace, SearchConfig};
use genspec::forecast::{hill_plot, mspe, predictions};
use genspec::infer::{
    gof_test, invertibility_test, parameter_test, unit_root_test, Mode, SubsampleConfig, TestReport, Transform,
};
use genspec::io::{format_series, from_json, parse_bounds, parse_f64_list, parse_series, to_json};
use genspec::models::{Family, ModelSpec};
use genspec::simulate::{simulate_change_point, simulate_path};
use genspec::{TimeSeries, ValueKind};

/// Generalized-spectrum estimation, testing and forecasting for heavy-tailed
/// and count time series.
#[derive(Debug, Parser)]
#[command(name = "genspec", version)]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "GENSPEC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a path and write it as a one-column CSV.
    Simulate(SimulateArgs),
    /// Minimum-distance fit; writes estimate JSON.
    Fit(FitArgs),
    /// Subsampling goodness-of-fit test.
    Gof(TestArgs),
    /// Subsampling test of one parameter against a value.
    TestParam(ParamArgs),
    /// Two-sided test of an MA root equal to one.
    TestUnitroot(RootArgs),
    /// One-sided test of invertibility of an MA root.
    TestInvert(RootArgs),
    /// One-step median forecasts for INAR(1).
    Predict(PredictArgs),
    /// Hill estimates for every order statistic.
    Hill(HillArgs),
    /// Dump the model spectrum (and optionally the periodogram) on a grid.
    SpectrumGrid(GridArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    family: Family,
    /// Comma-separated parameters in the family's order.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    lmax: usize,
    /// INAR(1) only: switch the thinning probability to this value after n/2.
    #[arg(long)]
    p_after: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct FitArgs {
    #[arg(long)]
    family: Family,
    #[arg(long = "in")]
    input: PathBuf,
    /// Half-width of the (u, v) box.
    #[arg(long = "L", default_value_t = 3.14)]
    half_width: f64,
    /// Grid points per axis.
    #[arg(long = "M", default_value_t = 30)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    lmax: usize,
    /// Finite set searched for the stable exponent of count families.
    #[arg(long)]
    alpha_set: Option<String>,
    /// Box `lo:hi,lo:hi,...` replacing the family default.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Quasi-random starts per region.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Block length.
    #[arg(long)]
    b: usize,
    /// Level.
    #[arg(long, default_value_t = 0.05)]
    phi: f64,
    /// Quasi-random starts per block fit besides the full-sample estimate.
    #[arg(long, default_value_t = 2)]
    block_restarts: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Identity,
    Abs,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[command(flatten)]
    test: TestArgs,
    /// Zero-based parameter index.
    #[arg(long)]
    coord: usize,
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
    /// two-sided, greater or less.
    #[arg(long, default_value = "two-sided")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "identity")]
    transform: TransformArg,
}

#[derive(Debug, Args)]
struct RootArgs {
    #[command(flatten)]
    test: TestArgs,
    /// Zero-based index of the tested root.
    #[arg(long, default_value_t = 0)]
    coord: usize,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Forecast every t after this many observations.
    #[arg(long)]
    split: usize,
    /// INAR(1) parameters `delta,alpha,p`.
    #[arg(long, conflicts_with = "estimate", required_unless_present = "estimate")]
    theta: Option<String>,
    /// Estimate JSON written by `fit`.
    #[arg(long)]
    estimate: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct HillArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    /// Comma-separated frequencies.
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long = "L", default_value_t = 3.14)]
    half_width: f64,
    #[arg(long = "M", default_value_t = 30)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    lmax: usize,
    /// Series whose periodogram is written alongside, at the nearest
    /// Fourier frequencies.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Settings echoed into every JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Settings {
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "M")]
    m: usize,
    lmax: usize,
    n: usize,
    seed: u64,
    restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_set: Option<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FitDoc {
    #[serde(flatten)]
    estimate: Estimate,
    settings: Settings,
}

#[derive(Debug, Serialize)]
struct ReportDoc {
    family: Family,
    #[serde(flatten)]
    report: TestReport,
    block_restarts: usize,
    settings: Settings,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("genspec: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("genspec: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        ensure!(t > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit_command(a),
        Command::Gof(a) => test_command(&a, |s, p, g, c| {
            gof_test(s.series, s.family, p, g, a.b, a.phi, c, a.fit.seed)
        }),
        Command::TestParam(a) => {
            let transform = match a.transform {
                TransformArg::Identity => Transform::Identity,
                TransformArg::Abs => Transform::Abs,
            };
            let t = &a.test;
            test_command(t, |s, p, g, c| {
                parameter_test(
                    s.series, s.family, p, g, a.coord, a.kappa, a.mode, transform, t.b, t.phi, c, t.fit.seed,
                )
            })
        }
        Command::TestUnitroot(a) => {
            let t = &a.test;
            test_command(t, |s, p, g, c| {
                unit_root_test(s.series, s.family, p, g, a.coord, t.b, t.phi, c, t.fit.seed)
            })
        }
        Command::TestInvert(a) => {
            let t = &a.test;
            test_command(t, |s, p, g, c| {
                invertibility_test(s.series, s.family, p, g, a.coord, t.b, t.phi, c, t.fit.seed)
            })
        }
        Command::Predict(a) => predict(a),
        Command::Hill(a) => hill(a),
        Command::SpectrumGrid(a) => spectrum_grid(a),
    }
}

/// Writes through a temporary file in the target directory, so a failed
/// run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.persist(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    Ok(())
}

fn read_series(path: &Path, kind: ValueKind) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_series(&text, kind).with_context(|| format!("{}", path.display()))
}

fn kind_of(family: Family) -> ValueKind {
    if family.is_count() {
        ValueKind::Count
    } else {
        ValueKind::Real
    }
}

fn build_model(family: Family, theta: &str, lmax: usize) -> Result<ModelSpec> {
    let theta = parse_f64_list(theta).context("--theta")?;
    let mut model = ModelSpec::new(family, theta)?;
    if family.is_autoregressive() {
        model = model.with_lmax(lmax)?;
    }
    Ok(model)
}

fn build_space(a: &FitArgs) -> Result<ParamSpace> {
    let mut space = ParamSpace::default_for(a.family, a.half_width);
    if let Some(b) = &a.bounds {
        let (lower, upper) = parse_bounds(b).context("--bounds")?;
        ensure!(
            lower.len() == a.family.dim(),
            "--bounds gives {} coordinates, {} has {}",
            lower.len(),
            a.family,
            a.family.dim()
        );
        let bands = space.bands.clone();
        space = ParamSpace::new(lower, upper)?;
        for band in bands {
            let reach = space.lower[band.coord].abs().max(space.upper[band.coord].abs());
            // A band entirely outside the new box no longer matters.
            if band.lo < reach {
                space = space
                    .with_band(band.coord, band.lo, band.hi)
                    .with_context(|| format!("--bounds cuts through the excluded band ({}, {})", band.lo, band.hi))?;
            }
        }
    }
    if let Some(set) = &a.alpha_set {
        ensure!(a.family.is_count(), "--alpha-set applies to count families only");
        space = space.with_discrete(1, parse_f64_list(set).context("--alpha-set")?)?;
    }
    Ok(space)
}

fn settings(a: &FitArgs, n: usize, space: &ParamSpace) -> Settings {
    Settings {
        half_width: a.half_width,
        m: a.m,
        lmax: a.lmax,
        n,
        seed: a.seed,
        restarts: a.restarts,
        alpha_set: space.discrete.first().map(|(_, v)| v.clone()),
        lower: space.lower.clone(),
        upper: space.upper.clone(),
    }
}

fn search(a: &FitArgs) -> SearchConfig {
    SearchConfig {
        restarts: a.restarts,
        lmax: a.lmax,
        ..SearchConfig::default()
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let model = build_model(a.family, &a.theta, a.lmax)?;
    let series = match a.p_after {
        Some(p) => simulate_change_point(&model, p, a.n, a.seed)?,
        None => simulate_path(&model, a.n, a.seed)?,
    };
    write_atomic(&a.out, format_series(&series).as_bytes())
}

fn fit_command(a: FitArgs) -> Result<()> {
    let series = read_series(&a.input, kind_of(a.family))?;
    let space = build_space(&a)?;
    let grid = Grid::new(a.half_width, a.m, series.len())?;
    let estimate = fit(&series, a.family, &space, &grid, &search(&a), a.seed)?;
    let doc = FitDoc {
        estimate,
        settings: settings(&a, series.len(), &space),
    };
    write_atomic(&a.out, to_json(&doc)?.as_bytes())
}

struct Sample<'a> {
    series: &'a TimeSeries,
    family: Family,
}

fn test_command<F>(t: &TestArgs, run_test: F) -> Result<()>
where
    F: FnOnce(&Sample, &ParamSpace, &Grid, &SubsampleConfig) -> genspec::Result<TestReport>,
{
    let a = &t.fit;
    ensure!(t.phi > 0.0 && t.phi < 1.0, "--phi must lie in (0, 1)");
    let series = read_series(&a.input, kind_of(a.family))?;
    let space = build_space(a)?;
    let grid = Grid::new(a.half_width, a.m, series.len())?;
    let config = SubsampleConfig {
        search: search(a),
        block_restarts: t.block_restarts,
    };
    let sample = Sample {
        series: &series,
        family: a.family,
    };
    let report = run_test(&sample, &space, &grid, &config)?;
    let doc = ReportDoc {
        family: a.family,
        report,
        block_restarts: t.block_restarts,
        settings: settings(a, series.len(), &space),
    };
    write_atomic(&a.out, to_json(&doc)?.as_bytes())
}

fn predict(a: PredictArgs) -> Result<()> {
    let theta = match (&a.theta, &a.estimate) {
        (Some(t), _) => parse_f64_list(t).context("--theta")?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let doc: FitDoc = from_json(&text).with_context(|| format!("{}", path.display()))?;
            ensure!(
                doc.estimate.family == Family::Inar1,
                "estimate is for {}, not inar1",
                doc.estimate.family
            );
            doc.estimate.theta_hat
        }
        (None, None) => bail!("either --theta or --estimate is required"),
    };
    ensure!(theta.len() == 3, "INAR(1) needs delta,alpha,p");
    let series = read_series(&a.input, ValueKind::Count)?;
    let rows = predictions(&series, a.split, theta[2], theta[0], theta[1])?;
    let mut csv = String::from("t,actual,predicted\n");
    for (t, actual, pred) in &rows {
        csv.push_str(&format!("{t},{actual},{pred}\n"));
    }
    write_atomic(&a.out, csv.as_bytes())?;
    println!("mspe {}", mspe(&rows));
    Ok(())
}

fn hill(a: HillArgs) -> Result<()> {
    let series = read_series(&a.input, ValueKind::Real)?;
    let plot = hill_plot(series.values());
    ensure!(!plot.is_empty(), "need at least two positive observations");
    let mut csv = String::from("k,estimate\n");
    for (k, h) in plot {
        csv.push_str(&format!("{k},{h}\n"));
    }
    write_atomic(&a.out, csv.as_bytes())
}

fn spectrum_grid(a: GridArgs) -> Result<()> {
    let model = build_model(a.family, &a.theta, a.lmax)?;
    let lambdas = parse_f64_list(&a.lambda).context("--lambda")?;
    let mut out = Vec::new();
    match &a.input {
        Some(path) => {
            let series = read_series(path, kind_of(a.family))?;
            let grid = Grid::new(a.half_width, a.m, series.len())?;
            let kernels = dft_kernels(&series, &grid)?;
            write_grid_csv(&mut out, &model, &grid, &lambdas, Some(&kernels))?;
        }
        None => {
            // The length only matters for periodogram columns.
            let grid = Grid::new(a.half_width, a.m, 8)?;
            write_grid_csv(&mut out, &model, &grid, &lambdas, None)?;
        }
    }
    write_atomic(&a.out, &out)
}
