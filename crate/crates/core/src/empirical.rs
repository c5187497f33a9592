//! The generalized periodogram and the statistics built on it.
//!
//! With `d_n(λ; u) = Σ_t e^{iuZ_t} e^{-itλ}` the periodogram is
//! `I_n(λ; u, v) = d_n(λ; u) d_n(-λ; v) / (2πn)`. Kernels are kept on the
//! symmetric lattice `x_k = -L + 2Lk/M`, `k = 0..=M`, which contains both
//! the grid `u_i = x_i` (`i = 1..=M`) and its negations `-u_i = x_{M-i}`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::models::{clamp_nonnegative, lag_energy, lattice_point, CoeffTable, ModelSpec};
use crate::series::TimeSeries;

/// Evaluation lattice for a series of length `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    m: usize,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, m: usize, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param(format!("half-width L = {half_width} must be positive")));
        }
        if m < 2 {
            return Err(Error::param(format!("grid resolution M = {m} must be >= 2")));
        }
        if n < 8 {
            return Err(Error::InsufficientData(format!("series length {n} < 8")));
        }
        Ok(Self { half_width, m, n })
    }

    /// Same lattice for a series of a different length.
    pub fn with_len(&self, n: usize) -> Result<Self> {
        Grid::new(self.half_width, self.m, n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `u_i = -L + 2Li/M`, `i = 1..=M`.
    pub fn u_points(&self) -> Vec<f64> {
        (1..=self.m).map(|i| self.point(i)).collect()
    }

    /// Lattice point `x_k`, `k = 0..=M`.
    pub fn point(&self, k: usize) -> f64 {
        lattice_point(self.half_width, self.m, k)
    }

    pub fn lambda(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    /// `8πL² / (n M²)`.
    pub fn scale(&self) -> f64 {
        8.0 * PI * self.half_width * self.half_width / (self.n as f64 * (self.m * self.m) as f64)
    }
}

/// `d_n(λ_j; x_k)` for every lattice point `k = 0..=M` and `j = 0..n-1`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Grid,
    values: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `d_n(λ_j; x_k)`; `d_n(-λ_j; x_k)` is `get(k, n - j)`.
    #[inline]
    pub fn get(&self, k: usize, j: usize) -> Complex64 {
        self.values[k * self.grid.n + j]
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.values[k * self.grid.n..(k + 1) * self.grid.n]
    }
}

/// One length-`n` FFT of `e^{iuZ_t}` per lattice point `u <= 0`; the
/// mirrored points reuse it.
pub fn dft_kernels(series: &TimeSeries, grid: &Grid) -> Result<KernelMatrix> {
    let n = grid.n;
    if series.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: series.len(),
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut values: Vec<Complex64> = Vec::with_capacity((grid.m + 1) * n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for k in 0..=grid.m {
        let start = values.len();
        let mirror = grid.m - k;
        if mirror < k {
            // d(λ_j; -u) = conj d(λ_{n-j}; u), so I(λ; u, -u) = |d(λ; u)|² / (2πn)
            // comes out exactly real and nonnegative.
            let base = mirror * n;
            for j in 0..n {
                let d = values[base + (n - j) % n].conj();
                values.push(d);
            }
            continue;
        }
        if mirror == k {
            // x_k = 0 exactly: d(λ_j; 0) is n at j = 0 and vanishes elsewhere.
            values.push(Complex64::new(n as f64, 0.0));
            values.resize(start + n, Complex64::new(0.0, 0.0));
            continue;
        }
        let u = grid.point(k);
        values.extend(series.values().iter().map(|&z| Complex64::from_polar(1.0, u * z)));
        let row = &mut values[start..];
        fft.process_with_scratch(row, &mut scratch);
        // Observations are indexed from t = 1.
        for (j, d) in row.iter_mut().enumerate() {
            *d *= Complex64::from_polar(1.0, -grid.lambda(j));
        }
    }
    Ok(KernelMatrix { grid: *grid, values })
}

/// `I_n(λ_j; x_a, x_b)` with lattice indices `a, b` in `0..=M`.
pub fn periodogram_value(kernels: &KernelMatrix, j: usize, a: usize, b: usize) -> Complex64 {
    let n = kernels.grid.n;
    kernels.get(a, j) * kernels.get(b, (n - j) % n) / (2.0 * PI * n as f64)
}

/// Data-side sums of the criterion, computed once per series so that each
/// objective evaluation only touches the model coefficients.
#[derive(Debug, Clone)]
pub struct Periodogram {
    grid: Grid,
    lags: usize,
    /// `Σ_j Σ_{i,k} |I_j(u_i, v_k)|²`.
    energy: f64,
    /// `P_ℓ(i, k) = Σ_j I_j(u_i, v_k) e^{iℓλ_j}`, `ℓ = -lags..=lags`.
    proj: Vec<Complex64>,
    /// `I_j(u_i, -u_i)` and `I_j(-v_k, v_k)`, row per `j = 1..n-1`.
    diag_u: Vec<f64>,
    diag_v: Vec<f64>,
    /// `Σ_{i,k} |I_j(u_i, v_k)|²` per `j`.
    pair_energy: Vec<f64>,
}

impl Periodogram {
    /// `lags` bounds the Fourier support of any model later compared to it.
    pub fn new(series: &TimeSeries, grid: &Grid, lags: usize) -> Result<Self> {
        let kernels = dft_kernels(series, grid)?;
        Ok(Self::from_kernels(&kernels, lags))
    }

    pub fn from_kernels(kernels: &KernelMatrix, lags: usize) -> Self {
        let grid = kernels.grid;
        let (n, m) = (grid.n, grid.m);
        let norm = 1.0 / (2.0 * PI * n as f64);
        let nj = n - 1;

        let mut diag_u = vec![0.0; nj * m];
        let mut diag_v = vec![0.0; nj * m];
        let mut pair_energy = vec![0.0; nj];
        for j in 1..n {
            let (mut su, mut sv) = (0.0, 0.0);
            for i in 1..=m {
                let du = kernels.get(i, j).norm_sqr() * norm;
                diag_u[(j - 1) * m + i - 1] = du;
                diag_v[(j - 1) * m + i - 1] = kernels.get(m - i, j).norm_sqr() * norm;
                su += du;
                sv += kernels.get(i, n - j).norm_sqr() * norm;
            }
            // |I(u, v)|² = |d(λ; u)|² |d(-λ; v)|² / (2πn)²
            pair_energy[j - 1] = su * sv;
        }
        let energy = pair_energy.iter().sum();

        let width = 2 * lags + 1;
        let twiddle: Vec<Complex64> = (0..width)
            .flat_map(|li| {
                let ell = li as f64 - lags as f64;
                (1..n).map(move |j| Complex64::from_polar(1.0, ell * 2.0 * PI * j as f64 / n as f64))
            })
            .collect();
        let mut proj = vec![Complex64::new(0.0, 0.0); width * m * m];
        let mut weighted = vec![Complex64::new(0.0, 0.0); nj];
        for i in 1..=m {
            let du = kernels.row(i);
            for li in 0..width {
                let tw = &twiddle[li * nj..(li + 1) * nj];
                for (j, w) in weighted.iter_mut().enumerate() {
                    *w = du[j + 1] * tw[j] * norm;
                }
                for k in 1..=m {
                    let dv = kernels.row(k);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, w) in weighted.iter().enumerate() {
                        acc += w * dv[n - 1 - j];
                    }
                    proj[(li * m + i - 1) * m + k - 1] = acc;
                }
            }
        }
        Periodogram {
            grid,
            lags,
            energy,
            proj,
            diag_u,
            diag_v,
            pair_energy,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    fn check(&self, model: &ModelSpec) {
        assert!(
            model.max_lag() <= self.lags,
            "model needs {} lags, periodogram holds {}",
            model.max_lag(),
            self.lags
        );
    }

    /// `D_n(I_n, f_θ)`.
    pub fn criterion(&self, model: &ModelSpec) -> f64 {
        self.check(model);
        let table = CoeffTable::new(model, self.grid.half_width, self.grid.m, model.max_lag());
        self.criterion_with(&table)
    }

    pub fn criterion_with(&self, table: &CoeffTable) -> f64 {
        let (n, m) = (self.grid.n, self.grid.m);
        let lags = table.lags() as i64;
        let width = (2 * lags + 1) as usize;
        let mut cross = 0.0;
        let mut model_energy = 0.0;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); width];
        for i in 1..=m {
            for k in 1..=m {
                for (slot, ell) in coeffs.iter_mut().zip(-lags..=lags) {
                    *slot = table.get(ell, i, k);
                }
                for (c, ell) in coeffs.iter().zip(-lags..=lags) {
                    let li = (self.lags as i64 + ell) as usize;
                    let p = self.proj[(li * m + i - 1) * m + k - 1];
                    cross += (c.conj() * p).re;
                }
                model_energy += lag_energy(&coeffs, n);
            }
        }
        let total = self.energy - cross / PI + model_energy / (4.0 * PI * PI);
        clamp_nonnegative(self.grid.scale() * total)
    }

    /// Diagonal model values `f(λ_j; u_i, -u_i)` and `f(λ_j; -v_k, v_k)`.
    fn diagonal_spectra(&self, table: &CoeffTable) -> (Vec<Complex64>, Vec<Complex64>) {
        let (n, m) = (self.grid.n, self.grid.m);
        let lags = table.lags() as i64;
        let mut fu = vec![Complex64::new(0.0, 0.0); (n - 1) * m];
        let mut fv = vec![Complex64::new(0.0, 0.0); (n - 1) * m];
        for i in 1..=m {
            let cu: Vec<Complex64> = (-lags..=lags).map(|ell| table.get(ell, i, m - i)).collect();
            let cv: Vec<Complex64> = (-lags..=lags).map(|ell| table.get(ell, m - i, i)).collect();
            for j in 1..n {
                let lam = self.grid.lambda(j);
                let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for (idx, ell) in (-lags..=lags).enumerate() {
                    let e = Complex64::from_polar(1.0, -(ell as f64) * lam);
                    a += cu[idx] * e;
                    b += cv[idx] * e;
                }
                fu[(j - 1) * m + i - 1] = a / (2.0 * PI);
                fv[(j - 1) * m + i - 1] = b / (2.0 * PI);
            }
        }
        (fu, fv)
    }

    /// `A_n(I_n, f_θ)`.
    pub fn adjustment(&self, model: &ModelSpec) -> f64 {
        self.check(model);
        let table = CoeffTable::new(model, self.grid.half_width, self.grid.m, model.max_lag());
        let (fu, fv) = self.diagonal_spectra(&table);
        let (n, m) = (self.grid.n, self.grid.m);
        let mut total = 0.0;
        for j in 0..n - 1 {
            let row = j * m..(j + 1) * m;
            let a: Vec<Complex64> = self.diag_u[row.clone()]
                .iter()
                .zip(&fu[row.clone()])
                .map(|(i, f)| i - f)
                .collect();
            let c: Vec<Complex64> = self.diag_v[row.clone()]
                .iter()
                .zip(&fv[row])
                .map(|(i, f)| i - f)
                .collect();
            let sa: Complex64 = a.iter().sum();
            let sc: Complex64 = c.iter().sum();
            let ea: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            let ec: f64 = c.iter().map(|x| x.norm_sqr()).sum();
            // Σ_{i,k} |a_i + c_k|²
            total += m as f64 * (ea + ec) + 2.0 * (sa * sc.conj()).re;
        }
        0.5 * self.grid.scale() * total
    }

    /// `B_n(I_n)`.
    pub fn bias(&self) -> f64 {
        let (n, m) = (self.grid.n, self.grid.m);
        let mut total = 0.0;
        for j in 0..n - 1 {
            let a = &self.diag_u[j * m..(j + 1) * m];
            let c = &self.diag_v[j * m..(j + 1) * m];
            let sa: f64 = a.iter().sum();
            let sc: f64 = c.iter().sum();
            let ea: f64 = a.iter().map(|x| x * x).sum();
            let ec: f64 = c.iter().map(|x| x * x).sum();
            total += m as f64 * (ea + ec) / 4.0 + (self.pair_energy[j] + sa * sc) / 2.0;
        }
        self.grid.scale() * total
    }

    /// `T_n = D_n + A_n - B_n`.
    pub fn gof_statistic(&self, model: &ModelSpec) -> f64 {
        self.criterion(model) + self.adjustment(model) - self.bias()
    }
}

fn lags_for(model: &ModelSpec) -> usize {
    model.max_lag()
}

pub fn criterion_d(series: &TimeSeries, model: &ModelSpec, grid: &Grid) -> Result<f64> {
    Ok(Periodogram::new(series, grid, lags_for(model))?.criterion(model))
}

pub fn adjustment_a(series: &TimeSeries, model: &ModelSpec, grid: &Grid) -> Result<f64> {
    Ok(Periodogram::new(series, grid, lags_for(model))?.adjustment(model))
}

pub fn bias_b(series: &TimeSeries, grid: &Grid) -> Result<f64> {
    Ok(Periodogram::new(series, grid, 0)?.bias())
}

pub fn gof_statistic(series: &TimeSeries, model: &ModelSpec, grid: &Grid) -> Result<f64> {
    Ok(Periodogram::new(series, grid, lags_for(model))?.gof_statistic(model))
}

/// Writes `lambda,u,v,re_I,im_I,re_f,im_f` rows for every grid pair at the
/// requested frequencies. Without kernels the periodogram columns are left
/// empty; with kernels each frequency is snapped to the nearest `2πj/n`,
/// `j = 1..n-1`.
pub fn write_grid_csv<W: Write>(
    out: &mut W,
    model: &ModelSpec,
    grid: &Grid,
    lambdas: &[f64],
    kernels: Option<&KernelMatrix>,
) -> std::io::Result<()> {
    writeln!(out, "lambda,u,v,re_I,im_I,re_f,im_f")?;
    let m = grid.m;
    for &lam in lambdas {
        let (lam, j) = match kernels {
            Some(_) => {
                let n = grid.n as f64;
                let j = ((lam.rem_euclid(2.0 * PI)) * n / (2.0 * PI))
                    .round()
                    .clamp(1.0, n - 1.0) as usize;
                (grid.lambda(j), Some(j))
            }
            None => (lam, None),
        };
        for a in 1..=m {
            for b in 1..=m {
                let (u, v) = (grid.point(a), grid.point(b));
                let f = model.spectrum(lam, u, v);
                match (kernels, j) {
                    (Some(k), Some(j)) => {
                        let i = periodogram_value(k, j, a, b);
                        writeln!(out, "{lam},{u},{v},{},{},{},{}", i.re, i.im, f.re, f.im)?
                    }
                    _ => writeln!(out, "{lam},{u},{v},,,{},{}", f.re, f.im)?,
                }
            }
        }
    }
    Ok(())
}
