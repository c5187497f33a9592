//! Characteristic-function based generalized spectra for heavy-tailed and
//! count-valued time series.
//!
//! The crate is organised bottom-up:
//!
//! * [`dists`] – Cauchy, discrete stable and positive stable primitives,
//!   binomial thinning.
//! * [`models`] – closed-form parametric spectra `f_θ(λ; u, v)` and their
//!   Fourier coefficients, plus lattice quadratures of the L2 divergence.
//! * [`simulate`] – exact path generation for every model family.
//! * [`empirical`] – the generalized periodogram and the criterion,
//!   adjustment and bias statistics built on it.
//! * [`estimate`] – the minimum-distance estimator.
//! * [`infer`] – subsampling goodness-of-fit and parameter tests.
//! * [`forecast`] – median one-step prediction for INAR(1) and Hill plots.
//! * [`io`] – series CSV, parameter lists and JSON reports.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dists;
pub mod empirical;
pub mod error;
pub mod estimate;
pub mod forecast;
pub mod infer;
pub mod io;
pub mod models;
pub mod optim;
pub mod rng;
pub mod series;
pub mod simulate;

pub use error::{Error, Result};
pub use models::{Family, ModelSpec};
pub use series::{TimeSeries, ValueKind};

pub use num_complex::Complex64;
