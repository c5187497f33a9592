//! Derivative-free box-constrained minimization.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Stop when `f_worst - f_best <= f_tol * max(|f_best|, f_floor)`.
    pub f_tol: f64,
    pub f_floor: f64,
    /// Stop when every vertex lies within `x_tol` (relative to the box
    /// width) of the best one.
    pub x_tol: f64,
    /// Initial edge length as a fraction of each box width.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 500,
            f_tol: 1e-6,
            f_floor: 1e-12,
            x_tol: 1e-7,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(*lo, *hi);
    }
}

impl NelderMead {
    /// Minimizes `f` over the box `[lower, upper]`, projecting every trial
    /// point back into it. Non-finite values count as `+∞`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], lower: &[f64], upper: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let d = x0.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };
        let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();

        let mut start = x0.to_vec();
        project(&mut start, lower, upper);
        let mut simplex = vec![start.clone()];
        for i in 0..d {
            let mut v = start.clone();
            let h = self.step * width[i];
            // Step inward if the start sits on the upper face.
            v[i] = if v[i] + h <= upper[i] { v[i] + h } else { v[i] - h };
            project(&mut v, lower, upper);
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            let mut order: Vec<usize> = (0..=d).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[d] - values[0];
            let f_ok = spread <= self.f_tol * values[0].abs().max(self.f_floor);
            let x_ok = simplex[1..].iter().all(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .zip(&width)
                    .all(|((a, b), w)| (a - b).abs() <= self.x_tol * w.max(f64::MIN_POSITIVE))
            });
            if (values[0].is_finite() && f_ok) || x_ok {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..d)
                .map(|k| simplex[..d].iter().map(|v| v[k]).sum::<f64>() / d as f64)
                .collect();
            let along = |t: f64| {
                let mut p: Vec<f64> = (0..d)
                    .map(|k| centroid[k] + t * (simplex[d][k] - centroid[k]))
                    .collect();
                project(&mut p, lower, upper);
                p
            };

            let reflected = along(-1.0);
            let fr = eval(&reflected);
            if fr < values[0] {
                let expanded = along(-2.0);
                let fe = eval(&expanded);
                if fe < fr {
                    simplex[d] = expanded;
                    values[d] = fe;
                } else {
                    simplex[d] = reflected;
                    values[d] = fr;
                }
                continue;
            }
            if fr < values[d - 1] {
                simplex[d] = reflected;
                values[d] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[d] {
                let c = along(-0.5);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = eval(&c);
                (c, fc)
            };
            if fc < values[d].min(fr) {
                simplex[d] = contracted;
                values[d] = fc;
                continue;
            }
            // Shrink towards the best vertex.
            for i in 1..=d {
                let mut v: Vec<f64> = (0..d)
                    .map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]))
                    .collect();
                project(&mut v, lower, upper);
                values[i] = eval(&v);
                simplex[i] = v;
            }
        }
        let best = (0..=d).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            evaluations,
            converged,
        }
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base as u64) as f64 * inv;
        index /= base as u64;
        inv /= b;
    }
    out
}

/// `count` points of a randomly shifted Halton sequence in `[lower, upper]`.
pub fn halton_starts<R: Rng + ?Sized>(count: usize, lower: &[f64], upper: &[f64], rng: &mut R) -> Vec<Vec<f64>> {
    let d = lower.len();
    assert!(d <= PRIMES.len(), "dimension {d} exceeds the Halton table");
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            (0..d)
                .map(|k| {
                    let t = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                    lower[k] + t * (upper[k] - lower[k])
                })
                .collect()
        })
        .collect()
}
