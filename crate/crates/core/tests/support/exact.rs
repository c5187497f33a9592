//! Direct-definition oracles for the fast statistics.

use std::f64::consts::PI;

use genspec::empirical::{adjustment_a, bias_b, criterion_d, dft_kernels, gof_statistic, Grid};
use genspec::models::{Family, ModelSpec};
use genspec::rng::stream;
use genspec::simulate::simulate_path;
use genspec::{Complex64, TimeSeries};
use rand::Rng;

/// `d_n(λ; u)` by direct summation, `t = 1..n`.
pub fn naive_kernel(z: &[f64], lambda: f64, u: f64) -> Complex64 {
    z.iter()
        .enumerate()
        .map(|(t, &x)| Complex64::from_polar(1.0, u * x - (t + 1) as f64 * lambda))
        .sum()
}

fn naive_periodogram(z: &[f64], lambda: f64, u: f64, v: f64) -> Complex64 {
    naive_kernel(z, lambda, u) * naive_kernel(z, -lambda, v) / (2.0 * PI * z.len() as f64)
}

// Written as L(2i - m)/m so that the grid is exactly symmetric.
fn grid_points(l: f64, m: usize) -> Vec<f64> {
    (1..=m)
        .map(|i| l * (2 * i as i64 - m as i64) as f64 / m as f64)
        .collect()
}

struct Brute {
    d: f64,
    a: f64,
    b: f64,
}

/// Triple loops straight from the definitions, no FFT and no factoring.
fn brute_force(z: &[f64], model: &ModelSpec, l: f64, m: usize) -> Brute {
    let n = z.len();
    let pts = grid_points(l, m);
    let scale = 8.0 * PI * l * l / (n as f64 * (m * m) as f64);
    let (mut d, mut a, mut b) = (0.0, 0.0, 0.0);
    for j in 1..n {
        let lam = 2.0 * PI * j as f64 / n as f64;
        for &u in &pts {
            for &v in &pts {
                let i_uv = naive_periodogram(z, lam, u, v);
                d += (i_uv - model.spectrum(lam, u, v)).norm_sqr();

                let i_uu = naive_periodogram(z, lam, u, -u);
                let i_vv = naive_periodogram(z, lam, -v, v);
                let f_uu = model.spectrum(lam, u, -u);
                let f_vv = model.spectrum(lam, -v, v);
                a += (i_uu - f_uu + i_vv - f_vv).norm_sqr();

                b += ((i_uu * i_uu + i_vv * i_vv) / 4.0 + (i_uv * i_uv.conj() + i_uu * i_vv) / 2.0).re;
            }
        }
    }
    Brute {
        d: scale * d,
        a: 0.5 * scale * a,
        b: scale * b,
    }
}

pub fn random_model(family: Family, rng: &mut impl Rng) -> ModelSpec {
    let theta = match family {
        Family::CauchyMa1 => vec![
            if rng.random::<bool>() { 1.0 } else { -1.0 } * rng.random_range(0.3..3.0),
            rng.random_range(0.2..3.0),
        ],
        Family::CauchyAr1 => {
            let a = if rng.random::<bool>() {
                rng.random_range(-0.85..0.85)
            } else {
                rng.random_range(1.15..2.5)
            };
            vec![a, rng.random_range(0.2..3.0)]
        }
        Family::GaussMa1 => vec![rng.random_range(1.05..3.0), rng.random_range(0.2..2.0)],
        Family::GaussAr1 => vec![rng.random_range(-0.9..0.9), rng.random_range(0.2..2.0)],
        Family::Inma1 | Family::Inar1 => vec![
            rng.random_range(0.3..3.0),
            rng.random_range(0.3..1.0),
            rng.random_range(0.05..0.8),
        ],
        Family::CauchyMaGen { .. } => {
            let mut t: Vec<f64> = (0..family.dim() - 1).map(|_| rng.random_range(0.4..2.5)).collect();
            t.push(rng.random_range(0.2..3.0));
            t
        }
    };
    ModelSpec::new(family, theta).unwrap()
}

const ORACLE_FAMILIES: [Family; 7] = [
    Family::CauchyMa1,
    Family::CauchyAr1,
    Family::GaussMa1,
    Family::GaussAr1,
    Family::Inma1,
    Family::Inar1,
    Family::CauchyMaGen {
        causal: 1,
        anticausal: 1,
    },
];

/// Largest error over the same 20 random instances every run, relative to
/// the oracle value, with the instance it came from.
pub fn statistics_worst_error() -> (f64, String) {
    let mut rng = stream(2024, 0);
    let mut worst = (0.0, String::new());
    for case in 0..20 {
        let family = ORACLE_FAMILIES[case % ORACLE_FAMILIES.len()];
        let model = random_model(family, &mut rng);
        let n = rng.random_range(8..=32);
        let m = rng.random_range(2..=6);
        let l = rng.random_range(0.5..4.0);
        let z = simulate_path(&model, n, 100 + case as u64).unwrap();
        // Compare against a different member of the family so D and A are not small.
        let other = random_model(family, &mut rng);
        let grid = Grid::new(l, m, n).unwrap();
        let brute = brute_force(z.values(), &other, l, m);

        let fast = [
            ("D", criterion_d(&z, &other, &grid).unwrap(), brute.d, brute.d.abs()),
            ("A", adjustment_a(&z, &other, &grid).unwrap(), brute.a, brute.a.abs()),
            ("B", bias_b(&z, &grid).unwrap(), brute.b, brute.b.abs()),
            (
                "T",
                gof_statistic(&z, &other, &grid).unwrap(),
                brute.d + brute.a - brute.b,
                brute.d + brute.a + brute.b,
            ),
        ];
        for (name, got, want, scale) in fast {
            let err = (got - want).abs() / scale.max(1e-300);
            if err > worst.0 {
                worst = (err, format!("case {case} {family} {name}: {got} vs {want}"));
            }
        }
    }
    worst
}

/// Largest kernel error, relative to `max(|d_n|, 1)`.
pub fn kernels_worst_error() -> f64 {
    let mut rng = stream(7, 0);
    let mut worst: f64 = 0.0;
    for (n, m) in [(64, 8), (31, 5), (8, 2), (97, 7)] {
        let z = TimeSeries::real((0..n).map(|_| rng.random_range(-20.0..20.0)).collect()).unwrap();
        let grid = Grid::new(2.7, m, n).unwrap();
        let k = dft_kernels(&z, &grid).unwrap();
        for a in 0..=m {
            for j in 0..n {
                let want = naive_kernel(z.values(), grid.lambda(j), grid.point(a));
                worst = worst.max((k.get(a, j) - want).norm() / want.norm().max(1.0));
            }
        }
    }
    worst
}
