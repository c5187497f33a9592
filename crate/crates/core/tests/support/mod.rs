//! Strategies and invariant checks shared by the property suite and the
//! acceptance run.
#![allow(dead_code)]

pub mod exact;

use std::f64::consts::PI;

use genspec::dists::{discrete_stable_pmf_upto, DiscreteStableParams};
use genspec::forecast::MedianPredictor;
use genspec::infer::{exceedance_p_value, Mode};
use genspec::models::{divergence_d, Family, ModelSpec, QuadSpec};
use genspec::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn sign() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(-1.0)]
}

pub fn theta_for(family: Family) -> BoxedStrategy<Vec<f64>> {
    match family {
        Family::CauchyMa1 => (sign(), 0.2..5.0f64, 0.1..5.0f64)
            .prop_map(|(s, a, d)| vec![s * a, d])
            .boxed(),
        Family::CauchyAr1 => (sign(), prop_oneof![0.0..0.9f64, 1.1..4.0f64], 0.1..5.0f64)
            .prop_map(|(s, a, d)| vec![s * a, d])
            .boxed(),
        Family::GaussMa1 => (sign(), 1.01..10.0f64, 0.1..5.0f64)
            .prop_map(|(s, a, v)| vec![s * a, v])
            .boxed(),
        Family::GaussAr1 => (-0.99..0.99f64, 0.1..5.0f64).prop_map(|(a, v)| vec![a, v]).boxed(),
        Family::Inma1 => (0.05..5.0f64, 0.05..=1.0f64, 0.0..=1.0f64)
            .prop_map(|(d, a, p)| vec![d, a, p])
            .boxed(),
        Family::Inar1 => (0.05..5.0f64, 0.05..=1.0f64, 0.0..0.95f64)
            .prop_map(|(d, a, p)| vec![d, a, p])
            .boxed(),
        Family::CauchyMaGen { .. } => {
            let d = family.dim() - 1;
            (proptest::collection::vec((sign(), 0.2..5.0f64), d), 0.1..5.0f64)
                .prop_map(|(xi, delta)| {
                    let mut t: Vec<f64> = xi.into_iter().map(|(s, x)| s * x).collect();
                    t.push(delta);
                    t
                })
                .boxed()
        }
    }
}

pub const FAMILIES: [Family; 7] = [
    Family::CauchyMa1,
    Family::CauchyAr1,
    Family::GaussMa1,
    Family::GaussAr1,
    Family::Inma1,
    Family::Inar1,
    Family::CauchyMaGen {
        causal: 2,
        anticausal: 1,
    },
];

pub fn any_model() -> impl Strategy<Value = ModelSpec> {
    proptest::sample::select(FAMILIES.to_vec())
        .prop_flat_map(|f| (Just(f), theta_for(f), 1usize..=4))
        .prop_map(|(f, theta, lmax)| {
            let m = ModelSpec::new(f, theta).unwrap();
            if f.is_autoregressive() {
                m.with_lmax(lmax).unwrap()
            } else {
                m
            }
        })
}

pub fn arg() -> impl Strategy<Value = f64> {
    -4.0..4.0f64
}

pub fn any_mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::TwoSided), Just(Mode::Greater), Just(Mode::Less)]
}

pub fn block_values() -> impl Strategy<Value = Vec<Option<f64>>> {
    proptest::collection::vec(proptest::option::weighted(0.9, -5.0..5.0f64), 1..60)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

/// Periodicity, conjugation, reflection, real diagonal and exact zero slice.
pub fn check_symmetries(model: &ModelSpec, lam: f64, u: f64, v: f64) -> Result<(), TestCaseError> {
    let f = model.spectrum(lam, u, v);
    prop_assert!(close(f, model.spectrum(lam + 2.0 * PI, u, v), 1e-12), "periodicity");
    prop_assert!(close(f.conj(), model.spectrum(-lam, -u, -v), 1e-12), "conjugation");
    prop_assert!(close(f, model.spectrum(-lam, v, u), 1e-12), "reflection");
    prop_assert!(model.spectrum(lam, u, -u).im.abs() < 1e-12, "diagonal");
    let zero = Complex64::new(0.0, 0.0);
    prop_assert_eq!(model.spectrum(lam, 0.0, u), zero);
    prop_assert_eq!(model.spectrum(lam, u, 0.0), zero);
    Ok(())
}

/// Distinct parameters give a strictly positive divergence; equal ones zero.
pub fn check_identifiable(family: Family, a: Vec<f64>, b: Vec<f64>) -> Result<(), TestCaseError> {
    prop_assume!(a != b);
    let quad = QuadSpec::new(3.14, 32, 16).unwrap();
    let ma = ModelSpec::new(family, a).unwrap();
    let mb = ModelSpec::new(family, b).unwrap();
    let d = divergence_d(&ma, &mb, &quad);
    prop_assert!(d > 0.0, "{:?} vs {:?}: {}", ma.theta(), mb.theta(), d);
    prop_assert_eq!(divergence_d(&ma, &ma, &quad), 0.0);
    Ok(())
}

pub fn check_pmf_normalised(delta: f64, alpha: f64, k: usize) -> Result<(), TestCaseError> {
    let params = DiscreteStableParams::new(delta, alpha).unwrap();
    let pmf = discrete_stable_pmf_upto(&params, k);
    prop_assert!(pmf.probs.iter().all(|&p| p >= 0.0));
    prop_assert!(pmf.tail_mass >= 0.0);
    prop_assert!((pmf.total() - 1.0).abs() <= 1e-9, "total {}", pmf.total());
    Ok(())
}

pub fn check_predictor_monotone(p: f64, delta: f64, alpha: f64) -> Result<(), TestCaseError> {
    let mut pred = MedianPredictor::new(p, delta, alpha).unwrap();
    let mut last = 0;
    for z in 0..40u64 {
        let m = pred.predict(z).unwrap();
        prop_assert!(m >= last, "z={} gives {} after {}", z, m, last);
        last = m;
    }
    Ok(())
}

/// A p-value is a count of kept blocks over the number kept.
pub fn check_p_value_rational(full: f64, blocks: &[Option<f64>], mode: Mode) -> Result<(), TestCaseError> {
    let kept = blocks.iter().filter(|b| b.is_some()).count();
    match exceedance_p_value(full, blocks, mode) {
        Ok((p, excluded)) => {
            prop_assert_eq!(excluded, blocks.len() - kept);
            let k = p * kept as f64;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&p));
        }
        Err(_) => prop_assert_eq!(kept, 0),
    }
    Ok(())
}
