//! Parser entry points on the fuzz seeds and on arbitrary text.

use std::fs;
use std::path::Path;

use genspec::estimate::Estimate;
use genspec::infer::Mode;
use genspec::io::{format_series, from_json, parse_bounds, parse_f64_list, parse_series, to_json};
use genspec::models::Family;
use genspec::ValueKind;
use proptest::prelude::*;

fn exercise(target: &str, text: &str) {
    match target {
        "parse_series" => {
            for kind in [ValueKind::Real, ValueKind::Count] {
                if let Ok(s) = parse_series(text, kind) {
                    assert_eq!(parse_series(&format_series(&s), kind).unwrap(), s);
                }
            }
        }
        "parse_f64_list" => {
            if let Ok(v) = parse_f64_list(text) {
                assert!(v.iter().all(|x| x.is_finite()));
            }
        }
        "parse_bounds" => {
            if let Ok((lo, hi)) = parse_bounds(text) {
                assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
            }
        }
        "family_name" => {
            if let Ok(f) = text.parse::<Family>() {
                assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
            }
        }
        "mode_name" => {
            let _ = text.parse::<Mode>();
        }
        "estimate_json" => {
            if let Ok(e) = from_json::<Estimate>(text) {
                assert_eq!(from_json::<Estimate>(&to_json(&e).unwrap()).unwrap(), e);
            }
        }
        other => panic!("no parser behind corpus directory {other}"),
    }
}

#[test]
fn corpus_seeds_replay() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let mut seen = 0;
    for dir in fs::read_dir(&root).unwrap() {
        let dir = dir.unwrap();
        let target = dir.file_name().into_string().unwrap();
        for seed in fs::read_dir(dir.path()).unwrap() {
            let bytes = fs::read(seed.unwrap().path()).unwrap();
            if let Ok(text) = std::str::from_utf8(&bytes) {
                exercise(&target, text);
                seen += 1;
            }
        }
    }
    assert!(seen >= 20, "only {seen} seeds found under {}", root.display());
}

#[test]
fn known_seeds_parse() {
    assert_eq!(parse_series("cases\n4\n7\n", ValueKind::Count).unwrap().len(), 2);
    assert_eq!("cauchy-ma:2,1".parse::<Family>().unwrap().dim(), 4);
    assert!("Cauchy_MA:0,16".parse::<Family>().is_ok());
    assert!("cauchy-ma:0,17".parse::<Family>().is_err());
    assert!("two-sided".parse::<Mode>().is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_text_never_panics(text in "[0-9eE+\\-.,:;\\n\\r\\t a-z{}\"\\[\\]_]{0,40}") {
        for target in ["parse_series", "parse_f64_list", "parse_bounds", "family_name", "mode_name", "estimate_json"] {
            exercise(target, &text);
        }
    }

    #[test]
    fn arbitrary_unicode_never_panics(text in any::<String>()) {
        for target in ["parse_series", "parse_f64_list", "parse_bounds", "family_name", "mode_name", "estimate_json"] {
            exercise(target, &text);
        }
    }
}
