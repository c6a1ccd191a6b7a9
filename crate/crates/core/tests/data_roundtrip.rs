use std::path::Path;

use ecs_tda::data::{parse_ucr, read_ucr_file, write_ucr, BinarizationRule, Delimiter, Registry};
use ecs_tda::embedding::TimeSeries;
use proptest::prelude::*;

fn series() -> impl Strategy<Value = Vec<TimeSeries>> {
    (2usize..20).prop_flat_map(|len| {
        prop::collection::vec((-3i64..4, prop::collection::vec(-1e3f64..1e3, len)), 1..8)
    })
    .prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (l, vals))| TimeSeries::new(format!("s{i:05}"), vals, Some(l)).unwrap())
            .collect()
    })
}

proptest! {
    #[test]
    fn ucr_write_then_parse_is_identity(s in series()) {
        let mut buf = Vec::new();
        write_ucr(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = parse_ucr(&text, Path::new("mem"), Delimiter::Auto, "s").unwrap();
        prop_assert_eq!(back.len(), s.len());
        for (a, b) in back.iter().zip(&s) {
            prop_assert_eq!(&a.values, &b.values);
            prop_assert_eq!(a.label, b.label);
            prop_assert_eq!(&a.id, &b.id);
        }
    }
}

#[test]
fn comma_files_read_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "1,0.5,1.5,2.5\n2.0,3,4,5\n").unwrap();
    let s = read_ucr_file(&path, Delimiter::Auto, "train_").unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s[1].label, Some(2));
    assert_eq!(s[0].values, vec![0.5, 1.5, 2.5]);
    assert_eq!(s[0].id, "train_00000");
}

#[test]
fn missing_file_error_names_the_path() {
    let err = read_ucr_file(Path::new("/no/such/file.tsv"), Delimiter::Auto, "").unwrap_err();
    assert!(err.to_string().contains("/no/such/file.tsv"));
}

#[test]
fn builtin_registry_lists_the_benchmarks() {
    let text = include_str!("../../../registry/datasets.json");
    let reg = Registry::from_json(text, Path::new("datasets.json")).unwrap();
    for name in ["ECG5000", "Epilepsy2", "TwoLeadECG", "ECG200", "ECGFiveDays"] {
        let entry = reg.get(name).unwrap();
        assert_eq!(entry.tau, 1);
    }
    assert!(reg.get("ecg200").is_ok());
    assert!(reg.get("nope").is_err());
    assert_eq!(
        reg.get("Epilepsy2").unwrap().binarization,
        BinarizationRule::OneVsRest(vec![1])
    );
}
