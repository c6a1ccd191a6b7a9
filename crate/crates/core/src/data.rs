//! UCR archive files, binary relabelling and the dataset registry.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embedding::{EmbeddingError, MaxScaleRule, TimeSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{line}: expected {expected} values, found {found}")]
    Ragged {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{0}: no series")]
    NoSeries(PathBuf),
    #[error("degenerate binarization: {0}")]
    DegenerateBinarization(String),
    #[error("checksum mismatch for {path}: expected {expected}, found {actual}")]
    ChecksumMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("registry {path}: {msg}")]
    Registry { path: PathBuf, msg: String },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

fn io_err(path: &Path, e: std::io::Error) -> DataError {
    DataError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Auto,
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Delimiter {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace | Delimiter::Auto => line.split_whitespace().collect(),
        }
    }
}

/// Parses UCR text: one series per line, class label first. Series ids are
/// `<prefix><row>` with a 0-based, zero-padded row number.
pub fn parse_ucr(text: &str, path: &Path, delimiter: Delimiter, prefix: &str) -> Result<Vec<TimeSeries>, DataError> {
    let mut out = Vec::new();
    let mut delim = delimiter;
    let mut width: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| DataError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        if delim == Delimiter::Auto {
            delim = Delimiter::detect(line);
        }
        let fields = delim.split(line.trim_end_matches(['\r', '\n']));
        let label_f: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("label {:?} is not a number", fields[0])))?;
        if label_f.fract() != 0.0 || !label_f.is_finite() {
            return Err(parse_err(format!("label {:?} is not an integer", fields[0])));
        }
        let values = fields[1..]
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(format!("field {} ({f:?}) is not a finite number", j + 2)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(DataError::Ragged {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: w,
                    found: values.len(),
                })
            }
            _ => {}
        }
        let id = format!("{prefix}{:05}", out.len());
        let ts = TimeSeries::new(id, values, Some(label_f as i64)).map_err(|e| parse_err(e.to_string()))?;
        out.push(ts);
    }
    if out.is_empty() {
        return Err(DataError::NoSeries(path.to_path_buf()));
    }
    Ok(out)
}

pub fn read_ucr_file(path: &Path, delimiter: Delimiter, prefix: &str) -> Result<Vec<TimeSeries>, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_ucr(&text, path, delimiter, prefix)
}

/// Writes series in tab-separated UCR form. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_ucr<W: Write>(mut w: W, series: &[TimeSeries]) -> std::io::Result<()> {
    for s in series {
        write!(w, "{}", s.label.unwrap_or(0))?;
        for v in &s.values {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Train/test series with their original class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub train: Vec<TimeSeries>,
    pub test: Vec<TimeSeries>,
}

pub fn load_ucr_dataset(train: &Path, test: &Path, delimiter: Delimiter) -> Result<RawDataset, DataError> {
    let train_s = read_ucr_file(train, delimiter, "train_")?;
    let test_s = read_ucr_file(test, delimiter, "test_")?;
    let (a, b) = (train_s[0].len(), test_s[0].len());
    if a != b {
        return Err(DataError::Ragged {
            path: test.to_path_buf(),
            line: 1,
            expected: a,
            found: b,
        });
    }
    Ok(RawDataset { train: train_s, test: test_s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinarizationRule {
    /// Listed labels are mapped; all others are dropped.
    Map(BTreeMap<i64, u8>),
    /// Listed labels become 1, every other label 0.
    OneVsRest(Vec<i64>),
}

impl BinarizationRule {
    fn apply(&self, label: i64) -> Option<u8> {
        match self {
            BinarizationRule::Map(map) => map.get(&label).copied(),
            BinarizationRule::OneVsRest(positive) => Some(u8::from(positive.contains(&label))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    /// Series whose `label` is the binary class.
    pub train: Vec<TimeSeries>,
    pub test: Vec<TimeSeries>,
    /// Original label → binary label, for every label that was kept.
    pub label_map: BTreeMap<i64, u8>,
}

pub fn binary_labels(series: &[TimeSeries]) -> Vec<u8> {
    series.iter().map(|s| s.label.unwrap_or(0) as u8).collect()
}

pub fn binarize_labels(name: &str, raw: &RawDataset, rule: &BinarizationRule) -> Result<LabeledDataset, DataError> {
    let mut label_map = BTreeMap::new();
    let mut relabel = |split: &[TimeSeries]| -> Vec<TimeSeries> {
        split
            .iter()
            .filter_map(|s| {
                let orig = s.label?;
                let b = rule.apply(orig)?;
                label_map.insert(orig, b);
                Some(TimeSeries {
                    label: Some(i64::from(b)),
                    ..s.clone()
                })
            })
            .collect()
    };
    let train = relabel(&raw.train);
    let test = relabel(&raw.test);
    for (split, series) in [("train", &train), ("test", &test)] {
        let pos = series.iter().filter(|s| s.label == Some(1)).count();
        if pos == 0 || pos == series.len() {
            return Err(DataError::DegenerateBinarization(format!(
                "{name} {split} split has {pos} positive of {} series",
                series.len()
            )));
        }
    }
    Ok(LabeledDataset {
        name: name.to_string(),
        train,
        test,
        label_map,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, DataError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSize {
    pub k: usize,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Checksums {
    pub train: Option<String>,
    pub test: Option<String>,
}

/// One dataset in the registry. Paths are relative to the data root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default)]
    pub delimiter: Delimiter,
    #[serde(default)]
    pub sha256: Checksums,
    pub binarization: BinarizationRule,
    /// Embedding dimension; `None` selects it by false nearest neighbours.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "one")]
    pub tau: usize,
    #[serde(default = "half_median")]
    pub r_max: MaxScaleRule,
    /// Fixed grid; `None` scans square grids.
    #[serde(default)]
    pub grid: Option<GridSize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub znorm: bool,
}

fn one() -> usize {
    1
}

fn half_median() -> MaxScaleRule {
    MaxScaleRule::HalfMedianDiameter
}

impl DatasetEntry {
    pub fn paths(&self, root: &Path) -> (PathBuf, PathBuf) {
        (root.join(&self.train), root.join(&self.test))
    }

    /// Loads, verifies checksums (when listed) and binarizes.
    pub fn load(&self, root: &Path) -> Result<LabeledDataset, DataError> {
        let (train, test) = self.paths(root);
        for (path, want) in [(&train, &self.sha256.train), (&test, &self.sha256.test)] {
            if let Some(want) = want {
                let actual = sha256_file(path)?;
                if !actual.eq_ignore_ascii_case(want) {
                    return Err(DataError::ChecksumMismatch {
                        path: path.clone(),
                        expected: want.clone(),
                        actual,
                    });
                }
            }
        }
        let raw = load_ucr_dataset(&train, &test, self.delimiter)?;
        binarize_labels(&self.name, &raw, &self.binarization)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub datasets: Vec<DatasetEntry>,
}

impl Registry {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, DataError> {
        serde_json::from_str(text).map_err(|e| DataError::Registry {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn get(&self, name: &str) -> Result<&DatasetEntry, DataError> {
        self.datasets
            .iter()
            .find(|d| d.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| DataError::UnknownDataset(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PathBuf {
        PathBuf::from("mem.tsv")
    }

    #[test]
    fn single_line() {
        let s = parse_ucr("1\t0.5\t-0.3\n", &p(), Delimiter::Auto, "x").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, Some(1));
        assert_eq!(s[0].values, vec![0.5, -0.3]);
        assert_eq!(s[0].id, "x00000");
    }

    #[test]
    fn delimiters_detected() {
        let comma = parse_ucr("2,1.0,2.0\n", &p(), Delimiter::Auto, "").unwrap();
        let spaces = parse_ucr("  2.0000000e+00   1.0  2.0\n", &p(), Delimiter::Auto, "").unwrap();
        assert_eq!(comma[0].values, spaces[0].values);
        assert_eq!(spaces[0].label, Some(2));
        let neg = parse_ucr("-1 3 4\n", &p(), Delimiter::Auto, "").unwrap();
        assert_eq!(neg[0].label, Some(-1));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_ucr("1\t1\t2\n1\t1\n", &p(), Delimiter::Auto, "").unwrap_err();
        assert!(matches!(e, DataError::Ragged { line: 2, expected: 2, found: 1, .. }));
        let e = parse_ucr("1\t1\t2\n\n1\t1\tx\n", &p(), Delimiter::Auto, "").unwrap_err();
        assert!(e.to_string().starts_with("mem.tsv:3:"), "{e}");
        let e = parse_ucr("1.5\t1\t2\n", &p(), Delimiter::Auto, "").unwrap_err();
        assert!(matches!(e, DataError::Parse { line: 1, .. }));
        assert!(parse_ucr("\n", &p(), Delimiter::Auto, "").is_err());
    }

    #[test]
    fn ucr_round_trip() {
        let text = "1\t0.1\t-2.5e-7\t3\n2\t1e300\t0.30000000000000004\t-0\n";
        let a = parse_ucr(text, &p(), Delimiter::Auto, "").unwrap();
        let mut buf = Vec::new();
        write_ucr(&mut buf, &a).unwrap();
        let b = parse_ucr(std::str::from_utf8(&buf).unwrap(), &p(), Delimiter::Auto, "").unwrap();
        assert_eq!(a, b);
    }

    fn raw(train: &[i64], test: &[i64]) -> RawDataset {
        let mk = |labels: &[i64]| {
            labels
                .iter()
                .enumerate()
                .map(|(i, &l)| TimeSeries::new(format!("s{i}"), vec![i as f64, 1.0], Some(l)).unwrap())
                .collect()
        };
        RawDataset { train: mk(train), test: mk(test) }
    }

    #[test]
    fn binarization_rules() {
        let r = raw(&[1, 2, 3, 1, 5], &[2, 1, 4]);
        let keep = BinarizationRule::Map(BTreeMap::from([(1, 0), (2, 1)]));
        let d = binarize_labels("ecg", &r, &keep).unwrap();
        assert_eq!(binary_labels(&d.train), vec![0, 1, 0]);
        assert_eq!(d.test.len(), 2);
        assert_eq!(d.train[1].values, r.train[1].values);
        let ovr = BinarizationRule::OneVsRest(vec![5]);
        let d = binarize_labels("x", &raw(&[1, 2, 5], &[5, 3]), &ovr).unwrap();
        assert_eq!(binary_labels(&d.train), vec![0, 0, 1]);
        assert!(matches!(
            binarize_labels("x", &raw(&[1, 2], &[1, 2]), &ovr),
            Err(DataError::DegenerateBinarization(_))
        ));
        let ident = BinarizationRule::Map(BTreeMap::from([(0, 0), (1, 1)]));
        let r = raw(&[0, 1], &[1, 0]);
        let d = binarize_labels("b", &r, &ident).unwrap();
        assert_eq!(d.train, r.train);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn registry_defaults() {
        let json = r#"{"datasets":[{"name":"ECG200","train":"a.tsv","test":"b.tsv",
            "binarization":{"map":{"-1":1,"1":0}}}]}"#;
        let reg = Registry::from_json(json, &p()).unwrap();
        let e = reg.get("ecg200").unwrap();
        assert_eq!(e.tau, 1);
        assert_eq!(e.m, None);
        assert_eq!(e.r_max, MaxScaleRule::HalfMedianDiameter);
        assert!(reg.get("nope").is_err());
    }
}
