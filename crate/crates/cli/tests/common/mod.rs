#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ecs_tda::data::write_ucr;
use ecs_tda::dynamics::{integrate_rossler, perturb_with_noise, RosslerParams, CHAOTIC_C, PERIODIC_C};
use ecs_tda::embedding::TimeSeries;

pub const BIN: &str = env!("CARGO_BIN_EXE_ecs-tda");

/// Short noisy Rössler segments: label 1 periodic, label 2 chaotic.
pub fn rossler_split(n_per_class: usize, offset: u64) -> Vec<TimeSeries> {
    let mut out = Vec::new();
    for (label, c) in [(1, PERIODIC_C), (2, CHAOTIC_C)] {
        let clean = integrate_rossler(&RosslerParams::with_c(c)).unwrap();
        for i in 0..n_per_class {
            let start = (i * 7) % 100;
            let seg = TimeSeries::new("s", clean.values[start..start + 200].to_vec(), Some(label)).unwrap();
            out.push(perturb_with_noise(&seg, 0.02, offset + i as u64 * 2 + label as u64).unwrap());
        }
    }
    out
}

/// Writes `<dir>/Toy/Toy_TRAIN.tsv` and `Toy_TEST.tsv`; returns both paths.
pub fn write_toy_dataset(dir: &Path) -> (PathBuf, PathBuf) {
    let root = dir.join("Toy");
    std::fs::create_dir_all(&root).unwrap();
    let train = root.join("Toy_TRAIN.tsv");
    let test = root.join("Toy_TEST.tsv");
    write_ucr(std::fs::File::create(&train).unwrap(), &rossler_split(12, 0)).unwrap();
    write_ucr(std::fs::File::create(&test).unwrap(), &rossler_split(8, 1000)).unwrap();
    (train, test)
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ECS_TDA_DATA_DIR")
        .output()
        .unwrap()
}

/// Every regular file under `dir`, relative path → bytes, sorted.
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}
