use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ecs_tda::classify::{EvalReport, ModelKind};
use ecs_tda::data::{
    binarize_labels, binary_labels, load_ucr_dataset, sha256_file, BinarizationRule, DatasetEntry, Delimiter, GridSize,
    LabeledDataset, Registry,
};
use ecs_tda::dynamics::{
    integrate_rossler, integrate_trajectory, regime_distance_experiment, write_trajectory_csv, RegimeConfig,
    RosslerParams, CHAOTIC_C, PERIODIC_C,
};
use ecs_tda::ecs::{build_ecs, pairwise_distance_matrix, ClassDiff, EcsMatrix, MetricOrder, ScaleGrid};
use ecs_tda::embedding::{select_max_scale, takens_embed, EmbeddingParams, MaxScaleRule, TimeSeries};
use ecs_tda::geometry::PointCloud;
use ecs_tda::pipeline::{
    choose_dimension, class_distances, embed_all, grid_search, run_classification, surfaces, ClassifyConfig,
    GridSearch, TrainedModel,
};
use ecs_tda::child_seed;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{grid_csv, labelled_matrix_csv, FileRecord, OutDir};
use crate::{
    ClassifyArgs, Command, DistancesArgs, EcsArgs, EmbedArgs, GridSearchArgs, ModelArg, ReportArgs, RosslerArgs,
    SourceArgs, SplitArg, UsageError,
};

const BUILTIN_REGISTRY: &str = include_str!("../../../registry/datasets.json");

pub fn dispatch(cmd: &Command, out: &Path) -> Result<()> {
    match cmd {
        Command::Ecs(a) => ecs(cmd, a, out),
        Command::Classify(a) => classify(cmd, a, out),
        Command::Rossler(a) => rossler(cmd, a, out),
        Command::Distances(a) => distances(cmd, a, out),
        Command::GridSearch(a) => scan(cmd, a, out),
        Command::Report(a) => report(cmd, a, out),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn model_kind(m: ModelArg) -> ModelKind {
    match m {
        ModelArg::Stump => ModelKind::Stump,
        ModelArg::Adaboost => ModelKind::AdaBoost,
    }
}

fn metric_order(p: u32) -> Result<MetricOrder> {
    MetricOrder::try_from(p).map_err(|e| usage(e.to_string()))
}

struct Source {
    dataset: LabeledDataset,
    entry: Option<DatasetEntry>,
    inputs: Vec<FileRecord>,
}

fn record(path: &Path) -> Result<FileRecord> {
    Ok(FileRecord {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn load_source(src: &SourceArgs) -> Result<Source> {
    match (&src.dataset, &src.train, &src.test) {
        (Some(name), None, None) => {
            let mut inputs = Vec::new();
            let registry = match &src.registry {
                Some(p) => {
                    inputs.push(record(p)?);
                    Registry::load(p)?
                }
                None => Registry::from_json(BUILTIN_REGISTRY, Path::new("<built-in registry>"))?,
            };
            let entry = registry.get(name)?.clone();
            let (train, test) = entry.paths(&src.data_dir);
            let dataset = entry.load(&src.data_dir)?;
            inputs.push(record(&train)?);
            inputs.push(record(&test)?);
            Ok(Source {
                dataset,
                entry: Some(entry),
                inputs,
            })
        }
        (None, Some(train), Some(test)) => {
            let raw = load_ucr_dataset(train, test, Delimiter::Auto)?;
            let rule = match src.positive {
                Some(p) => BinarizationRule::OneVsRest(vec![p]),
                None => {
                    let labels: BTreeSet<i64> = raw.train.iter().chain(&raw.test).filter_map(|s| s.label).collect();
                    if labels.len() != 2 {
                        bail!(usage(format!(
                            "found {} distinct labels; pass --positive LABEL to pick class 1",
                            labels.len()
                        )));
                    }
                    let mut it = labels.into_iter();
                    let map = BTreeMap::from([(it.next().unwrap(), 0), (it.next().unwrap(), 1)]);
                    BinarizationRule::Map(map)
                }
            };
            let name = train
                .file_stem()
                .map(|s| s.to_string_lossy().trim_end_matches("_TRAIN").to_string())
                .unwrap_or_else(|| "dataset".into());
            let dataset = binarize_labels(&name, &raw, &rule)?;
            Ok(Source {
                dataset,
                entry: None,
                inputs: vec![record(train)?, record(test)?],
            })
        }
        _ => bail!(usage("give --dataset NAME, or both --train FILE and --test FILE")),
    }
}

/// Embedding settings after merging flags over registry defaults.
#[derive(Debug, Clone, Serialize)]
struct EmbedChoice {
    m: Option<usize>,
    tau: usize,
    znorm: bool,
    r_max: MaxScaleRule,
}

fn embed_choice(e: &EmbedArgs, entry: Option<&DatasetEntry>) -> Result<EmbedChoice> {
    let r_max = match e.rmax {
        Some(r) if !(r.is_finite() && r > 0.0) => bail!(usage("--rmax must be positive")),
        Some(r) => MaxScaleRule::Fixed(r),
        None => entry.map_or(MaxScaleRule::HalfMedianDiameter, |d| d.r_max),
    };
    Ok(EmbedChoice {
        m: e.m.map(|m| m as usize).or(entry.and_then(|d| d.m)),
        tau: e.tau.or(entry.map(|d| d.tau)).unwrap_or(1),
        znorm: e.znorm || entry.is_some_and(|d| d.znorm),
        r_max,
    })
}

fn resolve_seed(seed: Option<u64>, entry: Option<&DatasetEntry>) -> u64 {
    seed.or(entry.map(|d| d.seed)).unwrap_or(0)
}

struct Embedded {
    m: usize,
    train: Vec<PointCloud>,
    test: Vec<PointCloud>,
    r_max: f64,
}

fn embed(ds: &LabeledDataset, choice: &EmbedChoice) -> Result<Embedded> {
    let m = match choice.m {
        Some(m) => m,
        None => choose_dimension(&ds.train, choice.tau)?,
    };
    let params = EmbeddingParams::new(m, choice.tau)?;
    let train = embed_all(&ds.train, params, choice.znorm)?;
    let test = embed_all(&ds.test, params, choice.znorm)?;
    let r_max = select_max_scale(&train, choice.r_max)?;
    Ok(Embedded { m, train, test, r_max })
}

fn check_grid(k: usize, r: usize) -> Result<()> {
    if k == 0 || r == 0 {
        bail!(usage("--k and --r must be at least 1"));
    }
    Ok(())
}

fn scan_sizes(min: usize, max: usize) -> Result<Vec<usize>> {
    if min == 0 || min > max {
        bail!(usage(format!("invalid scan range {min}..={max}")));
    }
    Ok((min..=max).collect())
}

fn radii_csv(grid: &ScaleGrid) -> String {
    let mut s = String::from("scale,radius\n");
    for (j, r) in grid.radii().iter().enumerate() {
        let _ = writeln!(s, "{},{r}", j + 1);
    }
    s
}

fn write_surfaces(out: &mut OutDir, dir: &str, surf: &[EcsMatrix]) -> Result<()> {
    for s in surf {
        let mut buf = Vec::new();
        s.write_csv(&mut buf)?;
        out.write(&format!("{dir}/{}", s.file_name()), &buf)?;
    }
    Ok(())
}

fn ecs(cmd: &Command, a: &EcsArgs, out_dir: &Path) -> Result<()> {
    check_grid(a.k, a.r)?;
    let mut out = OutDir::create(out_dir)?;
    if let Some(c) = a.rossler {
        let choice = embed_choice(&a.embed, None)?;
        let seed = a.seed.unwrap_or(0);
        let params = RosslerParams::with_c(c);
        let traj = integrate_trajectory(&params)?;
        let series = integrate_rossler(&params)?;
        let m = choice.m.unwrap_or(3);
        let cloud = if choice.znorm {
            takens_embed(&series.znormalized(), EmbeddingParams::new(m, choice.tau)?)?
        } else {
            takens_embed(&series, EmbeddingParams::new(m, choice.tau)?)?
        };
        let r_max = select_max_scale(std::slice::from_ref(&cloud), choice.r_max)?;
        let grid = ScaleGrid::uniform(r_max, a.r)?;
        let surface = build_ecs(series.id.clone(), &cloud, a.k, &grid, child_seed(seed, 0))?;
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj)?;
        out.write("trajectory.csv", &buf)?;
        write_surfaces(&mut out, "ecs", std::slice::from_ref(&surface))?;
        out.write("scales.csv", radii_csv(&grid).as_bytes())?;
        println!("wrote {} ({}×{}, r_max {r_max})", surface.file_name(), a.k, a.r);
        let resolved = json!({ "c": c, "m": m, "tau": choice.tau, "znorm": choice.znorm,
            "r_max": r_max, "k": a.k, "r": a.r, "seed": seed });
        return out.finish(cmd, resolved, vec![]);
    }
    let src = load_source(&a.source)?;
    let entry = src.entry.as_ref();
    let choice = embed_choice(&a.embed, entry)?;
    let seed = resolve_seed(a.seed, entry);
    let emb = embed(&src.dataset, &choice)?;
    let grid = ScaleGrid::uniform(emb.r_max, a.r)?;
    let train = surfaces(&src.dataset.train, &emb.train, a.k, &grid, seed)?;
    let test = surfaces(&src.dataset.test, &emb.test, a.k, &grid, seed)?;
    write_surfaces(&mut out, "ecs/train", &train)?;
    write_surfaces(&mut out, "ecs/test", &test)?;
    out.write("scales.csv", radii_csv(&grid).as_bytes())?;
    out.write("labels.csv", labels_csv(&src.dataset).as_bytes())?;
    println!(
        "{}: wrote {} surfaces ({}×{}, m {}, r_max {})",
        src.dataset.name,
        train.len() + test.len(),
        a.k,
        a.r,
        emb.m,
        emb.r_max
    );
    let resolved = json!({ "dataset": src.dataset.name, "label_map": src.dataset.label_map, "m": emb.m,
        "tau": choice.tau, "znorm": choice.znorm, "r_max": emb.r_max, "k": a.k, "r": a.r, "seed": seed });
    out.finish(cmd, resolved, src.inputs)
}

fn labels_csv(ds: &LabeledDataset) -> String {
    let mut s = String::from("split,id,label\n");
    for (split, series) in [("train", &ds.train), ("test", &ds.test)] {
        for t in series.iter() {
            let _ = writeln!(s, "{split},{},{}", t.id, t.label.unwrap_or(0));
        }
    }
    s
}

/// Grid cell with its radius, 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub window: usize,
    pub scale: usize,
    pub radius: f64,
    pub value: f64,
}

fn diff_peak(d: &ClassDiff, radii: &[f64]) -> Cell {
    let (k, j) = d.argmax;
    Cell {
        window: k + 1,
        scale: j + 1,
        radius: radii[j],
        value: d.diff[k][j],
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectedStump {
    pub feature: usize,
    pub window: usize,
    pub scale: usize,
    pub radius: f64,
    pub polarity: i8,
    pub threshold: f64,
    pub train_auc: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub dataset: String,
    pub model: ModelArg,
    pub n_train: usize,
    pub n_test: usize,
    pub label_map: BTreeMap<i64, u8>,
    pub m: usize,
    pub tau: usize,
    pub znorm: bool,
    pub r_max: f64,
    pub k: usize,
    pub r: usize,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub scanned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stump: Option<SelectedStump>,
    /// Cell with the largest summed α.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominant_cell: Option<Cell>,
    /// Largest |mean class 1 − mean class 0| on the training surfaces.
    pub class_diff_peak: Cell,
    pub test: EvalReport,
}

fn grid_search_csv(s: &GridSearch) -> String {
    let mut out = String::from("size,mean_auc");
    for f in 1..=s.folds {
        let _ = write!(out, ",fold_{f}");
    }
    out.push('\n');
    for g in &s.scores {
        let _ = write!(out, "{},{}", g.size, g.mean_auc);
        for v in &g.fold_auc {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn classify(cmd: &Command, a: &ClassifyArgs, out_dir: &Path) -> Result<()> {
    let src = load_source(&a.source)?;
    let entry = src.entry.as_ref();
    let choice = embed_choice(&a.embed, entry)?;
    let seed = resolve_seed(a.seed, entry);
    let grid = match (a.scan, a.k, a.r) {
        (true, _, _) => None,
        (false, Some(k), Some(r)) => Some(GridSize { k, r }),
        (false, None, None) => match entry.and_then(|d| d.grid) {
            Some(g) => Some(g),
            None => bail!(usage("specify --k and --r, or --scan")),
        },
        _ => bail!(usage("--k and --r must be given together")),
    };
    if let Some(g) = grid {
        check_grid(g.k, g.r)?;
    }
    if a.rounds == Some(0) {
        bail!(usage("--rounds must be at least 1"));
    }
    let cfg = ClassifyConfig {
        model: model_kind(a.model),
        grid,
        scan_sizes: scan_sizes(a.scan_min, a.scan_max)?,
        folds: a.folds,
        m: choice.m,
        tau: choice.tau,
        r_max: choice.r_max,
        znorm: choice.znorm,
        rounds: a.rounds,
        seed,
    };
    let ds = &src.dataset;
    let res = run_classification(ds, &cfg)?;
    let radii = res.train_surfaces[0].grid.radii().to_vec();
    let mut out = OutDir::create(out_dir)?;

    let (stump, dominant_cell, rounds) = match &res.model {
        TrainedModel::Stump(c) => {
            let (window, scale) = c.grid.cell(c.stump.feature);
            let sel = SelectedStump {
                feature: c.stump.feature,
                window,
                scale,
                radius: radii[scale - 1],
                polarity: c.stump.polarity,
                threshold: c.stump.threshold,
                train_auc: c.train_auc,
            };
            (Some(sel), None, None)
        }
        TrainedModel::AdaBoost(m) => {
            let heat = res.heatmap.as_ref().expect("heatmap for boosted model");
            let mut best: Option<Cell> = None;
            for (k, row) in heat.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if best.as_ref().is_none_or(|b| v > b.value) {
                        best = Some(Cell {
                            window: k + 1,
                            scale: j + 1,
                            radius: radii[j],
                            value: v,
                        });
                    }
                }
            }
            (None, best, Some(m.rounds.len()))
        }
    };
    let report = ClassifyReport {
        dataset: ds.name.clone(),
        model: a.model,
        n_train: ds.train.len(),
        n_test: ds.test.len(),
        label_map: ds.label_map.clone(),
        m: res.m,
        tau: res.tau,
        znorm: cfg.znorm,
        r_max: res.r_max,
        k: res.grid.k,
        r: res.grid.r,
        radii: radii.clone(),
        seed,
        scanned: res.search.is_some(),
        rounds,
        stump,
        dominant_cell,
        class_diff_peak: diff_peak(&res.class_diff, &radii),
        test: res.report.clone(),
    };
    out.write_json("report.json", &report)?;
    out.write_json("model.json", &res.model)?;

    let mut roc = String::from("fpr,tpr\n");
    for (x, y) in &res.test_roc {
        let _ = writeln!(roc, "{x},{y}");
    }
    out.write("roc.csv", roc.as_bytes())?;
    out.write("class_diff.csv", grid_csv(&res.class_diff.diff).as_bytes())?;
    if let Some(h) = &res.heatmap {
        out.write("heatmap.csv", grid_csv(h).as_bytes())?;
    }
    if let Some(s) = &res.search {
        out.write("grid_search.csv", grid_search_csv(s).as_bytes())?;
    }
    let mut preds = String::from("id,label,predicted,score\n");
    for (t, s) in ds.test.iter().zip(&res.test_surfaces) {
        let row: Vec<f64> = s.features().into_iter().map(|v| v as f64).collect();
        let (p, score) = res.model.predict(&row)?;
        let _ = writeln!(preds, "{},{},{p},{score}", t.id, t.label.unwrap_or(0));
    }
    out.write("predictions.csv", preds.as_bytes())?;
    out.write("scales.csv", radii_csv(&res.train_surfaces[0].grid).as_bytes())?;

    println!(
        "{} {:?} {}×{}: test AUC {:.4}, accuracy {:.4}",
        ds.name, a.model, res.grid.k, res.grid.r, res.report.auc, res.report.accuracy
    );
    let resolved = json!({ "dataset": ds.name, "config": cfg, "m": res.m, "r_max": res.r_max });
    out.finish(cmd, resolved, src.inputs)
}

fn rossler(cmd: &Command, a: &RosslerArgs, out_dir: &Path) -> Result<()> {
    check_grid(a.k, a.r)?;
    if !(a.noise_max.is_finite() && a.noise_max >= 0.0) {
        bail!(usage("--noise-max must be non-negative"));
    }
    let r_max = match a.rmax {
        Some(r) if !(r.is_finite() && r > 0.0) => bail!(usage("--rmax must be positive")),
        Some(r) => MaxScaleRule::Fixed(r),
        None => MaxScaleRule::HalfMedianDiameter,
    };
    let cfg = RegimeConfig {
        n_realizations: a.realizations,
        max_intensity: a.noise_max,
        k: a.k,
        r: a.r,
        r_max,
        p: metric_order(a.p)?,
        seed: a.seed,
        ..RegimeConfig::default()
    };
    let res = regime_distance_experiment(&cfg)?;
    let n = cfg.n_realizations;
    let ids: Vec<String> = (0..2 * n)
        .map(|i| format!("{}_{:03}", if i < n { "periodic" } else { "chaotic" }, i % n))
        .collect();
    let radii = ScaleGrid::uniform(res.summary.r_max, cfg.r)?.radii().to_vec();

    let mut out = OutDir::create(out_dir)?;
    out.write("distances.csv", labelled_matrix_csv(&ids, &res.distances).as_bytes())?;
    out.write("diff.csv", grid_csv(&res.diff.diff).as_bytes())?;
    out.write_json(
        "summary.json",
        &json!({ "summary": res.summary, "intensities": res.intensities,
            "diff_peak": diff_peak(&res.diff, &radii), "radii": radii }),
    )?;
    for (name, c) in [("periodic", PERIODIC_C), ("chaotic", CHAOTIC_C)] {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &integrate_trajectory(&RosslerParams::with_c(c))?)?;
        out.write(&format!("trajectory_{name}.csv"), &buf)?;
    }
    let s = &res.summary;
    println!(
        "intra periodic {:.3}, intra chaotic {:.3}, inter {:.3}, intra<inter fraction {:.4}",
        s.mean_intra_periodic, s.mean_intra_chaotic, s.mean_inter, s.intra_below_inter_fraction
    );
    out.finish(cmd, json!({ "config": cfg }), vec![])
}

fn distances(cmd: &Command, a: &DistancesArgs, out_dir: &Path) -> Result<()> {
    check_grid(a.k, a.r)?;
    let p = metric_order(a.p)?;
    let src = load_source(&a.source)?;
    let entry = src.entry.as_ref();
    let choice = embed_choice(&a.embed, entry)?;
    let seed = resolve_seed(a.seed, entry);
    let emb = embed(&src.dataset, &choice)?;
    let grid = ScaleGrid::uniform(emb.r_max, a.r)?;
    let (series, clouds): (&[TimeSeries], &[PointCloud]) = match a.split {
        SplitArg::Train => (&src.dataset.train, &emb.train),
        SplitArg::Test => (&src.dataset.test, &emb.test),
    };
    let surf = surfaces(series, clouds, a.k, &grid, seed)?;
    let d = pairwise_distance_matrix(&surf, p)?;
    let labels = binary_labels(series);
    let means = class_distances(&d, &labels);
    let ids: Vec<String> = series.iter().map(|s| s.id.clone()).collect();

    let mut out = OutDir::create(out_dir)?;
    out.write("distances.csv", labelled_matrix_csv(&ids, &d).as_bytes())?;
    out.write("labels.csv", labels_csv(&src.dataset).as_bytes())?;
    out.write_json("summary.json", &json!({ "class_means": means, "n": ids.len(), "r_max": emb.r_max }))?;
    println!(
        "intra class 0 {:.3}, intra class 1 {:.3}, inter {:.3}",
        means.mean_intra_0, means.mean_intra_1, means.mean_inter
    );
    let resolved = json!({ "dataset": src.dataset.name, "m": emb.m, "tau": choice.tau, "znorm": choice.znorm,
        "r_max": emb.r_max, "k": a.k, "r": a.r, "seed": seed });
    out.finish(cmd, resolved, src.inputs)
}

fn scan(cmd: &Command, a: &GridSearchArgs, out_dir: &Path) -> Result<()> {
    let sizes = scan_sizes(a.scan_min, a.scan_max)?;
    let src = load_source(&a.source)?;
    let entry = src.entry.as_ref();
    let choice = embed_choice(&a.embed, entry)?;
    let seed = resolve_seed(a.seed, entry);
    let emb = embed(&src.dataset, &choice)?;
    let s = grid_search(&src.dataset.train, &emb.train, emb.r_max, &sizes, model_kind(a.model), a.folds, seed)?;
    let mut out = OutDir::create(out_dir)?;
    out.write("grid_search.csv", grid_search_csv(&s).as_bytes())?;
    out.write_json("grid_search.json", &s)?;
    println!("best grid {0}×{0}", s.best);
    let resolved = json!({ "dataset": src.dataset.name, "m": emb.m, "tau": choice.tau, "znorm": choice.znorm,
        "r_max": emb.r_max, "seed": seed });
    out.finish(cmd, resolved, src.inputs)
}

fn report(cmd: &Command, a: &ReportArgs, out_dir: &Path) -> Result<()> {
    let mut rows = Vec::new();
    let mut inputs = Vec::new();
    for run in &a.runs {
        let path: PathBuf = if run.is_dir() { run.join("report.json") } else { run.clone() };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let r: ClassifyReport =
            serde_json::from_str(&text).with_context(|| format!("{} is not a classify report", path.display()))?;
        inputs.push(record(&path)?);
        rows.push(r);
    }
    let mut csv = String::from("dataset,model,k,r,auc,accuracy,precision,recall,specificity,f1\n");
    let mut md = String::from(
        "| dataset | model | grid | AUC | accuracy | precision | recall | specificity | F1 |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for r in &rows {
        let t = &r.test;
        let model = match r.model {
            ModelArg::Stump => "stump",
            ModelArg::Adaboost => "adaboost",
        };
        let _ = writeln!(
            csv,
            "{},{model},{},{},{},{},{},{},{},{}",
            r.dataset, r.k, r.r, t.auc, t.accuracy, t.precision, t.recall, t.specificity, t.f1
        );
        let _ = writeln!(
            md,
            "| {} | {model} | {}×{} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |",
            r.dataset, r.k, r.r, t.auc, t.accuracy, t.precision, t.recall, t.specificity, t.f1
        );
    }
    let mut out = OutDir::create(out_dir)?;
    out.write("summary.csv", csv.as_bytes())?;
    out.write("summary.md", md.as_bytes())?;
    print!("{md}");
    out.finish(cmd, json!({ "runs": rows.len() }), inputs)
}
