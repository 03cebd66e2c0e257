//! `bmc`: detection, training, evaluation and synthetic-data commands for
//! bone marrow cell analysis.

mod overlay;
mod params;
mod report;
mod stages;

use bmc_core::classification::{
    evaluate, load_model, save_model, svm_predict, svm_train, SvmParams,
};
use bmc_core::features::{
    extract_features, read_features_csv, write_features_csv, CellClass, FEATURE_COUNT,
};
use bmc_core::imgcore::{read_ppm, write_ppm, RgbImage};
use bmc_core::pipeline::{
    detect_cells, digest_hex, localize, Detection, PipelineError, PipelineParams,
};
use bmc_core::synthgen::{
    adhesion_fixture, generate_dataset, generate_scene, CellSpec, CellTruthEntry, DatasetOptions,
    FixtureKind, GroundTruth, GroundTruthManifest, SceneSpec, SplitMix64,
};
use clap::{Args, Parser, Subcommand};
use params::PipelineFlags;
use report::{
    error_envelope, published_reference, CellRecord, CountReport, EvalOutput, RunManifest,
    SkipRecord,
};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "bmc", version, about = "Bone marrow cell detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect, segment and classify every cell in a scene.
    Detect(DetectArgs),
    /// Localization only: emit the ROI csv.
    Locate(LocateArgs),
    /// Segmentation only: emit per-cell masks (optionally all debug planes).
    Segment(SegmentArgs),
    /// Feature extraction from a segmentation directory.
    Features(FeaturesArgs),
    /// Train the classifier from a labeled feature csv.
    Train(TrainArgs),
    /// Predict labels for a feature csv.
    Predict(PredictArgs),
    /// Evaluate a model on a labeled feature csv.
    Eval(EvalArgs),
    /// Synthetic scenes, adhesion fixtures and labeled datasets.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct DetectArgs {
    /// Input scene (binary PPM).
    #[arg(long)]
    image: PathBuf,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Count report output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Annotated overlay PPM.
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Run manifest output.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Record stage timings in the manifest (breaks byte reproducibility).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    flags: PipelineFlags,
}

#[derive(Args)]
struct LocateArgs {
    #[arg(long)]
    image: PathBuf,
    /// ROI csv output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: PipelineFlags,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    image: PathBuf,
    /// ROI csv from `locate`; verified against this run's localization.
    #[arg(long)]
    rois: Option<PathBuf>,
    /// Output directory for per-cell masks.
    #[arg(long)]
    out_dir: PathBuf,
    /// Also write the per-stage planes for every cell.
    #[arg(long)]
    debug_dump: bool,
    #[command(flatten)]
    flags: PipelineFlags,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    image: PathBuf,
    /// Segmentation directory from `segment`.
    #[arg(long)]
    seg_dir: PathBuf,
    /// Feature csv output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SvmFlags {
    #[arg(long = "svm-c", default_value_t = 10.0)]
    svm_c: f64,
    #[arg(long = "svm-gamma", default_value_t = 0.09)]
    svm_gamma: f64,
    #[arg(long = "svm-max-iter", default_value_t = 1000)]
    svm_max_iter: usize,
    #[arg(long = "svm-tolerance", default_value_t = 1e-3)]
    svm_tolerance: f64,
}

impl SvmFlags {
    fn to_params(&self) -> SvmParams {
        SvmParams {
            c: self.svm_c,
            gamma: self.svm_gamma,
            max_iter: self.svm_max_iter,
            tolerance: self.svm_tolerance,
            ..SvmParams::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature csv.
    #[arg(long)]
    features: PathBuf,
    /// Model file to write.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    svm: SvmFlags,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Prediction csv output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Labeled feature csv.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Evaluation report output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Render one scene with ground truth.
    Scene(SceneArgs),
    /// Render a canonical adhesion fixture.
    Fixture(FixtureArgs),
    /// Generate a labeled train/test dataset by running the full pipeline.
    Dataset(DatasetArgs),
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 384)]
    width: usize,
    #[arg(long, default_value_t = 384)]
    height: usize,
    /// Comma-separated class mnemonics, one cell each (e.g. MBE,MLS).
    #[arg(long, default_value = "MBE")]
    cells: String,
    #[arg(long, default_value_t = 4)]
    rbc: usize,
    #[arg(long, default_value_t = 3)]
    impurities: usize,
    #[arg(long, default_value_t = 2)]
    noise_sigma: u8,
    /// Scene PPM to write.
    #[arg(long)]
    out: PathBuf,
    /// Directory for ground-truth masks and manifest.
    #[arg(long)]
    truth_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    /// two_disks, three_chain or cell_rbc.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long, default_value_t = 200)]
    per_class: usize,
    #[arg(long, default_value_t = 20260808)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    flags: PipelineFlags,
}

fn main() {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Locate(a) => cmd_locate(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Features(a) => cmd_features(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(s) => match s {
            SynthCommand::Scene(a) => cmd_synth_scene(a),
            SynthCommand::Fixture(a) => cmd_synth_fixture(a),
            SynthCommand::Dataset(a) => cmd_synth_dataset(a),
        },
    };
    if let Err(e) = result {
        eprintln!("{}", error_envelope(&e.kind, &e.message));
        std::process::exit(1);
    }
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("BMC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

struct CliError {
    kind: String,
    message: String,
}

fn err(kind: &str, message: impl std::fmt::Display) -> CliError {
    CliError {
        kind: kind.to_string(),
        message: message.to_string(),
    }
}

type CliResult = Result<(), CliError>;

fn read_image(path: &Path) -> Result<(RgbImage, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| err("io", format!("{}: {e}", path.display())))?;
    let digest = digest_hex(&bytes);
    let img = read_ppm(&bytes).map_err(|e| err("format", format!("{}: {e}", path.display())))?;
    Ok((img, digest))
}

fn write_out(out: &Option<PathBuf>, content: &str) -> CliResult {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| err("io", format!("{}: {e}", path.display())))
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn pipeline_params(flags: &PipelineFlags) -> Result<PipelineParams, CliError> {
    flags.to_params().map_err(|m| err("usage", m))
}

/// Detection that treats a degenerate rough stage (no strata: blank field)
/// as zero candidates rather than a failure.
fn detect_or_empty(img: &RgbImage, params: &PipelineParams) -> Result<Detection, CliError> {
    match detect_cells(img, params) {
        Ok(d) => Ok(d),
        Err(PipelineError::Threshold(_)) => Ok(Detection::default()),
        Err(e) => Err(err("pipeline", e)),
    }
}

fn cmd_detect(a: DetectArgs) -> CliResult {
    let started = Instant::now();
    let (img, image_digest) = read_image(&a.image)?;
    let model_text = std::fs::read_to_string(&a.model)
        .map_err(|e| err("io", format!("{}: {e}", a.model.display())))?;
    let model = load_model(&model_text).map_err(|e| err("model", e))?;
    if model.scaling.min.len() != FEATURE_COUNT {
        return Err(err(
            "model",
            format!(
                "model expects {} features but this tool produces {FEATURE_COUNT}",
                model.scaling.min.len()
            ),
        ));
    }
    let params = pipeline_params(&a.flags)?;
    let t_detect = Instant::now();
    let detection = detect_or_empty(&img, &params)?;
    let detect_ms = t_detect.elapsed().as_millis();

    let t_classify = Instant::now();
    let classes: Vec<String> = model
        .classes
        .iter()
        .map(|c| c.mnemonic().to_string())
        .collect();
    let mut per_class = vec![0usize; model.classes.len()];
    let mut cells = Vec::new();
    let mut annotated = img.clone();
    for cell in &detection.cells {
        let prediction = svm_predict(&model, &cell.instance.features.values);
        let class_index = model
            .classes
            .iter()
            .position(|c| *c == prediction.class)
            .expect("class in model");
        per_class[class_index] += 1;
        overlay::annotate(
            &mut annotated,
            cell.instance.combined_roi,
            prediction.class.mnemonic(),
            Some(prediction.class),
        );
        cells.push(CellRecord {
            id: cell.instance.id,
            roi: cell.instance.combined_roi,
            label: prediction.class.mnemonic().to_string(),
            votes: prediction.votes,
            quality_flagged: cell.instance.features.quality_flagged,
        });
    }
    let classify_ms = t_classify.elapsed().as_millis();

    let skipped = detection
        .skipped
        .iter()
        .map(|(roi, e)| SkipRecord {
            roi: *roi,
            reason: e.to_string(),
        })
        .collect();
    let report = CountReport {
        classes,
        total: cells.len(),
        per_class,
        cells,
        skipped,
    };
    write_out(
        &a.out,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;

    if let Some(path) = &a.overlay {
        std::fs::write(path, write_ppm(&annotated))
            .map_err(|e| err("io", format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &a.manifest {
        let mut manifest = RunManifest::new("detect");
        manifest.parameters = a.flags.manifest_entries();
        manifest.inputs = vec![
            ("image".into(), image_digest),
            ("model".into(), digest_hex(model_text.as_bytes())),
        ];
        if a.timings {
            manifest.timings_ms = Some(vec![
                ("detect".into(), detect_ms),
                ("classify".into(), classify_ms),
                ("total".into(), started.elapsed().as_millis()),
            ]);
        }
        std::fs::write(
            path,
            serde_json::to_string_pretty(&manifest).expect("manifest"),
        )
        .map_err(|e| err("io", format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_locate(a: LocateArgs) -> CliResult {
    let (img, _) = read_image(&a.image)?;
    let params = pipeline_params(&a.flags)?;
    let candidates = match localize(&img, &params) {
        Ok(c) => c,
        Err(PipelineError::Threshold(_)) => Vec::new(),
        Err(e) => return Err(err("pipeline", e)),
    };
    write_out(&a.out, &stages::roi_csv(&candidates))
}

fn cmd_segment(a: SegmentArgs) -> CliResult {
    let (img, _) = read_image(&a.image)?;
    let params = pipeline_params(&a.flags)?;
    if let Some(roi_path) = &a.rois {
        let text = std::fs::read_to_string(roi_path)
            .map_err(|e| err("io", format!("{}: {e}", roi_path.display())))?;
        stages::parse_roi_csv(&text).map_err(|m| err("schema", m))?;
        let candidates = match localize(&img, &params) {
            Ok(c) => c,
            Err(PipelineError::Threshold(_)) => Vec::new(),
            Err(e) => return Err(err("pipeline", e)),
        };
        if stages::roi_csv(&candidates) != text {
            return Err(err(
                "schema",
                "roi csv does not match this image and parameter set",
            ));
        }
    }
    let detection = detect_or_empty(&img, &params)?;
    stages::write_segment_dir(&a.out_dir, &detection, a.debug_dump)
        .map_err(|e| err("io", format!("{}: {e}", a.out_dir.display())))
}

fn cmd_features(a: FeaturesArgs) -> CliResult {
    let (img, _) = read_image(&a.image)?;
    let mut entries = stages::read_segment_dir(&a.seg_dir).map_err(|m| err("schema", m))?;
    entries.sort_by_key(|e| e.id);
    let mut rows = Vec::new();
    for entry in &entries {
        let patch = img.crop(entry.roi);
        let features = extract_features(&patch, &entry.nucleus, &entry.cell);
        rows.push((features, None::<CellClass>));
    }
    write_out(&a.out, &write_features_csv(&rows))
}

fn read_labeled_csv(
    path: &Path,
) -> Result<(Vec<([f64; FEATURE_COUNT], CellClass)>, String), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| err("io", format!("{}: {e}", path.display())))?;
    let digest = digest_hex(text.as_bytes());
    let rows = read_features_csv(&text).map_err(|e| err("schema", e))?;
    let labeled = rows
        .into_iter()
        .filter_map(|(f, label)| label.map(|l| (f, l)))
        .collect();
    Ok((labeled, digest))
}

fn cmd_train(a: TrainArgs) -> CliResult {
    let (rows, digest) = read_labeled_csv(&a.features)?;
    if rows.is_empty() {
        return Err(err("schema", "no labeled rows in the feature csv"));
    }
    let params = a.svm.to_params();
    let model = svm_train(&rows, &params, &digest).map_err(|e| err("train", e))?;
    std::fs::write(&a.model, save_model(&model))
        .map_err(|e| err("io", format!("{}: {e}", a.model.display())))?;
    if let Some(path) = &a.manifest {
        let mut manifest = RunManifest::new("train");
        manifest.parameters = vec![
            ("svm_c".into(), params.c.to_string()),
            ("svm_gamma".into(), params.gamma.to_string()),
            ("svm_max_iter".into(), params.max_iter.to_string()),
            ("svm_tolerance".into(), params.tolerance.to_string()),
            ("svm_degree".into(), params.degree.to_string()),
            ("svm_coef0".into(), params.coef0.to_string()),
            ("svm_nu".into(), params.nu.to_string()),
            ("svm_p".into(), params.p.to_string()),
        ];
        manifest.inputs = vec![("features".into(), digest)];
        std::fs::write(
            path,
            serde_json::to_string_pretty(&manifest).expect("manifest"),
        )
        .map_err(|e| err("io", format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> CliResult {
    let text = std::fs::read_to_string(&a.features)
        .map_err(|e| err("io", format!("{}: {e}", a.features.display())))?;
    let rows = read_features_csv(&text).map_err(|e| err("schema", e))?;
    let model_text = std::fs::read_to_string(&a.model)
        .map_err(|e| err("io", format!("{}: {e}", a.model.display())))?;
    let model = load_model(&model_text).map_err(|e| err("model", e))?;
    let mut out = String::from("row,predicted\n");
    for (i, (features, _)) in rows.iter().enumerate() {
        let prediction = svm_predict(&model, features);
        out.push_str(&format!("{},{}\n", i, prediction.class.mnemonic()));
    }
    write_out(&a.out, &out)
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let (rows, _) = read_labeled_csv(&a.features)?;
    let model_text = std::fs::read_to_string(&a.model)
        .map_err(|e| err("io", format!("{}: {e}", a.model.display())))?;
    let model = load_model(&model_text).map_err(|e| err("model", e))?;
    let report = evaluate(&model, &rows);
    for (name, recall) in report.classes.iter().zip(&report.per_class_recall) {
        if recall.is_none() {
            eprintln!(
                "warning: class {name} absent from the evaluation rows; excluded from the average"
            );
        }
    }
    let output = EvalOutput {
        report,
        published_reference: published_reference(),
    };
    write_out(
        &a.out,
        &serde_json::to_string_pretty(&output).expect("report serializes"),
    )
}

fn write_truth(dir: &Path, stem: &str, truth: &GroundTruth) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| err("io", format!("{}: {e}", dir.display())))?;
    let mut entries = Vec::new();
    for (k, cell) in truth.cells.iter().enumerate() {
        let nucleus_name = format!("{stem}.cell{k}.nucleus.pgm");
        let cell_name = format!("{stem}.cell{k}.body.pgm");
        std::fs::write(dir.join(&nucleus_name), cell.nucleus_mask.write_pgm())
            .map_err(|e| err("io", e))?;
        std::fs::write(dir.join(&cell_name), cell.cell_mask.write_pgm())
            .map_err(|e| err("io", e))?;
        entries.push(CellTruthEntry {
            class: cell.class.mnemonic().to_string(),
            nucleus_mask: nucleus_name,
            cell_mask: cell_name,
            bbox: cell.bbox,
        });
    }
    let manifest = GroundTruthManifest { cells: entries };
    std::fs::write(
        dir.join(format!("{stem}.truth.json")),
        serde_json::to_string_pretty(&manifest).expect("truth manifest"),
    )
    .map_err(|e| err("io", e))
}

fn cmd_synth_scene(a: SceneArgs) -> CliResult {
    let classes: Vec<CellClass> = if a.cells.trim().is_empty() {
        Vec::new()
    } else {
        a.cells
            .split(',')
            .map(|s| {
                CellClass::from_mnemonic(s.trim())
                    .ok_or_else(|| err("usage", format!("unknown class mnemonic `{s}`")))
            })
            .collect::<Result<_, _>>()?
    };
    let mut spec = SceneSpec::new(a.seed, a.width, a.height);
    spec.rbc_count = a.rbc;
    spec.impurity_count = a.impurities;
    spec.noise_sigma = a.noise_sigma;
    // Cells on a centered grid, one per slot.
    let n = classes.len();
    if n > 0 {
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        let mut rng = SplitMix64::new(a.seed);
        for (i, class) in classes.into_iter().enumerate() {
            let cx = ((i % cols) * 2 + 1) * a.width / (2 * cols);
            let cy = ((i / cols) * 2 + 1) * a.height / (2 * rows);
            spec.cells
                .push(CellSpec::sample(class, (cx as i64, cy as i64), &mut rng));
        }
    }
    let (img, truth) = generate_scene(&spec).map_err(|e| err("synth", e))?;
    std::fs::write(&a.out, write_ppm(&img))
        .map_err(|e| err("io", format!("{}: {e}", a.out.display())))?;
    if let Some(dir) = &a.truth_dir {
        let stem = a
            .out
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scene")
            .to_string();
        write_truth(dir, &stem, &truth)?;
    }
    Ok(())
}

fn cmd_synth_fixture(a: FixtureArgs) -> CliResult {
    let kind = FixtureKind::from_name(&a.kind)
        .ok_or_else(|| err("usage", format!("unknown fixture `{}`", a.kind)))?;
    let (img, truth) = adhesion_fixture(kind);
    std::fs::write(&a.out, write_ppm(&img))
        .map_err(|e| err("io", format!("{}: {e}", a.out.display())))?;
    if let Some(dir) = &a.truth_dir {
        let stem = a
            .out
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("fixture")
            .to_string();
        write_truth(dir, &stem, &truth)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct DatasetSummary {
    scenes: usize,
    train_rows: usize,
    test_rows: usize,
    skipped_scenes: usize,
    train_digest: String,
    test_digest: String,
}

fn cmd_synth_dataset(a: DatasetArgs) -> CliResult {
    let params = pipeline_params(&a.flags)?;
    let opts = DatasetOptions::new(a.per_class, a.seed);
    let data = generate_dataset(&opts, &params);
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| err("io", format!("{}: {e}", a.out_dir.display())))?;
    let to_rows = |rows: &[([f64; FEATURE_COUNT], CellClass)]| {
        rows.iter()
            .map(|(f, l)| {
                (
                    bmc_core::features::FeatureVector {
                        values: *f,
                        quality_flagged: false,
                    },
                    Some(*l),
                )
            })
            .collect::<Vec<_>>()
    };
    let train_csv = write_features_csv(&to_rows(&data.train));
    let test_csv = write_features_csv(&to_rows(&data.test));
    std::fs::write(a.out_dir.join("train.csv"), &train_csv).map_err(|e| err("io", e))?;
    std::fs::write(a.out_dir.join("test.csv"), &test_csv).map_err(|e| err("io", e))?;
    let summary = DatasetSummary {
        scenes: data.scenes,
        train_rows: data.train.len(),
        test_rows: data.test.len(),
        skipped_scenes: data.skipped.len(),
        train_digest: digest_hex(train_csv.as_bytes()),
        test_digest: digest_hex(test_csv.as_bytes()),
    };
    std::fs::write(
        a.out_dir.join("dataset.json"),
        serde_json::to_string_pretty(&summary).expect("summary"),
    )
    .map_err(|e| err("io", e))
}
