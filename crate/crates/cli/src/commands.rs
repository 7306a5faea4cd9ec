//! Subcommand implementations. Each stage writes its data artifacts first,
//! then its figures, then a run manifest listing every output with a
//! content digest.

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use log::{info, warn};

use appraisal_core::annotate::{annotate, read_annotated, write_annotated, AnnotatedThought};
use appraisal_core::config::PipelineConfig;
use appraisal_core::corpus::{
    expand_multilabel, load_envent, load_thinking_trap, split_counts, EventRecord, Split,
};
use appraisal_core::error::PipelineError;
use appraisal_core::model::{
    evaluate, train, Checkpoint, EncoderConfig, EvalReport, Predictor, TrainConfig,
};
use appraisal_core::profiles::{
    all_relative_profiles, baseline_profile, distortion_profile, reframe_shift_with,
    write_profiles, write_relative_profiles, AppraisalProfile, RelativeProfile,
};
use appraisal_core::stats::{
    significance_matrix, write_decision_grid, write_matrix_metadata, write_pvalue_grid,
    MatrixOptions, SignificanceMatrix, Strategy,
};
use appraisal_core::taxonomy::{Taxonomy, DIMENSION_NAMES};
use appraisal_core::vector::AppraisalVector;

use crate::manifest::RunManifest;
use crate::plot::{
    bar_chart_png, bar_chart_svg, heatmap_png, heatmap_svg, line_plot_png, line_plot_svg,
    write_pair, Series,
};

/// Environment variable that prefixes relative dataset paths.
pub const DATA_DIR_VAR: &str = "APPRAISAL_DATA_DIR";

pub struct Context {
    pub config: PipelineConfig,
    pub config_path: PathBuf,
}

impl Context {
    pub fn load(config_path: &Path) -> Result<Self> {
        let config = PipelineConfig::load(config_path)?;
        Ok(Context {
            config,
            config_path: config_path.to_path_buf(),
        })
    }

    fn output_dir(&self) -> Result<PathBuf> {
        let dir = self
            .config
            .paths
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("output"));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output dir {}", dir.display()))?;
        Ok(dir)
    }

    fn checkpoint_dir(&self) -> Result<PathBuf> {
        Ok(match &self.config.paths.checkpoint_dir {
            Some(dir) => dir.clone(),
            None => self.output_dir()?.join("checkpoint"),
        })
    }

    fn annotated_path(&self, option: Option<&Path>) -> Result<PathBuf> {
        Ok(match (option, &self.config.paths.annotated) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => p.clone(),
            (None, None) => self.output_dir()?.join("annotated.tsv"),
        })
    }

    /// A dataset path from the config, prefixed by the data directory
    /// variable when relative. Missing keys are configuration errors that
    /// name the key.
    fn dataset(&self, value: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
        let path = value.clone().ok_or_else(|| {
            PipelineError::Config(format!("config key '{key}' is not set"))
        })?;
        if path.is_absolute() {
            return Ok(path);
        }
        Ok(match std::env::var_os(DATA_DIR_VAR) {
            Some(dir) => PathBuf::from(dir).join(path),
            None => path,
        })
    }

    fn matrix_options(&self, alpha: Option<f64>) -> MatrixOptions {
        MatrixOptions {
            alpha: alpha.unwrap_or(self.config.analyze.alpha),
            comparison_count: self.config.analyze.comparison_count,
            exact_threshold: self.config.analyze.exact_threshold,
        }
    }
}

fn slug(name: &str) -> String {
    name.replace([' ', '-'], "_")
}

fn read_annotated_input(ctx: &Context, option: Option<&Path>) -> Result<(PathBuf, Vec<AnnotatedThought>)> {
    let path = ctx.annotated_path(option)?;
    if !path.exists() {
        return Err(PipelineError::Validation(format!(
            "annotated corpus {} not found; run the annotate stage first",
            path.display()
        ))
        .into());
    }
    let data = read_annotated(&path, ctx.config.delimiter)?;
    if data.is_empty() {
        return Err(PipelineError::EmptyInput(format!(
            "annotated corpus {} has no rows",
            path.display()
        ))
        .into());
    }
    Ok((path, data))
}

struct ClampedPredictor<'a>(&'a Checkpoint);

impl Predictor for ClampedPredictor<'_> {
    fn predict(&self, texts: &[String]) -> Result<Vec<AppraisalVector>, PipelineError> {
        self.0.predict_clamped(texts)
    }
}

fn split_records(records: &[EventRecord], split: Split) -> Vec<EventRecord> {
    records.iter().filter(|r| r.split == split).cloned().collect()
}

fn eval_on(
    checkpoint: &Checkpoint,
    records: &[EventRecord],
    clamp: bool,
) -> Result<EvalReport> {
    let texts: Vec<String> = records.iter().map(|r| r.text.clone()).collect();
    let predictions = if clamp {
        checkpoint.predict_clamped(&texts)?
    } else {
        checkpoint.predict(&texts)?
    };
    let gold: Vec<AppraisalVector> = records.iter().map(|r| r.ratings.clone()).collect();
    Ok(evaluate(&predictions, &gold)?)
}

pub fn cmd_train(ctx: &Context) -> Result<()> {
    let envent_path = ctx.dataset(&ctx.config.paths.envent, "paths.envent")?;
    let records = load_envent(&envent_path, &ctx.config.columns.envent, ctx.config.delimiter)?;
    let (n_train, n_dev, n_test) = split_counts(&records);
    info!("loaded {} events ({n_train} train / {n_dev} dev / {n_test} test)", records.len());

    let section = &ctx.config.train;
    let embedding_table = match &section.embedding_table {
        Some(path) => Some(ctx.dataset(&Some(path.clone()), "train.embedding_table")?),
        None => None,
    };
    let train_config = TrainConfig {
        encoder: EncoderConfig {
            name: section.encoder.clone(),
            embedding_dim: section.embedding_dim,
            embedding_table,
        },
        hidden_dim: section.hidden_dim,
        learning_rate: section.learning_rate,
        dropout_rate: section.dropout_rate,
        weight_decay: section.weight_decay,
        max_epochs: section.max_epochs,
        patience: section.patience,
        batch_size: section.batch_size,
        seed: section.seed,
    };

    let train_set = split_records(&records, Split::Train);
    let dev_set = split_records(&records, Split::Validation);
    let test_set = split_records(&records, Split::Test);
    let model = train(&train_config, &train_set, &dev_set)?;
    let checkpoint_dir = ctx.checkpoint_dir()?;
    Checkpoint::save(&model, &checkpoint_dir)?;
    let checkpoint = Checkpoint::load(&checkpoint_dir)?;
    info!(
        "checkpoint saved to {} (best epoch {})",
        checkpoint_dir.display(),
        model.best_epoch
    );

    let output_dir = ctx.output_dir()?;
    let mut manifest = RunManifest::new("train", &train_config)?;
    manifest.add_input(&ctx.config_path)?;
    manifest.seed = Some(train_config.seed);
    manifest.checkpoint_digest = Some(checkpoint.weights_digest().to_string());
    manifest.add_input(&envent_path)?;
    for file in ["weights.bin", "config.json", "history.csv"] {
        manifest.add_output(&checkpoint_dir.join(file))?;
    }

    if test_set.is_empty() {
        warn!("no test split, skipping evaluation");
    } else {
        let raw = eval_on(&checkpoint, &test_set, false)?;
        let clamped = eval_on(&checkpoint, &test_set, true)?;
        info!(
            "test macro-RMSE {:.4} (clamped {:.4})",
            raw.macro_rmse, clamped.macro_rmse
        );
        let raw_path = output_dir.join("rmse_test.csv");
        let clamped_path = output_dir.join("rmse_test_clamped.csv");
        appraisal_core::model::write_eval_report(&raw, &raw_path)?;
        appraisal_core::model::write_eval_report(&clamped, &clamped_path)?;
        manifest.add_output(&raw_path)?;
        manifest.add_output(&clamped_path)?;

        let values: Vec<f64> = raw.per_dimension_rmse.iter().copied().collect();
        let svg = bar_chart_svg("Per-dimension test RMSE", &DIMENSION_NAMES, &values, "RMSE");
        for file in write_pair(&output_dir.join("rmse_test"), &svg, &bar_chart_png(&values))? {
            manifest.add_output(&file)?;
        }
    }
    let path = manifest.write(&output_dir)?;
    info!("manifest written to {}", path.display());
    Ok(())
}

pub fn cmd_annotate(ctx: &Context, reframes: Option<bool>) -> Result<()> {
    let checkpoint_dir = ctx.checkpoint_dir()?;
    let checkpoint = Checkpoint::load(&checkpoint_dir)?;
    let main_path = ctx.dataset(&ctx.config.paths.thinking_trap, "paths.thinking_trap")?;
    let extra_path = ctx.dataset(
        &ctx.config.paths.thinking_trap_extra,
        "paths.thinking_trap_extra",
    )?;
    let taxonomy = ctx.config.taxonomy();
    let thoughts = load_thinking_trap(
        &main_path,
        &extra_path,
        &ctx.config.columns.thinking_trap,
        ctx.config.delimiter,
        &taxonomy,
    )?;
    let expanded = expand_multilabel(&thoughts);
    info!("{} thoughts expanded to {} rows", thoughts.len(), expanded.len());

    let include_reframes = reframes.unwrap_or(ctx.config.annotate.include_reframes);
    let annotated = if ctx.config.annotate.clamp_predictions {
        annotate(&ClampedPredictor(&checkpoint), &expanded, include_reframes)?
    } else {
        annotate(&checkpoint, &expanded, include_reframes)?
    };
    let annotated_path = ctx.annotated_path(None)?;
    write_annotated(&annotated, &annotated_path, ctx.config.delimiter)?;
    info!("annotated corpus written to {}", annotated_path.display());

    let output_dir = ctx.output_dir()?;
    let mut manifest = RunManifest::new("annotate", &ctx.config.annotate)?;
    manifest.add_input(&ctx.config_path)?;
    manifest.checkpoint_digest = Some(checkpoint.weights_digest().to_string());
    manifest.add_input(&main_path)?;
    manifest.add_input(&extra_path)?;
    manifest.add_input(&checkpoint_dir.join("weights.bin"))?;
    manifest.add_output(&annotated_path)?;
    manifest.write(&output_dir)?;
    Ok(())
}

fn heatmap_files(
    matrix: &SignificanceMatrix,
    taxonomy: &Taxonomy,
    base: &Path,
) -> Result<Vec<PathBuf>> {
    let rows: Vec<&str> = taxonomy.distortion_classes().map(|c| c.name.as_str()).collect();
    let svg = heatmap_svg(
        &format!("Significant distortion-appraisal pairs ({})", matrix.strategy),
        &rows,
        &DIMENSION_NAMES,
        &matrix.significant,
    );
    write_pair(base, &svg, &heatmap_png(&matrix.significant))
}

pub fn cmd_analyze(
    ctx: &Context,
    annotated: Option<&Path>,
    alpha: Option<f64>,
    strategies: &[String],
) -> Result<()> {
    let (annotated_path, data) = read_annotated_input(ctx, annotated)?;
    let names = if strategies.is_empty() {
        ctx.config.analyze.strategies.clone()
    } else {
        strategies.to_vec()
    };
    let strategies: Vec<Strategy> = names
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, PipelineError>>()?;
    let taxonomy = ctx.config.taxonomy();
    let options = ctx.matrix_options(alpha);
    let output_dir = ctx.output_dir()?;

    let mut manifest = RunManifest::new("analyze", &ctx.config.analyze)?;
    manifest.add_input(&ctx.config_path)?;
    manifest.add_input(&annotated_path)?;
    let mut thresholds = serde_json::Map::new();
    for strategy in strategies {
        let matrix = significance_matrix(&data, strategy, &taxonomy, options)?;
        info!(
            "{strategy}: {} significant cells at threshold {:.3e}",
            matrix.significant_count(),
            matrix.corrected_threshold
        );
        let pvalues = output_dir.join(format!("pvalues_{strategy}.csv"));
        let decisions = output_dir.join(format!("decisions_{strategy}.csv"));
        let metadata = output_dir.join(format!("analyze_{strategy}.json"));
        write_pvalue_grid(&matrix, &taxonomy, &pvalues)?;
        write_decision_grid(&matrix, &taxonomy, &decisions)?;
        write_matrix_metadata(&matrix, &metadata)?;
        manifest.add_output(&pvalues)?;
        manifest.add_output(&decisions)?;
        manifest.add_output(&metadata)?;
        for file in heatmap_files(&matrix, &taxonomy, &output_dir.join(format!("heatmap_{strategy}")))? {
            manifest.add_output(&file)?;
        }
        thresholds.insert(
            strategy.to_string(),
            serde_json::json!(matrix.corrected_threshold),
        );
    }
    manifest.effective_config["alpha_used"] = serde_json::json!(options.alpha);
    manifest.effective_config["corrected_thresholds"] = serde_json::Value::Object(thresholds);
    manifest.write(&output_dir)?;
    Ok(())
}

/// Classes highlighted with their own figure in addition to the per-class set.
const SELECTED_CLASSES: [&str; 2] = ["mind reading", "catastrophizing"];

fn profile_series(profile: &AppraisalProfile) -> Series {
    Series {
        label: profile.label.clone(),
        values: profile.medians.iter().copied().collect(),
    }
}

fn relative_series(profile: &RelativeProfile) -> Series {
    Series {
        label: profile.label.clone(),
        values: profile.deltas.iter().copied().collect(),
    }
}

pub fn cmd_profile(ctx: &Context, annotated: Option<&Path>) -> Result<()> {
    let (annotated_path, data) = read_annotated_input(ctx, annotated)?;
    let taxonomy = ctx.config.taxonomy();
    let output_dir = ctx.output_dir()?;

    let baseline = baseline_profile(&data)?;
    let mut profiles = vec![baseline.clone()];
    for class in taxonomy.distortion_classes() {
        profiles.push(distortion_profile(&data, class)?);
    }
    let profiles_path = output_dir.join("profiles.csv");
    write_profiles(&profiles, &profiles_path)?;

    let relative = all_relative_profiles(&data, &taxonomy)?;
    let relative_path = output_dir.join("relative_profiles.csv");
    write_relative_profiles(&relative, &relative_path)?;

    let mut manifest = RunManifest::new("profile", &ctx.config.profile)?;
    manifest.add_input(&ctx.config_path)?;
    manifest.add_input(&annotated_path)?;
    manifest.add_output(&profiles_path)?;
    manifest.add_output(&relative_path)?;
    for file in render_profile_figures(&baseline, &relative, &output_dir)? {
        manifest.add_output(&file)?;
    }
    manifest.write(&output_dir)?;
    Ok(())
}

fn render_profile_figures(
    baseline: &AppraisalProfile,
    relative: &[RelativeProfile],
    output_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let series = [profile_series(baseline)];
    let svg = line_plot_svg(
        "Baseline appraisal profile (no distortion)",
        &DIMENSION_NAMES,
        &series,
        "median appraisal",
    );
    files.extend(write_pair(
        &output_dir.join("profile_baseline"),
        &svg,
        &line_plot_png(DIMENSION_NAMES.len(), &series),
    )?);

    for profile in relative {
        let series = [relative_series(profile)];
        let svg = line_plot_svg(
            &format!("Appraisal profile relative to baseline: {}", profile.label),
            &DIMENSION_NAMES,
            &series,
            "median delta",
        );
        files.extend(write_pair(
            &output_dir.join(format!("relative_profile_{}", slug(&profile.label))),
            &svg,
            &line_plot_png(DIMENSION_NAMES.len(), &series),
        )?);
    }

    let selected: Vec<Series> = relative
        .iter()
        .filter(|p| SELECTED_CLASSES.contains(&p.label.as_str()))
        .map(relative_series)
        .collect();
    if !selected.is_empty() {
        let svg = line_plot_svg(
            "Relative appraisal profiles, selected classes",
            &DIMENSION_NAMES,
            &selected,
            "median delta",
        );
        files.extend(write_pair(
            &output_dir.join("relative_profiles_selected"),
            &svg,
            &line_plot_png(DIMENSION_NAMES.len(), &selected),
        )?);
    }
    Ok(files)
}

pub fn cmd_reframe_shift(ctx: &Context, annotated: Option<&Path>, per_pair: bool) -> Result<()> {
    let (annotated_path, data) = read_annotated_input(ctx, annotated)?;
    let taxonomy = ctx.config.taxonomy();
    let per_pair = per_pair || ctx.config.profile.per_pair_shift;
    let output_dir = ctx.output_dir()?;

    let mut shifts = Vec::new();
    for class in taxonomy.distortion_classes() {
        match reframe_shift_with(&data, class, per_pair) {
            Ok(shift) => shifts.push(shift),
            Err(e) => warn!("class '{}' skipped: {e}", class.name),
        }
    }
    if shifts.is_empty() {
        return Err(PipelineError::EmptyInput(
            "no class has reframed rows; annotate with reframes enabled first".into(),
        )
        .into());
    }
    let shifts_path = output_dir.join("reframe_shifts.csv");
    write_relative_profiles(&shifts, &shifts_path)?;

    let mut manifest = RunManifest::new("reframe-shift", &ctx.config.profile)?;
    manifest.add_input(&ctx.config_path)?;
    manifest.effective_config["per_pair_used"] = serde_json::json!(per_pair);
    manifest.add_input(&annotated_path)?;
    manifest.add_output(&shifts_path)?;
    for file in render_shift_figure(&shifts, &output_dir)? {
        manifest.add_output(&file)?;
    }
    manifest.write(&output_dir)?;
    Ok(())
}

fn render_shift_figure(shifts: &[RelativeProfile], output_dir: &Path) -> Result<Vec<PathBuf>> {
    let series: Vec<Series> = shifts.iter().map(relative_series).collect();
    let svg = line_plot_svg(
        "Appraisal shift after reframing, per distortion class",
        &DIMENSION_NAMES,
        &series,
        "median shift",
    );
    write_pair(
        &output_dir.join("reframe_shift"),
        &svg,
        &line_plot_png(DIMENSION_NAMES.len(), &series),
    )
}

fn read_grid_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let labels: Vec<String> = reader.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok((labels, rows))
}

/// Regenerate every figure from the persisted CSV artifacts; earlier stages
/// are not re-run.
pub fn cmd_report(ctx: &Context) -> Result<()> {
    let output_dir = ctx.output_dir()?;
    let mut manifest = RunManifest::new("report", &serde_json::json!({}))?;
    manifest.add_input(&ctx.config_path)?;
    let mut regenerated = 0usize;

    let rmse_path = output_dir.join("rmse_test.csv");
    if rmse_path.exists() {
        let (_, rows) = read_grid_csv(&rmse_path)?;
        let named: Vec<(&str, f64)> = rows
            .iter()
            .filter(|r| r[0] != "macro")
            .map(|r| (r[0].as_str(), r[1].parse().unwrap_or(0.0)))
            .collect();
        let labels: Vec<&str> = named.iter().map(|(n, _)| *n).collect();
        let values: Vec<f64> = named.iter().map(|(_, v)| *v).collect();
        let svg = bar_chart_svg("Per-dimension test RMSE", &labels, &values, "RMSE");
        manifest.add_input(&rmse_path)?;
        for file in write_pair(&output_dir.join("rmse_test"), &svg, &bar_chart_png(&values))? {
            manifest.add_output(&file)?;
        }
        regenerated += 1;
    }

    for strategy in Strategy::ALL {
        let decisions_path = output_dir.join(format!("decisions_{strategy}.csv"));
        if !decisions_path.exists() {
            continue;
        }
        let (columns, rows) = read_grid_csv(&decisions_path)?;
        let row_labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
        let column_labels: Vec<&str> = columns.iter().map(String::as_str).collect();
        let cells: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r[1..].iter().map(|v| v == "1").collect())
            .collect();
        let svg = heatmap_svg(
            &format!("Significant distortion-appraisal pairs ({strategy})"),
            &row_labels,
            &column_labels,
            &cells,
        );
        manifest.add_input(&decisions_path)?;
        for file in write_pair(
            &output_dir.join(format!("heatmap_{strategy}")),
            &svg,
            &heatmap_png(&cells),
        )? {
            manifest.add_output(&file)?;
        }
        regenerated += 1;
    }

    let profiles_path = output_dir.join("profiles.csv");
    let relative_path = output_dir.join("relative_profiles.csv");
    if profiles_path.exists() && relative_path.exists() {
        let (_, profile_rows) = read_grid_csv(&profiles_path)?;
        let baseline_row = profile_rows
            .iter()
            .find(|r| r[0] == "baseline")
            .ok_or_else(|| PipelineError::Validation("profiles.csv has no baseline row".into()))?;
        let baseline = AppraisalProfile {
            label: "baseline".into(),
            medians: parse_vector(&baseline_row[1..baseline_row.len() - 1])?,
            n: baseline_row.last().unwrap().parse().unwrap_or(0),
        };
        let (_, relative_rows) = read_grid_csv(&relative_path)?;
        let relative: Vec<RelativeProfile> = relative_rows
            .iter()
            .map(|r| {
                Ok(RelativeProfile {
                    label: r[0].clone(),
                    baseline_label: r[1].clone(),
                    deltas: parse_vector(&r[2..r.len() - 1])?,
                    n: r.last().unwrap().parse().unwrap_or(0),
                })
            })
            .collect::<Result<_>>()?;
        manifest.add_input(&profiles_path)?;
        manifest.add_input(&relative_path)?;
        for file in render_profile_figures(&baseline, &relative, &output_dir)? {
            manifest.add_output(&file)?;
        }
        regenerated += 1;
    }

    let shifts_path = output_dir.join("reframe_shifts.csv");
    if shifts_path.exists() {
        let (_, rows) = read_grid_csv(&shifts_path)?;
        let shifts: Vec<RelativeProfile> = rows
            .iter()
            .map(|r| {
                Ok(RelativeProfile {
                    label: r[0].clone(),
                    baseline_label: r[1].clone(),
                    deltas: parse_vector(&r[2..r.len() - 1])?,
                    n: r.last().unwrap().parse().unwrap_or(0),
                })
            })
            .collect::<Result<_>>()?;
        manifest.add_input(&shifts_path)?;
        for file in render_shift_figure(&shifts, &output_dir)? {
            manifest.add_output(&file)?;
        }
        regenerated += 1;
    }

    if regenerated == 0 {
        return Err(PipelineError::EmptyInput(format!(
            "no persisted artifacts in {}; run the pipeline stages first",
            output_dir.display()
        ))
        .into());
    }
    info!("regenerated figures for {regenerated} artifact group(s)");
    manifest.write(&output_dir)?;
    Ok(())
}

fn parse_vector(fields: &[String]) -> Result<AppraisalVector> {
    let values: Vec<f64> = fields
        .iter()
        .map(|v| {
            v.parse::<f64>()
                .map_err(|e| PipelineError::Validation(format!("bad value '{v}': {e}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(AppraisalVector::from_slice(&values)?)
}
