//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numerical failure. Failures print one `error: ...` line to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::datamodel::{load_cohort, FeParam, FeParameterSet, FeatureSet, LoadCondition, LoadPolicy, Measure, Stratum};
use crate::error::{Error, Result};
use crate::eval::{
    compare_with_frax, evaluate, fit_pipeline, with_threads, CvConfig, EvalConfig, EvalReport, FraxComparison, PcaMode,
    Pipeline, ResampleConfig,
};
use crate::femodel::{run_load_case, FeConfig, FeResult, ForceDisplacementCurve, VoxelGrid};
use crate::stats::pca::{fit_fe9_pca, PcSignificance};
use crate::stats::{select_significant_pcs, Tail};
use crate::synth::{generate_cohort, CohortSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hipfrac", version, about = "FE-derived hip fracture risk index toolkit")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "all")]
    pub stratum: Stratum,
    /// Fit PCA once on the whole stratum instead of inside every split.
    #[arg(long, global = true)]
    pub paper_mode: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort CSV from a cohort spec.
    Synth(SynthArgs),
    /// Write a density phantom grid file.
    Phantom(PhantomArgs),
    /// Run the four FE load cases on a density grid.
    Fe(FeArgs),
    /// Fit the PC1 risk index and a classifier on a cohort.
    Fit(FitArgs),
    /// Run the CV and resampling protocol and write an evaluation report.
    Evaluate(EvaluateArgs),
    /// Compare a fitted model's scores with the cohort's FRAX column.
    CompareFrax(CompareFraxArgs),
    /// Print an evaluation report as a table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Cohort spec JSON; the built-in published summaries when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Override every group's size.
    #[arg(long)]
    pub group_size: Option<usize>,
    /// Also write the calibration check as JSON.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Voxel counts as `nx,ny,nz`.
    #[arg(long, value_delimiter = ',', default_value = "4,4,10")]
    pub dims: Vec<usize>,
    /// Voxel edge length (mm).
    #[arg(long, default_value_t = 3.0)]
    pub spacing: f64,
    /// Base CHA density (g/cm^3).
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeArgs {
    #[arg(long)]
    pub grid: PathBuf,
    /// Material and solve settings JSON; defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "fe_out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub ridge: f64,
    #[arg(long, default_value_t = 0.1)]
    pub shrinkage: f64,
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    #[arg(long, default_value_t = 5)]
    pub neighbors: usize,
}

impl ClassifierArgs {
    fn spec(&self, kind: ClassifierKind) -> ClassifierSpec {
        ClassifierSpec {
            kind,
            ridge: self.ridge,
            shrinkage: self.shrinkage,
            components: self.components,
            neighbors: self.neighbors,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub cohort: PathBuf,
    #[arg(long, default_value = "logistic")]
    pub classifier: ClassifierKind,
    #[arg(long, default_value = "PC1_ABMD_COV")]
    pub feature_set: FeatureSet,
    #[command(flatten)]
    pub hyper: ClassifierArgs,
    /// Write JSON here and print a summary; print JSON to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub cohort: PathBuf,
    #[arg(long, default_value = "eval_report.json")]
    pub out: PathBuf,
    /// Directory for test-split ROC CSVs.
    #[arg(long)]
    pub roc_dir: Option<PathBuf>,
    /// Strata to evaluate; `--stratum` alone when omitted, all three if that is `all`.
    #[arg(long, value_delimiter = ',')]
    pub strata: Vec<Stratum>,
    #[arg(long, value_delimiter = ',')]
    pub feature_sets: Vec<FeatureSet>,
    #[arg(long, value_delimiter = ',')]
    pub classifiers: Vec<ClassifierKind>,
    #[command(flatten)]
    pub hyper: ClassifierArgs,
    #[arg(long, default_value_t = 25)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.8)]
    pub split_fraction: f64,
}

#[derive(Debug, Args)]
pub struct CompareFraxArgs {
    #[arg(long)]
    pub cohort: PathBuf,
    /// Output of `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "frax_comparison.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub roc_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output of `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub stratum: Stratum,
    pub n: usize,
    pub cases: usize,
    pub pc1_variance_share: f64,
    pub variance_shares: Vec<f64>,
    pub pc_significance: Vec<PcSignificance>,
    pub pipeline: Pipeline,
}

/// Output of `fe`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeOutput {
    pub parameters: FeParameterSet,
    pub cases: BTreeMap<String, FeResult>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&serde_json::to_value(value)?)? + "\n")
}

fn curve_csv(curve: &ForceDisplacementCurve) -> String {
    let mut out = String::from("displacement,force,yielded_elements,largest_cluster\n");
    for s in &curve.samples {
        out.push_str(&format!("{},{},{},{}\n", s.displacement, s.force, s.yielded_elements, s.largest_cluster));
    }
    out
}

fn synth(args: &SynthArgs, seed: u64) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => CohortSpec::load(p)?,
        None => CohortSpec::table1_default(),
    };
    if let Some(n) = args.group_size {
        spec = spec.with_group_size(n);
    }
    let cohort = generate_cohort(&spec, seed)?;
    write_file(&args.out, &cohort.to_csv())?;
    if let Some(path) = &args.calibration {
        let report = crate::synth::calibration_check(&cohort, &spec)?;
        write_file(path, &to_json(&report)?)?;
    }
    println!("wrote {} subjects ({} cases) to {}", cohort.len(), cohort.case_count(), args.out.display());
    Ok(())
}

fn phantom(args: &PhantomArgs) -> Result<()> {
    if args.dims.len() != 3 {
        return Err(Error::InvalidInput(format!("--dims needs 3 values, got {}", args.dims.len())));
    }
    let grid = VoxelGrid::phantom((args.dims[0], args.dims[1], args.dims[2]), args.spacing, args.density)?;
    write_file(&args.out, &grid.to_text())?;
    println!("wrote {}x{}x{} phantom to {}", grid.nx, grid.ny, grid.nz, args.out.display());
    Ok(())
}

fn fe(args: &FeArgs) -> Result<()> {
    let grid = VoxelGrid::load(&args.grid)?;
    let config: FeConfig = match &args.config {
        Some(p) => serde_json::from_str(&read_file(p)?)?,
        None => FeConfig::default(),
    };
    config.material.validate()?;
    config.control.validate()?;
    let runs: Vec<(LoadCondition, ForceDisplacementCurve, FeResult)> = LoadCondition::ALL
        .par_iter()
        .map(|&c| {
            run_load_case(&grid, &config.material, c, &config.control)
                .map(|(curve, r)| (c, curve, r))
                .map_err(|e| Error::LoadCase {
                    case: c.name().to_string(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut parameters = FeParameterSet::from_array([0.0; 12]);
    let mut cases = BTreeMap::new();
    for (condition, curve, r) in &runs {
        parameters.set(FeParam::new(*condition, Measure::Yield), r.yield_load);
        parameters.set(FeParam::new(*condition, Measure::Ultimate), r.ultimate_load);
        parameters.set(FeParam::new(*condition, Measure::Energy), r.energy);
        cases.insert(condition.name().to_string(), *r);
        write_file(&args.out_dir.join(format!("curve_{}.csv", condition.name())), &curve_csv(curve))?;
    }
    let out = FeOutput { parameters, cases };
    write_file(&args.out_dir.join("fe_parameters.json"), &to_json(&out)?)?;
    for p in FeParam::all() {
        println!("{:<9}{:>12.1}", p.name(), parameters.get(p));
    }
    Ok(())
}

fn fit(args: &FitArgs, stratum: Stratum) -> Result<()> {
    let cohort = load_cohort(&args.cohort, LoadPolicy::Strict)?.stratum(stratum);
    if cohort.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let spec = args.hyper.spec(args.classifier);
    spec.validate()?;
    let pca = fit_fe9_pca(&cohort)?;
    let scores = pca.scores(&crate::datamodel::fe9_matrix(&cohort))?;
    let significance = select_significant_pcs(&scores, &cohort.labels())?;
    let pipeline = fit_pipeline(&cohort, args.feature_set, stratum, &spec, Some(&pca))?;
    let out = FitOutput {
        stratum,
        n: cohort.len(),
        cases: cohort.case_count(),
        pc1_variance_share: pca.variance_shares[0],
        variance_shares: pca.variance_shares.clone(),
        pc_significance: significance,
        pipeline,
    };
    let json = to_json(&out)?;
    match &args.out {
        Some(path) => {
            write_file(path, &json)?;
            println!("pc1_variance_share {:.4}", out.pc1_variance_share);
            for s in &out.pc_significance {
                println!("PC{} p = {:.3e}{}", s.component, s.p_value, if s.retained { " retained" } else { "" });
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn evaluate_cmd(args: &EvaluateArgs, cli: &Cli) -> Result<()> {
    let cohort = load_cohort(&args.cohort, LoadPolicy::Strict)?;
    let base = EvalConfig::new(cli.seed);
    let strata = if !args.strata.is_empty() {
        args.strata.clone()
    } else if cli.stratum == Stratum::All {
        Stratum::ALL.to_vec()
    } else {
        vec![cli.stratum]
    };
    let kinds = if args.classifiers.is_empty() {
        ClassifierKind::ALL.to_vec()
    } else {
        args.classifiers.clone()
    };
    let config = EvalConfig {
        strata,
        feature_sets: if args.feature_sets.is_empty() {
            base.feature_sets.clone()
        } else {
            args.feature_sets.clone()
        },
        classifiers: kinds.into_iter().map(|k| args.hyper.spec(k)).collect(),
        split_fraction: args.split_fraction,
        cv: CvConfig {
            repeats: args.repeats,
            ..base.cv
        },
        resample: ResampleConfig {
            resamples: args.resamples,
            ..base.resample
        },
        pca_mode: if cli.paper_mode { PcaMode::WholeSample } else { PcaMode::FoldInternal },
        ..base
    };
    let report = with_threads(cli.threads, || evaluate(&cohort, &config))??;
    write_file(&args.out, &report.to_json()?)?;
    if let Some(dir) = &args.roc_dir {
        for (key, curve) in &report.roc_curves {
            let name = key.replace(['/', '(', ')'], "_");
            write_file(&dir.join(format!("roc_{name}.csv")), &curve.to_csv())?;
        }
    }
    let mode = match config.pca_mode {
        PcaMode::FoldInternal => "fold-internal",
        PcaMode::WholeSample => "whole-sample (paper mode)",
    };
    println!("pca mode: {mode}");
    println!("wrote {} cells to {}", report.cells.len(), args.out.display());
    Ok(())
}

fn compare_frax(args: &CompareFraxArgs) -> Result<()> {
    let fit: FitOutput = serde_json::from_str(&read_file(&args.model)?)?;
    let cohort = load_cohort(&args.cohort, LoadPolicy::Strict)?.stratum(fit.stratum);
    let scores = fit.pipeline.score(&cohort)?;
    let result: FraxComparison = compare_with_frax(&cohort, &scores, Tail::OneSidedGreater)?;
    write_file(&args.out, &to_json(&result)?)?;
    if let Some(dir) = &args.roc_dir {
        if let (Some(m), Some(f)) = (&result.model_roc, &result.frax_roc) {
            write_file(&dir.join("roc_model.csv"), &m.to_csv())?;
            write_file(&dir.join("roc_frax.csv"), &f.to_csv())?;
        }
    }
    println!(
        "model AUC {:.3}, FRAX AUC {:.3}, one-sided p = {:.3e}",
        result.model_auc, result.frax_auc, result.delong.p_value
    );
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let report = EvalReport::from_json(&read_file(&args.report)?)?;
    let table = report.format_table();
    match &args.out {
        Some(p) => write_file(p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a, cli.seed),
        Command::Phantom(a) => phantom(a),
        Command::Fe(a) => with_threads(cli.threads, || fe(a))?,
        Command::Fit(a) => fit(a, cli.stratum),
        Command::Evaluate(a) => evaluate_cmd(a, cli),
        Command::CompareFrax(a) => compare_frax(a),
        Command::Report(a) => report(a),
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_DATA
    }
}

/// Parses `argv` (program name first), runs the command, and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            eprintln!("error: {first}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}
