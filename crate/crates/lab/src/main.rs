use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use swec_core::split::split_stratified;
use swec_core::synthgrid::parse_bus_list;
use swec_core::BusId;
use swec_lab::config::bus_label;
use swec_lab::dataset_io::{load_dataset, save_dataset};
use swec_lab::error::StageExt;
use swec_lab::harness::{
    cnn_gradient_check, evaluate, evaluate_split, init_thread_pool, split_fingerprint,
    synthesize_dataset, FeatureSet,
};
use swec_lab::model_io::{load_model, save_model};
use swec_lab::report::{
    confusion_csv, ClassRow, Repeat, ReportTable, RowKey, SummaryRow, SUMMARY_HEADER,
};
use swec_lab::{ExperimentConfig, Lab, LabError, LabResult, Method};

/// Event-cause classification from synchronized waveform measurements.
#[derive(Parser)]
#[command(name = "swec", version, arg_required_else_help = true)]
struct Cli {
    /// Print progress and timings to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset directory at one sampling rate.
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a dataset directory and save it.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "cnn")]
        method: Method,
    },
    /// Evaluate a saved model on the test split of a dataset directory.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// CNN accuracy at every rate of the fs list.
    SweepFs {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Run directory for reports, models and confusion matrices.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CNN accuracy for every bus subset.
    SweepPlacement {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every configured method on identical splits.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference check of CNN gradients on random 3x166 inputs.
    Gradcheck {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Collect the summary rows of every report below a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Flags named after the configuration keys; they override the file.
#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fs: Option<f64>,
    /// Comma separated rates, e.g. `1250,20000`.
    #[arg(long, value_delimiter = ',')]
    fs_list: Option<Vec<f64>>,
    /// Comma separated bus ids, e.g. `632,671,675`.
    #[arg(long)]
    buses: Option<String>,
    /// Semicolon separated bus lists, e.g. `632;671;632,671`.
    #[arg(long)]
    bus_subsets: Option<String>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// SNR in dB, or `none` for noiseless records.
    #[arg(long)]
    snr_db: Option<String>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    max_jitter_s: Option<f64>,
    /// Comma separated methods out of autoencoder, svm, tmlp, cnn.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    energy_intervals: Option<usize>,
    #[arg(long)]
    cnn_epochs: Option<usize>,
    #[arg(long)]
    cnn_learning_rate: Option<f64>,
}

fn buses_arg(text: &str) -> LabResult<Vec<BusId>> {
    parse_bus_list(text).map_err(|e| LabError::Config(e.to_string()))
}

impl ConfigArgs {
    fn resolve(&self) -> LabResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.fs {
            cfg.fs = v;
        }
        if let Some(v) = &self.fs_list {
            cfg.fs_list = v.clone();
        }
        if let Some(v) = &self.buses {
            cfg.buses = buses_arg(v)?;
        }
        if let Some(v) = &self.bus_subsets {
            cfg.bus_subsets = v.split(';').map(buses_arg).collect::<LabResult<_>>()?;
        }
        if let Some(v) = self.train_fraction {
            cfg.train_fraction = v;
        }
        if let Some(v) = &self.snr_db {
            cfg.snr_db = match v.as_str() {
                "none" => None,
                s => Some(
                    s.parse()
                        .map_err(|_| LabError::Config(format!("--snr-db `{s}` is not a number")))?,
                ),
            };
        }
        if let Some(v) = self.duration_s {
            cfg.duration_s = v;
        }
        if let Some(v) = self.max_jitter_s {
            cfg.max_jitter_s = v;
        }
        if let Some(v) = &self.methods {
            cfg.methods = v.clone();
        }
        if let Some(v) = self.repeats {
            cfg.repeats = v;
        }
        if let Some(v) = self.energy_intervals {
            cfg.energy_intervals = v;
        }
        if let Some(v) = self.cnn_epochs {
            cfg.cnn.epochs = Some(v);
        }
        if let Some(v) = self.cnn_learning_rate {
            cfg.cnn.learning_rate = Some(v);
        }
        cfg.validate()
    }
}

struct Log {
    verbose: bool,
    start: Instant,
}

impl Log {
    fn note(&self, what: &str) {
        if self.verbose {
            eprintln!("[{:8.2}s] {what}", self.start.elapsed().as_secs_f64());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log {
        verbose: cli.verbose,
        start: Instant::now(),
    };
    match init_thread_pool().and_then(|()| run(cli.command, &log)) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(1)
        }
    }
}

/// Runs one subcommand and returns its stdout.
fn run(command: Command, log: &Log) -> LabResult<String> {
    match command {
        Command::Generate { cfg, out } => {
            let cfg = cfg.resolve()?;
            let dataset = synthesize_dataset(&cfg.dataset_config(cfg.fs))?;
            log.note("synthesized");
            let manifest = save_dataset(&dataset, &out)?;
            log.note("written");
            let c = manifest.counts;
            Ok(format!(
                "fs_hz,records,class_1,class_2,class_3,class_4\n{},{},{},{},{},{}\n",
                manifest.fs,
                manifest.events.len(),
                c[0],
                c[1],
                c[2],
                c[3]
            ))
        }
        Command::Train {
            cfg: args,
            data,
            model,
            method,
        } => {
            let cfg = args.resolve()?;
            let (features, inputs) = load_features(&cfg, args.fs, &data, log)?;
            let split =
                split_stratified(&features.labels, cfg.train_fraction, cfg.seed).stage("split")?;
            let (trained, report) =
                evaluate_split(&cfg, method, &inputs, &features.labels, &split, cfg.seed)?;
            log.note("trained");
            save_model(&trained, &model)?;
            Ok(format!(
                "method,fs_hz,buses,seed,train,test,acc,split\n{method},{},{},{},{},{},{:.2},{}\n",
                features.fs,
                bus_label(&cfg.buses),
                cfg.seed,
                split.train.len(),
                split.test.len(),
                swec_core::metrics::percent_2dp(report.accuracy),
                split_fingerprint(&split)
            ))
        }
        Command::Eval {
            cfg: args,
            model,
            data,
        } => {
            let cfg = args.resolve()?;
            let classifier = load_model(&model)?;
            let (features, inputs) = load_features(&cfg, args.fs, &data, log)?;
            let split =
                split_stratified(&features.labels, cfg.train_fraction, cfg.seed).stage("split")?;
            let report = evaluate(&classifier, &inputs, &features.labels, &split.test)?;
            let key = RowKey {
                method: classifier.method(),
                fs: features.fs,
                buses: cfg.buses.clone(),
                repeat: Repeat::Index(0),
            };
            let table = ReportTable {
                summary: vec![SummaryRow::from_report(
                    key.clone(),
                    cfg.seed,
                    &split_fingerprint(&split),
                    &report,
                )],
                classes: ClassRow::all(&key, &report),
            };
            Ok(format!(
                "{}\n{}",
                confusion_csv(&report.confusion),
                table.to_csv()
            ))
        }
        Command::SweepFs { cfg, out } => experiment(cfg, out, log, Lab::sweep_sampling_rate),
        Command::SweepPlacement { cfg, out } => experiment(cfg, out, log, Lab::sweep_placement),
        Command::Compare { cfg, out } => experiment(cfg, out, log, Lab::compare_methods),
        Command::Gradcheck { seed, pairs, step } => {
            if !(step.is_finite() && step > 0.0) {
                return Err(LabError::Config(format!("--step {step} must be positive")));
            }
            let report = cnn_gradient_check(seed, pairs, step)?;
            let max = report.max_rel_error();
            let mut out = String::from("tensor,values,checked,skipped_kinks,max_rel_error\n");
            for t in &report.tensors {
                out += &format!(
                    "{},{},{},{},{:e}\n",
                    t.name, t.len, t.checked, t.skipped_kinks, t.max_rel_error
                );
            }
            out += &format!(
                "all,{},{},{},{max:e}\n",
                report.tensors.iter().map(|t| t.len).sum::<usize>(),
                report.checked(),
                report.skipped()
            );
            if max >= 1e-4 {
                print!("{out}");
                return Err(LabError::Config(format!(
                    "max relative error {max:e} is not below 1e-4"
                )));
            }
            Ok(out)
        }
        Command::Report { input } => collect_reports(&input),
    }
}

/// Loads a dataset directory and selects the configured buses. A rate given
/// on the command line must match the dataset.
fn load_features(
    cfg: &ExperimentConfig,
    fs_flag: Option<f64>,
    data: &Path,
    log: &Log,
) -> LabResult<(FeatureSet, Vec<swec_core::FeatureMatrix>)> {
    let dataset = load_dataset(data)?;
    log.note("dataset loaded");
    if let Some(fs) = fs_flag.filter(|&fs| fs != dataset.config.fs) {
        return Err(LabError::Config(format!(
            "--fs {fs} does not match the dataset rate {}",
            dataset.config.fs
        )));
    }
    let features = FeatureSet::from_dataset(&dataset, cfg.max_jitter_s)?;
    let inputs = features.select(&cfg.buses)?;
    log.note("features extracted");
    Ok((features, inputs))
}

fn experiment(
    args: ConfigArgs,
    out: Option<PathBuf>,
    log: &Log,
    run: fn(&Lab) -> LabResult<swec_lab::Experiment>,
) -> LabResult<String> {
    let lab = Lab::new(args.resolve()?)?;
    let exp = run(&lab)?;
    log.note("cells evaluated");
    if let Some(dir) = out {
        exp.write_run(&dir)?;
        log.note("run directory written");
    }
    Ok(exp.table().to_csv())
}

/// Summary rows of every `reports/*.csv` below `root`, prefixed with the run
/// directory and the experiment name.
fn collect_reports(root: &Path) -> LabResult<String> {
    let mut files = Vec::new();
    find_reports(root, &mut files)?;
    if files.is_empty() {
        return Err(LabError::Config(format!(
            "no reports below {}",
            root.display()
        )));
    }
    files.sort();
    let mut out = format!("run,experiment,{SUMMARY_HEADER}\n");
    for path in files {
        let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
        let table = ReportTable::parse(&text, &path)?;
        let run_dir = path.parent().and_then(Path::parent).unwrap_or(root);
        let run = run_dir
            .strip_prefix(root)
            .unwrap_or(run_dir)
            .display()
            .to_string();
        let run = if run.is_empty() { ".".to_string() } else { run };
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let summary = ReportTable {
            summary: table.summary,
            classes: Vec::new(),
        }
        .to_csv();
        for line in summary.lines().skip(1).take_while(|l| !l.is_empty()) {
            out += &format!("{run},{name},{line}\n");
        }
    }
    Ok(out)
}

fn find_reports(dir: &Path, out: &mut Vec<PathBuf>) -> LabResult<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if path.is_dir() {
            find_reports(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "csv")
            && path
                .parent()
                .and_then(Path::file_name)
                .is_some_and(|n| n == "reports")
        {
            out.push(path);
        }
    }
    Ok(())
}
