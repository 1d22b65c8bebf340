//! Command-line front end.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coherence::{sample_coherence, CoherenceOptions};
use crate::detect::{
    detect, DetectConfig, ReportDoc, DEFAULT_BOOTSTRAPS, DEFAULT_PFA, DEFAULT_SEED,
};
use crate::error::{Error, Result};
use crate::harness::{
    self, heatmap_of_map, render_heatmap, run_scenario, write_outputs, ScenarioConfig,
};
use crate::model::{presets, CorrelationProfile, PairMap};
use crate::oracle::{check_theorem1_with, OracleMixing};
use crate::rng::RngStream;
use crate::synth::{generate, read_dataset, write_dataset, GenConfig, MixingKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "corrmap",
    version,
    about = "Detect which signal components are correlated across which data sets"
)]
pub struct Cli {
    /// Master seed for every stochastic step [default: 20190417]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-set dataset
    Gen(GenArgs),
    /// Estimate the correlated dimension and correlation map of a dataset
    Detect(DetectArgs),
    /// Check a profile's population coherence spectrum against theory
    Oracle(OracleArgs),
    /// Run a Monte Carlo scenario
    Mc(McArgs),
    /// Render a correlation map or accuracy matrix as SVG
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    ThreeSet,
    FourSet,
    AllSets,
    Subsets,
    ThresholdSweep,
    Structure,
}

impl Preset {
    fn profile(self) -> CorrelationProfile {
        match self {
            Preset::ThreeSet => presets::three_set_example(),
            Preset::FourSet => presets::four_set_example(),
            Preset::AllSets => presets::all_sets_scenario(7),
            Preset::Subsets => presets::subset_scenario(7),
            Preset::ThresholdSweep => {
                presets::threshold_sweep_scenario(7, 0.7).expect("static profile")
            }
            Preset::Structure => presets::structure_scenario(),
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ProfileSource {
    /// Profile JSON: {"P", "n", "components": [{"index", "pairs": [[p, q, rho], ...]}]}
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Built-in profile
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
}

impl ProfileSource {
    fn load(&self) -> Result<CorrelationProfile> {
        match (&self.profile, self.preset) {
            (Some(path), _) => CorrelationProfile::load(path),
            (None, Some(p)) => Ok(p.profile()),
            (None, None) => Err(Error::invalid("no profile given")),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: ProfileSource,
    /// Per-component SNR in dB; `inf` for noise-free data
    #[arg(long, allow_hyphen_values = true)]
    pub snr: f64,
    /// Samples per data set (M)
    #[arg(long)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = MixingArg::Orthogonal)]
    pub mixing: MixingArg,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MixingArg {
    Orthogonal,
    Gaussian,
}

impl From<MixingArg> for MixingKind {
    fn from(m: MixingArg) -> Self {
        match m {
            MixingArg::Orthogonal => MixingKind::Orthogonal,
            MixingArg::Gaussian => MixingKind::Gaussian,
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Dataset directory (as written by `gen`)
    #[arg(long)]
    pub data: PathBuf,
    /// Bootstrap resamples
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAPS)]
    pub bootstraps: usize,
    /// Probability of false alarm
    #[arg(long, default_value_t = DEFAULT_PFA)]
    pub pfa: f64,
    /// Draw separate resamples for the structure test
    #[arg(long)]
    pub independent_resamples: bool,
    /// Remove per-set sample means before estimating covariances
    #[arg(long)]
    pub center: bool,
    /// Report JSON path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the sample coherence spectrum as CSV (rank,value)
    #[arg(long)]
    pub dump_spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: ProfileSource,
    /// Use seeded random orthogonal mixing instead of identity
    #[arg(long)]
    pub random_mixing: bool,
    /// Report JSON path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Scenario JSON
    #[arg(long, conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario: i, ii, iii, iv
    #[arg(long)]
    pub preset: Option<String>,
    /// Override trial count
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override bootstrap count
    #[arg(long)]
    pub bootstraps: Option<usize>,
    /// Full-scale run: 500 trials, 1000 bootstraps, SNR grid -10..14 dB
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "heat_source")]
pub struct HeatmapSource {
    /// Detection report JSON; renders its map
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Profile JSON; renders its ground-truth map
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Headerless CSV of values in [0, 1], one row per component
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub source: HeatmapSource,
    /// Number of data sets; required with --matrix
    #[arg(long = "sets")]
    pub p_sets: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
        Error::Csv(e) if e.is_io_error() => EXIT_IO,
        Error::Json(e) if e.is_io() => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, text + "\n")?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn run_gen(args: &GenArgs, seed: u64) -> Result<()> {
    let profile = args.source.load()?;
    log::info!("gen: seed {seed}");
    let cfg = GenConfig {
        mixing: args.mixing.into(),
        ..GenConfig::new(profile, args.snr, args.samples, seed)
    };
    let data = generate(&cfg, &RngStream::new(seed))?;
    write_dataset(&args.out, &data, Some(args.snr), Some(seed))?;
    Ok(())
}

fn run_detect(args: &DetectArgs, seed: u64) -> Result<()> {
    let (data, _) = read_dataset(&args.data)?;
    let cfg = DetectConfig {
        bootstraps: args.bootstraps,
        pfa: args.pfa,
        seed,
        shared_resamples: !args.independent_resamples,
        center: args.center,
        ..Default::default()
    };
    log::info!(
        "detect: seed {seed}, B = {}, pfa = {}",
        cfg.bootstraps,
        cfg.pfa
    );
    let report = detect(&data, &cfg)?;
    if let Some(path) = &args.dump_spectrum {
        let dec = sample_coherence(
            &data,
            &CoherenceOptions {
                center: args.center,
                ..Default::default()
            },
        )?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rank", "value"])?;
        for (k, v) in dec.eigenvalues().iter().enumerate() {
            w.write_record([(k + 1).to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    let doc: ReportDoc = report.to_doc();
    write_json(&doc, args.out.as_deref())
}

fn run_oracle(args: &OracleArgs, seed: u64) -> Result<()> {
    let profile = args.source.load()?;
    let mixing = if args.random_mixing {
        log::info!("oracle: random mixing seed {seed}");
        OracleMixing::RandomOrthogonal(seed)
    } else {
        OracleMixing::Identity
    };
    let report = check_theorem1_with(&profile, mixing)?;
    write_json(&report, args.out.as_deref())
}

fn run_mc(args: &McArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg = match (&args.scenario, &args.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(name)) => harness::scenarios::by_name(name)
            .ok_or_else(|| Error::invalid(format!("unknown scenario preset {name:?}")))?,
        (None, None) => return Err(Error::invalid("give --scenario or --preset")),
    };
    if args.full_scale {
        cfg = cfg.full_scale();
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(b) = args.bootstraps {
        cfg.detect.bootstraps = b;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    log::info!(
        "mc: seed {}, {} trials, B = {}",
        cfg.seed,
        cfg.trials,
        cfg.detect.bootstraps
    );
    let records = run_scenario(&cfg)?;
    write_outputs(&cfg, &records, &args.out_dir)?;
    Ok(())
}

fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let row = rec?
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad number {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn run_heatmap(args: &HeatmapArgs) -> Result<()> {
    let src = &args.source;
    let (cells, p_sets) = if let Some(path) = &src.report {
        let doc: ReportDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
        let map = PairMap::from_doc(&doc.map)?;
        (heatmap_of_map(&map), map.p_sets())
    } else if let Some(path) = &src.profile {
        let map = CorrelationProfile::load(path)?.ground_truth_map();
        (heatmap_of_map(&map), map.p_sets())
    } else if let Some(path) = &src.matrix {
        let p = args
            .p_sets
            .ok_or_else(|| Error::invalid("--sets is required with --matrix"))?;
        (read_matrix_csv(path)?, p)
    } else {
        return Err(Error::invalid("no heatmap source"));
    };
    fs::write(&args.out, render_heatmap(&cells, p_sets)?)?;
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Gen(a) => run_gen(a, seed),
        Command::Detect(a) => run_detect(a, seed),
        Command::Oracle(a) => run_oracle(a, seed),
        Command::Mc(a) => run_mc(a, cli.seed),
        Command::Heatmap(a) => run_heatmap(a),
    }
}

/// Parses `argv`, runs the command, and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
