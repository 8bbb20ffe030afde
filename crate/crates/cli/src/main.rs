//! Command-line front end for the beam scheduling simulator.
//!
//! Subcommands:
//!   run                single operating point, all requested algorithms
//!   sweep              vary snr_db / bits / rf_chains over a value list
//!   validate-analysis  closed-form vs Monte Carlo comparison table
//!   sweep-params       grid search over one scheduler knob (ε / N_OL / d_th)
//!
//! Configuration precedence, lowest to highest: built-in defaults,
//! --full-scale preset, --config file, individual CLI flags.

use beamsched::harness::report::{rate_csv, validation_csv, write_text, RunManifest, Versions};
use beamsched::harness::{
    self, RateReport, SchedulerParam, SweepAxis, ValidationTable,
};
use beamsched::{AdcBits, Algorithm, CombinerPolicy, Error, Scenario, SystemConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "beamsched",
    version,
    about = "Monte Carlo harness for user scheduling under hybrid combining and low-resolution ADCs",
    after_help = "Trials run in parallel on all cores; set RAYON_NUM_THREADS to restrict the pool.\n\
                  Config files are TOML with the same keys as the CLI flags (snake_case)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every requested algorithm at a single operating point.
    Run(CommonArgs),
    /// Sweep one system axis over a list of values.
    Sweep(SweepArgs),
    /// Compare the closed-form sum-rate expressions against Monte Carlo.
    ValidateAnalysis(ValidateArgs),
    /// Grid search over one scheduler parameter.
    SweepParams(SweepParamsArgs),
}

/// Flags shared by every subcommand: the config file, per-field overrides,
/// and output destinations. Every `SystemConfig` field can be set here by
/// its own name.
#[derive(Args)]
struct CommonArgs {
    /// TOML config file; keys mirror SystemConfig field names.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Preset for the large reference operating point
    /// (antennas=128, rf_chains=40, candidates=200, scheduled=12) with
    /// trials reduced to 100 unless --trials is given.
    #[arg(long)]
    full_scale: bool,

    /// Number of base-station antennas M.
    #[arg(long)]
    antennas: Option<usize>,

    /// Number of RF chains N (1..=antennas).
    #[arg(long, alias = "rf_chains")]
    rf_chains: Option<usize>,

    /// Number of candidate users K.
    #[arg(long)]
    candidates: Option<usize>,

    /// Number of users to schedule S (1..=rf_chains).
    #[arg(long)]
    scheduled: Option<usize>,

    /// Transmit SNR in dB.
    #[arg(long, alias = "snr_db", allow_negative_numbers = true)]
    snr_db: Option<f64>,

    /// Mean number of channel paths per user (Poisson, floored at 1).
    #[arg(long, alias = "mean_paths")]
    mean_paths: Option<f64>,

    /// ADC resolution in bits (1..=16) or "inf" for ideal converters.
    #[arg(long)]
    bits: Option<AdcBits>,

    /// Angle scenario: aligned (on-grid) or arbitrary.
    #[arg(long)]
    scenario: Option<Scenario>,

    /// Analog combiner policy: full-dft, strongest-beams, or fixed-indices.
    #[arg(long)]
    combiner: Option<CombinerPolicy>,

    /// Beam indices for the fixed-indices combiner, comma separated.
    #[arg(long, alias = "combiner_indices", value_delimiter = ',')]
    combiner_indices: Option<Vec<usize>>,

    /// Base RNG seed; fully determines every random draw.
    #[arg(long)]
    seed: Option<u64>,

    /// Correlation threshold ε for the iterative beam scheduler.
    #[arg(long, alias = "css_eps")]
    css_eps: Option<f64>,

    /// Maximum shared dominant beams N_OL for beam-overlap filters.
    #[arg(long, alias = "css_n_ol")]
    css_n_ol: Option<usize>,

    /// Dominant beams per user for overlap filters; 0 = per-user path count.
    #[arg(long, alias = "css_n_b")]
    css_n_b: Option<usize>,

    /// Chordal-distance threshold d_th in [0, 1].
    #[arg(long, alias = "chordal_d_th")]
    chordal_d_th: Option<f64>,

    /// Orthogonality threshold for the semi-orthogonal baseline.
    #[arg(long, alias = "sus_eps")]
    sus_eps: Option<f64>,

    /// Monte Carlo trials (default 500; 100 under --full-scale;
    /// 10000 for validate-analysis).
    #[arg(long)]
    trials: Option<usize>,

    /// Algorithms to run, comma separated:
    /// css,greedy,chordal,sus,mbas,random.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,

    /// Write results as CSV to this path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write a JSON run manifest to this path.
    #[arg(long, value_name = "PATH")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Axis to vary.
    #[arg(long, value_enum)]
    axis: AxisArg,

    /// Axis values, comma separated (bits and rf_chains must be integers).
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    values: Vec<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// ADC resolutions to tabulate, comma separated; "inf" allowed.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,inf")]
    bits_list: Vec<AdcBits>,
}

#[derive(Args)]
struct SweepParamsArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Scheduler knob to grid-search.
    #[arg(long, value_enum)]
    param: ParamArg,

    /// Knob values, comma separated (css_n_ol must be integers).
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    #[value(name = "snr_db")]
    SnrDb,
    #[value(name = "bits")]
    Bits,
    #[value(name = "rf_chains")]
    RfChains,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::SnrDb => SweepAxis::SnrDb,
            AxisArg::Bits => SweepAxis::Bits,
            AxisArg::RfChains => SweepAxis::RfChains,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    #[value(name = "css_eps")]
    CssEps,
    #[value(name = "css_n_ol")]
    CssNOl,
    #[value(name = "chordal_d_th")]
    ChordalDTh,
}

impl From<ParamArg> for SchedulerParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::CssEps => SchedulerParam::CssEps,
            ParamArg::CssNOl => SchedulerParam::CssNOl,
            ParamArg::ChordalDTh => SchedulerParam::ChordalDTh,
        }
    }
}

/// Config-file schema: every field optional, unknown keys rejected so typos
/// fail loudly instead of silently keeping a default.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    antennas: Option<usize>,
    rf_chains: Option<usize>,
    candidates: Option<usize>,
    scheduled: Option<usize>,
    snr_db: Option<f64>,
    mean_paths: Option<f64>,
    bits: Option<AdcBits>,
    scenario: Option<Scenario>,
    combiner: Option<CombinerPolicy>,
    combiner_indices: Option<Vec<usize>>,
    seed: Option<u64>,
    css_eps: Option<f64>,
    css_n_ol: Option<usize>,
    css_n_b: Option<usize>,
    chordal_d_th: Option<f64>,
    sus_eps: Option<f64>,
}

impl PartialConfig {
    fn apply(&self, cfg: &mut SystemConfig) {
        if let Some(v) = self.antennas {
            cfg.antennas = v;
        }
        if let Some(v) = self.rf_chains {
            cfg.rf_chains = v;
        }
        if let Some(v) = self.candidates {
            cfg.candidates = v;
        }
        if let Some(v) = self.scheduled {
            cfg.scheduled = v;
        }
        if let Some(v) = self.snr_db {
            cfg.snr_db = v;
        }
        if let Some(v) = self.mean_paths {
            cfg.mean_paths = v;
        }
        if let Some(v) = self.bits {
            cfg.bits = v;
        }
        if let Some(v) = self.scenario {
            cfg.scenario = v;
        }
        if let Some(v) = self.combiner {
            cfg.combiner = v;
        }
        if let Some(v) = &self.combiner_indices {
            cfg.combiner_indices = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.css_eps {
            cfg.css_eps = v;
        }
        if let Some(v) = self.css_n_ol {
            cfg.css_n_ol = v;
        }
        if let Some(v) = self.css_n_b {
            cfg.css_n_b = if v == 0 { None } else { Some(v) };
        }
        if let Some(v) = self.chordal_d_th {
            cfg.chordal_d_th = v;
        }
        if let Some(v) = self.sus_eps {
            cfg.sus_eps = v;
        }
    }
}

fn overrides_from_flags(args: &CommonArgs) -> PartialConfig {
    PartialConfig {
        antennas: args.antennas,
        rf_chains: args.rf_chains,
        candidates: args.candidates,
        scheduled: args.scheduled,
        snr_db: args.snr_db,
        mean_paths: args.mean_paths,
        bits: args.bits,
        scenario: args.scenario,
        combiner: args.combiner,
        combiner_indices: args.combiner_indices.clone(),
        seed: args.seed,
        css_eps: args.css_eps,
        css_n_ol: args.css_n_ol,
        css_n_b: args.css_n_b,
        chordal_d_th: args.chordal_d_th,
        sus_eps: args.sus_eps,
    }
}

fn build_config(args: &CommonArgs) -> beamsched::Result<SystemConfig> {
    let mut cfg = SystemConfig::default();
    if args.full_scale {
        cfg.antennas = 128;
        cfg.rf_chains = 40;
        cfg.candidates = 200;
        cfg.scheduled = 12;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let partial: PartialConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
        partial.apply(&mut cfg);
    }
    overrides_from_flags(args).apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn trials_for(args: &CommonArgs, validate: bool) -> usize {
    args.trials.unwrap_or(if validate {
        10_000
    } else if args.full_scale {
        100
    } else {
        500
    })
}

fn algorithms_for(args: &CommonArgs, default: &[Algorithm]) -> beamsched::Result<Vec<Algorithm>> {
    let list = match &args.algorithms {
        Some(list) => list.clone(),
        None => default.to_vec(),
    };
    if list.is_empty() {
        return Err(Error::Config("at least one algorithm is required".into()));
    }
    Ok(list)
}

fn print_rate_report(report: &RateReport) {
    println!(
        "{:>12}  {:>8}  {:>14}  {:>12}  {:>7}  {:>7}",
        report.axis, "algo", "mean_sum_rate", "std_err", "trials", "invalid"
    );
    for point in &report.points {
        for s in &point.stats {
            println!(
                "{:>12.4}  {:>8}  {:>14.6}  {:>12.6}  {:>7}  {:>7}",
                point.axis_value,
                s.algorithm.name(),
                s.mean_sum_rate,
                s.std_err,
                s.trials,
                s.invalid_trials
            );
        }
    }
    println!("wall time: {:.2}s", report.wall_time_secs);
}

fn print_validation_table(table: &ValidationTable) {
    println!(
        "{:>9}  {:>4}  {:>10}  {:>12}  {:>12}  {:>10}  {:>9}  {:>7}  {:>7}",
        "scenario", "bits", "rho", "closed_form", "mc_mean", "mc_se", "rel_gap", "trials", "invalid"
    );
    for r in &table.rows {
        println!(
            "{:>9}  {:>4}  {:>10.4}  {:>12.6}  {:>12.6}  {:>10.6}  {:>9.5}  {:>7}  {:>7}",
            r.scenario.to_string(),
            r.bits.to_string(),
            r.rho,
            r.closed_form,
            r.mc_mean,
            r.mc_std_err,
            r.rel_gap,
            r.trials,
            r.invalid_trials
        );
    }
    println!("wall time: {:.2}s", table.wall_time_secs);
}

fn write_outputs(
    args: &CommonArgs,
    csv: String,
    manifest: RunManifest,
) -> beamsched::Result<()> {
    if let Some(path) = &args.out {
        write_text(path, &csv)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.manifest {
        write_text(path, &manifest.to_json()?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_run(args: &CommonArgs) -> beamsched::Result<()> {
    let cfg = build_config(args)?;
    let algorithms = algorithms_for(args, &Algorithm::ALL)?;
    let trials = trials_for(args, false);
    let report = harness::run_experiment(&cfg, &algorithms, trials)?;
    print_rate_report(&report);
    write_outputs(args, rate_csv(&report), RunManifest::new("run", &report, &algorithms))
}

fn cmd_sweep(args: &SweepArgs) -> beamsched::Result<()> {
    let cfg = build_config(&args.common)?;
    let algorithms = algorithms_for(&args.common, &Algorithm::ALL)?;
    let trials = trials_for(&args.common, false);
    let axis = SweepAxis::from(args.axis);
    let report = harness::sweep(&cfg, axis, &args.values, &algorithms, trials)?;
    print_rate_report(&report);
    write_outputs(&args.common, rate_csv(&report), RunManifest::new("sweep", &report, &algorithms))
}

fn cmd_sweep_params(args: &SweepParamsArgs) -> beamsched::Result<()> {
    let cfg = build_config(&args.common)?;
    let param = SchedulerParam::from(args.param);
    let algorithms = algorithms_for(&args.common, &[param.algorithm()])?;
    let trials = trials_for(&args.common, false);
    let report = harness::sweep_scheduler_param(&cfg, param, &args.values, &algorithms, trials)?;
    print_rate_report(&report);
    write_outputs(
        &args.common,
        rate_csv(&report),
        RunManifest::new("sweep-params", &report, &algorithms),
    )
}

fn cmd_validate(args: &ValidateArgs) -> beamsched::Result<()> {
    let cfg = build_config(&args.common)?;
    let trials = trials_for(&args.common, true);
    let table = harness::validate_closed_forms(&cfg, &args.bits_list, trials)?;
    print_validation_table(&table);
    let manifest = RunManifest {
        command: "validate-analysis".into(),
        config: table.config.clone(),
        algorithms: vec![Algorithm::Chordal.to_string()],
        axis: "bits".into(),
        axis_values: args.bits_list.iter().map(|b| b.to_string()).collect(),
        trials,
        wall_time_secs: table.wall_time_secs,
        versions: Versions::current(),
        notes: Vec::new(),
    };
    write_outputs(&args.common, validation_csv(&table), manifest)
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ValidateAnalysis(args) => cmd_validate(args),
        Command::SweepParams(args) => cmd_sweep_params(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
