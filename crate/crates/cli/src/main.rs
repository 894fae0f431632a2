use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pas_core::experiment::{
    run_calibration, run_experiment, write_csv, write_histograms, CalibrationOptions, ChannelModel, ExperimentSpec,
    FormatSpec, RunOptions, Scale, Shaping,
};
use pas_core::par::Execution;
use pas_core::pas_codec::{Mode, QamOrder};

#[derive(Parser)]
#[command(name = "pas-sim", version, about = "Short-block probabilistic shaping over a simulated WDM fiber link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a block-length sweep and write the CSV report.
    Run(Box<RunArgs>),
    /// Run the analytic-limit checks of the channel and receiver.
    Calibrate(CalibrateArgs),
    /// Print the configuration of a preset as TOML.
    DefaultConfig {
        #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
        scale: ScaleArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Fiber,
    Linear,
    Awgn,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    #[value(name = "64qam")]
    Shaped64,
    #[value(name = "16qam")]
    Shaped16,
    #[value(name = "64qam-uniform")]
    Uniform64,
    #[value(name = "16qam-uniform")]
    Uniform16,
}

impl From<FormatArg> for FormatSpec {
    fn from(f: FormatArg) -> Self {
        let (qam, shaping) = match f {
            FormatArg::Shaped64 => (QamOrder::Qam64, Shaping::Shaped),
            FormatArg::Shaped16 => (QamOrder::Qam16, Shaping::Shaped),
            FormatArg::Uniform64 => (QamOrder::Qam64, Shaping::Uniform),
            FormatArg::Uniform16 => (QamOrder::Qam16, Shaping::Uniform),
        };
        FormatSpec { qam, shaping }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with ExperimentSpec fields; missing keys come from --scale.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
    /// end_to_end, end_to_end_interleaved or emulation; comma separated.
    #[arg(long, value_delimiter = ',')]
    mode: Vec<Mode>,
    /// CCDM block lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_enum)]
    format: Vec<FormatArg>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    symbols: Option<usize>,
    #[arg(long)]
    power_dbm: Option<f64>,
    #[arg(long, value_enum)]
    channel: Option<ChannelArg>,
    /// SNR of the AWGN reference channel.
    #[arg(long, default_value_t = 14.0)]
    snr_db: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the center channel's transmitted and received symbols per cell.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    /// Run cells one after another instead of on the rayon pool.
    #[arg(long)]
    sequential: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Include the 100 m vs 50 m step-halving check (slow).
    #[arg(long)]
    step_convergence: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    sequential: bool,
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn resolve(args: &RunArgs) -> Result<ExperimentSpec, Box<dyn std::error::Error>> {
    let base = ExperimentSpec::at_scale(args.scale.into());
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentSpec::from_toml_over(&text, &base).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => base,
    };
    if !args.mode.is_empty() {
        spec.modes = args.mode.clone();
    }
    if !args.n.is_empty() {
        spec.n_list = args.n.clone();
    }
    if !args.format.is_empty() {
        spec.formats = args.format.iter().map(|&f| f.into()).collect();
    }
    if let Some(r) = args.runs {
        spec.runs = r;
    }
    if let Some(s) = args.seed {
        spec.master_seed = s;
    }
    if let Some(s) = args.symbols {
        spec.symbols_per_polarization = s;
    }
    if let Some(p) = args.power_dbm {
        spec.wdm.per_channel_power_dbm = p;
    }
    match args.channel {
        Some(ChannelArg::Fiber) => spec.channel = ChannelModel::Fiber,
        Some(ChannelArg::Linear) => spec.channel = ChannelModel::Linear,
        Some(ChannelArg::Awgn) => spec.channel = ChannelModel::Awgn { snr_db: args.snr_db },
        None => {}
    }
    if let Some(o) = &args.out {
        spec.output = o.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn histogram_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    out.with_file_name(format!("{stem}.histograms.csv"))
}

fn run(args: RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let spec = resolve(&args)?;
    if args.dry_run {
        print!("{}", spec.to_toml());
        return Ok(());
    }
    let cells = spec.modes.len() * spec.formats.len() * spec.n_list.len() * spec.runs;
    eprintln!("{cells} cells, {} channels, {} symbols/pol", spec.wdm.channel_count, spec.symbols_per_polarization);
    let start = Instant::now();
    let options = RunOptions { execution: execution(args.sequential), dump_dir: args.dump_dir.clone() };
    let report = run_experiment(&spec, &options)?;

    let csv = File::create(&spec.output).map_err(|e| format!("{}: {e}", spec.output.display()))?;
    write_csv(&report, BufWriter::new(csv))?;
    let hist_path = histogram_path(&spec.output);
    let hist = File::create(&hist_path).map_err(|e| format!("{}: {e}", hist_path.display()))?;
    write_histograms(&report, BufWriter::new(hist))?;

    let mut err = io::stderr().lock();
    writeln!(err, "{:<24} {:<14} {:>5} {:>9} {:>9} {:>9}", "mode", "qam", "n", "snr_db", "air_b4d", "rl_b4d")?;
    for g in &report.groups {
        writeln!(
            err,
            "{:<24} {:<14} {:>5} {:>9.3} {:>9.3} {:>9.3}",
            g.mode.name(),
            g.format.label(),
            g.n,
            g.report.snr_db,
            g.report.air_b4d,
            g.report.rate_loss_b4d
        )?;
    }
    writeln!(err, "wrote {} and {} in {:.1?}", spec.output.display(), hist_path.display(), start.elapsed())?;
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> Result<bool, Box<dyn std::error::Error>> {
    let options = CalibrationOptions {
        execution: execution(args.sequential),
        step_convergence: args.step_convergence,
        seed: args.seed,
    };
    let report = run_calibration(&options)?;
    print!("{report}");
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args).map(|_| true),
        Command::Calibrate(args) => calibrate(args),
        Command::DefaultConfig { scale } => {
            print!("{}", ExperimentSpec::at_scale(scale.into()).to_toml());
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
