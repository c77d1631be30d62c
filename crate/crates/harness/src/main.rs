use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ramsey_device::{DeviceParams, ShotMode};
use ramsey_harness::{
    emit_fringes, emit_results, run_scenario, run_tomo_demo, HarnessError, OutputFormat, Result,
    Scenario, ScenarioKind,
};

/// Ramsey interferometer with a which-path detector: sweep runner.
#[derive(Parser)]
#[command(name = "ramsey", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Device configuration document (key = value; see README).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Base seed for all sampling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Shots per measured point, or `exact` for the infinite-shot limit.
    #[arg(long, default_value = "100000")]
    shots: String,
    /// Number of interferometer phases per fringe (uniform over one period).
    #[arg(long, default_value_t = 21)]
    theta_points: usize,
    /// Write per-theta fringe samples (P0 and P1) to this CSV path.
    #[arg(long)]
    fringes_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic-engine sweep over conditional phases at fixed input coherence.
    IdealSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Input coherence of the interfering qubit.
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
        /// Comma-separated conditional phases in radians.
        #[arg(long, default_value = "0.7853981633974483,1.5707963267948966,2.356194490192345,3.141592653589793")]
        betas: String,
    },
    /// Pulse-level sweep over conditional phases.
    BetaSweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0.7853981633974483,1.5707963267948966,2.356194490192345,3.141592653589793")]
        betas: String,
        /// Decoherence on or off.
        #[arg(long, default_value = "on")]
        noise: String,
    },
    /// Pulse-level sweep over detector-preparation delays at fixed phase.
    DelaySweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Conditional phase in radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        beta: f64,
        /// Comma-separated delays in microseconds.
        #[arg(long, default_value = "0,0.5,1,1.5,2")]
        delays_us: String,
        #[arg(long, default_value = "on")]
        noise: String,
    },
    /// Tomography demonstration: reconstruct the entangled two-qubit state
    /// and report reconstruction quality.
    TomoDemo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        beta: f64,
        #[arg(long, default_value = "on")]
        noise: String,
        /// Write the raw measurement record (line-oriented text) here.
        #[arg(long)]
        record_out: Option<PathBuf>,
    },
}

fn parse_shots(s: &str) -> Result<ShotMode> {
    if s == "exact" {
        return Ok(ShotMode::Exact);
    }
    let n: u64 = s
        .parse()
        .map_err(|_| HarnessError::Config(format!("--shots expects an integer or `exact`, got `{s}`")))?;
    if n == 0 {
        return Err(HarnessError::Config("--shots must be at least 1".into()));
    }
    Ok(ShotMode::Counts(n))
}

fn parse_noise(s: &str) -> Result<bool> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(HarnessError::Config(format!(
            "--noise expects on or off, got `{other}`"
        ))),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("bad {what} entry `{x}`")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(HarnessError::Config(format!("empty {what} list")));
    }
    Ok(values)
}

fn load_device(config: &Option<PathBuf>) -> Result<DeviceParams> {
    match config {
        None => Ok(DeviceParams::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(DeviceParams::from_config_str(&text)?)
        }
    }
}

fn write_or_print(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::IdealSweep { common, c0, betas } => {
            let scenario = Scenario {
                kind: ScenarioKind::IdealSweep { c0, betas: parse_list(&betas, "beta")? },
                theta_points: common.theta_points,
                noise: false,
                shots: ShotMode::Exact,
                seed: common.seed,
                device: load_device(&common.config)?,
            };
            let (rows, traces) = run_scenario(&scenario)?;
            let format: OutputFormat = common.format.parse()?;
            write_or_print(&common.out, &emit_results(&rows, format)?)?;
            if let Some(path) = &common.fringes_out {
                std::fs::write(path, emit_fringes(&traces)?)?;
            }
            Ok(())
        }
        Command::BetaSweep { common, betas, noise } => {
            let scenario = Scenario {
                kind: ScenarioKind::BetaSweep { betas: parse_list(&betas, "beta")? },
                theta_points: common.theta_points,
                noise: parse_noise(&noise)?,
                shots: parse_shots(&common.shots)?,
                seed: common.seed,
                device: load_device(&common.config)?,
            };
            let (rows, traces) = run_scenario(&scenario)?;
            let format: OutputFormat = common.format.parse()?;
            write_or_print(&common.out, &emit_results(&rows, format)?)?;
            if let Some(path) = &common.fringes_out {
                std::fs::write(path, emit_fringes(&traces)?)?;
            }
            Ok(())
        }
        Command::DelaySweep { common, beta, delays_us, noise } => {
            let delays: Vec<f64> =
                parse_list(&delays_us, "delay")?.into_iter().map(|d| d * 1e-6).collect();
            let scenario = Scenario {
                kind: ScenarioKind::DelaySweep { beta, delays },
                theta_points: common.theta_points,
                noise: parse_noise(&noise)?,
                shots: parse_shots(&common.shots)?,
                seed: common.seed,
                device: load_device(&common.config)?,
            };
            let (rows, traces) = run_scenario(&scenario)?;
            let format: OutputFormat = common.format.parse()?;
            write_or_print(&common.out, &emit_results(&rows, format)?)?;
            if let Some(path) = &common.fringes_out {
                std::fs::write(path, emit_fringes(&traces)?)?;
            }
            Ok(())
        }
        Command::TomoDemo { common, beta, noise, record_out } => {
            let scenario = Scenario {
                kind: ScenarioKind::BetaSweep { betas: vec![beta] },
                theta_points: common.theta_points,
                noise: parse_noise(&noise)?,
                shots: parse_shots(&common.shots)?,
                seed: common.seed,
                device: load_device(&common.config)?,
            };
            let demo = run_tomo_demo(&scenario, beta)?;
            let mut out = String::new();
            out.push_str("schema_version = 1\n");
            out.push_str(&format!("beta = {:.12}\n", demo.beta));
            out.push_str(&format!("concurrence_true = {:.12}\n", demo.concurrence_true));
            out.push_str(&format!(
                "concurrence_reconstructed = {:.12}\n",
                demo.concurrence_reconstructed
            ));
            out.push_str(&format!("fidelity = {:.12}\n", demo.fidelity));
            out.push_str(&format!("trace_distance = {:.12}\n", demo.trace_distance));
            out.push_str(&format!("mean_leakage = {:.3e}\n", demo.mean_leakage));
            write_or_print(&common.out, &out)?;
            if let Some(path) = record_out {
                match &demo.record_text {
                    Some(text) => std::fs::write(path, text)?,
                    None => {
                        return Err(HarnessError::Config(
                            "--record-out requires finite shots (not `exact`)".into(),
                        ))
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
