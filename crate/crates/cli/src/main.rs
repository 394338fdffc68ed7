//! Command-line front end: run named scenarios reproducibly and emit
//! transcripts and attack reports.
//!
//! Exit status is 0 when the scenario's expected-outcome block holds, 1 on an
//! unexpected deviation, 2 on configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aqs_core::protocol::{CompareMode, MessageSpec, ProtocolKind};
use aqs_core::scenario::{list_scenarios, run_scenario, ScenarioConfig, ScenarioKind};

/// Environment variable naming the default report output directory.
const REPORT_DIR_ENV: &str = "AQS_REPORT_DIR";

#[derive(Parser)]
#[command(name = "aqs", about = "Arbitrated quantum signature protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and write its report.
    Run(RunArgs),
    /// List available scenarios, optionally filtered by substring.
    List {
        /// Substring filter; empty lists everything, unknown returns nothing.
        filter: Option<String>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat key=value config file; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name (see `aqs list`).
    #[arg(long)]
    scenario: Option<String>,
    /// Protocol: li_bell, zou, improved.
    #[arg(long)]
    protocol: Option<String>,
    /// Message length in qubits.
    #[arg(long)]
    n: Option<usize>,
    /// Run seed; identical configs give byte-identical reports.
    #[arg(long)]
    seed: Option<u64>,
    /// Comparison mode: exact or swap-test.
    #[arg(long = "compare-mode")]
    compare_mode: Option<String>,
    /// Swap-test trials per comparison (swap-test mode only).
    #[arg(long = "swap-trials")]
    swap_trials: Option<usize>,
    /// Report output path; defaults to $AQS_REPORT_DIR or the working
    /// directory with an auto-generated name.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default)]
struct FileConfig {
    scenario: Option<String>,
    protocol: Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    compare_mode: Option<String>,
    swap_trials: Option<usize>,
    out: Option<PathBuf>,
    message: Option<String>,
}

/// `random`, or per-qubit amplitudes `a_re,a_im,b_re,b_im` joined by `;`.
fn parse_message_spec(value: &str) -> Result<MessageSpec, String> {
    if value == "random" {
        return Ok(MessageSpec::Random);
    }
    let mut amps = Vec::new();
    for (i, qubit) in value.split(';').enumerate() {
        let parts: Vec<&str> = qubit.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!(
                "message qubit {i}: expected a_re,a_im,b_re,b_im, got {qubit:?}"
            ));
        }
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
        let nums = nums.map_err(|e| format!("message qubit {i}: {e}"))?;
        amps.push((
            num_complex::Complex64::new(nums[0], nums[1]),
            num_complex::Complex64::new(nums[2], nums[3]),
        ));
    }
    Ok(MessageSpec::Explicit(amps))
}

fn parse_config_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "{}:{}: expected key = value, got {raw:?}",
                path.display(),
                lineno + 1
            ));
        };
        let key = key.trim();
        let value = value.trim().to_string();
        let bad_num = |e| format!("{}:{}: bad number: {e}", path.display(), lineno + 1);
        match key {
            "scenario" => cfg.scenario = Some(value),
            "protocol" => cfg.protocol = Some(value),
            "n" => cfg.n = Some(value.parse().map_err(bad_num)?),
            "seed" => cfg.seed = Some(value.parse().map_err(bad_num)?),
            "compare_mode" | "compare-mode" => cfg.compare_mode = Some(value),
            "swap_trials" | "swap-trials" => cfg.swap_trials = Some(value.parse().map_err(bad_num)?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "message" => cfg.message = Some(value),
            other => {
                return Err(format!(
                    "{}:{}: unknown config key {other:?}",
                    path.display(),
                    lineno + 1
                ))
            }
        }
    }
    Ok(cfg)
}

fn build_scenario_config(args: &RunArgs) -> Result<(ScenarioConfig, PathBuf), String> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => FileConfig::default(),
    };

    let scenario_name = args
        .scenario
        .clone()
        .or(file.scenario)
        .unwrap_or_else(|| "honest".to_string());
    let protocol_name = args
        .protocol
        .clone()
        .or(file.protocol)
        .unwrap_or_else(|| "zou".to_string());
    let n = args.n.or(file.n).unwrap_or(4);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let compare_name = args
        .compare_mode
        .clone()
        .or(file.compare_mode)
        .unwrap_or_else(|| "exact".to_string());
    let swap_trials = args.swap_trials.or(file.swap_trials).unwrap_or(16);

    let scenario = ScenarioKind::parse(&scenario_name).map_err(|e| e.to_string())?;
    let protocol = ProtocolKind::parse(&protocol_name).map_err(|e| e.to_string())?;
    let compare = match compare_name.as_str() {
        "exact" => CompareMode::Exact,
        "swap-test" | "swap_test" => CompareMode::SwapTest { trials: swap_trials },
        other => return Err(format!("unknown compare mode {other:?}")),
    };
    if n == 0 {
        return Err("n must be at least 1".to_string());
    }

    let mut cfg = ScenarioConfig::new(scenario, protocol, n, seed);
    cfg.compare = compare;
    if let Some(spec) = &file.message {
        cfg.message = parse_message_spec(spec)?;
    }

    let out = match args.out.clone().or(file.out) {
        Some(path) => path,
        None => {
            let dir = std::env::var_os(REPORT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{scenario}_{protocol}_n{n}_seed{seed}.report.txt"))
        }
    };
    Ok((cfg, out))
}

fn cmd_run(args: &RunArgs) -> ExitCode {
    let (cfg, out_path) = match build_scenario_config(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(parent) {
                eprintln!("error: cannot create {}: {e}", parent.display());
                return ExitCode::from(2);
            }
        }
    }
    if let Err(e) = std::fs::write(&out_path, &result.report) {
        eprintln!("error: cannot write {}: {e}", out_path.display());
        return ExitCode::from(2);
    }
    println!("{}", result.summary);
    if result.expected_met {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected outcome; see {}", out_path.display());
        ExitCode::from(1)
    }
}

fn cmd_list(filter: Option<&str>) -> ExitCode {
    for (name, description) in list_scenarios(filter.unwrap_or("")) {
        println!("{name} - {description}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::List { filter } => cmd_list(filter.as_deref()),
    }
}
