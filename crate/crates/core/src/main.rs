use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mimo_dca::analytic::{timeshare_sum_rate, training_dof, AntennaLimit, TimeShareMode};
use mimo_dca::config::RunConfig;
use mimo_dca::engine::{run_simulation, sweep, AdmissionControl, RunSummary};
use mimo_dca::output::{fmt_num, frames_csv, queues_csv, summary_text, write_atomic};
use mimo_dca::{Result, SimError};

#[derive(Parser)]
#[command(
    name = "mimo-dca",
    version,
    about = "MU-MIMO downlink scheduling with CSIT acquisition overhead"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `system.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value` override, e.g. `--set policy.kind=qqs`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write frames.csv, queues.csv and summary.txt.
    Simulate(RunArgs),
    /// Estimate the policy's sum capacity with admission control.
    Capacity {
        #[command(flatten)]
        run: RunArgs,
        /// Admission threshold V in bits.
        #[arg(long)]
        threshold: Option<f64>,
        /// Bits W_max granted per frame to queues below the threshold.
        #[arg(long)]
        grant: Option<f64>,
    },
    /// Closed-form calculators.
    Analytic {
        #[command(subcommand)]
        which: AnalyticCmd,
    },
    /// Run one simulation per value of a config axis and write sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// antennas, snr_db, horizon_slots, period, theta, groups, t_stc, k_random, threshold or grant.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum AnalyticCmd {
    /// Pilot-discounted degrees of freedom.
    Dof {
        #[arg(long)]
        tc: f64,
        #[arg(long)]
        ns: u32,
        #[arg(long, conflicts_with = "unbounded_m")]
        antennas: Option<usize>,
        #[arg(long)]
        unbounded_m: bool,
    },
    /// Sum rate of a time-sharing schedule with unit user rates.
    Timeshare {
        /// `FRACTION:T1,T2,...`; `TxCOUNT` repeats a block length, e.g. `0.8:50x39`.
        #[arg(long = "mode", required = true)]
        modes: Vec<String>,
    },
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| SimError::config(args.config.display().to_string(), e.to_string()))?;
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("system.seed={seed}"));
    }
    let mut cfg = RunConfig::from_toml_with_overrides(&text, &overrides)?;
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    Ok(dir)
}

fn simulate_and_write(cfg: &RunConfig) -> Result<RunSummary> {
    let run = run_simulation(cfg)?;
    let dir = out_dir(cfg)?;
    write_atomic(&dir.join("frames.csv"), &frames_csv(&run.frames))?;
    write_atomic(&dir.join("queues.csv"), &queues_csv(&run.slots))?;
    let summary = summary_text(cfg.policy.kind.name(), &run.summary);
    write_atomic(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(run.summary)
}

fn cmd_capacity(args: &RunArgs, threshold: Option<f64>, grant: Option<f64>) -> Result<()> {
    let mut cfg = load(args)?;
    let base = cfg.admission.or_else(|| AdmissionControl::default_for(&cfg.users));
    let threshold = threshold
        .or(base.map(|a| a.threshold))
        .ok_or_else(|| SimError::config("admission.threshold", "cannot derive a default; pass --threshold"))?;
    let grant = grant.or(base.map(|a| a.grant)).unwrap_or(threshold);
    cfg.admission = Some(AdmissionControl::new(threshold, grant)?);
    let summary = simulate_and_write(&cfg)?;
    println!("A_avg={}", fmt_num(summary.admitted_rate.unwrap_or(0.0)));
    Ok(())
}

fn cmd_sweep(args: &RunArgs, axis: &str, values: &[f64]) -> Result<()> {
    let cfg = load(args)?;
    let rows = sweep(&cfg, axis, values)?;
    let mut text = String::from("value,seed,sum_rate,admitted_rate,stability_slope,mean_delay");
    for u in 1..=cfg.num_users() {
        text.push_str(&format!(",delay_{u}"));
    }
    text.push('\n');
    for r in &rows {
        let s = &r.summary;
        text.push_str(&format!(
            "{},{},{},{},{},{}",
            fmt_num(r.value),
            r.seed,
            fmt_num(s.sum_rate),
            s.admitted_rate.map(fmt_num).unwrap_or_default(),
            fmt_num(s.stability_slope),
            fmt_num(s.mean_delay()),
        ));
        for d in &s.time_avg_delay {
            text.push_str(&format!(",{}", fmt_num(*d)));
        }
        text.push('\n');
    }
    let dir = out_dir(&cfg)?;
    write_atomic(&dir.join("sweep.csv"), &text)?;
    print!("{text}");
    Ok(())
}

/// Parses `FRACTION:T1,T2xCOUNT,...`.
fn parse_mode(spec: &str) -> Result<TimeShareMode> {
    let bad = |why: &str| SimError::config("mode", format!("`{spec}`: {why}"));
    let (fraction, list) = spec.split_once(':').ok_or_else(|| bad("expected FRACTION:T1,T2,..."))?;
    let fraction: f64 = fraction.trim().parse().map_err(|_| bad("fraction is not a number"))?;
    let mut coherence = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (t, count) = item.split_once('x').unwrap_or((item, "1"));
        let t: f64 = t.parse().map_err(|_| bad("block length is not a number"))?;
        let count: usize = count.parse().map_err(|_| bad("repeat count is not an integer"))?;
        coherence.extend(std::iter::repeat_n(t, count));
    }
    TimeShareMode::new(coherence, fraction).map_err(|e| bad(&e.to_string()))
}

fn cmd_analytic(which: &AnalyticCmd) -> Result<()> {
    let value = match which {
        AnalyticCmd::Dof {
            tc,
            ns,
            antennas,
            unbounded_m,
        } => {
            let limit = match (antennas, unbounded_m) {
                (Some(m), false) => AntennaLimit::Bounded(*m),
                (None, true) => AntennaLimit::Unbounded,
                _ => return Err(SimError::config("antennas", "pass --antennas M or --unbounded-m")),
            };
            training_dof(*tc, *ns, limit)?
        }
        AnalyticCmd::Timeshare { modes } => {
            let modes = modes.iter().map(|m| parse_mode(m)).collect::<Result<Vec<_>>>()?;
            timeshare_sum_rate(&modes)?
        }
    };
    println!("{}", fmt_num(value));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(args) => simulate_and_write(&load(args)?).map(|_| ()),
        Command::Capacity { run, threshold, grant } => cmd_capacity(run, *threshold, *grant),
        Command::Analytic { which } => cmd_analytic(which),
        Command::Sweep { run, axis, values } => cmd_sweep(run, axis, values),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
