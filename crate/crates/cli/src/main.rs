//! `srb-sim`: scenario runner, metrics, plot extraction and the
//! verification battery for the ergonomics-driven virtual-fixture
//! controller.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use srb_core::sim::{
    compute_metrics, emit_plot_data, load_scenario, read_trace, run_scenario, write_trace,
};
use srb_core::verify;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "srb-sim",
    version,
    about = "Closed-loop scenario runner and verification battery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the per-tick trace CSV.
    Run {
        /// Scenario description (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Output trace path.
        #[arg(long)]
        out: PathBuf,
        /// Force the baseline condition: the controller ignores posture
        /// and provides no kinesthetic feedback.
        #[arg(long)]
        baseline: bool,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize a trace: mean score, non-ergonomic time, boundary
    /// touches and base proximity.
    Metrics {
        #[arg(long)]
        trace: PathBuf,
        /// Proximity threshold for the base-distance metric (m).
        #[arg(long)]
        d0: f64,
    },
    /// Run the full verification battery; exits non-zero on any failure.
    Verify,
    /// Extract one quantity from a trace as (t, value) CSV.
    PlotData {
        #[arg(long)]
        trace: PathBuf,
        /// Quantity name, e.g. `f`, `a`, `p_e_norm_m`, `V_minus_bound`.
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            baseline,
            seed,
        } => {
            let mut sc = load_scenario(&scenario)
                .with_context(|| format!("loading {}", scenario.display()))?;
            if baseline {
                sc.baseline = true;
            }
            if let Some(seed) = seed {
                sc.seed = seed;
            }
            let trace = run_scenario(&sc)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut writer = BufWriter::new(file);
            write_trace(&trace, &mut writer)?;
            writer.flush()?;
            let metrics = compute_metrics(&trace, sc.repulsion.d_0_m)?;
            println!(
                "{} ticks written to {}; a_bar {:.4}, zeta_ne {:.2}%, beta {}, zeta_d {:.2}%",
                trace.records.len(),
                out.display(),
                metrics.a_bar,
                metrics.zeta_ne_percent,
                metrics.beta,
                metrics.zeta_d_percent
            );
        }
        Command::Metrics { trace, d0 } => {
            let log = read_trace(BufReader::new(
                File::open(&trace).with_context(|| format!("opening {}", trace.display()))?,
            ))?;
            let m = compute_metrics(&log, d0)?;
            println!("a_bar          {:.6}", m.a_bar);
            println!("zeta_ne_pct    {:.4}", m.zeta_ne_percent);
            println!("beta           {}", m.beta);
            println!("zeta_d_pct     {:.4}", m.zeta_d_percent);
        }
        Command::Verify => {
            let outcomes = verify::run_battery();
            let mut failed = 0;
            for o in &outcomes {
                println!("{}", o.line());
                if !o.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                bail!("{failed} of {} criteria failed", outcomes.len());
            }
            println!("all {} criteria passed", outcomes.len());
        }
        Command::PlotData {
            trace,
            quantity,
            out,
        } => {
            let log = read_trace(BufReader::new(
                File::open(&trace).with_context(|| format!("opening {}", trace.display()))?,
            ))?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut writer = BufWriter::new(file);
            emit_plot_data(&log, &quantity, &mut writer)?;
            writer.flush()?;
            println!("wrote {} to {}", quantity, out.display());
        }
    }
    Ok(())
}
