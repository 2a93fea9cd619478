use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ntn_harq::bler::BlerTable;
use ntn_harq::scheduler::{bs_view, validate, LegacyOutcome};
use ntn_harq_cli::calibrate::{calibrate, write_calibration};
use ntn_harq_cli::render::{render_svg, render_text};
use ntn_harq_cli::report::{csv_string, row, RowResult};
use ntn_harq_cli::scenario::{link_state, plan_cycle, run_scenario, scenario_timeline};
use ntn_harq_cli::sweep::{sweep, Axis};
use ntn_harq_cli::{AppError, AppResult, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "ntn-harq",
    version,
    about = "HARQ scheduling over LEO satellite links"
)]
struct Cli {
    /// BLER table to use instead of the built-in reference curves.
    #[arg(long, global = true)]
    bler_table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print a CSV row.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Cartesian product of parameter axes.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...`; repeat for more axes.
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw one cycle of the scenario.
    Timeline {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Perspective::Ue)]
        perspective: Perspective,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit grant repetitions and ACK processing time to the protocol's target gain.
    Calibrate {
        config: PathBuf,
        /// Write the calibrated profile here instead of updating it in place.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Perspective {
    Ue,
    Bs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Svg,
}

fn emit(out: Option<&Path>, text: &str) -> AppResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| AppError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> AppResult<()> {
    let table = match &cli.bler_table {
        Some(path) => BlerTable::load(path)
            .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?,
        None => BlerTable::reference(),
    };
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let outcome = run_scenario(&cfg, &table)?;
            let csv = csv_string(&[row(&cfg, &RowResult::Done(Box::new(outcome)))])?;
            emit(out.as_deref(), &csv)
        }
        Command::Sweep { config, axes, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let axes = axes
                .iter()
                .map(|a| Axis::parse(a))
                .collect::<AppResult<Vec<_>>>()?;
            let rows = sweep(&cfg, &axes, &table)?;
            emit(out.as_deref(), &csv_string(&rows)?)
        }
        Command::Timeline {
            config,
            perspective,
            format,
            out,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let link = link_state(&cfg, &table)?;
            let plan = plan_cycle(&cfg, &link)?;
            let (ue, report) = match scenario_timeline(&cfg, &plan.params)? {
                Ok(t) => {
                    let report = validate(&t, &plan.params);
                    (t, report)
                }
                Err(LegacyOutcome::Conflicted { attempted, report }) => (attempted, report),
                Err(LegacyOutcome::Feasible(t)) => {
                    let report = validate(&t, &plan.params);
                    (t, report)
                }
            };
            let (t, report) = match perspective {
                Perspective::Ue => (ue, report),
                Perspective::Bs => {
                    let bs = bs_view(&ue, link.rtt_ms)?;
                    let report = validate(&bs, &plan.params);
                    (bs, report)
                }
            };
            let text = match format {
                Format::Text => render_text(&t, &report),
                Format::Svg => render_svg(&t, &report),
            };
            emit(out.as_deref(), &text)
        }
        Command::Calibrate { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let cal = calibrate(&cfg, &table)?;
            let text = std::fs::read_to_string(&config).map_err(|e| AppError::io(&config, e))?;
            let updated = write_calibration(&text, &cal)?;
            let target = out.unwrap_or(config);
            std::fs::write(&target, updated).map_err(|e| AppError::io(&target, e))?;
            let status = if cal.within_tolerance() {
                "within"
            } else {
                "outside"
            };
            println!(
                "rep_pdcch = {}, ack_proc_sf = {}: {} TBs per cycle, gain {:.2} % ({status} {:.1} ± {:.1} %)",
                cal.rep_pdcch, cal.ack_proc_sf, cal.n_tbphc, cal.gain_pct, cal.target_pct, cal.tolerance_pct
            );
            println!("wrote {}", target.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
