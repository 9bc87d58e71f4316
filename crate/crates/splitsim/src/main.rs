//! Command-line entry point: model validation, scenario runs, parameter
//! sweeps and closed-loop replay.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use splitsim::complexity::{OpCountOverride, OpCountTable, REFERENCE_OP_COUNTS};
use splitsim::control::{self, PolicyParams};
use splitsim::error::Error;
use splitsim::model::{fh_boundary, BbFunction, Direction, Split};
use splitsim::scenario::{self, ExportFormat, Method, Scenario};
use splitsim::CellConfig;

#[derive(Parser)]
#[command(
    name = "splitsim",
    version,
    about = "Functional split selection simulator for a disaggregated RAN site"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the calibration of the operation-count model and print the
    /// boundary and duty-cycle tables.
    Validate {
        /// JSON file overriding per-function operation counts.
        #[arg(long)]
        opcounts: Option<PathBuf>,
    },
    /// Run a daily scenario and export the result series.
    Run {
        /// Scenario JSON; the bundled default scenario is used when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario's BBL/BBH energy-cost ratio.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Override the scenario's fronthaul capacity (Gb/s per direction).
        #[arg(long)]
        capacity: Option<f64>,
        #[arg(long, value_enum, default_value_t = ExportFormat::Both)]
        format: ExportFormat,
    },
    /// Sweep one parameter and report the optimum per swept value.
    Sweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the closed decision loop over a scenario and log
    /// reconfiguration events.
    Replay {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Relative objective improvement required to reconfigure.
        #[arg(long, default_value_t = 0.02)]
        hysteresis: f64,
        /// Decisions per scenario period.
        #[arg(long, default_value_t = 1)]
        cadence: usize,
        /// Externally captured PM counters (CSV) instead of synthesized ones.
        #[arg(long)]
        counters: Option<PathBuf>,
        /// Decision window in seconds when replaying external counters.
        #[arg(long, default_value_t = 60.0)]
        interval: f64,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        /// Event log destination (JSON lines).
        #[arg(long, default_value = "events.jsonl")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
enum SweepParam {
    Epsilon,
    Capacity,
    LoadScale,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { opcounts } => cmd_validate(opcounts.as_deref()),
        Command::Run {
            scenario,
            method,
            out,
            epsilon,
            capacity,
            format,
        } => cmd_run(scenario.as_deref(), method, &out, epsilon, capacity, format),
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            method,
            out,
        } => cmd_sweep(
            scenario.as_deref(),
            param,
            from,
            to,
            steps,
            method,
            out.as_deref(),
        ),
        Command::Replay {
            scenario,
            hysteresis,
            cadence,
            counters,
            interval,
            method,
            out,
        } => cmd_replay(
            scenario.as_deref(),
            hysteresis,
            cadence,
            counters.as_deref(),
            interval,
            method,
            &out,
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn load_opcount_table(path: Option<&Path>) -> Result<OpCountTable, Error> {
    let Some(path) = path else {
        return Ok(OpCountTable::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let overrides: BTreeMap<BbFunction, OpCountOverride> =
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    Ok(OpCountTable::default().with_overrides(&overrides))
}

fn cmd_validate(opcounts: Option<&Path>) -> Result<ExitCode, Error> {
    let table = load_opcount_table(opcounts)?;
    let cell = CellConfig::default();
    cell.validate()?;

    println!("Per-execution operation counts at default cell parameters:");
    println!(
        "{:<18} {:<32} {:>12} {:>12}  status",
        "function", "algorithm", "expected", "computed"
    );
    let mut all_ok = true;
    for (f, expected) in REFERENCE_OP_COUNTS {
        let computed: f64 = table.ops_per_execution(f, &cell)?;
        let ok = computed == expected as f64;
        all_ok &= ok;
        println!(
            "{:<18} {:<32} {:>12} {:>12}  {}",
            f.name(),
            table.algorithm(f),
            expected,
            format_ops(computed),
            if ok { "ok" } else { "MISMATCH" }
        );
    }

    println!("\nFronthaul boundary kinds:");
    println!("{:<6} {:<28} {:<28}", "split", "DL", "UL");
    for split in Split::ALL {
        println!(
            "{:<6} {:<28} {:<28}",
            split.name(),
            format!("{:?}", fh_boundary(split, Direction::Dl)),
            format!("{:?}", fh_boundary(split, Direction::Ul)),
        );
    }

    println!(
        "\nTDD duty cycles: DL {}/{}  UL {}/{}",
        cell.tdd.dl_symbols(),
        cell.tdd.period_symbols(),
        cell.tdd.ul_symbols(),
        cell.tdd.period_symbols()
    );

    if all_ok {
        println!("\nvalidation: all operation counts match");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("\nvalidation: MISMATCH");
        Ok(ExitCode::from(1))
    }
}

fn format_ops(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

fn load_scenario_arg(path: Option<&Path>) -> Result<Scenario, Error> {
    match path {
        Some(p) => Scenario::from_path(p),
        None => Ok(Scenario::bundled_default()),
    }
}

fn cmd_run(
    scenario_path: Option<&Path>,
    method: Method,
    out: &Path,
    epsilon: Option<f64>,
    capacity: Option<f64>,
    format: ExportFormat,
) -> Result<ExitCode, Error> {
    let mut scenario = load_scenario_arg(scenario_path)?;
    if let Some(eps) = epsilon {
        splitsim::Objective::new(eps)?;
        scenario.epsilon = eps;
    }
    if let Some(cap) = capacity {
        scenario.link = splitsim::FhLink::new(cap)?;
    }
    let result = scenario::run(&scenario, method)?;
    let files = scenario::export(&result, format, out)?;

    println!(
        "{:<10} {:<24} {:>12} {:>10} {:>10}  fixed-split pct diff (feasible only)",
        "period", "optimum splits", "gops", "dl_gbps", "ul_gbps"
    );
    for p in &result.periods {
        let splits: Vec<String> = p.optimum.splits.iter().map(|s| s.to_string()).collect();
        let mut diffs = String::new();
        for (split, fixed) in &p.fixed {
            if fixed.feasible {
                if let Some(d) = fixed.pct_diff {
                    diffs.push_str(&format!("{split}:{d:.1}% "));
                }
            }
        }
        println!(
            "{:<10} {:<24} {:>12.2} {:>10.3} {:>10.3}  {}",
            p.label,
            splits.join(" "),
            p.optimum.objective_value,
            p.optimum.fh.dl_gbps,
            p.optimum.fh.ul_gbps,
            diffs
        );
    }
    println!("\nwrote {} files to {}", files.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    scenario_path: Option<&Path>,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    method: Method,
    out: Option<&Path>,
) -> Result<ExitCode, Error> {
    if steps == 0 || to < from {
        return Err(Error::EmptyRange);
    }
    let base = load_scenario_arg(scenario_path)?;
    let mut csv = String::from(
        "value,total_objective_gops,count_S8,count_S7a,count_S7b,count_S7c,count_S7d,count_S6,feasible_periods,tie_total\n",
    );
    for step in 0..steps {
        let value = if steps == 1 {
            from
        } else {
            from + (to - from) * step as f64 / (steps - 1) as f64
        };
        let mut scenario = base.clone();
        match param {
            SweepParam::Epsilon => {
                splitsim::Objective::new(value)?;
                scenario.epsilon = value;
            }
            SweepParam::Capacity => scenario.link = splitsim::FhLink::new(value)?,
            SweepParam::LoadScale => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(Error::Schema {
                        path: "load_scale".into(),
                        message: format!("{value} not in (0,1]"),
                    });
                }
                scenario.load_scale = value;
            }
        }
        let result = scenario::run(&scenario, method)?;
        let mut histogram = BTreeMap::new();
        let mut total = 0.0;
        let mut feasible_periods = 0usize;
        let mut tie_total = 0usize;
        for p in &result.periods {
            total += p.optimum.objective_value;
            feasible_periods += p.optimum.feasible as usize;
            tie_total += p.optimum.tie_count;
            for s in &p.optimum.splits {
                *histogram.entry(*s).or_insert(0usize) += 1;
            }
        }
        csv.push_str(&format!("{value},{total:.6}"));
        for s in Split::ALL {
            csv.push_str(&format!(",{}", histogram.get(&s).copied().unwrap_or(0)));
        }
        csv.push_str(&format!(",{feasible_periods},{tie_total}\n"));
    }
    match out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| Error::io(path, e))?;
            println!("wrote sweep to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(
    scenario_path: Option<&Path>,
    hysteresis: f64,
    cadence: usize,
    counters: Option<&Path>,
    interval: f64,
    method: Method,
    out: &Path,
) -> Result<ExitCode, Error> {
    let scenario = load_scenario_arg(scenario_path)?;
    if !(0.0..=1.0).contains(&hysteresis) {
        return Err(Error::Schema {
            path: "hysteresis".into(),
            message: format!("{hysteresis} not in [0,1]"),
        });
    }
    let params = PolicyParams { hysteresis, method };
    let result = match counters {
        Some(path) => {
            let records = control::read_counters_csv(path)?;
            control::replay_counters(&records, &scenario, interval, &params)?
        }
        None => control::replay(&scenario, cadence, &params)?,
    };
    control::write_events_jsonl(&result.events, out)?;
    println!(
        "decisions: {}  reconfigurations: {}  switch count: {}",
        result.decisions.len(),
        result.events.len(),
        result.switch_count
    );
    for diag in &result.skipped {
        eprintln!("skipped: {diag}");
    }
    println!("event log: {}", out.display());
    Ok(ExitCode::SUCCESS)
}
