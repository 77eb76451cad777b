//! `dualgame`: play the path/phase guessing game and check its information bounds.
//!
//! Exit status: 0 on success, 1 when a checked property fails, 2 on bad input.

mod report;
mod scenario_file;

use clap::{Args, Parser, Subcommand};
use dualgame::game::presets::Preset;
use dualgame::game::{
    exact_win_probability, monte_carlo_win_rate, original_game_bound, GameScenario,
};
use dualgame::info::fuzz::{run_fuzz, FuzzConfig, VIOLATION_TOL};
use dualgame::info::{analyze_scenario, scan_partitions};
use dualgame::qcore::{DEFAULT_MAX_DIM, TAU_EIG};
use report::{num, Report, Verdict};
use scenario_file::ScenarioFile;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "dualgame",
    version,
    about = "Path/phase guessing game simulator"
)]
struct Cli {
    /// Largest composite Hilbert-space dimension accepted.
    #[arg(long, global = true, env = "DUALGAME_MAX_DIM", default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,

    /// Also write the report as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Win probability of a scenario, exactly or by sampling.
    RunGame {
        #[command(flatten)]
        source: Source,
        /// Number of sampled rounds.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Compute exact probabilities (the default when no --trials is given).
        #[arg(long)]
        exact: bool,
    },
    /// Mutual information, Holevo quantities and the duality relation.
    CheckDuality {
        #[command(flatten)]
        source: Source,
    },
    /// Feasibility of every N = n_ways * n_phases partition up to --n-max.
    ScanPartitions {
        #[arg(long)]
        n_max: usize,
    },
    /// Check the duality relation and Holevo dominance on random scenarios.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Detector dimension range, "MIN-MAX" or a single value.
        #[arg(long, default_value = "2-4")]
        dims: String,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON scenario file.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: trine3, sixpair4 or twopair4.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        Self(e.to_string())
    }
}

fn load(source: &Source, max_dim: usize) -> Result<GameScenario, InputError> {
    let file = match (&source.scenario, &source.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            ScenarioFile::parse(&text)
                .map_err(|e| InputError(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => {
            let preset = Preset::from_name(name).ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                InputError(format!(
                    "unknown preset {name:?}; expected one of {}",
                    names.join(", ")
                ))
            })?;
            ScenarioFile::preset(preset)
        }
        (None, None) => unreachable!("clap requires a scenario source"),
    };
    Ok(file.to_scenario(max_dim)?)
}

fn scenario_inputs(s: &GameScenario) -> Value {
    serde_json::to_value(ScenarioFile::from_scenario(s)).expect("scenario files always serialize")
}

fn parse_dims(text: &str) -> Result<(usize, usize), InputError> {
    let bad = || {
        InputError(format!(
            "--dims expects MIN-MAX or a single value, got {text:?}"
        ))
    };
    match text.split_once('-') {
        Some((lo, hi)) => Ok((
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
        )),
        None => {
            let d = text.trim().parse().map_err(|_| bad())?;
            Ok((d, d))
        }
    }
}

fn run_game(
    s: &GameScenario,
    trials: Option<u64>,
    seed: u64,
    exact: bool,
) -> Result<Report, InputError> {
    let do_exact = exact || trials.is_none();
    let inputs = json!({
        "scenario": scenario_inputs(s),
        "trials": trials,
        "seed": trials.map(|_| seed),
        "exact": do_exact,
    });
    let mut r = Report::new("run-game", trials.map(|_| seed), inputs);
    r.result("paths", s.paths().into());
    let bound = original_game_bound(s.paths())?;
    r.result("original_game_bound", num(bound));
    if do_exact {
        let w = exact_win_probability(s)?;
        r.result(
            "exact",
            json!({ "ways": num(w.ways), "phases": num(w.phases), "overall": num(w.overall) }),
        );
        r.verdict("always_won", Verdict::Info((w.overall - 1.0).abs() <= 1e-9));
        r.verdict(
            "exceeds_original_bound",
            Verdict::Info(w.overall > bound + 1e-9),
        );
    }
    if let Some(trials) = trials {
        let mc = monte_carlo_win_rate(s, trials, seed)?;
        r.result(
            "monte_carlo",
            json!({ "wins": mc.wins, "trials": mc.trials, "rate": num(mc.rate), "stderr": num(mc.stderr) }),
        );
    }
    Ok(r)
}

fn check_duality(s: &GameScenario) -> Result<Report, InputError> {
    let info = analyze_scenario(s)?;
    let d = info.duality;
    let mut r = Report::new(
        "check-duality",
        None,
        json!({ "scenario": scenario_inputs(s) }),
    );
    r.result("paths", s.paths().into())
        .result("phase_information", num(d.phase_information))
        .result("path_information", num(d.path_information))
        .result("path_entropy", num(d.path_entropy))
        .result("slack", num(d.slack))
        .result("phase_holevo", num(info.phase_holevo))
        .result("path_holevo", num(info.path_holevo))
        .result("coherence", num(info.coherence));
    r.verdict("duality", Verdict::check(d.passes))
        .verdict(
            "holevo_dominance",
            Verdict::check(info.holevo_dominated(TAU_EIG)),
        )
        .verdict("saturated", Verdict::Info(d.saturated));
    Ok(r)
}

fn scan(n_max: usize, cap: usize) -> Result<Report, InputError> {
    let rows = scan_partitions(n_max, cap)?;
    let mut r = Report::new("scan-partitions", None, json!({ "n_max": n_max }));
    let mut agree = true;
    let table: Vec<Value> = rows
        .iter()
        .map(|row| {
            if row.symmetric() && row.verdict.allowed() != (row.n_ways * row.n_ways <= row.total) {
                agree = false;
            }
            json!({
                "total": row.total,
                "n_ways": row.n_ways,
                "n_phases": row.n_phases,
                "ways_information": num(row.ways_information),
                "phases_information": num(row.phases_information),
                "verdict": row.verdict.as_str(),
            })
        })
        .collect();
    r.result("rows", Value::Array(table));
    r.verdict("symmetric_rows_match_sqrt_rule", Verdict::check(agree));
    Ok(r)
}

fn fuzz(count: u64, seed: u64, dims: &str) -> Result<Report, InputError> {
    let (min_dim, max_dim) = parse_dims(dims)?;
    let config = FuzzConfig {
        count,
        seed,
        min_dim,
        max_dim,
        ..FuzzConfig::default()
    };
    let report = run_fuzz(&config)?;
    let inputs = json!({
        "count": count,
        "seed": seed,
        "min_dim": min_dim,
        "max_dim": max_dim,
        "path_counts": config.path_counts,
    });
    let mut r = Report::new("fuzz", Some(seed), inputs);
    r.result("cases", count.into())
        .result("violation_tolerance", num(VIOLATION_TOL))
        .result("min_slack", num(report.min_slack))
        .result("min_slack_stream", report.min_slack_case.into())
        .result("min_holevo_gap", num(report.min_holevo_gap))
        .result(
            "duality_violation_streams",
            json!(report.duality_violations),
        )
        .result("holevo_violation_streams", json!(report.holevo_violations));
    r.verdict(
        "duality",
        Verdict::check(report.duality_violations.is_empty()),
    )
    .verdict(
        "holevo_dominance",
        Verdict::check(report.holevo_violations.is_empty()),
    );
    Ok(r)
}

fn execute(cli: &Cli) -> Result<Report, InputError> {
    if cli.max_dim == 0 {
        return Err(InputError("--max-dim must be positive".into()));
    }
    match &cli.command {
        Command::RunGame {
            source,
            trials,
            seed,
            exact,
        } => run_game(&load(source, cli.max_dim)?, *trials, *seed, *exact),
        Command::CheckDuality { source } => check_duality(&load(source, cli.max_dim)?),
        Command::ScanPartitions { n_max } => scan(*n_max, cli.max_dim),
        Command::Fuzz { count, seed, dims } => fuzz(*count, *seed, dims),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.human());
    if let Some(path) = &cli.json {
        if let Err(e) = report.write_json(path) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.failed() {
        for (k, v) in &report.verdicts {
            if *v == Verdict::Fail {
                eprintln!("property violated: {k}");
            }
        }
        if report.command == "fuzz" {
            let streams = |key: &str| report.results.get(key).cloned().unwrap_or(Value::Null);
            eprintln!(
                "seed {}: offending streams duality={} holevo={}",
                report.seed.unwrap_or_default(),
                streams("duality_violation_streams"),
                streams("holevo_violation_streams")
            );
        }
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
