//! Command-line surface.
//!
//! Exit status: 0 on success, 1 when the scenario fails validation, 2 on
//! any runtime error (usage errors are reported by clap, also with 2).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::beables::{asymptotic_check, Engine, Execution};
use crate::boundary::{sample_branch_index, sample_outcome};
use crate::error::{Error, Result};
use crate::oracle;
use crate::output::{self, RunMetadata, SampleRow};
use crate::raytrace::trace_all;
use crate::scenario::{enumerate_branches, is_valid, validate, Scenario, Severity};

pub const OUT_DIR_ENV: &str = "LORENTZ_BEABLES_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "lorentz-beables",
    version,
    about = "Light-cone conditioned beable fields for 1+1 toy models"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file, or the name of a bundled scenario (model1, model2).
    #[arg(long, global = true)]
    pub scenario: Option<String>,

    /// Seed for the final-outcome draw (defaults to the scenario's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,

    /// Replace the grid resolution, as `nt,nx`.
    #[arg(long, global = true, value_parser = parse_resolution)]
    pub grid_override: Option<(usize, usize)>,

    /// Branch label used as the outcome instead of sampling.
    #[arg(long, global = true)]
    pub branch: Option<String>,

    /// Files to emit for `run`.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        default_value = "csv,heatmap"
    )]
    pub emit: Vec<Emit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Heatmap,
}

#[derive(Debug, Args)]
pub struct ScenarioArg {
    /// Scenario file or bundled scenario name.
    #[arg(value_name = "SCENARIO")]
    pub path: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario and report violations.
    Validate(ScenarioArg),
    /// Sample an outcome, compute the beable field and write it out.
    Run(ScenarioArg),
    /// Draw outcomes for COUNT consecutive seeds and tabulate them.
    Sample {
        count: u64,
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Recompute the field for several final times and report the drift.
    #[command(name = "sweep-t", alias = "sweep-T")]
    SweepT {
        /// Comma-separated final times, e.g. `18,30,100`.
        #[arg(value_parser = parse_times)]
        times: TimeList,
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Compare the engine with the closed-form predictions.
    OracleDiff(ScenarioArg),
    /// Dump every photon trajectory of every branch.
    Trajectories(ScenarioArg),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeList(pub Vec<f64>);

fn parse_times(s: &str) -> std::result::Result<TimeList, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad time {t:?}: {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(TimeList)
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected nt,nx")?;
    let nt = a.trim().parse().map_err(|e| format!("bad nt: {e}"))?;
    let nx = b.trim().parse().map_err(|e| format!("bad nx: {e}"))?;
    Ok((nt, nx))
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct CommandOutcome {
    pub status: u8,
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

impl RunConfig {
    fn scenario_name(&self) -> Result<&str> {
        let positional = match &self.command {
            Command::Validate(a)
            | Command::Run(a)
            | Command::OracleDiff(a)
            | Command::Trajectories(a) => a,
            Command::Sample { scenario, .. } | Command::SweepT { scenario, .. } => scenario,
        };
        positional
            .path
            .as_deref()
            .or(self.scenario.as_deref())
            .ok_or_else(|| Error::invalid("no scenario given"))
    }

    fn load(&self) -> Result<(String, Scenario)> {
        let name = self.scenario_name()?;
        let path = Path::new(name);
        let mut s = if path.exists() {
            Scenario::from_path(path)?
        } else if let Some(s) = Scenario::builtin(name) {
            s
        } else {
            Scenario::from_path(path)?
        };
        if let Some((nt, nx)) = self.grid_override {
            s.grid = s.grid.with_resolution(nt, nx);
        }
        Ok((name.to_string(), s))
    }
}

/// Runs one command. Validation failures come back as status 1 with the
/// violations in `messages`; other failures are errors.
pub fn run_command(cfg: &RunConfig) -> Result<CommandOutcome> {
    let (name, s) = cfg.load()?;
    let mut out = CommandOutcome::default();

    let violations = validate(&s);
    for v in &violations {
        out.messages.push(v.to_string());
    }
    if !is_valid(&violations) {
        out.status = 1;
        return Ok(out);
    }
    if matches!(cfg.command, Command::Validate(_)) {
        let warnings = violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
            .count();
        out.messages
            .push(format!("{name}: valid ({warnings} warnings)"));
        return Ok(out);
    }

    match &cfg.command {
        Command::Validate(_) => unreachable!(),
        Command::Run(_) => {
            let seed = cfg.seed.unwrap_or(s.seed);
            let outcome = match &cfg.branch {
                Some(label) => crate::boundary::outcome_for_branch(&s, &s.branch_by_label(label)?)?,
                None => sample_outcome(&s, seed)?,
            };
            let engine = Engine::new(&s, outcome.clone())?;
            let field = engine.field(&s.grid, Execution::Parallel)?;
            if cfg.emit.contains(&Emit::Csv) {
                out.files.push(output::write_file(
                    &cfg.out,
                    "field.csv",
                    output::field_csv(&field),
                )?);
            }
            if cfg.emit.contains(&Emit::Heatmap) {
                let totals: Vec<f64> = field.samples.iter().map(|p| p.total).collect();
                out.files.push(output::write_file(
                    &cfg.out,
                    "total.pgm",
                    output::pgm16(&totals, &s.grid),
                )?);
                for &src in &field.sources {
                    let values: Vec<f64> =
                        field.samples.iter().map(|p| p.contribution(src)).collect();
                    out.files.push(output::write_file(
                        &cfg.out,
                        &format!("{src}.pgm"),
                        output::pgm16(&values, &s.grid),
                    )?);
                }
            }
            let branches = enumerate_branches(&s);
            let meta = RunMetadata::new(&name, seed, s.final_time, &outcome, &branches, &field);
            let json =
                serde_json::to_string_pretty(&meta).map_err(|e| Error::Internal(e.to_string()))?;
            out.files
                .push(output::write_file(&cfg.out, "metadata.json", json + "\n")?);
            out.messages.push(format!(
                "outcome branch {} (weight {}), {} grid points",
                outcome.branch.label,
                outcome.weight,
                field.samples.len()
            ));
        }
        Command::Sample { count, .. } => {
            let base = cfg.seed.unwrap_or(s.seed);
            let branches = enumerate_branches(&s);
            let rows: Vec<SampleRow> = (0..*count)
                .map(|i| {
                    let seed = base.wrapping_add(i);
                    let b = &branches[sample_branch_index(&branches, seed)];
                    SampleRow {
                        seed,
                        branch: b.label.clone(),
                        weight: b.weight,
                    }
                })
                .collect();
            out.files.push(output::write_file(
                &cfg.out,
                "samples.csv",
                output::samples_csv(&rows),
            )?);
            let freq = output::frequency_csv(&branches, &rows);
            out.files
                .push(output::write_file(&cfg.out, "frequencies.csv", &freq)?);
            out.messages.push(freq);
        }
        Command::SweepT { times, .. } => {
            let branch = cfg.branch.as_deref().unwrap_or("1");
            let report = asymptotic_check(&s, branch, &times.0, &s.grid)?;
            let text = output::sweep_report(&report, branch);
            out.files
                .push(output::write_file(&cfg.out, "sweep.csv", &text)?);
            out.messages.push(text);
        }
        Command::OracleDiff(_) => {
            let outcome: u8 = match cfg.branch.as_deref() {
                None => 1,
                Some(b) => b.parse().map_err(|_| {
                    Error::invalid(format!("oracle outcome must be 1 or 2, got {b:?}"))
                })?,
            };
            let diff = oracle::compare(&s, outcome, Execution::Parallel)?;
            let text = output::oracle_report(&diff);
            out.files
                .push(output::write_file(&cfg.out, "oracle_diff.csv", &text)?);
            out.messages.push(text);
        }
        Command::Trajectories(_) => {
            let mut all = Vec::new();
            for b in enumerate_branches(&s) {
                all.extend(trace_all(&s, &b)?);
            }
            out.files.push(output::write_file(
                &cfg.out,
                "trajectories.csv",
                output::trajectories_csv(&all),
            )?);
        }
    }
    Ok(out)
}

pub fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run_command(&cfg) {
        Ok(outcome) => {
            for m in &outcome.messages {
                if outcome.status == 0 {
                    println!("{}", m.trim_end());
                } else {
                    eprintln!("{}", m.trim_end());
                }
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
