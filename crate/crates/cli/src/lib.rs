//! `germlie run`: executes a named suite and writes `report.json`, `summary.csv` and
//! `timings.csv` into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use germlie::report::summary_csv;
use germlie::sweeps::{run_criterion, suite_criteria, CriterionOutcome, SweepConfig, SUITES};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "germlie", version, about = "Property suites for germs, germ groups and complexifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a suite and write the reports.
    Run(RunConfig),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// germ-space, lie-local, lie-global, regularity, complexify or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per check (default: the per-check counts of the acceptance suite)
    #[arg(long)]
    pub trials: Option<usize>,
    /// Level ratio r, must lie in (0, 1/(2e))
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho0: f64,
    /// Series degree bound N
    #[arg(long, default_value_t = 12)]
    pub degree: usize,
    #[arg(long, default_value_t = 8)]
    pub bch_order: usize,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    /// Matrix dimension m of gl(m, C)
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value = "germlie-out")]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            seed: self.seed,
            trials: self.trials,
            r: self.r,
            rho0: self.rho0,
            degree: self.degree,
            bch_order: self.bch_order,
            steps: self.steps,
            dim: self.dim,
            ..SweepConfig::default()
        }
    }
}


#[derive(Serialize)]
struct Report<'a> {
    schema: u32,
    suite: &'a str,
    config: &'a SweepConfig,
    passed: bool,
    criteria: Vec<CriterionEntry<'a>>,
}

/// A criterion without its timing, so reports are reproducible byte for byte.
#[derive(Serialize)]
struct CriterionEntry<'a> {
    id: usize,
    title: &'a str,
    passed: bool,
    reports: &'a [germlie::report::CheckReport],
    supplementary: &'a [germlie::report::CheckReport],
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub criteria: Vec<CriterionOutcome>,
    pub message: String,
}

fn checks_passed(o: &CriterionOutcome) -> bool {
    o.reports.iter().all(|r| r.passed)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    fs::write(dir.join(name), contents).map_err(|e| format!("cannot write {}: {e}", dir.join(name).display()))
}

/// Runs the configured suite. Usage and configuration errors give exit code 2,
/// failing checks exit code 1.
pub fn run(config: &RunConfig) -> RunOutcome {
    let usage = |message: String| RunOutcome {
        exit_code: EXIT_USAGE,
        criteria: Vec::new(),
        message,
    };
    let Some(ids) = suite_criteria(&config.suite) else {
        return usage(format!("unknown suite '{}' (expected one of {})", config.suite, SUITES.join(", ")));
    };
    let sweep = config.sweep_config();
    if let Err(e) = sweep.validate() {
        return usage(e.to_string());
    }
    if let Err(e) = fs::create_dir_all(&config.out) {
        return usage(format!("cannot create {}: {e}", config.out.display()));
    }
    let mut outcomes = Vec::with_capacity(ids.len());
    for &id in ids {
        log::info!("criterion {id}");
        match run_criterion(id, &sweep) {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                return RunOutcome {
                    exit_code: EXIT_CHECK_FAILURE,
                    criteria: outcomes,
                    message: format!("criterion {id} aborted: {e}"),
                }
            }
        }
    }
    let passed = outcomes.iter().all(checks_passed);
    let report = Report {
        schema: SCHEMA_VERSION,
        suite: &config.suite,
        config: &sweep,
        passed,
        criteria: outcomes
            .iter()
            .map(|o| CriterionEntry {
                id: o.id,
                title: &o.title,
                passed: checks_passed(o),
                reports: &o.reports,
                supplementary: &o.supplementary,
            })
            .collect(),
    };
    let mut summary = String::from("criterion,");
    let mut timings = String::from("criterion,elapsed_secs,time_limit_secs,within_limit\n");
    for (k, o) in outcomes.iter().enumerate() {
        let csv = summary_csv(&o.reports);
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or_default();
        if k == 0 {
            summary.push_str(header);
            summary.push('\n');
        }
        for line in lines {
            summary.push_str(&format!("{},{line}\n", o.id));
        }
        timings.push_str(&format!(
            "{},{:.3},{},{}\n",
            o.id,
            o.elapsed_secs,
            o.time_limit_secs,
            o.elapsed_secs <= o.time_limit_secs
        ));
    }
    let json = match serde_json::to_string_pretty(&report) {
        Ok(j) => j,
        Err(e) => return usage(format!("cannot serialize report: {e}")),
    };
    let written = write(&config.out, "report.json", &json)
        .and_then(|_| write(&config.out, "summary.csv", &summary))
        .and_then(|_| write(&config.out, "timings.csv", &timings));
    if let Err(e) = written {
        return usage(e);
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !checks_passed(o)).map(|o| o.id.to_string()).collect();
    let message = if failed.is_empty() {
        format!("suite {}: all {} criteria passed", config.suite, outcomes.len())
    } else {
        let detail: Vec<String> = outcomes
            .iter()
            .filter(|o| !checks_passed(o))
            .flat_map(|o| o.reports.iter().filter(|r| !r.passed).map(move |r| format!("  criterion {}: {} ({} stored failures, worst margin {:e})", o.id, r.check, r.failures.len(), r.worst_margin)))
            .collect();
        format!("suite {}: criteria {} failed\n{}", config.suite, failed.join(", "), detail.join("\n"))
    };
    RunOutcome {
        exit_code: if passed { EXIT_PASS } else { EXIT_CHECK_FAILURE },
        criteria: outcomes,
        message,
    }
}
