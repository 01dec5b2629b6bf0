use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use chernform::currents::Grid;
use chernform_cli::{load, report, run_scenario, shipped, CliError, Outcome, Overrides, Scenario};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(version, about = "Run chernform scenario checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario file
    Run {
        file: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Print the shipped scenarios
    ListScenarios,
    /// Run every shipped scenario
    VerifyAll {
        #[command(flatten)]
        knobs: Knobs,
    },
}

#[derive(Args, Debug)]
struct Knobs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jet_order: Option<usize>,
    /// radial,t,theta node counts
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// comma-separated λ values
    #[arg(long, value_delimiter = ',')]
    lambda_schedule: Option<Vec<f64>>,
    #[arg(long, default_value = "chernform-out")]
    out_dir: PathBuf,
    /// worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("bad grid size `{x}`")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [radial, t, theta] if radial > 0 && t > 0 && theta > 0 => Ok(Grid { radial, t, theta }),
        _ => Err("grid is radial,t,theta with positive sizes".into()),
    }
}

impl Knobs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            jet_order: self.jet_order,
            grid: self.grid,
            lambdas: self.lambda_schedule.clone(),
        }
    }
}

fn execute(mut scenarios: Vec<Scenario>, knobs: &Knobs) -> anyhow::Result<ExitCode> {
    if let Some(j) = knobs.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let ov = knobs.overrides();
    let mut outcomes: Vec<Outcome> = Vec::new();
    for scn in &mut scenarios {
        ov.apply(scn);
        let o = run_scenario(scn);
        let fails = o.failures().count();
        eprintln!("{}: {} checks, {} failed", o.scenario, o.checks.len(), fails);
        outcomes.push(o);
    }
    report::write_all(&knobs.out_dir, &outcomes)
        .with_context(|| format!("writing reports to {}", knobs.out_dir.display()))?;
    let failed: Vec<&str> = outcomes
        .iter()
        .flat_map(|o| o.failures().map(|c| c.id.as_str()))
        .collect();
    if failed.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for id in failed {
        eprintln!("FAIL {id}");
    }
    Ok(ExitCode::from(1))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ListScenarios => match shipped() {
            Ok(list) => {
                for s in list {
                    println!("{:<20} n={} {:<12} {}", s.name, s.n, format!("{} task(s)", s.tasks.len()), s.anchor);
                }
                Ok(ExitCode::SUCCESS)
            }
            Err(e) => Err(e),
        },
        Command::Run { file, knobs } => match load(file) {
            Ok(s) => return report_errors(execute(vec![s], knobs)),
            Err(e) => Err(e),
        },
        Command::VerifyAll { knobs } => match shipped() {
            Ok(list) => return report_errors(execute(list, knobs)),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(code) => code,
        Err(e @ CliError::Scenario { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn report_errors(r: anyhow::Result<ExitCode>) -> ExitCode {
    r.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
