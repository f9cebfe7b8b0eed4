use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lieevolve_cli::{
    catalog, exit_code, load_scenario, output_dir, run_scenario, RunError, RunOptions, OUT_ENV,
};

/// Wei-Norman solver for Lie systems, driven by scenario files.
#[derive(Parser, Debug)]
#[command(name = "lieevolve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one or more scenarios (files or bundled ids) concurrently.
    Run {
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Output directory; one subdirectory per scenario when several are given.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative tolerance of the integrator.
        #[arg(long)]
        tol: Option<f64>,
        /// Also compare with the Crank-Nicolson grid propagator.
        #[arg(long)]
        grid_check: bool,
    },
    /// List the bundled scenarios.
    ListScenarios,
    /// Describe a bundled scenario.
    Describe { id: String },
    /// Print the JSON schema of the scenario format.
    Schema,
}

fn run(scenarios: &[String], out: Option<PathBuf>, tol: Option<f64>, grid_check: bool) -> i32 {
    let env = std::env::var(OUT_ENV).ok();
    let batch = scenarios.len() > 1;
    let results: Vec<(String, Result<_, RunError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|arg| {
                let out = out.clone();
                let env = env.clone();
                scope.spawn(move || {
                    let result = load_scenario(arg).and_then(|s| {
                        let opts = RunOptions {
                            out: output_dir(out.as_deref(), env.as_deref(), &s.id, batch),
                            tol,
                            grid_check,
                        };
                        run_scenario(&s, &opts).map(|r| (r, opts.out))
                    });
                    (arg.clone(), result)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    let mut reports = Vec::new();
    for (arg, result) in results {
        match result {
            Ok((report, dir)) => {
                let status = if report.passed { "PASS" } else { "FAIL" };
                println!("{status} {} -> {}", report.scenario, dir.display());
                for c in &report.checks {
                    let mark = if c.passed { "ok" } else { "FAILED" };
                    println!(
                        "  {:<15} {:>10.3e} (tol {:.1e}) {mark}",
                        c.name, c.max, c.tolerance
                    );
                }
                for d in &report.discrepancies {
                    println!("  discrepancy: {} ({:.3e})", d.name, d.max_difference);
                }
                for w in &report.warnings {
                    eprintln!("  warning: {w}");
                }
                reports.push(Ok(report));
            }
            Err(e) => {
                eprintln!("ERROR {arg}: {e}");
                reports.push(Err(e));
            }
        }
    }
    exit_code(&reports)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run {
            scenarios,
            out,
            tol,
            grid_check,
        } => run(&scenarios, out, tol, grid_check),
        Command::ListScenarios => {
            print!("{}", catalog::list_text());
            0
        }
        Command::Describe { id } => match catalog::describe_text(&id) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
        Command::Schema => {
            print!("{}", catalog::SCENARIO_SCHEMA);
            0
        }
    };
    ExitCode::from(code as u8)
}
