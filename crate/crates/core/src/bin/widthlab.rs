use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use widthlab::runner::{exit_code, list_experiments, regression_check, run_experiment, ExperimentConfig, Overrides, Tolerances};
use widthlab::Error;

/// Widths and best n-term approximation experiments for elliptic problems.
#[derive(Parser, Debug)]
#[command(name = "widthlab", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List experiments, the results they check and their parameters.
    List,
    /// Compare a fresh output directory against golden reports.
    Check {
        golden: PathBuf,
        fresh: PathBuf,
    },
}

#[derive(clap::Args, Debug, Default)]
struct RunArgs {
    /// Experiment id (see `widthlab list`).
    #[arg(long)]
    experiment: Option<String>,
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV curves and the JSON summary.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// Condition bound of the basis (theorem1-bracket).
    #[arg(long = "C")]
    condition: Option<f64>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> widthlab::Result<Overrides> {
        let mut o = Overrides::default();
        let pairs: [(&str, Option<String>); 10] = [
            ("experiment", self.experiment.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("n_max", self.nmax.map(|v| v.to_string())),
            ("t", self.t.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("C", self.condition.map(|v| v.to_string())),
            ("truncation", self.truncation.map(|v| v.to_string())),
            ("levels", self.levels.map(|v| v.to_string())),
            ("samples", self.samples.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                o.set(key, v)?;
            }
        }
        Ok(o)
    }
}

fn run(args: &RunArgs) -> widthlab::Result<widthlab::runner::ExperimentReport> {
    let file = match &args.config {
        Some(path) => Overrides::read(path)?,
        None => Overrides::default(),
    };
    let config = ExperimentConfig::resolve(&file.layer(&args.overrides()?))?;
    run_experiment(&config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Some(Command::List) => {
            print!("{}", list_experiments());
            0
        }
        Some(Command::Check { golden, fresh }) => match regression_check(&golden, &fresh, Tolerances::default()) {
            Ok(r) => {
                for m in &r.mismatches {
                    println!("mismatch: {m}");
                }
                println!("{} ({} values compared)", if r.passed { "pass" } else { "fail" }, r.compared_values);
                if r.passed {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        None => {
            let result = run(&cli.run);
            match &result {
                Ok(report) => {
                    print!("{}", report.summary());
                    println!(
                        "{}: {} in {:.2} s, outputs in {}",
                        report.config.experiment,
                        if report.passed { "pass" } else { "fail" },
                        report.wall_clock_seconds,
                        report.config.out.display()
                    );
                }
                Err(e @ Error::Config(_)) => eprintln!("usage error: {e}"),
                Err(e) => eprintln!("error: {e}"),
            }
            exit_code(&result)
        }
    };
    ExitCode::from(code as u8)
}
