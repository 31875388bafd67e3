use clap::{Parser, Subcommand};
use ftn_tbp_cli::config::{ExperimentConfig, ExperimentId};
use ftn_tbp_cli::experiments::{describe_experiment, schema};
use ftn_tbp_cli::exit;
use ftn_tbp_cli::runner::{run, RunError, RunOptions, CHECKPOINT_INTERVAL};
use ftn_tbp_cli::selftest::run_checks;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ftn-tbp", version, about = "Finite-TBP limits of faster-than-Nyquist signaling", after_help = schemas())]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core); overrides the config file.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for CSV, manifest and checkpoint files.
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Continue from the checkpoint of an interrupted run.
    #[arg(long, global = true)]
    resume: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run { config: PathBuf },
    /// Run the fast invariant suite.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// List experiment ids with their CSV columns.
    ListExperiments,
}

fn schemas() -> String {
    let mut s = String::from("CSV columns per experiment:\n");
    for id in ExperimentId::ALL {
        s.push_str(&format!("  {:<12} {}\n", id.name(), schema(id).join(",")));
    }
    s
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::ListExperiments => {
            for id in ExperimentId::ALL {
                println!("{:<12} {}", id.name(), describe_experiment(id));
                println!("{:<12} columns: {}", "", schema(id).join(","));
            }
            exit::OK
        }
        Command::Selftest { inject_fault } => {
            let checks = run_checks(inject_fault);
            for c in &checks {
                println!("[{}] {:<24} {} ({:.2} s)", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail, c.seconds);
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            println!("{passed}/{} checks passed", checks.len());
            if passed == checks.len() { exit::OK } else { exit::SELFTEST }
        }
        Command::Run { config } => match ExperimentConfig::load(&config) {
            Err(e) => {
                eprintln!("config error in {}: {e}", config.display());
                exit::CONFIG
            }
            Ok(mut cfg) => {
                if let Some(s) = cli.seed {
                    cfg.seed = s;
                }
                if let Some(w) = cli.workers {
                    cfg.workers = w;
                }
                let opts = RunOptions { out_dir: cli.out_dir, resume: cli.resume, checkpoint_interval: CHECKPOINT_INTERVAL };
                match run(&cfg, &opts) {
                    Ok(a) => {
                        println!("wrote {} ({} rows) and {}", a.csv.display(), a.rows, a.manifest.display());
                        exit::OK
                    }
                    Err(e @ RunError::Numeric(_)) => {
                        eprintln!("run failed: {e}");
                        exit::NUMERIC
                    }
                    Err(e) => {
                        eprintln!("run failed: {e}");
                        exit::NUMERIC
                    }
                }
            }
        },
    };
    ExitCode::from(code)
}
