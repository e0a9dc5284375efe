use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use sshg_cli::{run, CliError, RunConfig, RunOutput};

#[derive(Parser)]
#[command(name = "sshg", version, about = "Variational solver for the super sinh-Gordon system on flat spin tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configurations.
    Solve {
        /// JSON run configuration; repeat for a batch.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Override the seed of every configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (falls back to SSHG_THREADS, then all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory; batch runs go to DIR/<config stem>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("SSHG_THREADS") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| CliError::Config {
            field: "SSHG_THREADS".into(),
            message: format!("expected a thread count, got {s:?}"),
        }),
        Err(_) => Ok(None),
    }
}

fn prepare(paths: &[PathBuf], seed: Option<u64>, out: Option<&PathBuf>) -> Result<Vec<RunConfig>, CliError> {
    let mut configs = Vec::with_capacity(paths.len());
    for p in paths {
        let mut c = RunConfig::load(p)?;
        if let Some(s) = seed {
            c.seed = s;
        }
        if let Some(dir) = out {
            c.output_dir = if paths.len() > 1 {
                dir.join(p.file_stem().unwrap_or_default())
            } else {
                dir.clone()
            };
        }
        c.validate()?;
        configs.push(c);
    }
    for (i, c) in configs.iter().enumerate() {
        if configs[..i].iter().any(|o| o.output_dir == c.output_dir) {
            return Err(CliError::Config {
                field: "output_dir".into(),
                message: format!("{} is shared by several batch entries", c.output_dir.display()),
            });
        }
    }
    Ok(configs)
}

fn report(path: &PathBuf, result: &Result<RunOutput, CliError>) -> i32 {
    match result {
        Ok(out) => {
            let levels = [("c1", out.levels.c1), ("c2", out.levels.c2)]
                .iter()
                .filter_map(|(n, v)| v.map(|v| format!(" {n}={v:.10}")))
                .collect::<String>();
            let status = if out.converged { "ok" } else { "flagged" };
            println!(
                "{}: {status}{levels} -> {}",
                path.display(),
                out.config.output_dir.join(sshg_cli::run::OUTPUT_FILE).display()
            );
            out.exit_code()
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Solve {
        configs,
        seed,
        threads,
        out,
    } = cli.command;
    let setup = thread_count(threads).and_then(|t| Ok((t, prepare(&configs, seed, out.as_ref())?)));
    let (threads, runs) = match setup {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let results: Vec<Result<RunOutput, CliError>> = pool.install(|| runs.par_iter().map(run).collect());
    let code = configs
        .iter()
        .zip(&results)
        .map(|(p, r)| report(p, r))
        .find(|&c| c != 0)
        .unwrap_or(0);
    ExitCode::from(code as u8)
}
