use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qa3c::envs::EnvName;
use qa3c::experiment::{parse_config, run_eval, run_gradcheck, run_train};
use qa3c::models::Variant;
use qa3c::par::Execution;
use qa3c::{Error, Result};

#[derive(Parser)]
#[command(name = "qa3c", version, about = "Asynchronous actor-critic with variational quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an actor/critic pair from a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set lr=0.001`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Start from the parameters in this checkpoint.
        #[arg(long)]
        init_checkpoint: Option<PathBuf>,
    },
    /// Run greedy evaluation episodes of a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: EnvName,
        #[arg(long)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output path (default: eval.csv beside the checkpoint).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare adjoint, parameter-shift and finite-difference gradients.
    Gradcheck {
        #[arg(long)]
        variant: Variant,
        #[arg(long)]
        env: EnvName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            set,
            init_checkpoint,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let cfg = parse_config(&text, &set)?;
            let s = run_train(&cfg, init_checkpoint.as_deref())?;
            println!(
                "episodes={} updates={} final_ma100={:.3} best_ma100={:.3} wall_time_s={:.1}",
                s.episodes, s.updates, s.final_ma100, s.best_ma100, s.wall_time_s
            );
            println!("artifacts in {}", cfg.out_dir.display());
        }
        Command::Eval {
            checkpoint,
            env,
            episodes,
            seed,
            out,
        } => {
            let r = run_eval(&checkpoint, env, episodes, seed, out.as_deref(), Execution::default())?;
            println!("episodes={} mean_return={:.3}", r.returns.len(), r.mean_return());
            println!("wrote {}", r.csv_path.display());
        }
        Command::Gradcheck { variant, env, seed } => {
            let r = run_gradcheck(variant, env, seed)?;
            print!("{}", r.render());
            r.into_result()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
