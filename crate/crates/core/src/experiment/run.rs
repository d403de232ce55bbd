use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use crate::envs::{make_env, EnvConfig, EnvName};
use crate::error::{Error, Result};
use crate::models::checkpoint::{Checkpoint, CheckpointMeta};
use crate::models::{argmax, build_actor_critic};
use crate::par::{map_indexed, Execution};
use crate::trainer::{CsvSink, RunSummary, Trainer};

pub const EVAL_CSV_HEADER: &str = "episode,return,steps";

/// Trains according to `cfg`, writing `metrics.csv`, `config.resolved` and
/// `final.ckpt` into `cfg.out_dir`.
pub fn run_train(cfg: &RunConfig, init_checkpoint: Option<&Path>) -> Result<RunSummary> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let resolved = cfg.out_dir.join("config.resolved");
    std::fs::write(&resolved, cfg.to_resolved_string()).map_err(|e| Error::io(&resolved, e))?;

    let spec = cfg.env.spec();
    let (actor, critic) = match init_checkpoint {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            let m = &ck.meta;
            if m.env != cfg.env.name || m.variant != cfg.variant || m.n_qubits != cfg.n_qubits || m.n_layers != cfg.vqc_layers {
                return Err(Error::config(format!(
                    "checkpoint {} was written for {} {} ({} qubits, {} layers)",
                    path.display(),
                    m.env,
                    m.variant,
                    m.n_qubits,
                    m.n_layers
                )));
            }
            (ck.actor, ck.critic)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
            build_actor_critic(&spec, cfg.variant, cfg.n_qubits, cfg.vqc_layers, &mut rng)?
        }
    };

    let sink = CsvSink::create(&cfg.out_dir.join("metrics.csv"))?;
    let outcome = Trainer::new(cfg.train.clone(), cfg.env.clone(), actor, critic)
        .with_sink(Box::new(sink))
        .run()?;

    let ck = Checkpoint {
        meta: CheckpointMeta {
            env: cfg.env.name,
            variant: cfg.variant,
            n_qubits: cfg.n_qubits,
            n_layers: cfg.vqc_layers,
            seed: cfg.train.seed,
        },
        actor: outcome.actor,
        critic: outcome.critic,
    };
    ck.save(&cfg.out_dir.join("final.ckpt"))?;
    Ok(outcome.summary)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub returns: Vec<f64>,
    pub steps: Vec<usize>,
    pub csv_path: PathBuf,
}

impl EvalReport {
    pub fn mean_return(&self) -> f64 {
        self.returns.iter().sum::<f64>() / self.returns.len() as f64
    }
}

/// Runs `episodes` greedy episodes of the checkpoint's actor on `env` and
/// writes one CSV row per episode to `out` (default: `eval.csv` next to the checkpoint).
pub fn run_eval(
    checkpoint: &Path,
    env: EnvName,
    episodes: usize,
    seed: u64,
    out: Option<&Path>,
    exec: Execution,
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::usage("--episodes must be at least 1"));
    }
    let ck = Checkpoint::load(checkpoint)?;
    let env_cfg = EnvConfig::new(env);
    let spec = env_cfg.spec();
    if ck.actor.obs_dim() != spec.obs_dim || ck.actor.head_dim() != spec.n_actions {
        return Err(Error::config(format!(
            "checkpoint actor ({} inputs, {} actions) does not fit {env} ({} inputs, {} actions)",
            ck.actor.obs_dim(),
            ck.actor.head_dim(),
            spec.obs_dim,
            spec.n_actions
        )));
    }

    let actor = &ck.actor;
    let results = map_indexed(episodes, exec, |i| -> Result<(f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut e = make_env(&env_cfg)?;
        let mut obs = e.reset(&mut rng);
        let (mut ret, mut steps) = (0.0, 0);
        loop {
            let res = e.step(argmax(&actor.head(&obs)?))?;
            ret += res.reward;
            steps += 1;
            if res.done() {
                return Ok((ret, steps));
            }
            obs = res.obs;
        }
    });
    let (returns, steps): (Vec<f64>, Vec<usize>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();

    let csv_path = match out {
        Some(p) => p.to_path_buf(),
        None => checkpoint.parent().unwrap_or(Path::new(".")).join("eval.csv"),
    };
    let mut text = format!("{EVAL_CSV_HEADER}\n");
    for (i, (r, s)) in returns.iter().zip(&steps).enumerate() {
        writeln!(text, "{},{r},{s}", i + 1).expect("writing to a String");
    }
    std::fs::write(&csv_path, text).map_err(|e| Error::io(&csv_path, e))?;
    Ok(EvalReport {
        returns,
        steps,
        csv_path,
    })
}
