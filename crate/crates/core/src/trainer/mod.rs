//! Asynchronous advantage actor-critic over a shared parameter store.
//!
//! Each worker owns an environment, an RNG stream and private copies of the
//! actor and critic. It steps the policy, and every `sync_interval` steps (or
//! at episode end) turns its rollout into gradients, applies them to the
//! global store with shared-moment Adam and pulls the fresh parameters back.

pub mod metrics;
mod returns;
mod store;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use metrics::{CsvSink, EpisodeRecord, EpisodeSink, MemorySink, MovingAverage};
pub use returns::{accumulate_gradients, compute_returns, LossConfig, RolloutBuffer};
pub use store::{adam_step, AdamConfig, AdamMoments, AuditReport, GlobalStore, Snapshot};

use crate::envs::{make_env, EnvConfig, Environment};
use crate::error::{Error, Result};
use crate::models::{sample_action, HybridModel};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Steps between synchronisations with the global store.
    pub sync_interval: usize,
    pub gamma: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub workers: usize,
    pub total_episodes: u64,
    pub seed: u64,
    pub entropy_coef: f64,
    pub max_grad_norm: Option<f64>,
    /// Stop once a full-window moving average reaches this value.
    pub stop_at_ma100: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            sync_interval: 5,
            gamma: 0.9,
            lr: 1e-4,
            beta1: 0.92,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            workers: default_workers(),
            total_episodes: 0,
            seed: 0,
            entropy_coef: 0.0,
            max_grad_norm: None,
            stop_at_ma100: None,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::config("workers must be at least 1"));
        }
        if self.sync_interval == 0 {
            return Err(Error::config("sync_interval must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::config("lr must be positive and beta1, beta2 in [0, 1)"));
        }
        if !(self.adam_epsilon > 0.0) {
            return Err(Error::config("adam_epsilon must be positive"));
        }
        if let Some(c) = self.max_grad_norm {
            if !(c > 0.0) {
                return Err(Error::config("max_grad_norm must be positive"));
            }
        }
        if let Some(t) = self.stop_at_ma100 {
            if !t.is_finite() {
                return Err(Error::config("stop_at_ma100 must be finite"));
            }
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.adam_epsilon,
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            gamma: self.gamma,
            entropy_coef: self.entropy_coef,
        }
    }

    /// RNG for worker `id`: the run seed with a per-worker stream.
    pub fn worker_rng(&self, id: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id as u64 + 1);
        rng
    }
}

fn clip(grad: &mut [f64], max_norm: Option<f64>) {
    if let Some(c) = max_norm {
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > c {
            let k = c / norm;
            grad.iter_mut().for_each(|g| *g *= k);
        }
    }
}

/// The per-worker training loop. Runs until the store hands out no more episodes.
pub fn worker_loop(
    worker_id: usize,
    store: &GlobalStore,
    cfg: &TrainConfig,
    env: &mut dyn Environment,
    rng: &mut ChaCha8Rng,
    actor_template: &HybridModel,
    critic_template: &HybridModel,
) -> Result<()> {
    let mut actor = actor_template.clone();
    let mut critic = critic_template.clone();
    let adam = cfg.adam();
    let loss = cfg.loss();
    let mut buffer = RolloutBuffer::default();

    let pull = |actor: &mut HybridModel, critic: &mut HybridModel| -> Result<()> {
        let snap = store.snapshot();
        actor.set_flat(&snap.actor)?;
        critic.set_flat(&snap.critic)
    };
    pull(&mut actor, &mut critic)?;

    while store.claim_episode() {
        let mut obs = env.reset(rng);
        let mut steps = 0;
        let mut ret = 0.0;
        loop {
            if store.stopped() {
                return Ok(());
            }
            let probs = actor.policy(&obs)?;
            let action = sample_action(&probs, rng)?;
            let res = env.step(action)?;
            steps += 1;
            ret += res.reward;
            buffer.push(std::mem::take(&mut obs), action, res.reward);

            if buffer.len() >= cfg.sync_interval || res.done() {
                buffer.bootstrap = if res.terminal { 0.0 } else { critic.value(&res.obs)? };
                let (g_actor, g_critic) = accumulate_gradients(&buffer, &actor, &critic, loss)?;
                let mut da = actor.flatten_grad(&g_actor)?;
                let mut dc = critic.flatten_grad(&g_critic)?;
                clip(&mut da, cfg.max_grad_norm);
                clip(&mut dc, cfg.max_grad_norm);
                store.adam_apply(&da, &dc, &adam)?;
                pull(&mut actor, &mut critic)?;
                buffer.clear();
            }
            let done = res.done();
            obs = res.obs;
            if done {
                break;
            }
        }
        store.record_episode(worker_id, steps, ret)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub episodes: u64,
    pub updates: u64,
    pub final_ma100: f64,
    pub best_ma100: f64,
    pub wall_time_s: f64,
    /// Whether `stop_at_ma100` ended the run early.
    pub reached_target: bool,
}

pub struct TrainOutcome {
    pub summary: RunSummary,
    pub actor: HybridModel,
    pub critic: HybridModel,
    pub audit: Option<AuditReport>,
}

/// Runs a full training job with `cfg.workers` threads.
pub struct Trainer {
    cfg: TrainConfig,
    env: EnvConfig,
    actor: HybridModel,
    critic: HybridModel,
    sink: Box<dyn EpisodeSink>,
    audited: bool,
}

impl Trainer {
    pub fn new(cfg: TrainConfig, env: EnvConfig, actor: HybridModel, critic: HybridModel) -> Self {
        Self {
            cfg,
            env,
            actor,
            critic,
            sink: Box::new(MemorySink::new()),
            audited: false,
        }
    }

    pub fn with_sink(mut self, sink: Box<dyn EpisodeSink>) -> Self {
        self.sink = sink;
        self
    }

    /// Records fingerprints of every update and snapshot (see [`AuditReport`]).
    pub fn audited(mut self) -> Self {
        self.audited = true;
        self
    }

    pub fn run(self) -> Result<TrainOutcome> {
        let Trainer {
            cfg,
            env,
            mut actor,
            mut critic,
            sink,
            audited,
        } = self;
        cfg.validate()?;
        let spec = env.spec();
        if actor.obs_dim() != spec.obs_dim || actor.head_dim() != spec.n_actions || critic.obs_dim() != spec.obs_dim || critic.head_dim() != 1 {
            return Err(Error::config(format!(
                "models do not match {} (obs {}, actions {})",
                spec.name, spec.obs_dim, spec.n_actions
            )));
        }
        let mut envs = (0..cfg.workers)
            .map(|_| make_env(&env))
            .collect::<Result<Vec<_>>>()?;

        let mut store = GlobalStore::new(actor.flat(), critic.flat(), cfg.total_episodes, sink, audited);
        if let Some(target) = cfg.stop_at_ma100 {
            store = store.with_stop_target(target);
        }
        let store = Arc::new(store);
        let results: Vec<Result<()>> = std::thread::scope(|scope| {
            let handles: Vec<_> = envs
                .iter_mut()
                .enumerate()
                .map(|(id, env)| {
                    let store = Arc::clone(&store);
                    let (cfg, actor, critic) = (&cfg, &actor, &critic);
                    scope.spawn(move || {
                        let mut rng = cfg.worker_rng(id);
                        let r = worker_loop(id, &store, cfg, env.as_mut(), &mut rng, actor, critic);
                        if r.is_err() {
                            store.stop();
                        }
                        r
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::usage("worker thread panicked"))))
                .collect()
        });
        for r in results {
            r?;
        }

        let (final_ma100, best_ma100, wall_time_s) = store.finish()?;
        let snap = store.snapshot();
        actor.set_flat(&snap.actor)?;
        critic.set_flat(&snap.critic)?;
        Ok(TrainOutcome {
            summary: RunSummary {
                episodes: store.episodes(),
                updates: snap.version,
                final_ma100,
                best_ma100,
                wall_time_s,
                reached_target: store.reached_target(),
            },
            actor,
            critic,
            audit: store.audit_report(),
        })
    }
}
