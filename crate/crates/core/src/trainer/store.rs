//! Global parameter store shared by all workers.
//!
//! Parameters, Adam moments and the Adam step counter live behind one
//! `RwLock`: snapshots take the read lock and copy, updates take the write
//! lock, so every snapshot equals the state after a whole number of updates.
//! Episode emission is serialised by a separate mutex that also owns the
//! metrics sink and the episode counter.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::Instant;

use super::metrics::{EpisodeRecord, EpisodeSink, MovingAverage, MA_WINDOW};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

/// First and second moment estimates for one parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamMoments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamMoments {
    pub fn zeros(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One bias-corrected Adam step at step number `t` (1-based).
pub fn adam_step(
    params: &mut [f64],
    moments: &mut AdamMoments,
    grad: &[f64],
    t: u64,
    cfg: &AdamConfig,
) -> Result<()> {
    if params.len() != grad.len() || moments.m.len() != grad.len() || moments.v.len() != grad.len() {
        return Err(Error::config(format!(
            "adam: {} parameters, {} gradients, {} moments",
            params.len(),
            grad.len(),
            moments.m.len()
        )));
    }
    let c1 = 1.0 - cfg.beta1.powi(t as i32);
    let c2 = 1.0 - cfg.beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grad[i];
        moments.m[i] = cfg.beta1 * moments.m[i] + (1.0 - cfg.beta1) * g;
        moments.v[i] = cfg.beta2 * moments.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = moments.m[i] / c1;
        let v_hat = moments.v[i] / c2;
        params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

/// A consistent copy of the global parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    /// Number of updates applied before this copy was taken.
    pub version: u64,
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
}

#[derive(Debug)]
struct Shared {
    actor: Vec<f64>,
    critic: Vec<f64>,
    actor_moments: AdamMoments,
    critic_moments: AdamMoments,
    t_adam: u64,
}

struct EpisodeLog {
    emitted: u64,
    ma: MovingAverage,
    best_ma: f64,
    sink: Box<dyn EpisodeSink>,
    start: Instant,
}

/// Fingerprints of every published state and every snapshot taken, for
/// checking that no worker ever observed a partially applied update.
#[derive(Debug, Default)]
struct Audit {
    states: Vec<u64>,
    snapshots: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub updates: u64,
    pub snapshots: usize,
    /// Snapshots whose contents match no state produced by whole updates.
    pub torn: usize,
}

fn fingerprint(actor: &[f64], critic: &[f64]) -> u64 {
    let mut h = DefaultHasher::new();
    for x in actor.iter().chain(critic) {
        x.to_bits().hash(&mut h);
    }
    actor.len().hash(&mut h);
    h.finish()
}

pub struct GlobalStore {
    shared: RwLock<Shared>,
    total_episodes: u64,
    claimed: AtomicU64,
    emitted: AtomicU64,
    stop: AtomicBool,
    stop_target: Option<f64>,
    reached_target: AtomicBool,
    log: Mutex<EpisodeLog>,
    audit: Option<Mutex<Audit>>,
}

impl GlobalStore {
    pub fn new(
        actor: Vec<f64>,
        critic: Vec<f64>,
        total_episodes: u64,
        sink: Box<dyn EpisodeSink>,
        audited: bool,
    ) -> Self {
        let audit = audited.then(|| {
            Mutex::new(Audit {
                states: vec![fingerprint(&actor, &critic)],
                snapshots: Vec::new(),
            })
        });
        Self {
            shared: RwLock::new(Shared {
                actor_moments: AdamMoments::zeros(actor.len()),
                critic_moments: AdamMoments::zeros(critic.len()),
                actor,
                critic,
                t_adam: 0,
            }),
            total_episodes,
            claimed: AtomicU64::new(0),
            emitted: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            stop_target: None,
            reached_target: AtomicBool::new(false),
            log: Mutex::new(EpisodeLog {
                emitted: 0,
                ma: MovingAverage::default(),
                best_ma: f64::NEG_INFINITY,
                sink,
                start: Instant::now(),
            }),
            audit,
        }
    }

    /// Stops the run once the moving average over a full window reaches `target`.
    pub fn with_stop_target(mut self, target: f64) -> Self {
        self.stop_target = Some(target);
        self
    }

    pub fn reached_target(&self) -> bool {
        self.reached_target.load(Ordering::SeqCst)
    }

    pub fn snapshot(&self) -> Snapshot {
        let s = self.shared.read().expect("store poisoned");
        let snap = Snapshot {
            version: s.t_adam,
            actor: s.actor.clone(),
            critic: s.critic.clone(),
        };
        drop(s);
        if let Some(audit) = &self.audit {
            let fp = fingerprint(&snap.actor, &snap.critic);
            audit.lock().expect("audit poisoned").snapshots.push((snap.version, fp));
        }
        snap
    }

    /// Applies one shared-moment Adam step to both parameter sets under exclusion.
    /// Returns the new update count.
    pub fn adam_apply(&self, d_actor: &[f64], d_critic: &[f64], cfg: &AdamConfig) -> Result<u64> {
        let mut s = self.shared.write().expect("store poisoned");
        if d_actor.len() != s.actor.len() || d_critic.len() != s.critic.len() {
            return Err(Error::config("gradient shapes do not match the global parameters"));
        }
        let t = s.t_adam + 1;
        let Shared {
            actor,
            critic,
            actor_moments,
            critic_moments,
            ..
        } = &mut *s;
        adam_step(actor, actor_moments, d_actor, t, cfg)?;
        adam_step(critic, critic_moments, d_critic, t, cfg)?;
        s.t_adam = t;
        if let Some(audit) = &self.audit {
            let fp = fingerprint(&s.actor, &s.critic);
            audit.lock().expect("audit poisoned").states.push(fp);
        }
        Ok(t)
    }

    pub fn t_adam(&self) -> u64 {
        self.shared.read().expect("store poisoned").t_adam
    }

    /// Reserves the next episode; false once `total_episodes` have been handed out
    /// or the run was stopped.
    pub fn claim_episode(&self) -> bool {
        if self.stopped() {
            return false;
        }
        self.claimed.fetch_add(1, Ordering::SeqCst) < self.total_episodes
    }

    /// Emits a finished episode; assigns its global index and moving average.
    pub fn record_episode(&self, worker_id: usize, steps: usize, ret: f64) -> Result<EpisodeRecord> {
        let mut log = self.log.lock().expect("episode log poisoned");
        log.emitted += 1;
        let ma100 = log.ma.push(ret);
        log.best_ma = log.best_ma.max(ma100);
        let rec = EpisodeRecord {
            global_episode: log.emitted,
            worker_id,
            steps,
            ret,
            ma100,
            wall_clock_s: log.start.elapsed().as_secs_f64(),
        };
        log.sink.emit(&rec)?;
        self.emitted.store(log.emitted, Ordering::SeqCst);
        if let Some(target) = self.stop_target {
            if log.emitted >= MA_WINDOW as u64 && ma100 >= target {
                self.reached_target.store(true, Ordering::SeqCst);
                self.stop();
            }
        }
        Ok(rec)
    }

    /// Global episode counter T (number of emitted records).
    pub fn episodes(&self) -> u64 {
        self.emitted.load(Ordering::SeqCst)
    }

    pub fn total_episodes(&self) -> u64 {
        self.total_episodes
    }

    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn stopped(&self) -> bool {
        self.stop.load(Ordering::SeqCst)
    }

    pub(crate) fn finish(&self) -> Result<(f64, f64, f64)> {
        let mut log = self.log.lock().expect("episode log poisoned");
        log.sink.flush()?;
        Ok((log.ma.mean(), log.best_ma, log.start.elapsed().as_secs_f64()))
    }

    pub fn audit_report(&self) -> Option<AuditReport> {
        let audit = self.audit.as_ref()?.lock().expect("audit poisoned");
        let torn = audit
            .snapshots
            .iter()
            .filter(|(version, fp)| audit.states.get(*version as usize) != Some(fp))
            .count();
        Some(AuditReport {
            updates: audit.states.len() as u64 - 1,
            snapshots: audit.snapshots.len(),
            torn,
        })
    }
}
