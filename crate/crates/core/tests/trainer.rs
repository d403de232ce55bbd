use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qa3c::envs::{EnvConfig, EnvName};
use qa3c::models::{build_actor_critic, Variant};
use qa3c::trainer::{EpisodeRecord, MemorySink, MovingAverage, TrainConfig, Trainer};

fn config(workers: usize, episodes: u64, seed: u64) -> TrainConfig {
    TrainConfig {
        workers,
        total_episodes: episodes,
        seed,
        ..TrainConfig::default()
    }
}

fn train(env: EnvName, variant: Variant, cfg: TrainConfig, audited: bool) -> (Vec<EpisodeRecord>, qa3c::trainer::TrainOutcome) {
    let env = EnvConfig::new(env);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (a, c) = build_actor_critic(&env.spec(), variant, 4, 1, &mut rng).unwrap();
    let sink = MemorySink::new();
    let mut t = Trainer::new(cfg, env, a, c).with_sink(Box::new(sink.clone()));
    if audited {
        t = t.audited();
    }
    let out = t.run().unwrap();
    (sink.records(), out)
}

fn strip_clock(r: &[EpisodeRecord]) -> Vec<(u64, usize, usize, u64, u64)> {
    r.iter()
        .map(|r| (r.global_episode, r.worker_id, r.steps, r.ret.to_bits(), r.ma100.to_bits()))
        .collect()
}

#[test]
fn single_worker_runs_are_reproducible() {
    let (a, oa) = train(EnvName::CartPole, Variant::Quantum, config(1, 20, 5), false);
    let (b, ob) = train(EnvName::CartPole, Variant::Quantum, config(1, 20, 5), false);
    assert_eq!(strip_clock(&a), strip_clock(&b));
    assert_eq!(oa.actor.flat(), ob.actor.flat());
    let (c, _) = train(EnvName::CartPole, Variant::Quantum, config(1, 20, 6), false);
    assert_ne!(strip_clock(&a), strip_clock(&c));
}

#[test]
fn exact_episode_budget() {
    let (r, out) = train(EnvName::Acrobot, Variant::Classical, config(1, 3, 0), false);
    assert_eq!(r.len(), 3);
    assert_eq!(out.summary.episodes, 3);
    let (r, out) = train(EnvName::CartPole, Variant::Classical, config(4, 0, 0), false);
    assert!(r.is_empty());
    assert_eq!(out.summary.updates, 0);
}

#[test]
fn parameters_untouched_without_episodes() {
    let env = EnvConfig::new(EnvName::CartPole);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (a, c) = build_actor_critic(&env.spec(), Variant::Quantum, 4, 1, &mut rng).unwrap();
    let out = Trainer::new(config(2, 0, 1), env, a.clone(), c.clone()).run().unwrap();
    assert_eq!(out.actor, a);
    assert_eq!(out.critic, c);
}

#[test]
fn many_workers_emit_ordered_records_with_consistent_moving_average() {
    let (r, out) = train(EnvName::CartPole, Variant::Classical, config(8, 300, 3), true);
    assert_eq!(r.len(), 300);
    let mut ma = MovingAverage::default();
    for (i, rec) in r.iter().enumerate() {
        assert_eq!(rec.global_episode, i as u64 + 1);
        assert!(rec.worker_id < 8);
        assert_eq!(rec.ret, rec.steps as f64);
        assert_eq!(rec.ma100, ma.push(rec.ret));
    }
    assert!(r.windows(2).all(|w| w[0].wall_clock_s <= w[1].wall_clock_s));
    let audit = out.audit.unwrap();
    assert_eq!(audit.torn, 0);
    assert_eq!(audit.updates, out.summary.updates);
    assert!(audit.snapshots as u64 > audit.updates);
    // every step belongs to exactly one rollout of at most five steps
    let steps: usize = r.iter().map(|r| r.steps).sum();
    assert!(out.summary.updates as usize >= steps / 5);
}

#[test]
fn invalid_configs_are_rejected() {
    let env = EnvConfig::new(EnvName::CartPole);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (a, c) = build_actor_critic(&env.spec(), Variant::Classical, 4, 1, &mut rng).unwrap();
    let mut cfg = config(0, 1, 0);
    assert!(Trainer::new(cfg.clone(), env.clone(), a.clone(), c.clone()).run().is_err());
    cfg.workers = 1;
    cfg.gamma = 0.0;
    assert!(Trainer::new(cfg, env.clone(), a.clone(), c.clone()).run().is_err());
    // models built for another environment
    let acro = EnvConfig::new(EnvName::Acrobot);
    assert!(Trainer::new(config(1, 1, 0), acro, a, c).run().is_err());
}
