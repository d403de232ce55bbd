//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qa3c::envs::{
    AcrobotState, CartPole, CartPoleState, Cell, Crossing, Direction, EnvConfig, EnvName, Environment, GridState,
    Orientation, WallLine,
};
use qa3c::experiment::{gradcheck_sweep, random_policy_returns, run_train, RunConfig};
use qa3c::models::{build_actor_critic, count_params, ParamCounts, Variant};
use qa3c::par::Execution;
use qa3c::sim::{dense_unitary_oracle, oracle_expectations, run_circuit};
use qa3c::trainer::{compute_returns, EpisodeRecord, MemorySink, TrainConfig, Trainer};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Fails the outcome when `elapsed` exceeds `budget`.
fn within(o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    if elapsed <= budget {
        o
    } else {
        outcome(false, format!("{}; over the {:?} budget", o.detail, budget))
    }
}

const ENVS: [EnvName; 3] = [EnvName::Acrobot, EnvName::CartPole, EnvName::Crossing(1)];

fn table_counts(env: EnvName, variant: Variant) -> ParamCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (a, c) = build_actor_critic(&env.spec(env.default_max_steps()), variant, 8, 2, &mut rng).unwrap();
    count_params(&a, &c)
}

fn c1_parameter_table() -> Outcome {
    let quantum = [(148, 96, 244), (107, 96, 203), (2431, 96, 2527)];
    let classical = [292, 251, 2575];
    let mut ok = true;
    let mut seen = Vec::new();
    for (i, env) in ENVS.into_iter().enumerate() {
        let q = table_counts(env, Variant::Quantum);
        let c = table_counts(env, Variant::Classical);
        ok &= (q.classical, q.quantum, q.total) == quantum[i] && c.total == classical[i] && c.quantum == 0;
        seen.push(format!("{env}: q=({},{},{}) c={}", q.classical, q.quantum, q.total, c.total));
    }
    outcome(ok, seen.join("; "))
}

fn c2_gradient_agreement() -> Outcome {
    let seeds = 100;
    let mut ok = true;
    let mut worst_shift: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let mut failures = Vec::new();
    for env in ENVS {
        for variant in [Variant::Quantum, Variant::Classical] {
            let reports = gradcheck_sweep(variant, env, 1000, seeds, Execution::default()).unwrap();
            for r in &reports {
                if let Some(d) = &r.adjoint_vs_shift {
                    worst_shift = worst_shift.max(d.value);
                }
                worst_fd = worst_fd.max(r.adjoint_vs_fd.value);
                if let Some(d) = &r.shift_vs_fd {
                    worst_fd = worst_fd.max(d.value);
                }
                if !r.passed() {
                    ok = false;
                    failures.push(format!("{env}/{variant}/seed {}", r.seed));
                }
            }
        }
    }
    outcome(
        ok,
        format!(
            "{seeds} seeds x 6 pairs; max |adjoint-shift| {worst_shift:.2e}, max rel vs FD {worst_fd:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn c3_simulator_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut max_exp, mut max_unit): (f64, f64) = (0.0, 0.0);
    for i in 0..500 {
        let n = 1 + i % 4;
        let len = rng.gen_range(1..=24);
        let (p, angles) = common::random_program(&mut rng, n, len);
        let fast = run_circuit(&p, &angles).unwrap();
        let dense = oracle_expectations(&p, &angles).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            max_exp = max_exp.max((a - b).abs());
        }
        let u = dense_unitary_oracle(&p, &angles).unwrap();
        let dim = 1 << n;
        let e = (u.adjoint() * &u - DMatrix::<Complex64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        max_unit = max_unit.max(e);
    }
    outcome(
        max_exp < 1e-10 && max_unit < 1e-10,
        format!("500 programs; max |Δ⟨Z⟩| {max_exp:.1e}, max |U†U−I| {max_unit:.1e}"),
    )
}

fn c4_return_recursion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    for _ in 0..100_000 {
        let len = rng.gen_range(1..=30);
        let rewards: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let gamma = rng.gen_range(0.0..=1.0);
        let boot = rng.gen_range(-50.0..50.0);
        let r = compute_returns(&rewards, boot, gamma);
        for i in 0..len {
            let next = if i + 1 < len { r[i + 1] } else { boot };
            if r[i] != rewards[i] + gamma * next {
                violations += 1;
            }
        }
    }
    let hand = compute_returns(&[-1.0, -1.0, -1.0], 0.0, 0.9);
    let hand_ok = hand
        .iter()
        .zip([-2.71, -1.9, -1.0])
        .all(|(a, b)| (a - b).abs() < 1e-12);
    outcome(
        violations == 0 && hand_ok,
        format!("1e5 sequences, {violations} recursion violations; hand case {hand:?}"),
    )
}

fn c5_environment_properties() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let mut unsolvable = 0;
        for _ in 0..10_000 {
            let s = GridState::generate(&mut rng, n).unwrap();
            let wall = std::array::from_fn(|r| std::array::from_fn(|c| s.grid[r][c] == Cell::Wall));
            if !common::flood_reachable(&wall, (1, 1), (7, 7)) || s.shortest_path_len().is_none() {
                unsolvable += 1;
            }
        }
        ok &= unsolvable == 0;
        notes.push(format!("N={n}: {unsolvable}/10000 unsolvable"));
    }

    let mut env = Crossing::new(1, 324).unwrap();
    let mut base = GridState::from_walls(&[WallLine { orientation: Orientation::Vertical, at: 2, gap: 7 }]);
    base.agent_pos = (7, 6);
    base.agent_dir = Direction::South;
    let mut worst: f64 = 0.0;
    for k in 0..324 {
        let mut s = base.clone();
        s.step_count = k;
        env.set_state(s);
        let r = env.step(2).unwrap();
        ok &= r.terminal;
        worst = worst.max((r.reward - (1.0 - 0.9 * ((k + 1) as f64 / 324.0))).abs());
    }
    ok &= worst < 1e-12;
    notes.push(format!("goal reward max err {worst:.1e}"));

    let pi = std::f64::consts::PI;
    let hand = [
        (0.0, 0.0, false),
        (pi, 0.0, true),
        (pi / 2.0, 0.0, false),
        (2.0, 1.0, true),
        (pi, -pi / 2.0, false),
        (pi - 0.5, 0.5, true),
        (1.0, 1.0, false),
    ];
    for (t1, t2, want) in hand {
        let s = AcrobotState { theta1: t1, theta2: t2, theta1_dot: 0.0, theta2_dot: 0.0 };
        ok &= s.is_terminal() == want && s.is_terminal() == (-f64::cos(t1) - f64::cos(t1 + t2) > 1.0);
    }
    notes.push(format!("acrobot {} hand states", hand.len()));

    // One Euler step from rest with F = +10. The force term F/M is 100/11 = 9.0909…;
    // with the pole coupling θ̈ = −600/41 the cart acceleration is 4400/451.
    let force_term: f64 = 10.0 / 1.1;
    let theta_acc = -force_term / (0.5 * (4.0 / 3.0 - 0.1 / 1.1));
    let x_acc = force_term - 0.05 * theta_acc / 1.1;
    let mut cp = CartPole::new(200, 12.0);
    cp.set_state(CartPoleState::default());
    cp.step(1).unwrap();
    let s = cp.state();
    let cart_ok = (force_term - 9.090_909_090_909_09).abs() < 1e-12
        && (x_acc - 4400.0 / 451.0).abs() < 1e-12
        && (s.x_dot - 0.02 * x_acc).abs() < 1e-12
        && (s.theta_dot - 0.02 * theta_acc).abs() < 1e-12
        && s.x == 0.0;
    ok &= cart_ok;
    notes.push(format!(
        "cart-pole F/M = {force_term:.6}, x_acc = {:.6} (x_dot {:.6})",
        s.x_dot / 0.02,
        s.x_dot
    ));
    outcome(ok, notes.join("; "))
}

fn strip_wall_clock(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn c6_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let mut cfg = RunConfig::new(EnvName::CartPole, Variant::Quantum, 50);
        cfg.train.workers = 1;
        cfg.train.seed = 17;
        cfg.out_dir = dir.path().join(name);
        run_train(&cfg, None).unwrap();
        texts.push(std::fs::read_to_string(cfg.out_dir.join("metrics.csv")).unwrap());
    }
    let same = strip_wall_clock(&texts[0]) == strip_wall_clock(&texts[1]);
    outcome(
        same && texts[0].lines().count() == 51,
        format!("quantum cart-pole, W=1, 50 episodes; metrics identical: {same}"),
    )
}

fn train_records(env: EnvName, variant: Variant, cfg: TrainConfig) -> (Vec<EpisodeRecord>, qa3c::trainer::TrainOutcome) {
    let env = EnvConfig::new(env);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (a, c) = build_actor_critic(&env.spec(), variant, 8, 2, &mut rng).unwrap();
    let sink = MemorySink::new();
    let out = Trainer::new(cfg, env, a, c)
        .with_sink(Box::new(sink.clone()))
        .run()
        .unwrap();
    (sink.records(), out)
}

fn learning_config(total: u64, seed: u64, target: f64) -> TrainConfig {
    TrainConfig {
        workers: 8,
        total_episodes: total,
        seed,
        stop_at_ma100: Some(target),
        ..TrainConfig::default()
    }
}

/// First episode at which the full-window moving average reached `target`.
fn reached(records: &[EpisodeRecord], target: f64) -> Option<u64> {
    records
        .iter()
        .find(|r| r.global_episode >= 100 && r.ma100 >= target)
        .map(|r| r.global_episode)
}

fn c7_classical_cartpole() -> Outcome {
    let (rec, out) = train_records(EnvName::CartPole, Variant::Classical, learning_config(20_000, 7, 150.0));
    let hit = reached(&rec, 150.0);
    outcome(
        hit.is_some(),
        format!(
            "W=8, budget 20000: ma100 >= 150 at episode {} (best {:.1}, {:.0} s)",
            hit.map_or("never".into(), |e| e.to_string()),
            out.summary.best_ma100,
            out.summary.wall_time_s
        ),
    )
}

fn random_ma100(env: EnvName, seed: u64) -> f64 {
    let r = random_policy_returns(&EnvConfig::new(env), 100, seed, Execution::default()).unwrap();
    r.iter().sum::<f64>() / r.len() as f64
}

/// Threshold check with the positive-trend fallback.
fn quantum_learning(env: EnvName, budget: u64, seed: u64, target: f64) -> (bool, String) {
    let (rec, out) = train_records(env, Variant::Quantum, learning_config(budget, seed, target));
    if let Some(ep) = reached(&rec, target) {
        return (true, format!("ma100 >= {target:.1} at episode {ep} ({:.0} s)", out.summary.wall_time_s));
    }
    let series: Vec<f64> = rec.iter().skip(99).map(|r| r.ma100).collect();
    if series.len() < 2 {
        return (false, "run too short for a trend".into());
    }
    let slope = common::ls_slope(&series);
    let gain = series[series.len() - 1] - series[0];
    (
        slope > 0.0 && gain >= 30.0,
        format!(
            "threshold {target:.1} not reached (best {:.1}); trend slope {slope:.2e}, gain {gain:.1}",
            out.summary.best_ma100
        ),
    )
}

fn c8_quantum_learning() -> Outcome {
    let seed = 8;
    let cart_random = random_ma100(EnvName::CartPole, seed);
    let (a_ok, a) = quantum_learning(EnvName::CartPole, 30_000, seed, 120.0);
    let acro_random = random_ma100(EnvName::Acrobot, seed);
    let (b_ok, b) = quantum_learning(EnvName::Acrobot, 20_000, seed, acro_random + 100.0);
    outcome(
        a_ok && b_ok,
        format!("(a) cart-pole, random {cart_random:.1}: {a}; (b) acrobot, random {acro_random:.1}: {b}"),
    )
}

fn c9_serializability() -> Outcome {
    let env = EnvConfig::new(EnvName::CartPole);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (a, c) = build_actor_critic(&env.spec(), Variant::Classical, 8, 2, &mut rng).unwrap();
    let cfg = TrainConfig {
        workers: 8,
        total_episodes: 3000,
        seed: 9,
        ..TrainConfig::default()
    };
    let out = Trainer::new(cfg, env, a, c).audited().run().unwrap();
    let audit = out.audit.unwrap();
    outcome(
        audit.torn == 0 && audit.updates >= 10_000,
        format!(
            "{} updates, {} snapshots checked, {} torn",
            audit.updates, audit.snapshots, audit.torn
        ),
    )
}

fn main() -> ExitCode {
    type Check = (u32, &'static str, fn() -> Outcome, Option<u64>);
    let checks: [Check; 9] = [
        (1, "parameter counts", c1_parameter_table, Some(1)),
        (2, "gradient triple agreement", c2_gradient_agreement, Some(300)),
        (3, "simulator vs dense oracle", c3_simulator_oracle, Some(60)),
        (4, "return recursion", c4_return_recursion, Some(10)),
        (5, "environment properties", c5_environment_properties, Some(120)),
        (6, "single-worker determinism", c6_determinism, Some(60)),
        (7, "classical cart-pole learning", c7_classical_cartpole, None),
        (8, "quantum learning", c8_quantum_learning, None),
        (9, "no torn snapshots", c9_serializability, Some(300)),
    ];
    let only: Vec<u32> = std::env::var("QA3C_CRITERIA")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();

    let mut failed = 0;
    for (id, name, check, budget) in checks {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let o = match result {
            Ok(o) => match budget {
                Some(s) => within(o, elapsed, Duration::from_secs(s)),
                None => o,
            },
            Err(_) => outcome(false, "panicked"),
        };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id} ({name}): {} [{:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
