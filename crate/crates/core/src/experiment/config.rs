//! `key = value` run configuration files.

use std::collections::HashMap;
use std::path::PathBuf;

use crate::envs::{EnvConfig, EnvName};
use crate::error::{Error, Result};
use crate::models::Variant;
use crate::trainer::{default_workers, TrainConfig};

const KEYS: &[&str] = &[
    "env",
    "variant",
    "total_episodes",
    "sync_interval",
    "gamma",
    "lr",
    "beta1",
    "beta2",
    "adam_epsilon",
    "workers",
    "seed",
    "entropy_coef",
    "max_grad_norm",
    "n_qubits",
    "vqc_layers",
    "max_steps_per_episode",
    "out_dir",
    "cartpole_angle_limit_deg",
    "stop_at_ma100",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub variant: Variant,
    pub train: TrainConfig,
    pub n_qubits: usize,
    pub vqc_layers: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// A config with every default filled in.
    pub fn new(env: EnvName, variant: Variant, total_episodes: u64) -> Self {
        Self {
            env: EnvConfig::new(env),
            variant,
            train: TrainConfig {
                total_episodes,
                ..TrainConfig::default()
            },
            n_qubits: 8,
            vqc_layers: 2,
            out_dir: PathBuf::from("runs"),
        }
    }

    /// Every key with its resolved value, one `key = value` line each.
    pub fn to_resolved_string(&self) -> String {
        let t = &self.train;
        let lines = [
            ("env", self.env.name.to_string()),
            ("variant", self.variant.to_string()),
            ("total_episodes", t.total_episodes.to_string()),
            ("sync_interval", t.sync_interval.to_string()),
            ("gamma", t.gamma.to_string()),
            ("lr", t.lr.to_string()),
            ("beta1", t.beta1.to_string()),
            ("beta2", t.beta2.to_string()),
            ("adam_epsilon", t.adam_epsilon.to_string()),
            ("workers", t.workers.to_string()),
            ("seed", t.seed.to_string()),
            ("entropy_coef", t.entropy_coef.to_string()),
            (
                "max_grad_norm",
                t.max_grad_norm.map_or_else(|| "none".to_string(), |v| v.to_string()),
            ),
            ("n_qubits", self.n_qubits.to_string()),
            ("vqc_layers", self.vqc_layers.to_string()),
            ("max_steps_per_episode", self.env.max_steps.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("cartpole_angle_limit_deg", self.env.cartpole_angle_limit_deg.to_string()),
            (
                "stop_at_ma100",
                t.stop_at_ma100.map_or_else(|| "none".to_string(), |v| v.to_string()),
            ),
        ];
        let mut s = String::new();
        for (k, v) in lines {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}

struct Entry {
    value: String,
    line: usize,
}

fn key_err(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::ConfigKey {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Parses a configuration file and applies `key=value` overrides on top.
/// Override errors report line 0.
pub fn parse_config<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<RunConfig> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = split_pair(content)
            .ok_or_else(|| key_err(content, line, "expected `key = value`"))?;
        if !KEYS.contains(&key) {
            return Err(key_err(key, line, "unknown key"));
        }
        if entries.contains_key(key) {
            return Err(key_err(key, line, "duplicate key"));
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    for ov in overrides {
        let ov = ov.as_ref();
        let (key, value) =
            split_pair(ov).ok_or_else(|| key_err(ov, 0, "override must look like key=value"))?;
        if !KEYS.contains(&key) {
            return Err(key_err(key, 0, "unknown key"));
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: 0,
            },
        );
    }

    let required = |k: &str| -> Result<&Entry> {
        entries
            .get(k)
            .ok_or_else(|| key_err(k, 0, "missing required key"))
    };
    fn parse<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T> {
        e.value
            .parse()
            .map_err(|_| key_err(key, e.line, format!("cannot parse `{}`", e.value)))
    }

    let env_e = required("env")?;
    let env: EnvName = env_e
        .value
        .parse()
        .map_err(|_| key_err("env", env_e.line, format!("unknown environment `{}`", env_e.value)))?;
    let var_e = required("variant")?;
    let variant: Variant = var_e
        .value
        .parse()
        .map_err(|_| key_err("variant", var_e.line, format!("unknown variant `{}`", var_e.value)))?;
    let total: u64 = parse("total_episodes", required("total_episodes")?)?;

    let mut cfg = RunConfig::new(env, variant, total);
    for (key, e) in &entries {
        let k = key.as_str();
        let t = &mut cfg.train;
        match k {
            "env" | "variant" | "total_episodes" => {}
            "sync_interval" => t.sync_interval = parse(k, e)?,
            "gamma" => t.gamma = parse(k, e)?,
            "lr" => t.lr = parse(k, e)?,
            "beta1" => t.beta1 = parse(k, e)?,
            "beta2" => t.beta2 = parse(k, e)?,
            "adam_epsilon" => t.adam_epsilon = parse(k, e)?,
            "workers" => {
                t.workers = if e.value == "auto" { default_workers() } else { parse(k, e)? }
            }
            "seed" => t.seed = parse(k, e)?,
            "entropy_coef" => t.entropy_coef = parse(k, e)?,
            "max_grad_norm" => {
                t.max_grad_norm = match e.value.as_str() {
                    "none" | "off" => None,
                    _ => Some(parse(k, e)?),
                }
            }
            "n_qubits" => cfg.n_qubits = parse(k, e)?,
            "vqc_layers" => cfg.vqc_layers = parse(k, e)?,
            "max_steps_per_episode" => {
                cfg.env.max_steps = if e.value == "default" { env.default_max_steps() } else { parse(k, e)? }
            }
            "out_dir" => cfg.out_dir = PathBuf::from(&e.value),
            "cartpole_angle_limit_deg" => cfg.env.cartpole_angle_limit_deg = parse(k, e)?,
            "stop_at_ma100" => {
                t.stop_at_ma100 = match e.value.as_str() {
                    "none" | "off" => None,
                    _ => Some(parse(k, e)?),
                }
            }
            _ => unreachable!("keys are checked against KEYS"),
        }
    }

    let line_of = |k: &str| entries.get(k).map_or(0, |e| e.line);
    cfg.train.validate().map_err(|e| {
        let msg = e.to_string();
        let key = KEYS
            .iter()
            .find(|k| msg.contains(*k))
            .copied()
            .unwrap_or("train");
        key_err(key, line_of(key), msg)
    })?;
    if !(1..=crate::sim::MAX_QUBITS).contains(&cfg.n_qubits) {
        return Err(key_err("n_qubits", line_of("n_qubits"), "must be in 1..=12"));
    }
    if cfg.env.max_steps == 0 {
        return Err(key_err("max_steps_per_episode", line_of("max_steps_per_episode"), "must be positive"));
    }
    if !(cfg.env.cartpole_angle_limit_deg > 0.0) {
        return Err(key_err(
            "cartpole_angle_limit_deg",
            line_of("cartpole_angle_limit_deg"),
            "must be positive",
        ));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NO: [&str; 0] = [];

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_config("env = cartpole\nvariant = quantum\ntotal_episodes = 1000", &NO).unwrap();
        assert_eq!(cfg.train.sync_interval, 5);
        assert_eq!(cfg.train.gamma, 0.9);
        assert_eq!(cfg.train.lr, 1e-4);
        assert_eq!(cfg.train.beta1, 0.92);
        assert_eq!(cfg.train.beta2, 0.999);
        assert_eq!(cfg.train.total_episodes, 1000);
        assert_eq!(cfg.env.max_steps, 200);
        assert_eq!(cfg.env.cartpole_angle_limit_deg, 12.0);
        assert_eq!((cfg.n_qubits, cfg.vqc_layers), (8, 2));
    }

    #[test]
    fn overrides_win() {
        let text = "env = acrobot # comment\nvariant = classical\ntotal_episodes = 3\ngamma = 0.9\n";
        let cfg = parse_config(text, &["gamma=0.99"]).unwrap();
        assert_eq!(cfg.train.gamma, 0.99);
        assert_eq!(cfg.env.max_steps, 500);
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = parse_config("variant = quantum\nenv = pong\ntotal_episodes = 1", &NO).unwrap_err();
        match err {
            Error::ConfigKey { key, line, .. } => assert_eq!((key.as_str(), line), ("env", 2)),
            other => panic!("{other}"),
        }
        let err = parse_config("env = cartpole\nvariant = quantum\ntotal_episodes = 1\nbogus = 3", &NO).unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, line: 4, .. } if key == "bogus"));
        let err = parse_config("env = cartpole\nvariant = quantum\ntotal_episodes = 1\ngamma = x", &NO).unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, line: 4, .. } if key == "gamma"));
        let err = parse_config("env = cartpole\nvariant = quantum", &NO).unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, .. } if key == "total_episodes"));
        let err = parse_config("env = cartpole\nvariant = quantum\ntotal_episodes = 1\ngamma = 1.5", &NO).unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, line: 4, .. } if key == "gamma"));
        let err = parse_config("env = cartpole\nvariant = quantum\ntotal_episodes = 1\nworkers = 0", &NO).unwrap_err();
        assert!(matches!(err, Error::ConfigKey { ref key, .. } if key == "workers"));
    }

    #[test]
    fn resolved_dump_reparses_identically() {
        let cfg = parse_config(
            "env = crossing-s9n2\nvariant = quantum\ntotal_episodes = 7\nlr = 0.000123456789\nmax_grad_norm = 40\nseed = 99\nstop_at_ma100 = -87.5",
            &["workers=3", "out_dir=/tmp/x y"],
        )
        .unwrap();
        let again = parse_config(&cfg.to_resolved_string(), &NO).unwrap();
        assert_eq!(again, cfg);
    }
}
