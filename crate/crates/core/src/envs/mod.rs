//! Benchmark environments: Cart-Pole, Acrobot and the 9×9 SimpleCrossing grid.
//!
//! Every environment tracks its own step count and reports truncation
//! (step limit) separately from termination.

mod acrobot;
mod cartpole;
mod crossing;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

pub use acrobot::{Acrobot, AcrobotState};
pub use cartpole::{CartPole, CartPoleState};
pub use crossing::{Cell, Crossing, Direction, GridState, Orientation, WallLine, GRID_SIZE, VIEW_SIZE};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub name: EnvName,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub max_steps: usize,
    pub reward_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvName {
    CartPole,
    Acrobot,
    /// SimpleCrossing on a 9×9 grid with the given number of walls (1..=3).
    Crossing(usize),
}

impl EnvName {
    pub fn default_max_steps(self) -> usize {
        match self {
            EnvName::CartPole => 200,
            EnvName::Acrobot => 500,
            EnvName::Crossing(_) => 4 * GRID_SIZE * GRID_SIZE,
        }
    }

    pub fn spec(self, max_steps: usize) -> EnvSpec {
        let (obs_dim, n_actions, reward_threshold) = match self {
            EnvName::CartPole => (4, 2, Some(195.0)),
            EnvName::Acrobot => (6, 3, Some(-100.0)),
            EnvName::Crossing(_) => (VIEW_SIZE * VIEW_SIZE * 3, 6, None),
        };
        EnvSpec {
            name: self,
            obs_dim,
            n_actions,
            max_steps,
            reward_threshold,
        }
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvName::CartPole => f.write_str("cartpole"),
            EnvName::Acrobot => f.write_str("acrobot"),
            EnvName::Crossing(n) => write!(f, "crossing-s9n{n}"),
        }
    }
}

impl FromStr for EnvName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartpole" => Ok(EnvName::CartPole),
            "acrobot" => Ok(EnvName::Acrobot),
            "crossing-s9n1" => Ok(EnvName::Crossing(1)),
            "crossing-s9n2" => Ok(EnvName::Crossing(2)),
            "crossing-s9n3" => Ok(EnvName::Crossing(3)),
            other => Err(Error::config(format!(
                "unknown environment `{other}` (expected cartpole, acrobot, crossing-s9n1, crossing-s9n2 or crossing-s9n3)"
            ))),
        }
    }
}

/// Everything needed to build an environment instance.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub name: EnvName,
    pub max_steps: usize,
    pub cartpole_angle_limit_deg: f64,
}

impl EnvConfig {
    pub fn new(name: EnvName) -> Self {
        Self {
            name,
            max_steps: name.default_max_steps(),
            cartpole_angle_limit_deg: 12.0,
        }
    }

    pub fn spec(&self) -> EnvSpec {
        self.name.spec(self.max_steps)
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// Advances one step. Stepping after the episode ended is a usage error.
    fn step(&mut self, action: usize) -> Result<StepResult>;
}

pub fn make_env(cfg: &EnvConfig) -> Result<Box<dyn Environment>> {
    if cfg.max_steps == 0 {
        return Err(Error::config("max_steps_per_episode must be at least 1"));
    }
    Ok(match cfg.name {
        EnvName::CartPole => Box::new(CartPole::new(cfg.max_steps, cfg.cartpole_angle_limit_deg)),
        EnvName::Acrobot => Box::new(Acrobot::new(cfg.max_steps)),
        EnvName::Crossing(n) => Box::new(Crossing::new(n, cfg.max_steps)?),
    })
}

pub(crate) fn check_action(action: usize, spec: &EnvSpec) -> Result<()> {
    if action >= spec.n_actions {
        return Err(Error::usage(format!(
            "action {action} out of range for {} ({} actions)",
            spec.name, spec.n_actions
        )));
    }
    Ok(())
}
