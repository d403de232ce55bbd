use rand::{Rng, RngCore};

use super::{check_action, EnvName, EnvSpec, Environment, StepResult};
use crate::error::{Error, Result};

const GRAVITY: f64 = 9.8;
const CART_MASS: f64 = 1.0;
const POLE_MASS: f64 = 0.1;
const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
const HALF_LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = POLE_MASS * HALF_LENGTH;
const FORCE: f64 = 10.0;
const TAU: f64 = 0.02;
const X_LIMIT: f64 = 2.4;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn obs(&self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.theta, self.theta_dot]
    }

    /// One explicit Euler step under force `force` (newtons).
    pub fn euler_step(&self, force: f64) -> Self {
        let (sin, cos) = self.theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * self.theta_dot * self.theta_dot * sin) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;
        Self {
            x: self.x + TAU * self.x_dot,
            x_dot: self.x_dot + TAU * x_acc,
            theta: self.theta + TAU * self.theta_dot,
            theta_dot: self.theta_dot + TAU * theta_acc,
        }
    }
}

pub struct CartPole {
    spec: EnvSpec,
    angle_limit: f64,
    state: CartPoleState,
    steps: usize,
    done: bool,
}

impl CartPole {
    pub fn new(max_steps: usize, angle_limit_deg: f64) -> Self {
        Self {
            spec: EnvName::CartPole.spec(max_steps),
            angle_limit: angle_limit_deg.to_radians(),
            state: CartPoleState::default(),
            steps: 0,
            done: true,
        }
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    /// Places the cart in an arbitrary state and starts a fresh episode from it.
    pub fn set_state(&mut self, state: CartPoleState) {
        self.state = state;
        self.steps = 0;
        self.done = false;
    }

    pub fn is_terminal(&self, s: &CartPoleState) -> bool {
        s.x.abs() > X_LIMIT || s.theta.abs() > self.angle_limit
    }
}

impl Environment for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut draw = || rng.gen_range(-0.05..0.05);
        self.state = CartPoleState {
            x: draw(),
            x_dot: draw(),
            theta: draw(),
            theta_dot: draw(),
        };
        self.steps = 0;
        self.done = false;
        self.state.obs()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::usage("cartpole: step called on a finished episode"));
        }
        check_action(action, &self.spec)?;
        let force = if action == 1 { FORCE } else { -FORCE };
        self.state = self.state.euler_step(force);
        self.steps += 1;
        let terminal = self.is_terminal(&self.state);
        let truncated = self.steps >= self.spec.max_steps;
        self.done = terminal || truncated;
        Ok(StepResult {
            obs: self.state.obs(),
            reward: 1.0,
            terminal,
            truncated,
        })
    }
}
