use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, RngCore};

use super::{check_action, EnvName, EnvSpec, Environment, StepResult};
use crate::error::{Error, Result};

const DT: f64 = 0.2;
const M1: f64 = 1.0;
const M2: f64 = 1.0;
const L1: f64 = 1.0;
const LC1: f64 = 0.5;
const LC2: f64 = 0.5;
const I1: f64 = 1.0;
const I2: f64 = 1.0;
const G: f64 = 9.8;
pub const MAX_VEL_1: f64 = 4.0 * PI;
pub const MAX_VEL_2: f64 = 9.0 * PI;
const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AcrobotState {
    pub theta1: f64,
    pub theta2: f64,
    pub theta1_dot: f64,
    pub theta2_dot: f64,
}

impl AcrobotState {
    pub fn obs(&self) -> Vec<f64> {
        vec![
            self.theta1.cos(),
            self.theta1.sin(),
            self.theta2.cos(),
            self.theta2.sin(),
            self.theta1_dot,
            self.theta2_dot,
        ]
    }

    /// Height of the free end above the pivot, in link lengths.
    pub fn tip_height(&self) -> f64 {
        -self.theta1.cos() - (self.theta1 + self.theta2).cos()
    }

    pub fn is_terminal(&self) -> bool {
        self.tip_height() > 1.0
    }

    fn as_array(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta1_dot, self.theta2_dot]
    }

    /// Integrates one control interval with torque `torque` (RK4, then wrap and clamp).
    pub fn advance(&self, torque: f64) -> Self {
        let s = rk4(self.as_array(), torque, DT);
        Self {
            theta1: wrap(s[0]),
            theta2: wrap(s[1]),
            theta1_dot: s[2].clamp(-MAX_VEL_1, MAX_VEL_1),
            theta2_dot: s[3].clamp(-MAX_VEL_2, MAX_VEL_2),
        }
    }
}

/// Time derivative of `(θ1, θ2, θ̇1, θ̇2)` under torque `tau` on the second joint.
pub(crate) fn derivs(s: [f64; 4], tau: f64) -> [f64; 4] {
    let [t1, t2, d1_, d2_] = s;
    let d1 = M1 * LC1 * LC1 + M2 * (L1 * L1 + LC2 * LC2 + 2.0 * L1 * LC2 * t2.cos()) + I1 + I2;
    let d2 = M2 * (LC2 * LC2 + L1 * LC2 * t2.cos()) + I2;
    let phi2 = M2 * LC2 * G * (t1 + t2 - FRAC_PI_2).cos();
    let phi1 = -M2 * L1 * LC2 * d2_ * d2_ * t2.sin() - 2.0 * M2 * L1 * LC2 * d2_ * d1_ * t2.sin()
        + (M1 * LC1 + M2 * L1) * G * (t1 - FRAC_PI_2).cos()
        + phi2;
    let dd2 = (tau + d2 / d1 * phi1 - M2 * L1 * LC2 * d1_ * d1_ * t2.sin() - phi2)
        / (M2 * LC2 * LC2 + I2 - d2 * d2 / d1);
    let dd1 = -(d2 * dd2 + phi1) / d1;
    [d1_, d2_, dd1, dd2]
}

fn rk4(s: [f64; 4], tau: f64, h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], k: f64| std::array::from_fn(|i| a[i] + k * b[i]);
    let k1 = derivs(s, tau);
    let k2 = derivs(add(s, k1, h / 2.0), tau);
    let k3 = derivs(add(s, k2, h / 2.0), tau);
    let k4 = derivs(add(s, k3, h), tau);
    std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn wrap(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x;
    while y > PI {
        y -= two_pi;
    }
    while y < -PI {
        y += two_pi;
    }
    y
}

pub struct Acrobot {
    spec: EnvSpec,
    state: AcrobotState,
    steps: usize,
    done: bool,
}

impl Acrobot {
    pub fn new(max_steps: usize) -> Self {
        Self {
            spec: EnvName::Acrobot.spec(max_steps),
            state: AcrobotState::default(),
            steps: 0,
            done: true,
        }
    }

    pub fn state(&self) -> AcrobotState {
        self.state
    }

    pub fn set_state(&mut self, state: AcrobotState) {
        self.state = state;
        self.steps = 0;
        self.done = false;
    }
}

impl Environment for Acrobot {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut draw = || rng.gen_range(-0.1..0.1);
        self.state = AcrobotState {
            theta1: draw(),
            theta2: draw(),
            theta1_dot: draw(),
            theta2_dot: draw(),
        };
        self.steps = 0;
        self.done = false;
        self.state.obs()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::usage("acrobot: step called on a finished episode"));
        }
        check_action(action, &self.spec)?;
        self.state = self.state.advance(TORQUES[action]);
        self.steps += 1;
        let terminal = self.state.is_terminal();
        let truncated = self.steps >= self.spec.max_steps;
        self.done = terminal || truncated;
        Ok(StepResult {
            obs: self.state.obs(),
            reward: if terminal { 0.0 } else { -1.0 },
            terminal,
            truncated,
        })
    }
}
