use crate::autodiff::{GradientBundle, Tape};
use crate::error::{Error, Result};
use crate::models::HybridModel;

/// Discounted n-step returns, aligned with `rewards`: `R_i = r_i + γ·R_{i+1}`,
/// seeded with `R_len = bootstrap`.
pub fn compute_returns(rewards: &[f64], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut r = bootstrap;
    for (i, reward) in rewards.iter().enumerate().rev() {
        r = reward + gamma * r;
        out[i] = r;
    }
    out
}

/// Transitions collected since the last synchronisation.
#[derive(Clone, Debug, Default)]
pub struct RolloutBuffer {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    /// Value used for the state after the last transition (0 when terminal).
    pub bootstrap: f64,
}

impl RolloutBuffer {
    pub fn push(&mut self, obs: Vec<f64>, action: usize, reward: f64) {
        self.observations.push(obs);
        self.actions.push(action);
        self.rewards.push(reward);
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn clear(&mut self) {
        self.observations.clear();
        self.actions.clear();
        self.rewards.clear();
        self.bootstrap = 0.0;
    }
}

/// Loss weights for [`accumulate_gradients`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub gamma: f64,
    pub entropy_coef: f64,
}

/// Gradients of the actor loss `Σ −log π(a_i|s_i)·(R_i − V(s_i))` (advantage held
/// constant, minus an optional entropy bonus) and the critic loss `Σ (R_i − V(s_i))²`.
pub fn accumulate_gradients(
    buffer: &RolloutBuffer,
    actor: &HybridModel,
    critic: &HybridModel,
    loss: LossConfig,
) -> Result<(GradientBundle, GradientBundle)> {
    if buffer.is_empty() {
        return Err(Error::usage("accumulate_gradients called with an empty rollout"));
    }
    let returns = compute_returns(&buffer.rewards, buffer.bootstrap, loss.gamma);

    let mut actor_tape = Tape::new();
    let mut critic_tape = Tape::new();
    let mut actor_terms = Vec::with_capacity(buffer.len());
    let mut critic_terms = Vec::with_capacity(buffer.len());

    for ((obs, &action), &ret) in buffer.observations.iter().zip(&buffer.actions).zip(&returns) {
        let x = critic_tape.constant(obs);
        let v = critic.record(&mut critic_tape, x)?;
        let value = critic_tape.scalar(v)?;
        let target = critic_tape.constant(&[ret]);
        let diff = critic_tape.sub(target, v)?;
        critic_terms.push(critic_tape.square(diff));

        let advantage = ret - value;
        let x = actor_tape.constant(obs);
        let logits = actor.record(&mut actor_tape, x)?;
        let probs = actor_tape.softmax(logits)?;
        let logp = actor_tape.log(probs);
        let chosen = actor_tape.index(logp, action)?;
        let mut term = actor_tape.scale(chosen, -advantage);
        if loss.entropy_coef != 0.0 {
            // −coef·H(π) = coef·Σ p log p
            let plogp = actor_tape.mul(probs, logp)?;
            let neg_entropy = actor_tape.sum(plogp);
            let bonus = actor_tape.scale(neg_entropy, loss.entropy_coef);
            term = actor_tape.add(term, bonus)?;
        }
        actor_terms.push(term);
    }

    let actor_loss = sum_terms(&mut actor_tape, &actor_terms)?;
    let critic_loss = sum_terms(&mut critic_tape, &critic_terms)?;
    Ok((actor_tape.backward(actor_loss)?, critic_tape.backward(critic_loss)?))
}

fn sum_terms(tape: &mut Tape, terms: &[crate::autodiff::Var]) -> Result<crate::autodiff::Var> {
    let mut acc = terms[0];
    for &t in &terms[1..] {
        acc = tape.add(acc, t)?;
    }
    Ok(tape.sum(acc))
}
