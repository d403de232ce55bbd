//! Dressed-VQC actor and critic, and the matched classical baseline.
//!
//! Both variants share the shape `pre: obs → width`, `core: width → width`,
//! `post: width → head`. The quantum core is the arctan-encoded VQC; the
//! classical core is a single linear layer with no activation.

pub mod checkpoint;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::autodiff::{softmax, vqc_forward, GradientBundle, LinearLayer, Tape, Var, VqcLayerSpec};
use crate::envs::EnvSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Quantum,
    Classical,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Quantum => "quantum",
            Variant::Classical => "classical",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(Variant::Quantum),
            "classical" => Ok(Variant::Classical),
            other => Err(Error::config(format!(
                "unknown variant `{other}` (expected quantum or classical)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Actor,
    Critic,
}

impl Role {
    pub fn prefix(self) -> &'static str {
        match self {
            Role::Actor => "actor",
            Role::Critic => "critic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Core {
    Quantum(VqcLayerSpec),
    Classical(LinearLayer),
}

/// A parameter tensor exposed by name with its logical shape.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedParam {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub quantum: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridModel {
    pub role: Role,
    pub pre: LinearLayer,
    pub core: Core,
    pub post: LinearLayer,
}

/// Builds an actor with `n_actions` outputs and a critic with one output.
/// `width` is the qubit count (and the classical core width).
pub fn build_actor_critic<R: Rng + ?Sized>(
    env: &EnvSpec,
    variant: Variant,
    width: usize,
    n_layers: usize,
    rng: &mut R,
) -> Result<(HybridModel, HybridModel)> {
    let actor = HybridModel::init(Role::Actor, variant, env.obs_dim, env.n_actions, width, n_layers, rng)?;
    let critic = HybridModel::init(Role::Critic, variant, env.obs_dim, 1, width, n_layers, rng)?;
    Ok((actor, critic))
}

/// Same shapes as [`build_actor_critic`] with every parameter zero.
pub fn zero_actor_critic(
    env: &EnvSpec,
    variant: Variant,
    width: usize,
    n_layers: usize,
) -> Result<(HybridModel, HybridModel)> {
    Ok((
        HybridModel::zeros(Role::Actor, variant, env.obs_dim, env.n_actions, width, n_layers)?,
        HybridModel::zeros(Role::Critic, variant, env.obs_dim, 1, width, n_layers)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamCounts {
    pub classical: usize,
    pub quantum: usize,
    pub total: usize,
}

pub fn count_params(actor: &HybridModel, critic: &HybridModel) -> ParamCounts {
    let classical = actor.n_classical() + critic.n_classical();
    let quantum = actor.n_quantum() + critic.n_quantum();
    ParamCounts {
        classical,
        quantum,
        total: classical + quantum,
    }
}

/// Draws an index from a categorical distribution.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().sum();
    if probs.is_empty()
        || probs.iter().any(|p| !p.is_finite() || *p < 0.0)
        || (total - 1.0).abs() > 1e-6
    {
        return Err(Error::numeric(format!("invalid action distribution {probs:?}")));
    }
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last = i;
            if u < cum {
                return Ok(i);
            }
        }
    }
    Ok(last)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl HybridModel {
    fn init<R: Rng + ?Sized>(
        role: Role,
        variant: Variant,
        obs_dim: usize,
        head: usize,
        width: usize,
        n_layers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        check_dims(obs_dim, head, width)?;
        let pre = LinearLayer::init_uniform(obs_dim, width, rng);
        let core = match variant {
            Variant::Quantum => Core::Quantum(VqcLayerSpec::init_uniform(width, n_layers, rng)),
            Variant::Classical => Core::Classical(LinearLayer::init_uniform(width, width, rng)),
        };
        let post = LinearLayer::init_uniform(width, head, rng);
        Ok(Self {
            role,
            pre,
            core,
            post,
        })
    }

    pub fn zeros(
        role: Role,
        variant: Variant,
        obs_dim: usize,
        head: usize,
        width: usize,
        n_layers: usize,
    ) -> Result<Self> {
        check_dims(obs_dim, head, width)?;
        let core = match variant {
            Variant::Quantum => Core::Quantum(VqcLayerSpec::zeros(width, n_layers)),
            Variant::Classical => Core::Classical(LinearLayer::zeros(width, width)),
        };
        Ok(Self {
            role,
            pre: LinearLayer::zeros(obs_dim, width),
            core,
            post: LinearLayer::zeros(width, head),
        })
    }

    pub fn variant(&self) -> Variant {
        match self.core {
            Core::Quantum(_) => Variant::Quantum,
            Core::Classical(_) => Variant::Classical,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.pre.in_dim()
    }

    pub fn head_dim(&self) -> usize {
        self.post.out_dim()
    }

    pub fn width(&self) -> usize {
        self.pre.out_dim()
    }

    pub fn n_layers(&self) -> usize {
        match &self.core {
            Core::Quantum(spec) => spec.n_layers,
            Core::Classical(_) => 0,
        }
    }

    pub fn n_classical(&self) -> usize {
        let core = match &self.core {
            Core::Quantum(_) => 0,
            Core::Classical(l) => l.n_params(),
        };
        self.pre.n_params() + core + self.post.n_params()
    }

    pub fn n_quantum(&self) -> usize {
        match &self.core {
            Core::Quantum(spec) => spec.n_weights(),
            Core::Classical(_) => 0,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_classical() + self.n_quantum()
    }

    /// Output of the core block (the VQC readout for the quantum variant).
    pub fn core_output(&self, obs: &[f64]) -> Result<Vec<f64>> {
        if obs.len() != self.obs_dim() {
            return Err(Error::config(format!(
                "observation has length {}, model expects {}",
                obs.len(),
                self.obs_dim()
            )));
        }
        let h = self.pre.forward(obs)?;
        match &self.core {
            Core::Quantum(spec) => vqc_forward(spec, &h),
            Core::Classical(l) => l.forward(&h),
        }
    }

    /// Post-net output: action logits for the actor, `[V]` for the critic.
    pub fn head(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let z = self.core_output(obs)?;
        let y = self.post.forward(&z)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                message: format!("{} produced a non-finite output {y:?}", self.role.prefix()),
                snapshot: Some(self.snapshot_summary()),
            });
        }
        Ok(y)
    }

    pub fn policy(&self, obs: &[f64]) -> Result<Vec<f64>> {
        softmax(&self.head(obs)?).map_err(|e| match e {
            Error::Numeric { message, .. } => Error::Numeric {
                message,
                snapshot: Some(self.snapshot_summary()),
            },
            other => other,
        })
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        Ok(self.head(obs)?[0])
    }

    /// Records the head computation on `tape` with this model's parameters as named leaves.
    pub fn record(&self, tape: &mut Tape, obs: Var) -> Result<Var> {
        let p = self.role.prefix();
        let w = tape.param(&format!("{p}.pre.weight"), &self.pre.weight)?;
        let b = tape.param(&format!("{p}.pre.bias"), &self.pre.bias)?;
        let h = tape.linear(w, b, obs)?;
        let z = match &self.core {
            Core::Quantum(spec) => {
                let cw = tape.param(&format!("{p}.core.weights"), &spec.weights)?;
                tape.vqc(cw, h, spec.n_qubits, spec.n_layers)?
            }
            Core::Classical(l) => {
                let cw = tape.param(&format!("{p}.core.weight"), &l.weight)?;
                let cb = tape.param(&format!("{p}.core.bias"), &l.bias)?;
                tape.linear(cw, cb, h)?
            }
        };
        let w = tape.param(&format!("{p}.post.weight"), &self.post.weight)?;
        let b = tape.param(&format!("{p}.post.bias"), &self.post.bias)?;
        tape.linear(w, b, z)
    }

    /// All parameters in canonical order (pre, core, post).
    pub fn params(&self) -> Vec<NamedParam> {
        let p = self.role.prefix();
        let lin = |name: &str, l: &LinearLayer| {
            [
                NamedParam {
                    name: format!("{p}.{name}.weight"),
                    shape: vec![l.out_dim(), l.in_dim()],
                    data: l.weight.clone(),
                    quantum: false,
                },
                NamedParam {
                    name: format!("{p}.{name}.bias"),
                    shape: vec![l.out_dim()],
                    data: l.bias.clone(),
                    quantum: false,
                },
            ]
        };
        let mut out = Vec::new();
        out.extend(lin("pre", &self.pre));
        match &self.core {
            Core::Quantum(spec) => out.push(NamedParam {
                name: format!("{p}.core.weights"),
                shape: vec![spec.n_layers, spec.n_qubits, 3],
                data: spec.weights.clone(),
                quantum: true,
            }),
            Core::Classical(l) => out.extend(lin("core", l)),
        }
        out.extend(lin("post", &self.post));
        out
    }

    fn slots_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = vec![&mut self.pre.weight, &mut self.pre.bias];
        match &mut self.core {
            Core::Quantum(spec) => out.push(&mut spec.weights),
            Core::Classical(l) => {
                out.push(&mut l.weight);
                out.push(&mut l.bias);
            }
        }
        out.push(&mut self.post.weight);
        out.push(&mut self.post.bias);
        out
    }

    /// Parameters concatenated in canonical order.
    pub fn flat(&self) -> Vec<f64> {
        self.params().into_iter().flat_map(|p| p.data).collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::config(format!(
                "flat parameter vector has length {}, model has {}",
                flat.len(),
                self.n_params()
            )));
        }
        let mut off = 0;
        for slot in self.slots_mut() {
            let n = slot.len();
            slot.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }

    /// Replaces one named tensor; the length must match.
    pub fn set_param(&mut self, name: &str, data: &[f64]) -> Result<()> {
        let names: Vec<String> = self.params().into_iter().map(|p| p.name).collect();
        let idx = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::config(format!("model has no parameter `{name}`")))?;
        let slot = self.slots_mut().swap_remove(idx);
        if slot.len() != data.len() {
            return Err(Error::config(format!(
                "parameter `{name}` has {} entries, got {}",
                slot.len(),
                data.len()
            )));
        }
        slot.copy_from_slice(data);
        Ok(())
    }

    /// Flattens a gradient bundle in the same order as [`HybridModel::flat`].
    pub fn flatten_grad(&self, grads: &GradientBundle) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_params());
        for p in self.params() {
            let g = grads
                .get(&p.name)
                .ok_or_else(|| Error::config(format!("gradient missing for `{}`", p.name)))?;
            if g.len() != p.data.len() {
                return Err(Error::config(format!("gradient for `{}` has wrong length", p.name)));
            }
            out.extend_from_slice(g);
        }
        Ok(out)
    }

    fn snapshot_summary(&self) -> String {
        self.params()
            .iter()
            .map(|p| {
                let norm = p.data.iter().map(|x| x * x).sum::<f64>().sqrt();
                let bad = p.data.iter().filter(|x| !x.is_finite()).count();
                format!("{} |.|={norm:.6e} nonfinite={bad}", p.name)
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn check_dims(obs_dim: usize, head: usize, width: usize) -> Result<()> {
    if obs_dim == 0 || head == 0 || width == 0 {
        return Err(Error::config(format!(
            "model dimensions must be positive (obs {obs_dim}, head {head}, width {width})"
        )));
    }
    Ok(())
}
