//! Three-way gradient verification for a full actor/critic pair.
//!
//! For a random observation and a random upstream vector the scalar losses
//! are `L_actor = Σ_k u_k log π_k` and `L_critic = u·V`. Their gradients are
//! computed three ways: the tape (adjoint VQC backward), a hand-written chain
//! rule fed by parameter-shift Jacobians, and central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{param_shift_grad, softmax, Tape, VqcVjpFn};
use crate::envs::EnvName;
use crate::error::{Error, Result};
use crate::models::{build_actor_critic, Core, HybridModel, Role, Variant};
use crate::par::{map_indexed, Execution};

pub const SHIFT_TOLERANCE: f64 = 1e-8;
pub const FD_TOLERANCE: f64 = 1e-4;
pub const FD_STEP: f64 = 1e-4;
/// Denominator floor for relative error, so near-zero gradients are compared absolutely.
pub const REL_FLOOR: f64 = 1e-3;

pub fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Deviation {
    pub value: f64,
    pub param: String,
}

impl Deviation {
    fn none() -> Self {
        Self {
            value: 0.0,
            param: String::new(),
        }
    }

    fn update(&mut self, value: f64, param: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.param = param();
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    pub env: EnvName,
    pub variant: Variant,
    pub seed: u64,
    pub params_checked: usize,
    /// Max |adjoint − shift|; `None` for the classical variant.
    pub adjoint_vs_shift: Option<Deviation>,
    pub adjoint_vs_fd: Deviation,
    pub shift_vs_fd: Option<Deviation>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.adjoint_vs_shift.as_ref().map_or(true, |d| d.value < SHIFT_TOLERANCE)
            && self.adjoint_vs_fd.value < FD_TOLERANCE
            && self.shift_vs_fd.as_ref().map_or(true, |d| d.value < FD_TOLERANCE)
    }

    /// Parameter with the largest violation, if any tolerance is breached.
    pub fn worst_offender(&self) -> Option<&Deviation> {
        if let Some(d) = &self.adjoint_vs_shift {
            if d.value >= SHIFT_TOLERANCE {
                return Some(d);
            }
        }
        if self.adjoint_vs_fd.value >= FD_TOLERANCE {
            return Some(&self.adjoint_vs_fd);
        }
        self.shift_vs_fd.as_ref().filter(|d| d.value >= FD_TOLERANCE)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "gradcheck env={} variant={} seed={}\nparameters checked: {}\n",
            self.env, self.variant, self.seed, self.params_checked
        );
        if let Some(d) = &self.adjoint_vs_shift {
            s += &format!(
                "adjoint vs parameter-shift: max |diff| = {:.3e} at {} (tol {SHIFT_TOLERANCE:e})\n",
                d.value, d.param
            );
        }
        s += &format!(
            "adjoint vs finite differences: max rel = {:.3e} at {} (tol {FD_TOLERANCE:e})\n",
            self.adjoint_vs_fd.value, self.adjoint_vs_fd.param
        );
        if let Some(d) = &self.shift_vs_fd {
            s += &format!(
                "parameter-shift vs finite differences: max rel = {:.3e} at {} (tol {FD_TOLERANCE:e})\n",
                d.value, d.param
            );
        }
        match self.worst_offender() {
            None => s += "PASS\n",
            Some(d) => s += &format!("FAIL: worst offender {}\n", d.param),
        }
        s
    }

    pub fn into_result(self) -> Result<Self> {
        match self.worst_offender() {
            None => Ok(self),
            Some(d) => Err(Error::Tolerance(format!(
                "gradient check failed at {} (deviation {:.3e})",
                d.param, d.value
            ))),
        }
    }
}

/// Options for [`run_gradcheck_with`].
#[derive(Clone, Copy)]
pub struct GradcheckOptions {
    /// VQC backward used by the tape route.
    pub vjp: Option<VqcVjpFn>,
}

pub fn run_gradcheck(variant: Variant, env: EnvName, seed: u64) -> Result<GradcheckReport> {
    run_gradcheck_with(variant, env, seed, GradcheckOptions { vjp: None })
}

/// Scalar loss for `model` given observation and upstream weights.
fn model_loss(model: &HybridModel, obs: &[f64], upstream: &[f64]) -> Result<f64> {
    let head = model.head(obs)?;
    Ok(match model.role {
        Role::Actor => softmax(&head)?
            .iter()
            .zip(upstream)
            .map(|(p, u)| u * p.ln())
            .sum(),
        Role::Critic => head.iter().zip(upstream).map(|(h, u)| h * u).sum(),
    })
}

/// Gradient of the loss with respect to the head output.
fn head_grad(model: &HybridModel, obs: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    match model.role {
        Role::Actor => {
            let p = softmax(&model.head(obs)?)?;
            let total: f64 = upstream.iter().sum();
            Ok(upstream.iter().zip(&p).map(|(u, p)| u - total * p).collect())
        }
        Role::Critic => Ok(upstream.to_vec()),
    }
}

fn tape_grad(model: &HybridModel, obs: &[f64], upstream: &[f64], vjp: Option<VqcVjpFn>) -> Result<Vec<f64>> {
    let mut tape = vjp.map_or_else(Tape::new, Tape::with_vqc_vjp);
    let x = tape.constant(obs);
    let head = model.record(&mut tape, x)?;
    let out = match model.role {
        Role::Actor => {
            let p = tape.softmax(head)?;
            tape.log(p)
        }
        Role::Critic => head,
    };
    let u = tape.constant(upstream);
    let weighted = tape.mul(out, u)?;
    let loss = tape.sum(weighted);
    model.flatten_grad(&tape.backward(loss)?)
}

/// Manual backpropagation through the model with parameter-shift Jacobians for the VQC.
fn shift_grad(model: &HybridModel, obs: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    let Core::Quantum(spec) = &model.core else {
        return Err(Error::config("parameter-shift route needs a quantum core"));
    };
    let h = model.pre.forward(obs)?;
    let jac = param_shift_grad(spec, &h)?;
    let gy = head_grad(model, obs, upstream)?;
    let (dz, dpost_w, dpost_b) = model.post.backward(&jac.outputs, &gy)?;
    let (dh, dcore) = jac.contract(&dz);
    let (_, dpre_w, dpre_b) = model.pre.backward(obs, &dh)?;
    Ok([dpre_w, dpre_b, dcore, dpost_w, dpost_b].concat())
}

fn fd_grad(model: &HybridModel, obs: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
    let base = model.flat();
    let mut probe = model.clone();
    let mut theta = base.clone();
    let mut out = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        theta[i] = base[i] + FD_STEP;
        probe.set_flat(&theta)?;
        let plus = model_loss(&probe, obs, upstream)?;
        theta[i] = base[i] - FD_STEP;
        probe.set_flat(&theta)?;
        let minus = model_loss(&probe, obs, upstream)?;
        theta[i] = base[i];
        out.push((plus - minus) / (2.0 * FD_STEP));
    }
    Ok(out)
}

fn param_labels(model: &HybridModel) -> Vec<String> {
    model
        .params()
        .iter()
        .flat_map(|p| (0..p.data.len()).map(move |i| format!("{}[{i}]", p.name)))
        .collect()
}

pub fn run_gradcheck_with(
    variant: Variant,
    env: EnvName,
    seed: u64,
    opts: GradcheckOptions,
) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = env.spec(env.default_max_steps());
    let (actor, critic) = build_actor_critic(&spec, variant, 8, 2, &mut rng)?;
    let obs: Vec<f64> = (0..spec.obs_dim).map(|_| rng.gen_range(-2.0..2.0)).collect();

    let mut report = GradcheckReport {
        env,
        variant,
        seed,
        params_checked: 0,
        adjoint_vs_shift: (variant == Variant::Quantum).then(Deviation::none),
        adjoint_vs_fd: Deviation::none(),
        shift_vs_fd: (variant == Variant::Quantum).then(Deviation::none),
    };
    for model in [&actor, &critic] {
        let upstream: Vec<f64> = (0..model.head_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels = param_labels(model);
        let adj = tape_grad(model, &obs, &upstream, opts.vjp)?;
        let fd = fd_grad(model, &obs, &upstream)?;
        let shift = match variant {
            Variant::Quantum => Some(shift_grad(model, &obs, &upstream)?),
            Variant::Classical => None,
        };
        for i in 0..adj.len() {
            report.adjoint_vs_fd.update(rel_error(adj[i], fd[i]), || labels[i].clone());
            if let Some(sh) = &shift {
                if let Some(d) = report.adjoint_vs_shift.as_mut() {
                    d.update((adj[i] - sh[i]).abs(), || labels[i].clone());
                }
                if let Some(d) = report.shift_vs_fd.as_mut() {
                    d.update(rel_error(sh[i], fd[i]), || labels[i].clone());
                }
            }
        }
        report.params_checked += adj.len();
    }
    Ok(report)
}

/// Runs the check for seeds `first_seed..first_seed + n` and returns every report.
pub fn gradcheck_sweep(
    variant: Variant,
    env: EnvName,
    first_seed: u64,
    n: usize,
    exec: Execution,
) -> Result<Vec<GradcheckReport>> {
    map_indexed(n, exec, |i| run_gradcheck(variant, env, first_seed + i as u64))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{vqc_vjp, VqcLayerSpec};

    #[test]
    fn quantum_cartpole_passes_with_203_params() {
        let r = run_gradcheck(Variant::Quantum, EnvName::CartPole, 7).unwrap();
        assert_eq!(r.params_checked, 203);
        assert!(r.passed(), "{}", r.render());
        assert!(r.render().contains("PASS"));
    }

    #[test]
    fn classical_has_no_shift_route() {
        let r = run_gradcheck(Variant::Classical, EnvName::Acrobot, 1).unwrap();
        assert!(r.adjoint_vs_shift.is_none() && r.shift_vs_fd.is_none());
        assert_eq!(r.params_checked, 292);
        assert!(r.passed(), "{}", r.render());
    }

    fn corrupted(spec: &VqcLayerSpec, x: &[f64], up: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (dx, mut dw) = vqc_vjp(spec, x, up)?;
        dw[5] += 0.25;
        Ok((dx, dw))
    }

    #[test]
    fn corrupted_vjp_is_caught_and_named() {
        let r = run_gradcheck_with(
            Variant::Quantum,
            EnvName::CartPole,
            7,
            GradcheckOptions { vjp: Some(corrupted) },
        )
        .unwrap();
        assert!(!r.passed());
        let worst = r.worst_offender().unwrap();
        assert!(worst.param.ends_with(".core.weights[5]"), "{}", worst.param);
        assert!(r.render().contains("FAIL"));
        assert!(matches!(r.into_result(), Err(Error::Tolerance(_))));
    }

    #[test]
    fn rel_error_floor() {
        assert_eq!(rel_error(1.0, 1.0), 0.0);
        assert!((rel_error(2.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((rel_error(1e-9, 0.0) - 1e-6).abs() < 1e-18);
    }
}
