//! Differentiable pieces of the dressed VQC and a small reverse-mode tape
//! that composes them into scalar losses.

mod linear;
mod tape;
mod vqc;

use std::collections::BTreeMap;

pub use linear::{linear_forward, LinearLayer};
pub use tape::{Tape, Var, VqcVjpFn};
pub use vqc::{build_vqc_program, param_shift_grad, vqc_forward, vqc_vjp, VqcJacobians, VqcLayerSpec};

use crate::error::{Error, Result};

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.iter().any(|v| v.is_nan()) {
        return Err(Error::numeric(format!("softmax input contains NaN: {logits:?}")));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::numeric(format!("softmax input is not finite: {logits:?}")));
    }
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Gradients keyed by parameter name, each flat and congruent with its parameter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradientBundle {
    entries: BTreeMap<String, Vec<f64>>,
}

impl GradientBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, grad: Vec<f64>) {
        self.entries.insert(name.into(), grad);
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.entries.get(name).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Element-wise sum; both bundles must name the same parameters with equal lengths.
    pub fn add(&mut self, other: &GradientBundle) -> Result<()> {
        if self.entries.is_empty() {
            *self = other.clone();
            return Ok(());
        }
        if self.entries.len() != other.entries.len() {
            return Err(Error::config("gradient bundles name different parameters"));
        }
        for (name, g) in &other.entries {
            let mine = self
                .entries
                .get_mut(name)
                .ok_or_else(|| Error::config(format!("gradient bundle lacks `{name}`")))?;
            if mine.len() != g.len() {
                return Err(Error::config(format!("gradient `{name}` has mismatched length")));
            }
            mine.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        Ok(())
    }

    pub fn scale(&mut self, k: f64) {
        self.entries
            .values_mut()
            .flat_map(|v| v.iter_mut())
            .for_each(|x| *x *= k);
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .values()
            .flat_map(|v| v.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}
