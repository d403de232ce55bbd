use rand::Rng;

use crate::error::{Error, Result};

/// Dense affine map `y = W·x + b` with a row-major `out_dim × in_dim` weight.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearLayer {
    in_dim: usize,
    out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weight.len() != in_dim * out_dim || bias.len() != out_dim {
            return Err(Error::config(format!(
                "linear layer {in_dim}->{out_dim} needs {} weights and {out_dim} biases, got {} and {}",
                in_dim * out_dim,
                weight.len(),
                bias.len()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weight,
            bias,
        })
    }

    /// Weights uniform in ±1/√in_dim, biases zero.
    pub fn init_uniform<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weight = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        Self {
            in_dim,
            out_dim,
            weight,
            bias: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn n_params(&self) -> usize {
        self.out_dim * self.in_dim + self.out_dim
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        linear_apply(&self.weight, &self.bias, x)
    }

    /// Returns `(dx, dweight, dbias)` for upstream gradient `gy` at input `x`.
    pub fn backward(&self, x: &[f64], gy: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if x.len() != self.in_dim || gy.len() != self.out_dim {
            return Err(Error::config("linear backward shape mismatch"));
        }
        Ok(linear_backward(&self.weight, x, gy))
    }
}

pub fn linear_forward(layer: &LinearLayer, x: &[f64]) -> Result<Vec<f64>> {
    layer.forward(x)
}

pub(crate) fn linear_apply(weight: &[f64], bias: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let (out, inp) = (bias.len(), x.len());
    if weight.len() != out * inp {
        return Err(Error::config(format!(
            "linear input has length {inp}, weight holds {} entries for {out} outputs",
            weight.len()
        )));
    }
    Ok(weight
        .chunks_exact(inp.max(1))
        .take(out)
        .zip(bias)
        .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect())
}

pub(crate) fn linear_backward(weight: &[f64], x: &[f64], gy: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let inp = x.len();
    let mut dx = vec![0.0; inp];
    let mut dw = vec![0.0; weight.len()];
    for (o, g) in gy.iter().enumerate() {
        let row = &weight[o * inp..(o + 1) * inp];
        let drow = &mut dw[o * inp..(o + 1) * inp];
        for j in 0..inp {
            dx[j] += row[j] * g;
            drow[j] = x[j] * g;
        }
    }
    (dx, dw, gy.to_vec())
}
