//! Reverse-mode tape over vector-valued nodes.
//!
//! Values are computed eagerly when a node is recorded; [`Tape::backward`]
//! walks the nodes in reverse recording order. Parameters are named leaves and
//! are deduplicated by name, so recording the same model several times on one
//! tape accumulates into a single gradient entry.

use std::collections::HashMap;

use super::linear::{linear_apply, linear_backward};
use super::vqc::{vqc_forward, vqc_vjp, VqcLayerSpec};
use super::{softmax, GradientBundle};
use crate::error::{Error, Result};

/// Signature of the VQC vector-Jacobian product used during the backward pass.
pub type VqcVjpFn = fn(&VqcLayerSpec, &[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Linear { w: Var, b: Var, x: Var },
    Vqc { w: Var, x: Var, n_qubits: usize, n_layers: usize },
    Arctan(Var),
    Softmax(Var),
    Log(Var),
    Sum(Var),
    Square(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Index(Var, usize),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Vec<f64>,
}

pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<(String, Var)>,
    by_name: HashMap<String, Var>,
    vjp: VqcVjpFn,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::with_vqc_vjp(vqc_vjp)
    }

    /// A tape whose VQC nodes backpropagate through `vjp` instead of the adjoint method.
    pub fn with_vqc_vjp(vjp: VqcVjpFn) -> Self {
        Self {
            nodes: Vec::new(),
            params: Vec::new(),
            by_name: HashMap::new(),
            vjp,
        }
    }

    fn push(&mut self, op: Op, value: Vec<f64>) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> Result<f64> {
        match self.value(v) {
            [x] => Ok(*x),
            other => Err(Error::usage(format!(
                "expected a scalar node, found length {}",
                other.len()
            ))),
        }
    }

    /// Named trainable leaf. Recording a name twice returns the first leaf.
    pub fn param(&mut self, name: &str, values: &[f64]) -> Result<Var> {
        if let Some(&v) = self.by_name.get(name) {
            if self.value(v).len() != values.len() {
                return Err(Error::config(format!(
                    "parameter `{name}` recorded twice with different sizes"
                )));
            }
            return Ok(v);
        }
        let v = self.push(Op::Leaf, values.to_vec());
        self.by_name.insert(name.to_string(), v);
        self.params.push((name.to_string(), v));
        Ok(v)
    }

    pub fn constant(&mut self, values: &[f64]) -> Var {
        self.push(Op::Leaf, values.to_vec())
    }

    pub fn linear(&mut self, w: Var, b: Var, x: Var) -> Result<Var> {
        let y = linear_apply(self.value(w), self.value(b), self.value(x))?;
        Ok(self.push(Op::Linear { w, b, x }, y))
    }

    pub fn vqc(&mut self, w: Var, x: Var, n_qubits: usize, n_layers: usize) -> Result<Var> {
        let spec = VqcLayerSpec::with_weights(n_qubits, n_layers, self.value(w).to_vec())?;
        let y = vqc_forward(&spec, self.value(x))?;
        Ok(self.push(
            Op::Vqc {
                w,
                x,
                n_qubits,
                n_layers,
            },
            y,
        ))
    }

    pub fn arctan(&mut self, x: Var) -> Var {
        let y = self.value(x).iter().map(|v| v.atan()).collect();
        self.push(Op::Arctan(x), y)
    }

    pub fn softmax(&mut self, x: Var) -> Result<Var> {
        let y = softmax(self.value(x))?;
        Ok(self.push(Op::Softmax(x), y))
    }

    pub fn log(&mut self, x: Var) -> Var {
        let y = self.value(x).iter().map(|v| v.ln()).collect();
        self.push(Op::Log(x), y)
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let y = vec![self.value(x).iter().sum()];
        self.push(Op::Sum(x), y)
    }

    pub fn square(&mut self, x: Var) -> Var {
        let y = self.value(x).iter().map(|v| v * v).collect();
        self.push(Op::Square(x), y)
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.len() != vb.len() {
            return Err(Error::config(format!(
                "element-wise operands have lengths {} and {}",
                va.len(),
                vb.len()
            )));
        }
        let y = va.iter().zip(vb).map(|(x, y)| f(*x, *y)).collect();
        Ok(self.push(op, y))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn scale(&mut self, x: Var, k: f64) -> Var {
        let y = self.value(x).iter().map(|v| v * k).collect();
        self.push(Op::Scale(x, k), y)
    }

    pub fn index(&mut self, x: Var, i: usize) -> Result<Var> {
        let v = *self
            .value(x)
            .get(i)
            .ok_or_else(|| Error::config(format!("index {i} out of range")))?;
        Ok(self.push(Op::Index(x, i), vec![v]))
    }

    /// Gradients of the scalar `root` with respect to every named parameter on the tape.
    pub fn backward(&self, root: Var) -> Result<GradientBundle> {
        if self.value(root).len() != 1 {
            return Err(Error::usage(format!(
                "backward needs a scalar root, node has length {}",
                self.value(root).len()
            )));
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; root.0 + 1];
        adj[root.0] = Some(vec![1.0]);

        fn acc(adj: &mut [Option<Vec<f64>>], v: Var, g: &[f64]) {
            match &mut adj[v.0] {
                Some(a) => a.iter_mut().zip(g).for_each(|(x, y)| *x += y),
                slot @ None => *slot = Some(g.to_vec()),
            }
        }

        for i in (0..=root.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match node.op {
                Op::Leaf => {
                    adj[i] = Some(g);
                }
                Op::Linear { w, b, x } => {
                    let (dx, dw, db) = linear_backward(self.value(w), self.value(x), &g);
                    acc(&mut adj, x, &dx);
                    acc(&mut adj, w, &dw);
                    acc(&mut adj, b, &db);
                }
                Op::Vqc {
                    w,
                    x,
                    n_qubits,
                    n_layers,
                } => {
                    let spec = VqcLayerSpec::with_weights(n_qubits, n_layers, self.value(w).to_vec())?;
                    let (dx, dw) = (self.vjp)(&spec, self.value(x), &g)?;
                    acc(&mut adj, x, &dx);
                    acc(&mut adj, w, &dw);
                }
                Op::Arctan(x) => {
                    let d: Vec<f64> = self
                        .value(x)
                        .iter()
                        .zip(&g)
                        .map(|(v, g)| g / (1.0 + v * v))
                        .collect();
                    acc(&mut adj, x, &d);
                }
                Op::Softmax(x) => {
                    let p = &node.value;
                    let dot: f64 = p.iter().zip(&g).map(|(p, g)| p * g).sum();
                    let d: Vec<f64> = p.iter().zip(&g).map(|(p, g)| p * (g - dot)).collect();
                    acc(&mut adj, x, &d);
                }
                Op::Log(x) => {
                    let d: Vec<f64> = self.value(x).iter().zip(&g).map(|(v, g)| g / v).collect();
                    acc(&mut adj, x, &d);
                }
                Op::Sum(x) => {
                    let d = vec![g[0]; self.value(x).len()];
                    acc(&mut adj, x, &d);
                }
                Op::Square(x) => {
                    let d: Vec<f64> = self
                        .value(x)
                        .iter()
                        .zip(&g)
                        .map(|(v, g)| 2.0 * v * g)
                        .collect();
                    acc(&mut adj, x, &d);
                }
                Op::Add(a, b) => {
                    acc(&mut adj, a, &g);
                    acc(&mut adj, b, &g);
                }
                Op::Sub(a, b) => {
                    acc(&mut adj, a, &g);
                    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                    acc(&mut adj, b, &neg);
                }
                Op::Mul(a, b) => {
                    let da: Vec<f64> = self.value(b).iter().zip(&g).map(|(v, g)| v * g).collect();
                    let db: Vec<f64> = self.value(a).iter().zip(&g).map(|(v, g)| v * g).collect();
                    acc(&mut adj, a, &da);
                    acc(&mut adj, b, &db);
                }
                Op::Scale(x, k) => {
                    let d: Vec<f64> = g.iter().map(|v| v * k).collect();
                    acc(&mut adj, x, &d);
                }
                Op::Index(x, j) => {
                    let mut d = vec![0.0; self.value(x).len()];
                    d[j] = g[0];
                    acc(&mut adj, x, &d);
                }
            }
        }

        let mut out = GradientBundle::new();
        for (name, v) in &self.params {
            let g = adj
                .get_mut(v.0)
                .and_then(Option::take)
                .unwrap_or_else(|| vec![0.0; self.value(*v).len()]);
            out.insert(name.clone(), g);
        }
        Ok(out)
    }
}
