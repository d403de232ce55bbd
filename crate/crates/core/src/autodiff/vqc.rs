//! The arctan-encoded variational circuit used as the model core.
//!
//! Layout of the angle vector for `n` qubits and `L` layers:
//! slots `2q` and `2q + 1` hold `arctan(x_q)` and `arctan(x_q²)`; the trainable
//! rotation of qubit `q` in layer `l` occupies slots `2n + 3(l·n + q) .. +3`,
//! which is exactly the row-major order of the `(L, n, 3)` weight tensor.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sim::{adjoint_vjp, param_shift_jacobian, run_circuit, CircuitProgram};

#[derive(Clone, Debug, PartialEq)]
pub struct VqcLayerSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Row-major `(n_layers, n_qubits, 3)` rotation angles in radians.
    pub weights: Vec<f64>,
}

impl VqcLayerSpec {
    pub fn zeros(n_qubits: usize, n_layers: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            weights: vec![0.0; n_layers * n_qubits * 3],
        }
    }

    pub fn with_weights(n_qubits: usize, n_layers: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n_layers * n_qubits * 3 {
            return Err(Error::config(format!(
                "{n_layers} layers of {n_qubits} qubits need {} weights, got {}",
                n_layers * n_qubits * 3,
                weights.len()
            )));
        }
        Ok(Self {
            n_qubits,
            n_layers,
            weights,
        })
    }

    /// Angles uniform in (−π, π).
    pub fn init_uniform<R: Rng + ?Sized>(n_qubits: usize, n_layers: usize, rng: &mut R) -> Self {
        use std::f64::consts::PI;
        let weights = (0..n_layers * n_qubits * 3)
            .map(|_| rng.gen_range(-PI..PI))
            .collect();
        Self {
            n_qubits,
            n_layers,
            weights,
        }
    }

    pub fn n_weights(&self) -> usize {
        self.n_layers * self.n_qubits * 3
    }

    fn angles(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_qubits {
            return Err(Error::config(format!(
                "VQC input has length {}, expected {}",
                x.len(),
                self.n_qubits
            )));
        }
        if self.weights.len() != self.n_weights() {
            return Err(Error::config("VQC weight tensor has the wrong size"));
        }
        let mut a = Vec::with_capacity(2 * self.n_qubits + self.weights.len());
        for &v in x {
            a.push(v.atan());
            a.push((v * v).atan());
        }
        a.extend_from_slice(&self.weights);
        Ok(a)
    }
}

/// Gate sequence for `n_qubits` and `n_layers`: one encoding block
/// (H, RY, RZ per qubit) then, per layer, CNOT rings at distance 1 and 2 and a
/// trainable rotation on every qubit. Ring CNOTs whose control would equal the
/// target (fewer than three qubits) are left out.
pub fn build_vqc_program(n_qubits: usize, n_layers: usize) -> Result<CircuitProgram> {
    let mut p = CircuitProgram::new(n_qubits)?;
    for q in 0..n_qubits {
        p.push_h(q)?;
        p.push_ry(q, false)?;
        p.push_rz(q, false)?;
    }
    for _ in 0..n_layers {
        for dist in [1, 2] {
            for q in 0..n_qubits {
                let t = (q + dist) % n_qubits;
                if t != q {
                    p.push_cnot(q, t)?;
                }
            }
        }
        for q in 0..n_qubits {
            p.push_rot(q, true)?;
        }
    }
    Ok(p)
}

/// Pauli-Z expectations of the encoded circuit for input `x`.
pub fn vqc_forward(spec: &VqcLayerSpec, x: &[f64]) -> Result<Vec<f64>> {
    let angles = spec.angles(x)?;
    run_circuit(&build_vqc_program(spec.n_qubits, spec.n_layers)?, &angles)
}

/// Chains angle-slot gradients back to the raw inputs through the arctan encoding.
fn chain_encoding(x: &[f64], slot_grad: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(q, &v)| {
            let v2 = v * v;
            slot_grad[2 * q] / (1.0 + v2) + slot_grad[2 * q + 1] * 2.0 * v / (1.0 + v2 * v2)
        })
        .collect()
}

/// Adjoint vector-Jacobian product: returns `(dx, dweights)` for `upstream` on the outputs.
pub fn vqc_vjp(spec: &VqcLayerSpec, x: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let angles = spec.angles(x)?;
    let program = build_vqc_program(spec.n_qubits, spec.n_layers)?;
    let (_, g) = adjoint_vjp(&program, &angles, upstream)?;
    let enc = 2 * spec.n_qubits;
    Ok((chain_encoding(x, &g[..enc]), g[enc..].to_vec()))
}

/// Jacobians of the VQC readout obtained with the parameter-shift rule.
#[derive(Clone, Debug)]
pub struct VqcJacobians {
    pub outputs: Vec<f64>,
    /// `d_input[k][j] = ∂⟨Z_k⟩/∂x_j`
    pub d_input: Vec<Vec<f64>>,
    /// `d_weights[k][w] = ∂⟨Z_k⟩/∂weights[w]`
    pub d_weights: Vec<Vec<f64>>,
}

impl VqcJacobians {
    /// Contracts both Jacobians with `upstream`, giving the same pair `vqc_vjp` returns.
    pub fn contract(&self, upstream: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let contract = |jac: &Vec<Vec<f64>>| {
            let cols = jac.first().map_or(0, Vec::len);
            (0..cols)
                .map(|j| jac.iter().zip(upstream).map(|(row, u)| row[j] * u).sum())
                .collect()
        };
        (contract(&self.d_input), contract(&self.d_weights))
    }
}

pub fn param_shift_grad(spec: &VqcLayerSpec, x: &[f64]) -> Result<VqcJacobians> {
    let angles = spec.angles(x)?;
    let program = build_vqc_program(spec.n_qubits, spec.n_layers)?;
    let outputs = run_circuit(&program, &angles)?;
    let jac = param_shift_jacobian(&program, &angles)?;
    let enc = 2 * spec.n_qubits;
    let d_input = jac.iter().map(|row| chain_encoding(x, &row[..enc])).collect();
    let d_weights = jac.iter().map(|row| row[enc..].to_vec()).collect();
    Ok(VqcJacobians {
        outputs,
        d_input,
        d_weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{GateKind, Prim};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_qubit_single_layer_matches_reference_layout() {
        let p = build_vqc_program(4, 1).unwrap();
        let kinds: Vec<GateKind> = p.gates().iter().map(|g| g.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::H).count(), 4);
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::Ry).count(), 4);
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::Rz).count(), 4);
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::Rot).count(), 4);
        let cnots: Vec<(usize, usize)> = p
            .gates()
            .iter()
            .filter(|g| g.kind == GateKind::Cnot)
            .map(|g| (g.control.unwrap(), g.target))
            .collect();
        assert_eq!(
            cnots,
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3), (2, 0), (3, 1)]
        );
        // encoding block precedes everything else and appears once
        for q in 0..4 {
            assert_eq!(p.gates()[3 * q].kind, GateKind::H);
            assert_eq!(p.gates()[3 * q + 1].kind, GateKind::Ry);
            assert_eq!(p.gates()[3 * q + 2].kind, GateKind::Rz);
        }
    }

    #[test]
    fn default_size_slot_counts() {
        let p = build_vqc_program(8, 2).unwrap();
        assert_eq!(p.trainable_slots().len(), 48);
        assert_eq!(p.encoding_slots().len(), 16);
        let rot = p.primitives().iter().filter(|x| matches!(x, Prim::Ry(..))).count();
        assert_eq!(rot, 8 + 16);
    }

    #[test]
    fn zero_input_zero_weights_is_unbiased() {
        let spec = VqcLayerSpec::zeros(8, 2);
        let z = vqc_forward(&spec, &[0.0; 8]).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12), "{z:?}");
    }

    #[test]
    fn outputs_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let spec = VqcLayerSpec::init_uniform(5, 2, &mut rng);
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-50.0..50.0)).collect();
            for v in vqc_forward(&spec, &x).unwrap() {
                assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
            }
        }
    }

    #[test]
    fn zero_upstream_vjp() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = VqcLayerSpec::init_uniform(4, 2, &mut rng);
        let (dx, dw) = vqc_vjp(&spec, &[0.3, -0.2, 1.5, 0.0], &[0.0; 4]).unwrap();
        assert!(dx.iter().chain(&dw).all(|v| *v == 0.0));
    }

    #[test]
    fn shape_errors() {
        let spec = VqcLayerSpec::zeros(4, 1);
        assert!(vqc_forward(&spec, &[0.0; 3]).is_err());
        assert!(vqc_vjp(&spec, &[0.0; 4], &[0.0; 3]).is_err());
        assert!(VqcLayerSpec::with_weights(4, 1, vec![0.0; 11]).is_err());
    }

    #[test]
    fn two_qubit_ring_skips_self_loops() {
        let p = build_vqc_program(2, 1).unwrap();
        let cnots = p.gates().iter().filter(|g| g.kind == GateKind::Cnot).count();
        assert_eq!(cnots, 2);
    }
}
