//! Dense-matrix reference for small programs.
//!
//! Every gate is expanded to a full 2^n × 2^n unitary with Kronecker products
//! and the circuit is their ordered product. This shares no code with the
//! stride-based simulator and is only meant for cross-checking it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CircuitProgram, GateKind, StateVector};
use crate::error::{Error, Result};

pub const ORACLE_MAX_QUBITS: usize = 4;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(a: [Complex64; 4]) -> CMat {
    CMat::from_row_slice(2, 2, &a)
}

fn h2() -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    mat2([c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)])
}

fn ry2(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2([c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

fn rz2(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2([c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)])
}

/// `op` on qubit `q` with identities elsewhere; qubit 0 is the leftmost factor.
fn embed(n: usize, q: usize, op: &CMat) -> CMat {
    let id = CMat::identity(2, 2);
    let mut m = CMat::identity(1, 1);
    for k in 0..n {
        m = m.kronecker(if k == q { op } else { &id });
    }
    m
}

fn cnot_full(n: usize, control: usize, target: usize) -> CMat {
    let p0 = mat2([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let p1 = mat2([c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let x = mat2([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let id = CMat::identity(2, 2);
    let mut a = CMat::identity(1, 1);
    let mut b = CMat::identity(1, 1);
    for k in 0..n {
        let (fa, fb) = if k == control {
            (&p0, &p1)
        } else if k == target {
            (&id, &x)
        } else {
            (&id, &id)
        };
        a = a.kronecker(fa);
        b = b.kronecker(fb);
    }
    a + b
}

/// Full unitary of `program` at `angles`. Refuses registers above four qubits.
pub fn dense_unitary_oracle(program: &CircuitProgram, angles: &[f64]) -> Result<DMatrix<Complex64>> {
    let n = program.n_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::config(format!(
            "dense oracle supports at most {ORACLE_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let gates = program.bind(angles)?;
    let mut u = CMat::identity(1 << n, 1 << n);
    for g in gates {
        let t = g.target;
        let gm = match g.kind {
            GateKind::H => embed(n, t, &h2()),
            GateKind::Ry => embed(n, t, &ry2(g.angles[0])),
            GateKind::Rz => embed(n, t, &rz2(g.angles[0])),
            GateKind::Rot => {
                let local = rz2(g.angles[2]) * ry2(g.angles[1]) * rz2(g.angles[0]);
                embed(n, t, &local)
            }
            GateKind::Cnot => cnot_full(n, g.control.expect("validated"), t),
        };
        u = gm * u;
    }
    Ok(u)
}

/// Pauli-Z expectations of `U|0…0⟩`, computed from the dense unitary.
pub fn oracle_expectations(program: &CircuitProgram, angles: &[f64]) -> Result<Vec<f64>> {
    let u = dense_unitary_oracle(program, angles)?;
    let amps: Vec<Complex64> = u.column(0).iter().copied().collect();
    let n = program.n_qubits();
    let psi = StateVector::from_amplitudes(amps)?;
    (0..n).map(|q| psi.expectation_z(q)).collect()
}
