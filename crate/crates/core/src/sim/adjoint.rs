use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{apply_prim, CircuitProgram, Prim, StateVector};
use crate::error::{Error, Result};

/// Vector-Jacobian product of the Z readout with respect to every angle slot.
///
/// Returns `(expectations, grad)` where `grad[s] = Σ_k upstream[k] · ∂⟨Z_k⟩/∂angle[s]`.
/// One forward sweep and one reverse sweep over the primitive gate list.
pub fn adjoint_vjp(
    program: &CircuitProgram,
    angles: &[f64],
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = program.n_qubits();
    if upstream.len() != n {
        return Err(Error::config(format!(
            "upstream has length {}, expected {n}",
            upstream.len()
        )));
    }
    let prims = program.primitives();
    let mut psi = program.final_state(angles)?;
    let expectations = psi.expectations_z();

    // λ = O ψ with O = Σ_k u_k Z_k, which is diagonal in the computational basis.
    let lambda_amps = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let w: f64 = upstream
                .iter()
                .enumerate()
                .map(|(q, u)| if i >> (n - 1 - q) & 1 == 0 { *u } else { -*u })
                .sum();
            a * w
        })
        .collect();
    let mut lambda = StateVector::from_amplitudes(lambda_amps)?;

    let mut grad = vec![0.0; program.n_slots()];
    for &p in prims.iter().rev() {
        match p {
            Prim::Ry(t, s) => grad[s] += reverse_step(&mut lambda, &mut psi, t, Pauli::Y, angles[s]),
            Prim::Rz(t, s) => grad[s] += reverse_step(&mut lambda, &mut psi, t, Pauli::Z, angles[s]),
            _ => {
                apply_prim(&mut psi, p, angles, true);
                apply_prim(&mut lambda, p, angles, true);
            }
        }
    }
    Ok((expectations, grad))
}

#[derive(Clone, Copy)]
enum Pauli {
    Y,
    Z,
}

/// Returns Im⟨λ|G_t|ψ⟩ (the derivative contribution of the rotation angle for
/// U = exp(-iθG/2)), then applies U(θ)† to both vectors, all in one sweep.
fn reverse_step(lambda: &mut StateVector, psi: &mut StateVector, t: usize, g: Pauli, theta: f64) -> f64 {
    let mask = 1usize << (psi.n_qubits() - 1 - t);
    let (s, c) = (theta / 2.0).sin_cos();
    // Re(l̄a) and Im(l̄a)
    let re = |l: &Complex64, a: &Complex64| l.re * a.re + l.im * a.im;
    let im = |l: &Complex64, a: &Complex64| l.re * a.im - l.im * a.re;
    let mut acc = 0.0;
    for (lb, ab) in lambda
        .amps_mut()
        .chunks_exact_mut(2 * mask)
        .zip(psi.amps_mut().chunks_exact_mut(2 * mask))
    {
        let (l0, l1) = lb.split_at_mut(mask);
        let (a0, a1) = ab.split_at_mut(mask);
        for j in 0..mask {
            match g {
                Pauli::Y => {
                    // Y|x0,x1⟩ = (-i x1, i x0)
                    acc += re(&l1[j], &a0[j]) - re(&l0[j], &a1[j]);
                    let (x, y) = (a0[j], a1[j]);
                    a0[j] = x * c + y * s;
                    a1[j] = y * c - x * s;
                    let (x, y) = (l0[j], l1[j]);
                    l0[j] = x * c + y * s;
                    l1[j] = y * c - x * s;
                }
                Pauli::Z => {
                    acc += im(&l0[j], &a0[j]) - im(&l1[j], &a1[j]);
                    let p0 = Complex64::new(c, s);
                    let p1 = Complex64::new(c, -s);
                    a0[j] *= p0;
                    a1[j] *= p1;
                    l0[j] *= p0;
                    l1[j] *= p1;
                }
            }
        }
    }
    acc
}

/// Full Jacobian `jac[k][s] = ∂⟨Z_k⟩/∂angle[s]` by the two-term shift rule.
///
/// Every slot drives a single RY or RZ, so the rule with shifts of ±π/2 is exact.
pub fn param_shift_jacobian(program: &CircuitProgram, angles: &[f64]) -> Result<Vec<Vec<f64>>> {
    program.check_angles(angles)?;
    let n = program.n_qubits();
    let mut jac = vec![vec![0.0; program.n_slots()]; n];
    let mut shifted = angles.to_vec();
    for s in 0..program.n_slots() {
        shifted[s] = angles[s] + FRAC_PI_2;
        let plus = super::run_circuit(program, &shifted)?;
        shifted[s] = angles[s] - FRAC_PI_2;
        let minus = super::run_circuit(program, &shifted)?;
        shifted[s] = angles[s];
        for k in 0..n {
            jac[k][s] = (plus[k] - minus[k]) / 2.0;
        }
    }
    Ok(jac)
}
