mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qa3c::sim::{
    adjoint_vjp, apply_gate, dense_unitary_oracle, new_zero_state, oracle_expectations, param_shift_jacobian,
    run_circuit, CircuitProgram, GateOp,
};

#[test]
fn random_programs_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..200 {
        let n = 1 + i % 4;
        let (p, angles) = common::random_program(&mut rng, n, 1 + i % 13);
        let fast = run_circuit(&p, &angles).unwrap();
        let dense = oracle_expectations(&p, &angles).unwrap();
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10, "program {i}: {a} vs {b}");
        }
    }
}

#[test]
fn oracle_matrices_are_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (p, angles) = common::random_program(&mut rng, 3, 10);
        let u = dense_unitary_oracle(&p, &angles).unwrap();
        let err = (u.adjoint() * &u - nalgebra::DMatrix::<Complex64>::identity(8, 8)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}

#[test]
fn final_state_equals_first_oracle_column() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (p, angles) = common::random_program(&mut rng, 4, 20);
    let u = dense_unitary_oracle(&p, &angles).unwrap();
    let psi = p.final_state(&angles).unwrap();
    for (i, a) in psi.amplitudes().iter().enumerate() {
        assert!((a - u[(i, 0)]).norm() < 1e-12);
    }
}

#[test]
fn adjoint_matches_shift_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..40 {
        let n = 1 + i % 5;
        let (p, angles) = common::random_program(&mut rng, n, 15);
        let up: Vec<f64> = (0..n).map(|k| 0.5 - k as f64 * 0.3).collect();
        let (_, g) = adjoint_vjp(&p, &angles, &up).unwrap();
        let jac = param_shift_jacobian(&p, &angles).unwrap();
        for s in 0..p.n_slots() {
            let want: f64 = (0..n).map(|k| up[k] * jac[k][s]).sum();
            assert!((g[s] - want).abs() < 1e-10, "slot {s}: {} vs {want}", g[s]);
        }
    }
}

#[test]
fn twelve_qubits_run_and_thirteen_do_not() {
    let mut p = CircuitProgram::new(12).unwrap();
    p.push_h(11).unwrap();
    p.push_cnot(11, 0).unwrap();
    let z = run_circuit(&p, &[]).unwrap();
    assert!(z[0].abs() < 1e-12 && z[11].abs() < 1e-12 && (z[5] - 1.0).abs() < 1e-12);
    assert!(CircuitProgram::new(13).is_err());
}

proptest! {
    #[test]
    fn gates_preserve_norm(
        n in 1usize..=6,
        ops in prop::collection::vec((0usize..5, 0usize..6, 1usize..6, -10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 1..30),
    ) {
        let mut psi = new_zero_state(n).unwrap();
        for (kind, t, off, a, b, c) in ops {
            let t = t % n;
            let gate = match kind {
                0 => GateOp::h(t),
                1 => GateOp::ry(t, a),
                2 => GateOp::rz(t, a),
                3 if n > 1 => GateOp::cnot((t + off % (n - 1) + 1) % n, t),
                _ => GateOp::rot(t, a, b, c),
            };
            psi = apply_gate(psi, &gate).unwrap();
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        }
        for z in psi.expectations_z() {
            prop_assert!(z.abs() <= 1.0 + 1e-12);
        }
    }
}
