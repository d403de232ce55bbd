//! Exact statevector simulation of the circuit family used by the dressed VQC.
//!
//! Qubit 0 is the most significant bit of the amplitude index. Gates are
//! applied in place with a stride loop over amplitude pairs; no gate matrix
//! is ever expanded to the full register.

mod adjoint;
pub mod oracle;

pub use adjoint::{adjoint_vjp, param_shift_jacobian};
pub use oracle::{dense_unitary_oracle, oracle_expectations, ORACLE_MAX_QUBITS};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_QUBITS: usize = 1;
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    Ry,
    Rz,
    Cnot,
    /// RZ(alpha), then RY(beta), then RZ(gamma) on the same target.
    Rot,
}

impl GateKind {
    /// Number of angles the gate takes.
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::Cnot => 0,
            GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rot => 3,
        }
    }
}

/// A gate with concrete angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Only the first `kind.arity()` entries are meaningful.
    pub angles: [f64; 3],
}

impl GateOp {
    pub fn h(target: usize) -> Self {
        Self::raw(GateKind::H, target, None, [0.0; 3])
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        Self::raw(GateKind::Ry, target, None, [theta, 0.0, 0.0])
    }

    pub fn rz(target: usize, theta: f64) -> Self {
        Self::raw(GateKind::Rz, target, None, [theta, 0.0, 0.0])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::raw(GateKind::Cnot, target, Some(control), [0.0; 3])
    }

    pub fn rot(target: usize, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::raw(GateKind::Rot, target, None, [alpha, beta, gamma])
    }

    /// Checked constructor taking a slice of angles whose length must match the kind.
    pub fn new(
        kind: GateKind,
        target: usize,
        control: Option<usize>,
        angles: &[f64],
    ) -> Result<Self> {
        if angles.len() != kind.arity() {
            return Err(Error::config(format!(
                "{kind:?} takes {} angle(s), got {}",
                kind.arity(),
                angles.len()
            )));
        }
        if (kind == GateKind::Cnot) != control.is_some() {
            return Err(Error::config(format!(
                "control qubit is required for CNOT and forbidden for {kind:?}"
            )));
        }
        let mut a = [0.0; 3];
        a[..angles.len()].copy_from_slice(angles);
        Ok(Self::raw(kind, target, control, a))
    }

    fn raw(kind: GateKind, target: usize, control: Option<usize>, angles: [f64; 3]) -> Self {
        Self {
            kind,
            target,
            control,
            angles,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(Error::config(format!(
                "target qubit {} out of range for {n_qubits} qubits",
                self.target
            )));
        }
        if let Some(c) = self.control {
            if c >= n_qubits {
                return Err(Error::config(format!(
                    "control qubit {c} out of range for {n_qubits} qubits"
                )));
            }
            if c == self.target {
                return Err(Error::config(format!("control and target are both qubit {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Prepares |0…0⟩ on `n_qubits` qubits.
pub fn new_zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

/// Applies `gate` to `state` and returns the result.
pub fn apply_gate(mut state: StateVector, gate: &GateOp) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if !(MIN_QUBITS..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::config(format!(
            "n_qubits must be in {MIN_QUBITS}..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two in the supported range;
    /// normalisation is the caller's responsibility.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::config(format!("{len} amplitudes is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let t = gate.target;
        match gate.kind {
            GateKind::H => self.apply_h(t),
            GateKind::Ry => self.apply_ry(t, gate.angles[0]),
            GateKind::Rz => self.apply_rz(t, gate.angles[0]),
            GateKind::Cnot => self.apply_cnot(gate.control.expect("validated"), t),
            GateKind::Rot => {
                self.apply_rz(t, gate.angles[0]);
                self.apply_ry(t, gate.angles[1]);
                self.apply_rz(t, gate.angles[2]);
            }
        }
        Ok(())
    }

    /// Calls `f(i0, i1)` for every amplitude pair that differs only in `qubit`'s bit.
    #[inline]
    fn for_pairs(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let mask = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = block.split_at_mut(mask);
            for (x, y) in lo.iter_mut().zip(hi) {
                f(x, y);
            }
        }
    }

    pub(crate) fn apply_h(&mut self, q: usize) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.for_pairs(q, |x, y| {
            let (a, b) = (*x, *y);
            *x = (a + b) * r;
            *y = (a - b) * r;
        });
    }

    pub(crate) fn apply_ry(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        self.for_pairs(q, |x, y| {
            let (a, b) = (*x, *y);
            *x = a * c - b * s;
            *y = a * s + b * c;
        });
    }

    pub(crate) fn apply_rz(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let p0 = Complex64::new(c, -s);
        let p1 = Complex64::new(c, s);
        self.for_pairs(q, |x, y| {
            *x *= p0;
            *y *= p1;
        });
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for (b, block) in self.amps.chunks_exact_mut(2 * tmask).enumerate() {
            let base = b * 2 * tmask;
            let (lo, hi) = block.split_at_mut(tmask);
            if cmask > tmask {
                // the control bit is constant across the block
                if base & cmask != 0 {
                    lo.swap_with_slice(hi);
                }
            } else {
                for (j, (x, y)) in lo.iter_mut().zip(hi).enumerate() {
                    if j & cmask != 0 {
                        std::mem::swap(x, y);
                    }
                }
            }
        }
    }

    /// Arbitrary single-qubit unitary, row-major `[u00, u01, u10, u11]`.
    pub(crate) fn apply_u2(&mut self, q: usize, u: &[Complex64; 4]) {
        let [u00, u01, u10, u11] = *u;
        self.for_pairs(q, |x, y| {
            let (a, b) = (*x, *y);
            *x = u00 * a + u01 * b;
            *y = u10 * a + u11 * b;
        });
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// ⟨Z⟩ on `qubit`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::config(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        let mask = self.mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// ⟨Z_q⟩ for every qubit, in one pass over the amplitudes.
    pub fn expectations_z(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut out = vec![0.0; n];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                if i >> (n - 1 - q) & 1 == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }
}

/// A gate in a program whose angles are read from the program's angle slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotGate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Index of the gate's first angle in the angle vector; `kind.arity()` slots follow.
    pub first_slot: usize,
}

/// Single-angle primitive the adjoint and shift routines iterate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Prim {
    H(usize),
    Cnot(usize, usize),
    Ry(usize, usize),
    Rz(usize, usize),
}

/// An ordered gate list plus the layout of its angle slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitProgram {
    n_qubits: usize,
    gates: Vec<SlotGate>,
    n_slots: usize,
    trainable: Vec<bool>,
}

impl CircuitProgram {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            n_slots: 0,
            trainable: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[SlotGate] {
        &self.gates
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Slot indices holding trainable weights.
    pub fn trainable_slots(&self) -> Vec<usize> {
        (0..self.n_slots).filter(|&s| self.trainable[s]).collect()
    }

    /// Slot indices holding data-encoding angles.
    pub fn encoding_slots(&self) -> Vec<usize> {
        (0..self.n_slots).filter(|&s| !self.trainable[s]).collect()
    }

    pub fn is_trainable(&self, slot: usize) -> bool {
        self.trainable[slot]
    }

    /// Appends a gate and returns the index of its first angle slot.
    pub fn push(
        &mut self,
        kind: GateKind,
        target: usize,
        control: Option<usize>,
        trainable: bool,
    ) -> Result<usize> {
        GateOp::new(kind, target, control, &[0.0; 3][..kind.arity()])?.validate(self.n_qubits)?;
        let first_slot = self.n_slots;
        self.gates.push(SlotGate {
            kind,
            target,
            control,
            first_slot,
        });
        self.n_slots += kind.arity();
        self.trainable
            .extend(std::iter::repeat(trainable).take(kind.arity()));
        Ok(first_slot)
    }

    pub fn push_h(&mut self, q: usize) -> Result<()> {
        self.push(GateKind::H, q, None, false).map(|_| ())
    }

    pub fn push_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(GateKind::Cnot, target, Some(control), false)
            .map(|_| ())
    }

    pub fn push_ry(&mut self, q: usize, trainable: bool) -> Result<usize> {
        self.push(GateKind::Ry, q, None, trainable)
    }

    pub fn push_rz(&mut self, q: usize, trainable: bool) -> Result<usize> {
        self.push(GateKind::Rz, q, None, trainable)
    }

    pub fn push_rot(&mut self, q: usize, trainable: bool) -> Result<usize> {
        self.push(GateKind::Rot, q, None, trainable)
    }

    pub(crate) fn check_angles(&self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.n_slots {
            return Err(Error::config(format!(
                "program has {} angle slots, got {} values",
                self.n_slots,
                angles.len()
            )));
        }
        Ok(())
    }

    /// Concrete gate list for the given angle values.
    pub fn bind(&self, angles: &[f64]) -> Result<Vec<GateOp>> {
        self.check_angles(angles)?;
        self.gates
            .iter()
            .map(|g| {
                let k = g.kind.arity();
                GateOp::new(
                    g.kind,
                    g.target,
                    g.control,
                    &angles[g.first_slot..g.first_slot + k],
                )
            })
            .collect()
    }

    /// The program with every rotation split into single-angle primitives.
    pub(crate) fn primitives(&self) -> Vec<Prim> {
        let mut out = Vec::with_capacity(self.gates.len() + 2 * self.n_slots);
        for g in &self.gates {
            let (t, s) = (g.target, g.first_slot);
            match g.kind {
                GateKind::H => out.push(Prim::H(t)),
                GateKind::Cnot => out.push(Prim::Cnot(g.control.expect("validated"), t)),
                GateKind::Ry => out.push(Prim::Ry(t, s)),
                GateKind::Rz => out.push(Prim::Rz(t, s)),
                GateKind::Rot => {
                    out.push(Prim::Rz(t, s));
                    out.push(Prim::Ry(t, s + 1));
                    out.push(Prim::Rz(t, s + 2));
                }
            }
        }
        out
    }

    /// Final state after running the program from |0…0⟩.
    ///
    /// Runs of single-qubit gates on the same wire are multiplied into one
    /// 2×2 matrix and applied when a CNOT touches the wire or at the end.
    pub fn final_state(&self, angles: &[f64]) -> Result<StateVector> {
        self.check_angles(angles)?;
        let mut psi = StateVector::zero(self.n_qubits)?;
        let mut pending: Vec<Option<[Complex64; 4]>> = vec![None; self.n_qubits];
        let flush = |psi: &mut StateVector, slot: &mut Option<[Complex64; 4]>, q: usize| {
            if let Some(u) = slot.take() {
                psi.apply_u2(q, &u);
            }
        };
        for p in self.primitives() {
            match p {
                Prim::Cnot(c, t) => {
                    flush(&mut psi, &mut pending[c], c);
                    flush(&mut psi, &mut pending[t], t);
                    psi.apply_cnot(c, t);
                }
                Prim::H(t) | Prim::Ry(t, _) | Prim::Rz(t, _) => {
                    let m = prim_matrix(p, angles);
                    pending[t] = Some(match pending[t] {
                        Some(prev) => mat_mul(&m, &prev),
                        None => m,
                    });
                }
            }
        }
        for (q, slot) in pending.iter_mut().enumerate() {
            flush(&mut psi, slot, q);
        }
        Ok(psi)
    }
}

fn prim_matrix(p: Prim, angles: &[f64]) -> [Complex64; 4] {
    let re = |x: f64| Complex64::new(x, 0.0);
    match p {
        Prim::H(_) => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            [re(r), re(r), re(r), re(-r)]
        }
        Prim::Ry(_, s) => {
            let (sn, c) = (angles[s] / 2.0).sin_cos();
            [re(c), re(-sn), re(sn), re(c)]
        }
        Prim::Rz(_, s) => {
            let (sn, c) = (angles[s] / 2.0).sin_cos();
            [Complex64::new(c, -sn), re(0.0), re(0.0), Complex64::new(c, sn)]
        }
        Prim::Cnot(..) => unreachable!("two-qubit gate has no 2x2 matrix"),
    }
}

fn mat_mul(a: &[Complex64; 4], b: &[Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub(crate) fn apply_prim(psi: &mut StateVector, p: Prim, angles: &[f64], inverse: bool) {
    let sign = if inverse { -1.0 } else { 1.0 };
    match p {
        Prim::H(t) => psi.apply_h(t),
        Prim::Cnot(c, t) => psi.apply_cnot(c, t),
        Prim::Ry(t, s) => psi.apply_ry(t, sign * angles[s]),
        Prim::Rz(t, s) => psi.apply_rz(t, sign * angles[s]),
    }
}

/// Runs `program` from |0…0⟩ and returns ⟨Z_q⟩ for every qubit.
pub fn run_circuit(program: &CircuitProgram, angles: &[f64]) -> Result<Vec<f64>> {
    Ok(program.final_state(angles)?.expectations_z())
}
