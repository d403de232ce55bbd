//! Asynchronous advantage actor-critic training for dressed variational
//! quantum circuits.
//!
//! The crate is organised bottom-up:
//!
//! * [`sim`] – exact statevector simulation of the circuit family
//!   (H, RY, RZ, CNOT and three-angle rotations) with Pauli-Z readout.
//! * [`autodiff`] – linear layers, the arctan-encoded VQC map with adjoint
//!   and parameter-shift gradients, softmax, and a small reverse-mode tape.
//! * [`models`] – actor/critic assembly (quantum and classical variants),
//!   parameter accounting and checkpoints.
//! * [`envs`] – Cart-Pole, Acrobot and the 9×9 SimpleCrossing grid world.
//! * [`trainer`] – the worker loop, n-step returns, gradient accumulation and
//!   the shared Adam store.
//! * [`experiment`] – configuration files, run orchestration, metrics and
//!   verification commands used by the `qa3c` binary.

pub mod autodiff;
pub mod envs;
pub mod error;
pub mod experiment;
pub mod models;
pub mod par;
pub mod sim;
pub mod trainer;

pub use error::{Error, Result};
