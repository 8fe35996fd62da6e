//! Simulation and bound calculus for quantum state tomography under
//! restricted measurements.
//!
//! The crate covers four connected pieces:
//!
//! * [`linalg`]: dense complex matrices, a Jacobi eigensolver, Schatten
//!   norms, vectorization, and the density-matrix projection.
//! * [`pauli`] and [`measurement`]: Pauli words, basis settings, Born
//!   sampling, POVMs, and the measurement information channel
//!   (the superoperator `A -> sum_x M_x Tr[M_x A] / Tr[M_x]`) together with
//!   its trace-norm bound calculus.
//! * [`hardness`]: sign-perturbed families of nearly maximally mixed states,
//!   concentration diagnostics, packing separation checks, and the
//!   mutual-information bookkeeping behind copy-count lower bounds.
//! * [`tomography`] and [`harness`]: a Pauli-basis estimator, mutually
//!   unbiased basis tomography with projected least squares, a k-outcome
//!   measurement simulation protocol, and a deterministic Monte Carlo sweep
//!   driver with CSV/JSON emission.
//!
//! Everything is sized for desk-scale experiments (up to four qubits for the
//! simulators, `d <= 256` for the dense linear algebra). Randomness is always
//! explicit: callers hand in a seeded ChaCha stream and identical seeds
//! reproduce identical outputs bit for bit.

pub mod harness;
pub mod hardness;
pub mod linalg;
pub mod measurement;
pub mod pauli;
pub mod sampling;
pub mod tol;
pub mod tomography;
