//! Simulation and statistical analysis of temporal error correlations in
//! single-qubit Clifford circuits driven by engineered dephasing noise.
//!
//! The crate is organized around the measurement pipeline:
//!
//! * [`qcore`] — complex 2×2 unitary algebra and the 24-element Clifford group
//! * [`gateset`] — pulse schedules for primitive, CORPSE and WAMF gates
//! * [`noise`] — block-correlated and uncorrelated fractional-detuning traces
//! * [`simulator`] — exact time-sliced propagation and survival probabilities
//! * [`walkmodel`] — per-gate error maps, the Pauli-space random walk,
//!   error-vector autocorrelation and filter transfer functions
//! * [`stats`] — Gamma-distribution predictions and noise-averaged variance
//!   trajectories
//! * [`fitkit`] — least-squares extraction of error strengths with AIC/BIC
//!   model scans

pub mod fitkit;
pub mod gateset;
pub mod noise;
pub mod qcore;
pub mod rng;
pub mod simulator;
pub mod stats;
pub mod walkmodel;

pub use gateset::{Family, GateSchedule, Segment};
pub use noise::{NoiseSpec, NoiseTrace};
pub use qcore::{CliffordElement, PauliCoeffs, Unitary2, Vec3};
pub use simulator::{CircuitSpec, SurvivalRecord};
