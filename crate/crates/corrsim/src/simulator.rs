//! Exact time-sliced propagation of gate schedules under piecewise-constant
//! detuning, circuit survival probabilities, and projective-measurement
//! sampling.
//!
//! Propagation is a product of closed-form 2×2 exponentials, one per slice
//! of constant Hamiltonian; slices are cut at segment and noise
//! breakpoints, so piecewise-constant noise is handled exactly.

use crate::gateset::{schedule_table, Family, GateSchedule, Segment};
use crate::noise::{sample_trace, NoiseSpec, NoiseTrace};
use crate::qcore::{clifford_table, inverse_in_clifford, CliffordElement, Unitary2};
use crate::rng::{derive_seed, stream_rng, Stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use thiserror::Error;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("noise trace ends at {trace_end} but the schedule needs {needed}")]
    TraceTooShort { trace_end: f64, needed: f64 },
    #[error("circuit of length {0} cannot close to the identity")]
    EmptyCircuit(usize),
}

/// Ordered Clifford indices of one randomly composed circuit; the last
/// gate inverts the product of the preceding ones so the ideal circuit is
/// the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub id: u64,
    pub gates: Vec<u8>,
}

impl CircuitSpec {
    /// Randomly compose a J-gate identity circuit from the Clifford table.
    pub fn random(id: u64, j: usize, master_seed: u64, table: &[CliffordElement]) -> Self {
        assert!(j >= 1, "circuits need at least one gate");
        let mut rng = stream_rng(master_seed, Stream::CircuitCompose, id, 0);
        let mut gates = Vec::with_capacity(j);
        let mut product = Unitary2::IDENTITY;
        for _ in 0..j - 1 {
            let idx = rng.random_range(0..table.len());
            product = table[idx].unitary.mul(&product);
            gates.push(idx as u8);
        }
        let closing = inverse_in_clifford(&product, table)
            .expect("a Clifford product is always a Clifford");
        gates.push(closing.index);
        CircuitSpec { id, gates }
    }

    /// Gate start/end times (J+1 entries) under the given family's schedules.
    pub fn gate_boundaries(&self, schedules: &[GateSchedule]) -> Vec<f64> {
        let mut boundaries = Vec::with_capacity(self.gates.len() + 1);
        let mut t = 0.0;
        boundaries.push(t);
        for &g in &self.gates {
            t += schedules[g as usize].total_duration();
            boundaries.push(t);
        }
        boundaries
    }
}

/// One (circuit, noise realization) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRecord {
    pub circuit_id: u64,
    pub realization_id: u64,
    pub family: Family,
    /// Exact P(|1>) from the propagated unitary.
    pub p_true: f64,
    /// Binomial estimate over `r` repetitions.
    pub p_est: f64,
    pub seed: u64,
}

/// Propagate one schedule under a noise trace starting at time `t0`.
pub fn propagate(
    schedule: &GateSchedule,
    trace: &NoiseTrace,
    t0: f64,
) -> Result<Unitary2, SimError> {
    let needed = t0 + schedule.total_duration();
    if trace.end() < needed - TIME_EPS {
        return Err(SimError::TraceTooShort { trace_end: trace.end(), needed });
    }
    let mut u = Unitary2::IDENTITY;
    let mut t = t0;
    for seg in &schedule.segments {
        match *seg {
            Segment::FrameShift { angle } => {
                u = Unitary2::rotation_z(angle).mul(&u);
            }
            _ => {
                let tau = seg.duration();
                for (dt, delta) in trace.slices(t, t + tau) {
                    let v = seg.hamiltonian(delta).unwrap();
                    u = Unitary2::from_hamiltonian(v, dt).mul(&u);
                }
                t += tau;
            }
        }
    }
    Ok(u)
}

/// Noisy propagator of the full circuit.
pub fn circuit_unitary(
    circuit: &CircuitSpec,
    schedules: &[GateSchedule],
    trace: &NoiseTrace,
) -> Result<Unitary2, SimError> {
    let mut u = Unitary2::IDENTITY;
    let mut t = 0.0;
    for &g in &circuit.gates {
        let s = &schedules[g as usize];
        u = propagate(s, trace, t)?.mul(&u);
        t += s.total_duration();
    }
    Ok(u)
}

/// Survival probability `P(|1>) = 1 - |<0|S|0>|²` of a circuit that
/// ideally implements the identity on `|0>`.
pub fn run_circuit(
    circuit: &CircuitSpec,
    schedules: &[GateSchedule],
    trace: &NoiseTrace,
) -> Result<f64, SimError> {
    let u = circuit_unitary(circuit, schedules, trace)?;
    Ok((1.0 - u.m[0][0].norm_sqr()).clamp(0.0, 1.0))
}

/// Binomial estimate of `p` from `r` projective repetitions.
pub fn projective_sample(p_true: f64, r: u32, rng: &mut ChaCha8Rng) -> f64 {
    if p_true <= 0.0 {
        return 0.0;
    }
    if p_true >= 1.0 {
        return 1.0;
    }
    let bin = Binomial::new(r as u64, p_true).expect("p in (0, 1)");
    bin.sample(rng) as f64 / r as f64
}

/// Full experiment description: a k×n grid of (circuit, realization)
/// simulations with shared engineered-noise statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub j: usize,
    pub circuits: usize,
    pub realizations: usize,
    pub repetitions: u32,
    pub family: Family,
    pub noise: NoiseSpec,
}

/// Deterministic, order-insensitive simulation of the whole grid.
///
/// Records are keyed by ids and assembled in (circuit, realization) order,
/// so parallel and serial execution produce identical tables.
pub fn run_experiment(spec: &RunSpec) -> Vec<SurvivalRecord> {
    let table = clifford_table();
    let schedules = schedule_table(spec.family);
    let circuits: Vec<CircuitSpec> = (0..spec.circuits)
        .map(|i| CircuitSpec::random(i as u64, spec.j, spec.noise.master_seed, &table))
        .collect();
    run_experiment_on(&circuits, &schedules, spec)
}

/// As `run_experiment`, for pre-generated circuits (the same circuits can
/// then be reused across gate families, as in the experiment).
pub fn run_experiment_on(
    circuits: &[CircuitSpec],
    schedules: &[GateSchedule],
    spec: &RunSpec,
) -> Vec<SurvivalRecord> {
    let tasks: Vec<(usize, usize)> = (0..circuits.len())
        .flat_map(|i| (0..spec.realizations).map(move |r| (i, r)))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, r)| {
            let circuit = &circuits[i];
            let boundaries = circuit.gate_boundaries(schedules);
            let trace = sample_trace(&spec.noise, &boundaries, circuit.id, r as u64);
            let p_true = run_circuit(circuit, schedules, &trace)
                .expect("trace covers the circuit by construction");
            let seed = derive_seed(spec.noise.master_seed, Stream::Projection, circuit.id, r as u64);
            let mut rng = stream_rng(spec.noise.master_seed, Stream::Projection, circuit.id, r as u64);
            let p_est = projective_sample(p_true, spec.repetitions, &mut rng);
            SurvivalRecord {
                circuit_id: circuit.id,
                realization_id: r as u64,
                family: spec.family,
                p_true,
                p_est,
                seed,
            }
        })
        .collect()
}
