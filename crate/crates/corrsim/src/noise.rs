//! Engineered fractional-detuning noise: piecewise-constant traces with a
//! block-correlated component (one value per `M_n` consecutive virtual
//! gates) and an uncorrelated component (one value per primitive pi/2 slot
//! on a global time grid).

use crate::rng::{stream_rng, Stream};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("trace durations differ: {0} vs {1}")]
    DurationMismatch(f64, f64),
}

/// Correlated-component block length, in virtual gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLen {
    /// Quasi-static: one value across the whole circuit (`M_n = J`).
    Full,
    Gates(u32),
}

impl BlockLen {
    pub fn resolve(&self, j: usize) -> usize {
        match *self {
            BlockLen::Full => j,
            BlockLen::Gates(m) => m as usize,
        }
    }
}

/// Parameters of an engineered noise process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Correlated (slow) component variance, dimensionless detuning².
    pub sigma_l2: f64,
    /// Uncorrelated (fast) component variance.
    pub sigma_s2: f64,
    /// Block length of the correlated component.
    pub m_n: BlockLen,
    pub master_seed: u64,
}

/// Piecewise-constant detuning trace covering one circuit.
///
/// `breakpoints` has one more entry than `values`; interval `i` spans
/// `[breakpoints[i], breakpoints[i + 1])` at detuning `values[i]`. The
/// first breakpoint is 0 and intervals are contiguous by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl NoiseTrace {
    pub fn zero(duration: f64) -> Self {
        NoiseTrace { breakpoints: vec![0.0, duration], values: vec![0.0] }
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn interval_count(&self) -> usize {
        self.values.len()
    }

    /// Detuning at time `t` (right-continuous).
    pub fn value_at(&self, t: f64) -> f64 {
        match self.breakpoints.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => self.values[i.min(self.values.len() - 1)],
            Err(i) => self.values[i.saturating_sub(1).min(self.values.len() - 1)],
        }
    }

    /// Constant-detuning slices covering `[t0, t1)`, skipping slivers
    /// shorter than the time tolerance.
    pub fn slices(&self, t0: f64, t1: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if t1 - t0 <= TIME_EPS {
            return out;
        }
        let mut i = match self.breakpoints.binary_search_by(|b| b.partial_cmp(&t0).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(self.values.len() - 1);
        let mut t = t0;
        while t < t1 - TIME_EPS {
            let seg_end = if i + 1 < self.breakpoints.len() {
                self.breakpoints[i + 1].min(t1)
            } else {
                t1
            };
            if seg_end - t > TIME_EPS {
                out.push((seg_end - t, self.values[i]));
            }
            t = seg_end;
            i += 1;
            if i >= self.values.len() {
                // Cover any residual tail with the final value.
                if t1 - t > TIME_EPS {
                    out.push((t1 - t, *self.values.last().unwrap()));
                }
                break;
            }
        }
        out
    }
}

/// i.i.d. Gaussian detunings on the global pi/2 slot grid, clipped to
/// `duration`. Slots are aligned to circuit time zero regardless of gate
/// family, so a primitive pi gate spans two values and a CORPSE pi gate
/// about eight.
pub fn sample_uncorrelated(sigma_s2: f64, duration: f64, rng: &mut ChaCha8Rng) -> NoiseTrace {
    let slots = ((duration / FRAC_PI_2) - TIME_EPS).ceil().max(1.0) as usize;
    let mut breakpoints = Vec::with_capacity(slots + 1);
    let mut values = Vec::with_capacity(slots);
    let normal = Normal::new(0.0, sigma_s2.sqrt()).expect("nonnegative variance");
    breakpoints.push(0.0);
    for s in 0..slots {
        let end = ((s + 1) as f64 * FRAC_PI_2).min(duration);
        breakpoints.push(end);
        values.push(if sigma_s2 > 0.0 { normal.sample(rng) } else { 0.0 });
    }
    *breakpoints.last_mut().unwrap() = duration;
    NoiseTrace { breakpoints, values }
}

/// One Gaussian detuning per block of `m_n` consecutive virtual gates.
/// `gate_boundaries` holds the J+1 gate start/end times of the circuit in
/// the family actually being run; the block values are constant within a
/// block regardless of gate durations.
pub fn sample_correlated(
    sigma_l2: f64,
    m_n: BlockLen,
    gate_boundaries: &[f64],
    rng: &mut ChaCha8Rng,
) -> NoiseTrace {
    let j = gate_boundaries.len() - 1;
    let m = m_n.resolve(j).max(1);
    let normal = Normal::new(0.0, sigma_l2.sqrt()).expect("nonnegative variance");
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    let mut g = 0;
    while g < j {
        let block_end_gate = (g + m).min(j);
        let end = gate_boundaries[block_end_gate];
        let delta = if sigma_l2 > 0.0 { normal.sample(rng) } else { 0.0 };
        // Zero-duration blocks (e.g. all frame changes) still consume a draw
        // so the value sequence depends only on (seed, J, M_n).
        if end - breakpoints.last().unwrap() > 0.0 {
            breakpoints.push(end);
            values.push(delta);
        }
        g = block_end_gate;
    }
    if values.is_empty() {
        return NoiseTrace::zero(*gate_boundaries.last().unwrap());
    }
    NoiseTrace { breakpoints, values }
}

/// Interval-wise sum of two traces on the merged breakpoint set.
pub fn combine(a: &NoiseTrace, b: &NoiseTrace) -> Result<NoiseTrace, NoiseError> {
    if (a.end() - b.end()).abs() > TIME_EPS {
        return Err(NoiseError::DurationMismatch(a.end(), b.end()));
    }
    let mut merged: Vec<f64> = a.breakpoints.iter().chain(b.breakpoints.iter()).copied().collect();
    merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
    merged.dedup_by(|x, y| (*x - *y).abs() <= TIME_EPS);
    let mut values = Vec::with_capacity(merged.len() - 1);
    for w in merged.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        values.push(a.value_at(mid) + b.value_at(mid));
    }
    Ok(NoiseTrace { breakpoints: merged, values })
}

/// Full noise trace for one (circuit, realization) pair: the correlated and
/// uncorrelated components sampled from independent derived streams and
/// summed.
pub fn sample_trace(
    spec: &NoiseSpec,
    gate_boundaries: &[f64],
    circuit_id: u64,
    realization_id: u64,
) -> NoiseTrace {
    let duration = *gate_boundaries.last().unwrap();
    let mut trace = NoiseTrace::zero(duration);
    if spec.sigma_l2 > 0.0 {
        let mut rng =
            stream_rng(spec.master_seed, Stream::CorrelatedNoise, circuit_id, realization_id);
        trace = sample_correlated(spec.sigma_l2, spec.m_n, gate_boundaries, &mut rng);
    }
    if spec.sigma_s2 > 0.0 {
        let mut rng =
            stream_rng(spec.master_seed, Stream::UncorrelatedNoise, circuit_id, realization_id);
        let fast = sample_uncorrelated(spec.sigma_s2, duration, &mut rng);
        trace = combine(&trace, &fast).expect("components share the circuit duration");
    }
    trace
}

/// Per-gate detuning sequence of the correlated component only, used by the
/// walk model (one value per virtual gate).
pub fn block_delta_sequence(
    sigma_l2: f64,
    m_n: BlockLen,
    j: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let m = m_n.resolve(j).max(1);
    let normal = Normal::new(0.0, sigma_l2.sqrt()).expect("nonnegative variance");
    let mut out = Vec::with_capacity(j);
    while out.len() < j {
        let delta: f64 = if sigma_l2 > 0.0 { normal.sample(rng) } else { 0.0 };
        for _ in 0..m.min(j - out.len()) {
            out.push(delta);
        }
    }
    out
}
