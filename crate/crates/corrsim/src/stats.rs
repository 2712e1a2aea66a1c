//! Closed-form Gamma-distribution and variance-scaling predictions, plus
//! empirical cumulative noise-averaged variance trajectories.
//!
//! The analytic models reduce every gate to a weighted step in Pauli
//! space. With `q` the squared 2D-projected step of a uniformly random
//! Clifford, the model constants are `m = E[q]`, `B = E[q²]` and the
//! cross moment `C = E[q_L q_S]` between the correlated and uncorrelated
//! step sets; the variance of the noise-averaged survival probability is
//! a closed form in `(m, B, C, J, n)` for each error process.

use crate::gateset::Family;
use crate::rng::{stream_rng, Stream};
use crate::simulator::SurvivalRecord;
use crate::walkmodel::{Bandwidth, GateClass};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("record grid incomplete: expected {expected} records, found {got}")]
    IncompleteGrid { expected: usize, got: usize },
    #[error("final variance is zero")]
    DivideByZero,
}

/// Shape/scale parameters of a Gamma distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaParams {
    pub fn mean(&self) -> f64 {
        self.alpha * self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha * self.beta * self.beta
    }

    pub fn cdf(&self, x: f64) -> f64 {
        use statrs::distribution::ContinuousCDF;
        let g = statrs::distribution::Gamma::new(self.alpha, 1.0 / self.beta)
            .expect("positive parameters");
        g.cdf(x)
    }
}

/// Temporal correlation of the error process across the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    Correlated,
    Uncorrelated,
}

fn a_single() -> f64 {
    0.5 + std::f64::consts::PI.powi(2) / 96.0
}

fn a_two() -> f64 {
    0.5 + std::f64::consts::PI.powi(2) / 192.0
}

/// Gamma parameters of the noise-averaged survival distribution over
/// randomly composed circuits.
pub fn gamma_params(
    correlation: Correlation,
    j: usize,
    sigma2: f64,
    n: usize,
    bandwidth: Bandwidth,
) -> Result<GammaParams, StatsError> {
    if j < 1 || n < 1 {
        return Err(StatsError::InvalidArgs(format!("J {j} and n {n} must be >= 1")));
    }
    if sigma2 <= 0.0 {
        return Err(StatsError::InvalidArgs(format!("sigma2 {sigma2} must be > 0")));
    }
    let shape_coeff = match bandwidth {
        Bandwidth::Single => a_single(),
        Bandwidth::Two => a_two(),
        Bandwidth::Eight => {
            return Err(StatsError::InvalidArgs(
                "gamma parameters are defined for single- and two-value bandwidths".into(),
            ))
        }
    };
    let base = 2.0 / 3.0 * j as f64 * sigma2 * shape_coeff;
    Ok(match correlation {
        Correlation::Correlated => GammaParams { alpha: 1.0, beta: base },
        Correlation::Uncorrelated => {
            GammaParams { alpha: n as f64, beta: base / n as f64 }
        }
    })
}

/// Ensemble mean `m = E[q]` of the squared 2D-projected, duration-weighted
/// step over the 24-element Clifford alphabet.
pub fn ensemble_mean(bandwidth: Bandwidth, family: Family) -> f64 {
    let mut m = 0.0;
    for (class, count) in GateClass::census() {
        let d = crate::walkmodel::gate_step_weights(class, bandwidth, family);
        let sum_sq: f64 = d.components.iter().map(|c| c * c).sum();
        m += count as f64 / 24.0 * (2.0 / 3.0) * d.weight.powi(2) * sum_sq;
    }
    m
}

/// Ensemble second moment `B = E[q²]`.
pub fn ensemble_second_moment(bandwidth: Bandwidth, family: Family) -> f64 {
    let mut b = 0.0;
    for (class, count) in GateClass::census() {
        let d = crate::walkmodel::gate_step_weights(class, bandwidth, family);
        let w4 = d.weight.powi(4);
        // E[(sum_i c_i² [i])²] with P([i]) = 2/3 and P([i][j]) = 1/3, i != j
        let mut e = 0.0;
        for (i, ci) in d.components.iter().enumerate() {
            for (k, ck) in d.components.iter().enumerate() {
                let p = if i == k { 2.0 / 3.0 } else { 1.0 / 3.0 };
                e += ci * ci * ck * ck * p;
            }
        }
        b += count as f64 / 24.0 * w4 * e;
    }
    b
}

/// Cross moment `C = E[q_L q_S]` between the correlated (single-value)
/// and uncorrelated (`bandwidth`) step sets, axes shared gate by gate.
pub fn ensemble_cross_moment(bandwidth: Bandwidth, family: Family) -> f64 {
    let mut c = 0.0;
    for (class, count) in GateClass::census() {
        let l = crate::walkmodel::gate_step_weights(class, Bandwidth::Single, family);
        let s = crate::walkmodel::gate_step_weights(class, bandwidth, family);
        let w = l.weight.powi(2) * s.weight.powi(2);
        let mut e = 0.0;
        for (i, li) in l.components.iter().enumerate() {
            for (k, sk) in s.components.iter().enumerate() {
                let p = if i == k { 2.0 / 3.0 } else { 1.0 / 3.0 };
                e += li * li * sk * sk * p;
            }
        }
        c += count as f64 / 24.0 * w * e;
    }
    c
}

/// Expected noise-averaged infidelity `E[<P(|1>)>]`.
///
/// `Single` and `Two` bandwidths give the closed forms
/// `J σ² (2/3)(1/2 + π²/96)` and `J σ² (2/3)(1/2 + π²/192)`; the `Eight`
/// (DCG) bandwidth uses the printed CORPSE coefficient 0.167 or the
/// derived WAMF ensemble mean.
pub fn expected_infidelity(j: usize, sigma2: f64, bandwidth: Bandwidth, family: Family) -> f64 {
    let coeff = match (bandwidth, family) {
        (Bandwidth::Single, _) => 2.0 / 3.0 * a_single(),
        (Bandwidth::Two, _) => 2.0 / 3.0 * a_two(),
        (Bandwidth::Eight, Family::Corpse) => 0.167,
        (Bandwidth::Eight, f) => ensemble_mean(Bandwidth::Eight, f),
    };
    coeff * j as f64 * sigma2
}

/// Printed CORPSE model constants (correlated brace and cross as printed,
/// including the 3.78 - 2×1.14 tail term).
mod corpse_printed {
    pub const M_S: f64 = 0.167;
    pub const B_S: f64 = 0.041;
    pub const M_L: f64 = 1.14;
    pub const B_L: f64 = 3.78;
    pub const CROSS: f64 = 0.318 - 1.142 * 0.167;
}

/// Precomputed variance-scaling model for one gate family:
///
/// `V(n) = (J²σ_S⁴/n)(u0 + u1/J + (n-1) u2/J)`
/// `     + (J²σ_L⁴/n)(c0 + c1/J + (n-1)(c2 + c3/J))`
/// `     + 2 J σ_L² σ_S² x`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceModel {
    pub j: usize,
    pub family: Family,
    u0: f64,
    u1: f64,
    u2: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    x: f64,
}

impl VarianceModel {
    pub fn new(j: usize, family: Family) -> Self {
        match family {
            Family::Corpse => {
                use corpse_printed::*;
                VarianceModel {
                    j,
                    family,
                    u0: M_S * M_S,
                    u1: 3.0 * B_S - 2.0 * M_S * M_S,
                    u2: B_S - M_S * M_S,
                    c0: 3.0 * M_L * M_L,
                    c1: 3.0 * B_L - 6.0 * M_L * M_L,
                    c2: M_L * M_L,
                    c3: B_L - 2.0 * M_L,
                    x: CROSS,
                }
            }
            f => {
                let bw = if f == Family::Primitive { Bandwidth::Two } else { Bandwidth::Eight };
                let m_s = ensemble_mean(bw, f);
                let b_s = ensemble_second_moment(bw, f);
                let m_l = ensemble_mean(Bandwidth::Single, f);
                let b_l = ensemble_second_moment(Bandwidth::Single, f);
                let c = ensemble_cross_moment(bw, f);
                VarianceModel {
                    j,
                    family,
                    u0: m_s * m_s,
                    u1: 3.0 * b_s - 2.0 * m_s * m_s,
                    u2: b_s - m_s * m_s,
                    c0: 3.0 * m_l * m_l,
                    c1: 3.0 * b_l - 6.0 * m_l * m_l,
                    c2: m_l * m_l,
                    c3: b_l - 2.0 * m_l * m_l,
                    x: c - m_l * m_s,
                }
            }
        }
    }

    pub fn eval(&self, n: usize, sigma_s2: f64, sigma_l2: f64) -> f64 {
        let nf = n as f64;
        let jf = self.j as f64;
        let s4 = sigma_s2 * sigma_s2;
        let l4 = sigma_l2 * sigma_l2;
        jf * jf * s4 / nf * (self.u0 + self.u1 / jf + (nf - 1.0) / jf * self.u2)
            + jf * jf * l4 / nf
                * (self.c0 + self.c1 / jf + (nf - 1.0) * (self.c2 + self.c3 / jf))
            + 2.0 * jf * sigma_l2 * sigma_s2 * self.x
    }

    /// Large-n limit of the model.
    pub fn saturation(&self, sigma_s2: f64, sigma_l2: f64) -> f64 {
        let jf = self.j as f64;
        jf * sigma_s2 * sigma_s2 * self.u2
            + jf * jf * sigma_l2 * sigma_l2 * (self.c2 + self.c3 / jf)
            + 2.0 * jf * sigma_l2 * sigma_s2 * self.x
    }
}

/// Model variance of the cumulatively noise-averaged survival
/// distribution after `n` averages: uncorrelated term, correlated term
/// and cross-covariance term.
pub fn variance_model(
    n: usize,
    j: usize,
    sigma_s2: f64,
    sigma_l2: f64,
    family: Family,
) -> Result<f64, StatsError> {
    if n < 1 || j < 1 {
        return Err(StatsError::InvalidArgs(format!("n {n} and J {j} must be >= 1")));
    }
    if sigma_s2 < 0.0 || sigma_l2 < 0.0 {
        return Err(StatsError::InvalidArgs("variances must be >= 0".into()));
    }
    Ok(VarianceModel::new(j, family).eval(n, sigma_s2, sigma_l2))
}

/// Large-n limit of `variance_model`.
pub fn variance_saturation(j: usize, sigma_s2: f64, sigma_l2: f64, family: Family) -> f64 {
    VarianceModel::new(j, family).saturation(sigma_s2, sigma_l2)
}

/// k×n grid of survival probabilities, circuits × realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordGrid {
    pub circuits: usize,
    pub realizations: usize,
    /// Row-major: `values[c * realizations + r]`.
    pub values: Vec<f64>,
}

impl RecordGrid {
    /// Assemble the grid from simulation records; `estimated` selects the
    /// projective estimate over the exact probability.
    pub fn from_records(records: &[SurvivalRecord], estimated: bool) -> Result<Self, StatsError> {
        let circuits = records.iter().map(|r| r.circuit_id).max().map_or(0, |m| m as usize + 1);
        let realizations =
            records.iter().map(|r| r.realization_id).max().map_or(0, |m| m as usize + 1);
        let expected = circuits * realizations;
        if records.len() != expected {
            return Err(StatsError::IncompleteGrid { expected, got: records.len() });
        }
        let mut values = vec![f64::NAN; expected];
        for r in records {
            let idx = r.circuit_id as usize * realizations + r.realization_id as usize;
            values[idx] = if estimated { r.p_est } else { r.p_true };
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(StatsError::IncompleteGrid { expected, got: records.len() });
        }
        Ok(RecordGrid { circuits, realizations, values })
    }

    fn value(&self, circuit: usize, realization: usize) -> f64 {
        self.values[circuit * self.realizations + realization]
    }
}

/// One cumulative noise-averaging trajectory `V_k^{(n)}` vs `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTrajectory {
    pub reordering_id: usize,
    /// `points[i]` is the variance across circuits after `i + 1` averages.
    pub points: Vec<f64>,
}

/// Population variance across circuits of the running means after each
/// number of noise averages, for one shared realization ordering.
fn trajectory_for_order(grid: &RecordGrid, order: &[usize]) -> Vec<f64> {
    let k = grid.circuits;
    let n = grid.realizations;
    let mut running: Vec<f64> = vec![0.0; k];
    let mut points = Vec::with_capacity(n);
    for (step, &r) in order.iter().enumerate() {
        let count = (step + 1) as f64;
        let mut mean_of_means = 0.0;
        for (c, run) in running.iter_mut().enumerate() {
            *run += grid.value(c, r);
            mean_of_means += *run / count;
        }
        mean_of_means /= k as f64;
        let mut var = 0.0;
        for run in &running {
            let m = run / count;
            var += (m - mean_of_means) * (m - mean_of_means);
        }
        points.push(var / k as f64);
    }
    points
}

/// Cumulative noise-averaged variance trajectories for `count` random
/// reorderings of the realization axis (shared across circuits), plus the
/// pointwise mean trajectory.
pub fn cumulative_variance_trajectories(
    grid: &RecordGrid,
    count: usize,
    seed: u64,
) -> Result<(Vec<VarianceTrajectory>, Vec<f64>), StatsError> {
    if grid.circuits == 0 || grid.realizations == 0 {
        return Err(StatsError::InvalidArgs("empty record grid".into()));
    }
    let trajectories: Vec<VarianceTrajectory> = (0..count)
        .into_par_iter()
        .map(|id| {
            let mut order: Vec<usize> = (0..grid.realizations).collect();
            let mut rng = stream_rng(seed, Stream::Reordering, id as u64, 0);
            order.shuffle(&mut rng);
            VarianceTrajectory { reordering_id: id, points: trajectory_for_order(grid, &order) }
        })
        .collect();
    let n = grid.realizations;
    let mut mean = vec![0.0; n];
    for t in &trajectories {
        for (m, p) in mean.iter_mut().zip(&t.points) {
            *m += p / count as f64;
        }
    }
    Ok((trajectories, mean))
}

/// Ratio of initial to final (fully noise-averaged) variance.
pub fn variance_ratio(points: &[f64]) -> Result<f64, StatsError> {
    let first = *points.first().ok_or(StatsError::DivideByZero)?;
    let last = *points.last().ok_or(StatsError::DivideByZero)?;
    if last == 0.0 {
        return Err(StatsError::DivideByZero);
    }
    Ok(first / last)
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov-Smirnov p-value for statistic `d` and sample
/// size `n` (Stephens' small-sample correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        sum += 2.0 * (-1.0f64).powi(k + 1) * (-2.0 * kf * kf * lambda * lambda).exp();
    }
    sum.clamp(0.0, 1.0)
}
