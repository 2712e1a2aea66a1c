//! The analytic layer: per-gate error maps, the Pauli-space random walk,
//! first-order error vectors, autocorrelation, and filter transfer
//! functions.
//!
//! A noisy gate splits as `R̃ = Λ R̂` with error map
//! `Λ = I + i δ ν·σ + δ²(i η·σ - a I) + O(δ³)`. Toggling each first-order
//! step by the ideal circuit prefix maps the accumulated error onto a walk
//! `R = Σ δ_j r_j` in Pauli space whose 2D projection predicts the
//! survival probability: `p = |R|² - R_z²`.

use crate::gateset::{GateSchedule, Segment};
use crate::noise::NoiseTrace;
use crate::qcore::{CliffordElement, RotationAxis, Unitary2, Vec3};
use crate::simulator::CircuitSpec;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("no bandwidth error map for this gate")]
    UnsupportedGate,
    #[error("delta sequence has {got} entries for {expected} gates")]
    LengthMismatch { got: usize, expected: usize },
    #[error("series of length {len} cannot support lag {lag}")]
    SeriesTooShort { len: usize, lag: usize },
    #[error("autocorrelation never drops below 1/e within the computed lags")]
    NoCrossing,
    #[error("noise trace ends at {trace_end} but the gate needs {needed}")]
    TraceTooShort { trace_end: f64, needed: f64 },
}

/// The driven primitive rotations with known analytic error maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveGate {
    /// Identity executed as a wait of one pi-pulse length.
    WaitPi,
    XPi,
    /// `positive` selects +pi/2 vs -pi/2.
    XHalf { positive: bool },
    YPi,
    YHalf { positive: bool },
}

/// First- and second-order error-map coefficients, per unit detuning:
/// `Λ(δ) = (1 - a δ²) I + i δ ν·σ + i δ² η·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMap {
    pub nu: Vec3,
    pub eta: Vec3,
    pub a: f64,
    pub gate: PrimitiveGate,
}

impl ErrorMap {
    /// Matrix form of the truncated map at detuning `delta`.
    pub fn reconstruct(&self, delta: f64) -> Unitary2 {
        let i = Complex64::new(0.0, 1.0);
        let id = Complex64::new(1.0 - self.a * delta * delta, 0.0);
        let cx = i * (delta * self.nu.x + delta * delta * self.eta.x);
        let cy = i * (delta * self.nu.y + delta * delta * self.eta.y);
        let cz = i * (delta * self.nu.z + delta * delta * self.eta.z);
        crate::qcore::PauliCoeffs { c0: id, cx, cy, cz }.reassemble()
    }
}

/// Analytic error map of a primitive rotation under static detuning.
pub fn error_map(gate: PrimitiveGate) -> ErrorMap {
    let q = (2.0 - PI) / 8.0;
    match gate {
        PrimitiveGate::WaitPi => ErrorMap {
            nu: Vec3::new(0.0, 0.0, -FRAC_PI_2),
            eta: Vec3::ZERO,
            a: PI * PI / 8.0,
            gate,
        },
        PrimitiveGate::XPi => ErrorMap {
            nu: Vec3::new(0.0, 1.0, 0.0),
            eta: Vec3::new(-PI / 4.0, 0.0, 0.0),
            a: 0.5,
            gate,
        },
        PrimitiveGate::XHalf { positive } => {
            let s = if positive { 1.0 } else { -1.0 };
            ErrorMap {
                nu: Vec3::new(0.0, s * 0.5, -0.5),
                eta: Vec3::new(s * q, 0.0, 0.0),
                a: 0.25,
                gate,
            }
        }
        PrimitiveGate::YPi => ErrorMap {
            nu: Vec3::new(-1.0, 0.0, 0.0),
            eta: Vec3::new(0.0, -PI / 4.0, 0.0),
            a: 0.5,
            gate,
        },
        PrimitiveGate::YHalf { positive } => {
            let s = if positive { 1.0 } else { -1.0 };
            ErrorMap {
                nu: Vec3::new(-s * 0.5, 0.0, -0.5),
                eta: Vec3::new(0.0, s * q, 0.0),
                a: 0.25,
                gate,
            }
        }
    }
}

/// Exact noisy rotation `R̃` for a primitive gate under static detuning,
/// used as the oracle against the truncated analytic maps.
pub fn exact_primitive(gate: PrimitiveGate, delta: f64) -> Unitary2 {
    let (axis, theta) = match gate {
        PrimitiveGate::WaitPi => (Vec3::new(0.0, 0.0, 0.0), 0.0),
        PrimitiveGate::XPi => (Vec3::new(1.0, 0.0, 0.0), PI),
        PrimitiveGate::XHalf { positive } => {
            (Vec3::new(1.0, 0.0, 0.0), if positive { FRAC_PI_2 } else { -FRAC_PI_2 })
        }
        PrimitiveGate::YPi => (Vec3::new(0.0, 1.0, 0.0), PI),
        PrimitiveGate::YHalf { positive } => {
            (Vec3::new(0.0, 1.0, 0.0), if positive { FRAC_PI_2 } else { -FRAC_PI_2 })
        }
    };
    let duration = if gate == PrimitiveGate::WaitPi { PI } else { theta.abs() };
    // H = (theta/duration) w/2 + delta sigma_z/2 over `duration`.
    let drive = if theta != 0.0 { theta / duration } else { 0.0 };
    let v = Vec3::new(axis.x * drive, axis.y * drive, delta);
    Unitary2::from_hamiltonian(v, duration)
}

/// Ideal unitary of a primitive gate.
pub fn ideal_primitive(gate: PrimitiveGate) -> Unitary2 {
    exact_primitive(gate, 0.0)
}

/// Primitive gate of a Clifford element's driven pulse, if any.
pub fn element_gate(element: &CliffordElement) -> Option<PrimitiveGate> {
    element.pulse().map(|p| match p.axis {
        RotationAxis::Identity => PrimitiveGate::WaitPi,
        RotationAxis::X if p.angle > FRAC_PI_2 + 0.1 => PrimitiveGate::XPi,
        RotationAxis::X => PrimitiveGate::XHalf { positive: p.angle > 0.0 },
        RotationAxis::Y if p.angle > FRAC_PI_2 + 0.1 => PrimitiveGate::YPi,
        RotationAxis::Y => PrimitiveGate::YHalf { positive: p.angle > 0.0 },
        RotationAxis::Z => unreachable!("pulse() never returns z rotations"),
    })
}

/// First-order error vector of a full Clifford element: the pulse map
/// conjugated through the trailing frame change. Pure-z elements are error
/// free and return zero.
pub fn element_nu(element: &CliffordElement) -> Vec3 {
    match element_gate(element) {
        None => Vec3::ZERO,
        Some(gate) => error_map(gate).nu.rotated_z(element.frame_angle()),
    }
}

/// Gate classes distinguished by the walk statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    Pi,
    Half,
    Identity,
    /// Passive frame change: no noise-susceptible duration, zero step.
    Frame,
}

impl GateClass {
    pub fn of(element: &CliffordElement) -> GateClass {
        match element_gate(element) {
            None => GateClass::Frame,
            Some(PrimitiveGate::WaitPi) => GateClass::Identity,
            Some(PrimitiveGate::XPi | PrimitiveGate::YPi) => GateClass::Pi,
            Some(_) => GateClass::Half,
        }
    }

    /// Multiplicity of each class in the 24-element Clifford table.
    pub fn census() -> [(GateClass, usize); 4] {
        [
            (GateClass::Identity, 1),
            (GateClass::Frame, 3),
            (GateClass::Pi, 4),
            (GateClass::Half, 16),
        ]
    }
}

/// Number of equal noise slots assumed inside each gate class at a given
/// uncorrelated-noise bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    /// One value per gate.
    Single,
    /// One value per primitive pi/2 time: two values in pi and identity
    /// gates, one in pi/2 gates.
    Two,
    /// DCG regime: about eight values in pi and pi/2 gates, sixteen in the
    /// composite identity.
    Eight,
}

fn slot_count(class: GateClass, bandwidth: Bandwidth) -> usize {
    match (class, bandwidth) {
        (GateClass::Frame, _) => 0,
        (_, Bandwidth::Single) => 1,
        (GateClass::Half, Bandwidth::Two) => 1,
        (_, Bandwidth::Two) => 2,
        (GateClass::Identity, Bandwidth::Eight) => 16,
        (_, Bandwidth::Eight) => 8,
    }
}

/// Per-slot first-order coefficient vectors for an x-rotation of angle
/// `theta` split into `slots` equal noise intervals (unit detuning each).
fn slot_vectors(theta: f64, slots: usize) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(slots);
    for k in 0..slots {
        let a = theta * k as f64 / slots as f64;
        let b = theta * (k + 1) as f64 / slots as f64;
        // gate-internal toggled integral of sigma_z under the x drive
        let raw = Vec3::new(0.0, a.cos() - b.cos(), b.sin() - a.sin());
        // conjugate by the remaining ideal rotation R_x(theta)
        let (s, c) = theta.sin_cos();
        let rotated = Vec3::new(raw.x, c * raw.y - s * raw.z, s * raw.y + c * raw.z);
        out.push(rotated.scale(-0.5));
    }
    out
}

fn wait_slot_vectors(duration: f64, slots: usize) -> Vec<Vec3> {
    (0..slots).map(|_| Vec3::new(0.0, 0.0, -0.5 * duration / slots as f64)).collect()
}

/// Effective per-axis step lengths of a gate class at a bandwidth: the
/// independent per-slot Gaussians combine in quadrature into a single
/// equivalent detuning coefficient on each Pauli axis.
pub fn step_components(class: GateClass, bandwidth: Bandwidth) -> Vec<f64> {
    let slots = slot_count(class, bandwidth);
    if slots == 0 {
        return Vec::new();
    }
    let vectors = match class {
        GateClass::Pi => slot_vectors(PI, slots),
        GateClass::Half => slot_vectors(FRAC_PI_2, slots),
        GateClass::Identity => wait_slot_vectors(PI, slots),
        GateClass::Frame => unreachable!(),
    };
    let mut components = Vec::new();
    for axis in 0..3 {
        let sq: f64 = vectors
            .iter()
            .map(|v| match axis {
                0 => v.x * v.x,
                1 => v.y * v.y,
                _ => v.z * v.z,
            })
            .sum();
        if sq > 1e-24 {
            components.push(sq.sqrt());
        }
    }
    components
}

/// First-order error rotation vector of a gate whose two halves see
/// different detunings: `Λ ≈ I + i e·σ` with, for the x-axis pi gate,
/// `e = ((δ1 + δ2)/2) ŷ - ((δ1 - δ2)/2) ẑ`.
pub fn two_value_error_map(
    gate: PrimitiveGate,
    delta1: f64,
    delta2: f64,
) -> Result<Vec3, WalkError> {
    let class = match gate {
        PrimitiveGate::XPi => GateClass::Pi,
        PrimitiveGate::XHalf { positive: true } => GateClass::Half,
        PrimitiveGate::WaitPi => GateClass::Identity,
        _ => return Err(WalkError::UnsupportedGate),
    };
    let vectors = match class {
        GateClass::Pi => slot_vectors(PI, 2),
        GateClass::Half => slot_vectors(FRAC_PI_2, 2),
        GateClass::Identity => wait_slot_vectors(PI, 2),
        GateClass::Frame => unreachable!(),
    };
    Ok(vectors[0].scale(delta1).add(&vectors[1].scale(delta2)))
}

/// Recomputed first-order error map for a gate exposed to higher-bandwidth
/// noise: `slots` independent detunings collapse to one effective Gaussian
/// per axis. Supported for the x-axis pi and pi/2 rotations and the wait
/// identity.
pub fn multi_value_error_map(
    gate: PrimitiveGate,
    bandwidth: Bandwidth,
) -> Result<ErrorMap, WalkError> {
    let class = match gate {
        PrimitiveGate::XPi => GateClass::Pi,
        PrimitiveGate::XHalf { positive: true } => GateClass::Half,
        PrimitiveGate::WaitPi => GateClass::Identity,
        _ => return Err(WalkError::UnsupportedGate),
    };
    let c = step_components(class, bandwidth);
    let nu = match class {
        GateClass::Identity => Vec3::new(0.0, 0.0, -c[0]),
        _ => Vec3::new(0.0, c[0], -c[1]),
    };
    Ok(ErrorMap { nu, eta: Vec3::ZERO, a: 0.0, gate })
}

/// Duration weight applied to a class's detuning contribution relative to
/// the family's pi gate.
pub fn duration_weight(class: GateClass, family: crate::gateset::Family) -> f64 {
    use crate::gateset::Family;
    match (family, class) {
        (_, GateClass::Pi) | (_, GateClass::Frame) => 1.0,
        (Family::Primitive, _) => 1.0,
        (_, GateClass::Identity) => 2.0,
        (Family::Corpse, GateClass::Half) => 24.0 / 13.0,
        (Family::Wamf, GateClass::Half) => 1.57,
    }
}

/// Weighted step descriptor for a gate class: per-axis effective step
/// lengths and the family duration weight.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDescriptor {
    pub components: Vec<f64>,
    pub weight: f64,
}

pub fn gate_step_weights(
    class: GateClass,
    bandwidth: Bandwidth,
    family: crate::gateset::Family,
) -> StepDescriptor {
    StepDescriptor {
        components: step_components(class, bandwidth),
        weight: duration_weight(class, family),
    }
}

/// Total noise-averaged random-walk vector in Pauli space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkVector(pub Vec3);

impl WalkVector {
    /// 2D-projected squared length: the survival probability is blind to
    /// the z component.
    pub fn survival_probability(&self) -> f64 {
        self.0.x * self.0.x + self.0.y * self.0.y
    }
}

/// First-order Pauli walk of a circuit under one detuning value per gate.
///
/// Each gate's step is its error vector toggled by the ideal prefix
/// through that gate; the returned probability is the squared 2D
/// projection of the summed walk.
pub fn walk(
    circuit: &CircuitSpec,
    deltas: &[f64],
    table: &[CliffordElement],
) -> Result<(WalkVector, f64), WalkError> {
    if deltas.len() != circuit.gates.len() {
        return Err(WalkError::LengthMismatch {
            got: deltas.len(),
            expected: circuit.gates.len(),
        });
    }
    let mut prefix = Unitary2::IDENTITY;
    let mut r = Vec3::ZERO;
    for (&g, &delta) in circuit.gates.iter().zip(deltas) {
        let element = &table[g as usize];
        prefix = element.unitary.mul(&prefix);
        let nu = element_nu(element);
        if nu != Vec3::ZERO {
            let toggled = prefix.adjoint().conjugate_pauli(&nu);
            r = r.add(&toggled.scale(delta));
        }
    }
    let walk = WalkVector(r);
    let p = walk.survival_probability();
    Ok((walk, p))
}

/// First Magnus order error vector of one gate under a noise trace:
/// `a = -(1/2) ∫ δ(t) r_z(t) dt` with `r_z(t)` the Pauli vector of
/// `U_c†(t) σ_z U_c(t)` under the gate's ideal control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorVector {
    pub a: Vec3,
    pub gate_index: usize,
}

/// `∫_0^tau R_n(-Ω s) w ds` for a rotation at rate `omega` about unit
/// axis `n` (exact, stable at omega -> 0).
fn rotating_integral(w: Vec3, n: Vec3, omega: f64, tau: f64) -> Vec3 {
    if omega.abs() * tau < 1e-12 {
        return w.scale(tau);
    }
    let (s, c) = (omega * tau).sin_cos();
    let int_cos = s / omega;
    let int_sin = (1.0 - c) / omega;
    // R_n(phi) w = w cos phi + (n×w) sin phi + n (n·w)(1 - cos phi), phi = -Ω s
    let nxw = n.cross(&w);
    w.scale(int_cos)
        .add(&nxw.scale(-int_sin))
        .add(&n.scale(n.dot(&w) * (tau - int_cos)))
}

pub fn error_vector_first_order(
    schedule: &GateSchedule,
    trace: &NoiseTrace,
    t0: f64,
) -> Result<Vec3, WalkError> {
    let needed = t0 + schedule.total_duration();
    if trace.end() < needed - TIME_EPS {
        return Err(WalkError::TraceTooShort { trace_end: trace.end(), needed });
    }
    let mut u0 = Unitary2::IDENTITY;
    let mut acc = Vec3::ZERO;
    let mut t = t0;
    for seg in &schedule.segments {
        match *seg {
            Segment::FrameShift { angle } => {
                u0 = Unitary2::rotation_z(angle).mul(&u0);
            }
            _ => {
                let tau = seg.duration();
                let drive = seg.hamiltonian(0.0).unwrap();
                let omega = drive.norm();
                let n = if omega > 0.0 { drive.scale(1.0 / omega) } else { Vec3::ZERO };
                for (dt, delta) in trace.slices(t, t + tau) {
                    if delta != 0.0 {
                        let inner = rotating_integral(Vec3::new(0.0, 0.0, 1.0), n, omega, dt);
                        let toggled = u0.adjoint().conjugate_pauli(&inner);
                        acc = acc.add(&toggled.scale(-0.5 * delta));
                    }
                    u0 = Unitary2::from_hamiltonian(drive, dt).mul(&u0);
                }
                t += tau;
            }
        }
    }
    Ok(acc)
}

/// Per-gate error vectors of a whole circuit under one trace.
pub fn error_vector_series(
    circuit: &CircuitSpec,
    schedules: &[GateSchedule],
    trace: &NoiseTrace,
) -> Result<Vec<ErrorVector>, WalkError> {
    let mut out = Vec::with_capacity(circuit.gates.len());
    let mut t = 0.0;
    for (idx, &g) in circuit.gates.iter().enumerate() {
        let s = &schedules[g as usize];
        let a = error_vector_first_order(s, trace, t)?;
        out.push(ErrorVector { a, gate_index: idx });
        t += s.total_duration();
    }
    Ok(out)
}

/// Mean-subtracted, biased, normalized autocorrelation; `acf[0] = 1`.
/// A zero-variance series is defined to be perfectly correlated.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, WalkError> {
    if series.len() <= max_lag {
        return Err(WalkError::SeriesTooShort { len: series.len(), lag: max_lag });
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|x| x * x).sum();
    // a numerically constant series is defined as perfectly correlated
    if denom / n as f64 <= (mean * mean + f64::MIN_POSITIVE) * 1e-24 {
        return Ok(vec![1.0; max_lag + 1]);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let num: f64 = (0..n - lag).map(|i| centered[i] * centered[i + lag]).sum();
        out.push(num / denom);
    }
    Ok(out)
}

/// Error correlation length: smallest lag where the ACF drops below 1/e,
/// linearly interpolated between the bracketing integer lags.
pub fn correlation_length(acf: &[f64]) -> Result<f64, WalkError> {
    let threshold = (-1.0f64).exp();
    for lag in 1..acf.len() {
        if acf[lag] < threshold {
            let prev = acf[lag - 1];
            let frac = (prev - threshold) / (prev - acf[lag]);
            return Ok(lag as f64 - 1.0 + frac);
        }
    }
    Err(WalkError::NoCrossing)
}

/// `∫_0^tau e^{i kappa s} ds`, stable for small `kappa`.
fn cis_integral(kappa: f64, tau: f64) -> Complex64 {
    let x = 0.5 * kappa * tau;
    let sinc = if x.abs() < 1e-6 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Complex64::from_polar(tau * sinc, x)
}

/// First-order dephasing filter function `|G(ω)|²` of a schedule:
/// the squared magnitude of `F(ω) = ∫ e^{iωt} r_z(t) dt` summed over the
/// three Pauli components, integrated piecewise over segment and slice
/// structure.
pub fn filter_function(schedule: &GateSchedule, omegas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let mut f = [Complex64::ZERO; 3];
        let mut u0 = Unitary2::IDENTITY;
        let mut t = 0.0;
        for seg in &schedule.segments {
            match *seg {
                Segment::FrameShift { angle } => {
                    u0 = Unitary2::rotation_z(angle).mul(&u0);
                }
                _ => {
                    let tau = seg.duration();
                    let drive = seg.hamiltonian(0.0).unwrap();
                    let rate = drive.norm();
                    let n = if rate > 0.0 { drive.scale(1.0 / rate) } else { Vec3::ZERO };
                    let z = Vec3::new(0.0, 0.0, 1.0);
                    // ∫ e^{iωs} R_n(-Ωs) z ds decomposed on {z, n×z, n}
                    let i1 = 0.5 * (cis_integral(omega + rate, tau) + cis_integral(omega - rate, tau));
                    let i2 = (cis_integral(omega + rate, tau) - cis_integral(omega - rate, tau))
                        / Complex64::new(0.0, 2.0);
                    let i3 = cis_integral(omega, tau) - i1;
                    let nxz = n.cross(&z);
                    let nz = n.dot(&z);
                    let phase = Complex64::from_polar(1.0, omega * t);
                    // transform to circuit frame through the ideal prefix
                    let ex = u0.adjoint().conjugate_pauli(&Vec3::new(1.0, 0.0, 0.0));
                    let ey = u0.adjoint().conjugate_pauli(&Vec3::new(0.0, 1.0, 0.0));
                    let ez = u0.adjoint().conjugate_pauli(&Vec3::new(0.0, 0.0, 1.0));
                    // component a of M0·(z i1 - (n×z) i2 + n (n·z) i3), where
                    // M0 is the conjugation rotation through the ideal prefix
                    let comp = |a: usize| -> Complex64 {
                        let pick = |v: Vec3| match a {
                            0 => v.x,
                            1 => v.y,
                            _ => v.z,
                        };
                        let m0 = Vec3::new(pick(ex), pick(ey), pick(ez));
                        let re = m0.dot(&z) * i1.re - m0.dot(&nxz) * i2.re + m0.dot(&n) * nz * i3.re;
                        let im = m0.dot(&z) * i1.im - m0.dot(&nxz) * i2.im + m0.dot(&n) * nz * i3.im;
                        Complex64::new(re, im)
                    };
                    for a in 0..3 {
                        f[a] += phase * comp(a);
                    }
                    u0 = Unitary2::from_hamiltonian(drive, tau).mul(&u0);
                    t += tau;
                }
            }
        }
        out.push(f.iter().map(|c| c.norm_sqr()).sum());
    }
    out
}
