//! Pulse schedules realizing each Clifford element as primitive, CORPSE or
//! WAMF gates.
//!
//! Units: the Rabi rate is Omega = 1, so time and rotation angle share
//! units and the primitive pi/2 pulse lasts pi/2. Negative rotations are
//! realized as a +pi phase offset on the drive, never as negative duration.
//! Frame changes (z rotations) are instantaneous and noise free.

use crate::qcore::{phase_distance, CliffordElement, RotationAxis, Unitary2, Vec3};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GatesetError {
    #[error("invalid target angle {0} for this gate family")]
    InvalidAngle(f64),
}

/// Gate family implementing the Clifford set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Primitive,
    Corpse,
    Wamf,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Primitive => "primitive",
            Family::Corpse => "corpse",
            Family::Wamf => "wamf",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "primitive" => Ok(Family::Primitive),
            "corpse" => Ok(Family::Corpse),
            "wamf" => Ok(Family::Wamf),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

/// One piecewise-constant element of a gate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Driven rotation: angle `theta > 0` at relative amplitude
    /// `amp ∈ (0, 1]` and drive phase `phase`; duration `theta / amp`.
    Drive { theta: f64, amp: f64, phase: f64 },
    /// Undriven wait of the given duration.
    Wait { duration: f64 },
    /// Instantaneous z frame change, zero duration.
    FrameShift { angle: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match *self {
            Segment::Drive { theta, amp, .. } => theta / amp,
            Segment::Wait { duration } => duration,
            Segment::FrameShift { .. } => 0.0,
        }
    }

    /// Hamiltonian vector `v` with `H = v·sigma / 2` during the segment
    /// (frame shifts have none) at fractional detuning `delta`.
    pub fn hamiltonian(&self, delta: f64) -> Option<Vec3> {
        match *self {
            Segment::Drive { amp, phase, .. } => {
                Some(Vec3::new(amp * phase.cos(), amp * phase.sin(), delta))
            }
            Segment::Wait { .. } => Some(Vec3::new(0.0, 0.0, delta)),
            Segment::FrameShift { .. } => None,
        }
    }
}

/// Ordered pulse segments realizing one virtual gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule {
    pub family: Family,
    pub clifford_index: u8,
    pub segments: Vec<Segment>,
}

impl GateSchedule {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Ideal (zero detuning) propagator of the schedule.
    pub fn ideal_unitary(&self) -> Unitary2 {
        let mut u = Unitary2::IDENTITY;
        for seg in &self.segments {
            let step = match *seg {
                Segment::FrameShift { angle } => Unitary2::rotation_z(angle),
                _ => {
                    let v = seg.hamiltonian(0.0).unwrap();
                    Unitary2::from_hamiltonian(v, seg.duration())
                }
            };
            u = step.mul(&u);
        }
        u
    }
}

/// Duration in primitive-pi/2 units.
pub fn schedule_duration(s: &GateSchedule) -> f64 {
    s.total_duration() / FRAC_PI_2
}

/// `k = arcsin(sin(theta_t / 2) / 2)`, the CORPSE construction angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpseK(pub f64);

impl CorpseK {
    pub fn for_target(theta_t: f64) -> Self {
        CorpseK(((theta_t / 2.0).sin() / 2.0).asin())
    }
}

fn axis_phase(axis: RotationAxis) -> f64 {
    match axis {
        RotationAxis::Y => FRAC_PI_2,
        _ => 0.0,
    }
}

/// Bare physical rotation: one full-amplitude segment; z rotations are
/// frame changes and the identity is a wait of one pi-pulse length.
pub fn primitive_schedule(element: &CliffordElement) -> GateSchedule {
    let mut segments = Vec::new();
    for r in &element.decomposition {
        match r.axis {
            RotationAxis::Z => segments.push(Segment::FrameShift { angle: r.angle }),
            RotationAxis::Identity => segments.push(Segment::Wait { duration: PI }),
            RotationAxis::X | RotationAxis::Y => {
                let phase = axis_phase(r.axis) + if r.angle < 0.0 { PI } else { 0.0 };
                segments.push(Segment::Drive { theta: r.angle.abs(), amp: 1.0, phase });
            }
        }
    }
    GateSchedule { family: Family::Primitive, clifford_index: element.index, segments }
}

fn corpse_segments(theta_t: f64, phase0: f64) -> Vec<Segment> {
    let k = CorpseK::for_target(theta_t).0;
    vec![
        Segment::Drive { theta: 2.0 * PI + theta_t / 2.0 - k, amp: 1.0, phase: phase0 },
        Segment::Drive { theta: 2.0 * PI - 2.0 * k, amp: 1.0, phase: phase0 + PI },
        Segment::Drive { theta: theta_t / 2.0 - k, amp: 1.0, phase: phase0 },
    ]
}

/// Three-segment CORPSE rotation about x or y with target angle
/// `theta_t > 0`.
pub fn corpse_schedule(axis: RotationAxis, theta_t: f64) -> Result<GateSchedule, GatesetError> {
    if theta_t <= 0.0 {
        return Err(GatesetError::InvalidAngle(theta_t));
    }
    Ok(GateSchedule {
        family: Family::Corpse,
        clifford_index: 0,
        segments: corpse_segments(theta_t, axis_phase(axis)),
    })
}

const WAMF_TARGETS: [(f64, f64, f64); 3] = [
    (0.25, 2.25, 0.36), // theta_t/pi, X0/pi, X3/pi
    (0.5, 2.5, 0.64),
    (1.0, 3.0, 1.0),
];

fn wamf_segments(theta_t: f64, phase0: f64) -> Result<Vec<Segment>, GatesetError> {
    let (x0, x3) = WAMF_TARGETS
        .iter()
        .find(|(t, _, _)| (theta_t / PI - t).abs() < 1e-9)
        .map(|&(_, x0, x3)| (x0 * PI, x3 * PI))
        .ok_or(GatesetError::InvalidAngle(theta_t))?;
    Ok(vec![
        Segment::Drive { theta: (x0 + x3) / 4.0, amp: 1.0, phase: phase0 },
        Segment::Drive {
            theta: (x0 - x3) / 2.0,
            amp: (x0 - x3) / (x0 + x3),
            phase: phase0,
        },
        Segment::Drive { theta: (x0 + x3) / 4.0, amp: 1.0, phase: phase0 },
    ])
}

/// Three-segment amplitude-modulated WAMF rotation about x or y;
/// `theta_t` must be one of pi/4, pi/2, pi.
pub fn wamf_schedule(axis: RotationAxis, theta_t: f64) -> Result<GateSchedule, GatesetError> {
    if theta_t <= 0.0 {
        return Err(GatesetError::InvalidAngle(theta_t));
    }
    Ok(GateSchedule {
        family: Family::Wamf,
        clifford_index: 0,
        segments: wamf_segments(theta_t, axis_phase(axis))?,
    })
}

fn family_rotation_segments(
    family: Family,
    axis: RotationAxis,
    angle: f64,
) -> Result<Vec<Segment>, GatesetError> {
    // Negative targets become a +pi phase offset at the same magnitude.
    let phase0 = axis_phase(axis) + if angle < 0.0 { PI } else { 0.0 };
    let theta_t = angle.abs();
    match family {
        Family::Primitive => Ok(vec![Segment::Drive { theta: theta_t, amp: 1.0, phase: phase0 }]),
        Family::Corpse => Ok(corpse_segments(theta_t, phase0)),
        Family::Wamf => wamf_segments(theta_t, phase0),
    }
}

fn shift_phases(segments: &mut [Segment], shift: f64) {
    for seg in segments {
        if let Segment::Drive { phase, .. } = seg {
            *phase += shift;
        }
    }
}

/// Identity gate for a family: a pi-length wait for primitive gates, or
/// the family X_pi followed by its inverse (-X_pi) for the DCG families.
pub fn identity_schedule(family: Family) -> GateSchedule {
    let segments = match family {
        Family::Primitive => vec![Segment::Wait { duration: PI }],
        Family::Corpse | Family::Wamf => {
            let mut fwd = family_rotation_segments(family, RotationAxis::X, PI).unwrap();
            let mut rev = family_rotation_segments(family, RotationAxis::X, PI).unwrap();
            shift_phases(&mut rev, PI);
            fwd.append(&mut rev);
            fwd
        }
    };
    GateSchedule { family, clifford_index: 0, segments }
}

/// Schedule realizing one Clifford element in the given family.
pub fn clifford_schedule(
    family: Family,
    element: &CliffordElement,
) -> Result<GateSchedule, GatesetError> {
    let mut segments = Vec::new();
    for r in &element.decomposition {
        match r.axis {
            RotationAxis::Z => segments.push(Segment::FrameShift { angle: r.angle }),
            RotationAxis::Identity => {
                segments.extend(identity_schedule(family).segments);
            }
            RotationAxis::X | RotationAxis::Y => {
                segments.extend(family_rotation_segments(family, r.axis, r.angle)?);
            }
        }
    }
    Ok(GateSchedule { family, clifford_index: element.index, segments })
}

/// Prebuilt schedules for all 24 Clifford elements, indexed by element.
pub fn schedule_table(family: Family) -> Vec<GateSchedule> {
    crate::qcore::clifford_table()
        .iter()
        .map(|e| clifford_schedule(family, e).expect("clifford angles are always valid"))
        .collect()
}

/// Check a schedule against its target ideal unitary (phase invariant).
pub fn verify_schedule(s: &GateSchedule, target: &Unitary2) -> bool {
    phase_distance(&s.ideal_unitary(), target) < crate::qcore::PHASE_TOL
}
