//! Complex 2×2 unitary algebra, Pauli decompositions, and the 24-element
//! single-qubit Clifford group.
//!
//! Conventions: a rotation by angle `theta` about axis `n` is
//! `U = exp(-i theta/2 n·sigma)`, and `compose(a, b)` applies `a` first,
//! i.e. returns the matrix product `b·a`. Matrix comparisons are
//! phase-invariant throughout: two unitaries are "equal" when
//! `1 - F < 1e-9` with `F = |Tr(a† b)|² / 4`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Tolerance for phase-invariant matrix identification.
pub const PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum QcoreError {
    /// The matrix does not match any Clifford element up to global phase.
    #[error("matrix is not a Clifford element (best distance {closest:.3e})")]
    NotClifford { closest: f64 },
}

/// Real 3-vector over the Pauli axes (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn scale(&self, c: f64) -> Vec3 {
        Vec3::new(c * self.x, c * self.y, c * self.z)
    }

    pub fn add(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    /// Rotation about the z axis by `gamma` (right-hand rule).
    pub fn rotated_z(&self, gamma: f64) -> Vec3 {
        let (s, c) = gamma.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

/// Complex 2×2 matrix; the fundamental propagator and gate representation.
///
/// Stored row-major as `m[row][col]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub m: [[Complex64; 2]; 2],
}

const I1: Complex64 = Complex64::new(0.0, 1.0);

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 {
        m: [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ],
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Unitary2 { m: [[a, b], [c, d]] }
    }

    /// `exp(-i theta/2 n·sigma)` for a unit axis `n`.
    pub fn from_axis_angle(n: Vec3, theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Unitary2::new(
            Complex64::new(c, -n.z * s),
            Complex64::new(-n.y * s, -n.x * s),
            Complex64::new(n.y * s, -n.x * s),
            Complex64::new(c, n.z * s),
        )
    }

    /// `exp(-i (dt/2) v·sigma)` for an arbitrary (not normalized) `v`.
    ///
    /// This is the exact propagator of the constant Hamiltonian
    /// `H = v·sigma / 2` over a slice of length `dt`.
    pub fn from_hamiltonian(v: Vec3, dt: f64) -> Self {
        let w = v.norm();
        if w == 0.0 {
            return Unitary2::IDENTITY;
        }
        Unitary2::from_axis_angle(v.scale(1.0 / w), w * dt)
    }

    pub fn rotation_x(theta: f64) -> Self {
        Unitary2::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), theta)
    }

    pub fn rotation_y(theta: f64) -> Self {
        Unitary2::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), theta)
    }

    pub fn rotation_z(theta: f64) -> Self {
        Unitary2::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), theta)
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn adjoint(&self) -> Unitary2 {
        Unitary2::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest elementwise deviation of `self† self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((p.m[r][c] - target).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// Conjugate a real Pauli vector: returns `r` with
    /// `r·sigma = U (v·sigma) U†`.
    ///
    /// `U` unitary makes `r` real with `|r| = |v|`.
    pub fn conjugate_pauli(&self, v: &Vec3) -> Vec3 {
        // v·sigma in matrix form.
        let a = Complex64::new(v.z, 0.0);
        let b = Complex64::new(v.x, -v.y);
        // M = [[vz, vx - i vy], [vx + i vy, -vz]]
        let m = Unitary2::new(a, b, b.conj(), -a);
        let t = self.mul(&m).mul(&self.adjoint());
        Vec3::new(t.m[1][0].re, t.m[1][0].im, t.m[0][0].re)
    }
}

/// Phase-invariant gate overlap `F = |Tr(s† t)|² / 4`, in `[0, 1]`.
pub fn fidelity(s: &Unitary2, t: &Unitary2) -> f64 {
    let tr = s.adjoint().mul(t).trace();
    (tr.norm_sqr() / 4.0).min(1.0)
}

/// Phase-invariant distance `1 - F`.
pub fn phase_distance(s: &Unitary2, t: &Unitary2) -> f64 {
    1.0 - fidelity(s, t)
}

/// Matrix product `b·a`, i.e. `a` applied first.
pub fn compose(a: &Unitary2, b: &Unitary2) -> Unitary2 {
    b.mul(a)
}

/// Pauli-basis expansion coefficients of a 2×2 matrix:
/// `A = c0·I + cx·sigma_x + cy·sigma_y + cz·sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCoeffs {
    pub c0: Complex64,
    pub cx: Complex64,
    pub cy: Complex64,
    pub cz: Complex64,
}

impl PauliCoeffs {
    /// Decompose an arbitrary 2×2 complex matrix in the Pauli basis.
    pub fn decompose(a: &Unitary2) -> Self {
        let half = Complex64::new(0.5, 0.0);
        PauliCoeffs {
            c0: (a.m[0][0] + a.m[1][1]) * half,
            cx: (a.m[0][1] + a.m[1][0]) * half,
            cy: (a.m[0][1] - a.m[1][0]) * half * I1,
            cz: (a.m[0][0] - a.m[1][1]) * half,
        }
    }

    /// Reassemble `c0·I + c·sigma`.
    pub fn reassemble(&self) -> Unitary2 {
        Unitary2::new(
            self.c0 + self.cz,
            self.cx - I1 * self.cy,
            self.cx + I1 * self.cy,
            self.c0 - self.cz,
        )
    }
}

/// Axis of one physical rotation in a Clifford decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    X,
    Y,
    /// Implemented as a passive frame change; not susceptible to noise.
    Z,
    /// A wait with no drive, the physical identity.
    Identity,
}

/// One physical rotation `(axis, angle)` with `angle ∈ {pi, ±pi/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalRotation {
    pub axis: RotationAxis,
    pub angle: f64,
}

impl PhysicalRotation {
    fn unitary(&self) -> Unitary2 {
        match self.axis {
            RotationAxis::X => Unitary2::rotation_x(self.angle),
            RotationAxis::Y => Unitary2::rotation_y(self.angle),
            RotationAxis::Z => Unitary2::rotation_z(self.angle),
            RotationAxis::Identity => Unitary2::IDENTITY,
        }
    }

    fn label(&self) -> String {
        let axis = match self.axis {
            RotationAxis::X => "X",
            RotationAxis::Y => "Y",
            RotationAxis::Z => "Z",
            RotationAxis::Identity => "I",
        };
        let deg = (self.angle * 180.0 / PI).round() as i64;
        format!("{axis}{deg}")
    }
}

/// One element of the single-qubit Clifford group.
///
/// Each element carries its canonical physical decomposition: at most one
/// driven (non-z) rotation, optionally followed by a z frame change. The
/// identity element is a wait of one pi-pulse duration; the three pure-z
/// elements are zero-duration frame changes.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    pub index: u8,
    pub decomposition: Vec<PhysicalRotation>,
    pub unitary: Unitary2,
}

impl CliffordElement {
    /// Driven rotation of the decomposition, if any (`X`/`Y` pulse or the
    /// identity wait). Pure-z elements return `None`.
    pub fn pulse(&self) -> Option<&PhysicalRotation> {
        self.decomposition
            .iter()
            .find(|r| matches!(r.axis, RotationAxis::X | RotationAxis::Y | RotationAxis::Identity))
    }

    /// Trailing z frame-change angle (0 when absent).
    pub fn frame_angle(&self) -> f64 {
        self.decomposition
            .iter()
            .filter(|r| r.axis == RotationAxis::Z)
            .map(|r| r.angle)
            .sum()
    }

    /// Semicolon-separated decomposition label, e.g. `"X90;Z-90"`.
    pub fn decomposition_string(&self) -> String {
        self.decomposition
            .iter()
            .map(PhysicalRotation::label)
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn element(index: u8, decomposition: Vec<PhysicalRotation>) -> CliffordElement {
    let mut u = Unitary2::IDENTITY;
    for r in &decomposition {
        u = compose(&u, &r.unitary());
    }
    CliffordElement { index, decomposition, unitary: u }
}

/// The canonical 24-element single-qubit Clifford table.
///
/// Construction: indices 0–3 are the identity wait and the three pure z
/// frame changes; 4–7 one X pi pulse with trailing frame angle
/// {0, 90, 180, -90}; 8–23 the four ±pi/2 pulses about x and y, each with
/// the same four trailing frame angles. Exported via `decomposition_string`
/// and frozen by a golden-hash test.
pub fn clifford_table() -> Vec<CliffordElement> {
    let rot = |axis, angle| PhysicalRotation { axis, angle };
    let frames = [0.0, FRAC_PI_2, PI, -FRAC_PI_2];

    let mut table = Vec::with_capacity(24);
    table.push(element(0, vec![rot(RotationAxis::Identity, PI)]));
    for (i, &g) in frames.iter().enumerate().skip(1) {
        table.push(element(i as u8, vec![rot(RotationAxis::Z, g)]));
    }

    let pulses = [
        (RotationAxis::X, PI),
        (RotationAxis::X, FRAC_PI_2),
        (RotationAxis::X, -FRAC_PI_2),
        (RotationAxis::Y, FRAC_PI_2),
        (RotationAxis::Y, -FRAC_PI_2),
    ];
    let mut index = 4u8;
    for &(axis, angle) in &pulses {
        for &g in &frames {
            let mut decomposition = vec![rot(axis, angle)];
            if g != 0.0 {
                decomposition.push(rot(RotationAxis::Z, g));
            }
            table.push(element(index, decomposition));
            index += 1;
        }
    }
    table
}

/// Find the element whose ideal unitary equals `u†` up to global phase.
pub fn inverse_in_clifford(
    u: &Unitary2,
    table: &[CliffordElement],
) -> Result<CliffordElement, QcoreError> {
    let target = u.adjoint();
    let mut closest = f64::INFINITY;
    for e in table {
        let d = phase_distance(&e.unitary, &target);
        if d < PHASE_TOL {
            return Ok(e.clone());
        }
        closest = closest.min(d);
    }
    Err(QcoreError::NotClifford { closest })
}

/// Index of the table element matching `u` up to global phase.
pub fn find_in_clifford(u: &Unitary2, table: &[CliffordElement]) -> Result<u8, QcoreError> {
    let mut closest = f64::INFINITY;
    for e in table {
        let d = phase_distance(&e.unitary, u);
        if d < PHASE_TOL {
            return Ok(e.index);
        }
        closest = closest.min(d);
    }
    Err(QcoreError::NotClifford { closest })
}

/// CSV export of the Clifford table: index, decomposition, and the eight
/// real components of the ideal matrix (row-major re/im pairs).
pub fn clifford_table_csv() -> String {
    let mut out = String::from(
        "index,decomposition,m00_re,m00_im,m01_re,m01_im,m10_re,m10_im,m11_re,m11_im\n",
    );
    for e in clifford_table() {
        let m = &e.unitary.m;
        out.push_str(&format!(
            "{},{},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12}\n",
            e.index,
            e.decomposition_string(),
            m[0][0].re,
            m[0][0].im,
            m[0][1].re,
            m[0][1].im,
            m[1][0].re,
            m[1][0].im,
            m[1][1].re,
            m[1][1].im,
        ));
    }
    out
}
