//! Small fixed-size complex linear algebra for one and two qubits.
//!
//! Qubit operators are `2×2` complex matrices, two-qubit operators are `4×4`.
//! The SU(2) → SO(3) covering map is realized by [`rotation_from_unitary`]:
//! conjugation `U (v·σ) U†` acts on Bloch vectors as the rotation `R v`.
//! Global phases are invisible to `R`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Tolerance for checking results we produced ourselves.
    pub validation: f64,
    /// Tolerance for rejecting caller-supplied inputs.
    pub input: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        validation: 1e-9,
        input: 1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Pauli matrix `σ_k`; `k = 0` is the identity.
pub fn pauli(k: usize) -> Result<Mat2> {
    let m = match k {
        0 => Mat2::new(ONE, ZERO, ZERO, ONE),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => return Err(Error::PauliIndex(k)),
    };
    Ok(m)
}

/// `[σ₁, σ₂, σ₃]`.
pub fn pauli_basis() -> [Mat2; 3] {
    [1, 2, 3].map(|k| pauli(k).expect("index in range"))
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// `n·σ` for a real 3-vector `n`.
pub fn pauli_dot(n: &Vector3<f64>) -> Mat2 {
    let [s1, s2, s3] = pauli_basis();
    s1 * C64::from(n.x) + s2 * C64::from(n.y) + s3 * C64::from(n.z)
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    a.kronecker(b)
}

/// Largest entry magnitude of `U†U − I`.
pub fn unitarity_residual(u: &Mat2) -> f64 {
    (u.adjoint() * u - Mat2::identity()).camax()
}

pub fn is_finite2(m: &Mat2) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite4(m: &Mat4) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Checks that `u` is a finite unitary within `tol`.
pub fn check_unitary(u: &Mat2, tol: f64) -> Result<()> {
    if !is_finite2(u) {
        return Err(Error::NonFinite);
    }
    let residual = unitarity_residual(u);
    if residual > tol {
        return Err(Error::NotUnitary(residual));
    }
    Ok(())
}

/// Overlap `|Tr(A†B)| / 2`; equals 1 iff `A` and `B` agree up to a global phase.
pub fn phase_overlap(a: &Mat2, b: &Mat2) -> f64 {
    (a.adjoint() * b).trace().norm() / 2.0
}

/// Unit 3-vector, typically a direction on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub const Z: BlochVector = BlochVector(Vector3::new(0.0, 0.0, 1.0));
    pub const X: BlochVector = BlochVector(Vector3::new(1.0, 0.0, 0.0));
    pub const Y: BlochVector = BlochVector(Vector3::new(0.0, 1.0, 0.0));

    /// Accepts `v` if its norm is 1 within the input tolerance, then renormalizes.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > Tolerances::DEFAULT.input {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self(v / norm))
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalized(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::NotUnit(norm));
        }
        Ok(Self(v / norm))
    }

    pub fn from_components(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vector3::new(x, y, z))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl std::ops::Neg for BlochVector {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;

    fn try_from(a: [f64; 3]) -> Result<Self> {
        Self::new(Vector3::from(a))
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(b: BlochVector) -> Self {
        b.to_array()
    }
}

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let tol = Tolerances::DEFAULT.input;
        let orth = (m.transpose() * m - Matrix3::identity()).amax();
        let det = m.determinant();
        if !orth.is_finite() || orth > tol || (det - 1.0).abs() > tol {
            return Err(Error::OutOfRange(format!(
                "not a rotation (orthogonality residual {orth:.3e}, det {det})"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.0[(0, 0)], self.0[(1, 1)], self.0[(2, 2)]]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

/// Rotation by `angle ∈ [0, π]` about `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: BlochVector,
    pub angle: f64,
}

impl AxisAngle {
    pub fn new(axis: BlochVector, angle: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&angle) {
            return Err(Error::OutOfRange(format!("rotation angle {angle} not in [0, π]")));
        }
        Ok(Self::canonical(axis, angle))
    }

    /// Maps any real angle into `[0, π]`, flipping the axis where needed.
    pub fn wrapped(axis: BlochVector, angle: f64) -> Result<Self> {
        use std::f64::consts::{PI, TAU};
        if !angle.is_finite() {
            return Err(Error::OutOfRange(format!("rotation angle {angle}")));
        }
        let mut a = angle.rem_euclid(TAU);
        let mut axis = axis;
        if a > PI {
            a = TAU - a;
            axis = -axis;
        }
        Ok(Self::canonical(axis, a))
    }

    fn canonical(axis: BlochVector, angle: f64) -> Self {
        if angle == 0.0 {
            Self {
                axis: BlochVector::Z,
                angle,
            }
        } else {
            Self { axis, angle }
        }
    }

    pub fn identity() -> Self {
        Self {
            axis: BlochVector::Z,
            angle: 0.0,
        }
    }
}

/// `exp(−i·angle·(n·σ)/2) = cos(angle/2)·I − i·sin(angle/2)·(n·σ)`.
pub fn unitary_from_axis_angle(aa: &AxisAngle) -> Mat2 {
    let half = aa.angle / 2.0;
    Mat2::identity() * C64::from(half.cos()) - pauli_dot(aa.axis.vector()) * (I * half.sin())
}

/// `R_kl = ½·Tr[σ_k U σ_l U†]`.
pub fn rotation_from_unitary(u: &Mat2) -> Result<RotationMatrix> {
    check_unitary(u, Tolerances::DEFAULT.input)?;
    let sigma = pauli_basis();
    let ud = u.adjoint();
    let conj: [Mat2; 3] = sigma.map(|s| u * s * ud);
    let m = Matrix3::from_fn(|k, l| 0.5 * (sigma[k] * conj[l]).trace().re);
    Ok(RotationMatrix(m))
}

/// Inverse of the Rodrigues map, with the conventions:
/// angle in `[0, π]`; identity gives axis `ẑ`; at angle `π` the axis sign is
/// chosen so the first non-zero component is positive.
pub fn axis_angle_from_rotation(r: &RotationMatrix) -> AxisAngle {
    let m = r.matrix();
    let cos = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    // Antisymmetric part: 2·sinθ·n.
    let w = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    let sin = w.norm() / 2.0;
    let angle = sin.atan2(cos);

    if angle < 1e-15 {
        return AxisAngle::identity();
    }

    if cos > 0.0 {
        let axis = BlochVector::normalized(w).expect("sin bounded away from zero");
        return AxisAngle { axis, angle };
    }

    // Symmetric part: (R + Rᵀ)/2 − cosθ·I = (1 − cosθ)·n nᵀ.
    let outer = (m + m.transpose()) / 2.0 - Matrix3::identity() * cos;
    let j = (0..3)
        .max_by(|&a, &b| outer[(a, a)].total_cmp(&outer[(b, b)]))
        .expect("three diagonal entries");
    let mut n: Vector3<f64> = outer.column(j).into_owned();
    n /= n.norm();

    if sin > Tolerances::DEFAULT.validation {
        if n.dot(&w) < 0.0 {
            n = -n;
        }
    } else if let Some(first) = n.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            n = -n;
        }
    }
    AxisAngle {
        axis: BlochVector(n),
        angle,
    }
}
