//! Correlation-space geometry.
//!
//! Channels reach the tetrahedron spanned by the Pauli-unitary vertices,
//! states the one spanned by the Bell states. The two intersect in the
//! octahedron `Σ|C_kk| ≤ 1`, where round-0 correlations alone cannot decide
//! the mechanism. The plane `Σ C_kk = 1` carries the common-cause face spanned
//! by Φ⁺, Φ⁻ and Ψ⁺.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::comb::CorrelationVector;
use crate::error::{Error, Result};

/// Default membership tolerance for exact statistics.
pub const EXACT_TOLERANCE: f64 = 1e-7;

/// `P(σ₃)`, the correlation vector of the `σ₃` channel.
pub const SIGMA3_POINT: CorrelationVector = CorrelationVector::new(-1.0, -1.0, 1.0);

pub const DC_VERTICES: [CorrelationVector; 4] = [
    CorrelationVector::new(1.0, 1.0, 1.0),
    CorrelationVector::new(1.0, -1.0, -1.0),
    CorrelationVector::new(-1.0, 1.0, -1.0),
    CorrelationVector::new(-1.0, -1.0, 1.0),
];

pub const CC_VERTICES: [CorrelationVector; 4] = [
    CorrelationVector::new(1.0, -1.0, 1.0),
    CorrelationVector::new(-1.0, 1.0, 1.0),
    CorrelationVector::new(1.0, 1.0, -1.0),
    CorrelationVector::new(-1.0, -1.0, -1.0),
];

/// Non-degenerate tetrahedron in correlation space.
#[derive(Debug, Clone)]
pub struct Polytope {
    vertices: [CorrelationVector; 4],
    // Inverse of the edge matrix [v1 − v0, v2 − v0, v3 − v0].
    inverse_edges: Matrix3<f64>,
}

impl Polytope {
    pub fn new(vertices: [CorrelationVector; 4]) -> Result<Self> {
        let v0 = vertices[0].to_vector();
        let edges = Matrix3::from_columns(&[
            vertices[1].to_vector() - v0,
            vertices[2].to_vector() - v0,
            vertices[3].to_vector() - v0,
        ]);
        let volume = edges.determinant().abs() / 6.0;
        if volume.is_nan() || volume <= 1e-12 {
            return Err(Error::DegeneratePolytope(volume));
        }
        let inverse_edges = edges.try_inverse().ok_or(Error::DegeneratePolytope(volume))?;
        Ok(Self {
            vertices,
            inverse_edges,
        })
    }

    pub fn direct_cause() -> Self {
        Self::new(DC_VERTICES).expect("regular tetrahedron")
    }

    pub fn common_cause() -> Self {
        Self::new(CC_VERTICES).expect("regular tetrahedron")
    }

    pub fn vertices(&self) -> &[CorrelationVector; 4] {
        &self.vertices
    }
}

/// Barycentric weights of `p` with respect to the vertices of `t`.
pub fn barycentric(p: &CorrelationVector, t: &Polytope) -> [f64; 4] {
    let rel: Vector3<f64> = p.to_vector() - t.vertices[0].to_vector();
    let w = t.inverse_edges * rel;
    [1.0 - w.sum(), w.x, w.y, w.z]
}

/// Most negative barycentric weight (0 when all weights are non-negative).
pub fn membership_violation(p: &CorrelationVector, t: &Polytope) -> f64 {
    barycentric(p, t).into_iter().fold(0.0, f64::min)
}

pub fn member(p: &CorrelationVector, t: &Polytope, tol: f64) -> bool {
    barycentric(p, t).iter().all(|w| *w >= -tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    DCOnly,
    CCOnly,
    Overlap,
    Outside,
}

pub fn classify_region(p: &CorrelationVector, tol: f64) -> RegionLabel {
    let dc = member(p, &Polytope::direct_cause(), tol);
    let cc = member(p, &Polytope::common_cause(), tol);
    match (dc, cc) {
        (true, true) => RegionLabel::Overlap,
        (true, false) => RegionLabel::DCOnly,
        (false, true) => RegionLabel::CCOnly,
        (false, false) => RegionLabel::Outside,
    }
}

/// Membership tolerance for shot-sampled correlations, `3/√N`.
pub fn sampled_tolerance(shots: u64) -> f64 {
    3.0 / (shots as f64).sqrt()
}

/// Signed gap `1 − Σ C_kk` to the exceptional plane.
pub fn plane_gap(p: &CorrelationVector) -> f64 {
    1.0 - p.sum()
}

pub fn distance(p: &CorrelationVector, q: &CorrelationVector) -> f64 {
    (p.to_vector() - q.to_vector()).norm()
}
