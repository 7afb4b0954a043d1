//! Scenario families and random ensembles.
//!
//! The edge family has `P = (−a, 1 − a, 0)`, on an edge of the octahedron
//! where both tetrahedra overlap. The plane families sit on `Σ C_kk = 1`.
//! Each family has a channel and a state realization with identical round-0
//! correlations.

use nalgebra::{Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::comb::{bell_diagonal, Scenario, TwoQubitState};
use crate::error::{Error, Result};
use crate::linalg::{unitary_from_axis_angle, AxisAngle, BlochVector, Mat2, Tolerances, C64};

fn check_unit_interval(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::OutOfRange(format!("edge parameter {a} not in [0, 1]")));
    }
    Ok(())
}

/// Channel on the edge family: rotation by `arccos(−a)` about
/// `(0, √(1/(1+a)), √(a/(1+a)))`.
pub fn edge_dc(a: f64) -> Result<Scenario> {
    check_unit_interval(a)?;
    let axis = BlochVector::normalized(Vector3::new(0.0, (1.0 / (1.0 + a)).sqrt(), (a / (1.0 + a)).sqrt()))?;
    let aa = AxisAngle::new(axis, (-a).acos())?;
    Scenario::direct_cause(unitary_from_axis_angle(&aa))
}

/// State on the edge family: Bell-diagonal weights `(0, ½, (1−a)/2, a/2)`.
pub fn edge_cc(a: f64) -> Result<Scenario> {
    check_unit_interval(a)?;
    Ok(Scenario::common_cause(bell_diagonal([0.0, 0.5, (1.0 - a) / 2.0, a / 2.0])?))
}

/// Quarter turn about `axis`; `P = (n₁², n₂², n₃²)`.
pub fn plane_dc(axis: BlochVector) -> Result<Scenario> {
    let aa = AxisAngle::new(axis, std::f64::consts::FRAC_PI_2)?;
    Scenario::direct_cause(unitary_from_axis_angle(&aa))
}

/// Mixture `p₁Φ⁺ + p₂Φ⁻ + p₃Ψ⁺` on the exceptional face.
pub fn plane_cc(weights: [f64; 3]) -> Result<Scenario> {
    let tol = Tolerances::DEFAULT.input;
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < -tol) || (total - 1.0).abs() > tol {
        return Err(Error::OutOfRange(format!("{weights:?} is not on the probability simplex")));
    }
    let [p1, p2, p3] = weights;
    Ok(Scenario::common_cause(bell_diagonal([p1, p2, p3, 0.0])?))
}

/// Round-0 correlation vector of [`plane_cc`].
pub fn plane_cc_point(weights: [f64; 3]) -> [f64; 3] {
    let [p1, p2, p3] = weights;
    [p1 - p2 + p3, -p1 + p2 + p3, p1 + p2 - p3]
}

/// Channel with round-0 vector `p` on the plane, when one exists (all entries
/// non-negative).
pub fn plane_dc_matching(p: [f64; 3]) -> Option<Scenario> {
    if p.iter().any(|c| *c < -1e-12) {
        return None;
    }
    let n = Vector3::from(p.map(|c| c.max(0.0).sqrt()));
    let axis = BlochVector::normalized(n).ok()?;
    plane_dc(axis).ok()
}

/// Pure state `(|00⟩ + e^{iφ}|11⟩)/√2`.
pub fn phase_bell(phi: f64) -> Result<Scenario> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let psi = Vector4::new(C64::from(h), z, z, C64::from_polar(h, phi));
    Ok(Scenario::common_cause(TwoQubitState::pure(psi)?))
}

/// Haar-random element of SU(2) from a uniform point on the 3-sphere.
pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let a = C64::new(q[0], q[1]) / norm;
        let b = C64::new(q[2], q[3]) / norm;
        return Mat2::new(a, -b.conj(), b, a.conj());
    }
}

pub fn haar_unitary(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Scenario::direct_cause(haar_unitary_with(&mut rng)).expect("SU(2) elements are unitary")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    Mixed,
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar pure state (`Pure`) or Hilbert–Schmidt mixed state (`Mixed`).
pub fn random_state_with<R: Rng + ?Sized>(kind: StateKind, rng: &mut R) -> TwoQubitState {
    match kind {
        StateKind::Pure => loop {
            let psi = Vector4::from_fn(|_, _| complex_normal(rng));
            if let Ok(s) = TwoQubitState::pure(psi) {
                return s;
            }
        },
        StateKind::Mixed => loop {
            let g = Matrix4::from_fn(|_, _| complex_normal(rng));
            let w = g * g.adjoint();
            let tr = w.trace();
            let mut rho = w / tr;
            // Remove rounding asymmetry before validation.
            rho = (rho + rho.adjoint()) * C64::from(0.5);
            if let Ok(s) = TwoQubitState::new(rho) {
                return s;
            }
        },
    }
}

pub fn random_state(kind: StateKind, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Scenario::common_cause(random_state_with(kind, &mut rng))
}

/// `n` nearly uniform points on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<BlochVector> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            BlochVector::normalized(Vector3::new(r * phi.cos(), r * phi.sin(), z)).expect("unit point")
        })
        .collect()
}

/// Points `(i, j, k)/d` with `i + j + k = d`.
pub fn simplex_lattice(denominator: u32) -> Vec<[f64; 3]> {
    let d = denominator.max(1);
    let mut out = Vec::new();
    for i in 0..=d {
        for j in 0..=(d - i) {
            let k = d - i - j;
            out.push([i, j, k].map(|v| f64::from(v) / f64::from(d)));
        }
    }
    out
}
