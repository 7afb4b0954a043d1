//! Two-point measurement simulator.
//!
//! A [`Scenario`] hides one of two mechanisms between the measurement points
//! X and Y:
//!
//! * direct cause: the qubit measured at X is reprepared in the observed
//!   eigenstate (Lüders update of a rank-one projector) and sent through a
//!   unitary channel `U` to Y;
//! * common cause: X and Y measure the two halves of a two-qubit state `ρ`.
//!
//! Observables are modified Paulis `W σ_k W†`. Outcome statistics are exact or
//! drawn as multinomial shot counts.

mod json;
mod oracle;

pub use json::{MatrixEntries, ScenarioSpec};
pub use oracle::{make_oracle, MeasurementOracle, Observation, SimulatedOracle};

use nalgebra::{Matrix3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_unitary, is_finite2, is_finite4, kron, pauli, Mat2, Mat4, Tolerances, C64};

/// Outcome labels in storage order.
pub const OUTCOMES: [i8; 2] = [1, -1];

/// Two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState(Mat4);

impl TwoQubitState {
    pub fn new(rho: Mat4) -> Result<Self> {
        let tol = Tolerances::DEFAULT.validation;
        if !is_finite4(&rho) {
            return Err(Error::NonFinite);
        }
        let herm = (rho - rho.adjoint()).camax();
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_eig = rho.symmetric_eigenvalues().min();
        if min_eig < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self(rho))
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: Vector4<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / C64::from(norm);
        Self::new(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// `T_kl = Tr[ρ σ_k ⊗ σ_l]`.
    pub fn correlation_matrix(&self) -> Matrix3<f64> {
        let s = [1, 2, 3].map(|k| pauli(k).expect("index in range"));
        Matrix3::from_fn(|k, l| (self.0 * kron(&s[k], &s[l])).trace().re)
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

/// The four Bell states, in the order used for Bell-diagonal weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    pub fn vector(self) -> Vector4<C64> {
        let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let z = C64::from(0.0);
        match self {
            Bell::PhiPlus => Vector4::new(h, z, z, h),
            Bell::PhiMinus => Vector4::new(h, z, z, -h),
            Bell::PsiPlus => Vector4::new(z, h, h, z),
            Bell::PsiMinus => Vector4::new(z, h, -h, z),
        }
    }

    pub fn state(self) -> TwoQubitState {
        TwoQubitState::pure(self.vector()).expect("Bell states are normalized")
    }
}

/// Mixture `Σ w_b |b⟩⟨b|` over `Bell::ALL`.
pub fn bell_diagonal(weights: [f64; 4]) -> Result<TwoQubitState> {
    let tol = Tolerances::DEFAULT.input;
    if weights.iter().any(|w| !w.is_finite() || *w < -tol) {
        return Err(Error::OutOfRange(format!("Bell weights {weights:?} must be non-negative")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::OutOfRange(format!("Bell weights sum to {total}, expected 1")));
    }
    let rho = Bell::ALL
        .iter()
        .zip(weights)
        .map(|(b, w)| {
            let v = b.vector();
            v * v.adjoint() * C64::from(w.max(0.0) / total)
        })
        .fold(Mat4::zeros(), |acc, m| acc + m);
    TwoQubitState::new(rho)
}

fn check_qubit_density(rho: &Mat2) -> Result<()> {
    let tol = Tolerances::DEFAULT.validation;
    if !is_finite2(rho) {
        return Err(Error::NonFinite);
    }
    let herm = (rho - rho.adjoint()).camax();
    let tr = rho.trace();
    if herm > tol || (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("qubit marginal (trace {tr}, hermiticity {herm:.3e})")));
    }
    if rho.symmetric_eigenvalues().min() < -tol {
        return Err(Error::InvalidState("qubit marginal is not positive".into()));
    }
    Ok(())
}

/// Unitary channel together with the state arriving at X.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryChannel {
    unitary: Mat2,
    input_marginal: Mat2,
}

impl UnitaryChannel {
    pub fn unitary(&self) -> &Mat2 {
        &self.unitary
    }

    pub fn input_marginal(&self) -> &Mat2 {
        &self.input_marginal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    #[serde(rename = "DC")]
    DirectCause,
    #[serde(rename = "CC")]
    CommonCause,
}

impl Mechanism {
    pub fn tag(self) -> &'static str {
        match self {
            Mechanism::DirectCause => "DC",
            Mechanism::CommonCause => "CC",
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Hidden causal mechanism linking X and Y.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    DirectCause(UnitaryChannel),
    CommonCause(TwoQubitState),
}

impl Scenario {
    /// Direct cause fed with the maximally mixed marginal `I/2`.
    pub fn direct_cause(unitary: Mat2) -> Result<Self> {
        Self::direct_cause_with_marginal(unitary, Mat2::identity() * C64::from(0.5))
    }

    pub fn direct_cause_with_marginal(unitary: Mat2, input_marginal: Mat2) -> Result<Self> {
        check_unitary(&unitary, Tolerances::DEFAULT.validation)?;
        check_qubit_density(&input_marginal)?;
        Ok(Scenario::DirectCause(UnitaryChannel {
            unitary,
            input_marginal,
        }))
    }

    pub fn common_cause(state: TwoQubitState) -> Self {
        Scenario::CommonCause(state)
    }

    pub fn mechanism(&self) -> Mechanism {
        match self {
            Scenario::DirectCause(_) => Mechanism::DirectCause,
            Scenario::CommonCause(_) => Mechanism::CommonCause,
        }
    }
}

/// Observable `W σ_k W†` with `k ∈ {1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSpec {
    modifier: Mat2,
    pauli_index: usize,
}

impl ObservableSpec {
    pub fn new(modifier: Mat2, pauli_index: usize) -> Result<Self> {
        if !(1..=3).contains(&pauli_index) {
            return Err(Error::PauliIndex(pauli_index));
        }
        check_unitary(&modifier, Tolerances::DEFAULT.validation)?;
        Ok(Self {
            modifier,
            pauli_index,
        })
    }

    pub fn pauli(k: usize) -> Result<Self> {
        Self::new(Mat2::identity(), k)
    }

    pub fn modifier(&self) -> &Mat2 {
        &self.modifier
    }

    pub fn pauli_index(&self) -> usize {
        self.pauli_index
    }

    /// Eigenprojector `W (I + x σ_k)/2 W†` for outcome `x = ±1`.
    pub fn projector(&self, outcome: i8) -> Mat2 {
        let s = pauli(self.pauli_index).expect("validated index");
        let p = (Mat2::identity() + s * C64::from(f64::from(outcome))) * C64::from(0.5);
        self.modifier * p * self.modifier.adjoint()
    }
}

/// `p(x, y)` stored in the order `(+,+), (+,−), (−,+), (−,−)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p: [f64; 4],
}

impl JointDistribution {
    pub fn marginal_x(&self) -> [f64; 2] {
        [self.p[0] + self.p[1], self.p[2] + self.p[3]]
    }

    pub fn marginal_y(&self) -> [f64; 2] {
        [self.p[0] + self.p[2], self.p[1] + self.p[3]]
    }
}

/// Multinomial outcome counts in the same order as [`JointDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: [u64; 4],
    pub shots: u64,
}

impl ShotCounts {
    pub fn new(counts: [u64; 4]) -> Result<Self> {
        let shots = counts.iter().sum();
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(Self { counts, shots })
    }
}

/// Anything that yields normalized frequencies over the four joint outcomes.
pub trait OutcomeFrequencies {
    fn frequencies(&self) -> [f64; 4];
}

impl OutcomeFrequencies for JointDistribution {
    fn frequencies(&self) -> [f64; 4] {
        self.p
    }
}

impl OutcomeFrequencies for ShotCounts {
    fn frequencies(&self) -> [f64; 4] {
        let n = self.shots as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

/// `p(x = y) − p(x ≠ y)`.
pub fn correlation<S: OutcomeFrequencies + ?Sized>(src: &S) -> f64 {
    let f = src.frequencies();
    ((f[0] + f[3]) - (f[1] + f[2])).clamp(-1.0, 1.0)
}

/// Same-setting correlations `(C₁₁, C₂₂, C₃₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationVector(pub [f64; 3]);

impl CorrelationVector {
    pub const fn new(c11: f64, c22: f64, c33: f64) -> Self {
        Self([c11, c22, c33])
    }

    pub fn c11(&self) -> f64 {
        self.0[0]
    }

    pub fn c22(&self) -> f64 {
        self.0[1]
    }

    pub fn c33(&self) -> f64 {
        self.0[2]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn to_vector(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::from(self.0)
    }

    pub fn max_abs_diff(&self, other: &CorrelationVector) -> f64 {
        self.0
            .iter()
            .zip(other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<[f64; 3]> for CorrelationVector {
    fn from(a: [f64; 3]) -> Self {
        Self(a)
    }
}

/// How outcome statistics are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

impl Mode {
    pub fn shots(&self) -> u64 {
        match self {
            Mode::Exact => 0,
            Mode::Sampled { shots, .. } => *shots,
        }
    }
}

/// Exact joint distribution of the outcomes at X and Y.
pub fn exact_joint(s: &Scenario, obs_x: &ObservableSpec, obs_y: &ObservableSpec) -> JointDistribution {
    let proj_x = OUTCOMES.map(|x| obs_x.projector(x));
    let proj_y = OUTCOMES.map(|y| obs_y.projector(y));
    let mut p = [0.0; 4];
    match s {
        Scenario::DirectCause(ch) => {
            let u = &ch.unitary;
            let ud = u.adjoint();
            for (ix, px_proj) in proj_x.iter().enumerate() {
                let px = (px_proj * ch.input_marginal).trace().re;
                // Lüders update of a rank-one projector leaves the projector itself.
                let evolved = u * px_proj * ud;
                for (iy, py_proj) in proj_y.iter().enumerate() {
                    let py_given_x = (py_proj * evolved).trace().re;
                    p[2 * ix + iy] = (px * py_given_x).max(0.0);
                }
            }
        }
        Scenario::CommonCause(state) => {
            for (ix, px_proj) in proj_x.iter().enumerate() {
                for (iy, py_proj) in proj_y.iter().enumerate() {
                    let joint = (state.matrix() * kron(px_proj, py_proj)).trace().re;
                    p[2 * ix + iy] = joint.max(0.0);
                }
            }
        }
    }
    JointDistribution { p }
}

/// Multinomial draw of `shots` outcomes from `d`.
pub fn sample_counts_with<R: Rng + ?Sized>(d: &JointDistribution, shots: u64, rng: &mut R) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let total: f64 = d.p.iter().sum();
    let mut counts = [0u64; 4];
    let mut remaining = shots;
    let mut mass = total;
    for (slot, p) in counts.iter_mut().zip(&d.p).take(3) {
        if remaining == 0 {
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::OutOfRange(format!("binomial parameter {q}: {e}")))?
            .sample(rng);
        *slot = draw;
        remaining -= draw;
        mass -= p;
    }
    counts[3] = remaining;
    Ok(ShotCounts { counts, shots })
}

pub fn sample_counts(d: &JointDistribution, shots: u64, seed: u64) -> Result<ShotCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_counts_with(d, shots, &mut rng)
}

/// Measures the three same-index settings `(W_x σ_k W_x†, W_y σ_k W_y†)`.
///
/// In sampled mode each setting is an independent multinomial run drawn from
/// `rng`; the counts are returned alongside the correlations.
pub(crate) fn measure_settings<R: Rng + ?Sized>(
    s: &Scenario,
    wx: &Mat2,
    wy: &Mat2,
    sampling: Option<(u64, &mut R)>,
) -> Result<(CorrelationVector, Option<[ShotCounts; 3]>)> {
    let mut c = [0.0; 3];
    match sampling {
        None => {
            for (k, ck) in c.iter_mut().enumerate() {
                let d = exact_joint(s, &ObservableSpec::new(*wx, k + 1)?, &ObservableSpec::new(*wy, k + 1)?);
                *ck = correlation(&d);
            }
            Ok((CorrelationVector(c), None))
        }
        Some((shots, rng)) => {
            let mut all = [ShotCounts { counts: [0; 4], shots }; 3];
            for k in 0..3 {
                let d = exact_joint(s, &ObservableSpec::new(*wx, k + 1)?, &ObservableSpec::new(*wy, k + 1)?);
                all[k] = sample_counts_with(&d, shots, rng)?;
                c[k] = correlation(&all[k]);
            }
            Ok((CorrelationVector(c), Some(all)))
        }
    }
}

/// Correlation vector of `s` under the modifiers `(W_x, W_y)`.
pub fn pauli_vector(s: &Scenario, wx: &Mat2, wy: &Mat2, mode: Mode) -> Result<CorrelationVector> {
    match mode {
        Mode::Exact => measure_settings::<ChaCha8Rng>(s, wx, wy, None).map(|r| r.0),
        Mode::Sampled { shots, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            measure_settings(s, wx, wy, Some((shots, &mut rng))).map(|r| r.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_basis, rotation_from_unitary};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard() -> Mat2 {
        let [s1, _, s3] = pauli_basis();
        (s1 + s3) * C64::from(FRAC_1_SQRT_2)
    }

    fn id() -> Mat2 {
        Mat2::identity()
    }

    fn z_obs() -> ObservableSpec {
        ObservableSpec::pauli(3).unwrap()
    }

    #[test]
    fn identity_channel_z_statistics() {
        let s = Scenario::direct_cause(id()).unwrap();
        let d = exact_joint(&s, &z_obs(), &z_obs());
        let expected = [0.5, 0.0, 0.0, 0.5];
        for (a, b) in d.p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((correlation(&d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_plus_y_correlation() {
        // Oracle: ⟨Φ⁺|σ₂⊗σ₂|Φ⁺⟩ from the state vector directly.
        let psi = Bell::PhiPlus.vector();
        let yy = kron(&pauli(2).unwrap(), &pauli(2).unwrap());
        let direct = (psi.adjoint() * yy * psi)[(0, 0)].re;
        assert!((direct + 1.0).abs() < 1e-15);

        let s = Scenario::common_cause(Bell::PhiPlus.state());
        let y = ObservableSpec::pauli(2).unwrap();
        let d = exact_joint(&s, &y, &y);
        assert!((d.p[1] + d.p[2] - 1.0).abs() < 1e-12);
        assert!((correlation(&d) - direct).abs() < 1e-12);
    }

    #[test]
    fn hadamard_channel_is_uniform_in_z() {
        let s = Scenario::direct_cause(hadamard()).unwrap();
        let d = exact_joint(&s, &z_obs(), &z_obs());
        for p in d.p {
            assert!((p - 0.25).abs() < 1e-12);
        }
        assert!(correlation(&d).abs() < 1e-12);
    }

    #[test]
    fn sample_counts_degenerate_and_deterministic() {
        let d = JointDistribution { p: [1.0, 0.0, 0.0, 0.0] };
        let c = sample_counts(&d, 100, 7).unwrap();
        assert_eq!(c.counts, [100, 0, 0, 0]);

        let u = JointDistribution { p: [0.25; 4] };
        assert_eq!(sample_counts(&u, 4000, 3).unwrap(), sample_counts(&u, 4000, 3).unwrap());
        assert!(matches!(sample_counts(&u, 0, 3), Err(Error::ZeroShots)));
    }

    #[test]
    fn sample_counts_uniform_within_tail_bound() {
        // Bin(4000, 1/4): mean 1000, sd ≈ 27.4; [800, 1200] is beyond 7 sd.
        let u = JointDistribution { p: [0.25; 4] };
        for seed in 0..200 {
            let c = sample_counts(&u, 4000, seed).unwrap();
            assert_eq!(c.counts.iter().sum::<u64>(), 4000);
            assert!(c.counts.iter().all(|&n| (800..=1200).contains(&n)), "{c:?}");
        }
    }

    #[test]
    fn correlation_from_counts() {
        let c = ShotCounts::new([30, 10, 10, 50]).unwrap();
        assert!((correlation(&c) - 0.6).abs() < 1e-15);
        assert!(correlation(&JointDistribution { p: [0.25; 4] }).abs() < 1e-15);
        assert!(ShotCounts::new([0; 4]).is_err());
    }

    #[test]
    fn pauli_vector_examples() {
        let s3 = pauli(3).unwrap();
        let p = pauli_vector(&Scenario::direct_cause(s3).unwrap(), &id(), &id(), Mode::Exact).unwrap();
        assert!(p.max_abs_diff(&CorrelationVector::new(-1.0, -1.0, 1.0)) < 1e-12);

        let p = pauli_vector(&Scenario::direct_cause(id()).unwrap(), &id(), &id(), Mode::Exact).unwrap();
        assert!(p.max_abs_diff(&CorrelationVector::new(1.0, 1.0, 1.0)) < 1e-12);

        let p = pauli_vector(&Scenario::common_cause(Bell::PhiPlus.state()), &id(), &id(), Mode::Exact).unwrap();
        assert!(p.max_abs_diff(&CorrelationVector::new(1.0, -1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn dc_closed_form_matches_rotation_diagonal() {
        let u = hadamard();
        let p = pauli_vector(&Scenario::direct_cause(u).unwrap(), &id(), &id(), Mode::Exact).unwrap();
        let diag = rotation_from_unitary(&u).unwrap().diagonal();
        assert!(p.max_abs_diff(&CorrelationVector(diag)) < 1e-12);
    }

    #[test]
    fn bell_correlation_matrices() {
        let expected = [[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]];
        for (b, e) in Bell::ALL.iter().zip(expected) {
            let t = b.state().correlation_matrix();
            let diag = Matrix3::from_diagonal(&nalgebra::Vector3::from(e));
            assert!((t - diag).amax() < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(bell_diagonal([0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(bell_diagonal([1.2, -0.2, 0.0, 0.0]).is_err());
        let mut m = Mat4::identity() * C64::from(0.25);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(TwoQubitState::new(m).is_err());
        let neg = Mat4::from_diagonal(&Vector4::new(1.5, -0.5, 0.0, 0.0).map(C64::from));
        assert!(TwoQubitState::new(neg).is_err());
        assert!(Scenario::direct_cause(Mat2::identity() * C64::from(2.0)).is_err());
        assert!(ObservableSpec::pauli(0).is_err());
    }

    #[test]
    fn mode_json_shape() {
        let m: Mode = serde_json::from_str(r#"{"sampled":{"shots":10,"seed":1}}"#).unwrap();
        assert_eq!(m, Mode::Sampled { shots: 10, seed: 1 });
        assert_eq!(serde_json::to_string(&Mode::Exact).unwrap(), r#""exact""#);
    }
}
