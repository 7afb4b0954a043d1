//! Observational identification of the mechanism behind a correlation.
//!
//! Round 0 measures the plain Pauli correlations `P`. Under the direct-cause
//! hypothesis `P` is the diagonal of the channel's rotation matrix,
//! `R_kk = cosθ + n_k²(1 − cosθ)`, which fixes `cosθ` and the axis up to
//! component signs. Round 1 rotates both measurement frames so each candidate
//! axis becomes the zenith; a channel then preserves the `σ₃` eigenstates and
//! `C₃₃ᵛ = 1`. A common cause can only mimic this on the exceptional plane
//! `Σ C_kk = 1`, so when `P` is within `δ` of that plane round 2 decides
//! instead: inside the aligned frame Y's axes are flipped by `σ₁`
//! (Y measures with `V σ₁` where X uses `V`), which turns any channel into an
//! effective π rotation with `C₃₃ = −1`. Re-aligning that axis puts a channel
//! on `P(σ₃) = (−1, −1, 1)`.

use nalgebra::Vector3;
use serde::{Serialize, Serializer};

use crate::comb::{CorrelationVector, MatrixEntries, MeasurementOracle, Mechanism, Observation};
use crate::error::{Error, Result};
use crate::geometry::{distance, plane_gap, SIGMA3_POINT};
use crate::linalg::{pauli, unitary_from_axis_angle, AxisAngle, BlochVector, Mat2};

/// `cosθ` at or above `1 − IDENTITY_SLACK` is treated as the identity channel.
const IDENTITY_SLACK: f64 = 1e-9;

/// Squared axis components below this are treated as zero when enumerating signs.
const ZERO_COMPONENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct AlgoConfig {
    /// Round-1 cutoff on `1 − C₃₃ᵛ`.
    pub epsilon: f64,
    /// Width of the band around the exceptional plane that triggers round 2.
    pub delta: f64,
    /// Round-2 cutoff on the distance to `P(σ₃)`.
    pub epsilon_prime: f64,
    pub max_rounds: u32,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.075,
            delta: 0.15,
            epsilon_prime: 1.0 / 3f64.sqrt(),
            max_rounds: 2,
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("epsilon_prime", self.epsilon_prime),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rotation-axis hypotheses reconstructed from a round-0 correlation vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisCandidates {
    pub cos_theta: f64,
    /// One representative per sign class, modulo global sign.
    pub axes: Vec<BlochVector>,
}

/// Inverts `C_kk = cosθ + n_k²(1 − cosθ)` for `cosθ` and `|n_k|`, then
/// enumerates the sign patterns of the non-zero components.
pub fn axis_candidates(p: &CorrelationVector) -> AxisCandidates {
    let cos_theta = ((p.sum() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let single = |axis| AxisCandidates {
        cos_theta,
        axes: vec![axis],
    };
    if cos_theta >= 1.0 - IDENTITY_SLACK {
        return single(BlochVector::Z);
    }

    let denom = 1.0 - cos_theta;
    let mut sq = p.0.map(|c| ((c - cos_theta) / denom).clamp(0.0, 1.0));
    for s in sq.iter_mut() {
        if *s < ZERO_COMPONENT {
            *s = 0.0;
        }
    }
    let total: f64 = sq.iter().sum();
    if total <= 0.0 {
        return single(BlochVector::Z);
    }
    let magnitude = sq.map(|s| (s / total).sqrt());

    let nonzero: Vec<usize> = (0..3).filter(|&k| magnitude[k] > 0.0).collect();
    let free = nonzero.len() - 1;
    let axes = (0..1u32 << free)
        .map(|pattern| {
            let mut n = Vector3::from(magnitude);
            // The leading non-zero component stays positive.
            for (bit, &k) in nonzero[1..].iter().enumerate() {
                if pattern & (1 << bit) != 0 {
                    n[k] = -n[k];
                }
            }
            BlochVector::normalized(n).expect("non-zero by construction")
        })
        .collect();
    AxisCandidates { cos_theta, axes }
}

/// Unitary `V` with `V σ₃ V† = n·σ`: the rotation carrying `ẑ` onto `n`
/// about `ẑ × n`.
pub fn modifier_from_axis(n: &BlochVector) -> Mat2 {
    let v = n.vector();
    let k = Vector3::z().cross(v);
    let s = k.norm();
    if s < 1e-12 {
        if v.z > 0.0 {
            return Mat2::identity();
        }
        let flip = AxisAngle::new(BlochVector::X, std::f64::consts::PI).expect("π is in range");
        return unitary_from_axis_angle(&flip);
    }
    let axis = BlochVector::normalized(k).expect("non-zero cross product");
    let angle = v.z.clamp(-1.0, 1.0).acos();
    unitary_from_axis_angle(&AxisAngle { axis, angle })
}

fn serialize_mat2<S: Serializer>(m: &Mat2, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixEntries::from_mat2(m).serialize(s)
}

fn serialize_opt_mat2<S: Serializer>(m: &Option<Mat2>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(MatrixEntries::from_mat2).serialize(s)
}

/// One oracle query made during identification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrailEntry {
    pub round: u8,
    #[serde(serialize_with = "serialize_mat2")]
    pub wx: Mat2,
    #[serde(serialize_with = "serialize_mat2")]
    pub wy: Mat2,
    #[serde(flatten)]
    pub observation: Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub verdict: Mechanism,
    pub rounds_used: u8,
    /// The criterion that decided the verdict: `1 − C₃₃ᵛ` after round 1,
    /// distance to `P(σ₃)` after round 2.
    pub criterion_value: f64,
    #[serde(serialize_with = "serialize_opt_mat2")]
    pub winning_modifier: Option<Mat2>,
    pub round0: CorrelationVector,
    pub plane_gap: f64,
    /// Smallest `1 − C₃₃ᵛ` over the round-1 candidates.
    pub round1_criterion: f64,
    /// Index into `trail` of the query achieving `round1_criterion`.
    pub round1_best: usize,
    pub round2_distance: Option<f64>,
    pub round2_best: Option<usize>,
    pub trail: Vec<TrailEntry>,
    pub query_count: u64,
}

impl ClassificationResult {
    /// Distance of the run from its nearest decision boundary: the deciding
    /// criterion against its cutoff, and `|plane_gap|` against `δ`.
    pub fn decision_margin(&self, cfg: &AlgoConfig) -> f64 {
        let criterion = match self.rounds_used {
            1 => (self.criterion_value - cfg.epsilon).abs(),
            _ => (self.criterion_value - cfg.epsilon_prime).abs(),
        };
        if cfg.max_rounds >= 2 {
            criterion.min((self.plane_gap.abs() - cfg.delta).abs())
        } else {
            criterion
        }
    }
}

struct Recorder<'a, O: MeasurementOracle + ?Sized> {
    oracle: &'a O,
    trail: Vec<TrailEntry>,
}

impl<O: MeasurementOracle + ?Sized> Recorder<'_, O> {
    fn ask(&mut self, round: u8, wx: Mat2, wy: Mat2) -> Result<(usize, CorrelationVector)> {
        let observation = self.oracle.query(&wx, &wy)?;
        let p = observation.correlations;
        self.trail.push(TrailEntry {
            round,
            wx,
            wy,
            observation,
        });
        Ok((self.trail.len() - 1, p))
    }
}

/// Outcome of the exceptional-plane round.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondRound {
    pub verdict: Mechanism,
    /// Smallest distance to `P(σ₃)` over all candidate pairs.
    pub distance: f64,
    /// `V₁·V₂` achieving `distance`; Y was measured with `V₁·σ₁·V₂`.
    pub modifier: Mat2,
    pub trail: Vec<TrailEntry>,
    best: usize,
}

/// For each first-round modifier `V₁`, measures `P′` under `(V₁, V₁σ₁)`,
/// derives candidates `V₂` from `P′`, and measures under
/// `(V₁V₂, V₁σ₁V₂)`. A channel is declared when some final vector lies within
/// `ε′` of `P(σ₃)`.
pub fn second_round<O: MeasurementOracle + ?Sized>(oracle: &O, first: &[Mat2], cfg: &AlgoConfig) -> Result<SecondRound> {
    cfg.validate()?;
    let mut rec = Recorder {
        oracle,
        trail: Vec::new(),
    };
    run_second_round(&mut rec, first, cfg)
}

fn run_second_round<O: MeasurementOracle + ?Sized>(
    rec: &mut Recorder<'_, O>,
    first: &[Mat2],
    cfg: &AlgoConfig,
) -> Result<SecondRound> {
    if first.is_empty() {
        return Err(Error::Config("second round needs at least one modifier".into()));
    }
    let sigma1 = pauli(1)?;
    let start = rec.trail.len();
    let mut best: Option<(f64, usize, Mat2)> = None;
    for v1 in first {
        let flipped = v1 * sigma1;
        let (_, p_flip) = rec.ask(2, *v1, flipped)?;
        for m in axis_candidates(&p_flip).axes {
            let v2 = modifier_from_axis(&m);
            let composed = v1 * v2;
            let (idx, p_final) = rec.ask(2, composed, flipped * v2)?;
            let d = distance(&p_final, &SIGMA3_POINT);
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, idx, composed));
            }
        }
    }
    let (d, idx, modifier) = best.expect("at least one candidate per modifier");
    let verdict = if d < cfg.epsilon_prime {
        Mechanism::DirectCause
    } else {
        Mechanism::CommonCause
    };
    Ok(SecondRound {
        verdict,
        distance: d,
        modifier,
        trail: rec.trail[start..].to_vec(),
        best: idx,
    })
}

/// Runs the full identification against `oracle`.
pub fn identify<O: MeasurementOracle + ?Sized>(oracle: &O, cfg: &AlgoConfig) -> Result<ClassificationResult> {
    cfg.validate()?;
    let mut rec = Recorder {
        oracle,
        trail: Vec::new(),
    };
    let id = Mat2::identity();
    let (_, p0) = rec.ask(0, id, id)?;
    let gap = plane_gap(&p0);
    let modifiers: Vec<Mat2> = axis_candidates(&p0).axes.iter().map(modifier_from_axis).collect();

    let mut round1: Option<(f64, usize, Mat2)> = None;
    for v in &modifiers {
        let (idx, pv) = rec.ask(1, *v, *v)?;
        let crit = 1.0 - pv.c33();
        if round1.is_none_or(|(bc, _, _)| crit < bc) {
            round1 = Some((crit, idx, *v));
        }
    }
    let (round1_criterion, round1_best, round1_modifier) = round1.expect("at least one candidate");

    let near_plane = cfg.max_rounds >= 2 && gap.abs() < cfg.delta;
    if !near_plane {
        let verdict = if round1_criterion < cfg.epsilon {
            Mechanism::DirectCause
        } else {
            Mechanism::CommonCause
        };
        let query_count = rec.trail.len() as u64;
        return Ok(ClassificationResult {
            verdict,
            rounds_used: 1,
            criterion_value: round1_criterion,
            winning_modifier: (verdict == Mechanism::DirectCause).then_some(round1_modifier),
            round0: p0,
            plane_gap: gap,
            round1_criterion,
            round1_best,
            round2_distance: None,
            round2_best: None,
            trail: rec.trail,
            query_count,
        });
    }

    let second = run_second_round(&mut rec, &modifiers, cfg)?;
    let query_count = rec.trail.len() as u64;
    Ok(ClassificationResult {
        verdict: second.verdict,
        rounds_used: 2,
        criterion_value: second.distance,
        winning_modifier: (second.verdict == Mechanism::DirectCause).then_some(second.modifier),
        round0: p0,
        plane_gap: gap,
        round1_criterion,
        round1_best,
        round2_distance: Some(second.distance),
        round2_best: Some(second.best),
        trail: rec.trail,
        query_count,
    })
}
