//! Sweeps, ensemble benchmarks and brute-force geometry checks.

mod bootstrap;
mod output;

pub use bootstrap::{bootstrap_errorbars, BootstrapStd, DEFAULT_RESAMPLES};
pub use output::{write_csv, write_json, SWEEP_SCHEMA};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::comb::{make_oracle, pauli_vector, Bell, CorrelationVector, Mechanism, Mode, Scenario, ShotCounts};
use crate::error::{Error, Result};
use crate::geometry::{distance, membership_violation, Polytope, DC_VERTICES, EXACT_TOLERANCE, SIGMA3_POINT};
use crate::identify::{identify, AlgoConfig, ClassificationResult};
use crate::linalg::{pauli, Mat2};
use crate::scenarios::{
    edge_cc, edge_dc, haar_unitary_with, plane_cc, plane_dc_matching, random_state_with, simplex_lattice, StateKind,
};

/// Independent 64-bit seed for item `index` of a run seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Edge,
    Plane,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Edge => "edge",
            Family::Plane => "plane",
        }
    }
}

/// Grid over a scenario family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// `points` equally spaced values of `a` in `[0, 1]`.
    Edge { points: usize },
    /// Barycentric lattice on the common-cause face with the given denominator.
    Plane { denominator: u32 },
}

impl Grid {
    pub fn family(&self) -> Family {
        match self {
            Grid::Edge { .. } => Family::Edge,
            Grid::Plane { .. } => Family::Plane,
        }
    }

    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Edge => Grid::Edge { points: 101 },
            Family::Plane => Grid::Plane { denominator: 10 },
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Grid::Edge { points } if points < 2 => Err(Error::OutOfRange(format!("edge grid needs ≥ 2 points, got {points}"))),
            Grid::Plane { denominator: 0 } => Err(Error::OutOfRange("plane lattice denominator must be ≥ 1".into())),
            _ => Ok(()),
        }
    }

    /// Scenario realizations per grid point, in grid order.
    fn points(&self) -> Result<Vec<(String, Vec<Scenario>)>> {
        self.validate()?;
        match *self {
            Grid::Edge { points } => (0..points)
                .map(|i| {
                    let a = i as f64 / (points - 1) as f64;
                    Ok((format!("{a}"), vec![edge_dc(a)?, edge_cc(a)?]))
                })
                .collect(),
            Grid::Plane { denominator } => simplex_lattice(denominator)
                .into_iter()
                .map(|w| {
                    let cc = plane_cc(w)?;
                    let p = pauli_vector(&cc, &Mat2::identity(), &Mat2::identity(), Mode::Exact)?;
                    let mut realizations = Vec::with_capacity(2);
                    realizations.extend(plane_dc_matching(p.0));
                    realizations.push(cc);
                    Ok((format!("{};{};{}", w[0], w[1], w[2]), realizations))
                })
                .collect(),
        }
    }
}

/// One row of a sweep: one mechanism at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub family: Family,
    pub param: String,
    pub mechanism: Mechanism,
    pub round0: CorrelationVector,
    pub rounds_used: u8,
    pub criterion: f64,
    pub distance: Option<f64>,
    pub verdict: Mechanism,
    pub shots: u64,
    pub std_criterion: Option<f64>,
    pub std_distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub mode: Mode,
    pub config: AlgoConfig,
    pub resamples: usize,
}

fn counts_at(result: &ClassificationResult, idx: usize) -> Option<[ShotCounts; 3]> {
    result.trail.get(idx).and_then(|e| e.observation.counts)
}

fn record_for(family: Family, param: &str, index: u64, scenario: Scenario, opts: &SweepOptions) -> Result<SweepRecord> {
    let mechanism = scenario.mechanism();
    let mode = match opts.mode {
        Mode::Exact => Mode::Exact,
        Mode::Sampled { shots, seed } => Mode::Sampled {
            shots,
            seed: derive_seed(seed, index),
        },
    };
    let oracle = make_oracle(scenario, mode);
    let result = identify(&oracle, &opts.config)?;

    let (mut std_criterion, mut std_distance) = (None, None);
    if let Mode::Sampled { seed, .. } = mode {
        if let Some(counts) = counts_at(&result, result.round1_best) {
            let b = bootstrap_errorbars(&counts, opts.resamples, seed, |c| vec![1.0 - c[2]])?;
            std_criterion = Some(b.derived[0]);
        }
        if let Some(counts) = result.round2_best.and_then(|i| counts_at(&result, i)) {
            let b = bootstrap_errorbars(&counts, opts.resamples, seed ^ 1, |c| {
                vec![distance(&CorrelationVector::new(c[0], c[1], c[2]), &SIGMA3_POINT)]
            })?;
            std_distance = Some(b.derived[0]);
        }
    }

    Ok(SweepRecord {
        family,
        param: param.to_string(),
        mechanism,
        round0: result.round0,
        rounds_used: result.rounds_used,
        criterion: result.round1_criterion,
        distance: result.round2_distance,
        verdict: result.verdict,
        shots: mode.shots(),
        std_criterion,
        std_distance,
    })
}

/// Runs identification on every realization of every grid point.
///
/// Rows come out in grid order, DC before CC within a point, independent of
/// thread scheduling.
pub fn run_sweep(grid: Grid, opts: &SweepOptions) -> Result<Vec<SweepRecord>> {
    opts.config.validate()?;
    let family = grid.family();
    let jobs: Vec<(String, Scenario)> = grid
        .points()?
        .into_iter()
        .flat_map(|(param, scenarios)| scenarios.into_iter().map(move |s| (param.clone(), s)))
        .collect();
    jobs.into_par_iter()
        .enumerate()
        .map(|(i, (param, s))| record_for(family, &param, i as u64, s, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MechanismSummary {
    pub rows: usize,
    pub correct: usize,
    pub second_round: usize,
    pub max_criterion: Option<f64>,
    pub min_criterion: Option<f64>,
    pub max_distance: Option<f64>,
    pub min_distance: Option<f64>,
}

fn fold_opt(acc: Option<f64>, v: f64, f: fn(f64, f64) -> f64) -> Option<f64> {
    Some(acc.map_or(v, |a| f(a, v)))
}

impl MechanismSummary {
    fn add(&mut self, r: &SweepRecord) {
        self.rows += 1;
        self.correct += usize::from(r.verdict == r.mechanism);
        self.max_criterion = fold_opt(self.max_criterion, r.criterion, f64::max);
        self.min_criterion = fold_opt(self.min_criterion, r.criterion, f64::min);
        if let Some(d) = r.distance {
            self.second_round += 1;
            self.max_distance = fold_opt(self.max_distance, d, f64::max);
            self.min_distance = fold_opt(self.min_distance, d, f64::min);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub family: Family,
    pub points: usize,
    pub shots: u64,
    pub config: AlgoConfig,
    pub direct_cause: MechanismSummary,
    pub common_cause: MechanismSummary,
}

pub fn summarize(family: Family, records: &[SweepRecord], opts: &SweepOptions) -> SweepSummary {
    let mut dc = MechanismSummary::default();
    let mut cc = MechanismSummary::default();
    let mut params: Vec<&str> = records.iter().map(|r| r.param.as_str()).collect();
    params.dedup();
    for r in records {
        match r.mechanism {
            Mechanism::DirectCause => dc.add(r),
            Mechanism::CommonCause => cc.add(r),
        }
    }
    SweepSummary {
        family,
        points: params.len(),
        shots: opts.mode.shots(),
        config: opts.config,
        direct_cause: dc,
        common_cause: cc,
    }
}

/// Rows are the true mechanism, columns the verdict.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub dc_as_dc: u64,
    pub dc_as_cc: u64,
    pub cc_as_dc: u64,
    pub cc_as_cc: u64,
    /// Scenarios whose exact-mode decision margin fell below the exclusion
    /// threshold; not counted above.
    pub excluded: u64,
    /// Misclassified scenarios among the excluded ones.
    pub excluded_errors: u64,
}

impl ConfusionMatrix {
    pub fn counted(&self) -> u64 {
        self.dc_as_dc + self.dc_as_cc + self.cc_as_dc + self.cc_as_cc
    }

    pub fn total(&self) -> u64 {
        self.counted() + self.excluded
    }

    pub fn errors(&self) -> u64 {
        self.dc_as_cc + self.cc_as_dc
    }

    /// Fraction of counted scenarios classified correctly (1 when none counted).
    pub fn accuracy(&self) -> f64 {
        match self.counted() {
            0 => 1.0,
            n => (n - self.errors()) as f64 / n as f64,
        }
    }

    fn tally(&mut self, truth: Mechanism, verdict: Mechanism, excluded: bool) {
        if excluded {
            self.excluded += 1;
            self.excluded_errors += u64::from(truth != verdict);
            return;
        }
        match (truth, verdict) {
            (Mechanism::DirectCause, Mechanism::DirectCause) => self.dc_as_dc += 1,
            (Mechanism::DirectCause, Mechanism::CommonCause) => self.dc_as_cc += 1,
            (Mechanism::CommonCause, Mechanism::DirectCause) => self.cc_as_dc += 1,
            (Mechanism::CommonCause, Mechanism::CommonCause) => self.cc_as_cc += 1,
        }
    }
}

/// The `i`-th scenario of a random ensemble of size `n`: the first `n/2` are
/// Haar channels, the rest Hilbert–Schmidt states alternating pure and mixed.
pub fn ensemble_scenario(n: usize, i: usize, seed: u64) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
    if i < n / 2 {
        Scenario::direct_cause(haar_unitary_with(&mut rng))
    } else {
        let kind = if (i - n / 2).is_multiple_of(2) {
            StateKind::Pure
        } else {
            StateKind::Mixed
        };
        Ok(Scenario::common_cause(random_state_with(kind, &mut rng)))
    }
}

/// Classifies a random ensemble of `n` scenarios.
///
/// Every scenario is first run in exact mode to get its decision margin;
/// those with margin below `eta` are tallied under `excluded`.
pub fn random_bench(n: usize, mode: Mode, eta: f64, seed: u64, cfg: &AlgoConfig) -> Result<ConfusionMatrix> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::OutOfRange("ensemble size must be ≥ 1".into()));
    }
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::OutOfRange(format!("margin threshold must be ≥ 0, got {eta}")));
    }
    let outcomes: Vec<(Mechanism, Mechanism, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let scenario = ensemble_scenario(n, i, seed)?;
            let truth = scenario.mechanism();
            let exact = identify(&make_oracle(scenario.clone(), Mode::Exact), cfg)?;
            let excluded = exact.decision_margin(cfg) < eta;
            let verdict = match mode {
                Mode::Exact => exact.verdict,
                Mode::Sampled { shots, seed: s } => {
                    let sampled = Mode::Sampled {
                        shots,
                        seed: derive_seed(s ^ 0x5eed, i as u64),
                    };
                    identify(&make_oracle(scenario, sampled), cfg)?.verdict
                }
            };
            Ok((truth, verdict, excluded))
        })
        .collect::<Result<_>>()?;
    let mut m = ConfusionMatrix::default();
    for (truth, verdict, excluded) in outcomes {
        m.tally(truth, verdict, excluded);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolytopeCheck {
    pub samples: usize,
    pub violations: usize,
    /// Most negative barycentric weight seen (0 if none).
    pub worst_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TetraReport {
    pub tolerance: f64,
    pub direct_cause: PolytopeCheck,
    pub common_cause: PolytopeCheck,
    pub pauli_points: Vec<CorrelationVector>,
    pub bell_points: Vec<CorrelationVector>,
    /// Pauli channels land on the channel vertices and Bell states on the
    /// state vertices (each within 1e-9, in vertex order).
    pub vertices_ok: bool,
}

impl TetraReport {
    pub fn passed(&self) -> bool {
        self.vertices_ok && self.direct_cause.violations == 0 && self.common_cause.violations == 0
    }
}

fn check_points<F>(samples: usize, seed: u64, polytope: &Polytope, tol: f64, draw: F) -> Result<PolytopeCheck>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Scenario> + Sync,
{
    let worst: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let s = draw(&mut rng)?;
            let p = pauli_vector(&s, &Mat2::identity(), &Mat2::identity(), Mode::Exact)?;
            Ok(membership_violation(&p, polytope))
        })
        .collect::<Result<_>>()?;
    Ok(PolytopeCheck {
        samples,
        violations: worst.iter().filter(|w| **w < -tol).count(),
        worst_violation: worst.into_iter().fold(0.0, f64::min),
    })
}

/// Samples Haar channels and Hilbert–Schmidt states and checks that each
/// lands in its mechanism's tetrahedron at the exact-mode tolerance.
pub fn tetra_check(samples: usize, seed: u64) -> Result<TetraReport> {
    if samples == 0 {
        return Err(Error::OutOfRange("need at least one sample".into()));
    }
    let tol = EXACT_TOLERANCE;
    let dc_seed = derive_seed(seed, 0);
    let cc_seed = derive_seed(seed, 1);
    let direct_cause = check_points(samples, dc_seed, &Polytope::direct_cause(), tol, |rng| {
        Scenario::direct_cause(haar_unitary_with(rng))
    })?;
    let common_cause = check_points(samples, cc_seed, &Polytope::common_cause(), tol, |rng| {
        let kind = if rng.random::<bool>() {
            StateKind::Pure
        } else {
            StateKind::Mixed
        };
        Ok(Scenario::common_cause(random_state_with(kind, rng)))
    })?;

    let id = Mat2::identity();
    let pauli_points = std::iter::once(Ok(id))
        .chain((1..=3).map(pauli))
        .map(|u| pauli_vector(&Scenario::direct_cause(u?)?, &id, &id, Mode::Exact))
        .collect::<Result<Vec<_>>>()?;
    let bell_points = Bell::ALL
        .into_iter()
        .map(|b| pauli_vector(&Scenario::common_cause(b.state()), &id, &id, Mode::Exact))
        .collect::<Result<Vec<_>>>()?;
    let matches = |pts: &[CorrelationVector], verts: &[CorrelationVector]| {
        pts.iter().zip(verts).all(|(p, v)| p.max_abs_diff(v) < 1e-9)
    };
    let vertices_ok = matches(&pauli_points, &DC_VERTICES) && matches(&bell_points, &crate::geometry::CC_VERTICES);

    Ok(TetraReport {
        tolerance: tol,
        direct_cause,
        common_cause,
        pauli_points,
        bell_points,
        vertices_ok,
    })
}
