use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qcausal::comb::{pauli_vector, CorrelationVector, Mode, Scenario};
use qcausal::geometry::{
    classify_region, member, plane_gap, Polytope, RegionLabel, CC_VERTICES, EXACT_TOLERANCE,
};
use qcausal::linalg::{axis_angle_from_rotation, rotation_from_unitary, Mat2};
use qcausal::scenarios::{haar_unitary_with, random_state_with, StateKind};

fn round0(s: &Scenario) -> CorrelationVector {
    pauli_vector(s, &Mat2::identity(), &Mat2::identity(), Mode::Exact).unwrap()
}

#[test]
fn random_channels_and_states_stay_in_their_tetrahedra() {
    let dc = Polytope::direct_cause();
    let cc = Polytope::common_cause();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..10_000 {
        let u = haar_unitary_with(&mut rng);
        let p = round0(&Scenario::direct_cause(u).unwrap());
        assert!(member(&p, &dc, EXACT_TOLERANCE), "channel {i}: {p:?}");

        let kind = if i % 2 == 0 { StateKind::Pure } else { StateKind::Mixed };
        let p = round0(&Scenario::common_cause(random_state_with(kind, &mut rng)));
        assert!(member(&p, &cc, EXACT_TOLERANCE), "state {i}: {p:?}");
    }
}

#[test]
fn overlap_is_the_octahedron() {
    let n = 41;
    let step = 2.0 / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = CorrelationVector::new(-1.0 + i as f64 * step, -1.0 + j as f64 * step, -1.0 + k as f64 * step);
                let l1: f64 = p.0.iter().map(|c| c.abs()).sum();
                let both = classify_region(&p, EXACT_TOLERANCE) == RegionLabel::Overlap;
                assert_eq!(both, l1 <= 1.0 + 1e-9, "{p:?}");
            }
        }
    }
}

#[test]
fn plane_holds_one_state_face() {
    let on: Vec<_> = CC_VERTICES.iter().filter(|v| plane_gap(v).abs() < 1e-12).collect();
    assert_eq!(on.len(), 3);
    assert!(on.iter().all(|v| v.0.iter().filter(|c| **c < 0.0).count() == 1));
}

#[test]
fn haar_rotation_angles_follow_the_haar_density() {
    // The rotation angle of a Haar unitary has density (1 − cos θ)/π on [0, π],
    // i.e. CDF (θ − sin θ)/π.
    let bins = 20;
    let samples = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut counts = vec![0usize; bins];
    for _ in 0..samples {
        let theta = axis_angle_from_rotation(&rotation_from_unitary(&haar_unitary_with(&mut rng)).unwrap()).angle;
        let b = ((theta / std::f64::consts::PI) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let cdf = |t: f64| (t - t.sin()) / std::f64::consts::PI;
    let stat: f64 = (0..bins)
        .map(|b| {
            let lo = b as f64 / bins as f64 * std::f64::consts::PI;
            let hi = (b + 1) as f64 / bins as f64 * std::f64::consts::PI;
            let expected = samples as f64 * (cdf(hi) - cdf(lo));
            (counts[b] as f64 - expected).powi(2) / expected
        })
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.01, "χ² = {stat:.2}, p = {p:.4}");
}
