use std::sync::Arc;

use kscal::catalog::{
    constant_hsc_tensor, potential_to_curvature, random_perturbation, NamedPotential, PotentialChart, DEFAULT_FD_STEP,
};
use kscal::cli::{cmd_certify, cmd_scan, RunConfig};
use kscal::linalg::{CVector, C64};
use kscal::{minimize_sk, CurvatureTensor, MinimizeOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_gap(a: &CurvatureTensor, b: &CurvatureTensor) -> f64 {
    (a - b).max_abs()
}

fn fubini_study(m: usize, point: Vec<C64>, step: f64) -> CurvatureTensor {
    let chart = PotentialChart::new(m, NamedPotential::FubiniStudy.build(m), point).with_step(step);
    potential_to_curvature(&chart).unwrap().tensor
}

#[test]
fn fubini_study_potential_has_constant_holomorphic_curvature_two() {
    for m in 1..=3 {
        let origin = vec![C64::new(0.0, 0.0); m];
        let gap = max_gap(&fubini_study(m, origin, DEFAULT_FD_STEP), &constant_hsc_tensor(m, 2.0));
        assert!(gap < 1e-8, "m={m}: {gap:e}");
        // homogeneous: the same tensor in every unitary frame at every point
        let point: Vec<C64> = (0..m).map(|i| C64::new(0.3 - 0.1 * i as f64, 0.2 * i as f64 - 0.15)).collect();
        let gap = max_gap(&fubini_study(m, point, DEFAULT_FD_STEP), &constant_hsc_tensor(m, 2.0));
        assert!(gap < 1e-6, "m={m}: {gap:e}");
    }
}

#[test]
fn fitted_space_form_constant_at_origin() {
    // least-squares c* against the unit space form, then the residual
    let r = fubini_study(2, vec![C64::new(0.0, 0.0); 2], DEFAULT_FD_STEP);
    let unit = constant_hsc_tensor(2, 1.0);
    let dot = |a: &CurvatureTensor, b: &CurvatureTensor| -> f64 {
        a.components().as_slice().iter().zip(b.components().as_slice()).map(|(x, y)| (x * y.conj()).re).sum()
    };
    let c = dot(&r, &unit) / dot(&unit, &unit);
    assert!((c - 2.0).abs() < 1e-9, "{c}");
    assert!(max_gap(&r, &constant_hsc_tensor(2, c)) < 1e-6);
}

#[test]
fn quartic_potential_curvature_is_minus_its_fourth_derivative() {
    // φ = |z|² + P(z, z̄, z, z̄): g = I and ∂g = 0 at 0, and
    // ∂_i∂_j̄∂_k∂_l̄ P = 4 P_ijkl for Kähler-symmetric P
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = random_perturbation(3, &mut rng);
    let quartic = p.clone();
    let phi = Arc::new(move |z: &[C64]| {
        let x = CVector::from_column_slice(z);
        z.iter().map(|w| w.norm_sqr()).sum::<f64>() + 0.05 * quartic.quartic(&x)
    });
    let expected = &p * (-0.2);
    for step in [DEFAULT_FD_STEP, 2.0 * DEFAULT_FD_STEP] {
        let chart = PotentialChart::at_origin(3, phi.clone()).with_step(step);
        let out = potential_to_curvature(&chart).unwrap();
        assert!(max_gap(&out.tensor, &expected) < 1e-6, "h={step}");
        assert!(out.tensor.validate_with_tol(1e-6).is_empty());
    }
}

#[test]
fn minimizer_of_fubini_study_potential_matches_space_form() {
    let chart = PotentialChart::at_origin(3, NamedPotential::FubiniStudy.build(3));
    let r = potential_to_curvature(&chart).unwrap().tensor;
    for k in 1..=3 {
        let cp = minimize_sk(&r, k, &MinimizeOptions::default()).unwrap();
        let expected = (k * (k + 1)) as f64;
        assert!((cp.value - expected).abs() < 1e-6, "k={k}: {}", cp.value);
    }
}

#[test]
fn custom_potential_closure_is_accepted() {
    // |z|² + ε|z₁|⁴ has curvature -4ε at the origin along e₁
    let eps = 0.1;
    let phi = Arc::new(move |z: &[C64]| {
        let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        r2 + eps * z[0].norm_sqr().powi(2)
    });
    let r = potential_to_curvature(&PotentialChart::at_origin(2, phi)).unwrap().tensor;
    assert!((r.get(0, 0, 0, 0).re + 4.0 * eps).abs() < 1e-7);
    assert!(r.get(1, 1, 1, 1).norm() < 1e-7);
}

#[test]
fn perturbed_potential_certifies_and_scans_several_points() {
    let cfg = r#"{
        "model": {"kind": "potential", "m": 3,
                  "potential": {"name": "perturbed_fubini_study", "epsilon": 0.02, "seed": 5}},
        "k": [2], "seed": 2,
        "samples": {"planes": 32, "points": 3, "probes": 40, "restarts": 2}
    }"#;
    let run = RunConfig::from_json(cfg).unwrap().resolve().unwrap();
    let certify = cmd_certify(&run).unwrap();
    assert!(certify.body.all_passed, "{:#?}", certify.body.errors);
    let scan = cmd_scan(&run).unwrap();
    let entry = &scan.body.scans[0];
    assert_eq!(entry.scan.point_samples, 3);
    let values = |p: u64| entry.scan.samples.iter().filter(|s| s.point == p).map(|s| s.value).collect::<Vec<_>>();
    assert_ne!(values(0), values(1));
    assert!(entry.checks.iter().all(|c| c.pass));
}
