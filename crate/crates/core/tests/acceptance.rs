//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Lines prefixed INFO are diagnostics and never gate.

use std::time::Instant;

use kscal::catalog::{constant_hsc_tensor, perturbed_constant_hsc, product_tensor, random_kahler_tensor};
use kscal::certify::{
    check_k_plane_bounds, check_two_plane_bounds, skew_normal_form, vanishing_certificate, Check, ProbeOptions, Sign,
    VanishingOptions,
};
use kscal::cli::{cmd_certify, RunConfig};
use kscal::grassmann::{first_variation, second_variation, MinimizeOptions};
use kscal::linalg::{self, CMatrix};
use kscal::moments::{average_quartic_form, mc_average};
use kscal::{minimize_sk, monomial_moment, positivity_scan, s_k_moments, s_k_trace};
use kscal::{CurvatureTensor, MetricModel, SkewGenerator, TangentPlane};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn moment_identities() -> Outcome {
    let mut worst_z: f64 = 0.0;
    let mut exact = true;
    for m in 2..=6usize {
        let mut a4 = vec![0i64; m];
        a4[0] = 2;
        let mut a22 = vec![0i64; m];
        a22[0] = 1;
        a22[1] = 1;
        let d = (m * (m + 1)) as i64;
        exact &= monomial_moment(m, &a4, &a4).unwrap() == ratio(2, d);
        exact &= monomial_moment(m, &a22, &a22).unwrap() == ratio(1, d);
        let e4 = mc_average(|z| z[0].norm_sqr().powi(2), m, 1_000_000, 100 + m as u64).unwrap();
        let e22 = mc_average(|z| z[0].norm_sqr() * z[1].norm_sqr(), m, 1_000_000, 200 + m as u64).unwrap();
        worst_z = worst_z
            .max((e4.mean - 2.0 / d as f64).abs() / e4.stderr)
            .max((e22.mean - 1.0 / d as f64).abs() / e22.stderr);
    }
    Outcome::new(exact && worst_z <= 4.0, format!("exact rationals: {exact}, worst MC |z| = {worst_z:.2} stderr"))
}

fn berger_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for m in 2..=4usize {
        for _ in 0..20 {
            let r = random_kahler_tensor(m, &mut rng);
            // trace route against exact quartic moment contraction
            let lhs = 2.0 * r.scalar();
            let rhs = (m * (m + 1)) as f64 * average_quartic_form(&r);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Outcome::new(worst < 1e-12, format!("60 tensors, max |2S - m(m+1)avg H| = {worst:.2e}"))
}

fn route_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 1..=3usize {
        for trial in 0..50 {
            let m = k + 1 + trial % 3;
            let r = random_kahler_tensor(m, &mut rng);
            let plane = TangentPlane::random(m, k, &mut rng);
            worst = worst.max((s_k_trace(&r, &plane) - s_k_moments(&r, &plane)).abs());
        }
    }
    Outcome::new(worst < 1e-10, format!("150 (R, plane) pairs, max route gap = {worst:.2e}"))
}

fn space_form_minimization() -> Outcome {
    let start = Instant::now();
    let mut worst_value: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for m in 3..=6usize {
        for k in 2..=3usize {
            let t = Instant::now();
            let r = constant_hsc_tensor(m, 1.0);
            let cp = minimize_sk(&r, k, &MinimizeOptions::default()).unwrap();
            slowest = slowest.max(t.elapsed().as_secs_f64());
            worst_value = worst_value.max((cp.value - (k * (k + 1)) as f64 / 2.0).abs());
            worst_grad = worst_grad.max(cp.gradient_norm);
        }
    }
    let total = start.elapsed().as_secs_f64();
    Outcome::new(
        worst_value < 1e-8 && worst_grad < 1e-8 && total < 10.0,
        format!(
            "max |S_k - k(k+1)/2| = {worst_value:.2e}, max gradient = {worst_grad:.2e}, total {total:.2}s (slowest {slowest:.2}s)"
        ),
    )
}

fn brute_force_min(r: &CurvatureTensor, k: usize, planes: u64) -> f64 {
    positivity_scan(&MetricModel::Tensor(r.clone()), "oracle", k, planes, 1, 0xB00).unwrap().min_value
}

fn product_minimizer() -> Outcome {
    // complex-1-dimensional factors: the only 2-plane is the whole space
    let r = product_tensor(&constant_hsc_tensor(1, 1.0), &constant_hsc_tensor(1, 1.0));
    let cp = minimize_sk(&r, 2, &MinimizeOptions::default()).unwrap();
    let oracle = brute_force_min(&r, 2, 100_000);
    Outcome::new(
        (cp.value - 2.0).abs() < 1e-6 && oracle >= cp.value - 1e-4,
        format!("CP1 x CP1: minimum {:.12}, brute-force oracle {oracle:.12}", cp.value),
    )
}

fn product_two_by_two() -> String {
    let r = product_tensor(&constant_hsc_tensor(2, 1.0), &constant_hsc_tensor(2, 1.0));
    let cp = minimize_sk(&r, 2, &MinimizeOptions::default()).unwrap();
    let oracle = brute_force_min(&r, 2, 100_000);
    format!(
        "CP2 x CP2, k=2: minimum {:.12} (graph-plane value 1.5), brute-force oracle {oracle:.6}, oracle >= min - 1e-4: {}",
        cp.value,
        oracle >= cp.value - 1e-4
    )
}

/// Central differences of `S_k` along `e^{ta}` with one Richardson step.
fn fd_variations(r: &CurvatureTensor, plane: &TangentPlane, a: &SkewGenerator) -> (f64, f64) {
    let at = |t: f64| s_k_trace(r, &plane.transformed(&a.exp(t)).unwrap());
    let f0 = at(0.0);
    let d1 = |h: f64| (at(h) - at(-h)) / (2.0 * h);
    let d2 = |h: f64| (at(h) - 2.0 * f0 + at(-h)) / (h * h);
    let (h1, h2) = (1e-3, 1e-2);
    ((4.0 * d1(h1 / 2.0) - d1(h1)) / 3.0, (4.0 * d2(h2 / 2.0) - d2(h2)) / 3.0)
}

fn variational_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for trial in 0..100 {
        let m = 3 + trial % 4;
        let k = 1 + trial % (m - 1);
        let r = random_kahler_tensor(m, &mut rng);
        let plane = TangentPlane::random(m, k, &mut rng);
        let a = SkewGenerator::random(m, &mut rng);
        let (fd1, fd2) = fd_variations(&r, &plane, &a);
        let x1 = first_variation(&r, &plane, &a).unwrap();
        let x2 = second_variation(&r, &plane, &a).unwrap();
        e1 = e1.max((x1 - fd1).abs() / x1.abs());
        e2 = e2.max((x2 - fd2).abs() / x2.abs());
    }
    Outcome::new(
        e1 < 1e-5 && e2 < 1e-4,
        format!("100 triples, max relative error first {e1:.2e}, second {e2:.2e}"),
    )
}

fn model_suite() -> Vec<(String, CurvatureTensor)> {
    vec![
        ("constant_hsc(m=4,c=1)".into(), constant_hsc_tensor(4, 1.0)),
        ("constant_hsc(m=5,c=2)".into(), constant_hsc_tensor(5, 2.0)),
        (
            "product(CP2,CP2)".into(),
            product_tensor(&constant_hsc_tensor(2, 1.0), &constant_hsc_tensor(2, 1.0)),
        ),
        (
            "product(CP1,CP2)".into(),
            product_tensor(&constant_hsc_tensor(1, 1.0), &constant_hsc_tensor(2, 1.0)),
        ),
        ("perturbed(m=4,eps=0.05,seed=1)".into(), perturbed_constant_hsc(4, 2.0, 0.05, 1)),
        ("perturbed(m=5,eps=0.03,seed=2)".into(), perturbed_constant_hsc(5, 2.0, 0.03, 2)),
    ]
}

fn criticality_identities() -> Outcome {
    let opts = MinimizeOptions { second_variation_probes: 100, ..MinimizeOptions::default() };
    let (mut residual, mut second): (f64, f64) = (0.0, f64::INFINITY);
    let mut planes = 0;
    let mut unconverged = 0;
    for (_, r) in model_suite() {
        for k in 2..=3 {
            let cp = minimize_sk(&r, k, &opts).unwrap();
            if !cp.converged {
                unconverged += 1;
                continue;
            }
            planes += 1;
            residual = residual.max(cp.criticality_residual);
            second = second.min(cp.second_variation_sample.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    Outcome::new(
        unconverged == 0 && residual < 1e-6 && second >= -1e-8,
        format!(
            "{planes} converged planes ({unconverged} unconverged), max residual {residual:.2e}, min second variation {second:.2e} over 100 probes each"
        ),
    )
}

fn find<'a>(checks: &'a [Check], name: &str) -> &'a Check {
    checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("missing check {name}"))
}

fn minimality_bounds() -> Outcome {
    let probe = ProbeOptions { probes: 200, ..ProbeOptions::default() };
    let (mut mixed, mut slack, mut equality): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    let mut failures = Vec::new();
    for (name, r) in model_suite() {
        let constant = name.starts_with("constant_hsc");
        for k in 2..=3 {
            let cp = minimize_sk(&r, k, &MinimizeOptions::default()).unwrap();
            let mut checks = check_k_plane_bounds(&r, &cp.plane, &probe).unwrap().checks;
            if k == 2 {
                checks.extend(check_two_plane_bounds(&r, &cp.plane, &probe).unwrap().checks);
            }
            for c in &checks {
                if c.name.ends_with("mixed_term") {
                    mixed = mixed.max(c.value);
                } else {
                    slack = slack.min(c.slack);
                }
                if !c.pass {
                    failures.push(format!("{name} k={k} {}", c.name));
                }
            }
            if constant {
                for n in ["k_plane.complement_bound"].into_iter().chain((k == 2).then_some("two_plane.complement_bound")) {
                    let c = find(&checks, n);
                    equality = equality.max(c.per_probe.iter().fold(0.0, |a, s| a.max(s.abs())));
                }
            }
        }
    }
    Outcome::new(
        mixed < 1e-8 && slack >= -1e-8 && equality < 1e-10 && failures.is_empty(),
        format!(
            "max mixed term {mixed:.2e}, min slack {slack:.3e}, space-form equality gap {equality:.2e}, failing checks {failures:?}"
        ),
    )
}

fn normal_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut recon, mut lam): (f64, f64) = (0.0, 0.0);
    for m in [2usize, 4, 6] {
        for _ in 0..20 {
            let g = linalg::gaussian_matrix(m, m, &mut rng);
            let a: CMatrix = &g - g.transpose();
            let nf = skew_normal_form(&a).unwrap();
            recon = recon.max(nf.reconstruction_residual(&a) / linalg::max_abs(&a));
            let mut sv: Vec<f64> = a.svd(false, false).singular_values.iter().copied().collect();
            sv.sort_by(|x, y| y.total_cmp(x));
            for (i, l) in nf.lambda.iter().enumerate() {
                lam = lam.max((l - sv[2 * i]).abs()).max((l - sv[2 * i + 1]).abs());
            }
        }
    }
    Outcome::new(
        recon < 1e-10 && lam < 1e-10,
        format!("60 matrices, max reconstruction {recon:.2e}, max |lambda - paired singular value| {lam:.2e}"),
    )
}

fn vanishing() -> Outcome {
    let opts = VanishingOptions {
        probes: ProbeOptions { probes: 50, ..ProbeOptions::default() },
        ..VanishingOptions::default()
    };
    let mut certified = 0;
    let mut worst_tuple = f64::INFINITY;
    let mut worst_dominance = f64::INFINITY;
    let mut failures = Vec::new();
    for (m, eps, seed) in [(3usize, 0.05, 1u64), (4, 0.05, 2), (5, 0.03, 3), (6, 0.02, 4)] {
        let r = perturbed_constant_hsc(m, 2.0, eps, seed);
        for p in 2..=m {
            let label = format!("perturbed(m={m},eps={eps},seed={seed})");
            let report = vanishing_certificate(&r, &label, 2, p, Sign::Positive, &opts).unwrap();
            if report.s_k <= 1e-3 {
                failures.push(format!("{label}: min S_2 = {}", report.s_k));
                continue;
            }
            certified += 1;
            worst_tuple = worst_tuple.min(find(&report.checks, &format!("p{p}.tuple_positivity")).value);
            worst_dominance = worst_dominance.min(find(&report.checks, &format!("p{p}.dominates_bound")).slack);
            failures.extend(report.checks.iter().filter(|c| !c.pass).map(|c| format!("{label} p={p} {}", c.name)));
        }
    }
    for m in [3usize, 4] {
        let r = constant_hsc_tensor(m, -1.0);
        for p in 2..=m {
            let report = vanishing_certificate(&r, "constant_hsc(c=-1)", 2, p, Sign::Negative, &opts).unwrap();
            failures.extend(report.checks.iter().filter(|c| !c.pass).map(|c| format!("c=-1 m={m} p={p} {}", c.name)));
        }
    }
    Outcome::new(
        failures.is_empty() && worst_tuple > 0.0 && worst_dominance >= -1e-8,
        format!(
            "{certified} certificates, min tuple sum {worst_tuple:.4}, min dominance slack {worst_dominance:.3e}, negative suite on c=-1, failures {failures:?}"
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = r#"{"model": {"kind": "perturbed", "m": 4, "epsilon": 0.05, "seed": 7}, "k": [2, 3], "seed": 11,
                  "samples": {"probes": 60, "restarts": 4, "planes": 64}}"#;
    let run = RunConfig::from_json(cfg).unwrap().resolve().unwrap();
    let a = cmd_certify(&run).unwrap();
    let b = cmd_certify(&run).unwrap();
    Outcome::new(
        a.canonical_hash == b.canonical_hash && a.body.all_passed,
        format!("hashes {} / {}, all passed {}", &a.canonical_hash[..16], &b.canonical_hash[..16], a.body.all_passed),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("moment-identities", moment_identities),
        ("scalar-curvature-average", berger_lemma),
        ("route-equivalence", route_equivalence),
        ("space-form-minimization", space_form_minimization),
        ("product-minimizer", product_minimizer),
        ("variational-oracles", variational_oracles),
        ("criticality-identities", criticality_identities),
        ("minimality-bounds", minimality_bounds),
        ("skew-normal-form", normal_form),
        ("vanishing-certificate", vanishing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!("{tag} {:>2} {name}: {} [{:.2}s]", i + 1, outcome.detail, t.elapsed().as_secs_f64());
        if i == 4 {
            println!("INFO  5 product-minimizer: {}", product_two_by_two());
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
