//! Riemannian descent for the minimum of `S_k` over the Grassmannian, with the
//! exact first variation checked against a finite difference along the way.

use kscal::catalog::perturbed_constant_hsc;
use kscal::grassmann::{descend, first_variation, riemannian_gradient};
use kscal::{minimize_sk, s_k_trace, MinimizeOptions, TangentPlane};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kscal::Result<()> {
    let r = perturbed_constant_hsc(5, 2.0, 0.05, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = TangentPlane::random(5, 2, &mut rng);

    let g = riemannian_gradient(&r, &start);
    let exact = first_variation(&r, &start, &g)?;
    let h = 1e-5;
    let at = |t: f64| s_k_trace(&r, &start.transformed(&g.exp(t)).unwrap());
    println!("first variation along -grad: exact {exact:.10}, central difference {:.10}", (at(h) - at(-h)) / (2.0 * h));

    let run = descend(&r, &start, &MinimizeOptions::default());
    println!(
        "single descent: S_2 {:.4} -> {:.12} in {} steps (|grad| {:.1e})",
        run.history.first().unwrap(),
        run.value,
        run.iterations,
        run.gradient_norm
    );

    for k in 1..=4 {
        let cp = minimize_sk(&r, k, &MinimizeOptions::default())?;
        println!(
            "k={k}: min S_k {:.12}  residual {:.1e}  min second variation {:.2e}  (best of {} starts, scan min {:.6})",
            cp.value,
            cp.criticality_residual,
            cp.second_variation_sample.iter().copied().fold(f64::INFINITY, f64::min),
            cp.starts,
            cp.scan_min.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
