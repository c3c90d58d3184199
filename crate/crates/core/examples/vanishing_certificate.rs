//! Pointwise certificate that every averaged tuple sum `∮ Σ_{i∈I} R_{vv̄iī}` is
//! positive at a minimizing plane, via the singular-value telescoping bound,
//! for each form degree `p ≥ k`. The negative case runs on `-R`.

use kscal::catalog::{constant_hsc_tensor, perturbed_constant_hsc};
use kscal::certify::{vanishing_certificate, Sign, VanishingOptions};

fn main() -> kscal::Result<()> {
    let opts = VanishingOptions::default();
    let r = perturbed_constant_hsc(5, 2.0, 0.05, 8);
    for p in 2..=5 {
        let report = vanishing_certificate(&r, "perturbed(m=5)", 2, p, Sign::Positive, &opts)?;
        let worst = report.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
        println!(
            "p={p}: S_2 {:.5}, {} tuples, {} checks, min slack {worst:.2e}, passed {}",
            report.s_k,
            report.tuples,
            report.checks.len(),
            report.passed()
        );
    }
    let report = vanishing_certificate(&r, "perturbed(m=5)", 2, 3, Sign::Positive, &opts)?;
    if let Some(text) = &report.implication {
        println!("\n{text}\n");
    }

    let hyperbolic = constant_hsc_tensor(4, -1.0);
    let report = vanishing_certificate(&hyperbolic, "constant_hsc(c=-1)", 2, 4, Sign::Negative, &opts)?;
    println!("negative sign on c = -1: passed {}", report.passed());
    match vanishing_certificate(&hyperbolic, "constant_hsc(c=-1)", 2, 4, Sign::Positive, &opts) {
        Err(e) => println!("positive sign on c = -1: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
