//! Curvature of a Kähler metric given by a potential in a chart, by nested
//! Wirtinger finite differences in a unitary frame at the chart point.

use std::sync::Arc;

use kscal::catalog::{constant_hsc_tensor, potential_to_curvature, NamedPotential, PotentialChart};
use kscal::linalg::C64;
use kscal::{minimize_sk, MinimizeOptions};

fn main() -> kscal::Result<()> {
    let m = 3;
    let point = vec![C64::new(0.2, -0.1), C64::new(0.0, 0.3), C64::new(-0.25, 0.05)];
    let chart = PotentialChart::new(m, NamedPotential::FubiniStudy.build(m), point);
    let out = potential_to_curvature(&chart)?;
    println!(
        "Fubini-Study: |R - space form(c=2)| {:.1e}, trust radius {:.1e}, smallest metric eigenvalue {:.4}",
        (&out.tensor - &constant_hsc_tensor(m, 2.0)).max_abs(),
        out.trust_radius,
        out.metric_min_eigenvalue
    );

    // any re-entrant closure works as a potential
    let bump = Arc::new(|z: &[C64]| {
        let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        r2.ln_1p() + 0.05 * (z[0] * z[1].conj()).re.powi(2)
    });
    let r = potential_to_curvature(&PotentialChart::at_origin(2, bump))?.tensor;
    for k in 1..=2 {
        let cp = minimize_sk(&r, k, &MinimizeOptions::default())?;
        println!("bumped potential: min S_{k} = {:.8}", cp.value);
    }
    Ok(())
}
