//! Samples `S_k` over Haar-random k-planes. On a space form every plane gives
//! `c·k(k+1)/2`; a perturbation spreads the values out.

use kscal::catalog::MetricModel;
use kscal::positivity_scan;

fn main() -> kscal::Result<()> {
    let models = [
        ("constant_hsc(m=4,c=1)", MetricModel::ConstantHsc { m: 4, c: 1.0 }),
        ("perturbed(m=4,eps=0.1)", MetricModel::Perturbed { m: 4, c: 2.0, epsilon: 0.1, seed: 3 }),
    ];
    for (name, model) in &models {
        for k in 1..=model.dim() {
            let scan = positivity_scan(model, name, k, 2000, 1, 42)?;
            let max = scan.samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
            println!(
                "{name:<24} k={k}  min {:>9.5}  max {:>9.5}  trace/moment gap {:.1e}",
                scan.min_value, max, scan.max_route_residual
            );
        }
    }
    Ok(())
}
