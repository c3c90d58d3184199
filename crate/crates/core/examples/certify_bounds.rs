//! Consequences of minimality at a minimizing plane: the mixed sphere average
//! vanishes and sphere averages of complement directions are bounded below by
//! `S_k/(k(k+1))`.

use kscal::catalog::{constant_hsc_tensor, perturbed_constant_hsc};
use kscal::certify::{check_k_plane_bounds, check_two_plane_bounds, ProbeOptions};
use kscal::{minimize_sk, MinimizeOptions, TangentPlane};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kscal::Result<()> {
    let probes = ProbeOptions::default();
    for (name, r) in [
        ("constant_hsc(m=4,c=1)", constant_hsc_tensor(4, 1.0)),
        ("perturbed(m=4,eps=0.05)", perturbed_constant_hsc(4, 2.0, 0.05, 1)),
    ] {
        for k in 2..=3 {
            let cp = minimize_sk(&r, k, &MinimizeOptions::default())?;
            let mut fragments = vec![check_k_plane_bounds(&r, &cp.plane, &probes)?];
            if k == 2 {
                fragments.push(check_two_plane_bounds(&r, &cp.plane, &probes)?);
            }
            println!("{name} k={k}: S_k {:.6}, bound {:.6}", fragments[0].s_k, fragments[0].bound);
            for c in fragments.iter().flat_map(|f| &f.checks) {
                println!(
                    "  {:<28} {:<24} worst {:>12.4e} vs {:>9.5} over {:>4} probes  {}",
                    c.name,
                    c.anchor,
                    c.value,
                    c.bound,
                    c.samples,
                    if c.pass { "ok" } else { "FAIL" }
                );
            }
        }
    }

    // the bounds are refused away from a critical plane
    let r = perturbed_constant_hsc(4, 2.0, 0.05, 1);
    let plane = TangentPlane::random(4, 2, &mut ChaCha8Rng::seed_from_u64(0));
    match check_k_plane_bounds(&r, &plane, &probes) {
        Err(e) => println!("random plane: {e}"),
        Ok(_) => unreachable!("a random plane is not critical"),
    }
    Ok(())
}
