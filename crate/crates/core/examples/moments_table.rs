//! Exact sphere averages of `|z_1|^{2a_1} ⋯ |z_k|^{2a_k}` next to a seeded
//! Monte Carlo estimate.
//!
//! ```text
//! cargo run --example moments_table -- 3 6
//! ```

use kscal::moments::{mc_average, MomentTable};
use num_traits::ToPrimitive;

fn main() -> kscal::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let k = args.next().unwrap_or(2);
    let degree = args.next().unwrap_or(4);
    let half = degree / 2;

    let table = MomentTable::new(k, half)?;
    println!("unit sphere of C^{k}, monomials of degree {}", 2 * half);
    for (alpha, exact) in table.iter().filter(|(a, _)| a.iter().sum::<u32>() as usize == half) {
        let a = alpha.clone();
        let mc = mc_average(
            move |z| a.iter().zip(z).map(|(&e, w)| w.norm_sqr().powi(e as i32)).product(),
            k,
            100_000,
            7,
        )?;
        let value = exact.to_f64().unwrap();
        println!(
            "alpha = {alpha:?}  exact {exact:>8}  = {value:.6}  mc {:.6} ± {:.1e}  ({:.1} sigma)",
            mc.mean,
            mc.stderr,
            (mc.mean - value).abs() / mc.stderr
        );
    }
    Ok(())
}
