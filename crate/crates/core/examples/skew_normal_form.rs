//! Unitary congruence of a complex skew-symmetric matrix to 2×2 blocks
//! `λ_i [[0, 1], [-1, 0]]`; the `λ_i` are the singular values, each repeated twice.

use kscal::certify::skew_normal_form;
use kscal::linalg;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kscal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [2, 3, 4, 6] {
        let g = linalg::gaussian_matrix(m, m, &mut rng);
        let a = &g - g.transpose();
        let nf = skew_normal_form(&a)?;
        let sv = a.clone().svd(false, false).singular_values;
        println!("m={m}: lambda {:.6?}", nf.lambda);
        println!("      singular values {:.6?}", sv.as_slice());
        println!(
            "      |U*U - I| {:.1e}, |ᵗUAU - blocks| {:.1e}",
            linalg::unitarity_defect(&nf.u),
            nf.reconstruction_residual(&a)
        );
    }
    Ok(())
}
