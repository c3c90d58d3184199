//! On `CP² × CP²` (both factors of holomorphic curvature 1) the minimum of `S_2`
//! is 3/2, attained on graph planes `{(x, Ux)/√2}`, while planes tangent to a
//! factor give 3 and planes spanned by one line from each factor give 2.

use kscal::catalog::{constant_hsc_tensor, product_tensor};
use kscal::linalg::{CMatrix, C64};
use kscal::{minimize_sk, s_k_trace, MinimizeOptions, TangentPlane};

fn main() -> kscal::Result<()> {
    let r = product_tensor(&constant_hsc_tensor(2, 1.0), &constant_hsc_tensor(2, 1.0));
    let factor = TangentPlane::coordinate(4, &[0, 1])?;
    let split = TangentPlane::coordinate(4, &[0, 2])?;
    let s = C64::from(0.5f64.sqrt());
    let mut graph = CMatrix::zeros(4, 2);
    for i in 0..2 {
        graph[(i, i)] = s;
        graph[(i + 2, i)] = s;
    }
    let graph = TangentPlane::from_orthonormal(graph)?;
    println!("factor plane {:.6}", s_k_trace(&r, &factor));
    println!("split plane  {:.6}", s_k_trace(&r, &split));
    println!("graph plane  {:.6}", s_k_trace(&r, &graph));

    let cp = minimize_sk(&r, 2, &MinimizeOptions::default())?;
    println!("minimizer    {:.12} (|grad| {:.1e})", cp.value, cp.gradient_norm);
    // a graph plane splits its squared frame norm 1 : 1 between the factors
    let f = cp.plane.frame();
    println!("squared frame norm per factor: {:.6} / {:.6}", f.rows(0, 2).norm_squared(), f.rows(2, 2).norm_squared());
    Ok(())
}
