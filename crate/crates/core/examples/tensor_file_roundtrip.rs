//! JSON tensor files: the writer emits every component in canonical order, the
//! reader completes entries implied by the symmetries. Round trips are exact.

use kscal::catalog::{load_tensor, perturbed_constant_hsc, save_tensor, tensor_from_json};
use kscal::catalog::MetricModel;
use kscal::positivity_scan;

fn main() -> kscal::Result<()> {
    let r = perturbed_constant_hsc(3, 2.0, 0.05, 4);
    let path = std::env::temp_dir().join("kscal-example-tensor.json");
    save_tensor(&r, &path)?;
    let back = load_tensor(&path)?;
    println!("round trip exact: {}", back.tensor.components() == r.components());

    // three entries given; R(e1,ē1,e0,ē0), R(e0,ē1,e1,ē0), ... follow from symmetry
    let sparse = r#"{"m": 2, "entries": [
        {"i": 0, "j": 0, "k": 0, "l": 0, "re": 2.0, "im": 0.0},
        {"i": 1, "j": 1, "k": 1, "l": 1, "re": 2.0, "im": 0.0},
        {"i": 0, "j": 0, "k": 1, "l": 1, "re": 1.0, "im": 0.0}
    ]}"#;
    let loaded = tensor_from_json(sparse)?;
    println!("completed R(e0,ē1,e1,ē0) = {:.3}", loaded.tensor.get(0, 1, 1, 0).re);
    let scan = positivity_scan(&MetricModel::Tensor(loaded.tensor), "sparse", 1, 500, 1, 0)?;
    println!("min holomorphic sectional curvature over 500 lines: {:.6}", scan.min_value);
    std::fs::remove_file(path)?;
    Ok(())
}
