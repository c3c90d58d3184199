//! A full certification run from a JSON configuration, as the `certify`
//! subcommand does it: report body, canonical hash and run directory.

use kscal::cli::{cmd_certify, RunConfig};

fn main() -> kscal::Result<()> {
    let out = std::env::temp_dir().join("kscal-example-runs");
    let config = format!(
        r#"{{
            "model": {{"kind": "perturbed", "m": 4, "epsilon": 0.05, "seed": 2}},
            "k": [2, 3],
            "seed": 17,
            "samples": {{"probes": 100, "restarts": 4}},
            "out": {out:?}
        }}"#
    );
    let run = RunConfig::from_json(&config)?.resolve()?;
    let report = cmd_certify(&run)?;
    for cert in &report.body.certifications {
        let p = cert.p.map_or("bounds".to_string(), |p| format!("p={p}"));
        println!("k={} {p:<7} S_k {:.5}  {} checks  passed {}", cert.k, cert.s_k, cert.checks.len(), cert.passed());
    }
    let dir = report.persist(&run.config.out)?;
    println!("canonical hash {}", report.canonical_hash);
    println!("written to {}", dir.display());
    Ok(())
}
