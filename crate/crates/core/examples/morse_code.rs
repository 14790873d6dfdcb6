//! Full pipeline in-process: critical points, regular values, surfaces,
//! Morse code and the verification checks.
//!
//! ```bash
//! cargo run --release --example morse_code -- circle 1
//! cargo run --release --example morse_code -- paper_trefoil
//! ```

use std::error::Error;

use knot_morse::cli::{run_analysis, KnotSpec, RunConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "circle".to_string());
    let params = args.map(|a| a.parse::<f64>()).collect::<Result<Vec<_>, _>>()?;

    let config = RunConfig::new(KnotSpec::builtin(&name, &params));
    let (report, _meshes) = run_analysis(&config)?;

    for (cluster, level) in report.clusters.iter().zip(&report.regular_values[1..]) {
        println!(
            "critical value {:.6} (m = {}, n = {}), next regular value {level:.4}",
            cluster.value, cluster.m, cluster.n
        );
    }
    for s in &report.surfaces {
        println!(
            "  level {:>9.4}: genus {} on grid {:?}, {} triangles",
            s.level, s.topology.total_genus, s.grid.cells, s.triangles
        );
    }
    println!("Morse code {} ({})", report.morse_code, if report.morse_code.distinct { "distinct" } else { "clustered" });
    for check in &report.verification.checks {
        let status = if !check.applicable { "n/a" } else if check.passed { "ok" } else { "FAILED" };
        println!("  {:<16} {status:<6} {}", check.name, check.details);
    }
    println!("{:.1} s", report.timings.total);
    Ok(())
}
