//! Perturb a knot with a deterministic random Fourier series and compare the
//! critical values before and after.
//!
//! ```bash
//! cargo run --release --example perturb_knot -- 0.05 42
//! ```

use std::error::Error;

use knot_morse::critical::{cluster_by_value, default_cluster_tol, find_critical_points, SearchConfig};
use knot_morse::curve::{builtin, perturb};
use knot_morse::field::FieldEvaluator;

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let amplitude: f64 = args.next().map_or(Ok(0.05), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(42), |a| a.parse())?;

    let base = builtin("paper_trefoil", &[])?;
    let bumped = perturb(&base, amplitude, seed)?;
    println!("perturbed curve:\n  {}", bumped.to_source());

    for (label, curve) in [("original", base), ("perturbed", bumped)] {
        let field = FieldEvaluator::new(curve)?;
        let points = find_critical_points(&field, &SearchConfig::default())?;
        let clusters = cluster_by_value(&points, default_cluster_tol(&points));
        let values: Vec<String> = clusters.iter().map(|c| format!("{:.6}x{}", c.value, c.points.len())).collect();
        println!("{label}: {} critical points, clusters {}", points.len(), values.join(" "));
    }
    Ok(())
}
