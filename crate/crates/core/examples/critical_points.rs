//! Locate and classify the critical points of a charged knot.
//!
//! ```bash
//! cargo run --release --example critical_points -- paper_trefoil
//! cargo run --release --example critical_points -- torus_knot 2 3 2 1
//! ```

use std::error::Error;
use std::time::Instant;

use knot_morse::critical::{cluster_by_value, default_cluster_tol, find_critical_points, SearchConfig};
use knot_morse::curve::builtin;
use knot_morse::field::FieldEvaluator;

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "paper_trefoil".to_string());
    let params = args.map(|a| a.parse::<f64>()).collect::<Result<Vec<_>, _>>()?;

    let field = FieldEvaluator::new(builtin(&name, &params)?)?;
    let start = Instant::now();
    let points = find_critical_points(&field, &SearchConfig::default())?;
    println!("{} critical points in {:.2?}", points.len(), start.elapsed());
    for p in &points {
        println!(
            "  ({:+.6}, {:+.6}, {:+.6})  value {:.9}  index {}  eigenvalues {:.4?}",
            p.position[0], p.position[1], p.position[2], p.value, p.index, p.eigenvalues
        );
    }
    for c in cluster_by_value(&points, default_cluster_tol(&points)) {
        println!("cluster at {:.6}: {} points, m = {}, n = {}", c.value, c.points.len(), c.m, c.n);
    }
    Ok(())
}
