//! Parse a parametric curve, show its symbolic derivatives and sample it.
//!
//! ```bash
//! cargo run --example curve_expressions
//! cargo run --example curve_expressions -- "((2 + cos(3*t))*cos(2*t), (2 + cos(3*t))*sin(2*t), sin(3*t))"
//! ```

use std::error::Error;
use std::f64::consts::TAU;

use knot_morse::curve::{KnotCurve, PAPER_TREFOIL_SOURCE};

fn main() -> Result<(), Box<dyn Error>> {
    let source = std::env::args().nth(1).unwrap_or_else(|| PAPER_TREFOIL_SOURCE.to_string());
    let curve = KnotCurve::parse(&source)?;

    for (axis, (e, (d, dd))) in ["x", "y", "z"]
        .iter()
        .zip(curve.components().iter().zip(curve.derivatives().iter().zip(curve.second_derivatives())))
    {
        println!("{axis}(t)   = {e}");
        println!("{axis}'(t)  = {d}");
        println!("{axis}''(t) = {dd}");
    }

    println!("\n{:>8}  {:>30}  {:>8}", "t", "r(t)", "|r'(t)|");
    for i in 0..8 {
        let t = i as f64 * TAU / 8.0;
        let s = curve.eval(t);
        println!(
            "{t:>8.4}  ({:+.4}, {:+.4}, {:+.4})  {:>8.4}",
            s.point.x, s.point.y, s.point.z, s.speed
        );
    }
    Ok(())
}
