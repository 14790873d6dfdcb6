//! Evaluate the potential, its gradient and Hessian along a ray from the
//! centre of a knot, and check that the Hessian is traceless.
//!
//! ```bash
//! cargo run --release --example field_evaluation
//! cargo run --release --example field_evaluation -- circle 1
//! ```

use std::error::Error;

use knot_morse::curve::builtin;
use knot_morse::field::FieldEvaluator;
use knot_morse::geometry::Point;

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "paper_trefoil".to_string());
    let params = args.map(|a| a.parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
    let field = FieldEvaluator::new(builtin(&name, &params)?)?;

    println!(
        "{name}: length {:.6}, max speed {:.4}, exclusion radius {:.4}",
        field.knot_length(),
        field.max_speed(),
        field.min_distance()
    );
    println!("{:>6}  {:>12}  {:>12}  {:>10}", "z", "potential", "|gradient|", "trace H");
    for i in 0..=10 {
        let x = Point::new(0.0, 0.0, 0.5 * i as f64);
        match field.evaluate_refined(&x) {
            Ok(s) => println!(
                "{:>6.2}  {:>12.8}  {:>12.6e}  {:>10.2e}",
                x.z,
                s.potential,
                s.gradient.norm(),
                s.hessian.trace()
            ),
            Err(e) => println!("{:>6.2}  {e}", x.z),
        }
    }
    for level in [10.0, 15.0] {
        println!("level {level}: surface lies within {:.4} of the bounding box", field.enclosing_radius(level));
    }
    Ok(())
}
