//! Extract level sets of analytic fields, count genus and flux, and
//! round-trip the meshes through OBJ.
//!
//! ```bash
//! cargo run --release --example mesh_topology
//! ```

use std::error::Error;

use knot_morse::geometry::{Aabb, Point};
use knot_morse::surface::{
    extract_isosurface, read_obj, topology, topology_with_flux, write_obj, AnalyticField, GridSpec,
};

fn main() -> Result<(), Box<dyn Error>> {
    let out = std::path::Path::new("target/mesh_topology");
    std::fs::create_dir_all(out)?;

    // two point charges: one surface around both at low levels, two spheres
    // at high levels
    let pair = AnalyticField::new(|x: &Point| {
        let a = Point::new(-1.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.0);
        1.0 / (x - a).norm() + 1.0 / (x - b).norm()
    });
    let bounds = Aabb::new(Point::new(-4.0, -3.0, -3.0), Point::new(4.0, 3.0, 3.0));
    let grid = GridSpec::with_resolution(bounds, 96)?;
    for level in [0.8, 1.5, 3.0] {
        let mesh = extract_isosurface(&pair, level, &grid)?;
        let report = topology_with_flux(&pair, &mesh)?;
        let fluxes: Vec<String> = report
            .components
            .iter()
            .map(|c| format!("{:.3}", c.flux.unwrap_or(f64::NAN)))
            .collect();
        println!(
            "level {level}: {} component(s), genera {:?}, flux [{}] (each charge gives 4π = {:.3})",
            report.components.len(),
            report.genera(),
            fluxes.join(", "),
            4.0 * std::f64::consts::PI
        );

        let path = out.join(format!("pair_{level}.obj"));
        write_obj(&mesh, &path)?;
        let back = read_obj(&path)?;
        assert_eq!(topology(&back)?, topology(&mesh)?);
        println!("  wrote {} ({} vertices, {} triangles)", path.display(), back.vertices.len(), back.triangles.len());
    }
    Ok(())
}
