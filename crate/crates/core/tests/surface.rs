use std::f64::consts::PI;

use knot_morse::critical::{find_critical_points, SearchConfig};
use knot_morse::curve::builtin;
use knot_morse::field::FieldEvaluator;
use knot_morse::geometry::{Aabb, Point};
use knot_morse::morse::extract_level;
use knot_morse::surface::{
    extract_isosurface, extract_with_stats, plan_grid, read_obj, topology, topology_with_flux, write_obj,
    tube_radius, AnalyticField, GridSpec, ScalarField, SurfaceConfig, SurfaceError,
};

fn cube(half: f64) -> Aabb {
    Aabb::new(Point::new(-half, -half, -half), Point::new(half, half, half))
}

fn point_charge(x: &Point) -> f64 {
    1.0 / x.norm()
}

fn ring(x: &Point) -> f64 {
    let rho = (x.x * x.x + x.y * x.y).sqrt();
    1.0 / ((rho - 2.0).powi(2) + x.z * x.z + 0.01)
}

fn torus_box() -> Aabb {
    Aabb::new(Point::new(-3.5, -3.5, -1.5), Point::new(3.5, 3.5, 1.5))
}

fn genera_at(field: &impl ScalarField, level: f64, grid: &GridSpec) -> Vec<u32> {
    let mesh = extract_isosurface(field, level, grid).unwrap();
    assert!(mesh.min_triangle_area() > 1e-12);
    topology(&mesh).unwrap().genera()
}

#[test]
fn sphere_level_set_has_genus_zero_at_both_resolutions() {
    let field = AnalyticField::new(point_charge);
    let grid = GridSpec::with_resolution(cube(2.0), 64).unwrap();
    assert_eq!(genera_at(&field, 1.0, &grid), [0]);
    assert_eq!(genera_at(&field, 1.0, &grid.doubled()), [0]);
}

#[test]
fn torus_level_set_has_genus_one_at_both_resolutions() {
    let field = AnalyticField::new(ring);
    let grid = GridSpec::with_resolution(torus_box(), 64).unwrap();
    assert_eq!(genera_at(&field, 2.0, &grid), [1]);
    assert_eq!(genera_at(&field, 2.0, &grid.doubled()), [1]);
}

#[test]
fn point_charge_flux_through_the_unit_sphere() {
    let field = AnalyticField::new(point_charge);
    let grid = GridSpec::with_resolution(cube(2.0), 128).unwrap();
    let mesh = extract_isosurface(&field, 1.0, &grid).unwrap();
    let report = topology_with_flux(&field, &mesh).unwrap();
    let flux = report.components[0].flux.unwrap();
    assert!((flux - 4.0 * PI).abs() < 0.01 * 4.0 * PI, "flux {flux}");
    assert!((mesh.area() - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
}

#[test]
fn circle_flux_obeys_gauss_law() {
    let f = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
    let critical = find_critical_points(&f, &SearchConfig::default()).unwrap();
    for level in [1.0, 3.0, 6.0] {
        let surface = extract_level(&f, level, &critical, &SurfaceConfig::default()).unwrap();
        assert_eq!(surface.topology.genera(), [0]);
        let flux = surface.topology.components[0].flux.unwrap();
        let expected = 8.0 * PI * PI;
        assert!((flux - expected).abs() < 0.02 * expected, "level {level}: flux {flux}");
    }
    let torus = extract_level(&f, 7.0, &critical, &SurfaceConfig::default()).unwrap();
    assert_eq!(torus.topology.genera(), [1]);
    assert!(torus.topology.components[0].flux.unwrap() > 0.0);
}

#[test]
fn knot_meshes_are_outward_with_small_residuals() {
    let f = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
    let plan = plan_grid(&f, 3.0, &[], &SurfaceConfig::default()).unwrap();
    let (mesh, stats) = extract_with_stats(&f, 3.0, &plan.grid).unwrap();
    assert!(stats.max_residual_ratio <= 1.0, "{}", stats.max_residual_ratio);
    // the area vector sum weighted by position gives the enclosed volume
    let volume: f64 = (0..mesh.triangles.len())
        .map(|t| mesh.centroid(t).dot(&mesh.area_vector(t)) / 3.0)
        .sum();
    assert!(volume > 0.0);
    for v in &mesh.vertices {
        assert!((f.potential_refined(v).unwrap() - 3.0).abs() < 0.05 * 3.0);
    }
}

#[test]
fn clipped_boxes_are_refused() {
    let field = AnalyticField::new(point_charge);
    let grid = GridSpec::with_resolution(cube(0.8), 32).unwrap();
    assert!(matches!(
        extract_isosurface(&field, 1.0, &grid),
        Err(SurfaceError::Clipped { .. })
    ));
}

#[test]
fn obj_round_trip_preserves_topology() {
    let field = AnalyticField::new(ring);
    let grid = GridSpec::with_resolution(torus_box(), 64).unwrap();
    let mesh = extract_isosurface(&field, 2.0, &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.obj");
    write_obj(&mesh, &path).unwrap();
    let back = read_obj(&path).unwrap();
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.vertices.len(), mesh.vertices.len());
    assert_eq!(back.level, 2.0);
    assert_eq!(topology(&back).unwrap(), topology(&mesh).unwrap());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), mesh.triangles.len());
}

#[test]
fn circle_tube_shrinks_with_level() {
    let f = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
    let thin = tube_radius(&f, 12.0, 64);
    let thick = tube_radius(&f, 8.0, 64);
    assert!(thin < thick && thick < 1.0);
}
