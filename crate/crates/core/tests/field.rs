use std::f64::consts::{PI, SQRT_2, TAU};

use knot_morse::curve::{builtin, perturb, KnotCurve};
use knot_morse::field::{FieldConfig, FieldError, FieldEvaluator};
use knot_morse::geometry::Point;
use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;

fn knots() -> Vec<(&'static str, KnotCurve)> {
    let trefoil = builtin("paper_trefoil", &[]).unwrap();
    vec![
        ("circle", builtin("circle", &[1.0]).unwrap()),
        ("torus_knot", builtin("torus_knot", &[2.0, 3.0, 2.0, 1.0]).unwrap()),
        ("perturbed trefoil", perturb(&trefoil, 0.05, 42).unwrap()),
        ("paper_trefoil", trefoil),
    ]
}

/// Uniform points in the padded bounding box that the base rule accepts.
fn admissible_points(f: &FieldEvaluator, count: usize, seed: u64) -> Vec<Point> {
    let bounds = f.knot_bbox().inflate(1.0);
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let x = bounds.lo() + bounds.extent().component_mul(&u);
        if f.distance_to_knot(&x) >= f.min_distance() {
            out.push(x);
        }
    }
    out
}

fn axis(i: usize, h: f64) -> Vector3<f64> {
    let mut e = Vector3::zeros();
    e[i] = h;
    e
}

#[test]
fn circle_closed_forms() {
    let f = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
    let origin = Point::zeros();
    let top = Point::new(0.0, 0.0, 1.0);
    assert!((f.potential(&origin).unwrap() - TAU).abs() < 1e-12);
    assert!((f.potential(&top).unwrap() - TAU / SQRT_2).abs() < 1e-12);
    assert!(f.gradient(&origin).unwrap().norm() < 1e-10);
    // d/dz of 2π (1 + z²)^(-1/2) at z = 1
    let g = f.gradient(&top).unwrap();
    assert!((g - Vector3::new(0.0, 0.0, -PI / SQRT_2)).norm() < 1e-8, "{g}");

    let mut eig: Vec<f64> = SymmetricEigen::new(f.hessian(&origin).unwrap()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    for (got, want) in eig.iter().zip([-TAU, PI, PI]) {
        assert!((got - want).abs() < 1e-6, "{eig:?}");
    }
}

#[test]
fn harmonic_and_consistent_with_finite_differences() {
    let h = 1e-5;
    for (name, curve) in knots() {
        let f = FieldEvaluator::new(curve).unwrap();
        for x in admissible_points(&f, 1000, 17) {
            let s = f.evaluate(&x).unwrap();
            assert!(s.potential > 0.0);
            let hess_norm = s.hessian.norm();
            assert!(
                s.hessian.trace().abs() <= 1e-8 * (1.0 + hess_norm),
                "{name}: trace {} at {x}",
                s.hessian.trace()
            );
            assert!((s.hessian - s.hessian.transpose()).norm() <= 1e-12 * (1.0 + hess_norm));

            let fd_gradient = Vector3::from_fn(|i, _| {
                (f.potential(&(x + axis(i, h))).unwrap() - f.potential(&(x - axis(i, h))).unwrap()) / (2.0 * h)
            });
            let grad_norm = s.gradient.norm();
            assert!(
                (fd_gradient - s.gradient).norm() <= 1e-6 * (1.0 + grad_norm),
                "{name}: gradient {} vs {fd_gradient} at {x}",
                s.gradient
            );

            let mut fd_hessian = Matrix3::zeros();
            for i in 0..3 {
                let column = (f.gradient(&(x + axis(i, h))).unwrap() - f.gradient(&(x - axis(i, h))).unwrap()) / (2.0 * h);
                fd_hessian.set_column(i, &column);
            }
            assert!(
                (fd_hessian - s.hessian).norm() <= 1e-5 * (1.0 + hess_norm),
                "{name}: hessian mismatch at {x}"
            );
        }
    }
}

#[test]
fn quadrature_converges_on_the_circle_axis() {
    let x = Point::new(0.0, 0.0, 0.5);
    let exact = TAU / 1.25f64.sqrt();
    let value = |panels, nodes_per_panel| {
        let config = FieldConfig {
            panels,
            nodes_per_panel,
            ..FieldConfig::default()
        };
        FieldEvaluator::with_config(builtin("circle", &[1.0]).unwrap(), config)
            .unwrap()
            .potential(&x)
            .unwrap()
    };
    for (panels, nodes) in [(4, 16), (8, 8), (8, 16), (16, 16)] {
        let (coarse, fine) = (value(panels, nodes), value(panels, 2 * nodes));
        assert!((coarse - fine).abs() < 1e-10, "{panels}x{nodes}: {coarse} vs {fine}");
        assert!((fine - exact).abs() < 1e-10);
    }
}

#[test]
fn refined_path_agrees_with_a_fine_rule_near_the_knot() {
    let curve = builtin("paper_trefoil", &[]).unwrap();
    let f = FieldEvaluator::new(curve.clone()).unwrap();
    let fine = FieldEvaluator::with_config(
        curve.clone(),
        FieldConfig {
            panels: 256,
            nodes_per_panel: 32,
            ..FieldConfig::default()
        },
    )
    .unwrap();
    let mut rng = SplitMix64::seed_from_u64(5);
    for _ in 0..200 {
        let t = rng.random_range(0.0..TAU);
        let normal = curve.acceleration(t).cross(&curve.velocity(t)).normalize();
        let d = rng.random_range(0.2 * f.min_distance()..f.min_distance());
        let x = curve.point(t) + d * normal;
        if f.distance_to_knot(&x) < 0.9 * d {
            continue;
        }
        let a = f.evaluate_refined(&x).unwrap();
        let b = fine.evaluate(&x).unwrap();
        assert!((a.potential - b.potential).abs() <= 1e-9 * b.potential, "{x}");
        assert!((a.gradient - b.gradient).norm() <= 1e-8 * b.gradient.norm().max(b.potential), "{x}");
    }
}

#[test]
fn evaluation_too_close_is_refused() {
    let f = FieldEvaluator::new(builtin("paper_trefoil", &[]).unwrap()).unwrap();
    let on_knot = f.curve().point(1.0);
    match f.potential(&on_knot) {
        Err(FieldError::TooClose { distance, .. }) => assert!(distance < 1e-6),
        other => panic!("expected TooClose, got {other:?}"),
    }
}

#[test]
fn far_field_decays_like_total_charge() {
    for (name, curve) in knots() {
        let f = FieldEvaluator::new(curve).unwrap();
        let z = 10.0 * f.knot_bbox().diagonal();
        let value = f.potential(&Point::new(0.0, 0.0, z)).unwrap();
        let expected = f.knot_length() / z;
        assert!((value - expected).abs() <= 0.02 * expected, "{name}: {value} vs {expected}");
    }
}

#[test]
fn enclosing_radius_bounds_the_level_set() {
    let circle = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
    assert!((circle.enclosing_radius(TAU) - 1.0).abs() < 1e-12);

    let f = FieldEvaluator::new(builtin("paper_trefoil", &[]).unwrap()).unwrap();
    let r12 = f.enclosing_radius(12.0);
    assert!((r12 - f.knot_length() / 12.0).abs() < 1e-12);
    assert!((f.enclosing_radius(24.0) - 0.5 * r12).abs() < 1e-12);

    let bbox = f.knot_bbox();
    let mut rng = SplitMix64::seed_from_u64(11);
    for _ in 0..500 {
        let dir = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if dir.norm() < 1e-3 {
            continue;
        }
        let x = bbox.center() + dir.normalize() * (bbox.diagonal() + r12 * rng.random_range(1.0..3.0));
        if bbox.distance(&x) > r12 {
            assert!(f.potential(&x).unwrap() < 12.0);
        }
    }
}

#[test]
fn knot_length_of_circle() {
    let f = FieldEvaluator::new(builtin("circle", &[2.5]).unwrap()).unwrap();
    assert!((f.knot_length() - TAU * 2.5).abs() < 1e-12);
}
