//! Critical points of Φ by damped multistart Newton iteration on ∇Φ.

use std::cmp::Ordering;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldEvaluator};
use crate::geometry::{Aabb, Point};

/// Largest number of step halvings in the line search.
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriticalError {
    #[error("degenerate critical point at ({:.6}, {:.6}, {:.6}): Hessian eigenvalues {eigenvalues:?}; perturb the knot to restore nondegeneracy", position[0], position[1], position[2])]
    Degenerate {
        position: [f64; 3],
        eigenvalues: [f64; 3],
    },
    #[error("critical point at ({:.6}, {:.6}, {:.6}) has index {index}; a harmonic potential only admits indices 1 and 2", position[0], position[1], position[2])]
    UnexpectedIndex { position: [f64; 3], index: usize },
    #[error("no critical points found; check the search configuration")]
    NoneFound,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Multistart Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Seeds per axis of the regular seed grid.
    pub grid_resolution: usize,
    /// Additional pseudo-random seeds.
    pub random_seeds: usize,
    pub rng_seed: u64,
    /// Convergence threshold on |∇Φ|.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Merge radius for converged points; `None` means `1e-6 · bbox diagonal`.
    pub dedup_tol: Option<f64>,
    /// Relative eigenvalue threshold (against ‖H‖_F) for degeneracy.
    pub degenerate_tol: f64,
    /// Search box margin around the knot's bounding box, as a fraction of its
    /// diagonal.
    pub box_margin: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_resolution: 13,
            random_seeds: 500,
            rng_seed: 1,
            newton_tol: 1e-10,
            max_iter: 100,
            dedup_tol: None,
            degenerate_tol: 1e-6,
            box_margin: 0.1,
        }
    }
}

/// False for NaN as well as for non-positive values.
fn positive(v: f64) -> bool {
    v > 0.0
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), CriticalError> {
        let bad = |m: &str| Err(CriticalError::InvalidConfig(m.to_string()));
        if self.grid_resolution == 0 && self.random_seeds == 0 {
            return bad("at least one seed is required");
        }
        if !positive(self.newton_tol) {
            return bad("newton_tol must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if matches!(self.dedup_tol, Some(d) if !positive(d)) {
            return bad("dedup_tol must be positive");
        }
        if !positive(self.degenerate_tol) {
            return bad("degenerate_tol must be positive");
        }
        if !(positive(self.box_margin) || self.box_margin == 0.0) {
            return bad("box_margin must be non-negative");
        }
        Ok(())
    }
}

/// A nondegenerate zero of ∇Φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub position: [f64; 3],
    pub value: f64,
    pub grad_norm: f64,
    /// Hessian eigenvalues in ascending order.
    pub eigenvalues: [f64; 3],
    /// Number of negative eigenvalues.
    pub index: usize,
}

impl CriticalPoint {
    pub fn point(&self) -> Point {
        Point::from(self.position)
    }
}

/// Critical points sharing one critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCluster {
    /// Mean of the member values.
    pub value: f64,
    pub points: Vec<CriticalPoint>,
    /// Members of index 1.
    pub m: usize,
    /// Members of index 2.
    pub n: usize,
}

impl CriticalCluster {
    pub fn is_singleton(&self) -> bool {
        self.points.len() == 1
    }

    /// Change in genus across this critical value.
    pub fn genus_step(&self) -> i64 {
        self.m as i64 - self.n as i64
    }
}

/// The search box: knot bounding box plus a margin.
///
/// Critical points of the potential of a positive charge lie in the convex
/// hull of the charge, so a small margin suffices.
pub fn search_box(f: &FieldEvaluator, config: &SearchConfig) -> Aabb {
    let bbox = f.knot_bbox();
    bbox.inflate(config.box_margin * bbox.diagonal())
}

/// Deterministic seed list: the regular grid followed by the random seeds.
pub fn seeds(bounds: &Aabb, config: &SearchConfig) -> Vec<Point> {
    let n = config.grid_resolution;
    let lo = bounds.lo();
    let ext = bounds.extent();
    let mut out = Vec::with_capacity(n * n * n + config.random_seeds);
    let coord = |i: usize| if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                out.push(lo + ext.component_mul(&Vector3::new(coord(i), coord(j), coord(k))));
            }
        }
    }
    let mut rng = SplitMix64::seed_from_u64(config.rng_seed);
    for _ in 0..config.random_seeds {
        let u = Vector3::new(
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
        );
        out.push(lo + ext.component_mul(&u));
    }
    out
}

struct Iterate {
    x: Point,
    grad_norm: f64,
}

fn newton_direction(gradient: &Vector3<f64>, hessian: &Matrix3<f64>) -> Vector3<f64> {
    let scale = hessian.norm();
    let eig = SymmetricEigen::new(*hessian);
    let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if scale > 0.0 && smallest > 1e-12 * scale {
        if let Some(inv) = hessian.try_inverse() {
            return -(inv * gradient);
        }
    }
    // descent on |∇Φ|²/2, whose gradient is H ∇Φ
    if scale > 0.0 {
        -(hessian * gradient) / (scale * scale)
    } else {
        -gradient
    }
}

fn step(f: &FieldEvaluator, x: &Point) -> Result<Iterate, FieldError> {
    let sample = f.evaluate_refined(x)?;
    let grad_norm = sample.gradient.norm();
    if grad_norm == 0.0 {
        return Ok(Iterate { x: *x, grad_norm });
    }
    let direction = newton_direction(&sample.gradient, &sample.hessian);
    let mut alpha = 1.0;
    for _ in 0..MAX_HALVINGS {
        let candidate = x + alpha * direction;
        if let Ok(g) = f.gradient_refined(&candidate) {
            let norm = g.norm();
            if norm < grad_norm {
                return Ok(Iterate {
                    x: candidate,
                    grad_norm: norm,
                });
            }
        }
        alpha *= 0.5;
    }
    Ok(Iterate { x: *x, grad_norm })
}

/// One damped Newton step `x − α H⁻¹ ∇Φ`, with `α ∈ {1, 1/2, 1/4, ...}`
/// chosen so that |∇Φ| decreases. Near-singular Hessians fall back to a
/// descent step on |∇Φ|². Returns `x` unchanged if no step decreases |∇Φ|.
pub fn newton_step(f: &FieldEvaluator, x: &Point) -> Result<Point, FieldError> {
    step(f, x).map(|it| it.x)
}

fn run_newton(f: &FieldEvaluator, seed: &Point, bounds: &Aabb, config: &SearchConfig) -> Option<Point> {
    let mut x = *seed;
    let mut grad_norm = f.gradient_refined(&x).ok()?.norm();
    for _ in 0..config.max_iter {
        if grad_norm <= config.newton_tol {
            return Some(x);
        }
        let next = step(f, &x).ok()?;
        if next.x == x {
            return None;
        }
        if !bounds.contains(&next.x) {
            return None;
        }
        x = next.x;
        grad_norm = next.grad_norm;
    }
    (grad_norm <= config.newton_tol).then_some(x)
}

/// Eigen-decomposes the Hessian at `x` and builds the classified point.
pub fn classify(f: &FieldEvaluator, x: &Point, degenerate_tol: f64) -> Result<CriticalPoint, CriticalError> {
    let sample = f.evaluate_refined(x)?;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sample.hessian).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let eigenvalues = [eigenvalues[0], eigenvalues[1], eigenvalues[2]];
    let position = [x.x, x.y, x.z];
    let scale = sample.hessian.norm();
    if eigenvalues.iter().any(|l| l.abs() < degenerate_tol * scale) || scale == 0.0 {
        return Err(CriticalError::Degenerate { position, eigenvalues });
    }
    let index = eigenvalues.iter().filter(|l| **l < 0.0).count();
    if !(1..=2).contains(&index) {
        return Err(CriticalError::UnexpectedIndex { position, index });
    }
    Ok(CriticalPoint {
        position,
        value: sample.potential,
        grad_norm: sample.gradient.norm(),
        eigenvalues,
        index,
    })
}

fn compare_points(a: &CriticalPoint, b: &CriticalPoint) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| a.position[0].total_cmp(&b.position[0]))
        .then_with(|| a.position[1].total_cmp(&b.position[1]))
        .then_with(|| a.position[2].total_cmp(&b.position[2]))
}

/// Locates, deduplicates and classifies the finite critical points of Φ.
///
/// Seeds inside the refined exclusion radius are skipped and trajectories that leave the search box are abandoned. The result is
/// sorted by critical value and is identical for identical inputs
/// regardless of thread count.
pub fn find_critical_points(
    f: &FieldEvaluator,
    config: &SearchConfig,
) -> Result<Vec<CriticalPoint>, CriticalError> {
    config.validate()?;
    let bounds = search_box(f, config);
    let dedup_tol = config
        .dedup_tol
        .unwrap_or(1e-6 * f.knot_bbox().diagonal());
    let admissible: Vec<Point> = seeds(&bounds, config)
        .into_iter()
        .filter(|s| f.distance_to_knot(s) >= f.refined_min_distance())
        .collect();
    let converged: Vec<Option<Point>> = admissible
        .par_iter()
        .map(|s| run_newton(f, s, &bounds, config))
        .collect();

    let mut unique: Vec<Point> = Vec::new();
    for p in converged.into_iter().flatten() {
        if unique.iter().all(|q| (q - p).norm() > dedup_tol) {
            unique.push(p);
        }
    }
    if unique.is_empty() {
        return Err(CriticalError::NoneFound);
    }
    let mut points = unique
        .iter()
        .map(|p| classify(f, p, config.degenerate_tol))
        .collect::<Result<Vec<_>, _>>()?;
    points.sort_by(compare_points);
    Ok(points)
}

/// Default clustering tolerance: `1e-5 · (V_max − V_min)`.
pub fn default_cluster_tol(points: &[CriticalPoint]) -> f64 {
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.value), hi.max(p.value))
    });
    if points.is_empty() {
        0.0
    } else {
        1e-5 * (hi - lo)
    }
}

/// Greedy grouping of value-sorted points: a point joins the current cluster
/// when its value lies within `cluster_tol` of the cluster mean.
pub fn cluster_by_value(points: &[CriticalPoint], cluster_tol: f64) -> Vec<CriticalCluster> {
    let mut clusters: Vec<CriticalCluster> = Vec::new();
    for p in points {
        match clusters.last_mut() {
            Some(c) if (p.value - c.value).abs() <= cluster_tol => {
                let k = c.points.len() as f64;
                c.value = (c.value * k + p.value) / (k + 1.0);
                c.points.push(p.clone());
            }
            _ => clusters.push(CriticalCluster {
                value: p.value,
                points: vec![p.clone()],
                m: 0,
                n: 0,
            }),
        }
    }
    for c in &mut clusters {
        c.m = c.points.iter().filter(|p| p.index == 1).count();
        c.n = c.points.iter().filter(|p| p.index == 2).count();
    }
    clusters
}

/// True when every cluster holds a single point.
pub fn is_distinct(clusters: &[CriticalCluster]) -> bool {
    clusters.iter().all(CriticalCluster::is_singleton)
}

/// `(m₁, m₂)`: numbers of finite critical points of index 1 and 2.
pub fn index_counts(points: &[CriticalPoint]) -> (usize, usize) {
    points.iter().fold((0, 0), |(a, b), p| match p.index {
        1 => (a + 1, b),
        2 => (a, b + 1),
        _ => (a, b),
    })
}
