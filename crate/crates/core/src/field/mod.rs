//! Potential `Φ(x) = ∫ |r'(t)| / |x − r(t)| dt` of a uniformly charged knot,
//! with its gradient and Hessian, by composite Gauss–Legendre quadrature.
//!
//! Two evaluation paths exist:
//!
//! * [`FieldEvaluator::potential`], [`FieldEvaluator::gradient`],
//!   [`FieldEvaluator::hessian`] and [`FieldEvaluator::evaluate`] use the
//!   fixed base rule and refuse points closer than `min_distance` to the knot.
//! * The `*_refined` methods subdivide panels near the evaluation point, so
//!   they stay accurate down to a distance set by the finest panel. Critical
//!   point search and surface sampling use this path.

mod kernel;
mod quadrature;
mod tree;

pub use kernel::FieldSample;
pub use quadrature::QuadratureRule;

use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, KnotCurve, PERIOD};
use crate::geometry::{Aabb, Point};
use kernel::{Accumulator, Node};
use tree::PanelTree;

/// Newton steps used to refine the closest-point estimate.
const DISTANCE_NEWTON_STEPS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("point ({:.6}, {:.6}, {:.6}) is {distance:.3e} from the knot, closer than the admissible {min_distance:.3e}", point[0], point[1], point[2])]
    TooClose {
        point: [f64; 3],
        distance: f64,
        min_distance: f64,
    },
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
    #[error("curve is singular at quadrature node t = {t}")]
    SingularAtNode { t: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Quadrature and refinement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Exclusion radius of the base rule; `None` selects
    /// `4 · (2π / total_nodes) · max |r'|`.
    pub min_distance: Option<f64>,
    /// Number of binary subdivisions available to the refined path.
    pub refine_depth: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            panels: 16,
            nodes_per_panel: 16,
            min_distance: None,
            refine_depth: 8,
        }
    }
}

/// Quadrature-backed evaluator of Φ, ∇Φ and the Hessian of Φ.
///
/// Immutable after construction and safe to share between threads.
#[derive(Debug)]
pub struct FieldEvaluator {
    curve: KnotCurve,
    rule: QuadratureRule,
    nodes: Vec<Node>,
    config: FieldConfig,
    min_distance: f64,
    knot_length: f64,
    max_speed: f64,
    bbox: Aabb,
    tree: OnceLock<PanelTree>,
}

impl FieldEvaluator {
    pub fn new(curve: KnotCurve) -> Result<Self, FieldError> {
        FieldEvaluator::with_config(curve, FieldConfig::default())
    }

    pub fn with_config(curve: KnotCurve, config: FieldConfig) -> Result<Self, FieldError> {
        let rule = QuadratureRule::new(config.panels, config.nodes_per_panel).ok_or_else(|| {
            FieldError::InvalidRule(format!(
                "panels ({}) and nodes_per_panel ({}) must be positive",
                config.panels, config.nodes_per_panel
            ))
        })?;
        if config.refine_depth > 16 {
            return Err(FieldError::InvalidRule(format!(
                "refine_depth {} exceeds the maximum of 16",
                config.refine_depth
            )));
        }
        let mut nodes = Vec::with_capacity(rule.len());
        let mut knot_length = 0.0;
        let mut max_speed: f64 = 0.0;
        for &(t, w) in rule.nodes() {
            let s = curve.eval(t);
            if s.speed <= 0.0 || !s.speed.is_finite() {
                return Err(FieldError::SingularAtNode { t });
            }
            knot_length += w * s.speed;
            max_speed = max_speed.max(s.speed);
            nodes.push([s.point.x, s.point.y, s.point.z, w * s.speed]);
        }

        // bounding box from dense samples, padded by half the largest chord
        const BOX_SAMPLES: usize = 4096;
        let samples: Vec<(Point, f64)> = (0..BOX_SAMPLES)
            .map(|i| {
                let s = curve.eval(PERIOD * i as f64 / BOX_SAMPLES as f64);
                (s.point, s.speed)
            })
            .collect();
        let dense_speed = samples.iter().map(|s| s.1).fold(max_speed, f64::max);
        let sample_box = Aabb::from_points(samples.iter().map(|s| &s.0)).expect("non-empty");
        let bbox = sample_box.inflate(0.55 * dense_speed * PERIOD / BOX_SAMPLES as f64);

        let min_distance = match config.min_distance {
            Some(d) if d > 0.0 && d.is_finite() => d,
            Some(d) => {
                return Err(FieldError::InvalidRule(format!(
                    "min_distance must be positive, got {d}"
                )))
            }
            None => 4.0 * (PERIOD / rule.len() as f64) * dense_speed,
        };

        Ok(FieldEvaluator {
            curve,
            rule,
            nodes,
            config,
            min_distance,
            knot_length,
            max_speed: dense_speed,
            bbox,
            tree: OnceLock::new(),
        })
    }

    pub fn curve(&self) -> &KnotCurve {
        &self.curve
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    /// Exclusion radius of the base rule.
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// `L = ∫ |r'| dt`.
    pub fn knot_length(&self) -> f64 {
        self.knot_length
    }

    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    /// Axis-aligned box containing the knot.
    pub fn knot_bbox(&self) -> Aabb {
        self.bbox
    }

    fn tree(&self) -> &PanelTree {
        self.tree.get_or_init(|| {
            PanelTree::build(
                &self.curve,
                self.config.panels,
                self.config.nodes_per_panel,
                self.config.refine_depth,
            )
        })
    }

    /// Exclusion radius of the refined path.
    pub fn refined_min_distance(&self) -> f64 {
        0.5 * self.tree().finest_radius()
    }

    /// Distance from `x` to the knot: nearest quadrature node, then Newton on
    /// `t ↦ |x − r(t)|²`.
    pub fn distance_to_knot(&self, x: &Point) -> f64 {
        let (mut best_i, mut best) = (0, f64::INFINITY);
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (x - Vector3::new(n[0], n[1], n[2])).norm_squared();
            if d < best {
                best = d;
                best_i = i;
            }
        }
        let mut t = self.rule.nodes()[best_i].0;
        for _ in 0..DISTANCE_NEWTON_STEPS {
            let diff = self.curve.point(t) - x;
            let v = self.curve.velocity(t);
            let slope = 2.0 * diff.dot(&v);
            let curvature = 2.0 * (v.norm_squared() + diff.dot(&self.curve.acceleration(t)));
            if curvature <= 0.0 {
                break;
            }
            t -= slope / curvature;
            best = best.min((self.curve.point(t) - x).norm_squared());
        }
        best.sqrt()
    }

    fn check(&self, x: &Point, min_distance: f64) -> Result<(), FieldError> {
        let distance = self.distance_to_knot(x);
        if distance < min_distance || !distance.is_finite() {
            return Err(FieldError::TooClose {
                point: [x.x, x.y, x.z],
                distance,
                min_distance,
            });
        }
        Ok(())
    }

    fn base<const ORDER: u8>(&self, x: &Point) -> Accumulator<ORDER> {
        let mut acc = Accumulator::<ORDER>::default();
        acc.add_nodes(&self.nodes, x);
        acc
    }

    /// Φ(x) with the base rule.
    pub fn potential(&self, x: &Point) -> Result<f64, FieldError> {
        self.check(x, self.min_distance)?;
        Ok(self.base::<0>(x).potential())
    }

    /// ∇Φ(x) with the base rule. The electric field is its negation.
    pub fn gradient(&self, x: &Point) -> Result<Vector3<f64>, FieldError> {
        self.check(x, self.min_distance)?;
        Ok(self.base::<1>(x).gradient())
    }

    /// Hessian of Φ at `x` with the base rule.
    pub fn hessian(&self, x: &Point) -> Result<Matrix3<f64>, FieldError> {
        self.check(x, self.min_distance)?;
        Ok(self.base::<2>(x).finish().hessian)
    }

    /// Φ, ∇Φ and the Hessian from one node sweep of the base rule.
    pub fn evaluate(&self, x: &Point) -> Result<FieldSample, FieldError> {
        self.check(x, self.min_distance)?;
        Ok(self.base::<2>(x).finish())
    }

    /// Φ(x) with near-field panel refinement.
    pub fn potential_refined(&self, x: &Point) -> Result<f64, FieldError> {
        self.check(x, self.refined_min_distance())?;
        Ok(self.tree().accumulate::<0>(x).potential())
    }

    /// ∇Φ(x) with near-field panel refinement.
    pub fn gradient_refined(&self, x: &Point) -> Result<Vector3<f64>, FieldError> {
        self.check(x, self.refined_min_distance())?;
        Ok(self.tree().accumulate::<1>(x).gradient())
    }

    /// Φ, ∇Φ and the Hessian with near-field panel refinement.
    pub fn evaluate_refined(&self, x: &Point) -> Result<FieldSample, FieldError> {
        self.check(x, self.refined_min_distance())?;
        Ok(self.tree().accumulate::<2>(x).finish())
    }

    /// Refined Φ without the distance guard. Inside the exclusion radius the
    /// value is inaccurate but large, and infinite on a node.
    pub fn potential_unguarded(&self, x: &Point) -> f64 {
        self.tree().accumulate::<0>(x).potential()
    }

    /// Refined ∇Φ without the distance guard.
    pub fn gradient_unguarded(&self, x: &Point) -> Vector3<f64> {
        self.tree().accumulate::<1>(x).gradient()
    }

    /// Lower and upper bounds of the exact Φ over the ball `|x − center| ≤ radius`.
    pub fn potential_bounds(&self, center: &Point, radius: f64) -> (f64, f64) {
        self.tree().potential_bounds(center, radius)
    }

    /// `R = L / level`: since `Φ(x) ≤ L / dist(x, K)`, every point farther than
    /// `R` from the knot's bounding box has `Φ(x) < level`.
    pub fn enclosing_radius(&self, level: f64) -> f64 {
        self.knot_length / level
    }
}
