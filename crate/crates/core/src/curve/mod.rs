//! Closed parametric curves `r(t)`, `t ∈ [0, 2π]`, given as expression trees.

mod builtin;
mod expr;
mod parse;
mod perturb;

pub use builtin::{builtin, BUILTIN_NAMES, PAPER_TREFOIL_SOURCE};
pub use expr::Expr;
pub use parse::{parse_components, parse_expr};
pub use perturb::{perturb, PERTURBATION_ORDER};

use std::f64::consts::TAU;

use nalgebra::Vector3;
use thiserror::Error;

/// Parameter period of every knot curve.
pub const PERIOD: f64 = TAU;

/// Samples used by the construction-time regularity check.
const REGULARITY_SAMPLES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier '{name}' at position {position} (only `t`, `pi`, `sin`, `cos` are known)")]
    UnknownIdentifier { name: String, position: usize },
    #[error("curve is not closed: |r(0) - r(2π)| = {gap:e} in coordinate {axis}")]
    OpenCurve { axis: usize, gap: f64 },
    #[error("singular parametrization: |r'(t)| = {speed:e} at t = {t}")]
    Singular { t: f64, speed: f64 },
    #[error("curve expression is not finite at t = {t}")]
    NotFinite { t: f64 },
    #[error("unknown builtin knot '{0}' (expected one of: paper_trefoil, circle, torus_knot)")]
    UnknownBuiltin(String),
    #[error("invalid parameters for builtin '{name}': {reason}")]
    InvalidParams { name: String, reason: String },
    #[error("perturbation amplitude must be finite and non-negative, got {0}")]
    InvalidAmplitude(f64),
    #[error("perturbation of amplitude {amplitude} breaks regularity ({source}); try a smaller amplitude")]
    PerturbationTooLarge {
        amplitude: f64,
        #[source]
        source: Box<CurveError>,
    },
}

/// Position, velocity and speed of a curve at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub point: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub speed: f64,
}

/// A validated closed, regular curve with cached first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotCurve {
    position: [Expr; 3],
    velocity: [Expr; 3],
    acceleration: [Expr; 3],
}

impl KnotCurve {
    /// Builds a curve from its coordinate expressions, differentiating
    /// symbolically and validating closedness and regularity.
    pub fn new(position: [Expr; 3]) -> Result<Self, CurveError> {
        let velocity = position.clone().map(|e| e.differentiate());
        let acceleration = velocity.clone().map(|e| e.differentiate());
        let curve = KnotCurve {
            position,
            velocity,
            acceleration,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Parses `"(x(t), y(t), z(t))"`.
    pub fn parse(source: &str) -> Result<Self, CurveError> {
        KnotCurve::new(parse_components(source)?)
    }

    fn validate(&self) -> Result<(), CurveError> {
        let start = self.raw_point(0.0);
        let end = self.raw_point(PERIOD);
        for axis in 0..3 {
            if !start[axis].is_finite() || !end[axis].is_finite() {
                return Err(CurveError::NotFinite { t: 0.0 });
            }
            let gap = (start[axis] - end[axis]).abs();
            if gap >= 1e-9 {
                return Err(CurveError::OpenCurve { axis, gap });
            }
        }
        let mut max_speed: f64 = 0.0;
        let mut min = (f64::INFINITY, 0.0);
        for i in 0..REGULARITY_SAMPLES {
            let t = PERIOD * i as f64 / REGULARITY_SAMPLES as f64;
            let p = self.raw_point(t);
            let v = self.raw_velocity(t);
            if !(p.iter().chain(v.iter()).all(|c| c.is_finite())) {
                return Err(CurveError::NotFinite { t });
            }
            let s = v.norm();
            max_speed = max_speed.max(s);
            if s < min.0 {
                min = (s, t);
            }
        }
        if min.0 <= 1e-8 * max_speed.max(f64::MIN_POSITIVE) || max_speed == 0.0 {
            return Err(CurveError::Singular {
                t: min.1,
                speed: min.0,
            });
        }
        Ok(())
    }

    fn raw_point(&self, t: f64) -> Vector3<f64> {
        Vector3::new(
            self.position[0].eval(t),
            self.position[1].eval(t),
            self.position[2].eval(t),
        )
    }

    fn raw_velocity(&self, t: f64) -> Vector3<f64> {
        Vector3::new(
            self.velocity[0].eval(t),
            self.velocity[1].eval(t),
            self.velocity[2].eval(t),
        )
    }

    /// `r(t)`, with `t` wrapped into `[0, 2π)`.
    pub fn point(&self, t: f64) -> Vector3<f64> {
        self.raw_point(t.rem_euclid(PERIOD))
    }

    /// `r'(t)`.
    pub fn velocity(&self, t: f64) -> Vector3<f64> {
        self.raw_velocity(t.rem_euclid(PERIOD))
    }

    /// `r''(t)`.
    pub fn acceleration(&self, t: f64) -> Vector3<f64> {
        let t = t.rem_euclid(PERIOD);
        Vector3::new(
            self.acceleration[0].eval(t),
            self.acceleration[1].eval(t),
            self.acceleration[2].eval(t),
        )
    }

    pub fn eval(&self, t: f64) -> CurveSample {
        let velocity = self.velocity(t);
        CurveSample {
            point: self.point(t),
            velocity,
            speed: velocity.norm(),
        }
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.position
    }

    pub fn derivatives(&self) -> &[Expr; 3] {
        &self.velocity
    }

    pub fn second_derivatives(&self) -> &[Expr; 3] {
        &self.acceleration
    }

    /// Source text accepted by [`KnotCurve::parse`].
    pub fn to_source(&self) -> String {
        format!(
            "({}, {}, {})",
            self.position[0], self.position[1], self.position[2]
        )
    }
}
