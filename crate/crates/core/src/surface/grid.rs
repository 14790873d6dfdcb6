//! Sampling grids and the choice of resolution for a level.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ScalarField, SurfaceError};
use crate::critical::CriticalPoint;
use crate::field::FieldEvaluator;
use crate::geometry::{Aabb, Point};

/// Fewest cells allowed along any axis.
pub const MIN_CELLS: usize = 16;

/// Ray directions per knot sample when measuring the tube radius.
const TUBE_DIRECTIONS: usize = 8;
/// Growth factor of the outward ray march.
const TUBE_GROWTH: f64 = 1.25;
const TUBE_BISECTIONS: usize = 16;

/// Regular grid of `cells[i]` cells along axis `i` spanning `bounds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Aabb,
    pub cells: [usize; 3],
}

impl GridSpec {
    pub fn new(bounds: Aabb, cells: [usize; 3]) -> Result<Self, SurfaceError> {
        if let Some(axis) = (0..3).find(|&i| cells[i] < MIN_CELLS) {
            return Err(SurfaceError::InvalidGrid(format!(
                "{} cells along axis {axis}, at least {MIN_CELLS} required",
                cells[axis]
            )));
        }
        let extent = bounds.extent();
        if !(0..3).all(|i| extent[i].is_finite() && extent[i] > 0.0) {
            return Err(SurfaceError::InvalidGrid(format!("degenerate box {bounds:?}")));
        }
        if cells.iter().any(|&c| c >= u32::MAX as usize / 2) {
            return Err(SurfaceError::InvalidGrid(format!("resolution {cells:?} is too large")));
        }
        Ok(GridSpec { bounds, cells })
    }

    /// `resolution` cells along the longest axis and proportionally fewer,
    /// but at least [`MIN_CELLS`], along the others.
    pub fn with_resolution(bounds: Aabb, resolution: usize) -> Result<Self, SurfaceError> {
        let extent = bounds.extent();
        let longest = extent.max();
        let cells = [0, 1, 2].map(|i| {
            let c = (resolution as f64 * extent[i] / longest).ceil();
            if c.is_finite() {
                (c as usize).max(MIN_CELLS)
            } else {
                0
            }
        });
        GridSpec::new(bounds, cells)
    }

    /// Cell count along the longest axis.
    pub fn resolution(&self) -> usize {
        *self.cells.iter().max().expect("three axes")
    }

    pub fn spacing(&self) -> Point {
        let e = self.bounds.extent();
        Point::new(
            e.x / self.cells[0] as f64,
            e.y / self.cells[1] as f64,
            e.z / self.cells[2] as f64,
        )
    }

    /// Grid vertex `(i, j, k)`; the last index along each axis lands exactly
    /// on the upper bound.
    pub fn vertex(&self, i: usize, j: usize, k: usize) -> Point {
        let idx = [i, j, k];
        Point::from_fn(|a, _| {
            if idx[a] == self.cells[a] {
                self.bounds.max[a]
            } else {
                let t = idx[a] as f64 / self.cells[a] as f64;
                self.bounds.min[a] + t * (self.bounds.max[a] - self.bounds.min[a])
            }
        })
    }

    /// Same box with twice the cells along every axis.
    pub fn doubled(&self) -> GridSpec {
        GridSpec {
            bounds: self.bounds,
            cells: self.cells.map(|c| 2 * c),
        }
    }
}

/// How the grid for a level is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    /// Baseline cells along the longest axis of the box.
    pub resolution: usize,
    /// The box is the knot's bounding box grown by `(1 + margin) · L / level`.
    pub margin: f64,
    /// Cells required across the smallest feature of the level set.
    pub cells_per_feature: f64,
    /// Upper limit for the resolution raised by small features.
    pub max_resolution: usize,
    /// Knot samples used to measure the tube radius.
    pub tube_samples: usize,
    /// Re-extract at doubled resolution and require identical topology.
    pub stability_check: bool,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            resolution: 128,
            margin: 0.1,
            cells_per_feature: 2.0,
            max_resolution: 1024,
            tube_samples: 256,
            stability_check: true,
        }
    }
}

impl SurfaceConfig {
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |m: String| Err(SurfaceError::InvalidConfig(m));
        if self.resolution < MIN_CELLS {
            return bad(format!("resolution {} is below {MIN_CELLS}", self.resolution));
        }
        if self.max_resolution < self.resolution {
            return bad(format!(
                "max_resolution {} is below resolution {}",
                self.max_resolution, self.resolution
            ));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return bad(format!("margin must be positive, got {}", self.margin));
        }
        if !(self.cells_per_feature.is_finite() && self.cells_per_feature > 0.0) {
            return bad(format!(
                "cells_per_feature must be positive, got {}",
                self.cells_per_feature
            ));
        }
        if self.tube_samples < 16 {
            return bad(format!("tube_samples must be at least 16, got {}", self.tube_samples));
        }
        Ok(())
    }
}

/// A grid chosen for one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub grid: GridSpec,
    /// Smallest length scale of the level set that the grid must resolve.
    pub feature_size: f64,
    /// True when `max_resolution` prevented resolving `feature_size`.
    pub capped: bool,
}

/// Smallest distance from the knot, along rays normal to it, at which Φ
/// first drops below `level`. Infinite when no ray crosses within `L / level`.
pub fn tube_radius(field: &FieldEvaluator, level: f64, samples: usize) -> f64 {
    let start = 2.0 * field.refined_min_distance();
    let reach = field.enclosing_radius(level);
    let curve = field.curve();
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let t = s as f64 * TAU / samples as f64;
            let p = curve.point(t);
            let tangent = curve.velocity(t).normalize();
            let helper = if tangent.x.abs() < 0.9 { Point::x() } else { Point::y() };
            let u = tangent.cross(&helper).normalize();
            let v = tangent.cross(&u);
            (0..TUBE_DIRECTIONS)
                .map(|k| {
                    let angle = k as f64 * TAU / TUBE_DIRECTIONS as f64;
                    let dir = u * angle.cos() + v * angle.sin();
                    first_crossing(field, level, &p, &dir, start, reach)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn first_crossing(field: &FieldEvaluator, level: f64, p: &Point, dir: &Point, start: f64, reach: f64) -> f64 {
    let below = |d: f64| field.value(&(p + dir * d)) < level;
    if below(start) {
        return start;
    }
    let mut lo = start;
    loop {
        let hi = lo * TUBE_GROWTH;
        if hi > reach {
            return f64::INFINITY;
        }
        if below(hi) {
            let mut hi = hi;
            for _ in 0..TUBE_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if below(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        lo = hi;
    }
}

/// Half-width of the level set near a nondegenerate critical point, from the
/// quadratic model `Φ ≈ V + ½ Σ λᵢ yᵢ²`.
fn neck_width(point: &CriticalPoint, level: f64) -> f64 {
    let delta = level - point.value;
    point
        .eigenvalues
        .iter()
        .filter(|l| l.signum() == delta.signum())
        .map(|l| (2.0 * delta.abs() / l.abs()).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Box and resolution for extracting `Φ = level`.
///
/// The box clears the knot by `(1 + margin) · L / level`, so Φ is below the
/// level on its boundary. The resolution starts at `config.resolution` and
/// grows until `cells_per_feature` cells span the thinnest part of the tube
/// around the knot and the narrowest neck near any critical point.
pub fn plan_grid(
    field: &FieldEvaluator,
    level: f64,
    critical: &[CriticalPoint],
    config: &SurfaceConfig,
) -> Result<GridPlan, SurfaceError> {
    config.validate()?;
    if !(level.is_finite() && level > 0.0) {
        return Err(SurfaceError::InvalidLevel { level });
    }
    let clearance = (1.0 + config.margin) * field.enclosing_radius(level);
    let bounds = field.knot_bbox().inflate(clearance);

    let feature_size = critical
        .iter()
        .map(|p| neck_width(p, level))
        .fold(tube_radius(field, level, config.tube_samples), f64::min);
    let needed = (bounds.extent().max() * config.cells_per_feature / feature_size).ceil();
    let capped = needed > config.max_resolution as f64;
    let resolution = if capped {
        log::warn!(
            "level {level}: feature size {feature_size:.3e} needs resolution {needed}, capped at {}",
            config.max_resolution
        );
        config.max_resolution
    } else {
        (needed as usize).max(config.resolution)
    };
    Ok(GridPlan {
        grid: GridSpec::with_resolution(bounds, resolution)?,
        feature_size,
        capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin;

    fn unit_box() -> Aabb {
        Aabb::new(Point::new(-1.0, -1.0, -0.5), Point::new(1.0, 1.0, 0.5))
    }

    #[test]
    fn anisotropic_resolution() {
        let g = GridSpec::with_resolution(unit_box(), 64).unwrap();
        assert_eq!(g.cells, [64, 64, 32]);
        let g = GridSpec::with_resolution(unit_box(), 20).unwrap();
        assert_eq!(g.cells, [20, 20, 16]);
        assert!((g.spacing().x - 0.1).abs() < 1e-15);
    }

    #[test]
    fn vertices_span_the_box_exactly() {
        let g = GridSpec::new(unit_box(), [30, 17, 16]).unwrap();
        assert_eq!(g.vertex(0, 0, 0), unit_box().lo());
        assert_eq!(g.vertex(30, 17, 16), unit_box().hi());
        assert_eq!(g.doubled().cells, [60, 34, 32]);
    }

    #[test]
    fn rejects_coarse_or_flat_grids() {
        assert!(GridSpec::new(unit_box(), [15, 16, 16]).is_err());
        let flat = Aabb::new(Point::zeros(), Point::new(1.0, 1.0, 0.0));
        assert!(GridSpec::new(flat, [16, 16, 16]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SurfaceConfig::default().validate().is_ok());
        let c = SurfaceConfig {
            resolution: 8,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SurfaceConfig {
            max_resolution: 64,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn neck_width_uses_matching_curvature() {
        let p = CriticalPoint {
            position: [0.0; 3],
            value: 10.0,
            grad_norm: 0.0,
            eigenvalues: [-8.0, 2.0, 6.0],
            index: 1,
        };
        assert!((neck_width(&p, 10.5) - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert!((neck_width(&p, 9.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn circle_tube_radius_matches_fine_sweep() {
        let f = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
        let level = 12.0;
        let r = tube_radius(&f, level, 64);
        // the circle is symmetric, so sweep the half-plane through (1, 0, 0)
        // with small steps and keep the closest crossing
        let mut sweep = f64::INFINITY;
        for a in 0..360 {
            let angle = a as f64 * TAU / 360.0;
            let dir = Point::new(angle.cos(), 0.0, angle.sin());
            let mut d = 1e-3;
            while f.value(&(Point::x() + dir * d)) >= level {
                d += 1e-5;
            }
            sweep = sweep.min(d);
        }
        assert!((r - sweep).abs() < 0.02 * sweep, "tube {r}, sweep {sweep}");
    }

    #[test]
    fn plan_grows_resolution_for_thin_tubes() {
        let f = FieldEvaluator::new(builtin("circle", &[1.0]).unwrap()).unwrap();
        let config = SurfaceConfig::default();
        let low = plan_grid(&f, 3.0, &[], &config).unwrap();
        assert_eq!(low.grid.resolution(), 128);
        assert!(!low.capped);
        let high = plan_grid(&f, 14.0, &[], &config).unwrap();
        assert!(high.grid.resolution() > 128);
        let box_margin = (1.1 * f.enclosing_radius(14.0)) * 0.999;
        assert!(high.grid.bounds.max[0] > 1.0 + box_margin);
        assert!(matches!(plan_grid(&f, -1.0, &[], &config), Err(SurfaceError::InvalidLevel { .. })));
    }
}
