//! Equipotential surfaces: isosurface extraction, mesh topology, flux and
//! OBJ files.
//!
//! The superlevel set `{Φ ≥ level}` is the inside. Extracted triangles are
//! wound so that their normals point out of it, toward decreasing Φ.

mod grid;
mod march;
mod obj;
mod topology;

pub use grid::{plan_grid, tube_radius, GridPlan, GridSpec, SurfaceConfig, MIN_CELLS};
pub use march::{extract_isosurface, extract_with_stats, ExtractionStats};
pub use obj::{read_obj, write_obj};
pub use topology::{flux, topology, topology_with_flux, ComponentTopology, TopologyReport};

use std::path::PathBuf;

use nalgebra::Vector3;
use thiserror::Error;

use crate::field::FieldEvaluator;
use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid surface settings: {0}")]
    InvalidConfig(String),
    #[error("level {level} is not a positive finite number")]
    InvalidLevel { level: f64 },
    #[error("surface is clipped by the grid: Φ = {value} ≥ {level} at boundary point ({:.4}, {:.4}, {:.4})", point[0], point[1], point[2])]
    Clipped {
        level: f64,
        value: f64,
        point: [f64; 3],
    },
    #[error("edge ({0}, {1}) belongs to {2} triangles instead of 2")]
    NonManifoldEdge(u32, u32, usize),
    #[error("edge ({0}, {1}) is traversed in the same direction by both of its triangles")]
    InconsistentOrientation(u32, u32),
    #[error("triangle {0} repeats a vertex or points past the vertex list")]
    BadTriangle(usize),
    #[error("component {component} has Euler characteristic {euler}, impossible for a closed orientable surface")]
    EulerCharacteristic { component: usize, euler: i64 },
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("{path}:{line}: {message}")]
    ObjParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A scalar field that can be contoured.
pub trait ScalarField: Sync {
    fn value(&self, x: &Point) -> f64;

    fn gradient(&self, x: &Point) -> Vector3<f64>;

    /// Lower and upper bounds of the field over the ball `|x − center| ≤ radius`,
    /// when the field can supply rigorous ones. Extraction uses them to skip
    /// blocks of cells that the surface cannot cross.
    fn bounds(&self, _center: &Point, _radius: f64) -> Option<(f64, f64)> {
        None
    }
}

impl ScalarField for FieldEvaluator {
    /// Refined potential without the distance guard. A point sitting on a
    /// quadrature node maps to `f64::MAX`, which is inside every surface.
    fn value(&self, x: &Point) -> f64 {
        let v = self.potential_unguarded(x);
        if v.is_nan() || v > f64::MAX {
            f64::MAX
        } else {
            v
        }
    }

    fn gradient(&self, x: &Point) -> Vector3<f64> {
        self.gradient_unguarded(x)
    }

    fn bounds(&self, center: &Point, radius: f64) -> Option<(f64, f64)> {
        Some(self.potential_bounds(center, radius))
    }
}

/// A field given by a closure, with a central-difference gradient.
pub struct AnalyticField<F> {
    f: F,
}

impl<F: Fn(&Point) -> f64 + Sync> AnalyticField<F> {
    pub fn new(f: F) -> Self {
        AnalyticField { f }
    }
}

impl<F: Fn(&Point) -> f64 + Sync> ScalarField for AnalyticField<F> {
    fn value(&self, x: &Point) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &Point) -> Vector3<f64> {
        let h = 1e-6 * x.norm().max(1.0);
        Vector3::from_fn(|i, _| {
            let mut e = Vector3::zeros();
            e[i] = h;
            ((self.f)(&(x + e)) - (self.f)(&(x - e))) / (2.0 * h)
        })
    }
}

/// Indexed triangle mesh of one level set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[u32; 3]>,
    pub level: f64,
}

impl TriMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Half the cross product of two edges; its length is the area and it
    /// points along the triangle normal.
    pub fn area_vector(&self, triangle: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangles[triangle].map(|i| self.vertices[i as usize]);
        0.5 * (b - a).cross(&(c - a))
    }

    pub fn centroid(&self, triangle: usize) -> Point {
        let [a, b, c] = self.triangles[triangle].map(|i| self.vertices[i as usize]);
        (a + b + c) / 3.0
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area_vector(t).norm()).sum()
    }

    /// Smallest triangle area.
    pub fn min_triangle_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.area_vector(t).norm())
            .fold(f64::INFINITY, f64::min)
    }
}
