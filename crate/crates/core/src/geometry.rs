use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub type Point = Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Self {
        Aabb {
            min: [min.x, min.y, min.z],
            max: [max.x, max.y, max.z],
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let (mut lo, mut hi) = (*first, *first);
        for p in iter {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        Some(Aabb::new(lo, hi))
    }

    pub fn lo(&self) -> Point {
        Point::from(self.min)
    }

    pub fn hi(&self) -> Point {
        Point::from(self.max)
    }

    pub fn center(&self) -> Point {
        (self.lo() + self.hi()) * 0.5
    }

    pub fn extent(&self) -> Point {
        self.hi() - self.lo()
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn inflate(&self, margin: f64) -> Aabb {
        let m = Point::repeat(margin);
        Aabb::new(self.lo() - m, self.hi() + m)
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn distance(&self, p: &Point) -> f64 {
        let mut sq = 0.0;
        for i in 0..3 {
            let d = (self.min[i] - p[i]).max(p[i] - self.max[i]).max(0.0);
            sq += d * d;
        }
        sq.sqrt()
    }
}
