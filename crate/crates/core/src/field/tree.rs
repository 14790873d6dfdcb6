//! Binary subdivision of the quadrature panels.
//!
//! Each panel of the base rule is split recursively into halves, every
//! sub-panel carrying its own Gauss–Legendre nodes, its arclength and a ball
//! `(mid, radius)` that contains the arc. Far from a panel its own nodes are
//! accurate; close to it the children are used instead. The same balls give
//! rigorous lower and upper bounds of the exact line integral over a region.

use std::num::NonZeroUsize;

use nalgebra::Vector3;

use super::kernel::{Accumulator, Node};
use super::quadrature::{map_to_interval, reference_nodes};
use crate::curve::{KnotCurve, PERIOD};

/// A panel's own nodes are used once the evaluation point is at least this
/// many panel radii from the panel midpoint.
const FAR_FACTOR: f64 = 3.0;

/// Bounds treat a panel as a whole once the region is this many panel radii
/// away; their relative width is then about twice the inverse.
const BOUND_FACTOR: f64 = 32.0;

/// Samples per panel used to bound the arc by a ball.
const BALL_SAMPLES: usize = 32;

#[derive(Debug, Clone)]
struct Panel {
    mid: Vector3<f64>,
    radius: f64,
    length: f64,
    nodes: (u32, u32),
    children: Option<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub(crate) struct PanelTree {
    panels: Vec<Panel>,
    roots: Vec<u32>,
    nodes: Vec<Node>,
    finest_radius: f64,
}

impl PanelTree {
    pub fn build(curve: &KnotCurve, base_panels: usize, nodes_per_panel: usize, depth: usize) -> Self {
        let degree = NonZeroUsize::new(nodes_per_panel).expect("validated by caller");
        let reference = reference_nodes(degree);
        let mut tree = PanelTree {
            panels: Vec::new(),
            roots: Vec::with_capacity(base_panels),
            nodes: Vec::new(),
            finest_radius: 0.0,
        };
        let width = PERIOD / base_panels as f64;
        for p in 0..base_panels {
            let a = p as f64 * width;
            let root = tree.build_panel(curve, &reference, a, a + width, depth);
            tree.roots.push(root);
        }
        tree
    }

    fn build_panel(
        &mut self,
        curve: &KnotCurve,
        reference: &[(f64, f64)],
        a: f64,
        b: f64,
        depth: usize,
    ) -> u32 {
        let start = self.nodes.len() as u32;
        let mut length = 0.0;
        for (t, w) in map_to_interval(reference, a, b) {
            let s = curve.eval(t);
            let weight = w * s.speed;
            length += weight;
            self.nodes.push([s.point.x, s.point.y, s.point.z, weight]);
        }
        let end = self.nodes.len() as u32;

        let mid = curve.point(0.5 * (a + b));
        let dt = (b - a) / BALL_SAMPLES as f64;
        let mut far: f64 = 0.0;
        let mut max_speed: f64 = 0.0;
        for j in 0..=BALL_SAMPLES {
            let s = curve.eval(a + j as f64 * dt);
            far = far.max((s.point - mid).norm());
            max_speed = max_speed.max(s.speed);
        }
        // any arc point is within half a sample step of a sample
        let radius = far + 0.55 * max_speed * dt;

        let index = self.panels.len() as u32;
        self.panels.push(Panel {
            mid,
            radius,
            length,
            nodes: (start, end),
            children: None,
        });
        if depth > 0 {
            let c = 0.5 * (a + b);
            let left = self.build_panel(curve, reference, a, c, depth - 1);
            let right = self.build_panel(curve, reference, c, b, depth - 1);
            self.panels[index as usize].children = Some((left, right));
        } else {
            self.finest_radius = self.finest_radius.max(radius);
        }
        index
    }

    /// Largest ball radius among the deepest panels.
    pub fn finest_radius(&self) -> f64 {
        self.finest_radius
    }

    /// Adaptive sum: a panel's nodes are used when the point is far from it,
    /// otherwise its children are visited.
    pub fn accumulate<const ORDER: u8>(&self, x: &Vector3<f64>) -> Accumulator<ORDER> {
        let mut acc = Accumulator::<ORDER>::default();
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.extend(self.roots.iter().rev());
        while let Some(i) = stack.pop() {
            let panel = &self.panels[i as usize];
            let dist = (x - panel.mid).norm();
            match panel.children {
                Some((l, r)) if dist < FAR_FACTOR * panel.radius => {
                    stack.push(r);
                    stack.push(l);
                }
                _ => {
                    let (s, e) = panel.nodes;
                    acc.add_nodes(&self.nodes[s as usize..e as usize], x);
                }
            }
        }
        acc
    }

    /// Bounds of `∫ ds / |x − r(s)|` over all `x` within `radius` of `center`.
    ///
    /// The upper bound is infinite when the region may touch the knot.
    pub fn potential_bounds(&self, center: &Vector3<f64>, radius: f64) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.extend(self.roots.iter().rev());
        while let Some(i) = stack.pop() {
            let panel = &self.panels[i as usize];
            let dist = (center - panel.mid).norm();
            let gap = dist - radius - panel.radius;
            let descend = match panel.children {
                Some(_) if gap > 0.0 => gap < BOUND_FACTOR * panel.radius,
                Some(_) => radius < panel.radius,
                None => false,
            };
            if descend {
                let (l, r) = panel.children.expect("checked above");
                stack.push(r);
                stack.push(l);
                continue;
            }
            lo += panel.length / (dist + radius + panel.radius);
            if gap > 0.0 {
                hi += panel.length / gap;
            } else {
                hi = f64::INFINITY;
            }
        }
        (lo, hi)
    }
}
