use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::curve::PERIOD;

/// Composite Gauss–Legendre rule on `[0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    panels: usize,
    nodes_per_panel: usize,
    nodes: Vec<(f64, f64)>,
}

impl QuadratureRule {
    /// `panels` equal sub-intervals with `nodes_per_panel` Gauss–Legendre
    /// nodes each. Returns `None` if either count is zero.
    pub fn new(panels: usize, nodes_per_panel: usize) -> Option<Self> {
        let degree = NonZeroUsize::new(nodes_per_panel)?;
        if panels == 0 {
            return None;
        }
        let reference = reference_nodes(degree);
        let width = PERIOD / panels as f64;
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        for p in 0..panels {
            let a = p as f64 * width;
            nodes.extend(map_to_interval(&reference, a, a + width));
        }
        Some(QuadratureRule {
            panels,
            nodes_per_panel,
            nodes,
        })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(t, weight)` pairs in increasing `t`.
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, sorted by node.
pub(crate) fn reference_nodes(degree: NonZeroUsize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(degree);
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

pub(crate) fn map_to_interval(
    reference: &[(f64, f64)],
    a: f64,
    b: f64,
) -> impl Iterator<Item = (f64, f64)> + '_ {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    reference.iter().map(move |(x, w)| (mid + half * x, half * w))
}
