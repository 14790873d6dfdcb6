//! Components, Euler characteristic, genus and flux of closed meshes.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ScalarField, SurfaceError, TriMesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub genus: u32,
    /// Outward flux of `E = −∇Φ`, once computed.
    pub flux: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    /// Ordered by the first triangle of each component.
    pub components: Vec<ComponentTopology>,
    pub total_genus: u32,
    #[serde(skip)]
    triangle_component: Vec<u32>,
}

impl TopologyReport {
    /// Component of each triangle, indexing `components`.
    pub fn triangle_component(&self) -> &[u32] {
        &self.triangle_component
    }

    pub fn genera(&self) -> Vec<u32> {
        self.components.iter().map(|c| c.genus).collect()
    }

    /// Sorted component genera; two extractions of one level set should agree
    /// on this regardless of component order.
    pub fn signature(&self) -> Vec<u32> {
        let mut g = self.genera();
        g.sort_unstable();
        g
    }
}

/// Checks that `mesh` is a closed, consistently oriented manifold and
/// computes the topology of each connected component.
pub fn topology(mesh: &TriMesh) -> Result<TopologyReport, SurfaceError> {
    if mesh.is_empty() {
        return Ok(TopologyReport {
            components: Vec::new(),
            total_genus: 0,
            triangle_component: Vec::new(),
        });
    }
    let nv = mesh.vertices.len();
    // undirected edge -> (uses, sum of +1 for low→high and −1 for high→low)
    let mut edges: HashMap<(u32, u32), (usize, i32)> = HashMap::with_capacity(3 * mesh.triangles.len() / 2);
    let mut sets = UnionFind::<u32>::new(nv);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = *tri;
        if a == b || b == c || a == c || tri.iter().any(|&v| v as usize >= nv) {
            return Err(SurfaceError::BadTriangle(t));
        }
        for (p, q) in [(a, b), (b, c), (c, a)] {
            let entry = edges.entry((p.min(q), p.max(q))).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += if p < q { 1 } else { -1 };
            sets.union(p, q);
        }
    }
    let mut sorted: Vec<_> = edges.into_iter().collect();
    sorted.sort_unstable_by_key(|(k, _)| *k);
    for &((p, q), (uses, direction)) in &sorted {
        if uses != 2 {
            return Err(SurfaceError::NonManifoldEdge(p, q, uses));
        }
        if direction != 0 {
            return Err(SurfaceError::InconsistentOrientation(p, q));
        }
    }

    let labels = sets.into_labeling();
    let mut component_of_root: HashMap<u32, u32> = HashMap::new();
    let triangle_component: Vec<u32> = mesh
        .triangles
        .iter()
        .map(|tri| {
            let next = component_of_root.len() as u32;
            *component_of_root.entry(labels[tri[0] as usize]).or_insert(next)
        })
        .collect();
    let count = component_of_root.len();
    let component = |v: u32| component_of_root[&labels[v as usize]] as usize;

    let mut faces = vec![0usize; count];
    for &c in &triangle_component {
        faces[c as usize] += 1;
    }
    let mut edge_count = vec![0usize; count];
    for ((p, _), _) in &sorted {
        edge_count[component(*p)] += 1;
    }
    let mut used = vec![false; nv];
    let mut vertex_count = vec![0usize; count];
    for tri in &mesh.triangles {
        for &v in tri {
            if !used[v as usize] {
                used[v as usize] = true;
                vertex_count[component(v)] += 1;
            }
        }
    }

    let mut components = Vec::with_capacity(count);
    for c in 0..count {
        let euler = vertex_count[c] as i64 - edge_count[c] as i64 + faces[c] as i64;
        if euler % 2 != 0 || euler > 2 {
            return Err(SurfaceError::EulerCharacteristic { component: c, euler });
        }
        components.push(ComponentTopology {
            vertices: vertex_count[c],
            edges: edge_count[c],
            faces: faces[c],
            euler_characteristic: euler,
            genus: ((2 - euler) / 2) as u32,
            flux: None,
        });
    }
    let total_genus = components.iter().map(|c| c.genus).sum();
    Ok(TopologyReport {
        components,
        total_genus,
        triangle_component,
    })
}

/// Outward flux of `E = −∇field` through each component, from the field at
/// every triangle centroid times the triangle's area vector.
pub fn flux<F: ScalarField + ?Sized>(field: &F, mesh: &TriMesh, report: &TopologyReport) -> Vec<f64> {
    let contributions: Vec<f64> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| -field.gradient(&mesh.centroid(t)).dot(&mesh.area_vector(t)))
        .collect();
    let mut totals = vec![0.0; report.components.len()];
    for (value, &c) in contributions.iter().zip(report.triangle_component()) {
        totals[c as usize] += value;
    }
    totals
}

/// [`topology`] with each component's flux filled in.
pub fn topology_with_flux<F: ScalarField + ?Sized>(
    field: &F,
    mesh: &TriMesh,
) -> Result<TopologyReport, SurfaceError> {
    let mut report = topology(mesh)?;
    let totals = flux(field, mesh, &report);
    for (component, value) in report.components.iter_mut().zip(totals) {
        component.flux = Some(value);
    }
    Ok(report)
}
