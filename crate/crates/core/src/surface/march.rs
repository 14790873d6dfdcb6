//! Marching tetrahedra over a hierarchy of cell blocks.
//!
//! The grid is split recursively into blocks. A block whose field bounds put
//! it entirely on one side of the level is dropped; the remaining blocks of
//! at most `LEAF_CELLS` cells per axis are sampled and contoured. Every cube
//! is cut into the six Kuhn tetrahedra around its main diagonal. Neighbouring
//! cubes then agree on the diagonals of shared faces, so the output is a
//! closed manifold without any ambiguous configuration.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridSpec, ScalarField, SurfaceError, TriMesh};
use crate::geometry::Point;

const LEAF_CELLS: usize = 4;

/// Interpolation parameters are kept this far from the edge ends, which
/// rules out zero-area triangles.
const CLAMP: f64 = 1e-3;

/// Relative gap between a block's bounds and the level required to drop the
/// block. It absorbs the difference between sampled and exact values.
const CERTIFY_GAP: f64 = 1e-6;

/// Corner `c` of a cube sits at offset `(c & 1, c >> 1 & 1, c >> 2 & 1)`.
/// Each tetrahedron follows one monotone path from corner 0 to corner 7.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStats {
    /// Field evaluations, grid samples and vertex checks together.
    pub evaluations: usize,
    /// Blocks that were sampled.
    pub leaves: usize,
    /// Blocks dropped because their bounds clear the level.
    pub certified_blocks: usize,
    /// Largest `|Φ(v) − level|` over mesh vertices `v`, in units of half the
    /// spread of the sampled values over the cell that produced `v`.
    pub max_residual_ratio: f64,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    lo: [usize; 3],
    hi: [usize; 3],
}

impl Block {
    fn touches_boundary(&self, grid: &GridSpec) -> bool {
        (0..3).any(|a| self.lo[a] == 0 || self.hi[a] == grid.cells[a])
    }

    fn split(&self) -> Vec<Block> {
        let halves = |a: usize| {
            let (lo, hi) = (self.lo[a], self.hi[a]);
            if hi - lo > LEAF_CELLS {
                let mid = lo + (hi - lo) / 2;
                vec![(lo, mid), (mid, hi)]
            } else {
                vec![(lo, hi)]
            }
        };
        let (xs, ys, zs) = (halves(0), halves(1), halves(2));
        let mut out = Vec::with_capacity(8);
        for &(z0, z1) in &zs {
            for &(y0, y1) in &ys {
                for &(x0, x1) in &xs {
                    out.push(Block {
                        lo: [x0, y0, z0],
                        hi: [x1, y1, z1],
                    });
                }
            }
        }
        out
    }

    fn is_leaf(&self) -> bool {
        (0..3).all(|a| self.hi[a] - self.lo[a] <= LEAF_CELLS)
    }
}

enum Fate {
    Dropped,
    Leaf(Block),
    Split(Vec<Block>),
}

fn classify<F: ScalarField + ?Sized>(
    field: &F,
    level: f64,
    grid: &GridSpec,
    block: Block,
) -> Result<Fate, SurfaceError> {
    let a = grid.vertex(block.lo[0], block.lo[1], block.lo[2]);
    let b = grid.vertex(block.hi[0], block.hi[1], block.hi[2]);
    if let Some((lo, hi)) = field.bounds(&(0.5 * (a + b)), 0.5 * (b - a).norm()) {
        let gap = CERTIFY_GAP * level.abs();
        if hi < level - gap {
            return Ok(Fate::Dropped);
        }
        if lo > level + gap {
            if block.touches_boundary(grid) {
                return Err(SurfaceError::Clipped {
                    level,
                    value: lo,
                    point: [a.x, a.y, a.z],
                });
            }
            return Ok(Fate::Dropped);
        }
    }
    Ok(if block.is_leaf() {
        Fate::Leaf(block)
    } else {
        Fate::Split(block.split())
    })
}

/// Triangles of one leaf, with vertices keyed by the grid edge they lie on.
#[derive(Default)]
struct LeafMesh {
    keys: Vec<(u64, u64)>,
    positions: Vec<Point>,
    triangles: Vec<[u32; 3]>,
    evaluations: usize,
    max_residual_ratio: f64,
}

fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

fn ideal(c: usize) -> Point {
    let [x, y, z] = corner_offset(c);
    Point::new(x as f64, y as f64, z as f64)
}

fn contour_leaf<F: ScalarField + ?Sized>(
    field: &F,
    level: f64,
    grid: &GridSpec,
    block: Block,
) -> Result<LeafMesh, SurfaceError> {
    let n = [0, 1, 2].map(|a| block.hi[a] - block.lo[a] + 1);
    let local = |x: usize, y: usize, z: usize| x + n[0] * (y + n[1] * z);
    let mut values = vec![0.0; n[0] * n[1] * n[2]];
    for z in 0..n[2] {
        for y in 0..n[1] {
            for x in 0..n[0] {
                let g = [block.lo[0] + x, block.lo[1] + y, block.lo[2] + z];
                let p = grid.vertex(g[0], g[1], g[2]);
                let v = field.value(&p);
                let on_boundary = (0..3).any(|a| g[a] == 0 || g[a] == grid.cells[a]);
                if on_boundary && (v >= level || v.is_nan()) {
                    return Err(SurfaceError::Clipped {
                        level,
                        value: v,
                        point: [p.x, p.y, p.z],
                    });
                }
                values[local(x, y, z)] = v;
            }
        }
    }

    let stride = [1, grid.cells[0] as u64 + 1, (grid.cells[0] as u64 + 1) * (grid.cells[1] as u64 + 1)];
    let mut out = LeafMesh {
        evaluations: values.len(),
        ..Default::default()
    };
    let mut lookup: HashMap<(u64, u64), u32> = HashMap::new();

    for z in 0..n[2] - 1 {
        for y in 0..n[1] - 1 {
            for x in 0..n[0] - 1 {
                let corners: [(u64, f64, [usize; 3]); 8] = std::array::from_fn(|c| {
                    let [dx, dy, dz] = corner_offset(c);
                    let g = [block.lo[0] + x + dx, block.lo[1] + y + dy, block.lo[2] + z + dz];
                    let id = g[0] as u64 * stride[0] + g[1] as u64 * stride[1] + g[2] as u64 * stride[2];
                    (id, values[local(x + dx, y + dy, z + dz)], g)
                });
                let inside = corners.map(|(_, v, _)| v >= level);
                if inside.iter().all(|&i| i) || inside.iter().all(|&i| !i) {
                    continue;
                }
                let (lowest, highest) = corners
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), c| (l.min(c.1), h.max(c.1)));
                let variation = highest - lowest;
                for tet in &TETS {
                    let ins: Vec<usize> = tet.iter().copied().filter(|&c| inside[c]).collect();
                    let outs: Vec<usize> = tet.iter().copied().filter(|&c| !inside[c]).collect();
                    let faces: Vec<[(usize, usize); 3]> = match (ins.len(), outs.len()) {
                        (1, 3) => vec![[(ins[0], outs[0]), (ins[0], outs[1]), (ins[0], outs[2])]],
                        (3, 1) => vec![[(ins[0], outs[0]), (ins[1], outs[0]), (ins[2], outs[0])]],
                        (2, 2) => {
                            let (a, b, c, d) = (ins[0], ins[1], outs[0], outs[1]);
                            vec![[(a, c), (a, d), (b, d)], [(a, c), (b, d), (b, c)]]
                        }
                        _ => continue,
                    };
                    let mean = |s: &[usize]| s.iter().map(|&c| ideal(c)).sum::<Point>() / s.len() as f64;
                    let outward = mean(&outs) - mean(&ins);
                    for mut face in faces {
                        let m = face.map(|(p, q)| 0.5 * (ideal(p) + ideal(q)));
                        if (m[1] - m[0]).cross(&(m[2] - m[0])).dot(&outward) < 0.0 {
                            face.swap(1, 2);
                        }
                        let tri = face.map(|(p, q)| {
                            let (a, b) = if corners[p].0 < corners[q].0 {
                                (corners[p], corners[q])
                            } else {
                                (corners[q], corners[p])
                            };
                            *lookup.entry((a.0, b.0)).or_insert_with(|| {
                                let pa = grid.vertex(a.2[0], a.2[1], a.2[2]);
                                let pb = grid.vertex(b.2[0], b.2[1], b.2[2]);
                                let t = ((level - a.1) / (b.1 - a.1)).clamp(CLAMP, 1.0 - CLAMP);
                                let pos = pa + t * (pb - pa);
                                let residual = (field.value(&pos) - level).abs() / (0.5 * variation);
                                out.evaluations += 1;
                                out.max_residual_ratio = out.max_residual_ratio.max(residual);
                                out.keys.push((a.0, b.0));
                                out.positions.push(pos);
                                (out.keys.len() - 1) as u32
                            })
                        });
                        out.triangles.push(tri);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Extracts `field = level` on `grid`. See [`extract_with_stats`].
pub fn extract_isosurface<F: ScalarField + ?Sized>(
    field: &F,
    level: f64,
    grid: &GridSpec,
) -> Result<TriMesh, SurfaceError> {
    extract_with_stats(field, level, grid).map(|(mesh, _)| mesh)
}

/// Extracts `field = level` on `grid` together with work counters.
///
/// Fails with [`SurfaceError::Clipped`] when the field reaches the level on
/// the grid boundary, since the surface would then be cut open.
pub fn extract_with_stats<F: ScalarField + ?Sized>(
    field: &F,
    level: f64,
    grid: &GridSpec,
) -> Result<(TriMesh, ExtractionStats), SurfaceError> {
    if !level.is_finite() {
        return Err(SurfaceError::InvalidLevel { level });
    }
    let mut stats = ExtractionStats::default();
    let mut leaves = Vec::new();
    let mut frontier = vec![Block {
        lo: [0; 3],
        hi: grid.cells,
    }];
    while !frontier.is_empty() {
        let fates = frontier
            .par_iter()
            .map(|&b| classify(field, level, grid, b))
            .collect::<Result<Vec<_>, _>>()?;
        stats.evaluations += frontier.len();
        frontier = Vec::new();
        for fate in fates {
            match fate {
                Fate::Dropped => stats.certified_blocks += 1,
                Fate::Leaf(b) => leaves.push(b),
                Fate::Split(children) => frontier.extend(children),
            }
        }
    }
    stats.leaves = leaves.len();

    let parts = leaves
        .par_iter()
        .map(|&b| contour_leaf(field, level, grid, b))
        .collect::<Result<Vec<_>, _>>()?;

    let mut mesh = TriMesh {
        level,
        ..Default::default()
    };
    let mut index: HashMap<(u64, u64), u32> = HashMap::new();
    for part in parts {
        stats.evaluations += part.evaluations;
        stats.max_residual_ratio = stats.max_residual_ratio.max(part.max_residual_ratio);
        let map: Vec<u32> = part
            .keys
            .iter()
            .zip(&part.positions)
            .map(|(key, pos)| {
                *index.entry(*key).or_insert_with(|| {
                    mesh.vertices.push(*pos);
                    (mesh.vertices.len() - 1) as u32
                })
            })
            .collect();
        mesh.triangles
            .extend(part.triangles.iter().map(|t| t.map(|i| map[i as usize])));
    }
    Ok((mesh, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::surface::{topology, AnalyticField};

    fn cube(half: f64, cells: usize) -> GridSpec {
        GridSpec::new(Aabb::new(Point::repeat(-half), Point::repeat(half)), [cells; 3]).unwrap()
    }

    #[test]
    fn kuhn_tetrahedra_tile_the_cube() {
        let volume: f64 = TETS
            .iter()
            .map(|t| {
                let [a, b, c, d] = t.map(ideal);
                ((b - a).cross(&(c - a))).dot(&(d - a)).abs() / 6.0
            })
            .sum();
        assert!((volume - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_is_closed_and_outward() {
        let field = AnalyticField::new(|x: &Point| 1.0 / x.norm());
        let (mesh, stats) = extract_with_stats(&field, 1.0, &cube(2.0, 32)).unwrap();
        let report = topology(&mesh).unwrap();
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.total_genus, 0);
        let volume: f64 = (0..mesh.triangles.len())
            .map(|t| mesh.centroid(t).dot(&mesh.area_vector(t)) / 3.0)
            .sum();
        assert!((volume - 4.0 / 3.0 * std::f64::consts::PI).abs() < 0.05, "volume {volume}");
        for v in &mesh.vertices {
            assert!((v.norm() - 1.0).abs() < 0.02);
        }
        assert!(stats.max_residual_ratio <= 1.0);
        assert!(mesh.min_triangle_area() > 1e-12);
    }

    #[test]
    fn boundary_contact_is_rejected() {
        let field = AnalyticField::new(|x: &Point| 1.0 / x.norm());
        let err = extract_isosurface(&field, 0.4, &cube(2.0, 16)).unwrap_err();
        assert!(matches!(err, SurfaceError::Clipped { .. }));
    }

    #[test]
    fn empty_when_level_is_never_reached() {
        let field = AnalyticField::new(|x: &Point| 1.0 / (1.0 + x.norm_squared()));
        let mesh = extract_isosurface(&field, 2.0, &cube(2.0, 16)).unwrap();
        assert!(mesh.is_empty());
    }

    #[test]
    fn two_blobs_give_two_components() {
        let field = AnalyticField::new(|x: &Point| {
            let a = Point::new(1.0, 0.0, 0.0);
            1.0 / (x - a).norm() + 1.0 / (x + a).norm()
        });
        let mesh = extract_isosurface(&field, 3.0, &cube(2.5, 48)).unwrap();
        let report = topology(&mesh).unwrap();
        assert_eq!(report.components.len(), 2);
        assert!(report.components.iter().all(|c| c.genus == 0));
    }

    #[test]
    fn output_is_deterministic() {
        let field = AnalyticField::new(|x: &Point| 1.0 / ((x.x * x.x + x.y * x.y).sqrt() - 1.2).hypot(x.z));
        let a = extract_isosurface(&field, 2.5, &cube(2.0, 40)).unwrap();
        let b = extract_isosurface(&field, 2.5, &cube(2.0, 40)).unwrap();
        assert_eq!(a, b);
    }
}
