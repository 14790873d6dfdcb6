//! Wavefront OBJ export and import of triangle meshes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use super::{SurfaceError, TriMesh};
use crate::geometry::Point;

/// Writes `v x y z` and 1-based `f i j k` records. The file appears
/// atomically: it is written to a temporary file in the same directory and
/// renamed into place.
pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<(), SurfaceError> {
    if mesh.is_empty() {
        return Err(SurfaceError::EmptyMesh);
    }
    let io = |source| SurfaceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        writeln!(w, "# level {}", mesh.level).map_err(io)?;
        for v in &mesh.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(io)?;
        }
        for t in &mesh.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Reads vertices and triangular faces. Texture and normal indices in
/// `f v/vt/vn` records are ignored; the level is taken from a `# level`
/// comment and is NaN without one.
pub fn read_obj(path: &Path) -> Result<TriMesh, SurfaceError> {
    let text = fs::read_to_string(path).map_err(|source| SurfaceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut mesh = TriMesh {
        level: f64::NAN,
        ..Default::default()
    };
    let mut faces = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let fail = |message: String| SurfaceError::ObjParse {
            path: path.to_path_buf(),
            line: n + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let xyz: Vec<f64> = fields
                    .take(3)
                    .map(|f| f.parse::<f64>().map_err(|e| fail(format!("bad coordinate {f:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
                if xyz.len() != 3 {
                    return Err(fail("vertex needs three coordinates".into()));
                }
                mesh.vertices.push(Point::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let idx: Vec<i64> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or(f);
                        head.parse::<i64>().map_err(|e| fail(format!("bad index {f:?}: {e}")))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(fail(format!("expected a triangle, got {} indices", idx.len())));
                }
                faces.push((n + 1, [idx[0], idx[1], idx[2]]));
            }
            Some("#") if line.trim_start().starts_with("# level") => {
                if let Ok(v) = line.trim_start()["# level".len()..].trim().parse() {
                    mesh.level = v;
                }
            }
            _ => {}
        }
    }
    let nv = mesh.vertices.len() as i64;
    for (line, idx) in faces {
        let mut tri = [0u32; 3];
        for (slot, &i) in tri.iter_mut().zip(&idx) {
            // negative indices count back from the last vertex
            let zero_based = if i < 0 { nv + i } else { i - 1 };
            if !(0..nv).contains(&zero_based) {
                return Err(SurfaceError::ObjParse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("index {i} outside 1..={nv}"),
                });
            }
            *slot = zero_based as u32;
        }
        mesh.triangles.push(tri);
    }
    if mesh.is_empty() {
        return Err(SurfaceError::EmptyMesh);
    }
    Ok(mesh)
}
