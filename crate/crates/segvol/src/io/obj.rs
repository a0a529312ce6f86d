//! Wavefront OBJ subset: `v x y z` and `f i j k ...`. Faces with more than
//! three corners are fan-triangulated; `i/t/n` corner forms and negative
//! (relative) indices are accepted; other directives are skipped.

use std::fmt::Write as _;
use std::path::Path;

use segvol_core::{LabeledMesh, MeshLabel, Vec3};

use super::{read_file, write_file, IoError};

pub fn read_mesh(path: &Path, label: MeshLabel, name: &str) -> Result<LabeledMesh, IoError> {
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    parse_obj(&text, name, label, &path.display().to_string())
}

pub fn parse_obj(text: &str, name: &str, label: MeshLabel, context: &str) -> Result<LabeledMesh, IoError> {
    let err = |line: usize, message: String| IoError::Line { context: context.into(), line, message };
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut corners: Vec<u32> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xyz: Vec<f64> = parts
                    .take(3)
                    .map(|p| p.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(lineno, format!("bad vertex coordinate: {e}")))?;
                if xyz.len() != 3 {
                    return Err(err(lineno, "vertex needs three coordinates".into()));
                }
                vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                corners.clear();
                for p in parts {
                    let idx = p.split('/').next().unwrap_or("");
                    let v: i64 = idx.parse().map_err(|_| err(lineno, format!("bad face index `{p}`")))?;
                    let n = vertices.len() as i64;
                    let resolved = if v > 0 { v - 1 } else { n + v };
                    if v == 0 || resolved < 0 || resolved >= n {
                        return Err(err(lineno, format!("face index {v} out of range ({n} vertices defined)")));
                    }
                    corners.push(resolved as u32);
                }
                if corners.len() < 3 {
                    return Err(err(lineno, "face needs at least three corners".into()));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    LabeledMesh::new(name, label, vertices, triangles).map_err(|source| IoError::Geometry { context: context.into(), source })
}

pub fn write_obj(path: &Path, mesh: &LabeledMesh) -> Result<(), IoError> {
    let mut s = String::new();
    let _ = writeln!(s, "# {} ({})", mesh.name(), mesh.label());
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    write_file(path, s.as_bytes())
}
