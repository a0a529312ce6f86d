//! Closed triangle meshes of simple solids, used for phantoms and tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{LabeledMesh, MeshLabel};
use crate::math::Vec3;

/// Geodesic sphere: a subdivided icosahedron with vertices on the sphere.
/// `subdivisions = 0` is the icosahedron itself (20 faces); each level
/// quadruples the face count.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let p = (1.0 + libm::sqrt(5.0)) / 2.0;
    // rotated so that two vertices sit on the z axis
    let raw = [
        Vec3::new(-1.0, p, 0.0),
        Vec3::new(1.0, p, 0.0),
        Vec3::new(-1.0, -p, 0.0),
        Vec3::new(1.0, -p, 0.0),
        Vec3::new(0.0, -1.0, p),
        Vec3::new(0.0, 1.0, p),
        Vec3::new(0.0, -1.0, -p),
        Vec3::new(0.0, 1.0, -p),
        Vec3::new(p, 0.0, -1.0),
        Vec3::new(p, 0.0, 1.0),
        Vec3::new(-p, 0.0, -1.0),
        Vec3::new(-p, 0.0, 1.0),
    ];
    let axis = raw[5].normalized();
    let mut unit: Vec<Vec3> = raw.iter().map(|v| rotate_onto_z(v.normalized(), axis)).collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints = alloc::collections::BTreeMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalized());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut unit);
            let bc = mid(b, c, &mut unit);
            let ca = mid(c, a, &mut unit);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = unit.into_iter().map(|u| center + u * radius).collect();
    (verts, faces)
}

/// Rotation taking `axis` to +z, applied to `v`.
fn rotate_onto_z(v: Vec3, axis: Vec3) -> Vec3 {
    let z = Vec3::new(0.0, 0.0, 1.0);
    let k = axis.cross(z);
    let s = k.length();
    let c = axis.dot(z);
    if s < 1e-15 {
        return v;
    }
    let k = k * (1.0 / s);
    // Rodrigues
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

pub fn icosphere_mesh(name: impl Into<String>, label: MeshLabel, center: Vec3, radius: f64, subdivisions: u32) -> LabeledMesh {
    let (v, f) = icosphere(center, radius, subdivisions);
    LabeledMesh::new(name, label, v, f).expect("icosphere is valid")
}

/// Outward-wound box with 12 triangles.
pub fn cuboid(min: Vec3, max: Vec3) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let corners = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];
    let verts = corners
        .iter()
        .map(|c| {
            Vec3::new(
                if c[0] == 0 { min.x } else { max.x },
                if c[1] == 0 { min.y } else { max.y },
                if c[2] == 0 { min.z } else { max.z },
            )
        })
        .collect();
    let faces = vec![
        [0, 2, 1], [0, 3, 2], // -z
        [4, 5, 6], [4, 6, 7], // +z
        [0, 1, 5], [0, 5, 4], // -y
        [3, 7, 6], [3, 6, 2], // +y
        [0, 4, 7], [0, 7, 3], // -x
        [1, 2, 6], [1, 6, 5], // +x
    ];
    (verts, faces)
}

pub fn cuboid_mesh(name: impl Into<String>, label: MeshLabel, min: Vec3, max: Vec3) -> LabeledMesh {
    let (v, f) = cuboid(min, max);
    LabeledMesh::new(name, label, v, f).expect("box is valid")
}

/// Applies `f` to every vertex, e.g. to rotate or shear a solid.
pub fn transform(mesh: (Vec<Vec3>, Vec<[u32; 3]>), f: impl Fn(Vec3) -> Vec3) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    (mesh.0.into_iter().map(f).collect(), mesh.1)
}
