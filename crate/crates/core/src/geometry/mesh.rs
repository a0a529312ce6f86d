use alloc::string::String;
use alloc::vec::Vec;

use super::{GeometryError, MeshLabel};
use crate::math::{Aabb, Vec3};

/// Closed triangle mesh enclosing one organ.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMesh {
    name: String,
    label: MeshLabel,
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    dropped_degenerate: usize,
}

impl LabeledMesh {
    /// Validates indices and drops zero-area triangles.
    pub fn new(
        name: impl Into<String>,
        label: MeshLabel,
        vertices: Vec<Vec3>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, GeometryError> {
        let name = name.into();
        if let Some(vertex) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex { mesh: name, vertex });
        }
        let n = vertices.len();
        for (triangle, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(GeometryError::IndexOutOfRange { mesh: name, triangle, index, vertex_count: n });
            }
        }
        let before = triangles.len();
        let triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| vertices[i as usize]);
                (b - a).cross(c - a).length() > 0.0
            })
            .collect();
        if triangles.is_empty() {
            return Err(GeometryError::EmptyMesh { mesh: name });
        }
        let dropped_degenerate = before - triangles.len();
        Ok(LabeledMesh { name, label, vertices, triangles, dropped_degenerate })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label(&self) -> MeshLabel {
        self.label
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    /// Number of zero-area triangles removed at construction.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v as usize])
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::EMPTY;
        for t in &self.triangles {
            for &v in t {
                b.grow(self.vertices[v as usize]);
            }
        }
        b
    }

    /// Same geometry under another label.
    pub fn with_label(mut self, label: MeshLabel) -> Self {
        self.label = label;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_out_of_range_index_naming_mesh() {
        let err = LabeledMesh::new(
            "radius",
            MeshLabel::Skin,
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 3]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            GeometryError::IndexOutOfRange { mesh: "radius".into(), triangle: 0, index: 3, vertex_count: 3 }
        );
        assert!(alloc::format!("{err}").contains("radius"));
    }

    #[test]
    fn drops_degenerate_triangles() {
        let v = vec![
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let m = LabeledMesh::new("m", MeshLabel::Skin, v, vec![[0, 1, 2], [0, 1, 3], [2, 2, 1]]).unwrap();
        assert_eq!(m.triangles().len(), 1);
        assert_eq!(m.dropped_degenerate(), 2);
    }

    #[test]
    fn all_degenerate_is_an_error() {
        let v = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        assert!(matches!(
            LabeledMesh::new("flat", MeshLabel::Skin, v, vec![[0, 1, 2]]),
            Err(GeometryError::EmptyMesh { .. })
        ));
    }
}
