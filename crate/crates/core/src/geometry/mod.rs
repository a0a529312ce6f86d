//! Labeled organ meshes, ray/mesh intersection and priority-based material
//! segments along rays.

mod bvh;
mod classify;
mod mesh;
mod scene;
mod segments;
pub mod shapes;

use core::fmt;
use core::str::FromStr;

use alloc::string::String;

pub use classify::classify_nodes;
pub use mesh::LabeledMesh;
pub use scene::{build_scene, Hit, HitList, Scene};
pub use segments::{build_segments, build_segments_from, Segment, SegmentList};

/// Tissue classes, declared from highest to lowest priority.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Material {
    Bone,
    Tendon,
    Muscle,
    Ligament,
    Fat,
}

impl Material {
    pub const ALL: [Material; 5] = [
        Material::Bone,
        Material::Tendon,
        Material::Muscle,
        Material::Ligament,
        Material::Fat,
    ];

    /// Rank in `bone > tendon > muscle > ligament > fat`; larger wins.
    pub const fn priority(self) -> u8 {
        match self {
            Material::Bone => 4,
            Material::Tendon => 3,
            Material::Muscle => 2,
            Material::Ligament => 1,
            Material::Fat => 0,
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            Material::Bone => "bone",
            Material::Tendon => "tendon",
            Material::Muscle => "muscle",
            Material::Ligament => "ligament",
            Material::Fat => "fat",
        }
    }
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a mesh encloses. The skin bounds the region that gets rendered; its
/// interior is fat unless a tissue mesh also contains the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeshLabel {
    Skin,
    Tissue(Material),
}

impl MeshLabel {
    pub fn name(self) -> &'static str {
        match self {
            MeshLabel::Skin => "skin",
            MeshLabel::Tissue(m) => m.name(),
        }
    }
}

impl fmt::Display for MeshLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownLabel(pub String);

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown material label `{}` (expected skin, bone, tendon, muscle, ligament or fat)",
            self.0
        )
    }
}

impl core::error::Error for UnknownLabel {}

impl FromStr for MeshLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let label = match s.trim().to_ascii_lowercase().as_str() {
            "skin" => MeshLabel::Skin,
            "bone" | "bones" => MeshLabel::Tissue(Material::Bone),
            "tendon" | "tendons" => MeshLabel::Tissue(Material::Tendon),
            "muscle" | "muscles" => MeshLabel::Tissue(Material::Muscle),
            "ligament" | "ligaments" => MeshLabel::Tissue(Material::Ligament),
            "fat" => MeshLabel::Tissue(Material::Fat),
            _ => return Err(UnknownLabel(s.into())),
        };
        Ok(label)
    }
}

/// Multiset of the mesh labels containing the current ray position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ActiveSet {
    skin: u32,
    tissue: [u32; 5],
}

impl ActiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: MeshLabel) {
        match label {
            MeshLabel::Skin => self.skin += 1,
            MeshLabel::Tissue(m) => self.tissue[m.index()] += 1,
        }
    }

    pub fn remove(&mut self, label: MeshLabel) {
        let slot = match label {
            MeshLabel::Skin => &mut self.skin,
            MeshLabel::Tissue(m) => &mut self.tissue[m.index()],
        };
        *slot = slot.saturating_sub(1);
    }

    pub fn contains_skin(&self) -> bool {
        self.skin > 0
    }

    pub fn contains(&self, m: Material) -> bool {
        self.tissue[m.index()] > 0
    }

    pub fn clear(&mut self) {
        *self = Self::default();
    }
}

impl FromIterator<MeshLabel> for ActiveSet {
    fn from_iter<I: IntoIterator<Item = MeshLabel>>(iter: I) -> Self {
        let mut set = ActiveSet::new();
        for l in iter {
            set.insert(l);
        }
        set
    }
}

/// Highest-priority tissue in `active`; skin alone is fat.
///
/// Panics if `active` does not contain the skin: material is only defined
/// inside the skin.
pub fn assign_material(active: &ActiveSet) -> Material {
    assert!(active.contains_skin(), "material assignment outside the skin");
    // `Material::ALL` is in priority order.
    Material::ALL
        .into_iter()
        .find(|&m| active.contains(m))
        .unwrap_or(Material::Fat)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    EmptySceneList,
    NoSkin,
    IndexOutOfRange { mesh: String, triangle: usize, index: u32, vertex_count: usize },
    NonFiniteVertex { mesh: String, vertex: usize },
    /// Nothing left after degenerate triangles were dropped.
    EmptyMesh { mesh: String },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptySceneList => write!(f, "scene has no meshes"),
            GeometryError::NoSkin => write!(f, "scene has no mesh labeled skin"),
            GeometryError::IndexOutOfRange { mesh, triangle, index, vertex_count } => write!(
                f,
                "mesh `{mesh}`: triangle {triangle} references vertex {index} but the mesh has {vertex_count} vertices"
            ),
            GeometryError::NonFiniteVertex { mesh, vertex } => {
                write!(f, "mesh `{mesh}`: vertex {vertex} is not finite")
            }
            GeometryError::EmptyMesh { mesh } => {
                write!(f, "mesh `{mesh}` has no non-degenerate triangles")
            }
        }
    }
}

impl core::error::Error for GeometryError {}
