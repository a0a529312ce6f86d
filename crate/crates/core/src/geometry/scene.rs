use alloc::vec;
use alloc::vec::Vec;

use super::bvh::{Bvh, RayPrep, Triangle};
use super::{GeometryError, LabeledMesh, MeshLabel};
use crate::math::{Aabb, Ray, Vec3};

/// One ray/mesh crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub mesh: u32,
}

/// Crossings along one ray, ascending in `t`, with coincident crossings of
/// the same mesh collapsed to one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HitList {
    hits: Vec<Hit>,
}

impl HitList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps hits that are already sorted and deduplicated.
    pub fn from_sorted(hits: Vec<Hit>) -> Self {
        debug_assert!(hits.windows(2).all(|w| w[0].t <= w[1].t));
        HitList { hits }
    }

    pub fn hits(&self) -> &[Hit] {
        &self.hits
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    /// Number of crossings per mesh id.
    pub fn counts_per_mesh(&self, mesh_count: usize) -> Vec<usize> {
        let mut c = vec![0; mesh_count];
        for h in &self.hits {
            c[h.mesh as usize] += 1;
        }
        c
    }
}

/// Immutable set of labeled meshes with a shared acceleration structure.
pub struct Scene {
    meshes: Vec<LabeledMesh>,
    bvh: Bvh,
    eps_t: f64,
}

/// Builds the BVH over every triangle. Mesh ids are positions in `meshes`.
pub fn build_scene(meshes: Vec<LabeledMesh>) -> Result<Scene, GeometryError> {
    if meshes.is_empty() {
        return Err(GeometryError::EmptySceneList);
    }
    if !meshes.iter().any(|m| m.label() == MeshLabel::Skin) {
        return Err(GeometryError::NoSkin);
    }
    let mut triangles = Vec::with_capacity(meshes.iter().map(|m| m.triangles().len()).sum());
    for (id, m) in meshes.iter().enumerate() {
        for i in 0..m.triangles().len() {
            triangles.push(Triangle { v: m.triangle(i), mesh: id as u32 });
        }
    }
    let bvh = Bvh::build(triangles);
    let eps_t = 1e-7 * bvh.bounds().diagonal();
    Ok(Scene { meshes, bvh, eps_t })
}

impl Scene {
    pub fn meshes(&self) -> &[LabeledMesh] {
        &self.meshes
    }

    pub fn mesh_count(&self) -> usize {
        self.meshes.len()
    }

    pub fn label(&self, mesh: u32) -> MeshLabel {
        self.meshes[mesh as usize].label()
    }

    pub fn bounds(&self) -> Aabb {
        self.bvh.bounds()
    }

    /// Hits closer than this along a ray are treated as simultaneous.
    pub fn eps_t(&self) -> f64 {
        self.eps_t
    }

    pub fn triangle_count(&self) -> usize {
        self.meshes.iter().map(|m| m.triangles().len()).sum()
    }

    /// All crossings with `t > 0`, sorted.
    pub fn intersect_all(&self, ray: &Ray) -> HitList {
        let mut hits = Vec::new();
        self.intersect_into(ray, &mut hits);
        HitList { hits }
    }

    /// Allocation-reusing form of [`Scene::intersect_all`].
    pub fn intersect_into(&self, ray: &Ray, out: &mut Vec<Hit>) {
        out.clear();
        let prep = RayPrep::new(ray);
        self.bvh.for_each_hit(&prep, |t, mesh| out.push(Hit { t, mesh }));
        out.sort_unstable_by(|a, b| a.t.total_cmp(&b.t).then(a.mesh.cmp(&b.mesh)));
        // A crossing through a shared edge or vertex is reported once per
        // incident triangle; keep only the first of each such run.
        let eps = self.eps_t;
        let mut kept = 0;
        for i in 0..out.len() {
            let h = out[i];
            let dup = out[..kept].iter().rev().take_while(|k| h.t - k.t < eps).any(|k| k.mesh == h.mesh);
            if !dup {
                out[kept] = h;
                kept += 1;
            }
        }
        out.truncate(kept);
    }

    /// Inside/outside state of `p` for each mesh, by crossing parity along
    /// three fixed skew directions (majority vote).
    pub fn containing_meshes(&self, p: Vec3) -> Vec<bool> {
        const DIRS: [Vec3; 3] = [
            Vec3::new(0.5773502691896258, 0.5773502691896258, 0.5773502691896258),
            Vec3::new(-0.2672612419124244, 0.8017837257372732, -0.5345224838248488),
            Vec3::new(0.6859943405700353, -0.1714985851425088, -core::f64::consts::FRAC_1_SQRT_2),
        ];
        let n = self.meshes.len();
        let mut votes = vec![0u8; n];
        let mut hits = Vec::new();
        for d in DIRS {
            self.intersect_into(&Ray::new(p, d.normalized()), &mut hits);
            let mut parity = vec![false; n];
            for h in &hits {
                parity[h.mesh as usize] ^= true;
            }
            for (v, inside) in votes.iter_mut().zip(parity) {
                *v += inside as u8;
            }
        }
        votes.into_iter().map(|v| v >= 2).collect()
    }
}
