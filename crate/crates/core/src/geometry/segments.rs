use alloc::vec;
use alloc::vec::Vec;

use super::{assign_material, ActiveSet, HitList, Material, Scene};

/// Ray interval `[t_enter, t_exit)` with a single material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t_enter: f64,
    pub t_exit: f64,
    pub material: Material,
}

impl Segment {
    pub fn new(t_enter: f64, t_exit: f64, material: Material) -> Self {
        Segment { t_enter, t_exit, material }
    }

    pub fn len(&self) -> f64 {
        self.t_exit - self.t_enter
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_enter + self.t_exit)
    }
}

/// Ordered, disjoint material segments inside the skin along one ray.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentList {
    pub segments: Vec<Segment>,
    /// Some mesh was still "inside" after the last crossing, i.e. it was hit
    /// an odd number of times. The dangling state is dropped.
    pub parity_warning: bool,
}

impl SegmentList {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Segment> {
        self.segments.iter()
    }

    /// Keeps only the parts of each segment within `[t0, t1]`.
    pub fn clip(&mut self, t0: f64, t1: f64) {
        self.segments.retain_mut(|s| {
            s.t_enter = s.t_enter.max(t0);
            s.t_exit = s.t_exit.min(t1);
            s.t_exit > s.t_enter
        });
    }
}

/// Segments for a ray whose origin lies outside every mesh.
pub fn build_segments(hits: &HitList, scene: &Scene) -> SegmentList {
    let mut out = SegmentList::default();
    let outside = vec![false; scene.mesh_count()];
    build_segments_from(hits.hits(), scene, &outside, &mut out);
    out
}

/// Walks the sorted crossings keeping the set of meshes the ray is inside
/// and emits one segment per interval between consecutive crossings while
/// the skin is in that set.
///
/// `start_inside[m]` is the state of mesh `m` at the ray origin. When the
/// origin is inside the skin the first segment starts at `t = eps_t`.
/// Crossings closer than `eps_t` form one event: all of them toggle
/// together, so no zero-length segment appears between an exit and an
/// entry at the same place.
pub fn build_segments_from(hits: &[super::Hit], scene: &Scene, start_inside: &[bool], out: &mut SegmentList) {
    out.segments.clear();
    out.parity_warning = false;
    let eps = scene.eps_t();

    let mut inside: Vec<bool> = start_inside.to_vec();
    inside.resize(scene.mesh_count(), false);
    let mut active = ActiveSet::new();
    for (m, &is_in) in inside.iter().enumerate() {
        if is_in {
            active.insert(scene.label(m as u32));
        }
    }

    let mut t_prev = eps;
    let mut i = 0;
    while i < hits.len() {
        let t_event = hits[i].t;
        if active.contains_skin() && t_event > t_prev {
            out.segments.push(Segment::new(t_prev, t_event, assign_material(&active)));
        }
        let mut j = i;
        while j < hits.len() && hits[j].t - t_event < eps {
            let m = hits[j].mesh as usize;
            let label = scene.label(hits[j].mesh);
            if inside[m] {
                active.remove(label);
            } else {
                active.insert(label);
            }
            inside[m] = !inside[m];
            j += 1;
        }
        t_prev = t_prev.max(t_event);
        i = j;
    }
    out.parity_warning = inside.iter().any(|&b| b);
}
