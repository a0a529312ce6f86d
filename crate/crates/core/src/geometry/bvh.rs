//! Binned-SAH bounding volume hierarchy over the triangles of every mesh,
//! queried for *all* intersections along a ray rather than the nearest one.

use alloc::vec::Vec;

use crate::math::{Aabb, Ray, Vec3};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Triangle {
    pub v: [Vec3; 3],
    pub mesh: u32,
}

impl Triangle {
    fn bounds(&self) -> Aabb {
        let mut b = Aabb::EMPTY;
        for &p in &self.v {
            b.grow(p);
        }
        b
    }

    fn centroid(&self) -> Vec3 {
        (self.v[0] + self.v[1] + self.v[2]) * (1.0 / 3.0)
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first triangle. Interior: index of the second child (the first
    /// child immediately follows its parent).
    offset: u32,
    /// Triangle count for leaves, zero for interior nodes.
    count: u32,
}

const BINS: usize = 16;
const MAX_LEAF: usize = 4;
const TRAVERSAL_COST: f64 = 1.0;
const INTERSECT_COST: f64 = 1.5;

pub(crate) struct Bvh {
    nodes: Vec<Node>,
    triangles: Vec<Triangle>,
}

/// Per-ray constants of the watertight ray/triangle test.
pub(crate) struct RayPrep {
    origin: Vec3,
    inv_dir: Vec3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

impl RayPrep {
    pub fn new(ray: &Ray) -> Self {
        let d = ray.dir;
        let kz = d.abs().max_axis();
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if d[kz] < 0.0 {
            core::mem::swap(&mut kx, &mut ky);
        }
        RayPrep {
            origin: ray.origin,
            inv_dir: Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z),
            kx,
            ky,
            kz,
            sx: d[kx] / d[kz],
            sy: d[ky] / d[kz],
            sz: 1.0 / d[kz],
        }
    }

    /// Ray parameter of the crossing with `tri`, if any, with `t > 0`.
    /// Edges and vertices count as inside, so a ray through a shared edge is
    /// reported by both adjacent triangles and never by neither.
    #[inline]
    pub fn intersect(&self, tri: &[Vec3; 3]) -> Option<f64> {
        let a = tri[0] - self.origin;
        let b = tri[1] - self.origin;
        let c = tri[2] - self.origin;
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let ax = a[kx] - self.sx * a[kz];
        let ay = a[ky] - self.sy * a[kz];
        let bx = b[kx] - self.sx * b[kz];
        let by = b[ky] - self.sy * b[kz];
        let cx = c[kx] - self.sx * c[kz];
        let cy = c[ky] - self.sy * c[kz];
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let az = self.sz * a[kz];
        let bz = self.sz * b[kz];
        let cz = self.sz * c[kz];
        let t = (u * az + v * bz + w * cz) / det;
        (t > 0.0).then_some(t)
    }
}

struct BuildItem {
    bounds: Aabb,
    centroid: Vec3,
    index: u32,
}

impl Bvh {
    pub fn build(triangles: Vec<Triangle>) -> Bvh {
        let mut items: Vec<BuildItem> = triangles
            .iter()
            .enumerate()
            .map(|(i, t)| BuildItem { bounds: t.bounds(), centroid: t.centroid(), index: i as u32 })
            .collect();
        let mut nodes = Vec::with_capacity(2 * items.len() / MAX_LEAF + 1);
        let n = items.len();
        build_node(&mut nodes, &mut items, 0, n);
        let ordered = items.iter().map(|it| triangles[it.index as usize]).collect();
        Bvh { nodes, triangles: ordered }
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map_or(Aabb::EMPTY, |n| n.bounds)
    }

    /// Calls `on_hit(t, mesh)` for every triangle crossing with `t > 0`.
    pub fn for_each_hit(&self, prep: &RayPrep, mut on_hit: impl FnMut(f64, u32)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = [0u32; 256];
        let mut top = 1usize;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top] as usize];
            if node.bounds.hit_interval(prep.origin, prep.inv_dir, 0.0, f64::INFINITY).is_none() {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                for tri in &self.triangles[start..start + node.count as usize] {
                    if let Some(t) = prep.intersect(&tri.v) {
                        on_hit(t, tri.mesh);
                    }
                }
            } else {
                let current = stack[top];
                stack[top] = current + 1;
                stack[top + 1] = node.offset;
                top += 2;
            }
        }
    }

    #[cfg(test)]
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            let n = &nodes[i];
            if n.count > 0 {
                1
            } else {
                1 + walk(nodes, i + 1).max(walk(nodes, n.offset as usize))
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }
}

fn build_node(nodes: &mut Vec<Node>, items: &mut [BuildItem], first: usize, len: usize) -> usize {
    let slice = &mut items[first..first + len];
    let mut bounds = Aabb::EMPTY;
    let mut cbounds = Aabb::EMPTY;
    for it in slice.iter() {
        bounds = bounds.union(&it.bounds);
        cbounds.grow(it.centroid);
    }
    let me = nodes.len();
    nodes.push(Node { bounds, offset: first as u32, count: len as u32 });
    if len <= MAX_LEAF {
        return me;
    }

    let axis = cbounds.extent().max_axis();
    let lo = cbounds.min[axis];
    let extent = cbounds.max[axis] - lo;
    if !(extent > 0.0) {
        // coincident centroids: split by count so the depth stays bounded
        return split_median(nodes, items, me, first, len);
    }

    let bin_of = |c: Vec3| (((c[axis] - lo) / extent * BINS as f64) as usize).min(BINS - 1);
    let mut bin_bounds = [Aabb::EMPTY; BINS];
    let mut bin_counts = [0usize; BINS];
    for it in slice.iter() {
        let b = bin_of(it.centroid);
        bin_bounds[b] = bin_bounds[b].union(&it.bounds);
        bin_counts[b] += 1;
    }

    // sweep from the right to get suffix areas, then pick the cheapest plane
    let mut right_area = [0.0f64; BINS];
    let mut acc = Aabb::EMPTY;
    let mut right_count = [0usize; BINS];
    let mut cnt = 0;
    for b in (1..BINS).rev() {
        acc = acc.union(&bin_bounds[b]);
        cnt += bin_counts[b];
        right_area[b] = acc.surface_area();
        right_count[b] = cnt;
    }
    let parent_area = bounds.surface_area().max(f64::MIN_POSITIVE);
    let mut best = (f64::INFINITY, 0usize);
    let mut left = Aabb::EMPTY;
    let mut left_count = 0;
    for b in 1..BINS {
        left = left.union(&bin_bounds[b - 1]);
        left_count += bin_counts[b - 1];
        if left_count == 0 || right_count[b] == 0 {
            continue;
        }
        let cost = TRAVERSAL_COST
            + INTERSECT_COST
                * (left.surface_area() * left_count as f64 + right_area[b] * right_count[b] as f64)
                / parent_area;
        if cost < best.0 {
            best = (cost, b);
        }
    }
    if best.0 >= INTERSECT_COST * len as f64 && len <= 16 {
        return me;
    }
    if best.1 == 0 {
        return split_median(nodes, items, me, first, len);
    }

    // partition by bin
    let mut i = 0;
    let mut j = slice.len();
    while i < j {
        if bin_of(slice[i].centroid) < best.1 {
            i += 1;
        } else {
            j -= 1;
            slice.swap(i, j);
        }
    }
    split_at(nodes, items, me, first, len, i)
}

fn split_median(nodes: &mut Vec<Node>, items: &mut [BuildItem], me: usize, first: usize, len: usize) -> usize {
    let slice = &mut items[first..first + len];
    let mut c = Aabb::EMPTY;
    for it in slice.iter() {
        c.grow(it.centroid);
    }
    let axis = c.extent().max_axis();
    slice.sort_unstable_by(|a, b| {
        a.centroid[axis]
            .partial_cmp(&b.centroid[axis])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });
    split_at(nodes, items, me, first, len, len / 2)
}

fn split_at(nodes: &mut Vec<Node>, items: &mut [BuildItem], me: usize, first: usize, len: usize, mid: usize) -> usize {
    if mid == 0 || mid == len {
        return me;
    }
    nodes[me].count = 0;
    build_node(nodes, items, first, mid);
    let right = build_node(nodes, items, first + mid, len - mid);
    nodes[me].offset = right as u32;
    me
}

/// Brute-force reference used by tests: every triangle, no hierarchy.
#[cfg(test)]
pub(crate) fn brute_force_hits(triangles: &[Triangle], prep: &RayPrep) -> Vec<(f64, u32)> {
    let mut out = Vec::new();
    for t in triangles {
        if let Some(h) = prep.intersect(&t.v) {
            out.push((h, t.mesh));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::geometry::shapes::icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tris_of(mesh_id: u32, verts: &[Vec3], idx: &[[u32; 3]]) -> Vec<Triangle> {
        idx.iter().map(|t| Triangle { v: t.map(|i| verts[i as usize]), mesh: mesh_id }).collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut tris = vec![];
        for (id, (c, r)) in [
            (Vec3::ZERO, 2.0),
            (Vec3::new(0.5, 0.2, 0.0), 0.7),
            (Vec3::new(-0.8, 0.0, 0.3), 0.9),
        ]
        .into_iter()
        .enumerate()
        {
            let (v, t) = icosphere(c, r, 3);
            tris.extend(tris_of(id as u32, &v, &t));
        }
        let bvh = Bvh::build(tris.clone());
        assert!(bvh.depth() < 40);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let o = Vec3::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let target = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let ray = Ray::new(o, (target - o).normalized());
            let prep = RayPrep::new(&ray);
            let mut got = vec![];
            bvh.for_each_hit(&prep, |t, m| got.push((t, m)));
            let mut want = brute_force_hits(&tris, &prep);
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got, want);
        }
    }

    #[test]
    fn shared_edge_is_never_missed() {
        // two triangles of a unit square, ray straight through the diagonal
        let v = [Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let tris = tris_of(0, &v, &[[0, 1, 2], [0, 2, 3]]);
        for k in 1..50 {
            let x = k as f64 / 50.0;
            let prep = RayPrep::new(&Ray::new(Vec3::new(x, x, -1.0), Vec3::new(0.0, 0.0, 1.0)));
            let hits = brute_force_hits(&tris, &prep);
            assert!(!hits.is_empty(), "diagonal crossing at {x} missed");
        }
    }
}
