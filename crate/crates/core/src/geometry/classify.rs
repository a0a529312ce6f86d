use alloc::vec;
use alloc::vec::Vec;

use super::{build_segments_from, Hit, Material, Scene, SegmentList};
use crate::math::{Ray, Vec3};
use crate::volume::VolumeGrid;

/// Material of every grid node (`None` outside the skin), in grid order.
///
/// One +z ray per (i, j) column starts below both the scene and the grid;
/// its segments label the nodes they contain, so node labels agree with what
/// a render-time ray through the same points would assign.
pub fn classify_nodes(scene: &Scene, grid: &VolumeGrid) -> Vec<Option<Material>> {
    let [nx, ny, nz] = grid.dims();
    let mut labels = vec![None; grid.node_count()];
    let sb = scene.bounds();
    let gb = grid.bounds();
    let margin = 1.0 + 0.01 * sb.diagonal();
    let z0 = sb.min.z.min(gb.min.z) - margin;
    let outside = vec![false; scene.mesh_count()];
    let mut hits: Vec<Hit> = Vec::new();
    let mut segs = SegmentList::default();
    let dir = Vec3::new(0.0, 0.0, 1.0);

    for j in 0..ny {
        for i in 0..nx {
            let p = grid.node_position(i, j, 0);
            if p.x < sb.min.x || p.x > sb.max.x || p.y < sb.min.y || p.y > sb.max.y {
                continue;
            }
            let origin = Vec3::new(p.x, p.y, z0);
            scene.intersect_into(&Ray::new(origin, dir), &mut hits);
            build_segments_from(&hits, scene, &outside, &mut segs);
            let mut s = 0;
            for k in 0..nz {
                let t = grid.node_position(i, j, k).z - z0;
                while s < segs.segments.len() && segs.segments[s].t_exit <= t {
                    s += 1;
                }
                match segs.segments.get(s) {
                    Some(seg) if seg.t_enter <= t => labels[grid.index(i, j, k)] = Some(seg.material),
                    Some(_) => {}
                    None => break,
                }
            }
        }
    }
    labels
}
