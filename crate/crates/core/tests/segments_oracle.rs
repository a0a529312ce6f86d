mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segvol_core::geometry::shapes::{cuboid, icosphere, icosphere_mesh, transform};
use segvol_core::{
    build_scene, build_segments, classify_nodes, LabeledMesh, Material, MeshLabel, Ray, Vec3, VolumeGrid,
};

/// Skin sphere holding a bone and an overlapping ligament capsule, plus a
/// muscle and a tendon crossing each other.
fn overlap_meshes() -> Vec<LabeledMesh> {
    vec![
        icosphere_mesh("skin", MeshLabel::Skin, Vec3::ZERO, 10.0, 3),
        icosphere_mesh("bone", MeshLabel::Tissue(Material::Bone), Vec3::new(-2.0, 0.0, 0.0), 3.5, 3),
        icosphere_mesh("ligament", MeshLabel::Tissue(Material::Ligament), Vec3::new(1.0, 0.5, 0.0), 3.0, 2),
        icosphere_mesh("muscle", MeshLabel::Tissue(Material::Muscle), Vec3::new(2.0, -4.0, 3.0), 3.0, 2),
        icosphere_mesh("tendon", MeshLabel::Tissue(Material::Tendon), Vec3::new(4.0, -4.0, 2.0), 2.0, 2),
    ]
}

fn random_exterior_ray(rng: &mut ChaCha8Rng, radius: f64, target: f64) -> Ray {
    let dir = loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let l = v.length();
        if l > 0.1 && l <= 1.0 {
            break v / l;
        }
    };
    let origin = dir * radius;
    let aim = Vec3::new(rng.random_range(-target..target), rng.random_range(-target..target), rng.random_range(-target..target));
    Ray::new(origin, (aim - origin).normalized())
}

#[test]
fn segment_midpoints_match_parity_oracle() {
    let meshes = overlap_meshes();
    let scene = build_scene(meshes.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut checked = 0;
    for _ in 0..400 {
        let ray = random_exterior_ray(&mut rng, 30.0, 9.0);
        let segs = build_segments(&scene.intersect_all(&ray), &scene);
        assert!(!segs.parity_warning);
        for s in segs.iter() {
            let p = ray.at(s.midpoint());
            assert_eq!(support::material_at(&meshes, p), Some(s.material), "ray {ray:?} segment {s:?}");
            checked += 1;
        }
        for w in segs.segments.windows(2) {
            assert!(w[0].t_exit <= w[1].t_enter);
        }
    }
    assert!(checked > 400);
}

#[test]
fn classified_nodes_match_parity_oracle() {
    let meshes = overlap_meshes();
    let scene = build_scene(meshes.clone()).unwrap();
    // odd spacing so that columns do not line up with mesh vertices
    let grid = VolumeGrid::from_fn([41, 37, 43], [0.53, 0.59, 0.51], Vec3::new(-10.7, -10.9, -10.8), |_| 1.0).unwrap();
    let labels = classify_nodes(&scene, &grid);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let [nx, ny, nz] = grid.dims();
    let mut non_empty = 0;
    for _ in 0..1000 {
        let (i, j, k) = (rng.random_range(0..nx), rng.random_range(0..ny), rng.random_range(0..nz));
        let p = grid.node_position(i, j, k);
        let want = support::material_at(&meshes, p);
        assert_eq!(labels[grid.index(i, j, k)], want, "node {i},{j},{k} at {p:?}");
        non_empty += want.is_some() as usize;
    }
    assert!(non_empty > 300);
}

#[test]
fn segment_boundaries_are_mesh_crossings() {
    // boundaries come from the meshes alone: tilted box inside a skin box,
    // each boundary equals the analytic plane crossing
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let rot = move |p: Vec3| Vec3::new(c * p.x - s * p.z, p.y, s * p.x + c * p.z);
    let (bv, bf) = transform(cuboid(Vec3::new(-3.0, -3.0, -3.0), Vec3::new(3.0, 3.0, 3.0)), rot);
    let (sv, sf) = cuboid(Vec3::splat(-8.0), Vec3::splat(8.0));
    let scene = build_scene(vec![
        LabeledMesh::new("skin", MeshLabel::Skin, sv, sf).unwrap(),
        LabeledMesh::new("bone", MeshLabel::Tissue(Material::Bone), bv, bf).unwrap(),
    ])
    .unwrap();
    for k in 0..20 {
        let y = -2.5 + k as f64 * 0.25;
        let ray = Ray::new(Vec3::new(-20.0, y, 0.1), Vec3::new(1.0, 0.0, 0.0));
        let segs = build_segments(&scene.intersect_all(&ray), &scene);
        assert_eq!(segs.len(), 3);
        // front face of the rotated box: the plane x' = -3 in the box frame,
        // i.e. c x + s z = -3 along z = 0.1
        let x_enter = (-3.0 - s * 0.1) / c;
        let x_exit = (3.0 - s * 0.1) / c;
        assert!((segs.segments[1].t_enter - (x_enter + 20.0)).abs() < 1e-9);
        assert!((segs.segments[1].t_exit - (x_exit + 20.0)).abs() < 1e-9);
        assert_eq!(segs.segments[1].material, Material::Bone);
        assert!((segs.segments[0].t_enter - 12.0).abs() < 1e-9);
    }
}

#[test]
fn holed_mesh_reports_parity() {
    let (v, mut f) = icosphere(Vec3::ZERO, 5.0, 2);
    f.remove(0);
    let scene = build_scene(vec![LabeledMesh::new("skin", MeshLabel::Skin, v, f).unwrap()]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut odd = 0;
    for _ in 0..3000 {
        let ray = random_exterior_ray(&mut rng, 20.0, 5.0);
        if build_segments(&scene.intersect_all(&ray), &scene).parity_warning {
            odd += 1;
        }
    }
    assert!(odd > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mesh_order_does_not_change_segments(seed in any::<u64>(), perm_seed in any::<u64>()) {
        let meshes = overlap_meshes();
        let mut shuffled = meshes.clone();
        let mut prng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..shuffled.len()).rev() {
            let j = prng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let a = build_scene(meshes).unwrap();
        let b = build_scene(shuffled).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let ray = random_exterior_ray(&mut rng, 30.0, 9.0);
            let sa = build_segments(&a.intersect_all(&ray), &a);
            let sb = build_segments(&b.intersect_all(&ray), &b);
            prop_assert_eq!(sa, sb);
        }
    }

    #[test]
    fn exterior_rays_have_even_crossings(seed in any::<u64>()) {
        let scene = build_scene(overlap_meshes()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let ray = random_exterior_ray(&mut rng, 30.0, 11.0);
            let counts = scene.intersect_all(&ray).counts_per_mesh(scene.mesh_count());
            prop_assert!(counts.iter().all(|c| c % 2 == 0), "{:?}", counts);
        }
    }
}
