use proptest::prelude::*;
use segvol_core::geometry::shapes::{cuboid_mesh, icosphere_mesh};
use segvol_core::{
    build_scene, Camera, Histogram, Material, MaterialPalette, MeshLabel, Renderer, Rgb, SampleSettings, Style,
    StyleParams, Transfer, Vec3, VolumeGrid,
};

#[test]
fn opaque_sphere_silhouette_matches_projected_disk() {
    let (r, d) = (2.0, 20.0);
    let scene = build_scene(vec![
        icosphere_mesh("skin", MeshLabel::Skin, Vec3::ZERO, 5.0, 3),
        icosphere_mesh("bone", MeshLabel::Tissue(Material::Bone), Vec3::ZERO, r, 5),
    ])
    .unwrap();
    let grid = VolumeGrid::from_fn([5, 5, 5], [3.0; 3], Vec3::splat(-6.0), |_| 1.0).unwrap();
    // invisible fat so only the bone shows
    let mut palette = MaterialPalette::default();
    palette.set(Material::Fat, Rgb::WHITE, 0.0);
    let transfer = Transfer::new(StyleParams::new(Style::FatEmphasized), palette, &grid).unwrap();
    let vfov: f64 = 20.0;
    let cam = Camera::new(Vec3::new(0.0, 0.0, d), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), vfov, 512, 512).unwrap();
    let renderer = Renderer::new(&scene, &grid, &transfer, cam, SampleSettings::new(0.1)).unwrap();
    let (fb, stats) = renderer.render_frame(0);
    assert_eq!(stats.parity_warnings, 0);
    let count = fb.pixels().iter().filter(|p| **p != Rgb::BLACK).count() as f64;

    // cone of half-angle asin(r/d) cut by the image plane at unit distance
    let tan_beta = (r / d).asin().tan();
    let pixel = 2.0 * (vfov.to_radians() / 2.0).tan() / 512.0;
    let expected = std::f64::consts::PI * tan_beta * tan_beta / (pixel * pixel);
    let rel = (count - expected).abs() / expected;
    assert!(rel < 0.01, "silhouette {count} px vs disk {expected:.1} px ({:.3}%)", 100.0 * rel);
}

/// Fat slab 0 <= z <= 10 whose brightness ramps along z.
fn ramp_slab() -> (segvol_core::Scene, VolumeGrid, Transfer) {
    let skin = cuboid_mesh("skin", MeshLabel::Skin, Vec3::new(-5.0, -5.0, 0.0), Vec3::new(5.0, 5.0, 10.0));
    let grid = VolumeGrid::from_fn([3, 3, 41], [5.0, 5.0, 0.25], Vec3::new(-5.0, -5.0, 0.0), |p| {
        (0.2 + 0.08 * p.z + 0.3 * (1.7 * p.z).sin().abs()) as f32
    })
    .unwrap();
    let mut palette = MaterialPalette::default();
    palette.set(Material::Fat, Rgb::WHITE, 0.05);
    let params = StyleParams { a: 1.0, b: 1.0, ..StyleParams::new(Style::FatEmphasized) };
    let transfer = Transfer::new(params, palette, &grid).unwrap();
    (build_scene(vec![skin]).unwrap(), grid, transfer)
}

#[test]
fn jittered_mean_matches_fine_reference() {
    let (scene, grid, transfer) = ramp_slab();
    let cam = Camera::new(Vec3::new(0.0, 0.0, -30.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 8.0, 6, 6).unwrap();
    let dt0 = 0.37;
    let mut mean = vec![0.0; 36];
    for seed in 0..100 {
        let r = Renderer::new(&scene, &grid, &transfer, cam, SampleSettings { seed, ..SampleSettings::new(dt0) }).unwrap();
        for (m, p) in mean.iter_mut().zip(r.render_frame(0).0.pixels()) {
            *m += p.r / 100.0;
        }
    }
    let fine = SampleSettings { jitter: false, opacity_reference: Some(dt0), ..SampleSettings::new(dt0 / 50.0) };
    let reference = Renderer::new(&scene, &grid, &transfer, cam, fine).unwrap().render_frame(0).0;
    for (m, p) in mean.iter().zip(reference.pixels()) {
        assert!((m - p.r).abs() / p.r <= 0.005, "mean {m} vs reference {}", p.r);
    }
}

#[test]
fn jitter_leaves_a_homogeneous_slab_unchanged() {
    let skin = cuboid_mesh("skin", MeshLabel::Skin, Vec3::new(-5.0, -5.0, 0.0), Vec3::new(5.0, 5.0, 10.0));
    let scene = build_scene(vec![skin]).unwrap();
    let grid = VolumeGrid::from_fn([3, 3, 3], [5.0; 3], Vec3::new(-5.0, -5.0, 0.0), |_| 0.5).unwrap();
    let transfer = Transfer::new(StyleParams::new(Style::FatEmphasized), MaterialPalette::default(), &grid).unwrap();
    let cam = Camera::new(Vec3::new(0.0, 0.0, -30.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 8.0, 4, 4).unwrap();
    let plain = Renderer::new(&scene, &grid, &transfer, cam, SampleSettings { jitter: false, ..SampleSettings::new(0.3) })
        .unwrap()
        .render_frame(0)
        .0;
    for seed in 0..10 {
        let j = Renderer::new(&scene, &grid, &transfer, cam, SampleSettings { seed, ..SampleSettings::new(0.3) })
            .unwrap()
            .render_frame(0)
            .0;
        for (a, b) in plain.pixels().iter().zip(j.pixels()) {
            for (x, y) in a.channels().iter().zip(b.channels()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_finite_and_in_range(
        skin_r in 1.0f64..6.0,
        bone in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0.2f64..4.0),
        muscle in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0.2f64..4.0),
        values in prop::collection::vec(0.0f32..1000.0, 27),
        cam_pos in (-15.0f64..15.0, -15.0f64..15.0, -15.0f64..15.0),
        dt0 in 0.05f64..2.0,
        reference in prop::option::of(0.05f64..2.0),
        interior in any::<bool>(),
        seed in any::<u64>(),
        a in 0.01f64..10.0,
        b in 0.1f64..4.0,
        bg in (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0),
    ) {
        let scene = build_scene(vec![
            icosphere_mesh("skin", MeshLabel::Skin, Vec3::ZERO, skin_r, 1),
            icosphere_mesh("bone", MeshLabel::Tissue(Material::Bone), Vec3::new(bone.0, bone.1, bone.2), bone.3, 1),
            icosphere_mesh("muscle", MeshLabel::Tissue(Material::Muscle), Vec3::new(muscle.0, muscle.1, muscle.2), muscle.3, 1),
        ]).unwrap();
        let grid = VolumeGrid::new([3, 3, 3], [3.0; 3], Vec3::splat(-3.0), values).unwrap();
        let style = if interior { Style::InteriorEmphasized } else { Style::FatEmphasized };
        let hist = Histogram::from_counts(0.0, grid.s_max() as f64, vec![3, 0, 9, 1]).unwrap();
        let params = StyleParams { a, b, fat_hist: Some(hist), ..StyleParams::new(style) };
        let transfer = Transfer::new(params, MaterialPalette::default(), &grid).unwrap();
        let pos = Vec3::new(cam_pos.0, cam_pos.1, cam_pos.2);
        prop_assume!(pos.length() > 1e-3 && pos.x.abs() + pos.z.abs() > 1e-3);
        let cam = Camera::new(pos, Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 50.0, 12, 9).unwrap();
        let settings = SampleSettings {
            opacity_reference: reference,
            seed,
            background: Rgb::new(bg.0, bg.1, bg.2),
            ..SampleSettings::new(dt0)
        };
        let (fb, _) = Renderer::new(&scene, &grid, &transfer, cam, settings).unwrap().render_frame(0);
        for p in fb.pixels() {
            for c in p.channels() {
                prop_assert!(c.is_finite() && (0.0..=1.0).contains(&c), "{p:?}");
            }
        }
    }
}
