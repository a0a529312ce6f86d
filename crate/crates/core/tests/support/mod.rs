//! Independent reference implementations for tests: brute-force point in
//! mesh by crossing parity (no BVH, a different ray/triangle routine) and
//! exact rational compositing.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use segvol_core::{LabeledMesh, Material, MeshLabel, Rgb, Vec3};

/// Moller-Trumbore, counting only strictly interior crossings.
fn crosses(orig: Vec3, dir: Vec3, tri: [Vec3; 3]) -> bool {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-300 {
        return false;
    }
    let inv = 1.0 / det;
    let s = orig - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    e2.dot(q) * inv > 0.0
}

const ORACLE_DIRS: [Vec3; 5] = [
    Vec3::new(0.3119, 0.8412, 0.4416),
    Vec3::new(-0.7093, 0.1234, 0.6941),
    Vec3::new(0.1999, -0.5731, -0.7947),
    Vec3::new(-0.9012, -0.3011, 0.3118),
    Vec3::new(0.5050, 0.1010, -0.8571),
];

/// Majority vote over five skew directions of brute-force crossing parity.
pub fn point_in_mesh(mesh: &LabeledMesh, p: Vec3) -> bool {
    let mut votes = 0;
    for d in ORACLE_DIRS {
        let d = d.normalized();
        let mut n = 0;
        for i in 0..mesh.triangles().len() {
            if crosses(p, d, mesh.triangle(i)) {
                n += 1;
            }
        }
        votes += n % 2;
    }
    votes >= 3
}

/// Material at `p`: `None` outside every skin mesh, otherwise the
/// highest-priority tissue containing `p`, or fat.
pub fn material_at(meshes: &[LabeledMesh], p: Vec3) -> Option<Material> {
    let inside: Vec<&LabeledMesh> = meshes.iter().filter(|m| point_in_mesh(m, p)).collect();
    if !inside.iter().any(|m| m.label() == MeshLabel::Skin) {
        return None;
    }
    let rank = |m: Material| match m {
        Material::Bone => 4,
        Material::Tendon => 3,
        Material::Muscle => 2,
        Material::Ligament => 1,
        Material::Fat => 0,
    };
    Some(
        inside
            .iter()
            .filter_map(|m| match m.label() {
                MeshLabel::Tissue(t) => Some(t),
                MeshLabel::Skin => None,
            })
            .max_by_key(|&t| rank(t))
            .unwrap_or(Material::Fat),
    )
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Back-to-front recurrence evaluated in exact rational arithmetic, one
/// channel at a time, rounded to f64 at the end.
pub fn composite_exact(samples: &[(Rgb, f64)], background: Rgb) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (ch, slot) in out.iter_mut().enumerate() {
        let mut acc = exact(background.channels()[ch]);
        let one = BigRational::from_integer(BigInt::from(1));
        for &(c, a) in samples.iter().rev() {
            let a = exact(a);
            acc = &a * exact(c.channels()[ch]) + (&one - &a) * acc;
        }
        *slot = if acc.is_zero() { 0.0 } else { acc.to_f64().unwrap() };
    }
    out
}
