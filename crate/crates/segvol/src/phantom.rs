//! Synthetic hand-like scenes for tests, benchmarks and demos.
//!
//! A phantom is a cube volume of edge [`EXTENT`] mm with one skin
//! ellipsoid and 19 organ ellipsoids: 6 bones, 5 tendons, 5 muscles and
//! 3 ligaments. Tendons and ligaments overlap bones, so the priority rule
//! matters. Frame `f` bends the fingers slightly, so consecutive frames
//! differ.

use std::path::{Path, PathBuf};

use segvol_core::geometry::shapes::{icosphere, transform};
use segvol_core::{LabeledMesh, Material, MeshLabel, Vec3, VolumeGrid};

use crate::io::{self, Dtype, IoError};

pub const EXTENT: f64 = 128.0;

pub struct Phantom {
    pub grid: VolumeGrid,
    pub meshes: Vec<LabeledMesh>,
}

fn ellipsoid(name: String, label: MeshLabel, center: Vec3, radii: Vec3, subdiv: u32) -> LabeledMesh {
    let (v, t) = transform(icosphere(Vec3::ZERO, 1.0, subdiv), |p| {
        center + Vec3::new(p.x * radii.x, p.y * radii.y, p.z * radii.z)
    });
    LabeledMesh::new(name, label, v, t).expect("ellipsoid is a valid mesh")
}

/// Meshes of frame `frame`, `subdiv` icosphere subdivisions each.
pub fn phantom_meshes(frame: u32, subdiv: u32) -> Vec<LabeledMesh> {
    let l = EXTENT;
    let c = Vec3::splat(0.5 * l);
    let bend = 0.01 * l * (frame as f64 * 0.7).sin();
    let mut out = vec![ellipsoid("skin".into(), MeshLabel::Skin, c, Vec3::new(0.42 * l, 0.45 * l, 0.3 * l), subdiv + 1)];
    let tissue = MeshLabel::Tissue;
    let fingers: Vec<f64> = (0..5).map(|i| c.x + (i as f64 - 2.0) * 0.13 * l).collect();
    for (i, &x) in fingers.iter().enumerate() {
        let y = c.y + 0.12 * l;
        let z = c.z + bend * (i as f64 - 2.0) * 0.5;
        out.push(ellipsoid(format!("bone{i}"), tissue(Material::Bone), Vec3::new(x, y, z), Vec3::new(0.035 * l, 0.2 * l, 0.035 * l), subdiv));
        out.push(ellipsoid(
            format!("tendon{i}"),
            tissue(Material::Tendon),
            Vec3::new(x, y - 0.05 * l, z + 0.04 * l),
            Vec3::new(0.015 * l, 0.25 * l, 0.015 * l),
            subdiv,
        ));
        out.push(ellipsoid(
            format!("muscle{i}"),
            tissue(Material::Muscle),
            Vec3::new(x, c.y - 0.2 * l, z - 0.03 * l),
            Vec3::new(0.05 * l, 0.12 * l, 0.06 * l),
            subdiv,
        ));
    }
    out.push(ellipsoid("palm".into(), tissue(Material::Bone), Vec3::new(c.x, c.y - 0.15 * l, c.z), Vec3::new(0.2 * l, 0.06 * l, 0.04 * l), subdiv));
    for i in 0..3 {
        let x = c.x + (i as f64 - 1.0) * 0.2 * l;
        out.push(ellipsoid(
            format!("ligament{i}"),
            tissue(Material::Ligament),
            Vec3::new(x, c.y - 0.06 * l, c.z),
            Vec3::new(0.08 * l, 0.03 * l, 0.05 * l),
            subdiv,
        ));
    }
    out
}

/// Smooth MRI-like field: bright core, soft ripples, values in (0, 1000).
pub fn phantom_value(p: Vec3) -> f32 {
    let c = Vec3::splat(0.5 * EXTENT);
    let d = p - c;
    let r2 = d.dot(d) / (0.3 * EXTENT * 0.3 * EXTENT);
    let v = 420.0 + 300.0 * (-r2).exp() + 90.0 * (0.21 * p.x).sin() * (0.17 * p.y).cos() + 60.0 * (0.13 * p.z + 0.05 * p.x).sin();
    v as f32
}

/// Volume with `n` nodes per axis spanning the cube.
pub fn phantom_grid(n: usize) -> VolumeGrid {
    let h = EXTENT / (n - 1) as f64;
    VolumeGrid::from_fn([n; 3], [h; 3], Vec3::ZERO, phantom_value).expect("phantom grid is valid")
}

pub fn phantom(n: usize, frame: u32, subdiv: u32) -> Phantom {
    Phantom { grid: phantom_grid(n), meshes: phantom_meshes(frame, subdiv) }
}

/// Options for [`write_phantom_job`].
#[derive(Debug, Clone)]
pub struct PhantomJob {
    pub nodes: usize,
    pub frames: u32,
    pub subdiv: u32,
    pub width: u32,
    pub height: u32,
    /// Extra TOML appended at top level (before any table).
    pub extra: String,
}

impl Default for PhantomJob {
    fn default() -> Self {
        PhantomJob { nodes: 64, frames: 1, subdiv: 3, width: 64, height: 64, extra: String::new() }
    }
}

/// Writes per-frame volumes and meshes under `dir` plus `dir/job.toml`,
/// and returns the job file path.
pub fn write_phantom_job(dir: &Path, opts: &PhantomJob) -> Result<PathBuf, IoError> {
    let grid = phantom_grid(opts.nodes);
    let mut mesh_names = Vec::new();
    for f in 0..opts.frames {
        io::write_volume(&dir.join(format!("hand_{f:03}.vgrid")), &grid, Dtype::F32)?;
        for m in phantom_meshes(f, opts.subdiv) {
            io::write_obj(&dir.join(format!("{}_{f:03}.obj", m.name())), &m)?;
            if f == 0 {
                mesh_names.push((m.name().to_string(), m.label()));
            }
        }
    }
    let mut job = format!(
        "volume = \"hand_{{frame:03}}.vgrid\"\noutput = \"out/hand_{{frame:03}}.ppm\"\nframes = \"0..{}\"\n{}\n",
        opts.frames, opts.extra
    );
    for (name, label) in &mesh_names {
        job.push_str(&format!("\n[[mesh]]\npath = \"{name}_{{frame:03}}.obj\"\nlabel = \"{label}\"\nname = \"{name}\"\n"));
    }
    job.push_str(&format!("\n[camera]\nview = \"front\"\nwidth = {}\nheight = {}\n", opts.width, opts.height));
    let path = dir.join("job.toml");
    std::fs::write(&path, job).map_err(|source| IoError::Io { path: path.clone(), source })?;
    Ok(path)
}
