//! Render job configuration (TOML) and its validation.
//!
//! ```toml
//! volume = "frames/hand_{frame:04}.vgrid"   # {frame} or {frame:0N}
//! output = "out/hand_{frame:04}.png"        # .png or anything else = PPM
//! frames = "0..10"                          # a..b (exclusive), a..=b, or n
//! style = "interior"                        # or "fat-emphasized"
//! gamma = false
//!
//! [[mesh]]
//! path = "meshes/skin_{frame:04}.obj"
//! label = "skin"                            # skin bone tendon muscle ligament fat
//! name = "skin"
//!
//! [transfer]                                # if present, a and b are required
//! a = 2.0
//! b = 1.0
//! histogram = "fat_neutral.vhist"           # reuse instead of per-frame
//! bins = 256
//! smooth = false
//!
//! [palette.fat]
//! color = [177, 122, 101]
//! alpha = 0.6
//!
//! [camera]
//! view = "front"                            # or position / look_at / up
//! vfov = 30.0
//! width = 1024
//! height = 1024
//!
//! [sampling]
//! dt0 = 0.32                                # default: half the smallest voxel spacing
//! jitter = true
//! seed = 0
//! background = [0.0, 0.0, 0.0]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use segvol_core::{Aabb, Camera, CameraError, MaterialPalette, MeshLabel, Rgb, Style, StyleParams, Vec3};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobError {
    pub problems: Vec<String>,
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid job ({} problem{}):", self.problems.len(), if self.problems.len() == 1 { "" } else { "s" })?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for JobError {}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawJob {
    pub volume: Option<String>,
    pub output: Option<String>,
    pub frames: Option<String>,
    pub style: Option<String>,
    pub gamma: Option<bool>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub mesh: Vec<RawMesh>,
    pub transfer: Option<RawTransfer>,
    #[serde(default)]
    pub palette: BTreeMap<String, RawPaletteEntry>,
    pub camera: Option<RawCamera>,
    #[serde(default)]
    pub sampling: RawSampling,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawMesh {
    pub path: String,
    pub label: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawTransfer {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub histogram: Option<String>,
    pub bins: Option<usize>,
    pub smooth: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawPaletteEntry {
    /// 0-255 per channel.
    pub color: Option<[f64; 3]>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawCamera {
    pub view: Option<String>,
    pub position: Option<[f64; 3]>,
    pub look_at: Option<[f64; 3]>,
    pub up: Option<[f64; 3]>,
    pub vfov: Option<f64>,
    pub width: Option<u32>,
    pub height: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawSampling {
    pub dt0: Option<f64>,
    pub opacity_reference: Option<f64>,
    pub jitter: Option<bool>,
    pub seed: Option<u64>,
    pub background: Option<[f64; 3]>,
}

/// Values given on the command line. Applied to the raw configuration
/// before validation, so a flag behaves exactly like the same key in the
/// file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JobOverrides {
    pub frame: Option<u32>,
    pub frames: Option<String>,
    pub style: Option<String>,
    pub view: Option<String>,
    pub seed: Option<u64>,
    pub dt0: Option<f64>,
    pub threads: Option<usize>,
    pub gamma: Option<bool>,
    pub output: Option<String>,
}

impl JobOverrides {
    pub fn apply(&self, raw: &mut RawJob) {
        if let Some(f) = self.frame {
            raw.frames = Some(f.to_string());
        }
        if let Some(f) = &self.frames {
            raw.frames = Some(f.clone());
        }
        if let Some(s) = &self.style {
            raw.style = Some(s.clone());
        }
        if let Some(v) = &self.view {
            let cam = raw.camera.get_or_insert_with(RawCamera::default);
            cam.view = Some(v.clone());
            cam.position = None;
            cam.look_at = None;
            cam.up = None;
        }
        if let Some(s) = self.seed {
            raw.sampling.seed = Some(s);
        }
        if let Some(d) = self.dt0 {
            raw.sampling.dt0 = Some(d);
        }
        if let Some(t) = self.threads {
            raw.threads = Some(t);
        }
        if let Some(g) = self.gamma {
            raw.gamma = Some(g);
        }
        if let Some(o) = &self.output {
            raw.output = Some(o.clone());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Front,
    Back,
    Side,
}

impl View {
    pub fn name(self) -> &'static str {
        match self {
            View::Front => "front",
            View::Back => "back",
            View::Side => "side",
        }
    }

    fn parse(s: &str) -> Option<View> {
        match s.trim().to_ascii_lowercase().as_str() {
            "front" => Some(View::Front),
            "back" => Some(View::Back),
            "side" => Some(View::Side),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraPlacement {
    /// Preset resolved against the volume bounding box.
    View(View),
    Explicit { position: Vec3, look_at: Vec3, up: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSpec {
    pub placement: CameraPlacement,
    pub vfov: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraSpec {
    pub fn view_name(&self) -> &'static str {
        match self.placement {
            CameraPlacement::View(v) => v.name(),
            CameraPlacement::Explicit { .. } => "custom",
        }
    }

    /// Presets frame the whole box: the camera sits on the -z (front),
    /// +z (back) or +x (side) axis through the box centre, far enough that
    /// the bounding sphere fits the vertical field of view, with +y up.
    pub fn resolve(&self, bounds: &Aabb) -> Result<Camera, CameraError> {
        let (position, look_at, up) = match self.placement {
            CameraPlacement::Explicit { position, look_at, up } => (position, look_at, up),
            CameraPlacement::View(view) => {
                let c = bounds.center();
                let radius = 0.5 * bounds.diagonal();
                let dist = 1.05 * radius / (self.vfov.to_radians() * 0.5).sin();
                let offset = match view {
                    View::Front => Vec3::new(0.0, 0.0, -dist),
                    View::Back => Vec3::new(0.0, 0.0, dist),
                    View::Side => Vec3::new(dist, 0.0, 0.0),
                };
                (c + offset, c, Vec3::new(0.0, 1.0, 0.0))
            }
        };
        Camera::new(position, look_at, up, self.vfov, self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshEntry {
    pub path: String,
    pub label: MeshLabel,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub style: Style,
    pub a: f64,
    pub b: f64,
    /// Precomputed fat histogram to reuse for every frame.
    pub histogram: Option<PathBuf>,
    pub bins: usize,
    pub smooth: bool,
}

impl TransferConfig {
    pub fn params(&self) -> StyleParams {
        StyleParams { style: self.style, a: self.a, b: self.b, fat_hist: None, smooth_hist: self.smooth }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// `None`: half the smallest voxel spacing of each frame's volume.
    pub dt0: Option<f64>,
    pub opacity_reference: Option<f64>,
    pub jitter: bool,
    pub seed: u64,
    pub background: Rgb,
}

/// Frame numbers `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRange {
    pub start: u32,
    pub end: u32,
}

impl FrameRange {
    pub fn single(n: u32) -> Self {
        FrameRange { start: n, end: n + 1 }
    }

    pub fn len(&self) -> u32 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> std::ops::Range<u32> {
        self.start..self.end
    }

    pub fn parse(s: &str) -> Option<FrameRange> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..=") {
            let (a, b): (u32, u32) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            return (b >= a).then(|| FrameRange { start: a, end: b + 1 });
        }
        if let Some((a, b)) = s.split_once("..") {
            let (a, b): (u32, u32) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            return (b > a).then_some(FrameRange { start: a, end: b });
        }
        s.parse().ok().map(FrameRange::single)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderJob {
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    pub volume: String,
    pub meshes: Vec<MeshEntry>,
    pub transfer: TransferConfig,
    pub palette: MaterialPalette,
    pub camera: CameraSpec,
    pub sampling: SamplingConfig,
    pub output: String,
    pub frames: FrameRange,
    pub gamma: bool,
    pub threads: Option<usize>,
}

pub const DEFAULT_OUTPUT: &str = "frame_{frame:04}.ppm";
pub const DEFAULT_BINS: usize = 256;
pub const DEFAULT_VFOV: f64 = 30.0;
pub const DEFAULT_SIZE: u32 = 512;

/// Replaces `{frame}` / `{frame:0N}` with the frame number.
pub fn substitute_frame(pattern: &str, frame: u32) -> String {
    let mut out = String::with_capacity(pattern.len() + 8);
    let mut rest = pattern;
    while let Some(i) = rest.find("{frame") {
        out.push_str(&rest[..i]);
        let tail = &rest[i + "{frame".len()..];
        if let Some(after) = tail.strip_prefix('}') {
            out.push_str(&frame.to_string());
            rest = after;
        } else if let Some(close) = tail.find('}').filter(|_| tail.starts_with(":0")) {
            match tail[2..close].parse::<usize>() {
                Ok(width) => out.push_str(&format!("{frame:0width$}")),
                Err(_) => out.push_str(&rest[i..i + "{frame".len() + close + 1]),
            }
            rest = &tail[close + 1..];
        } else {
            out.push_str("{frame");
            rest = tail;
        }
    }
    out.push_str(rest);
    out
}

fn has_frame_placeholder(pattern: &str) -> bool {
    substitute_frame(pattern, 0) != substitute_frame(pattern, 1)
}

impl RenderJob {
    pub fn resolve(&self, pattern: &str, frame: u32) -> PathBuf {
        let p = PathBuf::from(substitute_frame(pattern, frame));
        if p.is_absolute() {
            p
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn volume_path(&self, frame: u32) -> PathBuf {
        self.resolve(&self.volume, frame)
    }

    pub fn mesh_path(&self, mesh: &MeshEntry, frame: u32) -> PathBuf {
        self.resolve(&mesh.path, frame)
    }

    pub fn output_path(&self, frame: u32) -> PathBuf {
        self.resolve(&self.output, frame)
    }
}

/// Reads, overrides and validates a job file.
pub fn parse_job(path: &Path, overrides: &JobOverrides) -> Result<RenderJob, JobError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| JobError { problems: vec![format!("cannot read job file {}: {e}", path.display())] })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_job_str(&text, &base, overrides)
}

pub fn parse_job_str(text: &str, base_dir: &Path, overrides: &JobOverrides) -> Result<RenderJob, JobError> {
    let mut raw: RawJob =
        toml::from_str(text).map_err(|e| JobError { problems: vec![format!("job file: {}", e.to_string().trim())] })?;
    overrides.apply(&mut raw);
    validate(raw, base_dir)
}

/// Turns a raw configuration into a complete job, or reports every problem
/// found.
pub fn validate(raw: RawJob, base_dir: &Path) -> Result<RenderJob, JobError> {
    let mut problems = Vec::new();

    let volume = raw.volume.clone().unwrap_or_else(|| {
        problems.push("`volume` is required".to_string());
        String::new()
    });

    let frames = match &raw.frames {
        None => FrameRange::single(0),
        Some(s) => FrameRange::parse(s).unwrap_or_else(|| {
            problems.push(format!("`frames = \"{s}\"`: expected `n`, `a..b` or `a..=b`"));
            FrameRange::single(0)
        }),
    };

    let mut meshes = Vec::new();
    for (i, m) in raw.mesh.iter().enumerate() {
        match m.label.parse::<MeshLabel>() {
            Ok(label) => meshes.push(MeshEntry {
                path: m.path.clone(),
                label,
                name: m.name.clone().unwrap_or_else(|| format!("{}#{i}", label)),
            }),
            Err(e) => problems.push(format!("mesh {i} ({}): {e}", m.path)),
        }
    }
    let skins = meshes.iter().filter(|m| m.label == MeshLabel::Skin).count();
    if skins == 0 && raw.mesh.iter().all(|m| m.label.parse::<MeshLabel>().is_ok()) {
        problems.push("no mesh is labeled `skin`".to_string());
    } else if skins > 1 {
        problems.push(format!("{skins} meshes are labeled `skin`; exactly one is allowed"));
    }

    let style = match &raw.style {
        None => Style::FatEmphasized,
        Some(s) => s.parse().unwrap_or_else(|_| {
            problems.push(format!("unknown style `{s}` (expected `interior` or `fat-emphasized`)"));
            Style::FatEmphasized
        }),
    };
    let transfer = {
        let t = raw.transfer.clone();
        let (a, b) = match &t {
            None => (StyleParams::DEFAULT_A, StyleParams::DEFAULT_B),
            Some(t) => {
                if t.a.is_none() {
                    problems.push("[transfer] is present but `a` is missing".to_string());
                }
                if t.b.is_none() {
                    problems.push("[transfer] is present but `b` is missing".to_string());
                }
                (t.a.unwrap_or(StyleParams::DEFAULT_A), t.b.unwrap_or(StyleParams::DEFAULT_B))
            }
        };
        if !(a.is_finite() && a > 0.0) {
            problems.push(format!("transfer gain a = {a} must be positive"));
        }
        if !(b.is_finite() && b > 0.0) {
            problems.push(format!("transfer exponent b = {b} must be positive"));
        }
        let t = t.unwrap_or_default();
        let bins = t.bins.unwrap_or(DEFAULT_BINS);
        if bins == 0 {
            problems.push("[transfer] bins must be at least 1".to_string());
        }
        let histogram = t.histogram.map(|h| {
            let p = PathBuf::from(h);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        });
        if let Some(h) = &histogram {
            if !h.is_file() {
                problems.push(format!("histogram file {} does not exist", h.display()));
            }
        }
        TransferConfig { style, a, b, histogram, bins, smooth: t.smooth.unwrap_or(false) }
    };

    let mut palette = MaterialPalette::default();
    for (name, entry) in &raw.palette {
        let m = match name.parse::<MeshLabel>() {
            Ok(MeshLabel::Tissue(m)) => m,
            Ok(MeshLabel::Skin) => {
                problems.push("[palette.skin]: skin has no color; use [palette.fat]".to_string());
                continue;
            }
            Err(e) => {
                problems.push(format!("[palette.{name}]: {e}"));
                continue;
            }
        };
        let color = match entry.color {
            Some(c) if c.iter().all(|v| (0.0..=255.0).contains(v)) => Rgb::new(c[0] / 255.0, c[1] / 255.0, c[2] / 255.0),
            Some(c) => {
                problems.push(format!("[palette.{name}] color {c:?} must be within 0..=255"));
                palette.color(m)
            }
            None => palette.color(m),
        };
        let alpha = match entry.alpha {
            Some(a) if (0.0..=1.0).contains(&a) => a,
            Some(a) => {
                problems.push(format!("[palette.{name}] alpha {a} must be within [0, 1]"));
                palette.alpha(m)
            }
            None => palette.alpha(m),
        };
        palette.set(m, color, alpha);
    }

    let camera = match &raw.camera {
        None => {
            problems.push("[camera] section is required".to_string());
            None
        }
        Some(c) => camera_spec(c, &mut problems),
    };

    let s = &raw.sampling;
    if let Some(d) = s.dt0 {
        if !(d.is_finite() && d > 0.0) {
            problems.push(format!("sampling dt0 = {d} must be positive"));
        }
    }
    if let Some(d) = s.opacity_reference {
        if !(d.is_finite() && d > 0.0) {
            problems.push(format!("sampling opacity_reference = {d} must be positive"));
        }
    }
    let background = s.background.unwrap_or([0.0; 3]);
    if !background.iter().all(|v| (0.0..=1.0).contains(v)) {
        problems.push(format!("sampling background {background:?} must be within [0, 1]"));
    }
    let sampling = SamplingConfig {
        dt0: s.dt0,
        opacity_reference: s.opacity_reference,
        jitter: s.jitter.unwrap_or(true),
        seed: s.seed.unwrap_or(0),
        background: Rgb::new(background[0], background[1], background[2]),
    };

    if raw.threads == Some(0) {
        problems.push("threads must be at least 1".to_string());
    }

    let output = raw.output.clone().unwrap_or_else(|| DEFAULT_OUTPUT.to_string());
    if frames.len() > 1 && !has_frame_placeholder(&output) {
        problems.push(format!("output `{output}` needs a {{frame}} placeholder to render {} frames", frames.len()));
    }

    let job = RenderJob {
        base_dir: base_dir.to_path_buf(),
        volume,
        meshes,
        transfer,
        palette,
        camera: camera.unwrap_or(CameraSpec {
            placement: CameraPlacement::View(View::Front),
            vfov: DEFAULT_VFOV,
            width: DEFAULT_SIZE,
            height: DEFAULT_SIZE,
        }),
        sampling,
        output,
        frames,
        gamma: raw.gamma.unwrap_or(false),
        threads: raw.threads,
    };

    // input files must exist for every requested frame
    if !job.volume.is_empty() {
        for f in frames.iter() {
            let p = job.volume_path(f);
            if !p.is_file() {
                problems.push(format!("volume file {} does not exist", p.display()));
            }
            for m in &job.meshes {
                let p = job.mesh_path(m, f);
                if !p.is_file() {
                    problems.push(format!("mesh `{}` file {} does not exist", m.name, p.display()));
                }
            }
        }
    }

    if problems.is_empty() {
        Ok(job)
    } else {
        Err(JobError { problems })
    }
}

fn camera_spec(c: &RawCamera, problems: &mut Vec<String>) -> Option<CameraSpec> {
    let vfov = c.vfov.unwrap_or(DEFAULT_VFOV);
    let width = c.width.unwrap_or(DEFAULT_SIZE);
    let height = c.height.unwrap_or(DEFAULT_SIZE);
    let mut ok = true;
    if !(vfov > 0.0 && vfov < 180.0) {
        problems.push(format!("camera vfov {vfov} must be in (0, 180)"));
        ok = false;
    }
    if width == 0 || height == 0 {
        problems.push(format!("camera resolution {width}x{height} must be at least 1x1"));
        ok = false;
    }
    let explicit = c.position.is_some() || c.look_at.is_some();
    let placement = match (&c.view, explicit) {
        (Some(_), true) => {
            problems.push("camera: give either `view` or `position`/`look_at`, not both".to_string());
            None
        }
        (Some(v), false) => match View::parse(v) {
            Some(v) => Some(CameraPlacement::View(v)),
            None => {
                problems.push(format!("unknown camera view `{v}` (expected front, back or side)"));
                None
            }
        },
        (None, true) => match (c.position, c.look_at) {
            (Some(p), Some(l)) => {
                let up = c.up.unwrap_or([0.0, 1.0, 0.0]);
                let placement = CameraPlacement::Explicit {
                    position: Vec3::from_array(p),
                    look_at: Vec3::from_array(l),
                    up: Vec3::from_array(up),
                };
                // check the basis now rather than at render time
                let probe = CameraSpec { placement, vfov: if ok { vfov } else { DEFAULT_VFOV }, width: 1, height: 1 };
                if let Err(e) = probe.resolve(&Aabb::new(Vec3::ZERO, Vec3::ZERO)) {
                    problems.push(format!("camera: {e}"));
                    None
                } else {
                    Some(placement)
                }
            }
            _ => {
                problems.push("camera: `position` and `look_at` must be given together".to_string());
                None
            }
        },
        (None, false) => Some(CameraPlacement::View(View::Front)),
    };
    let placement = placement?;
    ok.then_some(CameraSpec { placement, vfov, width, height })
}
