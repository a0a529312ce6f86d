use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{composite_back_to_front, correct_opacity, sample_ray_into, Camera, CameraError, Sample, SampleSettings};
use crate::geometry::{build_segments_from, Hit, Scene, SegmentList};
use crate::math::{Aabb, Rgb};
use crate::transfer::Transfer;
use crate::volume::VolumeGrid;

/// Linear RGB image, row-major from the top-left pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBuffer {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl FrameBuffer {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Self {
        FrameBuffer { width, height, pixels: vec![fill; width as usize * height as usize] }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize, "pixel count does not match size");
        FrameBuffer { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        self.pixels[y as usize * self.width as usize + x as usize] = c;
    }

    /// 8-bit RGB bytes: `round(255 * v)` of each channel clamped to `[0, 1]`,
    /// after `v^(1/2.2)` when `gamma` is set.
    pub fn to_rgb8(&self, gamma: bool) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            for v in p.channels() {
                out.push(quantize(v, gamma));
            }
        }
        out
    }
}

#[inline]
fn quantize(v: f64, gamma: bool) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let v = if gamma { libm::pow(v, 1.0 / 2.2) } else { v };
    libm::round(v * 255.0) as u8
}

#[derive(Clone, Debug, PartialEq)]
pub enum RenderError {
    Camera(CameraError),
    BadStep(f64),
    BadOpacityReference(f64),
    BadBackground,
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::Camera(e) => write!(f, "camera: {e}"),
            RenderError::BadStep(v) => write!(f, "sample spacing dt0 = {v} must be finite and positive"),
            RenderError::BadOpacityReference(v) => {
                write!(f, "opacity reference spacing {v} must be finite and positive")
            }
            RenderError::BadBackground => write!(f, "background color channels must lie in [0, 1]"),
        }
    }
}

impl core::error::Error for RenderError {}

impl From<CameraError> for RenderError {
    fn from(e: CameraError) -> Self {
        RenderError::Camera(e)
    }
}

/// Per-frame counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RenderStats {
    /// Rays whose crossings left some mesh open.
    pub parity_warnings: u64,
    pub samples: u64,
}

impl RenderStats {
    pub fn merge(&mut self, o: RenderStats) {
        self.parity_warnings += o.parity_warnings;
        self.samples += o.samples;
    }
}

/// Buffers reused across the pixels handled by one worker.
#[derive(Default)]
pub struct PixelScratch {
    hits: Vec<Hit>,
    segments: SegmentList,
    samples: Vec<Sample>,
    shaded: Vec<(Rgb, f64)>,
}

/// Random stream for one pixel of one frame.
///
/// The key is the job seed; the ChaCha stream id packs the frame number and
/// the pixel coordinates, so every pixel draws the same numbers no matter
/// which worker renders it or in which order.
pub fn pixel_rng(seed: u64, frame: u32, px: u32, py: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = ((frame as u64) << 42) | (((py as u64) & 0x1f_ffff) << 21) | ((px as u64) & 0x1f_ffff);
    rng.set_stream(stream);
    rng
}

/// Everything needed to shade pixels of one frame. Immutable and shareable
/// across threads; per-thread state lives in [`PixelScratch`].
pub struct Renderer<'a> {
    scene: &'a Scene,
    grid: &'a VolumeGrid,
    transfer: &'a Transfer,
    camera: Camera,
    settings: SampleSettings,
    start_inside: Vec<bool>,
    grid_box: Aabb,
}

impl<'a> Renderer<'a> {
    pub fn new(
        scene: &'a Scene,
        grid: &'a VolumeGrid,
        transfer: &'a Transfer,
        camera: Camera,
        settings: SampleSettings,
    ) -> Result<Self, RenderError> {
        if !(settings.dt0.is_finite() && settings.dt0 > 0.0) {
            return Err(RenderError::BadStep(settings.dt0));
        }
        if let Some(r) = settings.opacity_reference {
            if !(r.is_finite() && r > 0.0) {
                return Err(RenderError::BadOpacityReference(r));
            }
        }
        if !settings.background.channels().iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(RenderError::BadBackground);
        }
        let start_inside = scene.containing_meshes(camera.position());
        Ok(Renderer { scene, grid, transfer, camera, settings, start_inside, grid_box: grid.bounds() })
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    pub fn settings(&self) -> &SampleSettings {
        &self.settings
    }

    /// Color of pixel `(px, py)` in frame `frame`.
    pub fn render_pixel(&self, px: u32, py: u32, frame: u32, scratch: &mut PixelScratch, stats: &mut RenderStats) -> Rgb {
        let ray = self.camera.pixel_center_ray(px, py);
        self.scene.intersect_into(&ray, &mut scratch.hits);
        build_segments_from(&scratch.hits, self.scene, &self.start_inside, &mut scratch.segments);
        if scratch.segments.parity_warning {
            stats.parity_warnings += 1;
        }
        let inv = crate::math::Vec3::new(1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z);
        match self.grid_box.hit_interval(ray.origin, inv, 0.0, f64::INFINITY) {
            Some((t0, t1)) => scratch.segments.clip(t0, t1),
            None => scratch.segments.segments.clear(),
        }
        if scratch.segments.is_empty() {
            return self.settings.background;
        }

        let mut rng = pixel_rng(self.settings.seed, frame, px, py);
        sample_ray_into(&scratch.segments.segments, &self.settings, &mut rng, &mut scratch.samples);
        stats.samples += scratch.samples.len() as u64;

        let dx0 = self.settings.reference_spacing();
        scratch.shaded.clear();
        for s in &scratch.samples {
            let value = self.grid.sample_clamped(ray.at(s.t));
            let (c, alpha) = self.transfer.eval(s.material, value);
            scratch.shaded.push((c, correct_opacity(alpha, s.dx, dx0)));
        }
        composite_back_to_front(&scratch.shaded, self.settings.background)
    }

    /// Renders rows `rows` into `out`, which holds exactly those rows.
    pub fn render_rows(&self, rows: Range<u32>, frame: u32, out: &mut [Rgb]) -> RenderStats {
        let w = self.camera.width();
        assert_eq!(out.len(), (rows.end - rows.start) as usize * w as usize);
        let mut scratch = PixelScratch::default();
        let mut stats = RenderStats::default();
        for (row, y) in rows.enumerate() {
            for x in 0..w {
                out[row * w as usize + x as usize] = self.render_pixel(x, y, frame, &mut scratch, &mut stats);
            }
        }
        stats
    }

    /// Whole frame on the calling thread.
    pub fn render_frame(&self, frame: u32) -> (FrameBuffer, RenderStats) {
        let mut fb = FrameBuffer::new(self.camera.width(), self.camera.height(), self.settings.background);
        let stats = self.render_rows(0..self.camera.height(), frame, fb.pixels_mut());
        (fb, stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::{cuboid_mesh, icosphere_mesh};
    use crate::geometry::{build_scene, Material, MeshLabel};
    use crate::math::Vec3;
    use crate::transfer::{MaterialPalette, Style, StyleParams};

    fn slab_setup(alpha: f64) -> (Scene, VolumeGrid, Transfer) {
        let scene = build_scene(vec![cuboid_mesh(
            "skin",
            MeshLabel::Skin,
            Vec3::new(-5.0, -5.0, -5.0),
            Vec3::new(5.0, 5.0, 5.0),
        )])
        .unwrap();
        let grid = VolumeGrid::from_fn([3, 3, 3], [6.0; 3], Vec3::splat(-6.0), |_| 1.0).unwrap();
        let mut pal = MaterialPalette::default();
        pal.set(Material::Fat, Rgb::WHITE, alpha);
        let params = StyleParams { a: 1.0, b: 1.0, ..StyleParams::new(Style::FatEmphasized) };
        let transfer = Transfer::new(params, pal, &grid).unwrap();
        (scene, grid, transfer)
    }

    #[test]
    fn camera_looking_away_sees_background() {
        let (scene, grid, transfer) = slab_setup(0.5);
        let cam = Camera::new(Vec3::new(0.0, 0.0, 20.0), Vec3::new(0.0, 0.0, 40.0), Vec3::new(0.0, 1.0, 0.0), 30.0, 8, 6).unwrap();
        let bg = Rgb::new(0.2, 0.3, 0.4);
        let settings = SampleSettings { background: bg, ..SampleSettings::new(0.1) };
        let r = Renderer::new(&scene, &grid, &transfer, cam, settings).unwrap();
        let (fb, stats) = r.render_frame(0);
        assert!(fb.pixels().iter().all(|&p| p == bg));
        assert_eq!(stats.samples, 0);
    }

    #[test]
    fn slab_transmittance_through_centre() {
        let (scene, grid, transfer) = slab_setup(0.1);
        let cam = Camera::new(Vec3::new(0.0, 0.0, 20.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 10.0, 3, 3).unwrap();
        let settings = SampleSettings { jitter: false, ..SampleSettings::new(0.5) };
        let r = Renderer::new(&scene, &grid, &transfer, cam, settings).unwrap();
        let (fb, _) = r.render_frame(0);
        // 10 mm of fat in 20 steps of alpha 0.1: 1 - 0.9^20
        let expected = 1.0 - 0.9f64.powi(20);
        assert!((fb.get(1, 1).r - expected).abs() < 1e-12, "{:?}", fb.get(1, 1));
    }

    #[test]
    fn camera_inside_skin_renders() {
        let scene = build_scene(vec![icosphere_mesh("skin", MeshLabel::Skin, Vec3::ZERO, 5.0, 2)]).unwrap();
        let grid = VolumeGrid::from_fn([3, 3, 3], [6.0; 3], Vec3::splat(-6.0), |_| 1.0).unwrap();
        let transfer = Transfer::new(StyleParams::new(Style::FatEmphasized), MaterialPalette::default(), &grid).unwrap();
        let cam = Camera::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0), 30.0, 4, 4).unwrap();
        let r = Renderer::new(&scene, &grid, &transfer, cam, SampleSettings::new(0.25)).unwrap();
        let (fb, stats) = r.render_frame(0);
        assert_eq!(stats.parity_warnings, 0);
        assert!(fb.pixels().iter().all(|p| p.r > 0.5));
    }

    #[test]
    fn rejects_bad_settings() {
        let (scene, grid, transfer) = slab_setup(0.5);
        let cam = Camera::new(Vec3::new(0.0, 0.0, 20.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 10.0, 3, 3).unwrap();
        assert!(matches!(
            Renderer::new(&scene, &grid, &transfer, cam, SampleSettings::new(0.0)),
            Err(RenderError::BadStep(_))
        ));
        let s = SampleSettings { opacity_reference: Some(-1.0), ..SampleSettings::new(0.1) };
        assert!(Renderer::new(&scene, &grid, &transfer, cam, s).is_err());
        let s = SampleSettings { background: Rgb::new(2.0, 0.0, 0.0), ..SampleSettings::new(0.1) };
        assert!(Renderer::new(&scene, &grid, &transfer, cam, s).is_err());
    }

    #[test]
    fn quantization() {
        let fb = FrameBuffer::from_pixels(3, 1, vec![Rgb::new(0.5, 1.0, 0.0), Rgb::new(-0.2, 1.7, f64::NAN), Rgb::new(0.25, 0.25, 0.25)]);
        assert_eq!(fb.to_rgb8(false), vec![128, 255, 0, 0, 255, 0, 64, 64, 64]);
        let g = fb.to_rgb8(true);
        assert_eq!(g[0], (0.5f64.powf(1.0 / 2.2) * 255.0).round() as u8);
    }

    #[test]
    fn pixel_streams_differ() {
        use rand::RngCore;
        let a = pixel_rng(1, 0, 3, 4).next_u64();
        assert_ne!(a, pixel_rng(1, 0, 4, 3).next_u64());
        assert_ne!(a, pixel_rng(1, 1, 3, 4).next_u64());
        assert_ne!(a, pixel_rng(2, 0, 3, 4).next_u64());
        assert_eq!(a, pixel_rng(1, 0, 3, 4).next_u64());
    }
}
