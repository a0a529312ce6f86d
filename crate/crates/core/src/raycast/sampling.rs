use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::{Material, Segment};
use crate::math::Rgb;
use crate::volume::VolumeGrid;

/// Sampling configuration for one render.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSettings {
    /// Sample stride along the ray, in millimeters.
    pub dt0: f64,
    /// Spacing the transfer-function opacities refer to; every sample's
    /// opacity is corrected from this spacing to its own covered length.
    /// `None` means `dt0`.
    pub opacity_reference: Option<f64>,
    pub jitter: bool,
    pub seed: u64,
    pub background: Rgb,
}

impl SampleSettings {
    pub fn new(dt0: f64) -> Self {
        SampleSettings { dt0, opacity_reference: None, jitter: true, seed: 0, background: Rgb::BLACK }
    }

    /// Half the smallest voxel spacing of `grid`.
    pub fn default_dt0(grid: &VolumeGrid) -> f64 {
        0.5 * grid.min_spacing()
    }

    pub fn reference_spacing(&self) -> f64 {
        self.opacity_reference.unwrap_or(self.dt0)
    }
}

/// One sample along a ray: position, material of its segment and the
/// length of ray it stands for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub material: Material,
    pub dx: f64,
}

/// Opacity for a sample covering `dx` when `alpha_eq` was defined for
/// spacing `dx0`: `1 - (1 - alpha_eq)^(dx / dx0)`.
#[inline]
pub fn correct_opacity(alpha_eq: f64, dx: f64, dx0: f64) -> f64 {
    if dx == dx0 {
        return alpha_eq;
    }
    if alpha_eq >= 1.0 {
        return 1.0;
    }
    1.0 - libm::pow(1.0 - alpha_eq, dx / dx0)
}

/// Samples for every segment. See [`sample_ray_into`].
pub fn sample_ray<R: Rng + ?Sized>(segments: &[Segment], settings: &SampleSettings, rng: &mut R) -> Vec<Sample> {
    let mut out = Vec::new();
    sample_ray_into(segments, settings, rng, &mut out);
    out
}

/// Splits each segment into strides of `dt0` from its entry point, the last
/// one truncated at the exit, and places one sample in each stride.
///
/// Without jitter a sample sits at the start of its stride. With jitter one
/// offset `u` in `[0, 1)` is drawn per segment and each sample sits at
/// fraction `u` of its stride, so the first lands at `t_enter + u dt0` and
/// the rest follow at spacing `dt0`. Samples never leave their segment and
/// the strides tile it exactly, so `sum(dx)` is the segment length.
pub fn sample_ray_into<R: Rng + ?Sized>(segments: &[Segment], settings: &SampleSettings, rng: &mut R, out: &mut Vec<Sample>) {
    out.clear();
    let dt0 = settings.dt0;
    for seg in segments {
        let len = seg.t_exit - seg.t_enter;
        if !(len > 0.0) {
            continue;
        }
        let u = if settings.jitter { rng.random::<f64>() } else { 0.0 };
        let mut k = 0u64;
        loop {
            let start = seg.t_enter + k as f64 * dt0;
            if start >= seg.t_exit {
                break;
            }
            let dx = dt0.min(seg.t_exit - start);
            out.push(Sample { t: start + u * dx, material: seg.material, dx });
            k += 1;
        }
    }
}
