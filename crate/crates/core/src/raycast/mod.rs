//! Camera rays, jittered sampling of material segments, opacity correction
//! and back-to-front compositing.

mod camera;
mod composite;
mod render;
mod sampling;

pub use camera::{Camera, CameraError};
pub use composite::composite_back_to_front;
pub use render::{pixel_rng, FrameBuffer, PixelScratch, RenderError, RenderStats, Renderer};
pub use sampling::{correct_opacity, sample_ray, sample_ray_into, Sample, SampleSettings};
