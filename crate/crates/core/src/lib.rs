//! Kernels for ray casting segmented scalar volumes.
//!
//! Materials are assigned per sample from exact ray/mesh intersections
//! resolved by a fixed tissue priority, colored by per-material transfer
//! functions and composited back to front. Everything here is `no_std` with
//! `alloc`; file formats, threading and the command line live in the `segvol`
//! crate.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod geometry;
pub mod math;
pub mod raycast;
pub mod transfer;
pub mod volume;

pub use geometry::{
    assign_material, build_scene, build_segments, classify_nodes, ActiveSet, GeometryError, Hit,
    HitList, LabeledMesh, Material, MeshLabel, Scene, Segment, SegmentList,
};
pub use math::{Aabb, Ray, Rgb, Vec3};
pub use raycast::{
    composite_back_to_front, correct_opacity, sample_ray, Camera, CameraError, FrameBuffer,
    pixel_rng, RenderError, RenderStats, Renderer, Sample, SampleSettings,
};
pub use transfer::{
    eval_fat_emphasized, eval_interior, MaterialPalette, Style, StyleParams, Transfer,
    TransferError,
};
pub use volume::{region_histogram, Histogram, VolumeError, VolumeGrid};
