//! Frame loading and tile-parallel rendering.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use segvol_core::{
    build_scene, classify_nodes, region_histogram, FrameBuffer, Histogram, LabeledMesh, Material, RenderError,
    RenderStats, Renderer, SampleSettings, Scene, Transfer, TransferError, VolumeGrid,
};

use crate::io::{self, IoError, ImageFormat};
use crate::job::RenderJob;

/// Rows per work item. Small enough to balance load, large enough to keep
/// scheduling overhead out of the profile.
pub const TILE_ROWS: u32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error(transparent)]
    Io(#[from] IoError),
    /// Writing the frame's image failed.
    #[error("writing output: {0}")]
    Output(#[source] IoError),
    #[error("frame {frame}: {source}")]
    Geometry {
        frame: u32,
        #[source]
        source: segvol_core::GeometryError,
    },
    #[error("frame {frame}: {source}")]
    Transfer {
        frame: u32,
        #[source]
        source: TransferError,
    },
    #[error("frame {frame}: {source}")]
    Render {
        frame: u32,
        #[source]
        source: RenderError,
    },
    #[error("cannot start {threads} worker threads: {message}")]
    Pool { threads: usize, message: String },
}

impl FrameError {
    /// Input problems (unreadable or inconsistent files) as opposed to
    /// failures while producing output.
    pub fn is_input_error(&self) -> bool {
        match self {
            FrameError::Io(_) | FrameError::Geometry { .. } | FrameError::Transfer { .. } => true,
            FrameError::Output(_) | FrameError::Render { .. } | FrameError::Pool { .. } => false,
        }
    }
}

pub fn thread_pool(threads: Option<usize>) -> Result<ThreadPool, FrameError> {
    let n = threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| FrameError::Pool { threads: n, message: e.to_string() })
}

/// Renders every row tile of the frame on `pool`. The output does not
/// depend on the number of workers: each pixel owns its random stream.
pub fn render_parallel(renderer: &Renderer<'_>, frame: u32, pool: &ThreadPool) -> (FrameBuffer, RenderStats) {
    let (w, h) = (renderer.camera().width(), renderer.camera().height());
    let mut fb = FrameBuffer::new(w, h, renderer.settings().background);
    let chunk = (TILE_ROWS * w) as usize;
    let stats = pool.install(|| {
        fb.pixels_mut()
            .par_chunks_mut(chunk)
            .enumerate()
            .map(|(i, out)| {
                let y0 = i as u32 * TILE_ROWS;
                let y1 = (y0 + TILE_ROWS).min(h);
                renderer.render_rows(y0..y1, frame, out)
            })
            .reduce(RenderStats::default, |mut a, b| {
                a.merge(b);
                a
            })
    });
    (fb, stats)
}

/// Inputs of one frame, read once.
pub struct FrameInputs {
    pub frame: u32,
    pub grid: VolumeGrid,
    pub scene: Scene,
}

impl FrameInputs {
    pub fn load(job: &RenderJob, frame: u32) -> Result<Self, FrameError> {
        let grid = io::read_volume(&job.volume_path(frame))?;
        let mut meshes: Vec<LabeledMesh> = Vec::with_capacity(job.meshes.len());
        for m in &job.meshes {
            meshes.push(io::read_mesh(&job.mesh_path(m, frame), m.label, &m.name)?);
        }
        let scene = build_scene(meshes).map_err(|source| FrameError::Geometry { frame, source })?;
        Ok(FrameInputs { frame, grid, scene })
    }

    /// Histogram of fat MRI values over nodes classified as fat.
    pub fn fat_histogram(&self, bins: usize) -> Histogram {
        fat_histogram(&self.scene, &self.grid, bins)
    }
}

pub fn fat_histogram(scene: &Scene, grid: &VolumeGrid, bins: usize) -> Histogram {
    let labels = classify_nodes(scene, grid);
    region_histogram(grid, &labels, &Some(Material::Fat), bins).expect("node labels match the grid")
}

pub fn sample_settings(job: &RenderJob, grid: &VolumeGrid) -> SampleSettings {
    let s = &job.sampling;
    SampleSettings {
        dt0: s.dt0.unwrap_or_else(|| SampleSettings::default_dt0(grid)),
        opacity_reference: s.opacity_reference,
        jitter: s.jitter,
        seed: s.seed,
        background: s.background,
    }
}

/// Builds the transfer for a frame. The fat histogram comes from the job's
/// cache file when one is configured, otherwise from this frame.
pub fn frame_transfer(job: &RenderJob, inputs: &FrameInputs) -> Result<Transfer, FrameError> {
    let mut params = job.transfer.params();
    params.fat_hist = Some(match &job.transfer.histogram {
        Some(path) => io::read_histogram(path)?,
        None => inputs.fat_histogram(job.transfer.bins),
    });
    Transfer::new(params, job.palette, &inputs.grid).map_err(|source| FrameError::Transfer { frame: inputs.frame, source })
}

pub struct FrameReport {
    pub frame: u32,
    pub output: PathBuf,
    pub stats: RenderStats,
    pub seconds: f64,
}

/// Renders one frame of the job to an in-memory buffer.
pub fn render_job_frame(job: &RenderJob, frame: u32, pool: &ThreadPool) -> Result<(FrameBuffer, RenderStats), FrameError> {
    let inputs = FrameInputs::load(job, frame)?;
    let transfer = frame_transfer(job, &inputs)?;
    let camera = job
        .camera
        .resolve(&inputs.grid.bounds())
        .map_err(|e| FrameError::Render { frame, source: e.into() })?;
    let settings = sample_settings(job, &inputs.grid);
    let renderer = Renderer::new(&inputs.scene, &inputs.grid, &transfer, camera, settings)
        .map_err(|source| FrameError::Render { frame, source })?;
    Ok(render_parallel(&renderer, frame, pool))
}

/// Renders one frame and writes its image.
pub fn render_and_write(job: &RenderJob, frame: u32, pool: &ThreadPool) -> Result<FrameReport, FrameError> {
    let start = Instant::now();
    let (fb, stats) = render_job_frame(job, frame, pool)?;
    let output = job.output_path(frame);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| FrameError::Output(IoError::Io { path: dir.to_path_buf(), source }))?;
    }
    io::write_image(&fb, &output, ImageFormat::from_path(&output), job.gamma).map_err(FrameError::Output)?;
    Ok(FrameReport { frame, output, stats, seconds: start.elapsed().as_secs_f64() })
}
