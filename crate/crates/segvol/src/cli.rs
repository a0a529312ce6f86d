//! `segvol` subcommands: `render`, `histogram` and `validate`.
//!
//! Every command returns a [`CommandOutcome`]; exit code 0 means success
//! (for `render`: every requested frame was written), 1 a problem with the
//! job or its input files, 2 a failure while producing output.
//!
//! The last line of output is a stats line: the word `stats` followed by
//! `key=value` fields, all separated by single tabs. For `render`:
//!
//! ```text
//! stats command=render frames=3 style=fat-emphasized view=front threads=8 sec_per_frame=2.104 peak_mem_mb=412.6 parity_warnings=0
//! ```
//!
//! (shown with spaces in place of the tabs). New fields may be appended;
//! existing ones keep their names and order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use segvol_core::{Material, MeshLabel, Ray, Vec3};

use crate::io;
use crate::job::{parse_job, JobError, JobOverrides, RenderJob};
use crate::render::{render_and_write, thread_pool, FrameError, FrameInputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub code: i32,
    pub report: String,
    /// Machine-readable summary, when the command got far enough to have one.
    pub stats: Option<String>,
}

impl CommandOutcome {
    fn fail(code: i32, report: String) -> Self {
        CommandOutcome { code, report, stats: None }
    }

    fn invalid(e: JobError) -> Self {
        Self::fail(EXIT_INVALID, e.to_string())
    }

    fn frame_error(e: FrameError, report: String) -> Self {
        let code = if e.is_input_error() { EXIT_INVALID } else { EXIT_RUNTIME };
        CommandOutcome { code, report: format!("{report}error: {e}\n"), stats: None }
    }
}

#[derive(Debug, Parser)]
#[command(name = "segvol", version, about = "Ray-casting renderer for segmented MRI volumes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one frame or a range of frames.
    Render(RenderArgs),
    /// Compute the fat histogram of a frame and save it for reuse.
    Histogram(HistogramArgs),
    /// Load every input and report mesh statistics and crossing parity.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Job file (TOML).
    #[arg(long)]
    pub job: PathBuf,
    #[arg(long, conflicts_with = "frames")]
    pub frame: Option<u32>,
    /// `a..b` (exclusive), `a..=b` or a single frame.
    #[arg(long)]
    pub frames: Option<String>,
    /// `interior` or `fat-emphasized`.
    #[arg(long)]
    pub style: Option<String>,
    /// `front`, `back` or `side`.
    #[arg(long)]
    pub view: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt0: Option<f64>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Apply display gamma 1/2.2 when quantizing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub gamma: Option<bool>,
    /// Output path pattern.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RenderArgs {
    pub fn overrides(&self) -> JobOverrides {
        JobOverrides {
            frame: self.frame,
            frames: self.frames.clone(),
            style: self.style.clone(),
            view: self.view.clone(),
            seed: self.seed,
            dt0: self.dt0,
            threads: self.threads,
            gamma: self.gamma,
            output: self.output.as_ref().map(|p| p.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long)]
    pub job: PathBuf,
    /// Histogram cache file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Source frame (default: first frame of the job).
    #[arg(long)]
    pub frame: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub job: PathBuf,
    #[arg(long)]
    pub frame: Option<u32>,
    /// Random exterior rays per mesh for the parity check.
    #[arg(long, default_value_t = 1000)]
    pub rays: u32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            CommandOutcome::fail(code, e.render().to_string())
        }
    }
}

pub fn dispatch(command: Command) -> CommandOutcome {
    match command {
        Command::Render(a) => cmd_render(&a.job, &a.overrides()),
        Command::Histogram(a) => cmd_histogram(&a.job, &a.output, a.frame),
        Command::Validate(a) => cmd_validate(&a.job, a.frame, a.rays),
    }
}

pub fn cmd_render(job_path: &Path, overrides: &JobOverrides) -> CommandOutcome {
    let job = match parse_job(job_path, overrides) {
        Ok(j) => j,
        Err(e) => return CommandOutcome::invalid(e),
    };
    let pool = match thread_pool(job.threads) {
        Ok(p) => p,
        Err(e) => return CommandOutcome::frame_error(e, String::new()),
    };
    let style = job.transfer.style.name();
    let view = job.camera.view_name();
    let mut report = String::new();
    let mut total_seconds = 0.0;
    let mut parity = 0;
    for frame in job.frames.iter() {
        match render_and_write(&job, frame, &pool) {
            Ok(r) => {
                total_seconds += r.seconds;
                parity += r.stats.parity_warnings;
                report.push_str(&format!(
                    "frame {}\tstyle={style}\tview={view}\tseconds={:.3}\tparity_warnings={}\t{}\n",
                    r.frame,
                    r.seconds,
                    r.stats.parity_warnings,
                    r.output.display()
                ));
            }
            Err(e) => return CommandOutcome::frame_error(e, report),
        }
    }
    if parity > 0 {
        report.push_str(&format!("warning: {parity} rays ended with unbalanced mesh crossings\n"));
    }
    let frames = job.frames.len();
    let stats = format!(
        "stats\tcommand=render\tframes={frames}\tstyle={style}\tview={view}\tthreads={}\tsec_per_frame={:.3}\tpeak_mem_mb={}\tparity_warnings={parity}",
        pool.current_num_threads(),
        total_seconds / frames.max(1) as f64,
        peak_mem_field(),
    );
    CommandOutcome { code: EXIT_OK, report, stats: Some(stats) }
}

pub fn cmd_histogram(job_path: &Path, out: &Path, frame: Option<u32>) -> CommandOutcome {
    let job = match parse_job(job_path, &JobOverrides { frame, ..Default::default() }) {
        Ok(j) => j,
        Err(e) => return CommandOutcome::invalid(e),
    };
    let start = Instant::now();
    let frame = job.frames.start;
    let inputs = match FrameInputs::load(&job, frame) {
        Ok(i) => i,
        Err(e) => return CommandOutcome::frame_error(e, String::new()),
    };
    let hist = inputs.fat_histogram(job.transfer.bins);
    if let Err(e) = io::write_histogram(out, &hist) {
        return CommandOutcome::frame_error(FrameError::Output(e), String::new());
    }
    let mut report = String::new();
    if hist.total() == 0 {
        report.push_str("warning: no volume node lies in fat; histogram is all zeros\n");
    }
    let (lo, hi) = hist.range();
    let modal = hist.modal_bin();
    let width = (hi - lo) / hist.bin_count() as f64;
    report.push_str(&format!(
        "frame {frame}\tfat_nodes={}\trho_max={}\tmodal_bin={modal}\tmodal_range=[{:.6}, {:.6})\t{}\n",
        hist.total(),
        hist.rho_max(),
        lo + modal as f64 * width,
        lo + (modal + 1) as f64 * width,
        out.display()
    ));
    let stats = format!(
        "stats\tcommand=histogram\tframes=1\tbins={}\tfat_nodes={}\trho_max={}\tmodal_bin={modal}\tseconds={:.3}\tpeak_mem_mb={}",
        hist.bin_count(),
        hist.total(),
        hist.rho_max(),
        start.elapsed().as_secs_f64(),
        peak_mem_field()
    );
    CommandOutcome { code: EXIT_OK, report, stats: Some(stats) }
}

pub fn cmd_validate(job_path: &Path, frame: Option<u32>, rays: u32) -> CommandOutcome {
    let job = match parse_job(job_path, &JobOverrides { frame, ..Default::default() }) {
        Ok(j) => j,
        Err(e) => return CommandOutcome::invalid(e),
    };
    let frame = job.frames.start;
    let inputs = match FrameInputs::load(&job, frame) {
        Ok(i) => i,
        Err(e) => return CommandOutcome::frame_error(e, String::new()),
    };
    let mut report = format!("frame {frame}: {}\n", job.volume_path(frame).display());
    let d = inputs.grid.dims();
    let sp = inputs.grid.spacing();
    report.push_str(&format!(
        "volume\t{}x{}x{} nodes\tspacing {} {} {}\tvalues [{}, {}]\n",
        d[0],
        d[1],
        d[2],
        sp[0],
        sp[1],
        sp[2],
        inputs.grid.s_min(),
        inputs.grid.s_max()
    ));
    report.push_str(&mesh_table(&job, &inputs));

    let parity = parity_rates(&inputs, rays, job.sampling.seed);
    report.push_str("mesh\tlabel\trays\todd_parity\trate\n");
    let mut flagged = 0;
    for (i, odd) in parity.iter().enumerate() {
        let m = &inputs.scene.meshes()[i];
        let rate = *odd as f64 / rays.max(1) as f64;
        if *odd > 0 {
            flagged += 1;
        }
        report.push_str(&format!("{}\t{}\t{rays}\t{odd}\t{rate:.4}\n", m.name(), m.label()));
    }
    if flagged > 0 {
        report.push_str(&format!("warning: {flagged} mesh(es) are not closed; renders may show parity warnings\n"));
    }
    let total_odd: u64 = parity.iter().sum();
    let stats = format!(
        "stats\tcommand=validate\tmeshes={}\ttriangles={}\tparity_rays={}\todd_parity={total_odd}\tpeak_mem_mb={}",
        inputs.scene.mesh_count(),
        inputs.scene.triangle_count(),
        rays as u64 * inputs.scene.mesh_count() as u64,
        peak_mem_field()
    );
    CommandOutcome { code: EXIT_OK, report, stats: Some(stats) }
}

/// Per-label mesh, vertex and triangle counts.
fn mesh_table(job: &RenderJob, inputs: &FrameInputs) -> String {
    let mut labels = vec![MeshLabel::Skin];
    labels.extend(Material::ALL.iter().map(|&m| MeshLabel::Tissue(m)));
    let mut out = String::from("label\tmeshes\tvertices\ttriangles\ttriangles_min\ttriangles_max\tdegenerate_dropped\n");
    for label in labels {
        let ms: Vec<_> = inputs.scene.meshes().iter().filter(|m| m.label() == label).collect();
        if ms.is_empty() {
            continue;
        }
        let tris: Vec<usize> = ms.iter().map(|m| m.triangles().len()).collect();
        out.push_str(&format!(
            "{label}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            ms.len(),
            ms.iter().map(|m| m.vertices().len()).sum::<usize>(),
            tris.iter().sum::<usize>(),
            tris.iter().min().unwrap(),
            tris.iter().max().unwrap(),
            ms.iter().map(|m| m.dropped_degenerate()).sum::<usize>()
        ));
    }
    out.push_str(&format!("total\t{}\t\t{}\n", job.meshes.len(), inputs.scene.triangle_count()));
    out
}

/// For each mesh, the number of rays from outside its bounding sphere that
/// cross it an odd number of times. Closed meshes give zero.
pub fn parity_rates(inputs: &FrameInputs, rays: u32, seed: u64) -> Vec<u64> {
    let scene = &inputs.scene;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut odd = vec![0u64; scene.mesh_count()];
    for (i, mesh) in scene.meshes().iter().enumerate() {
        let b = mesh.bounds();
        let c = b.center();
        let r = 0.5 * b.diagonal() + scene.eps_t() * 1e3 + 1e-9;
        for _ in 0..rays {
            let origin = c + random_unit(&mut rng) * (2.0 * r);
            let e = b.extent();
            let target = b.min + Vec3::new(rng.random::<f64>() * e.x, rng.random::<f64>() * e.y, rng.random::<f64>() * e.z);
            let dir = target - origin;
            if dir.length() == 0.0 {
                continue;
            }
            let hits = scene.intersect_all(&Ray::new(origin, dir.normalized()));
            if hits.counts_per_mesh(scene.mesh_count())[i] % 2 == 1 {
                odd[i] += 1;
            }
        }
    }
    odd
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        let l = v.length();
        if l > 1e-3 && l <= 1.0 {
            return v / l;
        }
    }
}

/// Peak resident set size of this process in MiB, from `/proc/self/status`.
pub fn peak_memory_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

fn peak_mem_field() -> String {
    peak_memory_mb().map_or_else(|| "na".to_string(), |m| format!("{m:.1}"))
}
