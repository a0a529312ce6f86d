//! Writes a synthetic hand phantom and a job file into a directory.
//!
//! ```text
//! cargo run --release --example make_phantom -- /tmp/hand --nodes 256 --frames 3 --size 1024
//! segvol render --job /tmp/hand/job.toml
//! ```

use std::path::PathBuf;

use clap::Parser;
use segvol::phantom::{write_phantom_job, PhantomJob};

#[derive(Parser)]
struct Args {
    dir: PathBuf,
    /// Volume nodes per axis.
    #[arg(long, default_value_t = 128)]
    nodes: usize,
    #[arg(long, default_value_t = 1)]
    frames: u32,
    /// Image width and height.
    #[arg(long, default_value_t = 512)]
    size: u32,
    /// Icosphere subdivisions per organ mesh.
    #[arg(long, default_value_t = 3)]
    subdiv: u32,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Args::parse();
    std::fs::create_dir_all(&a.dir)?;
    let opts = PhantomJob { nodes: a.nodes, frames: a.frames, subdiv: a.subdiv, width: a.size, height: a.size, extra: String::new() };
    let job = write_phantom_job(&a.dir, &opts)?;
    println!("{}", job.display());
    Ok(())
}
