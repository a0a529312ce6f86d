//! File formats, job configuration, parallel frame rendering and the
//! command-line front end built on `segvol-core`.

pub mod cli;
pub mod io;
pub mod job;
pub mod phantom;
pub mod render;

pub use cli::{run, CommandOutcome};
pub use job::{parse_job, JobError, JobOverrides, RenderJob};
