//! On-disk formats: VGRID volumes, OBJ meshes, histogram caches and images.

mod histogram;
mod image;
mod obj;
mod volume;

use std::path::PathBuf;

pub use histogram::{decode_histogram, encode_histogram, read_histogram, write_histogram};
pub use image::{decode_ppm, encode_ppm, read_ppm, write_image, ImageFormat, Rgb8Image};
pub use obj::{parse_obj, read_mesh, write_obj};
pub use volume::{decode_volume, encode_volume, read_volume, read_volume_file, write_volume, Dtype, VolumeFile};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: byte {offset}: {message}")]
    Parse { context: String, offset: usize, message: String },
    #[error("{context}: line {line}: {message}")]
    Line { context: String, line: usize, message: String },
    #[error("{context}: {source}")]
    Volume {
        context: String,
        #[source]
        source: segvol_core::VolumeError,
    },
    #[error("{context}: {source}")]
    Geometry {
        context: String,
        #[source]
        source: segvol_core::GeometryError,
    },
    #[error("{path}: {source}")]
    Png {
        path: PathBuf,
        #[source]
        source: png::EncodingError,
    },
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<Vec<u8>, IoError> {
    std::fs::read(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), IoError> {
    std::fs::write(path, bytes).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

/// Header lines with their byte offsets, and the offset of the payload.
pub(crate) type HeaderLines<'a> = (Vec<(usize, &'a str)>, usize);

/// Splits `bytes` into newline-terminated header lines until a line equal to
/// `terminator`. Returns the lines with their starting offsets and the
/// offset just past the terminator.
pub(crate) fn header_lines<'a>(
    bytes: &'a [u8],
    terminator: &str,
    context: &str,
) -> Result<HeaderLines<'a>, IoError> {
    let mut lines = Vec::new();
    let mut pos = 0;
    loop {
        let rest = &bytes[pos..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            return Err(IoError::Parse {
                context: context.into(),
                offset: pos,
                message: format!("header ended before `{terminator}` line"),
            });
        };
        let line = std::str::from_utf8(&rest[..nl]).map_err(|_| IoError::Parse {
            context: context.into(),
            offset: pos,
            message: "header is not valid UTF-8".into(),
        })?;
        let line = line.trim_end_matches('\r');
        let start = pos;
        pos += nl + 1;
        if line.trim() == terminator {
            return Ok((lines, pos));
        }
        lines.push((start, line));
        if lines.len() > 64 {
            return Err(IoError::Parse { context: context.into(), offset: start, message: "header too long".into() });
        }
    }
}
