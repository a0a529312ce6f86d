//! Histogram cache: same header style as VGRID, counts as little-endian u64.
//!
//! ```text
//! vhist 1
//! bins <n>
//! range <lo> <hi>
//! data
//! <n u64 counts>
//! ```

use std::path::Path;

use segvol_core::Histogram;

use super::{header_lines, read_file, write_file, IoError};

pub fn encode_histogram(h: &Histogram) -> Vec<u8> {
    let (lo, hi) = h.range();
    let mut out = format!("vhist 1\nbins {}\nrange {lo:?} {hi:?}\ndata\n", h.bin_count()).into_bytes();
    for c in h.counts() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

pub fn decode_histogram(bytes: &[u8], context: &str) -> Result<Histogram, IoError> {
    let err = |offset: usize, message: String| IoError::Parse { context: context.into(), offset, message };
    let (lines, data_start) = header_lines(bytes, "data", context)?;
    let mut magic = false;
    let mut bins: Option<usize> = None;
    let mut range: Option<(f64, f64)> = None;
    for (offset, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            [] => {}
            ["vhist", "1"] => magic = true,
            ["bins", n] => {
                bins = Some(n.parse().ok().filter(|&n| n > 0).ok_or_else(|| err(offset, format!("bad bin count `{n}`")))?)
            }
            ["range", lo, hi] => {
                let lo: f64 = lo.parse().map_err(|_| err(offset, format!("bad range start `{lo}`")))?;
                let hi: f64 = hi.parse().map_err(|_| err(offset, format!("bad range end `{hi}`")))?;
                if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                    return Err(err(offset, format!("bad range {lo} {hi}")));
                }
                range = Some((lo, hi));
            }
            _ => return Err(err(offset, format!("unexpected header line `{line}`"))),
        }
    }
    if !magic {
        return Err(err(0, "missing `vhist 1` line".into()));
    }
    let bins = bins.ok_or_else(|| err(data_start, "header is missing `bins`".into()))?;
    let (lo, hi) = range.ok_or_else(|| err(data_start, "header is missing `range`".into()))?;
    let payload = &bytes[data_start..];
    if payload.len() != bins * 8 {
        return Err(err(data_start, format!("expected {} payload bytes, found {}", bins * 8, payload.len())));
    }
    let counts = payload.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    Histogram::from_counts(lo, hi, counts).map_err(|source| IoError::Volume { context: context.into(), source })
}

pub fn write_histogram(path: &Path, h: &Histogram) -> Result<(), IoError> {
    write_file(path, &encode_histogram(h))
}

pub fn read_histogram(path: &Path) -> Result<Histogram, IoError> {
    decode_histogram(&read_file(path)?, &path.display().to_string())
}
