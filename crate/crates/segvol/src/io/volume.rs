//! `VGRID v1`: a text header followed by raw little-endian samples.
//!
//! ```text
//! vgrid 1
//! dims <nx> <ny> <nz>
//! spacing <sx> <sy> <sz>
//! origin <ox> <oy> <oz>
//! dtype f32|u16
//! data
//! <nx*ny*nz values, x fastest, then y, then z>
//! ```

use std::path::Path;

use segvol_core::{Vec3, VolumeGrid};

use super::{header_lines, read_file, write_file, IoError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    F32,
    U16,
}

impl Dtype {
    fn name(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::U16 => "u16",
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::U16 => 2,
        }
    }
}

/// A volume together with the payload type it was stored in.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeFile {
    pub grid: VolumeGrid,
    pub dtype: Dtype,
}

pub fn read_volume(path: &Path) -> Result<VolumeGrid, IoError> {
    read_volume_file(path).map(|f| f.grid)
}

pub fn read_volume_file(path: &Path) -> Result<VolumeFile, IoError> {
    let bytes = read_file(path)?;
    decode_volume(&bytes, &path.display().to_string())
}

pub fn write_volume(path: &Path, grid: &VolumeGrid, dtype: Dtype) -> Result<(), IoError> {
    write_file(path, &encode_volume(grid, dtype))
}

pub fn decode_volume(bytes: &[u8], context: &str) -> Result<VolumeFile, IoError> {
    let err = |offset: usize, message: String| IoError::Parse { context: context.into(), offset, message };
    let (lines, data_start) = header_lines(bytes, "data", context)?;

    let mut magic = false;
    let mut dims: Option<[usize; 3]> = None;
    let mut spacing: Option<[f64; 3]> = None;
    let mut origin: Option<[f64; 3]> = None;
    let mut dtype: Option<Dtype> = None;
    for (offset, line) in lines {
        let mut parts = line.split_whitespace();
        let Some(key) = parts.next() else { continue };
        let rest: Vec<&str> = parts.collect();
        match key {
            "vgrid" => {
                if rest != ["1"] {
                    return Err(err(offset, format!("unsupported version `{}`", rest.join(" "))));
                }
                magic = true;
            }
            "dims" => {
                let v = parse3::<usize>(&rest).ok_or_else(|| err(offset, "dims needs three integers".into()))?;
                if v.iter().any(|&n| n < 2) {
                    return Err(err(offset, format!("dims {} {} {}: each axis needs >= 2 nodes", v[0], v[1], v[2])));
                }
                dims = Some(v);
            }
            "spacing" => {
                spacing = Some(parse3::<f64>(&rest).ok_or_else(|| err(offset, "spacing needs three numbers".into()))?)
            }
            "origin" => {
                origin = Some(parse3::<f64>(&rest).ok_or_else(|| err(offset, "origin needs three numbers".into()))?)
            }
            "dtype" => {
                dtype = Some(match rest.as_slice() {
                    ["f32"] => Dtype::F32,
                    ["u16"] => Dtype::U16,
                    _ => return Err(err(offset, format!("unknown dtype `{}`", rest.join(" ")))),
                })
            }
            other => return Err(err(offset, format!("unknown header field `{other}`"))),
        }
    }
    if !magic {
        return Err(err(0, "missing `vgrid 1` line".into()));
    }
    let missing = |what: &str| err(data_start, format!("header is missing `{what}`"));
    let dims = dims.ok_or_else(|| missing("dims"))?;
    let spacing = spacing.ok_or_else(|| missing("spacing"))?;
    let origin = origin.ok_or_else(|| missing("origin"))?;
    let dtype = dtype.ok_or_else(|| missing("dtype"))?;

    let n = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| err(0, "dims overflow".into()))?;
    let payload = &bytes[data_start..];
    let expected = n * dtype.size();
    if payload.len() < expected {
        return Err(err(
            bytes.len(),
            format!("payload truncated: expected {expected} bytes, found {}", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(err(data_start + expected, format!("{} trailing bytes after payload", payload.len() - expected)));
    }
    let values: Vec<f32> = match dtype {
        Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect(),
        Dtype::U16 => payload.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as f32).collect(),
    };
    if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(err(
            data_start + i * dtype.size(),
            format!("value {} is not a finite non-negative number", values[i]),
        ));
    }
    let grid = VolumeGrid::new(dims, spacing, Vec3::from_array(origin), values)
        .map_err(|source| IoError::Volume { context: context.into(), source })?;
    Ok(VolumeFile { grid, dtype })
}

/// Canonical encoding. Header reals use the shortest representation that
/// parses back to the same value; `u16` payloads round to the nearest
/// integer and saturate.
pub fn encode_volume(grid: &VolumeGrid, dtype: Dtype) -> Vec<u8> {
    let [nx, ny, nz] = grid.dims();
    let [sx, sy, sz] = grid.spacing();
    let o = grid.origin();
    let mut out = format!(
        "vgrid 1\ndims {nx} {ny} {nz}\nspacing {sx:?} {sy:?} {sz:?}\norigin {:?} {:?} {:?}\ndtype {}\ndata\n",
        o.x,
        o.y,
        o.z,
        dtype.name()
    )
    .into_bytes();
    out.reserve(grid.node_count() * dtype.size());
    match dtype {
        Dtype::F32 => grid.values().iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        Dtype::U16 => grid
            .values()
            .iter()
            .for_each(|v| out.extend_from_slice(&(v.round().clamp(0.0, 65535.0) as u16).to_le_bytes())),
    }
    out
}

fn parse3<T: std::str::FromStr>(parts: &[&str]) -> Option<[T; 3]> {
    if parts.len() != 3 {
        return None;
    }
    Some([parts[0].parse().ok()?, parts[1].parse().ok()?, parts[2].parse().ok()?])
}
