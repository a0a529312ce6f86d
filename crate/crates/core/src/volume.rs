//! Uniform scalar grids, trilinear reconstruction and region histograms.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{Aabb, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub enum VolumeError {
    /// Every axis needs at least two nodes.
    BadDims([usize; 3]),
    BadSpacing([f64; 3]),
    BadOrigin,
    LengthMismatch { expected: usize, got: usize },
    /// Value at the given linear index is negative or not finite.
    InvalidValue { index: usize, value: f32 },
    OutOfDomain(Vec3),
    BadBinCount,
    MaskMismatch { expected: usize, got: usize },
}

impl fmt::Display for VolumeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolumeError::BadDims(d) => write!(f, "grid dims {}x{}x{} (each axis needs >= 2 nodes)", d[0], d[1], d[2]),
            VolumeError::BadSpacing(s) => write!(f, "grid spacing {:?} must be finite and positive", s),
            VolumeError::BadOrigin => write!(f, "grid origin must be finite"),
            VolumeError::LengthMismatch { expected, got } => {
                write!(f, "grid expects {expected} values, got {got}")
            }
            VolumeError::InvalidValue { index, value } => {
                write!(f, "value {value} at index {index} is not a finite non-negative number")
            }
            VolumeError::OutOfDomain(p) => {
                write!(f, "point ({}, {}, {}) lies outside the grid", p.x, p.y, p.z)
            }
            VolumeError::BadBinCount => write!(f, "histogram needs at least one bin"),
            VolumeError::MaskMismatch { expected, got } => {
                write!(f, "label mask has {got} entries, grid has {expected} nodes")
            }
        }
    }
}

impl core::error::Error for VolumeError {}

/// Uniform 3D grid of non-negative scalars, x varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeGrid {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: Vec3,
    values: Vec<f32>,
    s_min: f32,
    s_max: f32,
}

impl VolumeGrid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: Vec3, values: Vec<f32>) -> Result<Self, VolumeError> {
        if dims.iter().any(|&n| n < 2) {
            return Err(VolumeError::BadDims(dims));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(VolumeError::BadSpacing(spacing));
        }
        if !origin.is_finite() {
            return Err(VolumeError::BadOrigin);
        }
        let expected = dims[0]
            .checked_mul(dims[1])
            .and_then(|n| n.checked_mul(dims[2]))
            .ok_or(VolumeError::BadDims(dims))?;
        if values.len() != expected {
            return Err(VolumeError::LengthMismatch { expected, got: values.len() });
        }
        let mut s_min = f32::INFINITY;
        let mut s_max = 0.0f32;
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(VolumeError::InvalidValue { index, value });
            }
            s_min = s_min.min(value);
            s_max = s_max.max(value);
        }
        Ok(VolumeGrid { dims, spacing, origin, values, s_min, s_max })
    }

    /// Grid filled by evaluating `f` at every node position.
    pub fn from_fn(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: Vec3,
        mut f: impl FnMut(Vec3) -> f32,
    ) -> Result<Self, VolumeError> {
        let n = dims[0].saturating_mul(dims[1]).saturating_mul(dims[2]);
        let mut values = Vec::with_capacity(n);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = origin
                        + Vec3::new(i as f64 * spacing[0], j as f64 * spacing[1], k as f64 * spacing[2]);
                    values.push(f(p));
                }
            }
        }
        VolumeGrid::new(dims, spacing, origin, values)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    /// Exact maximum of the stored values.
    pub fn s_max(&self) -> f32 {
        self.s_max
    }

    pub fn s_min(&self) -> f32 {
        self.s_min
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing[0].min(self.spacing[1]).min(self.spacing[2])
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> f32 {
        self.values[self.index(i, j, k)]
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin
            + Vec3::new(
                i as f64 * self.spacing[0],
                j as f64 * self.spacing[1],
                k as f64 * self.spacing[2],
            )
    }

    /// World-space box spanned by the nodes.
    pub fn bounds(&self) -> Aabb {
        Aabb::new(self.origin, self.node_position(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1))
    }

    /// Trilinear blend of the eight nodes around `p`.
    ///
    /// Points further outside the node box than a relative 1e-9 of its
    /// extent are rejected; anything closer is clamped onto the box.
    pub fn sample_trilinear(&self, p: Vec3) -> Result<f64, VolumeError> {
        let mut cell = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..3 {
            let n = self.dims[axis];
            let u = (p[axis] - self.origin[axis]) / self.spacing[axis];
            let last = (n - 1) as f64;
            let tol = 1e-9 * last.max(1.0);
            if !(u >= -tol && u <= last + tol) {
                return Err(VolumeError::OutOfDomain(p));
            }
            let u = u.clamp(0.0, last);
            let c = (libm::floor(u) as usize).min(n - 2);
            cell[axis] = c;
            frac[axis] = u - c as f64;
        }
        Ok(self.blend(cell, frac))
    }

    /// Like [`VolumeGrid::sample_trilinear`] but clamps `p` onto the node
    /// box instead of rejecting it. For callers that already clipped their
    /// ray spans to [`VolumeGrid::bounds`] and only need to absorb rounding.
    #[inline]
    pub fn sample_clamped(&self, p: Vec3) -> f64 {
        let mut cell = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..3 {
            let n = self.dims[axis];
            let u = ((p[axis] - self.origin[axis]) / self.spacing[axis]).clamp(0.0, (n - 1) as f64);
            let c = (u as usize).min(n - 2);
            cell[axis] = c;
            frac[axis] = u - c as f64;
        }
        self.blend(cell, frac)
    }

    #[inline]
    fn blend(&self, cell: [usize; 3], frac: [f64; 3]) -> f64 {
        let [i, j, k] = cell;
        let [fx, fy, fz] = frac;
        let sx = 1;
        let sy = self.dims[0];
        let sz = self.dims[0] * self.dims[1];
        let base = self.index(i, j, k);
        let v = |off: usize| self.values[base + off] as f64;
        let c00 = v(0) + (v(sx) - v(0)) * fx;
        let c10 = v(sy) + (v(sy + sx) - v(sy)) * fx;
        let c01 = v(sz) + (v(sz + sx) - v(sz)) * fx;
        let c11 = v(sz + sy) + (v(sz + sy + sx) - v(sz + sy)) * fx;
        let c0 = c00 + (c10 - c00) * fy;
        let c1 = c01 + (c11 - c01) * fy;
        c0 + (c1 - c0) * fz
    }
}

/// Bin counts of scalar values over `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    rho_max: u64,
}

impl Histogram {
    pub fn from_counts(lo: f64, hi: f64, counts: Vec<u64>) -> Result<Self, VolumeError> {
        if counts.is_empty() {
            return Err(VolumeError::BadBinCount);
        }
        let rho_max = counts.iter().copied().max().unwrap_or(0);
        Ok(Histogram { lo, hi, counts, rho_max })
    }

    pub fn empty(lo: f64, hi: f64, bin_count: usize) -> Result<Self, VolumeError> {
        Histogram::from_counts(lo, hi, vec![0; bin_count])
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn rho_max(&self) -> u64 {
        self.rho_max
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the first bin holding the maximum count.
    pub fn modal_bin(&self) -> usize {
        self.counts.iter().position(|&c| c == self.rho_max).unwrap_or(0)
    }

    /// Bin holding `s`: `floor((s - lo) / (hi - lo) * bins)`, with `hi`
    /// itself mapped to the last bin and out-of-range values clamped.
    #[inline]
    pub fn bin_of(&self, s: f64) -> usize {
        let n = self.counts.len();
        let width = self.hi - self.lo;
        if !(width > 0.0) {
            return 0;
        }
        let x = (s - self.lo) / width * n as f64;
        if !(x > 0.0) {
            0
        } else {
            (libm::floor(x) as usize).min(n - 1)
        }
    }

    /// Count of the bin holding `s`.
    #[inline]
    pub fn density(&self, s: f64) -> u64 {
        self.counts[self.bin_of(s)]
    }

    /// Triangle-filtered count around the bin holding `s` (weights 1/4, 1/2,
    /// 1/4; missing neighbours at the ends are replaced by the centre bin).
    pub fn smoothed_density(&self, s: f64) -> f64 {
        let b = self.bin_of(s);
        let centre = self.counts[b] as f64;
        let left = if b > 0 { self.counts[b - 1] as f64 } else { centre };
        let right = self.counts.get(b + 1).map_or(centre, |&c| c as f64);
        0.25 * left + 0.5 * centre + 0.25 * right
    }

    fn add(&mut self, s: f64) {
        let b = self.bin_of(s);
        self.counts[b] += 1;
    }
}

/// Histogram over `[0, s_max]` of the node values whose label equals `target`.
///
/// An empty region is not an error: every count and `rho_max` are zero.
pub fn region_histogram<L: PartialEq>(
    grid: &VolumeGrid,
    mask: &[L],
    target: &L,
    bin_count: usize,
) -> Result<Histogram, VolumeError> {
    if bin_count == 0 {
        return Err(VolumeError::BadBinCount);
    }
    if mask.len() != grid.node_count() {
        return Err(VolumeError::MaskMismatch { expected: grid.node_count(), got: mask.len() });
    }
    let mut hist = Histogram::empty(0.0, grid.s_max() as f64, bin_count)?;
    for (value, label) in grid.values().iter().zip(mask) {
        if label == target {
            hist.add(*value as f64);
        }
    }
    hist.rho_max = hist.counts.iter().copied().max().unwrap_or(0);
    Ok(hist)
}
