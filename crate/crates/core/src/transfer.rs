//! Per-material transfer functions mapping an MRI value to a discrete
//! emitted color and opacity, in the interior-emphasized and fat-emphasized
//! styles.

use core::fmt;

use crate::geometry::Material;
use crate::math::Rgb;
use crate::volume::{Histogram, VolumeGrid};

/// Base color and opacity of each material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialPalette {
    colors: [Rgb; 5],
    alphas: [f64; 5],
}

impl Default for MaterialPalette {
    fn default() -> Self {
        let mut p = MaterialPalette { colors: [Rgb::BLACK; 5], alphas: [1.0; 5] };
        p.set(Material::Bone, Rgb::from_u8(244, 214, 145), 1.0);
        p.set(Material::Muscle, Rgb::from_u8(255, 98, 56), 1.0);
        p.set(Material::Ligament, Rgb::from_u8(170, 170, 170), 1.0);
        p.set(Material::Tendon, Rgb::from_u8(255, 255, 255), 1.0);
        p.set(Material::Fat, Rgb::from_u8(177, 122, 101), 0.6);
        p
    }
}

impl MaterialPalette {
    pub fn color(&self, m: Material) -> Rgb {
        self.colors[m.index()]
    }

    pub fn alpha(&self, m: Material) -> f64 {
        self.alphas[m.index()]
    }

    pub fn set(&mut self, m: Material, color: Rgb, alpha: f64) {
        self.colors[m.index()] = color;
        self.alphas[m.index()] = alpha;
    }

    fn validate(&self) -> Result<(), TransferError> {
        for m in Material::ALL {
            let c = self.color(m);
            let a = self.alpha(m);
            let ok = c.channels().iter().all(|v| (0.0..=1.0).contains(v)) && (0.0..=1.0).contains(&a);
            if !ok {
                return Err(TransferError::PaletteOutOfRange(m));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    /// Tissues scaled by MRI value, fat by its histogram frequency.
    InteriorEmphasized,
    /// Tissues constant, fat scaled by MRI value.
    FatEmphasized,
}

impl Style {
    pub fn name(self) -> &'static str {
        match self {
            Style::InteriorEmphasized => "interior-emphasized",
            Style::FatEmphasized => "fat-emphasized",
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Style {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interior" | "interior-emphasized" | "interior_emphasized" => Ok(Style::InteriorEmphasized),
            "fat" | "fat-emphasized" | "fat_emphasized" => Ok(Style::FatEmphasized),
            _ => Err(()),
        }
    }
}

/// Gain `a` and exponent `b` of `clamp(a (s / s_max)^b, 0, 1)`, plus the fat
/// histogram for the interior style.
#[derive(Clone, Debug, PartialEq)]
pub struct StyleParams {
    pub style: Style,
    pub a: f64,
    pub b: f64,
    pub fat_hist: Option<Histogram>,
    /// Triangle-filter the fat histogram over neighbouring bins.
    pub smooth_hist: bool,
}

impl StyleParams {
    /// Gain used when none is configured. Not a published value.
    pub const DEFAULT_A: f64 = 2.0;
    /// Exponent used when none is configured. Not a published value.
    pub const DEFAULT_B: f64 = 1.0;

    pub fn new(style: Style) -> Self {
        StyleParams { style, a: Self::DEFAULT_A, b: Self::DEFAULT_B, fat_hist: None, smooth_hist: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TransferError {
    BadGain(f64),
    BadExponent(f64),
    MissingHistogram,
    PaletteOutOfRange(Material),
}

impl fmt::Display for TransferError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferError::BadGain(a) => write!(f, "transfer gain a = {a} must be finite and positive"),
            TransferError::BadExponent(b) => write!(f, "transfer exponent b = {b} must be finite and positive"),
            TransferError::MissingHistogram => {
                write!(f, "interior-emphasized style needs a fat histogram")
            }
            TransferError::PaletteOutOfRange(m) => {
                write!(f, "palette entry for {m} has a channel or opacity outside [0, 1]")
            }
        }
    }
}

impl core::error::Error for TransferError {}

#[inline]
fn value_scale(s: f64, s_max: f64, a: f64, b: f64) -> f64 {
    if !(s_max > 0.0) {
        return 0.0;
    }
    (a * libm::pow(s / s_max, b)).clamp(0.0, 1.0)
}

#[inline]
fn fat_frequency_scale(s: f64, hist: &Histogram, smooth: bool) -> f64 {
    let rho_max = hist.rho_max();
    if rho_max == 0 {
        return 0.0;
    }
    let rho = if smooth { hist.smoothed_density(s) } else { hist.density(s) as f64 };
    (rho / rho_max as f64).min(1.0)
}

/// Interior-emphasized lookup.
///
/// Tissues: `C = clamp(a (s/s_max)^b, 0, 1) * C_m`, `alpha = alpha_m`.
/// Fat: both color and opacity are scaled by `rho_fat(s) / rho_fat_max`,
/// which is zero when the fat region is empty.
pub fn eval_interior(
    m: Material,
    s: f64,
    grid: &VolumeGrid,
    params: &StyleParams,
    palette: &MaterialPalette,
) -> Result<(Rgb, f64), TransferError> {
    let hist = params.fat_hist.as_ref().ok_or(TransferError::MissingHistogram)?;
    Ok(interior(m, s, grid.s_max() as f64, params, hist, palette))
}

#[inline]
fn interior(m: Material, s: f64, s_max: f64, params: &StyleParams, hist: &Histogram, palette: &MaterialPalette) -> (Rgb, f64) {
    match m {
        Material::Fat => {
            let k = fat_frequency_scale(s, hist, params.smooth_hist);
            (palette.color(m).scale(k), palette.alpha(m) * k)
        }
        _ => (
            palette.color(m).scale(value_scale(s, s_max, params.a, params.b)),
            palette.alpha(m),
        ),
    }
}

/// Fat-emphasized lookup: tissues are constant, fat color is
/// `clamp(a (s/s_max)^b, 0, 1) * C_fat` with constant opacity.
pub fn eval_fat_emphasized(
    m: Material,
    s: f64,
    grid: &VolumeGrid,
    params: &StyleParams,
    palette: &MaterialPalette,
) -> (Rgb, f64) {
    fat_emphasized(m, s, grid.s_max() as f64, params, palette)
}

#[inline]
fn fat_emphasized(m: Material, s: f64, s_max: f64, params: &StyleParams, palette: &MaterialPalette) -> (Rgb, f64) {
    match m {
        Material::Fat => (
            palette.color(m).scale(value_scale(s, s_max, params.a, params.b)),
            palette.alpha(m),
        ),
        _ => (palette.color(m), palette.alpha(m)),
    }
}

/// Validated style + palette bound to one volume's `s_max`.
#[derive(Clone, Debug)]
pub struct Transfer {
    params: StyleParams,
    palette: MaterialPalette,
    s_max: f64,
}

impl Transfer {
    pub fn new(params: StyleParams, palette: MaterialPalette, grid: &VolumeGrid) -> Result<Self, TransferError> {
        if !(params.a.is_finite() && params.a > 0.0) {
            return Err(TransferError::BadGain(params.a));
        }
        if !(params.b.is_finite() && params.b > 0.0) {
            return Err(TransferError::BadExponent(params.b));
        }
        if params.style == Style::InteriorEmphasized && params.fat_hist.is_none() {
            return Err(TransferError::MissingHistogram);
        }
        palette.validate()?;
        Ok(Transfer { params, palette, s_max: grid.s_max() as f64 })
    }

    pub fn params(&self) -> &StyleParams {
        &self.params
    }

    pub fn palette(&self) -> &MaterialPalette {
        &self.palette
    }

    #[inline]
    pub fn eval(&self, m: Material, s: f64) -> (Rgb, f64) {
        match self.params.style {
            Style::InteriorEmphasized => {
                let hist = self.params.fat_hist.as_ref().expect("checked in Transfer::new");
                interior(m, s, self.s_max, &self.params, hist, &self.palette)
            }
            Style::FatEmphasized => fat_emphasized(m, s, self.s_max, &self.params, &self.palette),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use alloc::vec;
    use proptest::prelude::*;

    fn grid(s_max: f32) -> VolumeGrid {
        let mut v = vec![0.0; 8];
        v[7] = s_max;
        VolumeGrid::new([2, 2, 2], [1.0; 3], Vec3::ZERO, v).unwrap()
    }

    fn hist() -> Histogram {
        // modal bin is bin 2 of 4 over [0, 100]
        Histogram::from_counts(0.0, 100.0, vec![1, 5, 10, 0]).unwrap()
    }

    fn interior_params() -> StyleParams {
        StyleParams { fat_hist: Some(hist()), ..StyleParams::new(Style::InteriorEmphasized) }
    }

    fn rgb255(r: f64, g: f64, b: f64) -> Rgb {
        Rgb::new(r / 255.0, g / 255.0, b / 255.0)
    }

    #[test]
    fn default_palette_constants() {
        let p = MaterialPalette::default();
        assert_eq!(p.color(Material::Bone), rgb255(244.0, 214.0, 145.0));
        assert_eq!(p.color(Material::Muscle), rgb255(255.0, 98.0, 56.0));
        assert_eq!(p.color(Material::Ligament), rgb255(170.0, 170.0, 170.0));
        assert_eq!(p.color(Material::Tendon), rgb255(255.0, 255.0, 255.0));
        assert_eq!(p.color(Material::Fat), rgb255(177.0, 122.0, 101.0));
        for m in [Material::Bone, Material::Muscle, Material::Ligament, Material::Tendon] {
            assert_eq!(p.alpha(m), 1.0);
        }
        assert_eq!(p.alpha(Material::Fat), 0.6);
    }

    #[test]
    fn interior_saturated_bone() {
        let g = grid(100.0);
        let (c, a) = eval_interior(Material::Bone, 80.0, &g, &interior_params(), &MaterialPalette::default()).unwrap();
        // a (s/s_max)^b = 2 * 0.8 >= 1
        assert_eq!(c, rgb255(244.0, 214.0, 145.0));
        assert_eq!(a, 1.0);
    }

    #[test]
    fn interior_formula_below_saturation() {
        let g = grid(100.0);
        let params = StyleParams { a: 1.5, b: 2.0, ..interior_params() };
        let (c, a) = eval_interior(Material::Muscle, 50.0, &g, &params, &MaterialPalette::default()).unwrap();
        let k = 1.5 * 0.25;
        assert!((c.r - k).abs() < 1e-15);
        assert!((c.g - k * 98.0 / 255.0).abs() < 1e-15);
        assert_eq!(a, 1.0);
    }

    #[test]
    fn interior_fat_modal_and_empty_bins() {
        let g = grid(100.0);
        let pal = MaterialPalette::default();
        let (c, a) = eval_interior(Material::Fat, 60.0, &g, &interior_params(), &pal).unwrap();
        assert_eq!(c, rgb255(177.0, 122.0, 101.0));
        assert_eq!(a, 0.6);
        let (c, a) = eval_interior(Material::Fat, 90.0, &g, &interior_params(), &pal).unwrap();
        assert_eq!((c, a), (Rgb::BLACK, 0.0));
        let (c, a) = eval_interior(Material::Fat, 30.0, &g, &interior_params(), &pal).unwrap();
        assert!((a - 0.6 * 0.5).abs() < 1e-15);
        assert!((c.r - 0.5 * 177.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn interior_fat_with_empty_histogram_is_dark() {
        let g = grid(100.0);
        let params = StyleParams { fat_hist: Some(Histogram::empty(0.0, 100.0, 8).unwrap()), ..interior_params() };
        let (c, a) = eval_interior(Material::Fat, 10.0, &g, &params, &MaterialPalette::default()).unwrap();
        assert_eq!((c, a), (Rgb::BLACK, 0.0));
    }

    #[test]
    fn interior_muscle_at_zero_is_black_opaque() {
        let g = grid(100.0);
        let (c, a) = eval_interior(Material::Muscle, 0.0, &g, &interior_params(), &MaterialPalette::default()).unwrap();
        assert_eq!(c, Rgb::BLACK);
        assert_eq!(a, 1.0);
    }

    #[test]
    fn interior_requires_histogram() {
        let g = grid(100.0);
        let params = StyleParams::new(Style::InteriorEmphasized);
        assert_eq!(
            eval_interior(Material::Bone, 1.0, &g, &params, &MaterialPalette::default()),
            Err(TransferError::MissingHistogram)
        );
        assert!(matches!(
            Transfer::new(params, MaterialPalette::default(), &g),
            Err(TransferError::MissingHistogram)
        ));
    }

    #[test]
    fn fat_emphasized_tissues_are_constant() {
        let g = grid(100.0);
        let params = StyleParams::new(Style::FatEmphasized);
        let pal = MaterialPalette::default();
        for s in [0.0, 13.0, 100.0] {
            assert_eq!(eval_fat_emphasized(Material::Muscle, s, &g, &params, &pal), (rgb255(255.0, 98.0, 56.0), 1.0));
            assert_eq!(eval_fat_emphasized(Material::Tendon, s, &g, &params, &pal), (Rgb::WHITE, 1.0));
        }
    }

    #[test]
    fn fat_emphasized_fat() {
        let g = grid(100.0);
        let params = StyleParams::new(Style::FatEmphasized);
        let pal = MaterialPalette::default();
        assert_eq!(eval_fat_emphasized(Material::Fat, 0.0, &g, &params, &pal), (Rgb::BLACK, 0.6));
        assert_eq!(eval_fat_emphasized(Material::Fat, 70.0, &g, &params, &pal), (pal.color(Material::Fat), 0.6));
        let (c, _) = eval_fat_emphasized(Material::Fat, 25.0, &g, &params, &pal);
        assert!((c.r - 0.5 * 177.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        let g = grid(1.0);
        let bad_a = StyleParams { a: 0.0, ..StyleParams::new(Style::FatEmphasized) };
        assert!(matches!(Transfer::new(bad_a, MaterialPalette::default(), &g), Err(TransferError::BadGain(_))));
        let bad_b = StyleParams { b: f64::NAN, ..StyleParams::new(Style::FatEmphasized) };
        assert!(matches!(Transfer::new(bad_b, MaterialPalette::default(), &g), Err(TransferError::BadExponent(_))));
        let mut pal = MaterialPalette::default();
        pal.set(Material::Fat, Rgb::new(1.2, 0.0, 0.0), 0.5);
        assert!(Transfer::new(StyleParams::new(Style::FatEmphasized), pal, &g).is_err());
    }

    proptest! {
        #[test]
        fn outputs_stay_in_unit_range(
            s in 0.0f64..=100.0,
            a in 0.01f64..50.0,
            b in 0.01f64..8.0,
            mi in 0usize..5,
            interior_style in any::<bool>(),
        ) {
            let g = grid(100.0);
            let style = if interior_style { Style::InteriorEmphasized } else { Style::FatEmphasized };
            let params = StyleParams { a, b, style, fat_hist: Some(hist()), smooth_hist: false };
            let t = Transfer::new(params, MaterialPalette::default(), &g).unwrap();
            let (c, alpha) = t.eval(Material::ALL[mi], s);
            for v in c.channels() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!((0.0..=1.0).contains(&alpha));
        }

        #[test]
        fn interior_tissue_color_is_monotone(s1 in 0.0f64..=100.0, s2 in 0.0f64..=100.0, a in 0.01f64..5.0, b in 0.05f64..5.0, mi in 0usize..4) {
            let g = grid(100.0);
            let params = StyleParams { a, b, ..interior_params() };
            let t = Transfer::new(params, MaterialPalette::default(), &g).unwrap();
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let (c1, _) = t.eval(Material::ALL[mi], lo);
            let (c2, _) = t.eval(Material::ALL[mi], hi);
            prop_assert!(c1.r <= c2.r && c1.g <= c2.g && c1.b <= c2.b);
        }

        #[test]
        fn interior_fat_depends_only_on_frequency(s1 in 0.0f64..=100.0, s2 in 0.0f64..=100.0) {
            let g = grid(100.0);
            let t = Transfer::new(interior_params(), MaterialPalette::default(), &g).unwrap();
            let h = hist();
            if h.density(s1) == h.density(s2) {
                prop_assert_eq!(t.eval(Material::Fat, s1), t.eval(Material::Fat, s2));
            }
        }
    }
}
