use crate::math::Rgb;

/// Folds `C_i = alpha_i c_i + (1 - alpha_i) C_{i+1}` from the last sample to
/// the first, starting from `background` behind the last sample.
///
/// `samples` are (color, opacity) pairs ordered front to back.
pub fn composite_back_to_front(samples: &[(Rgb, f64)], background: Rgb) -> Rgb {
    samples.iter().rev().fold(background, |acc, &(c, a)| {
        let keep = 1.0 - a;
        Rgb::new(a * c.r + keep * acc.r, a * c.g + keep * acc.g, a * c.b + keep * acc.b)
    })
}
