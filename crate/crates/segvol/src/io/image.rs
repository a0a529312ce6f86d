use std::path::Path;

use segvol_core::{FrameBuffer, Rgb};

use super::{read_file, write_file, IoError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    /// `.png` selects PNG, anything else PPM.
    pub fn from_path(path: &Path) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::Ppm,
        }
    }
}

/// Binary PPM (`P6`), 8 bits per channel, rows from the top.
pub fn encode_ppm(fb: &FrameBuffer, gamma: bool) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", fb.width(), fb.height()).into_bytes();
    out.extend_from_slice(&fb.to_rgb8(gamma));
    out
}

/// 8-bit RGB raster read from a PPM file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rgb8Image {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Rgb8Image {
    /// Linear buffer whose quantization gives back these bytes (gamma off).
    pub fn to_frame_buffer(&self) -> FrameBuffer {
        let pixels = self.data.chunks_exact(3).map(|c| Rgb::from_u8(c[0], c[1], c[2])).collect();
        FrameBuffer::from_pixels(self.width, self.height, pixels)
    }
}

/// Parses a binary `P6` file with maxval 255. Comments are allowed in the
/// header.
pub fn decode_ppm(bytes: &[u8], context: &str) -> Result<Rgb8Image, IoError> {
    let err = |offset: usize, message: &str| IoError::Parse { context: context.into(), offset, message: message.into() };
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(err(pos, "header ended early"));
        }
        fields.push((start, std::str::from_utf8(&bytes[start..pos]).map_err(|_| err(start, "header is not ASCII"))?));
    }
    if fields[0].1 != "P6" {
        return Err(err(0, "not a binary PPM (expected `P6`)"));
    }
    let mut nums = [0u32; 3];
    for (n, (off, text)) in nums.iter_mut().zip(&fields[1..]) {
        *n = text.parse().map_err(|_| err(*off, &format!("bad header number `{text}`")))?;
    }
    let [width, height, maxval] = nums;
    if width == 0 || height == 0 {
        return Err(err(fields[1].0, "image size must be positive"));
    }
    if maxval != 255 {
        return Err(err(fields[3].0, "only maxval 255 is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let len = width as usize * height as usize * 3;
    let data = bytes.get(pos..).filter(|d| d.len() == len).ok_or_else(|| {
        err(pos.min(bytes.len()), &format!("raster holds {} bytes, expected {len}", bytes.len().saturating_sub(pos)))
    })?;
    Ok(Rgb8Image { width, height, data: data.to_vec() })
}

pub fn read_ppm(path: &Path) -> Result<Rgb8Image, IoError> {
    decode_ppm(&read_file(path)?, &path.display().to_string())
}

fn encode_png(fb: &FrameBuffer, gamma: bool, path: &Path) -> Result<Vec<u8>, IoError> {
    let mut out = Vec::new();
    let png_err = |source| IoError::Png { path: path.to_path_buf(), source };
    {
        let mut enc = png::Encoder::new(&mut out, fb.width(), fb.height());
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&fb.to_rgb8(gamma)).map_err(png_err)?;
    }
    Ok(out)
}

pub fn write_image(fb: &FrameBuffer, path: &Path, format: ImageFormat, gamma: bool) -> Result<(), IoError> {
    let bytes = match format {
        ImageFormat::Ppm => encode_ppm(fb, gamma),
        ImageFormat::Png => encode_png(fb, gamma, path)?,
    };
    write_file(path, &bytes)
}
