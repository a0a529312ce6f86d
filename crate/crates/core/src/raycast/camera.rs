use core::fmt;

use crate::math::{Ray, Vec3};

/// Pinhole camera. Pixel (0, 0) is the top-left corner of the image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    position: Vec3,
    look_at: Vec3,
    up: Vec3,
    vfov_deg: f64,
    width: u32,
    height: u32,
    forward: Vec3,
    right: Vec3,
    true_up: Vec3,
    half_h: f64,
    half_w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CameraError {
    /// `up` is zero or parallel to the viewing direction, or the camera sits
    /// on its look-at point.
    DegenerateBasis,
    BadFov(f64),
    BadResolution(u32, u32),
    NonFinite,
}

impl fmt::Display for CameraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CameraError::DegenerateBasis => {
                write!(f, "camera up vector is parallel to the view direction (or position equals look_at)")
            }
            CameraError::BadFov(v) => write!(f, "vertical field of view {v} must be in (0, 180) degrees"),
            CameraError::BadResolution(w, h) => write!(f, "resolution {w}x{h} must be at least 1x1"),
            CameraError::NonFinite => write!(f, "camera parameters must be finite"),
        }
    }
}

impl core::error::Error for CameraError {}

impl Camera {
    pub fn new(position: Vec3, look_at: Vec3, up: Vec3, vfov_deg: f64, width: u32, height: u32) -> Result<Self, CameraError> {
        if !(position.is_finite() && look_at.is_finite() && up.is_finite() && vfov_deg.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        if !(vfov_deg > 0.0 && vfov_deg < 180.0) {
            return Err(CameraError::BadFov(vfov_deg));
        }
        if width == 0 || height == 0 {
            return Err(CameraError::BadResolution(width, height));
        }
        let view = look_at - position;
        let forward = view.normalized();
        let side = forward.cross(up);
        if view.length() == 0.0 || side.length() <= 1e-12 * up.length() {
            return Err(CameraError::DegenerateBasis);
        }
        let right = side.normalized();
        let true_up = right.cross(forward);
        let half_h = libm::tan(vfov_deg.to_radians() * 0.5);
        let half_w = half_h * width as f64 / height as f64;
        Ok(Camera { position, look_at, up, vfov_deg, width, height, forward, right, true_up, half_h, half_w })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn look_at(&self) -> Vec3 {
        self.look_at
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    pub fn vfov_deg(&self) -> f64 {
        self.vfov_deg
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Same camera with another output size.
    pub fn with_resolution(&self, width: u32, height: u32) -> Result<Self, CameraError> {
        Camera::new(self.position, self.look_at, self.up, self.vfov_deg, width, height)
    }

    /// Unit-direction ray through `(px + sx, py + sy)` in pixel units;
    /// `(0.5, 0.5)` is the pixel center.
    pub fn generate_ray(&self, px: u32, py: u32, subpixel: (f64, f64)) -> Ray {
        let x = ((px as f64 + subpixel.0) / self.width as f64) * 2.0 - 1.0;
        let y = 1.0 - ((py as f64 + subpixel.1) / self.height as f64) * 2.0;
        let dir = self.forward + self.right * (x * self.half_w) + self.true_up * (y * self.half_h);
        Ray::new(self.position, dir.normalized())
    }

    pub fn pixel_center_ray(&self, px: u32, py: u32) -> Ray {
        self.generate_ray(px, py, (0.5, 0.5))
    }
}
