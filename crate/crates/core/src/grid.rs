//! Rectangular windows of the plane and per-pixel classification grids.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A window `[re_min, re_max] x [im_min, im_max]` sampled on `width x height`
/// pixels. Pixel `(i, j)` is column `i`, row `j` counted from the top, and
/// its center is
/// `(re_min + (i + 0.5) * (re_max - re_min) / width, im_max - (j + 0.5) * (im_max - im_min) / height)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let g = GridSpec {
            re_min,
            re_max,
            im_min,
            im_max,
            width,
            height,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square window `[-half, half]^2`.
    pub fn square(half: f64, size: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, size, size)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.re_min < self.re_max) || !(self.im_min < self.im_max) {
            return Err(Error::invalid(format!(
                "grid window [{}, {}] x [{}, {}] is empty or not finite",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("grid width and height must be at least 1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_width(&self) -> f64 {
        (self.re_max - self.re_min) / self.width as f64
    }

    pub fn pixel_height(&self) -> f64 {
        (self.im_max - self.im_min) / self.height as f64
    }

    pub fn pixel_center(&self, i: usize, j: usize) -> Complex64 {
        let re = self.re_min + (i as f64 + 0.5) * (self.re_max - self.re_min) / self.width as f64;
        let im = self.im_max - (j as f64 + 0.5) * (self.im_max - self.im_min) / self.height as f64;
        Complex64::new(re, im)
    }

    pub fn center_of_index(&self, idx: usize) -> Complex64 {
        self.pixel_center(idx % self.width, idx / self.width)
    }

    /// Lattice point at the top-left corner of pixel `(i, j)`; valid for
    /// `i <= width`, `j <= height`.
    pub fn corner(&self, i: usize, j: usize) -> Complex64 {
        let re = self.re_min + (i as f64 * (self.re_max - self.re_min)) / self.width as f64;
        let im = self.im_max - (j as f64 * (self.im_max - self.im_min)) / self.height as f64;
        Complex64::new(re, im)
    }

    /// Pixel containing `z`, or `None` outside the window (or for non-finite
    /// input).
    pub fn point_to_pixel(&self, z: Complex64) -> Option<(usize, usize)> {
        let u = (z.re - self.re_min) / (self.re_max - self.re_min) * self.width as f64;
        let v = (self.im_max - z.im) / (self.im_max - self.im_min) * self.height as f64;
        if !(u >= 0.0 && v >= 0.0) {
            return None;
        }
        let (i, j) = (u.floor(), v.floor());
        if i < self.width as f64 && j < self.height as f64 {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }

    pub fn contains_point(&self, z: Complex64) -> bool {
        self.point_to_pixel(z).is_some()
    }

    pub fn point_to_index(&self, z: Complex64) -> Option<usize> {
        self.point_to_pixel(z).map(|(i, j)| j * self.width + i)
    }
}

/// Per-pixel class codes shared by escape, Julia and pre-image grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PixelClass {
    /// Escaping-set candidate (every word of length <= L escaped).
    Escaping = 0,
    /// Some word stayed bounded.
    Bounded = 1,
    JuliaBand = 2,
    Fatou = 3,
    /// Image left the window; excluded from residuals.
    Unknown = 4,
    Indeterminate = 5,
}

impl PixelClass {
    pub fn name(self) -> &'static str {
        match self {
            PixelClass::Escaping => "escaping",
            PixelClass::Bounded => "bounded",
            PixelClass::JuliaBand => "julia",
            PixelClass::Fatou => "fatou",
            PixelClass::Unknown => "unknown",
            PixelClass::Indeterminate => "indeterminate",
        }
    }

    pub fn gray(self) -> u8 {
        match self {
            PixelClass::Escaping | PixelClass::JuliaBand => 0,
            PixelClass::Bounded | PixelClass::Fatou => 255,
            PixelClass::Unknown | PixelClass::Indeterminate => 128,
        }
    }
}

/// Where a grid came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMeta {
    pub label: String,
    pub seed: u64,
    pub version: &'static str,
}

impl GridMeta {
    pub fn new(label: impl Into<String>, seed: u64) -> Self {
        GridMeta {
            label: label.into(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    pub grid: GridSpec,
    /// Row-major, row 0 at `im_max`.
    pub classes: Vec<PixelClass>,
    pub meta: GridMeta,
}

impl IndicatorGrid {
    pub fn filled(grid: GridSpec, class: PixelClass, meta: GridMeta) -> Self {
        IndicatorGrid {
            grid,
            classes: vec![class; grid.len()],
            meta,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> PixelClass {
        self.classes[j * self.grid.width + i]
    }

    /// Class of the pixel containing `z`, if inside the window.
    pub fn class_at(&self, z: Complex64) -> Option<PixelClass> {
        self.grid.point_to_index(z).map(|k| self.classes[k])
    }

    pub fn mask(&self, class: PixelClass) -> Vec<bool> {
        self.classes.iter().map(|&c| c == class).collect()
    }

    pub fn count(&self, class: PixelClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn fraction(&self, class: PixelClass) -> f64 {
        self.count(class) as f64 / self.classes.len() as f64
    }
}

/// Chebyshev dilation of a boolean mask by `radius` pixels.
pub fn dilate(mask: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    if radius == 0 {
        return mask.to_vec();
    }
    let mut horiz = vec![false; mask.len()];
    for j in 0..height {
        let row = &mask[j * width..(j + 1) * width];
        // distance to the nearest set pixel on the left, then on the right
        let mut last: Option<usize> = None;
        for i in 0..width {
            if row[i] {
                last = Some(i);
            }
            if let Some(l) = last {
                if i - l <= radius {
                    horiz[j * width + i] = true;
                }
            }
        }
        let mut next: Option<usize> = None;
        for i in (0..width).rev() {
            if row[i] {
                next = Some(i);
            }
            if let Some(n) = next {
                if n - i <= radius {
                    horiz[j * width + i] = true;
                }
            }
        }
    }
    let mut out = vec![false; mask.len()];
    for i in 0..width {
        let mut last: Option<usize> = None;
        for j in 0..height {
            if horiz[j * width + i] {
                last = Some(j);
            }
            if let Some(l) = last {
                if j - l <= radius {
                    out[j * width + i] = true;
                }
            }
        }
        let mut next: Option<usize> = None;
        for j in (0..height).rev() {
            if horiz[j * width + i] {
                next = Some(j);
            }
            if let Some(n) = next {
                if n - j <= radius {
                    out[j * width + i] = true;
                }
            }
        }
    }
    out
}

/// Pixels within `radius` (Chebyshev) of a pixel on the other side of the
/// mask boundary. With `radius == 0` nothing is excluded.
pub fn boundary_band(mask: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    if radius == 0 {
        return vec![false; mask.len()];
    }
    let inside = dilate(mask, width, height, radius);
    let complement: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let outside = dilate(&complement, width, height, radius);
    inside.iter().zip(&outside).map(|(&a, &b)| a && b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_windows() {
        assert!(GridSpec::new(1.0, 1.0, 0.0, 1.0, 4, 4).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 0, 4).is_err());
        assert!(GridSpec::new(0.0, f64::NAN, 0.0, 1.0, 4, 4).is_err());
    }

    #[test]
    fn center_matches_affine_formula() {
        let g = GridSpec::square(2.0, 4).unwrap();
        assert_eq!(g.pixel_center(0, 0), Complex64::new(-1.5, 1.5));
        assert_eq!(g.pixel_center(3, 3), Complex64::new(1.5, -1.5));
    }

    #[test]
    fn pixel_round_trip_on_centers() {
        for &(w, h) in &[(1, 1), (2, 3), (17, 5), (400, 400), (1024, 1024)] {
            let g = GridSpec::new(-2.3, 1.7, -0.9, 3.1, w, h).unwrap();
            for j in 0..h {
                for i in 0..w {
                    assert_eq!(g.point_to_pixel(g.pixel_center(i, j)), Some((i, j)));
                }
            }
        }
    }

    #[test]
    fn symmetric_corner_lands_on_axis() {
        let g = GridSpec::square(2.0, 400).unwrap();
        assert_eq!(g.corner(200, 200), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn outside_window_has_no_pixel() {
        let g = GridSpec::square(1.0, 10).unwrap();
        assert_eq!(g.point_to_pixel(Complex64::new(1.5, 0.0)), None);
        assert_eq!(g.point_to_pixel(Complex64::new(0.0, -1.0)), None);
        assert_eq!(g.point_to_pixel(Complex64::new(f64::NAN, 0.0)), None);
    }

    #[test]
    fn dilation_is_chebyshev() {
        let (w, h) = (7, 7);
        let mut m = vec![false; w * h];
        m[3 * w + 3] = true;
        let d = dilate(&m, w, h, 2);
        assert_eq!(d.iter().filter(|&&b| b).count(), 25);
        assert!(d[w + 1] && !d[0]);
    }

    #[test]
    fn band_straddles_the_boundary() {
        let (w, h) = (10, 1);
        let m: Vec<bool> = (0..w).map(|i| i < 5).collect();
        let b = boundary_band(&m, w, h, 1);
        let got: Vec<usize> = (0..w).filter(|&i| b[i]).collect();
        assert_eq!(got, vec![4, 5]);
    }
}
