use serde::{Deserialize, Serialize};

use super::Mask2dError;
use crate::scalar::Real;

/// Pixel coordinate; `x` is the column, `y` the row. Orders by `x` then `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Row-major boolean image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, Mask2dError> {
        if bits.len() != width * height {
            return Err(Mask2dError::InvalidDimensions {
                width,
                height,
                len: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    /// Parses rows of `'1'`/`'#'` (set) and anything else (clear).
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut m = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate().take(width) {
                m.set(x, y, c == '1' || c == '#');
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.bits[y * self.width + x]
    }

    /// Out-of-bounds reads are background.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        if x < self.width && y < self.height {
            self.bits[y * self.width + x] = value;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Set pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| Pixel::new(i % self.width, i / self.width))
    }

    /// Number of set 8-neighbors of `p`.
    pub fn neighbor_count(&self, p: Pixel) -> usize {
        neighbors8(p)
            .iter()
            .filter(|(dx, dy)| self.get_signed(*dx, *dy))
            .count()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Labels 8-connected components; background is `usize::MAX`.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut labels = vec![usize::MAX; self.bits.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || labels[start] != usize::MAX {
                continue;
            }
            labels[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let p = Pixel::new(i % self.width, i / self.width);
                for (nx, ny) in neighbors8(p) {
                    if self.get_signed(nx, ny) {
                        let j = ny as usize * self.width + nx as usize;
                        if labels[j] == usize::MAX {
                            labels[j] = next;
                            stack.push(j);
                        }
                    }
                }
            }
            next += 1;
        }
        (labels, next)
    }

    /// Grows the mask by a square structuring element of the given radius.
    pub fn dilate(&self, radius: usize) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let mut out = Self::new(self.width, self.height);
        let r = radius as isize;
        for p in self.pixels() {
            for dy in -r..=r {
                for dx in -r..=r {
                    let (x, y) = (p.x as isize + dx, p.y as isize + dy);
                    if x >= 0 && y >= 0 {
                        out.set(x as usize, y as usize, true);
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn neighbors8(p: Pixel) -> [(isize, isize); 8] {
    let (x, y) = (p.x as isize, p.y as isize);
    [
        (x - 1, y - 1),
        (x, y - 1),
        (x + 1, y - 1),
        (x - 1, y),
        (x + 1, y),
        (x - 1, y + 1),
        (x, y + 1),
        (x + 1, y + 1),
    ]
}

/// Row-major scalar image: gray intensities or depth in millimeters.
/// Depth rasters mark invalid pixels with `0` or a non-finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<T>) -> Result<Self, Mask2dError> {
        if values.len() != width * height {
            return Err(Mask2dError::InvalidDimensions {
                width,
                height,
                len: values.len(),
            });
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.values[y * self.width + x] = v;
    }

    /// Valid depth sample: finite and non-zero.
    pub fn is_valid_depth(v: T) -> bool {
        v.is_finite() && v != T::zero()
    }

    /// Copies the `w x h` window at `(x0, y0)`, clipped to the raster.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        let x1 = (x0 + w).min(self.width);
        let y1 = (y0 + h).min(self.height);
        let (cw, ch) = (x1.saturating_sub(x0), y1.saturating_sub(y0));
        let mut values = Vec::with_capacity(cw * ch);
        for y in y0..y1 {
            values.extend_from_slice(&self.values[y * self.width + x0..y * self.width + x1]);
        }
        Self {
            width: cw,
            height: ch,
            values,
        }
    }
}

/// Replaces every masked pixel by the mean of the masked pixels.
pub fn flood_fill_average<T: Real>(image: &Raster<T>, mask: &BinaryMask) -> Result<Raster<T>, Mask2dError> {
    if image.width != mask.width() || image.height != mask.height() {
        return Err(Mask2dError::DimensionMismatch {
            image: (image.width, image.height),
            mask: (mask.width(), mask.height()),
        });
    }
    let mut out = image.clone();
    let mut count = 0usize;
    let mut sum = T::zero();
    for (v, m) in image.values.iter().zip(mask.bits()) {
        if *m {
            sum += *v;
            count += 1;
        }
    }
    if count == 0 {
        return Ok(out);
    }
    let mean = sum / T::from_usize(count).unwrap_or_else(T::one);
    for (v, m) in out.values.iter_mut().zip(mask.bits()) {
        if *m {
            *v = mean;
        }
    }
    Ok(out)
}
