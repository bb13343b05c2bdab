use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::primitives::AABox;

/// Binary raster of one instance, placed at `origin` in image coordinates.
///
/// Bits are packed row-major into 64-bit words; each row starts on a word
/// boundary and unused trailing bits are always zero. An empty mask has zero
/// width and height.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    x: i64,
    y: i64,
    width: usize,
    height: usize,
    stride: usize,
    words: Vec<u64>,
    area: usize,
}

#[inline]
fn words_for(width: usize) -> usize {
    width.div_ceil(64)
}

impl BitMask {
    pub fn empty() -> Self {
        Self { x: 0, y: 0, width: 0, height: 0, stride: 0, words: Vec::new(), area: 0 }
    }

    /// All-zero raster of the given extent.
    pub fn zeros(x: i64, y: i64, width: usize, height: usize) -> Self {
        if width == 0 || height == 0 {
            return Self::empty();
        }
        let stride = words_for(width);
        Self { x, y, width, height, stride, words: vec![0; stride * height], area: 0 }
    }

    pub fn full(x: i64, y: i64, width: usize, height: usize) -> Self {
        let mut m = Self::zeros(x, y, width, height);
        for row in 0..m.height {
            m.fill_row_span(row, 0, width);
        }
        m
    }

    /// Builds a mask from a row-major slice of `width × height` flags.
    pub fn from_bits(x: i64, y: i64, width: usize, height: usize, bits: &[bool]) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Format(format!("bit count {} does not match {width}×{height}", bits.len())));
        }
        let mut m = Self::zeros(x, y, width, height);
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            m.set_local(i % width, i / width);
        }
        Ok(m)
    }

    pub fn from_fn(x: i64, y: i64, width: usize, height: usize, f: impl Fn(i64, i64) -> bool) -> Self {
        let mut m = Self::zeros(x, y, width, height);
        for row in 0..m.height {
            for col in 0..m.width {
                if f(x + col as i64, y + row as i64) {
                    m.set_local(col, row);
                }
            }
        }
        m
    }

    pub fn origin(&self) -> (i64, i64) {
        (self.x, self.y)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of set pixels.
    pub fn area(&self) -> usize {
        self.area
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    /// Pixel value at image coordinates; false outside the extent.
    pub fn get(&self, px: i64, py: i64) -> bool {
        let (col, row) = (px - self.x, py - self.y);
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return false;
        }
        let (col, row) = (col as usize, row as usize);
        self.words[row * self.stride + col / 64] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, px: i64, py: i64) {
        let (col, row) = (px - self.x, py - self.y);
        assert!(
            col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height,
            "pixel ({px}, {py}) outside mask extent"
        );
        self.set_local(col as usize, row as usize);
    }

    fn set_local(&mut self, col: usize, row: usize) {
        let w = &mut self.words[row * self.stride + col / 64];
        let bit = 1u64 << (col % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.area += 1;
        }
    }

    /// Sets local columns `[c0, c1)` of `row`.
    pub(crate) fn fill_row_span(&mut self, row: usize, c0: usize, c1: usize) {
        debug_assert!(c1 <= self.width && row < self.height);
        let base = row * self.stride;
        let mut c = c0;
        while c < c1 {
            let off = c % 64;
            let n = (64 - off).min(c1 - c);
            let bits = if n == 64 { u64::MAX } else { ((1u64 << n) - 1) << off };
            let w = &mut self.words[base + c / 64];
            self.area += (bits & !*w).count_ones() as usize;
            *w |= bits;
            c += n;
        }
    }

    /// Iterates the image coordinates of set pixels in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.height).flat_map(move |row| {
            let words = &self.words[row * self.stride..(row + 1) * self.stride];
            words.iter().enumerate().flat_map(move |(wi, &w)| {
                let mut w = w;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((self.x + (wi * 64 + b) as i64, self.y + row as i64))
                })
            })
        })
    }

    /// Leftmost and rightmost set column of each nonempty row, as image
    /// coordinates `(y, x_first, x_last)`.
    pub fn row_extremes(&self) -> Vec<(i64, i64, i64)> {
        let mut out = Vec::new();
        for row in 0..self.height {
            let words = self.row(row);
            let first = words.iter().position(|&w| w != 0);
            let Some(first) = first else { continue };
            let last = words.iter().rposition(|&w| w != 0).expect("row has a set word");
            let c0 = first * 64 + words[first].trailing_zeros() as usize;
            let c1 = last * 64 + 63 - words[last].leading_zeros() as usize;
            out.push((self.y + row as i64, self.x + c0 as i64, self.x + c1 as i64));
        }
        out
    }

    fn row(&self, row: usize) -> &[u64] {
        &self.words[row * self.stride..(row + 1) * self.stride]
    }

    /// Integer pixel extent `(x0, y0, x1, y1)` (exclusive upper bounds) of the
    /// set pixels, or `None` for an empty mask.
    pub fn set_extent(&self) -> Option<(i64, i64, i64, i64)> {
        if self.is_empty() {
            return None;
        }
        let rows = self.row_extremes();
        let y0 = rows.first()?.0;
        let y1 = rows.last()?.0 + 1;
        let x0 = rows.iter().map(|r| r.1).min()?;
        let x1 = rows.iter().map(|r| r.2).max()? + 1;
        Some((x0, y0, x1, y1))
    }

    /// Copy cropped to the extent of the set pixels.
    pub fn tightened(&self) -> Self {
        let Some((x0, y0, x1, y1)) = self.set_extent() else {
            return Self::empty();
        };
        if (x0, y0) == (self.x, self.y) && (x1 - x0) as usize == self.width && (y1 - y0) as usize == self.height {
            return self.clone();
        }
        let mut m = Self::zeros(x0, y0, (x1 - x0) as usize, (y1 - y0) as usize);
        for (px, py) in self.iter_set() {
            m.set(px, py);
        }
        m
    }

    /// Moves the mask by an integer offset.
    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        Self { x: self.x + dx, y: self.y + dy, ..self.clone() }
    }

    /// Replaces every pixel with a `k × k` block (origin scaled as well).
    pub fn upscaled(&self, k: usize) -> Self {
        assert!(k > 0, "scale factor must be positive");
        if self.is_empty() && self.width == 0 {
            return Self::empty();
        }
        let ki = k as i64;
        let mut m = Self::zeros(self.x * ki, self.y * ki, self.width * k, self.height * k);
        for (px, py) in self.iter_set() {
            let (c, r) = (((px - self.x) * ki) as usize, ((py - self.y) * ki) as usize);
            for dr in 0..k {
                m.fill_row_span(r + dr, c, c + k);
            }
        }
        m
    }

    /// Number of pixels set in both masks, in shared image coordinates.
    pub fn intersection_area(&self, other: &Self) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.width as i64).min(other.x + other.width as i64);
        let y1 = (self.y + self.height as i64).min(other.y + other.height as i64);
        if x0 >= x1 || y0 >= y1 {
            return 0;
        }
        let n = (x1 - x0) as usize;
        let (ca, cb) = ((x0 - self.x) as usize, (x0 - other.x) as usize);
        let mut total = 0usize;
        for py in y0..y1 {
            let ra = self.row((py - self.y) as usize);
            let rb = other.row((py - other.y) as usize);
            let mut k = 0;
            while k < n {
                let take = (n - k).min(64);
                let keep = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
                let both = chunk(ra, ca + k) & chunk(rb, cb + k) & keep;
                total += both.count_ones() as usize;
                k += take;
            }
        }
        total
    }

    /// Row-major run lengths, alternating unset/set and starting with an
    /// unset run (which may be zero).
    pub fn to_rle(&self) -> Vec<u64> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u64;
        for row in 0..self.height {
            for col in 0..self.width {
                let bit = self.words[row * self.stride + col / 64] >> (col % 64) & 1 == 1;
                if bit != current {
                    runs.push(len);
                    len = 0;
                    current = bit;
                }
                len += 1;
            }
        }
        if len > 0 || runs.is_empty() {
            runs.push(len);
        }
        runs
    }

    /// Inverse of [`BitMask::to_rle`]; the runs must total `width × height`.
    pub fn from_rle(x: i64, y: i64, width: usize, height: usize, runs: &[u64]) -> Result<Self> {
        let total: u64 = runs.iter().sum();
        let expected = (width * height) as u64;
        if total != expected {
            return Err(Error::Format(format!("rle covers {total} pixels, expected {width}×{height} = {expected}")));
        }
        let mut m = Self::zeros(x, y, width, height);
        let mut pos = 0usize;
        for (i, &run) in runs.iter().enumerate() {
            let run = run as usize;
            if i % 2 == 1 {
                let mut p = pos;
                while p < pos + run {
                    let (row, col) = (p / width, p % width);
                    let end = (pos + run).min((row + 1) * width);
                    m.fill_row_span(row, col, col + (end - p));
                    p = end;
                }
            }
            pos += run;
        }
        Ok(m)
    }
}

/// 64 bits of `row` starting at bit `start`; bits past the row read as zero.
#[inline]
fn chunk(row: &[u64], start: usize) -> u64 {
    let (i, sh) = (start / 64, start % 64);
    let lo = row.get(i).copied().unwrap_or(0) >> sh;
    if sh == 0 {
        lo
    } else {
        lo | row.get(i + 1).copied().unwrap_or(0) << (64 - sh)
    }
}

/// Count of set pixels.
pub fn mask_area(m: &BitMask) -> usize {
    m.area()
}

/// Count of pixels set in both masks.
pub fn mask_intersection_area(a: &BitMask, b: &BitMask) -> usize {
    a.intersection_area(b)
}

/// Intersection over union of two masks; 0 when both are empty.
pub fn mask_iou<T: Scalar>(a: &BitMask, b: &BitMask) -> T {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union == 0 {
        T::zero()
    } else {
        T::from_usize(inter).expect("count fits") / T::from_usize(union).expect("count fits")
    }
}

/// Tightest box around the set pixels; pixel `(px, py)` covers
/// `[px, px+1) × [py, py+1)`.
pub fn mask_bounding_box<T: Scalar>(m: &BitMask) -> Result<AABox<T>> {
    let (x0, y0, x1, y1) = m.set_extent().ok_or(Error::EmptyMask)?;
    AABox::new(T::from_i64_lossy(x0), T::from_i64_lossy(y0), T::from_i64_lossy(x1), T::from_i64_lossy(y1))
}
