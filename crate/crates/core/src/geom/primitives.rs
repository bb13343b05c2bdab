use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point in image coordinates (x right, y down), in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> Point<U> {
        Point::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

/// Twice the signed area of triangle (a, b, c). Positive when a→b→c turns
/// clockwise on screen (y axis pointing down).
#[inline]
pub(crate) fn cross<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Axis-aligned box `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AABox<T> {
    pub x_min: T,
    pub y_min: T,
    pub x_max: T,
    pub y_max: T,
}

impl<T: Scalar> AABox<T> {
    pub fn new(x_min: T, y_min: T, x_max: T, y_max: T) -> Result<Self> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min > x_max || y_min > y_max {
            return Err(Error::InvalidBox(format!("[{x_min}, {y_min}, {x_max}, {y_max}]")));
        }
        Ok(Self { x_min, y_min, x_max, y_max })
    }

    /// Box with the given center and size. Sizes must be non-negative.
    pub fn from_center(cx: T, cy: T, w: T, h: T) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(cx - w * half, cy - h * half, cx + w * half, cy + h * half)
    }

    /// Tightest box around a nonempty set of points.
    pub fn enclosing<I: IntoIterator<Item = Point<T>>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let p = it.next()?;
        let mut b = Self { x_min: p.x, y_min: p.y, x_max: p.x, y_max: p.y };
        for p in it {
            b.x_min = b.x_min.min(p.x);
            b.y_min = b.y_min.min(p.y);
            b.x_max = b.x_max.max(p.x);
            b.y_max = b.y_max.max(p.y);
        }
        Some(b)
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point<T> {
        let half = T::lit(0.5);
        Point::new((self.x_min + self.x_max) * half, (self.y_min + self.y_max) * half)
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= T::zero() || h <= T::zero() {
            T::zero()
        } else {
            w * h
        }
    }

    /// True when the closed boxes share at least one point.
    pub fn touches(&self, other: &Self) -> bool {
        self.x_min <= other.x_max && other.x_min <= self.x_max && self.y_min <= other.y_max && other.y_min <= self.y_max
    }

    pub fn translate(&self, dx: T, dy: T) -> Self {
        Self { x_min: self.x_min + dx, y_min: self.y_min + dy, x_max: self.x_max + dx, y_max: self.y_max + dy }
    }

    pub fn scale(&self, k: T) -> Self {
        Self { x_min: self.x_min * k, y_min: self.y_min * k, x_max: self.x_max * k, y_max: self.y_max * k }
    }

    pub fn cast<U: Scalar>(&self) -> AABox<U> {
        AABox {
            x_min: U::lit(self.x_min.as_f64()),
            y_min: U::lit(self.y_min.as_f64()),
            x_max: U::lit(self.x_max.as_f64()),
            y_max: U::lit(self.y_max.as_f64()),
        }
    }
}

/// Intersection over union of two boxes; 0 when the union has no area.
pub fn box_iou<T: Scalar>(a: &AABox<T>, b: &AABox<T>) -> T {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= T::zero() {
        T::zero()
    } else {
        inter / union
    }
}

/// A four-vertex polygon with canonical vertex order.
///
/// Construction reorders the vertices clockwise on screen (y down), starting
/// from the vertex with the smallest y (then smallest x). Degenerate
/// (zero-area) quads keep their winding. Simplicity is checked separately by
/// [`Quad::is_simple`], since self-intersecting input must still be
/// representable in order to be reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad<T> {
    vertices: [Point<T>; 4],
}

impl<T: Scalar> Quad<T> {
    pub fn new(vertices: [Point<T>; 4]) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex ({}, {})", p.x, p.y)));
        }
        Ok(Self { vertices: normalize(vertices) })
    }

    pub fn from_coords(c: [T; 8]) -> Result<Self> {
        Self::new([Point::new(c[0], c[1]), Point::new(c[2], c[3]), Point::new(c[4], c[5]), Point::new(c[6], c[7])])
    }

    pub fn vertices(&self) -> &[Point<T>; 4] {
        &self.vertices
    }

    /// Shoelace area (non-negative after normalization for simple quads).
    pub fn area(&self) -> T {
        signed_area2(&self.vertices).abs() * T::lit(0.5)
    }

    /// False when two non-adjacent edges cross properly.
    pub fn is_simple(&self) -> bool {
        let v = &self.vertices;
        !segments_cross(v[0], v[1], v[2], v[3]) && !segments_cross(v[1], v[2], v[3], v[0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_simple() {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!("self-intersecting quad {:?}", self.coords())))
        }
    }

    pub fn bounding_box(&self) -> AABox<T> {
        AABox::enclosing(self.vertices.iter().copied()).expect("four vertices")
    }

    pub fn coords(&self) -> [T; 8] {
        let v = &self.vertices;
        [v[0].x, v[0].y, v[1].x, v[1].y, v[2].x, v[2].y, v[3].x, v[3].y]
    }

    pub fn map(&self, f: impl Fn(Point<T>) -> Point<T>) -> Result<Self> {
        Self::new(self.vertices.map(f))
    }

    pub fn cast<U: Scalar>(&self) -> Quad<U> {
        Quad { vertices: normalize(self.vertices.map(Point::cast)) }
    }
}

fn signed_area2<T: Scalar>(v: &[Point<T>; 4]) -> T {
    (0..4).fold(T::zero(), |acc, i| {
        let (a, b) = (v[i], v[(i + 1) % 4]);
        acc + a.x * b.y - b.x * a.y
    })
}

fn normalize<T: Scalar>(mut v: [Point<T>; 4]) -> [Point<T>; 4] {
    if signed_area2(&v) < T::zero() {
        v.swap(1, 3);
    }
    let scale = v.iter().fold(T::one(), |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let tol = T::epsilon() * T::lit(1024.0) * scale;
    let mut start = 0;
    for (i, p) in v.iter().enumerate().skip(1) {
        let best = v[start];
        if p.y < best.y - tol || ((p.y - best.y).abs() <= tol && p.x < best.x) {
            start = i;
        }
    }
    v.rotate_left(start);
    v
}

fn segments_cross<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    let zero = T::zero();
    ((d1 > zero && d2 < zero) || (d1 < zero && d2 > zero)) && ((d3 > zero && d4 < zero) || (d3 < zero && d4 > zero))
}

/// Rectangle of size `width × height` rotated by `angle` radians about its
/// center. Positive angles rotate clockwise on screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedRect<T> {
    pub center: Point<T>,
    pub width: T,
    pub height: T,
    pub angle: T,
}

impl<T: Scalar> RotatedRect<T> {
    /// Validates sizes and folds the angle into (−π/2, π/2].
    pub fn new(center: Point<T>, width: T, height: T, angle: T) -> Result<Self> {
        if !center.is_finite() || !angle.is_finite() {
            return Err(Error::InvalidGeometry("non-finite rotated rect".into()));
        }
        if !(width >= T::zero() && height >= T::zero()) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidGeometry(format!("rect size {width}×{height}")));
        }
        Ok(Self { center, width, height, angle: fold_half_turn(angle) })
    }

    pub fn corners(&self) -> [Point<T>; 4] {
        let (s, c) = self.angle.sin_cos();
        let half = T::lit(0.5);
        let (hw, hh) = (self.width * half, self.height * half);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
            .map(|(lx, ly)| Point::new(self.center.x + lx * c - ly * s, self.center.y + lx * s + ly * c))
    }

    pub fn area(&self) -> T {
        self.width * self.height
    }
}

fn fold_half_turn<T: Scalar>(angle: T) -> T {
    let pi = T::PI();
    let half = pi * T::lit(0.5);
    let mut a = angle - (angle / pi).round() * pi;
    if a <= -half {
        a = a + pi;
    } else if a > half {
        a = a - pi;
    }
    a
}

/// Corners of `r` as a normalized quad.
pub fn rotated_rect_to_quad<T: Scalar>(r: &RotatedRect<T>) -> Quad<T> {
    Quad::new(r.corners()).expect("finite rect corners")
}
