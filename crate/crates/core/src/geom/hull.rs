use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::mask::BitMask;
use super::primitives::{Point, Quad, RotatedRect};

/// Convex hull of integer points, counter-clockwise in a y-up frame
/// (Andrew's monotone chain). Collinear points are dropped.
pub(crate) fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
    };
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Hull of the set-pixel centres of `m`, in doubled integer coordinates
/// (`2·px + 1`, `2·py + 1`) so the hull is computed exactly.
fn center_hull(m: &BitMask) -> Vec<(i64, i64)> {
    let mut pts = Vec::new();
    for (y, x0, x1) in m.row_extremes() {
        pts.push((2 * x0 + 1, 2 * y + 1));
        if x1 != x0 {
            pts.push((2 * x1 + 1, 2 * y + 1));
        }
    }
    convex_hull(pts)
}

#[derive(Debug, Clone, Copy)]
struct Caliper<T> {
    area: T,
    base: Point<T>,
    u: Point<T>,
    n: Point<T>,
    s_min: T,
    s_max: T,
    t_max: T,
}

impl<T: Scalar> Caliper<T> {
    fn corners(&self) -> [Point<T>; 4] {
        let at = |s: T, t: T| {
            Point::new(self.base.x + self.u.x * s + self.n.x * t, self.base.y + self.u.y * s + self.n.y * t)
        };
        [at(self.s_min, T::zero()), at(self.s_max, T::zero()), at(self.s_max, self.t_max), at(self.s_min, self.t_max)]
    }
}

fn dot<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    a.x * b.x + a.y * b.y
}

fn sub<T: Scalar>(a: Point<T>, b: Point<T>) -> Point<T> {
    Point::new(a.x - b.x, a.y - b.y)
}

/// Minimum-area enclosing rectangle of a convex polygon (≥ 3 vertices,
/// counter-clockwise in a y-up frame) by rotating calipers.
fn rotating_calipers<T: Scalar>(hull: &[Point<T>]) -> Caliper<T> {
    let h = hull.len();
    let edge = |i: usize| {
        let d = sub(hull[(i + 1) % h], hull[i]);
        let len = (d.x * d.x + d.y * d.y).sqrt();
        let u = Point::new(d.x / len, d.y / len);
        (u, Point::new(-u.y, u.x))
    };
    let argmax =
        |f: &dyn Fn(Point<T>) -> T| (0..h).fold(0, |best, j| if f(hull[j]) > f(hull[best]) { j } else { best });

    let (u0, n0) = edge(0);
    let mut right = argmax(&|p| dot(p, u0));
    let mut far = argmax(&|p| dot(p, n0));
    let mut left = argmax(&|p| -dot(p, u0));
    let mut best: Option<Caliper<T>> = None;

    for i in 0..h {
        let (u, n) = edge(i);
        let advance = |mut k: usize, f: &dyn Fn(Point<T>) -> T| {
            for _ in 0..h {
                let next = (k + 1) % h;
                if f(hull[next]) > f(hull[k]) {
                    k = next;
                } else {
                    break;
                }
            }
            k
        };
        right = advance(right, &|p| dot(p, u));
        far = advance(far, &|p| dot(p, n));
        left = advance(left, &|p| -dot(p, u));

        let base = hull[i];
        let s_max = dot(sub(hull[right], base), u);
        let s_min = dot(sub(hull[left], base), u);
        let t_max = dot(sub(hull[far], base), n);
        let area = (s_max - s_min) * t_max;
        if best.as_ref().is_none_or(|b| area < b.area) {
            best = Some(Caliper { area, base, u, n, s_min, s_max, t_max });
        }
    }
    best.expect("hull has edges")
}

enum Fit<T> {
    Point(Point<T>),
    Segment(Point<T>, Point<T>),
    Rect(Caliper<T>),
}

fn fit<T: Scalar>(m: &BitMask) -> Result<Fit<T>> {
    if m.is_empty() {
        return Err(Error::EmptyMask);
    }
    let half = T::lit(0.5);
    let hull: Vec<Point<T>> = center_hull(m)
        .into_iter()
        .map(|(x, y)| Point::new(T::from_i64_lossy(x) * half, T::from_i64_lossy(y) * half))
        .collect();
    Ok(match hull.len() {
        1 => Fit::Point(hull[0]),
        2 => Fit::Segment(hull[0], hull[1]),
        _ => Fit::Rect(rotating_calipers(&hull)),
    })
}

/// Minimum-area rotated rectangle enclosing every set-pixel centre of `m`,
/// as a normalized quad. Single pixels and single lines give degenerate
/// quads.
pub fn min_area_quad<T: Scalar>(m: &BitMask) -> Result<Quad<T>> {
    let corners = match fit::<T>(m)? {
        Fit::Point(p) => [p; 4],
        Fit::Segment(a, b) => [a, b, b, a],
        Fit::Rect(c) => c.corners(),
    };
    Quad::new(corners)
}

/// Same fit as [`min_area_quad`], expressed as a [`RotatedRect`] whose
/// `width` runs along the hull edge the rectangle is flush with.
pub fn min_area_rect<T: Scalar>(m: &BitMask) -> Result<RotatedRect<T>> {
    let half = T::lit(0.5);
    match fit::<T>(m)? {
        Fit::Point(p) => RotatedRect::new(p, T::zero(), T::zero(), T::zero()),
        Fit::Segment(a, b) => {
            let d = sub(b, a);
            let center = Point::new((a.x + b.x) * half, (a.y + b.y) * half);
            RotatedRect::new(center, (d.x * d.x + d.y * d.y).sqrt(), T::zero(), d.y.atan2(d.x))
        }
        Fit::Rect(c) => {
            let k = c.corners();
            let center = Point::new((k[0].x + k[2].x) * half, (k[0].y + k[2].y) * half);
            RotatedRect::new(center, c.s_max - c.s_min, c.t_max, c.u.y.atan2(c.u.x))
        }
    }
}
