//! Brute-force oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use textgeom::geom::{rasterize_quad, rotated_rect_to_quad, BitMask, Point, Quad, RotatedRect};
use textgeom::nms::Detection;
use textgeom::synth::SplitMix64;

/// Crossing-number containment with boundary points counted inside.
pub fn point_in_polygon(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (ax, ay) = poly[i];
        let (bx, by) = poly[(i + 1) % n];
        let cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
        let within =
            x >= ax.min(bx) - 1e-12 && x <= ax.max(bx) + 1e-12 && y >= ay.min(by) - 1e-12 && y <= ay.max(by) + 1e-12;
        if cross.abs() <= 1e-9 && within {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Pixels of `mask` that disagree with the point-in-polygon oracle over the
/// quad's bounding box plus a two-pixel margin.
pub fn raster_disagreements(q: &Quad<f64>, mask: &BitMask) -> usize {
    let poly: Vec<(f64, f64)> = q.vertices().iter().map(|p| (p.x, p.y)).collect();
    let b = q.bounding_box();
    let mut bad = 0;
    for py in (b.y_min.floor() as i64 - 2)..=(b.y_max.ceil() as i64 + 2) {
        for px in (b.x_min.floor() as i64 - 2)..=(b.x_max.ceil() as i64 + 2) {
            let want = point_in_polygon(&poly, px as f64 + 0.5, py as f64 + 0.5);
            if want != mask.get(px, py) {
                bad += 1;
            }
        }
    }
    bad
}

/// Random simple quad with vertices in `[lo, hi)²`, convex or not.
pub fn random_simple_quad(rng: &mut SplitMix64, lo: f64, hi: f64) -> Quad<f64> {
    loop {
        let pts = [(); 4].map(|_| Point::new(rng.uniform(lo, hi), rng.uniform(lo, hi)));
        if let Ok(q) = Quad::new(pts) {
            if q.is_simple() && q.area() > 1.0 {
                return q;
            }
        }
    }
}

/// Random rotated rectangle at least `min_thick` px thick, fully inside a
/// `size`² image.
pub fn random_rect(rng: &mut SplitMix64, size: f64, min_thick: f64) -> RotatedRect<f64> {
    loop {
        let w = rng.uniform(min_thick, size / 2.0);
        let h = rng.uniform(min_thick, size / 2.0);
        let r = RotatedRect::new(
            Point::new(rng.uniform(0.0, size), rng.uniform(0.0, size)),
            w,
            h,
            rng.uniform(-90.0, 90.0).to_radians(),
        )
        .unwrap();
        let b = rotated_rect_to_quad(&r).bounding_box();
        if b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= size && b.y_max <= size {
            return r;
        }
    }
}

/// Area of the axis-aligned box of `pts` after rotating them by `theta`.
fn rotated_extent_area(pts: &[(f64, f64)], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        let u = x * c + y * s;
        let v = -x * s + y * c;
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    (u1 - u0) * (v1 - v0)
}

/// Minimum enclosing-rectangle area of the set-pixel centres by exhaustive
/// rotation sweep: 0.25° steps over [0°, 90°), then 0.005° steps within
/// ±0.25° of the coarse minimum.
pub fn sweep_min_area(mask: &BitMask) -> f64 {
    let pts: Vec<(f64, f64)> = mask.iter_set().map(|(x, y)| (x as f64 + 0.5, y as f64 + 0.5)).collect();
    let mut best = (f64::MAX, 0.0);
    for k in 0..360 {
        let deg = k as f64 * 0.25;
        let a = rotated_extent_area(&pts, deg.to_radians());
        if a < best.0 {
            best = (a, deg);
        }
    }
    let mut fine = best.0;
    for k in -50..=50 {
        let deg = best.1 + k as f64 * 0.005;
        fine = fine.min(rotated_extent_area(&pts, deg.to_radians()));
    }
    fine
}

/// Axis-aligned rectangle mask covering pixels `[x0, x1) × [y0, y1)`.
pub fn rect_mask(x0: i64, y0: i64, x1: i64, y1: i64) -> BitMask {
    BitMask::full(x0, y0, (x1 - x0) as usize, (y1 - y0) as usize)
}

pub fn det(score: f64, mask: BitMask) -> Detection<f64> {
    Detection::new("img", score, mask).unwrap()
}

pub fn quad_det(score: f64, q: &Quad<f64>) -> Detection<f64> {
    det(score, rasterize_quad(q, None).unwrap())
}
