use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::mask::BitMask;
use super::primitives::{AABox, Quad};

/// Rasterizes a quad: pixel `(px, py)` is set iff its center
/// `(px + 0.5, py + 0.5)` lies inside `q` or on its boundary.
///
/// When `clip` is given, only pixels whose centers fall inside the clip box
/// are considered. The result is tight around its set pixels and may be
/// empty for quads thinner than a pixel.
pub fn rasterize_quad<T: Scalar>(q: &Quad<T>, clip: Option<&AABox<T>>) -> Result<BitMask> {
    q.validate()?;
    if let Some(c) = clip {
        if c.width() <= T::zero() || c.height() <= T::zero() {
            return Err(Error::InvalidArgument("degenerate clip box".into()));
        }
    }
    let half = T::lit(0.5);
    let bb = q.bounding_box();
    let (mut lo, mut hi) = (bb.y_min, bb.y_max);
    if let Some(c) = clip {
        lo = lo.max(c.y_min);
        hi = hi.min(c.y_max);
    }
    let (Some(row0), Some(row1)) = ((lo - half).ceil().to_i64(), (hi - half).floor().to_i64()) else {
        return Ok(BitMask::empty());
    };
    let col_clip = clip.and_then(|c| Some(((c.x_min - half).ceil().to_i64()?, (c.x_max - half).floor().to_i64()?)));

    let v = q.vertices();
    let edges: Vec<_> = (0..4).map(|i| (v[i], v[(i + 1) % 4])).collect();
    let mut spans: Vec<(i64, i64, i64)> = Vec::new();
    let mut xs: Vec<T> = Vec::with_capacity(4);
    let mut intervals: Vec<(T, T)> = Vec::with_capacity(8);

    for py in row0..=row1 {
        let cy = T::from_i64_lossy(py) + half;
        xs.clear();
        intervals.clear();
        for &(a, b) in &edges {
            let x_at = |a: super::Point<T>, b: super::Point<T>| a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y);
            // interior crossings, half-open in y
            if (a.y <= cy) != (b.y <= cy) {
                xs.push(x_at(a, b));
            }
            // boundary contact
            if a.y == cy && b.y == cy {
                intervals.push((a.x.min(b.x), a.x.max(b.x)));
            } else if a.y == cy {
                intervals.push((a.x, a.x));
            } else if b.y == cy {
                intervals.push((b.x, b.x));
            } else if a.y.min(b.y) < cy && cy < a.y.max(b.y) {
                let x = x_at(a, b);
                intervals.push((x, x));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite crossings"));
        intervals.extend(xs.chunks_exact(2).map(|p| (p[0], p[1])));

        for &(l, r) in &intervals {
            let (Some(mut c0), Some(mut c1)) = ((l - half).ceil().to_i64(), (r - half).floor().to_i64()) else {
                continue;
            };
            if let Some((k0, k1)) = col_clip {
                c0 = c0.max(k0);
                c1 = c1.min(k1);
            }
            if c0 <= c1 {
                spans.push((py, c0, c1));
            }
        }
    }

    if spans.is_empty() {
        return Ok(BitMask::empty());
    }
    let y0 = spans.iter().map(|s| s.0).min().expect("nonempty");
    let y1 = spans.iter().map(|s| s.0).max().expect("nonempty");
    let x0 = spans.iter().map(|s| s.1).min().expect("nonempty");
    let x1 = spans.iter().map(|s| s.2).max().expect("nonempty");
    let mut mask = BitMask::zeros(x0, y0, (x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    for (py, c0, c1) in spans {
        mask.fill_row_span((py - y0) as usize, (c0 - x0) as usize, (c1 - x0 + 1) as usize);
    }
    Ok(mask)
}
