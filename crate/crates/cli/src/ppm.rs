use std::io::Write;

use textgeom::BitMask;

/// Writes a binary PPM of `width`×`height` with each mask in its own colour.
/// Pixels outside the image are dropped; later masks paint over earlier ones.
pub fn write_masks<W: Write>(mut out: W, width: u32, height: u32, masks: &[&BitMask]) -> std::io::Result<()> {
    let (w, h) = (width as usize, height as usize);
    let mut pixels = vec![0u8; w * h * 3];
    for (k, mask) in masks.iter().enumerate() {
        let rgb = palette(k);
        for (x, y) in mask.iter_set() {
            if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
                continue;
            }
            let at = (y as usize * w + x as usize) * 3;
            pixels[at..at + 3].copy_from_slice(&rgb);
        }
    }
    write!(out, "P6\n{w} {h}\n255\n")?;
    out.write_all(&pixels)?;
    out.flush()
}

fn palette(k: usize) -> [u8; 3] {
    // golden-angle hue steps
    let hue = (k as f64 * 137.507_764) % 360.0;
    let x = 1.0 - ((hue / 60.0) % 2.0 - 1.0).abs();
    let (r, g, b) = match (hue / 60.0) as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (55.0 + 200.0 * c) as u8)
}
