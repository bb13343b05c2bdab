//! JSON-lines detection files. Each line:
//!
//! ```text
//! {"image_id": str, "score": float,
//!  "mask": {"x": int, "y": int, "w": int, "h": int, "rle": [int, ...]},
//!  "quad": [[x, y], [x, y], [x, y], [x, y]] | null}
//! ```
//!
//! `rle` holds row-major run lengths alternating unset/set, starting with
//! an unset run (possibly 0).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BitMask, Point, Quad};
use crate::nms::Detection;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
struct MaskRecord {
    x: i64,
    y: i64,
    w: usize,
    h: usize,
    rle: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct DetectionRecord {
    image_id: String,
    score: f64,
    mask: MaskRecord,
    quad: Option<[[f64; 2]; 4]>,
}

impl DetectionRecord {
    fn from_detection<T: Scalar>(d: &Detection<T>) -> Self {
        let m = d.mask();
        let (x, y) = m.origin();
        Self {
            image_id: d.image_id.clone(),
            score: d.score().as_f64(),
            mask: MaskRecord { x, y, w: m.width(), h: m.height(), rle: m.to_rle() },
            quad: d.quad.map(|q| q.vertices().map(|p| [p.x.as_f64(), p.y.as_f64()])),
        }
    }

    fn into_detection<T: Scalar>(self) -> Result<Detection<T>> {
        let MaskRecord { x, y, w, h, rle } = self.mask;
        let mask = BitMask::from_rle(x, y, w, h, &rle)?;
        let quad = match self.quad {
            Some(q) => Some(Quad::new(q.map(|[x, y]| Point::new(T::lit(x), T::lit(y))))?),
            None => None,
        };
        Ok(Detection::new(self.image_id, T::lit(self.score), mask)?.with_quad(quad))
    }
}

pub fn write_detections<T: Scalar, W: Write>(mut out: W, dets: &[Detection<T>]) -> Result<()> {
    for d in dets {
        let line =
            serde_json::to_string(&DetectionRecord::from_detection(d)).map_err(|e| Error::Format(e.to_string()))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads detections; blank lines are skipped. Errors carry the 1-based
/// line number.
pub fn read_detections<T: Scalar, R: BufRead>(input: R) -> Result<Vec<Detection<T>>> {
    let mut dets = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DetectionRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        let det = record.into_detection().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        dets.push(det);
    }
    Ok(dets)
}

pub fn read_detections_file<T: Scalar>(path: &Path) -> Result<Vec<Detection<T>>> {
    let file = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    read_detections(BufReader::new(file)).map_err(|e| e.in_file(path))
}

pub fn write_detections_file<T: Scalar>(path: &Path, dets: &[Detection<T>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::from(e).in_file(path))?;
    write_detections(BufWriter::new(file), dets).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream() {
        let dets: Vec<Detection<f64>> = read_detections(&b""[..]).unwrap();
        assert!(dets.is_empty());
    }

    #[test]
    fn line_format() {
        let mask = BitMask::from_bits(3, 4, 2, 2, &[false, true, true, true]).unwrap();
        let d = Detection::new("img", 0.75f64, mask).unwrap();
        let mut buf = Vec::new();
        write_detections(&mut buf, &[d]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"image_id\":\"img\",\"score\":0.75,\"mask\":{\"x\":3,\"y\":4,\"w\":2,\"h\":2,\"rle\":[1,3]},\"quad\":null}\n"
        );
    }

    #[test]
    fn rle_length_mismatch_is_format_error() {
        let line = r#"{"image_id":"a","score":0.5,"mask":{"x":0,"y":0,"w":2,"h":2,"rle":[1,2]},"quad":null}"#;
        let err = read_detections::<f64, _>(line.as_bytes()).unwrap_err();
        match err {
            Error::Parse { line: 1, msg } => assert!(msg.contains("rle"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "\n{\"image_id\":\"a\",\"score\":0.5,\"mask\":{\"x\":0,\"y\":0,\"w\":1,\"h\":1,\"rle\":[0,1]},\"quad\":null}\n{oops\n";
        assert!(matches!(read_detections::<f64, _>(text.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn empty_mask_rejected() {
        let line = r#"{"image_id":"a","score":0.5,"mask":{"x":0,"y":0,"w":2,"h":1,"rle":[2]},"quad":null}"#;
        assert!(read_detections::<f64, _>(line.as_bytes()).is_err());
    }
}
