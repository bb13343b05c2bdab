//! Ground-truth annotation parsing, per-instance mask generation, and the
//! detection file format.

mod detections;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{mask_bounding_box, rasterize_quad, rotated_rect_to_quad, AABox, BitMask, Point, Quad, RotatedRect};
use crate::scalar::Scalar;

pub use detections::{read_detections, read_detections_file, write_detections, write_detections_file};

/// Transcription that marks a region as don't-care in ICDAR files.
pub const DONT_CARE_TEXT: &str = "###";

/// One annotated text region.
#[derive(Debug, Clone, PartialEq)]
pub struct GtInstance<T> {
    pub quad: Quad<T>,
    pub dont_care: bool,
    pub transcription: Option<String>,
    /// Rasterized quad; filled by [`gt_to_instances`].
    pub mask: Option<BitMask>,
    /// Pixel-extent box of `mask`; `None` while unfilled or when the mask
    /// is empty.
    pub bbox: Option<AABox<T>>,
}

impl<T: Scalar> GtInstance<T> {
    pub fn new(quad: Quad<T>, dont_care: bool, transcription: Option<String>) -> Self {
        Self { quad, dont_care, transcription, mask: None, bbox: None }
    }

    /// Rasterizes the quad and fills `mask`/`bbox`. Empty masks turn the
    /// instance into a don't-care region.
    pub fn rasterized(mut self) -> Result<Self> {
        let mask = rasterize_quad(&self.quad, None)?;
        self.bbox = mask_bounding_box(&mask).ok();
        if mask.is_empty() {
            self.dont_care = true;
        }
        self.mask = Some(mask);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord<T> {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<GtInstance<T>>,
}

impl<T: Scalar> ImageRecord<T> {
    /// Record sized to the extent of its quads (annotation files carry no
    /// image size).
    pub fn from_instances(image_id: impl Into<String>, instances: Vec<GtInstance<T>>) -> Self {
        let (mut w, mut h) = (0u32, 0u32);
        for inst in &instances {
            let b = inst.quad.bounding_box();
            w = w.max(b.x_max.max(T::zero()).ceil().to_u32().unwrap_or(u32::MAX));
            h = h.max(b.y_max.max(T::zero()).ceil().to_u32().unwrap_or(u32::MAX));
        }
        Self { image_id: image_id.into(), width: w, height: h, instances }
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    /// Instances that count towards recall.
    pub fn num_cared(&self) -> usize {
        self.instances.iter().filter(|i| !i.dont_care).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtFormat {
    /// `gt_<id>.txt`: `x1,y1,x2,y2,x3,y3,x4,y4,transcription` per line.
    Icdar15,
    /// `<id>.gt`: `index difficulty x y w h angle` per line.
    Td500,
}

impl GtFormat {
    /// Image id for a file name in this format, if the name matches.
    pub fn image_id(&self, file_name: &str) -> Option<String> {
        match self {
            GtFormat::Icdar15 => file_name.strip_prefix("gt_")?.strip_suffix(".txt").map(str::to_owned),
            GtFormat::Td500 => file_name.strip_suffix(".gt").map(str::to_owned),
        }
    }

    pub fn file_name(&self, image_id: &str) -> String {
        match self {
            GtFormat::Icdar15 => format!("gt_{image_id}.txt"),
            GtFormat::Td500 => format!("{image_id}.gt"),
        }
    }

    pub fn parse<T: Scalar>(&self, text: &str, image_id: &str) -> Result<ImageRecord<T>> {
        match self {
            GtFormat::Icdar15 => parse_icdar15_gt(text, image_id),
            GtFormat::Td500 => parse_td500_gt(text, image_id),
        }
    }
}

fn parse_num<T: Scalar>(field: &str, line: usize) -> Result<T> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("expected a number, found {:?}", field.trim()) })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite coordinate {v}") });
    }
    Ok(T::lit(v))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| !l.trim().is_empty())
}

/// Parses an ICDAR 2015 word-level annotation file. A transcription of
/// `###` marks the region don't-care.
pub fn parse_icdar15_gt<T: Scalar>(text: &str, image_id: &str) -> Result<ImageRecord<T>> {
    let mut instances = Vec::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.splitn(9, ',').collect();
        if fields.len() < 8 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 8 coordinates and a transcription, found {} fields", fields.len()),
            });
        }
        let mut c = [T::zero(); 8];
        for (slot, f) in c.iter_mut().zip(&fields[..8]) {
            *slot = parse_num(f, line)?;
        }
        let quad = Quad::from_coords(c).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let transcription = fields.get(8).map(|t| t.to_string());
        let dont_care = transcription.as_deref().map(str::trim) == Some(DONT_CARE_TEXT);
        instances.push(GtInstance::new(quad, dont_care, transcription));
    }
    Ok(ImageRecord::from_instances(image_id, instances))
}

/// Parses an MSRA-TD500 line-level annotation file. `(x, y)` is the
/// top-left corner of the unrotated rectangle, which is rotated by `angle`
/// radians about its centre; difficulty 1 marks the region don't-care.
pub fn parse_td500_gt<T: Scalar>(text: &str, image_id: &str) -> Result<ImageRecord<T>> {
    let mut instances = Vec::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::Parse { line, msg: format!("expected 7 fields, found {}", fields.len()) });
        }
        fields[0].parse::<i64>().map_err(|_| Error::Parse { line, msg: format!("bad index {:?}", fields[0]) })?;
        let difficulty: i64 =
            fields[1].parse().map_err(|_| Error::Parse { line, msg: format!("bad difficulty {:?}", fields[1]) })?;
        let [x, y, w, h, angle]: [T; 5] = [
            parse_num(fields[2], line)?,
            parse_num(fields[3], line)?,
            parse_num(fields[4], line)?,
            parse_num(fields[5], line)?,
            parse_num(fields[6], line)?,
        ];
        let half = T::lit(0.5);
        let rect = RotatedRect::new(Point::new(x + w * half, y + h * half), w, h, angle)
            .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        instances.push(GtInstance::new(rotated_rect_to_quad(&rect), difficulty != 0, None));
    }
    Ok(ImageRecord::from_instances(image_id, instances))
}

/// Fills mask and box for every instance; instances whose quads rasterize
/// to nothing become don't-care.
pub fn gt_to_instances<T: Scalar>(record: ImageRecord<T>) -> Result<ImageRecord<T>> {
    let ImageRecord { image_id, width, height, instances } = record;
    let instances = instances
        .into_iter()
        .enumerate()
        .map(|(i, inst)| {
            inst.rasterized().map_err(|e| Error::InvalidGeometry(format!("instance {i} of image {image_id}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageRecord { image_id, width, height, instances })
}

/// Serializes a record as an ICDAR 2015 annotation file.
pub fn write_icdar15_gt<T: Scalar>(record: &ImageRecord<T>) -> String {
    let mut out = String::new();
    for inst in &record.instances {
        let coords: Vec<String> = inst.quad.coords().iter().map(|c| c.as_f64().to_string()).collect();
        let text = match (&inst.transcription, inst.dont_care) {
            (_, true) => DONT_CARE_TEXT,
            (Some(t), false) if t.trim() != DONT_CARE_TEXT => t.as_str(),
            _ => "",
        };
        out.push_str(&coords.join(","));
        out.push(',');
        out.push_str(text);
        out.push('\n');
    }
    out
}

/// Loads every annotation file of `format` in `dir`, sorted by image id.
/// Masks are not generated; see [`gt_to_instances`].
pub fn load_gt_dir<T: Scalar>(dir: &Path, format: GtFormat) -> Result<Vec<ImageRecord<T>>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::from(e).in_file(dir))?.path();
        let id = path.file_name().and_then(|n| n.to_str()).and_then(|n| format.image_id(n));
        if let Some(id) = id {
            files.push((id, path));
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|(id, path)| {
            let bytes = fs::read(&path).map_err(|e| Error::from(e).in_file(&path))?;
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Format("annotation file is not UTF-8".into()).in_file(&path))?;
            format.parse(&text, &id).map_err(|e| e.in_file(&path))
        })
        .collect()
}
