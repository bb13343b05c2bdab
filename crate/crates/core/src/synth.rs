//! Seeded synthetic scenes with known ground truth.
//!
//! Three scenarios: a pair of parallel, heavily inclined text lines whose
//! masks are disjoint but whose boxes overlap; a line-level detection with
//! two word-level detections nested inside it; and a random layout of
//! rotated rectangles with jittered detections.

use crate::datasets::{GtInstance, ImageRecord};
use crate::error::{Error, Result};
use crate::geom::{box_iou, mask_iou, rasterize_quad, rotated_rect_to_quad, AABox, BitMask, Point, Quad, RotatedRect};
use crate::nms::{mmi, Detection};

/// SplitMix64. The generator and the float mapping are fixed so scenes are
/// reproducible across platforms and languages.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    InclinedPair,
    LineWord,
    Random {
        n: usize,
        /// Rotation range in degrees.
        angle_range: (f64, f64),
        /// Range of the long side in pixels.
        size_range: (f64, f64),
        /// Maximum displacement of each detection vertex, in pixels.
        jitter: f64,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::InclinedPair => "inclined_pair",
            Scenario::LineWord => "line_word",
            Scenario::Random { .. } => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub image_w: u32,
    pub image_h: u32,
    pub scenario: Scenario,
}

impl SceneSpec {
    pub fn image_id(&self) -> String {
        format!("{}_{}", self.scenario.name(), self.seed)
    }
}

/// Ground truth and detections for one synthetic image.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub record: ImageRecord<f64>,
    pub detections: Vec<Detection<f64>>,
}

const MAX_REJECTIONS: usize = 10_000;

struct Shape {
    quad: Quad<f64>,
    mask: BitMask,
    bbox: AABox<f64>,
}

fn shape(rect: &RotatedRect<f64>) -> Result<Shape> {
    let quad = rotated_rect_to_quad(rect);
    let mask = rasterize_quad(&quad, None)?;
    let bbox = quad.bounding_box();
    Ok(Shape { quad, mask, bbox })
}

fn inside(b: &AABox<f64>, spec: &SceneSpec) -> bool {
    b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= spec.image_w as f64 && b.y_max <= spec.image_h as f64
}

fn gt_of(s: &Shape) -> GtInstance<f64> {
    let bbox = crate::geom::mask_bounding_box(&s.mask).ok();
    GtInstance { quad: s.quad, dont_care: false, transcription: None, mask: Some(s.mask.clone()), bbox }
}

fn validate(spec: &SceneSpec) -> Result<()> {
    if spec.image_w == 0 || spec.image_h == 0 {
        return Err(Error::InvalidArgument(format!("image size {}×{}", spec.image_w, spec.image_h)));
    }
    Ok(())
}

fn mask_box_iou(a: &BitMask, b: &BitMask) -> f64 {
    match (crate::geom::mask_bounding_box::<f64>(a), crate::geom::mask_bounding_box::<f64>(b)) {
        (Ok(x), Ok(y)) => box_iou(&x, &y),
        _ => 0.0,
    }
}

/// Two parallel thin rectangles at 30°–60°, aspect at least 6, whose masks
/// are disjoint while their bounding boxes overlap with IoU above 0.5.
/// Detections are the ground-truth masks scored 0.95 and 0.9.
pub fn gen_inclined_pair(spec: &SceneSpec) -> Result<Scene> {
    validate(spec)?;
    let mut rng = SplitMix64::new(spec.seed);
    for _ in 0..MAX_REJECTIONS {
        let angle = rng.uniform(30.0, 60.0).to_radians();
        let thick = rng.uniform(8.0, 16.0);
        let long = rng.uniform((6.0 * thick).max(100.0), 200.0);
        let gap = rng.uniform(3.0, 8.0);
        let cx = spec.image_w as f64 / 2.0 + rng.uniform(-10.0, 10.0);
        let cy = spec.image_h as f64 / 2.0 + rng.uniform(-10.0, 10.0);
        let off = (thick + gap) / 2.0;
        let (s, c) = angle.sin_cos();
        // unit normal of the long axis
        let (nx, ny) = (-s, c);
        let rects = [-off, off].map(|o| RotatedRect::new(Point::new(cx + nx * o, cy + ny * o), long, thick, angle));
        let [a, b] = rects;
        let (a, b) = (shape(&a?)?, shape(&b?)?);
        if !inside(&a.bbox, spec) || !inside(&b.bbox, spec) || a.mask.is_empty() || b.mask.is_empty() {
            continue;
        }
        if mmi::<f64>(&a.mask, &b.mask)? != 0.0 || mask_box_iou(&a.mask, &b.mask) <= 0.5 {
            continue;
        }
        let id = spec.image_id();
        let detections =
            vec![Detection::new(id.clone(), 0.95, a.mask.clone())?, Detection::new(id.clone(), 0.9, b.mask.clone())?];
        let record = ImageRecord::from_instances(id, vec![gt_of(&a), gt_of(&b)]).with_size(spec.image_w, spec.image_h);
        return Ok(Scene { record, detections });
    }
    Err(Error::Capacity(format!("no inclined pair fits in {}×{}", spec.image_w, spec.image_h)))
}

/// One line-level rectangle with two word-level rectangles nested inside
/// it. Detections are the line (0.95) and both words (0.9, 0.85); the
/// ground truth is the two words.
pub fn gen_line_word(spec: &SceneSpec) -> Result<Scene> {
    validate(spec)?;
    let mut rng = SplitMix64::new(spec.seed);
    for _ in 0..MAX_REJECTIONS {
        let angle = rng.uniform(-15.0, 15.0).to_radians();
        let long = rng.uniform(150.0, 300.0);
        let thick = rng.uniform(16.0, 30.0);
        let word_len = [rng.uniform(0.25, 0.35) * long, rng.uniform(0.25, 0.35) * long];
        let inset = [rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0)];
        let cx = spec.image_w as f64 / 2.0 + rng.uniform(-10.0, 10.0);
        let cy = spec.image_h as f64 / 2.0 + rng.uniform(-10.0, 10.0);
        let (s, c) = angle.sin_cos();
        let along = |t: f64| Point::new(cx + c * t, cy + s * t);

        let line = shape(&RotatedRect::new(Point::new(cx, cy), long, thick, angle)?)?;
        // words sit at either end of the line, inset on every side
        let w0 = -long / 2.0 + inset[0] + word_len[0] / 2.0;
        let w1 = long / 2.0 - inset[1] - word_len[1] / 2.0;
        let words = [
            shape(&RotatedRect::new(along(w0), word_len[0], thick - 2.0 * inset[0], angle)?)?,
            shape(&RotatedRect::new(along(w1), word_len[1], thick - 2.0 * inset[1], angle)?)?,
        ];
        if !inside(&line.bbox, spec) || words.iter().any(|w| w.mask.is_empty()) {
            continue;
        }
        let nested = words.iter().all(|w| w.mask.intersection_area(&line.mask) == w.mask.area());
        let boxes_apart = words.iter().all(|w| mask_box_iou(&w.mask, &line.mask) < 0.5)
            && mask_box_iou(&words[0].mask, &words[1].mask) < 0.5;
        if !nested || !boxes_apart {
            continue;
        }
        let id = spec.image_id();
        let detections = vec![
            Detection::new(id.clone(), 0.95, line.mask.clone())?,
            Detection::new(id.clone(), 0.9, words[0].mask.clone())?,
            Detection::new(id.clone(), 0.85, words[1].mask.clone())?,
        ];
        let record =
            ImageRecord::from_instances(id, words.iter().map(gt_of).collect()).with_size(spec.image_w, spec.image_h);
        return Ok(Scene { record, detections });
    }
    Err(Error::Capacity(format!("no line/word layout fits in {}×{}", spec.image_w, spec.image_h)))
}

/// `n` rotated rectangles placed by rejection sampling so that no pair
/// exceeds 0.3 in mask IoU, mask-maximum-intersection, or box IoU.
/// Detections are copies with every vertex displaced by at most `jitter`
/// pixels and scores in `[0.7, 1.0]`.
pub fn gen_random_scene(spec: &SceneSpec) -> Result<Scene> {
    validate(spec)?;
    let Scenario::Random { n, angle_range, size_range, jitter } = spec.scenario else {
        return Err(Error::InvalidArgument("random scene requires the random scenario".into()));
    };
    if !(size_range.0 >= 8.0 && size_range.0 <= size_range.1) || !(jitter >= 0.0) || angle_range.0 > angle_range.1 {
        return Err(Error::InvalidArgument(format!(
            "bad random scene ranges: size {size_range:?}, angle {angle_range:?}, jitter {jitter}"
        )));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let mut placed: Vec<Shape> = Vec::with_capacity(n);
    let mut rejections = 0usize;
    while placed.len() < n {
        let long = rng.uniform(size_range.0, size_range.1);
        let thick = (long / rng.uniform(2.0, 8.0)).max(8.0);
        let angle = rng.uniform(angle_range.0, angle_range.1).to_radians();
        let cx = rng.uniform(0.0, spec.image_w as f64);
        let cy = rng.uniform(0.0, spec.image_h as f64);
        let candidate = shape(&RotatedRect::new(Point::new(cx, cy), long, thick, angle)?)?;
        let fits = inside(&candidate.bbox, spec)
            && !candidate.mask.is_empty()
            && placed.iter().all(|p| {
                mask_iou::<f64>(&p.mask, &candidate.mask) <= 0.3
                    && mmi::<f64>(&p.mask, &candidate.mask).is_ok_and(|v| v <= 0.3)
                    && mask_box_iou(&p.mask, &candidate.mask) <= 0.3
            });
        if fits {
            placed.push(candidate);
        } else {
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                return Err(Error::Capacity(format!(
                    "placed {} of {n} instances in {}×{} before {MAX_REJECTIONS} rejections",
                    placed.len(),
                    spec.image_w,
                    spec.image_h
                )));
            }
        }
    }

    let id = spec.image_id();
    let mut detections = Vec::with_capacity(n);
    for s in &placed {
        // noise is drawn even at zero jitter so layouts match across jitter levels
        let mut noisy = *s.quad.vertices();
        for v in noisy.iter_mut() {
            let r = jitter * rng.next_f64().sqrt();
            let t = rng.uniform(0.0, std::f64::consts::TAU);
            *v = Point::new(v.x + r * t.cos(), v.y + r * t.sin());
        }
        let score = rng.uniform(0.7, 1.0);
        let mask = if jitter == 0.0 { s.mask.clone() } else { rasterize_quad(&Quad::new(noisy)?, None)? };
        let mask = if mask.is_empty() { s.mask.clone() } else { mask };
        detections.push(Detection::new(id.clone(), score, mask)?);
    }
    let record =
        ImageRecord::from_instances(id, placed.iter().map(gt_of).collect()).with_size(spec.image_w, spec.image_h);
    Ok(Scene { record, detections })
}

pub fn generate(spec: &SceneSpec) -> Result<Scene> {
    match spec.scenario {
        Scenario::InclinedPair => gen_inclined_pair(spec),
        Scenario::LineWord => gen_line_word(spec),
        Scenario::Random { .. } => gen_random_scene(spec),
    }
}
