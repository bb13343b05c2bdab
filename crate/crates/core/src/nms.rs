//! Greedy suppression of overlapping detections.
//!
//! Two criteria share one greedy sweep: box IoU (standard NMS) and
//! mask-maximum-intersection, `max(I / area_a, I / area_b)` (mask NMS).
//! The latter scores 1 whenever one mask contains the other, which is what
//! removes word-level detections nested in a line-level one, and it scores 0
//! for inclined neighbours whose boxes overlap but whose masks do not.

use crate::error::{Error, Result};
use crate::geom::{box_iou, mask_bounding_box, mask_iou, min_area_quad, AABox, BitMask, Quad};
use crate::scalar::Scalar;

/// One detected text instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub image_id: String,
    score: T,
    mask: BitMask,
    bbox: AABox<T>,
    /// Fitted output quadrilateral, filled by post-processing.
    pub quad: Option<Quad<T>>,
}

impl<T: Scalar> Detection<T> {
    /// Fails on an empty mask or a score outside `[0, 1]`.
    pub fn new(image_id: impl Into<String>, score: T, mask: BitMask) -> Result<Self> {
        if !(score >= T::zero() && score <= T::one()) {
            return Err(Error::InvalidArgument(format!("score {score} outside [0, 1]")));
        }
        let bbox = mask_bounding_box(&mask)?;
        Ok(Self { image_id: image_id.into(), score, mask, bbox, quad: None })
    }

    pub fn with_quad(mut self, quad: Option<Quad<T>>) -> Self {
        self.quad = quad;
        self
    }

    pub fn score(&self) -> T {
        self.score
    }

    pub fn mask(&self) -> &BitMask {
        &self.mask
    }

    /// Pixel-extent box of the mask.
    pub fn bbox(&self) -> &AABox<T> {
        &self.bbox
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmsMode {
    /// Box IoU between mask bounding boxes.
    Standard,
    /// Mask-maximum-intersection between masks.
    Mask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsConfig<T> {
    pub mode: NmsMode,
    /// A candidate is suppressed when its overlap with a kept detection
    /// strictly exceeds this value.
    pub threshold: T,
    /// Detections scoring below this are dropped before suppression.
    pub score_floor: T,
}

impl<T: Scalar> NmsConfig<T> {
    pub fn new(mode: NmsMode, threshold: T, score_floor: T) -> Result<Self> {
        if !(threshold > T::zero() && threshold <= T::one()) {
            return Err(Error::InvalidArgument(format!("nms threshold {threshold} outside (0, 1]")));
        }
        if !(score_floor >= T::zero() && score_floor <= T::one()) {
            return Err(Error::InvalidArgument(format!("score floor {score_floor} outside [0, 1]")));
        }
        Ok(Self { mode, threshold, score_floor })
    }

    pub fn standard() -> Self {
        Self { mode: NmsMode::Standard, threshold: T::lit(0.5), score_floor: T::lit(0.05) }
    }

    pub fn mask() -> Self {
        Self { mode: NmsMode::Mask, ..Self::standard() }
    }
}

/// Mask-maximum-intersection of two nonempty masks.
pub fn mmi<T: Scalar>(a: &BitMask, b: &BitMask) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(mmi_unchecked(a, b))
}

fn mmi_unchecked<T: Scalar>(a: &BitMask, b: &BitMask) -> T {
    let inter = a.intersection_area(b);
    let smaller = a.area().min(b.area());
    T::from_usize(inter).expect("count fits") / T::from_usize(smaller).expect("count fits")
}

/// Result of one greedy sweep, by input index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Suppression {
    /// Kept detections, in descending score order.
    pub kept: Vec<usize>,
    /// For every input, the kept detection that suppressed it (if any).
    /// Inputs below the score floor have neither role.
    pub suppressed_by: Vec<Option<usize>>,
}

impl Suppression {
    /// Inputs suppressed by kept detection `k`.
    pub fn suppressed_under(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.suppressed_by.iter().enumerate().filter_map(move |(i, s)| (*s == Some(k)).then_some(i))
    }
}

fn score_order<T: Scalar>(dets: &[Detection<T>], floor: T) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].score >= floor).collect();
    // stable: equal scores keep input order
    order.sort_by(|&a, &b| dets[b].score.partial_cmp(&dets[a].score).expect("finite scores"));
    order
}

fn greedy<T: Scalar>(
    dets: &[Detection<T>],
    floor: T,
    overlaps: impl Fn(&Detection<T>, &Detection<T>) -> bool,
) -> Suppression {
    debug_assert!(dets.windows(2).all(|w| w[0].image_id == w[1].image_id), "suppression runs within a single image");
    let mut out = Suppression { kept: Vec::new(), suppressed_by: vec![None; dets.len()] };
    for i in score_order(dets, floor) {
        match out.kept.iter().find(|&&k| overlaps(&dets[k], &dets[i])) {
            Some(&k) => out.suppressed_by[i] = Some(k),
            None => out.kept.push(i),
        }
    }
    out
}

/// Greedy sweep with the criterion selected by `cfg.mode`.
pub fn suppress<T: Scalar>(dets: &[Detection<T>], cfg: &NmsConfig<T>) -> Suppression {
    let thr = cfg.threshold;
    match cfg.mode {
        NmsMode::Standard => greedy(dets, cfg.score_floor, |a, b| box_iou(&a.bbox, &b.bbox) > thr),
        NmsMode::Mask => greedy(dets, cfg.score_floor, |a, b| {
            // intersection only computed for touching extents
            a.bbox.intersection_area(&b.bbox) > T::zero() && mmi_unchecked::<T>(&a.mask, &b.mask) > thr
        }),
    }
}

fn pick<T: Scalar>(dets: &[Detection<T>], idx: &[usize]) -> Vec<Detection<T>> {
    idx.iter().map(|&i| dets[i].clone()).collect()
}

/// Box-IoU NMS. Output is sorted by descending score.
pub fn standard_nms<T: Scalar>(dets: &[Detection<T>], cfg: &NmsConfig<T>) -> Vec<Detection<T>> {
    let cfg = NmsConfig { mode: NmsMode::Standard, ..*cfg };
    pick(dets, &suppress(dets, &cfg).kept)
}

/// Mask-maximum-intersection NMS. Output is sorted by descending score.
pub fn mask_nms<T: Scalar>(dets: &[Detection<T>], cfg: &NmsConfig<T>) -> Vec<Detection<T>> {
    let cfg = NmsConfig { mode: NmsMode::Mask, ..*cfg };
    pick(dets, &suppress(dets, &cfg).kept)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteConfig<T> {
    /// Minimum mask IoU with the kept detection for a partner to vote.
    pub iou_gate: T,
    /// Weighted-average level at which a pixel is set.
    pub binarize_at: T,
}

impl<T: Scalar> Default for VoteConfig<T> {
    fn default() -> Self {
        Self { iou_gate: T::lit(0.5), binarize_at: T::lit(0.5) }
    }
}

/// Score-weighted average of `kept` and its sufficiently overlapping
/// partners, binarized at `binarize_at`. The result keeps `kept`'s score;
/// if binarization leaves nothing, `kept` is returned unchanged.
pub fn mask_vote<T: Scalar>(
    kept: &Detection<T>,
    suppressed: &[Detection<T>],
    iou_gate: T,
    binarize_at: T,
) -> Detection<T> {
    let voters: Vec<&Detection<T>> = std::iter::once(kept)
        .chain(suppressed.iter().filter(|d| mask_iou::<T>(&kept.mask, &d.mask) >= iou_gate))
        .collect();
    if voters.len() == 1 {
        return kept.clone();
    }
    let total = voters.iter().fold(T::zero(), |acc, d| acc + d.score);
    if total <= T::zero() {
        return kept.clone();
    }

    let extents: Vec<_> = voters.iter().filter_map(|d| d.mask.set_extent()).collect();
    let x0 = extents.iter().map(|e| e.0).min().expect("kept is nonempty");
    let y0 = extents.iter().map(|e| e.1).min().expect("kept is nonempty");
    let x1 = extents.iter().map(|e| e.2).max().expect("kept is nonempty");
    let y1 = extents.iter().map(|e| e.3).max().expect("kept is nonempty");
    let (w, h) = ((x1 - x0) as usize, (y1 - y0) as usize);

    let mut acc = vec![T::zero(); w * h];
    for d in &voters {
        for (px, py) in d.mask.iter_set() {
            let cell = &mut acc[(py - y0) as usize * w + (px - x0) as usize];
            *cell = *cell + d.score;
        }
    }
    let voted = BitMask::from_fn(x0, y0, w, h, |px, py| {
        acc[(py - y0) as usize * w + (px - x0) as usize] / total >= binarize_at
    })
    .tightened();
    if voted.is_empty() {
        return kept.clone();
    }
    Detection::new(kept.image_id.clone(), kept.score, voted).expect("nonempty voted mask")
}

/// Full post-processing for one image: suppression, optional mask voting
/// against each kept detection's suppressed partners, then a minimum-area
/// quad fitted to every surviving mask.
pub fn postprocess<T: Scalar>(
    dets: &[Detection<T>],
    cfg: &NmsConfig<T>,
    vote: Option<&VoteConfig<T>>,
) -> Vec<Detection<T>> {
    let sweep = suppress(dets, cfg);
    sweep
        .kept
        .iter()
        .map(|&k| {
            let det = match vote {
                Some(v) => {
                    let partners = pick(dets, &sweep.suppressed_under(k).collect::<Vec<_>>());
                    mask_vote(&dets[k], &partners, v.iou_gate, v.binarize_at)
                }
                None => dets[k].clone(),
            };
            let quad = min_area_quad(&det.mask).ok();
            det.with_quad(quad)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(score: f64, x: i64, y: i64, w: usize, h: usize) -> Detection<f64> {
        Detection::new("img", score, BitMask::full(x, y, w, h)).unwrap()
    }

    #[test]
    fn detection_invariants() {
        assert!(Detection::new("i", 0.5, BitMask::empty()).is_err());
        assert!(Detection::new("i", 1.5, BitMask::full(0, 0, 1, 1)).is_err());
        let d = det(0.5, 2, 3, 4, 5);
        assert_eq!(*d.bbox(), AABox::new(2.0, 3.0, 6.0, 8.0).unwrap());
    }

    #[test]
    fn mmi_examples() {
        let a = BitMask::full(0, 0, 10, 10);
        let b = BitMask::full(5, 0, 20, 10);
        assert_eq!((a.area(), b.area(), a.intersection_area(&b)), (100, 200, 50));
        assert_eq!(mmi::<f64>(&a, &b).unwrap(), 0.5);
        assert_eq!(mmi::<f64>(&BitMask::full(2, 2, 3, 3), &a).unwrap(), 1.0);
        assert_eq!(mmi::<f64>(&a, &BitMask::full(30, 0, 5, 5)).unwrap(), 0.0);
        assert_eq!(mmi::<f64>(&a, &BitMask::empty()), Err(Error::EmptyMask));
    }

    #[test]
    fn single_detection_kept() {
        let dets = vec![det(0.7, 0, 0, 5, 5)];
        assert_eq!(standard_nms(&dets, &NmsConfig::standard()).len(), 1);
        assert_eq!(mask_nms(&dets, &NmsConfig::mask()).len(), 1);
        assert!(standard_nms::<f64>(&[], &NmsConfig::standard()).is_empty());
    }

    #[test]
    fn identical_boxes_keep_highest() {
        let dets = vec![det(0.8, 0, 0, 10, 10), det(0.9, 0, 0, 10, 10)];
        let kept = standard_nms(&dets, &NmsConfig::standard());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].score(), 0.9);
    }

    #[test]
    fn disjoint_all_kept_and_sorted() {
        let dets = vec![det(0.6, 0, 0, 5, 5), det(0.9, 10, 0, 5, 5), det(0.7, 20, 0, 5, 5)];
        let kept = mask_nms(&dets, &NmsConfig::mask());
        let scores: Vec<f64> = kept.iter().map(|d| d.score()).collect();
        assert_eq!(scores, vec![0.9, 0.7, 0.6]);
    }

    #[test]
    fn ties_follow_input_order() {
        let dets = vec![det(0.5, 0, 0, 10, 10), det(0.5, 1, 0, 10, 10)];
        let sweep = suppress(&dets, &NmsConfig::standard());
        assert_eq!(sweep.kept, vec![0]);
        assert_eq!(sweep.suppressed_by, vec![None, Some(0)]);
    }

    #[test]
    fn score_floor_drops_first() {
        let dets = vec![det(0.01, 0, 0, 10, 10), det(0.5, 30, 0, 10, 10)];
        let sweep = suppress(&dets, &NmsConfig::standard());
        assert_eq!(sweep.kept, vec![1]);
        assert_eq!(sweep.suppressed_by, vec![None, None]);
    }

    #[test]
    fn config_validation() {
        assert!(NmsConfig::new(NmsMode::Mask, 0.0, 0.05).is_err());
        assert!(NmsConfig::new(NmsMode::Mask, 1.0, 0.05).is_ok());
        assert!(NmsConfig::new(NmsMode::Mask, 0.5, -0.1).is_err());
    }

    /// Greedy NMS is not monotone in the threshold: raising it can revive a
    /// detection that then suppresses several others the lower threshold kept.
    #[test]
    fn raising_threshold_can_shrink_kept_set() {
        let boxes = [
            (0.95, AABox::new(0.0f64, 25.0, 100.0, 125.0).unwrap()),
            (0.9, AABox::new(0.0, 0.0, 100.0, 100.0).unwrap()),
            (0.8, AABox::new(-15.0, 0.0, 85.0, 100.0).unwrap()),
            (0.7, AABox::new(15.0, 0.0, 115.0, 100.0).unwrap()),
        ];
        let iou = |i: usize, j: usize| box_iou(&boxes[i].1, &boxes[j].1);
        assert!((iou(0, 1) - 0.6).abs() < 1e-12);
        assert!(iou(1, 2) > 0.7 && iou(1, 3) > 0.7);
        assert!(iou(0, 2) < 0.55 && iou(0, 3) < 0.55 && iou(2, 3) < 0.55);
        let dets: Vec<_> = boxes
            .iter()
            .map(|(s, b)| {
                let m = BitMask::full(b.x_min as i64, b.y_min as i64, b.width() as usize, b.height() as usize);
                Detection::new("img", *s, m).unwrap()
            })
            .collect();
        let at = |t: f64| suppress(&dets, &NmsConfig::new(NmsMode::Standard, t, 0.0).unwrap()).kept;
        assert_eq!(at(0.55), vec![0, 2, 3]);
        assert_eq!(at(0.65), vec![0, 1]);
    }

    #[test]
    fn vote_without_partners_is_identity() {
        let k = det(0.9, 0, 0, 10, 10);
        assert_eq!(mask_vote(&k, &[], 0.5, 0.5), k);
        let far = det(0.8, 40, 40, 10, 10);
        assert_eq!(mask_vote(&k, &[far], 0.5, 0.5), k);
    }

    #[test]
    fn vote_identical_masks() {
        let k = det(0.9, 0, 0, 10, 10);
        let p = det(0.3, 0, 0, 10, 10);
        assert_eq!(mask_vote(&k, &[p], 0.5, 0.5).mask(), k.mask());
    }

    #[test]
    fn vote_dominant_weight_reproduces_kept() {
        // 10×10 shifted by one row: IoU 90/110 ≈ 0.82
        let k = det(0.9, 0, 0, 10, 10);
        let p = det(0.1, 0, 1, 10, 10);
        assert!(mask_iou::<f64>(k.mask(), p.mask()) >= 0.8);
        let v = mask_vote(&k, &[p], 0.5, 0.5);
        assert_eq!(v.mask(), k.mask());
        assert_eq!(v.score(), 0.9);
    }

    #[test]
    fn vote_majority_extends_mask() {
        let k = det(0.5, 0, 0, 10, 10);
        let p = det(0.5, 0, 1, 10, 10);
        let v = mask_vote(&k, &[p], 0.5, 0.5);
        // every pixel of either mask reaches weight 0.5
        assert_eq!(v.mask().area(), 110);
    }

    #[test]
    fn postprocess_fills_quads() {
        let dets = vec![det(0.9, 0, 0, 20, 6), det(0.8, 1, 0, 20, 6), det(0.7, 50, 50, 8, 8)];
        let out = postprocess(&dets, &NmsConfig::mask(), Some(&VoteConfig::default()));
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|d| d.quad.is_some()));
    }
}
