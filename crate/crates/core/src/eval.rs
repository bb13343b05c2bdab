//! ICDAR-style detection evaluation: greedy one-to-one matching at an IoU
//! threshold, with don't-care regions absorbing the detections that cover
//! them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::datasets::{GtInstance, ImageRecord};
use crate::error::{Error, Result};
use crate::geom::{box_iou, mask_bounding_box, mask_iou, rasterize_quad, AABox, BitMask};
use crate::nms::Detection;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// IoU of mask bounding boxes.
    Box,
    /// IoU of the masks themselves.
    Mask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig<T> {
    pub mode: EvalMode,
    pub iou_threshold: T,
}

impl<T: Scalar> EvalConfig<T> {
    pub fn new(mode: EvalMode, iou_threshold: T) -> Result<Self> {
        if !(iou_threshold > T::zero() && iou_threshold <= T::one()) {
            return Err(Error::InvalidArgument(format!("iou threshold {iou_threshold} outside (0, 1]")));
        }
        Ok(Self { mode, iou_threshold })
    }
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        Self { mode: EvalMode::Mask, iou_threshold: T::lit(0.5) }
    }
}

/// Match counts and the derived rates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EvalResult {
    pub true_pos: usize,
    /// Detections, minus those absorbed by don't-care regions.
    pub num_det: usize,
    /// Ground-truth instances, minus don't-care ones.
    pub num_gt: usize,
    pub precision: f64,
    pub recall: f64,
    pub hmean: f64,
}

impl EvalResult {
    pub fn from_counts(true_pos: usize, num_det: usize, num_gt: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(true_pos, num_det);
        let recall = ratio(true_pos, num_gt);
        Self { true_pos, num_det, num_gt, precision, recall, hmean: hmean(precision, recall) }
    }
}

/// Harmonic mean `2PR / (P + R)`; 0 when both are 0.
pub fn hmean(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// A rate as a percentage rounded to one decimal, as tables report it.
pub fn round_percent(rate: f64) -> f64 {
    (rate * 1000.0).round() / 10.0
}

struct GtShape<T> {
    mask: BitMask,
    bbox: AABox<T>,
    dont_care: bool,
}

fn gt_shape<T: Scalar>(inst: &GtInstance<T>) -> Option<GtShape<T>> {
    let mask = match &inst.mask {
        Some(m) => m.clone(),
        None => rasterize_quad(&inst.quad, None).ok()?,
    };
    let bbox = match inst.bbox {
        Some(b) => b,
        None => mask_bounding_box(&mask).ok()?,
    };
    Some(GtShape { mask, bbox, dont_care: inst.dont_care })
}

/// Evaluates one image.
///
/// Detections are visited in descending score order (ties by input order).
/// Each takes the highest-IoU candidate among unmatched cared-for instances
/// and all don't-care instances; at or above the threshold a cared-for
/// candidate is a true positive and a don't-care one removes the detection
/// from the count. Instances whose quads do not rasterize cannot be
/// matched.
pub fn match_instances<T: Scalar>(dets: &[Detection<T>], gts: &[GtInstance<T>], cfg: &EvalConfig<T>) -> EvalResult {
    let shapes: Vec<Option<GtShape<T>>> = gts.iter().map(gt_shape).collect();
    let num_gt = gts.iter().filter(|g| !g.dont_care).count();

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score().partial_cmp(&dets[a].score()).expect("finite scores"));

    let mut matched = vec![false; gts.len()];
    let (mut tp, mut absorbed) = (0usize, 0usize);
    for i in order {
        let det = &dets[i];
        let mut best: Option<(T, usize)> = None;
        for (g, shape) in shapes.iter().enumerate() {
            let Some(shape) = shape else { continue };
            if !shape.dont_care && matched[g] {
                continue;
            }
            let iou = match cfg.mode {
                EvalMode::Box => box_iou(det.bbox(), &shape.bbox),
                EvalMode::Mask => mask_iou(det.mask(), &shape.mask),
            };
            let better = match best {
                None => true,
                // cared-for instances win ties
                Some((b, bg)) => iou > b || (iou == b && gts[bg].dont_care && !shape.dont_care),
            };
            if better {
                best = Some((iou, g));
            }
        }
        match best {
            Some((iou, g)) if iou >= cfg.iou_threshold => {
                if gts[g].dont_care {
                    absorbed += 1;
                } else {
                    matched[g] = true;
                    tp += 1;
                }
            }
            _ => {}
        }
    }
    EvalResult::from_counts(tp, dets.len() - absorbed, num_gt)
}

/// Micro-average: counts are summed before the rates are computed.
pub fn corpus_metrics(per_image: &[EvalResult]) -> EvalResult {
    let (tp, det, gt) = per_image.iter().fold((0, 0, 0), |(a, b, c), r| (a + r.true_pos, b + r.num_det, c + r.num_gt));
    EvalResult::from_counts(tp, det, gt)
}

/// Per-image and corpus results over a set of ground-truth records.
/// Detections for images without a record count against precision.
pub fn evaluate_corpus<T: Scalar>(
    records: &[ImageRecord<T>],
    dets: &[Detection<T>],
    cfg: &EvalConfig<T>,
) -> (Vec<(String, EvalResult)>, EvalResult) {
    let mut by_image: BTreeMap<&str, Vec<Detection<T>>> = BTreeMap::new();
    for d in dets {
        by_image.entry(d.image_id.as_str()).or_default().push(d.clone());
    }
    let mut jobs: Vec<(&str, &[GtInstance<T>])> =
        records.iter().map(|r| (r.image_id.as_str(), &r.instances[..])).collect();
    for id in by_image.keys() {
        if !records.iter().any(|r| r.image_id == *id) {
            jobs.push((id, &[]));
        }
    }
    let per_image: Vec<(String, EvalResult)> = jobs
        .par_iter()
        .map(|(id, gts)| {
            let d = by_image.get(id).map(Vec::as_slice).unwrap_or(&[]);
            (id.to_string(), match_instances(d, gts, cfg))
        })
        .collect();
    let totals: Vec<EvalResult> = per_image.iter().map(|(_, r)| *r).collect();
    let corpus = corpus_metrics(&totals);
    (per_image, corpus)
}
