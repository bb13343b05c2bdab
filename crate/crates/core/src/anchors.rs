//! RPN geometry: feature strides of the fused backbone, anchor grids,
//! box-delta coding, and anchor labelling.

use crate::error::{Error, Result};
use crate::geom::{box_iou, AABox};
use crate::scalar::Scalar;

/// Feature strides through the fused backbone.
///
/// Stage 4 is upsampled onto stage 3 to form the first fused map; stage 5
/// keeps stage 4's stride (dilated convolutions instead of downsampling)
/// and is upsampled onto the first fused map to form the second. An extra
/// stride-2 convolution before the proposal head halves the anchor count
/// per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionStridePlan {
    pub stage3_stride: u32,
    pub stage4_stride: u32,
    pub stage5_stride: u32,
    pub fused_a_stride: u32,
    pub fused_b_stride: u32,
    pub rpn_stride: u32,
}

impl FusionStridePlan {
    /// Cells in the proposal grid for an image, with zero padding at the
    /// bottom/right edge: `(rows, cols)`.
    pub fn rpn_grid(&self, image_w: u32, image_h: u32) -> (u32, u32) {
        (image_h.div_ceil(self.rpn_stride), image_w.div_ceil(self.rpn_stride))
    }
}

pub fn fusion_stride_plan() -> FusionStridePlan {
    let stage3 = 8;
    let stage4 = 2 * stage3;
    // dilated: no downsampling in stage 5
    let stage5 = stage4;
    let fused_a = stage3;
    let fused_b = fused_a;
    let plan = FusionStridePlan {
        stage3_stride: stage3,
        stage4_stride: stage4,
        stage5_stride: stage5,
        fused_a_stride: fused_a,
        fused_b_stride: fused_b,
        rpn_stride: 2 * fused_a,
    };
    assert_eq!(plan.fused_a_stride, plan.stage3_stride);
    assert_eq!(plan.fused_b_stride, plan.fused_a_stride);
    assert_eq!(plan.rpn_stride, 2 * plan.fused_a_stride);
    plan
}

/// Anchor shapes and placement. Ratios are height / width.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorConfig<T> {
    /// Anchor areas in px².
    pub scales: Vec<T>,
    pub ratios: Vec<T>,
    pub stride: u32,
}

impl<T: Scalar> Default for AnchorConfig<T> {
    fn default() -> Self {
        Self {
            scales: [32.0, 64.0, 128.0, 256.0].iter().map(|s: &f64| T::lit(s * s)).collect(),
            ratios: [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0].iter().map(|&r| T::lit(r)).collect(),
            stride: fusion_stride_plan().rpn_stride,
        }
    }
}

impl<T: Scalar> AnchorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::InvalidArgument("anchor stride must be positive".into()));
        }
        if let Some(s) = self.scales.iter().find(|s| !(**s > T::zero() && s.is_finite())) {
            return Err(Error::InvalidArgument(format!("anchor scale {s} must be positive")));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > T::zero() && r.is_finite())) {
            return Err(Error::InvalidArgument(format!("anchor ratio {r} must be positive")));
        }
        Ok(())
    }

    pub fn per_location(&self) -> usize {
        self.scales.len() * self.ratios.len()
    }

    /// `(width, height)` of each per-location anchor, scale-major.
    pub fn shapes(&self) -> Vec<(T, T)> {
        self.scales.iter().flat_map(|&s| self.ratios.iter().map(move |&r| ((s / r).sqrt(), (s * r).sqrt()))).collect()
    }

    /// Anchors centred on grid cell `(row, col)`.
    pub fn anchors_at(&self, row: u32, col: u32) -> Vec<AABox<T>> {
        let stride = T::from_u32(self.stride).expect("stride fits");
        let half = T::lit(0.5);
        let cx = (T::from_u32(col).expect("col fits") + half) * stride;
        let cy = (T::from_u32(row).expect("row fits") + half) * stride;
        self.shapes()
            .into_iter()
            .map(|(w, h)| AABox::from_center(cx, cy, w, h).expect("positive anchor size"))
            .collect()
    }
}

/// Every anchor for an image, row-major over grid cells, then scale, then
/// ratio. Anchors are not clipped to the image.
pub fn generate_anchor_grid<T: Scalar>(image_w: u32, image_h: u32, cfg: &AnchorConfig<T>) -> Result<Vec<AABox<T>>> {
    if image_w == 0 || image_h == 0 {
        return Err(Error::InvalidArgument(format!("image size {image_w}×{image_h}")));
    }
    cfg.validate()?;
    let rows = image_h.div_ceil(cfg.stride);
    let cols = image_w.div_ceil(cfg.stride);
    let mut out = Vec::with_capacity(rows as usize * cols as usize * cfg.per_location());
    for row in 0..rows {
        for col in 0..cols {
            out.extend(cfg.anchors_at(row, col));
        }
    }
    Ok(out)
}

/// Box regression target relative to an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoxDelta<T> {
    pub dx: T,
    pub dy: T,
    pub dw: T,
    pub dh: T,
}

impl<T: Scalar> BoxDelta<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.dx, self.dy, self.dw, self.dh]
    }
}

fn check_positive<T: Scalar>(b: &AABox<T>, what: &str) -> Result<()> {
    if b.width() > T::zero() && b.height() > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidBox(format!("{what} has non-positive size {}×{}", b.width(), b.height())))
    }
}

pub fn encode_deltas<T: Scalar>(anchor: &AABox<T>, target: &AABox<T>) -> Result<BoxDelta<T>> {
    check_positive(anchor, "anchor")?;
    check_positive(target, "target")?;
    let (a, t) = (anchor.center(), target.center());
    let (aw, ah) = (anchor.width(), anchor.height());
    Ok(BoxDelta {
        dx: (t.x - a.x) / aw,
        dy: (t.y - a.y) / ah,
        dw: (target.width() / aw).ln(),
        dh: (target.height() / ah).ln(),
    })
}

/// Inverse of [`encode_deltas`]; `dw` and `dh` are clamped to ±ln 1000.
pub fn decode_deltas<T: Scalar>(anchor: &AABox<T>, d: &BoxDelta<T>) -> Result<AABox<T>> {
    check_positive(anchor, "anchor")?;
    let limit = T::lit(1000.0).ln();
    let clamp = |v: T| v.max(-limit).min(limit);
    let a = anchor.center();
    let (aw, ah) = (anchor.width(), anchor.height());
    let cx = a.x + d.dx * aw;
    let cy = a.y + d.dy * ah;
    AABox::from_center(cx, cy, aw * clamp(d.dw).exp(), ah * clamp(d.dh).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorLabel {
    Positive(usize),
    Negative,
    Ignore,
}

/// Labels each anchor against the ground-truth boxes.
///
/// Positive when its best IoU reaches `pos_iou` (the argmax gt is
/// recorded), or when it ties for the best anchor of some gt with nonzero
/// overlap. Negative when its best IoU is at most `neg_iou`. Otherwise
/// ignored.
pub fn assign_anchor_labels<T: Scalar>(
    anchors: &[AABox<T>],
    gt_boxes: &[AABox<T>],
    pos_iou: T,
    neg_iou: T,
) -> Result<Vec<AnchorLabel>> {
    if !(pos_iou > neg_iou) {
        return Err(Error::InvalidArgument(format!("pos_iou {pos_iou} must exceed neg_iou {neg_iou}")));
    }
    let mut best_for_gt = vec![T::zero(); gt_boxes.len()];
    let mut best: Vec<(T, usize)> = Vec::with_capacity(anchors.len());
    for a in anchors {
        let mut top = (T::zero(), usize::MAX);
        for (g, gt) in gt_boxes.iter().enumerate() {
            let iou = box_iou(a, gt);
            if iou > top.0 || top.1 == usize::MAX {
                top = (iou, g);
            }
            if iou > best_for_gt[g] {
                best_for_gt[g] = iou;
            }
        }
        best.push(top);
    }

    let mut labels: Vec<AnchorLabel> = best
        .iter()
        .map(|&(iou, g)| {
            if g != usize::MAX && iou >= pos_iou {
                AnchorLabel::Positive(g)
            } else if iou <= neg_iou {
                AnchorLabel::Negative
            } else {
                AnchorLabel::Ignore
            }
        })
        .collect();

    for (i, a) in anchors.iter().enumerate() {
        if matches!(labels[i], AnchorLabel::Positive(_)) {
            continue;
        }
        let hit = gt_boxes
            .iter()
            .enumerate()
            .find(|(g, gt)| best_for_gt[*g] > T::zero() && box_iou(a, gt) == best_for_gt[*g]);
        if let Some((g, _)) = hit {
            labels[i] = AnchorLabel::Positive(g);
        }
    }
    Ok(labels)
}
