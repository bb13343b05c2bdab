//! Multi-task loss arithmetic and hard-negative selection.

use crate::anchors::BoxDelta;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Balance weights for the box, mask, and proposal-box terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T> {
    pub lambda_r: T,
    pub lambda_m: T,
    pub lambda_b: T,
}

impl<T: Scalar> Default for LossWeights<T> {
    fn default() -> Self {
        Self { lambda_r: T::lit(0.2), lambda_m: T::lit(2.0), lambda_b: T::lit(0.2) }
    }
}

impl<T: Scalar> LossWeights<T> {
    pub fn new(lambda_r: T, lambda_m: T, lambda_b: T) -> Result<Self> {
        if [lambda_r, lambda_m, lambda_b].iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidArgument("loss weights must be finite and non-negative".into()));
        }
        Ok(Self { lambda_r, lambda_m, lambda_b })
    }
}

/// Per-batch mean losses of each task.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossTerms<T> {
    /// Proposal classification.
    pub rcls: T,
    /// Proposal box regression.
    pub rbox: T,
    /// Instance classification.
    pub cls: T,
    /// Instance mask.
    pub mask: T,
    /// Instance box regression.
    pub box_: T,
}

impl<T: Scalar> LossTerms<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rcls, self.rbox, self.cls, self.mask, self.box_];
        if all.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidArgument("loss terms must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothL1Params<T> {
    pub sigma: T,
}

impl<T: Scalar> Default for SmoothL1Params<T> {
    fn default() -> Self {
        Self { sigma: T::lit(3.0) }
    }
}

impl<T: Scalar> SmoothL1Params<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma {sigma} must be positive")));
        }
        Ok(Self { sigma })
    }

    /// `|x|` at which the quadratic and linear pieces meet: `1 / σ²`.
    pub fn breakpoint(&self) -> T {
        T::one() / (self.sigma * self.sigma)
    }
}

/// `0.5 (σx)²` for `|x| < 1/σ²`, else `|x| − 0.5/σ²`.
pub fn smooth_l1<T: Scalar>(x: T, p: &SmoothL1Params<T>) -> T {
    let half = T::lit(0.5);
    let s2 = p.sigma * p.sigma;
    if x.abs() < T::one() / s2 {
        half * s2 * x * x
    } else {
        x.abs() - half / s2
    }
}

/// Derivative of [`smooth_l1`]: `σ²x` inside the breakpoint, `sign(x)` outside.
pub fn smooth_l1_grad<T: Scalar>(x: T, p: &SmoothL1Params<T>) -> T {
    let s2 = p.sigma * p.sigma;
    if x.abs() < T::one() / s2 {
        s2 * x
    } else {
        x.signum()
    }
}

/// Smooth-L1 summed over the four box coordinates.
pub fn box_regression_loss<T: Scalar>(pred: &BoxDelta<T>, target: &BoxDelta<T>, p: &SmoothL1Params<T>) -> T {
    pred.as_array().iter().zip(target.as_array()).fold(T::zero(), |acc, (a, b)| acc + smooth_l1(*a - b, p))
}

const PROB_FLOOR: f64 = 1e-12;

/// `−ln p[label]` with the probability floored at 1e-12.
pub fn cross_entropy<T: Scalar>(probs: &[T], label: usize) -> Result<T> {
    if label >= probs.len() {
        return Err(Error::Index { index: label, len: probs.len() });
    }
    if probs.iter().any(|p| !(*p >= T::zero() && *p <= T::one())) {
        return Err(Error::InvalidArgument("probabilities must lie in [0, 1]".into()));
    }
    let sum = probs.iter().fold(T::zero(), |a, &b| a + b);
    if (sum - T::one()).abs() > T::lit(1e-6) {
        return Err(Error::InvalidArgument(format!("probabilities sum to {sum}, expected 1")));
    }
    Ok(-probs[label].max(T::lit(PROB_FLOOR)).ln())
}

/// Mean over contributing samples; zero for an empty batch.
pub fn mean_loss<T: Scalar>(losses: impl IntoIterator<Item = T>) -> T {
    let (sum, n) = losses.into_iter().fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        T::zero()
    } else {
        sum / T::from_usize(n).expect("count fits")
    }
}

/// `(rcls + λr·rbox) + (cls + λm·mask + λb·box)`.
pub fn total_loss<T: Scalar>(t: &LossTerms<T>, w: &LossWeights<T>) -> T {
    let rpn = t.rcls + w.lambda_r * t.rbox;
    let instance = t.cls + w.lambda_m * t.mask + w.lambda_b * t.box_;
    rpn + instance
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleLabel {
    Positive,
    Negative,
}

/// Online hard example mining.
///
/// Keeps every positive plus the `⌈ratio·|pos|⌉` highest-loss negatives
/// (`min_keep` of them when there are no positives). Equal losses are
/// broken by lower index. Returns kept indices in ascending order.
pub fn ohem_select<T: Scalar>(
    per_sample_loss: &[T],
    labels: &[SampleLabel],
    neg_pos_ratio: T,
    min_keep: usize,
) -> Result<Vec<usize>> {
    if per_sample_loss.len() != labels.len() {
        return Err(Error::InvalidArgument(format!("{} losses but {} labels", per_sample_loss.len(), labels.len())));
    }
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == SampleLabel::Positive).collect();
    let mut negatives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == SampleLabel::Negative).collect();
    negatives.sort_by(|&a, &b| {
        per_sample_loss[b].partial_cmp(&per_sample_loss[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let quota = if positives.is_empty() {
        min_keep
    } else {
        let n = T::from_usize(positives.len()).expect("count fits");
        (neg_pos_ratio * n).ceil().to_usize().unwrap_or(0)
    };
    let mut kept = positives;
    kept.extend(negatives.into_iter().take(quota));
    kept.sort_unstable();
    Ok(kept)
}
