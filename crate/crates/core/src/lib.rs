//! Geometric core of an instance-segmentation scene-text detector.
//!
//! Everything downstream of the network lives here: quadrilateral
//! rasterization into instance masks, box and mask overlap measures,
//! standard and mask-based non-maximum suppression, minimum-area quad
//! fitting, anchor grids and box-delta coding, the multi-task loss
//! arithmetic, ICDAR-style evaluation, and seeded synthetic scenes.
//!
//! Real-valued code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchors;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod geom;
pub mod losses;
pub mod nms;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use geom::BitMask;

pub type Point = geom::Point<f64>;
pub type AABox = geom::AABox<f64>;
pub type Quad = geom::Quad<f64>;
pub type RotatedRect = geom::RotatedRect<f64>;

pub type PointF32 = geom::Point<f32>;
pub type AABoxF32 = geom::AABox<f32>;
pub type QuadF32 = geom::Quad<f32>;
pub type RotatedRectF32 = geom::RotatedRect<f32>;
