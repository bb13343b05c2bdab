//! Points, boxes, quadrilaterals, bit-masks, and the operations between them.

mod hull;
mod mask;
mod primitives;
mod raster;

pub use hull::{min_area_quad, min_area_rect};
pub use mask::{mask_area, mask_bounding_box, mask_intersection_area, mask_iou, BitMask};
pub use primitives::{box_iou, rotated_rect_to_quad, AABox, Point, Quad, RotatedRect};
pub use raster::rasterize_quad;
