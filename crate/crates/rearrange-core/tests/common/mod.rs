//! Point-sampling overlap oracle, written against the shape definitions
//! alone (no calls into the library's predicates). Two footprints overlap if
//! some point of a dense grid over their bounding-box intersection lies
//! strictly inside both.

use rearrange_core::geometry::{Pose, Shape};

const GRID: usize = 200;

/// Extra slack around bounding boxes so inflated queries stay covered.
const BOX_MARGIN: f64 = 2e-3;

/// Strict interior test with the shape's extents grown by `inflate`
/// (negative values shrink).
pub fn point_in(shape: &Shape, pose: &Pose, x: f64, y: f64, inflate: f64) -> bool {
    match *shape {
        Shape::Disc { radius } => {
            let r = radius + inflate;
            r > 0.0 && {
                let (dx, dy) = (x - pose.x, y - pose.y);
                dx * dx + dy * dy < r * r
            }
        }
        Shape::Rect { width, height } => {
            let (s, c) = pose.theta.sin_cos();
            let (dx, dy) = (x - pose.x, y - pose.y);
            let lx = c * dx + s * dy;
            let ly = -s * dx + c * dy;
            lx.abs() < width / 2.0 + inflate && ly.abs() < height / 2.0 + inflate
        }
    }
}

fn bounding_box(shape: &Shape, pose: &Pose) -> (f64, f64, f64, f64) {
    match *shape {
        Shape::Disc { radius } => (
            pose.x - radius - BOX_MARGIN,
            pose.y - radius - BOX_MARGIN,
            pose.x + radius + BOX_MARGIN,
            pose.y + radius + BOX_MARGIN,
        ),
        Shape::Rect { width, height } => {
            let (s, c) = pose.theta.sin_cos();
            let (hw, hh) = (width / 2.0, height / 2.0);
            let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
            let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (ux, uy) in [(hw, hh), (hw, -hh), (-hw, -hh), (-hw, hh)] {
                let cx = pose.x + c * ux - s * uy;
                let cy = pose.y + s * ux + c * uy;
                x0 = x0.min(cx);
                y0 = y0.min(cy);
                x1 = x1.max(cx);
                y1 = y1.max(cy);
            }
            (x0 - BOX_MARGIN, y0 - BOX_MARGIN, x1 + BOX_MARGIN, y1 + BOX_MARGIN)
        }
    }
}

/// Grid-sampled overlap of the two inflated footprints.
pub fn grid_overlap(
    a: &Shape,
    pa: &Pose,
    b: &Shape,
    pb: &Pose,
    inflate: f64,
) -> bool {
    let (ax0, ay0, ax1, ay1) = bounding_box(a, pa);
    let (bx0, by0, bx1, by1) = bounding_box(b, pb);
    let (x0, x1) = (ax0.max(bx0), ax1.min(bx1));
    let (y0, y1) = (ay0.max(by0), ay1.min(by1));
    if x0 > x1 || y0 > y1 {
        return false;
    }
    for i in 0..=GRID {
        let x = x0 + (x1 - x0) * i as f64 / GRID as f64;
        for j in 0..=GRID {
            let y = y0 + (y1 - y0) * j as f64 / GRID as f64;
            if point_in(a, pa, x, y, inflate) && point_in(b, pb, x, y, inflate) {
                return true;
            }
        }
    }
    false
}

/// Three-valued oracle verdict. `Some(true)` proves interiors overlap even
/// after shrinking both shapes (penetration beyond the slack); `Some(false)`
/// reports no grid hit even with both shapes grown (clear beyond the slack);
/// `None` means the pair is too close to the boundary to judge.
pub fn verdict(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Option<bool> {
    let slack = 5e-4;
    if grid_overlap(a, pa, b, pb, -slack) {
        Some(true)
    } else if !grid_overlap(a, pa, b, pb, slack) {
        Some(false)
    } else {
        None
    }
}
