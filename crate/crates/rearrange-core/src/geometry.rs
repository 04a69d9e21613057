//! Planar shapes, poses, workspace containment, and the strict-interior
//! collision predicate. Touching (tangency or shared boundary) is not a
//! collision: interiors must overlap by more than [`CONTACT_EPS`].

use serde::{Deserialize, Serialize};
use std::cell::Cell;

/// Penetration at or below this depth counts as contact, not collision.
pub const CONTACT_EPS: f64 = 1e-9;

const TAU: f64 = std::f64::consts::TAU;

/// Planar pose: position plus orientation in `[0, 2*pi)`.
///
/// Orientation is stored for every object but ignored by the predicates for
/// discs. Serialized as a `[x, y, theta]` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: normalize_angle(theta) }
    }

    /// Component-wise equality within `tol`; the angle difference is wrapped.
    pub fn approx_eq(&self, other: &Pose, tol: f64) -> bool {
        let dt = (self.theta - other.theta).abs();
        let dt = dt.min(TAU - dt);
        (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol && dt <= tol
    }
}

impl From<[f64; 3]> for Pose {
    fn from(v: [f64; 3]) -> Self {
        Pose::new(v[0], v[1], v[2])
    }
}

impl From<Pose> for [f64; 3] {
    fn from(p: Pose) -> Self {
        [p.x, p.y, p.theta]
    }
}

/// Normalize an angle into `[0, 2*pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t == TAU { 0.0 } else { t }
}

/// Object footprint: a disc or an axis-aligned rectangle rotated by the pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Disc { radius: f64 },
    Rect { width: f64, height: f64 },
}

impl Shape {
    pub fn is_disc(&self) -> bool {
        matches!(self, Shape::Disc { .. })
    }

    /// Footprint area.
    pub fn area(&self) -> f64 {
        match *self {
            Shape::Disc { radius } => std::f64::consts::PI * radius * radius,
            Shape::Rect { width, height } => width * height,
        }
    }

    /// All dimensions strictly positive and finite.
    pub fn is_valid(&self) -> bool {
        match *self {
            Shape::Disc { radius } => radius.is_finite() && radius > 0.0,
            Shape::Rect { width, height } => {
                width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0
            }
        }
    }
}

/// Rectangular workspace with its lower-left corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub width: f64,
    pub height: f64,
}

impl Workspace {
    pub fn new(width: f64, height: f64) -> Self {
        Workspace { width, height }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Counts pairwise collision queries; one solve context owns one counter.
#[derive(Debug, Default)]
pub struct CheckCounter(Cell<u64>);

impl CheckCounter {
    pub fn new() -> Self {
        CheckCounter(Cell::new(0))
    }

    pub fn count(&self) -> u64 {
        self.0.get()
    }

    fn record(&self) {
        self.0.set(self.0.get() + 1);
    }
}

/// True iff the two placed footprints' interiors overlap with penetration
/// deeper than [`CONTACT_EPS`]. Increments `counter` exactly once.
pub fn collides(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose, counter: &CheckCounter) -> bool {
    counter.record();
    match (*a, *b) {
        (Shape::Disc { radius: ra }, Shape::Disc { radius: rb }) => {
            disc_disc(pa.x, pa.y, ra, pb.x, pb.y, rb)
        }
        (Shape::Disc { radius }, Shape::Rect { width, height }) => {
            disc_rect(pa.x, pa.y, radius, width, height, pb)
        }
        (Shape::Rect { width, height }, Shape::Disc { radius }) => {
            disc_rect(pb.x, pb.y, radius, width, height, pa)
        }
        (Shape::Rect { width: wa, height: ha }, Shape::Rect { width: wb, height: hb }) => {
            rect_rect(wa, ha, pa, wb, hb, pb)
        }
    }
}

fn disc_disc(xa: f64, ya: f64, ra: f64, xb: f64, yb: f64, rb: f64) -> bool {
    let (dx, dy) = (xb - xa, yb - ya);
    let limit = ra + rb - CONTACT_EPS;
    dx * dx + dy * dy < limit * limit
}

fn disc_rect(cx: f64, cy: f64, r: f64, w: f64, h: f64, rp: &Pose) -> bool {
    // Disc center in the rectangle's frame.
    let (s, c) = rp.theta.sin_cos();
    let (dx, dy) = (cx - rp.x, cy - rp.y);
    let lx = c * dx + s * dy;
    let ly = -s * dx + c * dy;
    let px = lx.clamp(-w / 2.0, w / 2.0);
    let py = ly.clamp(-h / 2.0, h / 2.0);
    let (ex, ey) = (lx - px, ly - py);
    let limit = r - CONTACT_EPS;
    ex * ex + ey * ey < limit * limit
}

fn rect_rect(wa: f64, ha: f64, pa: &Pose, wb: f64, hb: f64, pb: &Pose) -> bool {
    let ca = rect_corners(wa, ha, pa);
    let cb = rect_corners(wb, hb, pb);
    // Separating-axis test on the four edge normals; the minimum axis
    // overlap is the penetration depth.
    for pose in [pa, pb] {
        let (s, c) = pose.theta.sin_cos();
        for axis in [(c, s), (-s, c)] {
            let (min_a, max_a) = project(&ca, axis);
            let (min_b, max_b) = project(&cb, axis);
            if max_a.min(max_b) - min_a.max(min_b) <= CONTACT_EPS {
                return false;
            }
        }
    }
    true
}

fn rect_corners(w: f64, h: f64, p: &Pose) -> [(f64, f64); 4] {
    let (s, c) = p.theta.sin_cos();
    let (hw, hh) = (w / 2.0, h / 2.0);
    let mut out = [(0.0, 0.0); 4];
    for (i, (ux, uy)) in [(hw, hh), (hw, -hh), (-hw, -hh), (-hw, hh)].iter().enumerate() {
        out[i] = (p.x + c * ux - s * uy, p.y + s * ux + c * uy);
    }
    out
}

fn project(corners: &[(f64, f64); 4], (ax, ay): (f64, f64)) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &(x, y) in corners {
        let d = x * ax + y * ay;
        min = min.min(d);
        max = max.max(d);
    }
    (min, max)
}

/// True iff the placed footprint lies inside the workspace; boundary contact
/// is allowed.
pub fn contained(shape: &Shape, pose: &Pose, ws: &Workspace) -> bool {
    match *shape {
        Shape::Disc { radius } => {
            pose.x - radius >= 0.0
                && pose.y - radius >= 0.0
                && pose.x + radius <= ws.width
                && pose.y + radius <= ws.height
        }
        Shape::Rect { width, height } => rect_corners(width, height, pose)
            .iter()
            .all(|&(x, y)| x >= 0.0 && y >= 0.0 && x <= ws.width && y <= ws.height),
    }
}
