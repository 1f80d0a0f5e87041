//! Exact 2-D geometry for circles and flight segments.
//!
//! Everything here is closed-form: the segment/point distance is the
//! clamped projection, the chord clearance bound is `sqrt(R^2 - (L/2)^2)`,
//! and the expanded no-fly radius is `sqrt(R^2 + (V*delta/2)^2)`. These
//! three pieces together give the guarantee that a trajectory whose
//! waypoints avoid the expanded disks never enters the original disks
//! anywhere along the connecting segments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in the horizontal plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Euclidean distance to another point.
    pub fn dist(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Squared Euclidean distance to another point.
    pub fn dist_sq(&self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// A closed disk: the footprint of a cylindrical no-fly-zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point2, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// A line segment between two waypoints. `a == b` is allowed and models
/// a hovering slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("chord length {l} outside [0, {max}] for radius {radius}")]
    ChordOutOfRange { l: f64, max: f64, radius: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("slot length must be non-negative, got {0}")]
    NegativeSlot(f64),
    #[error("segment endpoint {which} at distance {dist} lies inside disk of radius {radius}")]
    EndpointInsideDisk { which: &'static str, dist: f64, radius: f64 },
    #[error("segment length {l} exceeds diameter {d}")]
    SegmentLongerThanDiameter { l: f64, d: f64 },
}

/// Distance from a point to a segment: project onto the carrier line,
/// clamp the parameter to [0, 1], and measure. Degenerate segments are
/// treated as points.
pub fn segment_point_distance(seg: Segment, p: Point2) -> f64 {
    let len_sq = seg.a.dist_sq(seg.b);
    if len_sq == 0.0 {
        return seg.a.dist(p);
    }
    let t = ((p.x - seg.a.x) * (seg.b.x - seg.a.x) + (p.y - seg.a.y) * (seg.b.y - seg.a.y))
        / len_sq;
    let t = t.clamp(0.0, 1.0);
    let closest = Point2::new(seg.a.x + t * (seg.b.x - seg.a.x), seg.a.y + t * (seg.b.y - seg.a.y));
    closest.dist(p)
}

/// Minimum distance from the center of a radius-`r_b` circle to any
/// segment of length at most `l` whose endpoints are not interior points:
/// `sqrt(r_b^2 - (l/2)^2)`.
///
/// Requires `0 <= l <= 2*r_b`.
pub fn chord_clearance_bound(r_b: f64, l: f64) -> Result<f64, GeometryError> {
    if r_b <= 0.0 {
        return Err(GeometryError::NonPositiveRadius(r_b));
    }
    if !(0.0..=2.0 * r_b).contains(&l) {
        return Err(GeometryError::ChordOutOfRange { l, max: 2.0 * r_b, radius: r_b });
    }
    let half = l / 2.0;
    // Guard the radicand against round-off at l == 2*r_b.
    Ok((r_b * r_b - half * half).max(0.0).sqrt())
}

/// Radius of the expanded no-fly-zone for a slot of length `delta` at
/// maximum speed `v`: `sqrt(r_m^2 + (v*delta/2)^2)`.
///
/// Keeping both waypoints of a slot outside this radius keeps the whole
/// in-between segment outside the original radius `r_m`.
pub fn expanded_radius(r_m: f64, v: f64, delta: f64) -> Result<f64, GeometryError> {
    if r_m <= 0.0 {
        return Err(GeometryError::NonPositiveRadius(r_m));
    }
    if v <= 0.0 {
        return Err(GeometryError::NonPositiveSpeed(v));
    }
    if delta < 0.0 {
        return Err(GeometryError::NegativeSlot(delta));
    }
    let half_leg = v * delta / 2.0;
    Ok((r_m * r_m + half_leg * half_leg).sqrt())
}

/// True iff the segment dips strictly inside the disk, with `tol` meters
/// of slack absorbing floating round-off.
pub fn segment_violates_disk(seg: Segment, disk: Disk, tol: f64) -> bool {
    segment_point_distance(seg, disk.center) < disk.radius - tol
}

/// Exact clearance of a segment whose endpoints both lie outside the
/// (expanded) disk and whose length does not exceed the diameter.
///
/// The returned value is guaranteed to be at least
/// `chord_clearance_bound(disk_exp.radius, seg.length())`; this function
/// only checks the hypotheses and measures, it does not enforce the bound.
pub fn theorem1_clearance(disk_exp: Disk, seg: Segment) -> Result<f64, GeometryError> {
    let da = seg.a.dist(disk_exp.center);
    if da < disk_exp.radius {
        return Err(GeometryError::EndpointInsideDisk {
            which: "a",
            dist: da,
            radius: disk_exp.radius,
        });
    }
    let db = seg.b.dist(disk_exp.center);
    if db < disk_exp.radius {
        return Err(GeometryError::EndpointInsideDisk {
            which: "b",
            dist: db,
            radius: disk_exp.radius,
        });
    }
    let l = seg.length();
    if l > 2.0 * disk_exp.radius {
        return Err(GeometryError::SegmentLongerThanDiameter { l, d: 2.0 * disk_exp.radius });
    }
    Ok(segment_point_distance(seg, disk_exp.center))
}
