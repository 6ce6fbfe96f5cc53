//! Exact 2D ray/shape intersection and full-scan raycasting.
//!
//! Frame conventions: ray index 0 points along +x (robot forward) and
//! indices increase counter-clockwise. A ray that starts inside a shape
//! reports the exit distance, and a tangent ray counts as a hit.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::Scan;

/// Smallest reading a raycast may produce. Keeps scans strictly positive
/// when the sensor origin sits exactly on a shape boundary.
pub const MIN_READING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotates the point about the world origin.
    pub fn rotated(&self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    fn checked(self, what: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::invalid(what, format!("non-finite point ({}, {})", self.x, self.y)))
        }
    }
}

/// Wraps an angle into `[0, period)`.
fn wrap(angle: f64, period: f64) -> f64 {
    let a = angle.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if a >= period {
        0.0
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Point2,
    heading: f64,
    dir: (f64, f64),
}

impl Ray {
    pub fn new(origin: Point2, heading: f64) -> Self {
        let heading = wrap(heading, TAU);
        let (s, c) = heading.sin_cos();
        Self { origin, heading, dir: (c, s) }
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    /// Heading in `[0, 2π)`.
    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn direction(&self) -> (f64, f64) {
        self.dir
    }

    pub fn at(&self, t: f64) -> Point2 {
        Point2::new(self.origin.x + t * self.dir.0, self.origin.y + t * self.dir.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point2, radius: f64) -> Result<Self> {
        let center = center.checked("circle center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("circle radius", format!("{radius} is not a positive finite length")));
        }
        Ok(Self { center, radius })
    }
}

/// Oriented rectangle. `orientation` is the angle of the local x axis and is
/// kept in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Point2,
    pub orientation: f64,
    pub half_extents: (f64, f64),
}

impl Rect {
    pub fn new(center: Point2, orientation: f64, half_extents: (f64, f64)) -> Result<Self> {
        let center = center.checked("rectangle center")?;
        let (hx, hy) = half_extents;
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(Error::invalid(
                "rectangle half extents",
                format!("({hx}, {hy}) must both be positive and finite"),
            ));
        }
        if !orientation.is_finite() {
            return Err(Error::invalid("rectangle orientation", "non-finite angle".to_string()));
        }
        Ok(Self { center, orientation: wrap(orientation, PI), half_extents })
    }

    /// Axis-aligned rectangle from its corner coordinates.
    pub fn from_bounds(min: Point2, max: Point2) -> Result<Self> {
        let center = Point2::new(0.5 * (min.x + max.x), 0.5 * (min.y + max.y));
        Rect::new(center, 0.0, (0.5 * (max.x - min.x), 0.5 * (max.y - min.y)))
    }

    /// World point expressed in the rectangle's local frame.
    pub fn to_local(&self, p: Point2) -> Point2 {
        Point2::new(p.x - self.center.x, p.y - self.center.y).rotated(-self.orientation)
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point2; 4] {
        let (hx, hy) = self.half_extents;
        [(hx, hy), (-hx, hy), (-hx, -hy), (hx, -hy)].map(|(x, y)| {
            let p = Point2::new(x, y).rotated(self.orientation);
            Point2::new(p.x + self.center.x, p.y + self.center.y)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObstacleShape {
    Circle(Circle),
    Rectangle(Rect),
}

impl ObstacleShape {
    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        Circle::new(center, radius).map(ObstacleShape::Circle)
    }

    pub fn rectangle(center: Point2, orientation: f64, half_extents: (f64, f64)) -> Result<Self> {
        Rect::new(center, orientation, half_extents).map(ObstacleShape::Rectangle)
    }

    /// Re-checks the invariants, e.g. after deserializing.
    pub fn checked(self) -> Result<Self> {
        match self {
            ObstacleShape::Circle(c) => ObstacleShape::circle(c.center, c.radius),
            ObstacleShape::Rectangle(r) => ObstacleShape::rectangle(r.center, r.orientation, r.half_extents),
        }
    }

    pub fn center(&self) -> Point2 {
        match self {
            ObstacleShape::Circle(c) => c.center,
            ObstacleShape::Rectangle(r) => r.center,
        }
    }

    pub fn ray_intersect(&self, ray: &Ray) -> Option<f64> {
        match self {
            ObstacleShape::Circle(c) => ray_circle_intersect(ray, c),
            ObstacleShape::Rectangle(r) => ray_rect_intersect(ray, r),
        }
    }

    /// Closed-region containment.
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            ObstacleShape::Circle(c) => c.center.distance(&p) <= c.radius,
            ObstacleShape::Rectangle(r) => {
                let q = r.to_local(p);
                q.x.abs() <= r.half_extents.0 && q.y.abs() <= r.half_extents.1
            }
        }
    }

    /// Same shape rotated about the world origin by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        match *self {
            ObstacleShape::Circle(c) => ObstacleShape::Circle(Circle { center: c.center.rotated(angle), ..c }),
            ObstacleShape::Rectangle(r) => ObstacleShape::Rectangle(Rect {
                center: r.center.rotated(angle),
                orientation: wrap(r.orientation + angle, PI),
                half_extents: r.half_extents,
            }),
        }
    }
}

/// Smallest non-negative `t` where the ray meets the circle boundary.
pub fn ray_circle_intersect(ray: &Ray, circle: &Circle) -> Option<f64> {
    let (dx, dy) = ray.dir;
    let fx = ray.origin.x - circle.center.x;
    let fy = ray.origin.y - circle.center.y;
    // |f + t d|^2 = r^2 with |d| = 1  =>  t^2 + 2 b t + c = 0
    let b = fx * dx + fy * dy;
    let c = fx * fx + fy * fy - circle.radius * circle.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let near = -b - sq;
    if near >= 0.0 {
        return Some(near);
    }
    let far = -b + sq;
    (far >= 0.0).then_some(far)
}

/// Slab test in the rectangle's local frame.
pub fn ray_rect_intersect(ray: &Ray, rect: &Rect) -> Option<f64> {
    let p = rect.to_local(ray.origin);
    let (s, c) = (ray.heading - rect.orientation).sin_cos();
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for (pos, dir, half) in [(p.x, c, rect.half_extents.0), (p.y, s, rect.half_extents.1)] {
        if dir == 0.0 {
            if pos.abs() > half {
                return None;
            }
            continue;
        }
        let a = (-half - pos) / dir;
        let b = (half - pos) / dir;
        t_enter = t_enter.max(a.min(b));
        t_exit = t_exit.min(a.max(b));
    }
    if t_exit < t_enter || t_exit < 0.0 {
        return None;
    }
    Some(if t_enter >= 0.0 { t_enter } else { t_exit })
}

/// Heading of ray `index` in a scan of `n_rays`.
pub fn ray_heading(index: usize, n_rays: usize) -> f64 {
    TAU * index as f64 / n_rays as f64
}

/// Casts `n_rays` evenly spaced rays from `origin` and returns the nearest hit
/// per ray. Misses read exactly `max_range`.
pub fn raycast_scan(origin: Point2, shapes: &[ObstacleShape], n_rays: usize, max_range: f64) -> Result<Scan> {
    if n_rays == 0 {
        return Err(Error::invalid("n_rays", "at least one ray is required".to_string()));
    }
    if !(max_range > 0.0 && max_range.is_finite()) {
        return Err(Error::invalid("max_range", format!("{max_range} is not a positive finite range")));
    }
    let readings = (0..n_rays)
        .map(|i| {
            let ray = Ray::new(origin, ray_heading(i, n_rays));
            shapes
                .iter()
                .filter_map(|s| s.ray_intersect(&ray))
                .fold(max_range, f64::min)
                .max(MIN_READING)
        })
        .collect();
    Ok(Scan::from_raw(readings, max_range))
}

/// True iff the closed shape region meets the closed disk.
pub fn shape_overlaps_disk(shape: &ObstacleShape, center: Point2, radius: f64) -> bool {
    match shape {
        ObstacleShape::Circle(c) => c.center.distance(&center) <= c.radius + radius,
        ObstacleShape::Rectangle(r) => {
            let q = r.to_local(center);
            let nearest = Point2::new(
                q.x.clamp(-r.half_extents.0, r.half_extents.0),
                q.y.clamp(-r.half_extents.1, r.half_extents.1),
            );
            nearest.distance(&q) <= radius
        }
    }
}
