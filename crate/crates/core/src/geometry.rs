//! Planar points and the similarity transforms applied to drawings.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, factor: f64) -> Point {
        Point::new(self.x * factor, self.y * factor)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotate about the origin by `degrees` counter-clockwise.
    pub fn rotate(self, degrees: f64) -> Point {
        let (s, c) = sin_cos_deg(degrees);
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn approx_eq(self, other: Point, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol
    }
}

/// Sine and cosine of an angle in degrees. Multiples of 90° are exact so
/// axis-aligned drawings stay on the grid after rotation.
pub fn sin_cos_deg(degrees: f64) -> (f64, f64) {
    let reduced = degrees.rem_euclid(360.0);
    if reduced == 0.0 {
        (0.0, 1.0)
    } else if reduced == 90.0 {
        (1.0, 0.0)
    } else if reduced == 180.0 {
        (0.0, -1.0)
    } else if reduced == 270.0 {
        (-1.0, 0.0)
    } else {
        reduced.to_radians().sin_cos()
    }
}

/// Normalize an angle in degrees to `[0, 360)`.
pub fn normalize_deg(degrees: f64) -> f64 {
    let r = degrees.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Uniform scale, then rotation, then translation: `p ↦ R(θ)·(s·p) + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    pub rotation_deg: f64,
    pub translation: Point,
}

impl Default for Similarity {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        rotation_deg: 0.0,
        translation: Point::ORIGIN,
    };

    pub fn rotation(degrees: f64) -> Self {
        Self {
            rotation_deg: degrees,
            ..Self::IDENTITY
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            translation: Point::new(dx, dy),
            ..Self::IDENTITY
        }
    }

    pub fn scaling(factor: f64) -> Self {
        Self {
            scale: factor,
            ..Self::IDENTITY
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        p.scale(self.scale)
            .rotate(self.rotation_deg)
            .add(self.translation)
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        Similarity {
            scale: self.scale * inner.scale,
            rotation_deg: normalize_deg(self.rotation_deg + inner.rotation_deg),
            translation: self.apply(inner.translation),
        }
    }
}

/// Closest distance from `p` to segment `a`–`b`, and the clamped segment
/// parameter in `[0, 1]` of the foot point.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (p.distance(a), 0.0);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    let foot = a.add(ab.scale(t));
    (p.distance(foot), t)
}

/// Proper intersection point of two segments' interiors, if any.
pub fn segment_intersection(a1: Point, a2: Point, b1: Point, b2: Point) -> Option<Point> {
    let r = a2.sub(a1);
    let s = b2.sub(b1);
    let denom = r.cross(s);
    if denom.abs() < 1e-12 {
        return None;
    }
    let qp = b1.sub(a1);
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(a1.add(r.scale(t)))
    } else {
        None
    }
}
