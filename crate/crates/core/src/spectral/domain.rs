use num_traits::Float;

use crate::error::{Error, Result};

/// A point in the plane; one-dimensional domains use the first slot only.
pub type Point = [f64; 2];

/// Model domains. Radial weights `|x|` are measured from [`Domain::center`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Domain {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
    Disk { radius: f64 },
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        Domain::Interval { length }.validated()
    }

    pub fn rectangle(lx: f64, ly: f64) -> Result<Self> {
        Domain::Rectangle { lx, ly }.validated()
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Domain::Disk { radius }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Domain::Interval { length } => length > 0.0 && length.is_finite(),
            Domain::Rectangle { lx, ly } => {
                lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()
            }
            Domain::Disk { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidDomain("lengths must be positive and finite"))
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Interval { .. } => "interval",
            Domain::Rectangle { .. } => "rectangle",
            Domain::Disk { .. } => "disk",
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Domain::Interval { length } => [0.5 * length, 0.0],
            Domain::Rectangle { lx, ly } => [0.5 * lx, 0.5 * ly],
            Domain::Disk { .. } => [0.0, 0.0],
        }
    }

    /// Balls in the sense of rearrangements: intervals and disks.
    pub fn is_ball(&self) -> bool {
        !matches!(self, Domain::Rectangle { .. })
    }

    /// Radius of the domain when it is a ball.
    pub fn ball_radius(&self) -> Option<f64> {
        match *self {
            Domain::Interval { length } => Some(0.5 * length),
            Domain::Disk { radius } => Some(radius),
            Domain::Rectangle { .. } => None,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { length } => length,
            Domain::Rectangle { lx, ly } => lx * ly,
            Domain::Disk { radius } => core::f64::consts::PI * radius * radius,
        }
    }

    /// Closed-domain membership with a small tolerance.
    pub fn contains(&self, x: Point) -> bool {
        let eps = 1e-14;
        match *self {
            Domain::Interval { length } => x[0] >= -eps && x[0] <= length + eps,
            Domain::Rectangle { lx, ly } => {
                x[0] >= -eps && x[0] <= lx + eps && x[1] >= -eps && x[1] <= ly + eps
            }
            Domain::Disk { radius } => x[0] * x[0] + x[1] * x[1] <= radius * radius * (1.0 + eps),
        }
    }

    /// Distance of `x` from the center.
    pub fn radius_of(&self, x: Point) -> f64 {
        let c = self.center();
        let dx = x[0] - c[0];
        let dy = x[1] - c[1];
        (dx * dx + dy * dy).sqrt()
    }
}
