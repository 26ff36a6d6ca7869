//! Supported homogeneous spaces and their exact metric data.
//!
//! Every model is normalized to total volume 1:
//! - Circle = R/Z and FlatTorus(d) = R^d/Z^d in unit coordinates;
//! - SU(2) = 3-sphere of radius `r = (2 pi^2)^(-1/3)` (so `2 pi^2 r^3 = 1`);
//! - SO(3) = projective 3-sphere of radius `r = (pi^2)^(-1/3)`
//!   (so `pi^2 r^3 = 1`).
//!
//! All four spaces have positive semidefinite Ricci curvature, so the
//! curvature correction constant of the smoothing inequality vanishes; the
//! evaluators in [`crate::bounds`] rely on that.

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use std::f64::consts::PI;

/// One of the supported homogeneous spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceModel {
    Circle,
    FlatTorus(u32),
    SU2,
    SO3,
}

impl SpaceModel {
    /// Manifold dimension.
    pub fn dim(&self) -> u32 {
        match self {
            SpaceModel::Circle => 1,
            SpaceModel::FlatTorus(d) => *d,
            SpaceModel::SU2 | SpaceModel::SO3 => 3,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, SpaceModel::Circle | SpaceModel::FlatTorus(_))
    }

    pub fn is_group_sphere(&self) -> bool {
        matches!(self, SpaceModel::SU2 | SpaceModel::SO3)
    }

    /// 3-sphere radius fixing volume 1 (group spaces only).
    pub fn radius_scale(&self) -> Option<f64> {
        match self {
            SpaceModel::SU2 => Some((2.0 * PI * PI).powf(-1.0 / 3.0)),
            SpaceModel::SO3 => Some((PI * PI).powf(-1.0 / 3.0)),
            _ => None,
        }
    }

    /// Geodesic diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            SpaceModel::Circle => 0.5,
            SpaceModel::FlatTorus(d) => 0.5 * (*d as f64).sqrt(),
            SpaceModel::SU2 => PI * self.radius_scale().unwrap(),
            SpaceModel::SO3 => 0.5 * PI * self.radius_scale().unwrap(),
        }
    }

    /// Validate that `p` is a legal point of this space.
    pub fn validate(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (SpaceModel::Circle | SpaceModel::FlatTorus(_), Point::Torus(x)) => {
                if x.len() != self.dim() as usize {
                    return Err(Error::InvalidPoint {
                        space: format!("{self:?}"),
                        reason: format!("expected {} coordinates, got {}", self.dim(), x.len()),
                    });
                }
                if x.iter().any(|v| !(0.0..1.0).contains(v)) {
                    return Err(Error::InvalidPoint {
                        space: format!("{self:?}"),
                        reason: "coordinates must lie in [0,1)".into(),
                    });
                }
                Ok(())
            }
            (SpaceModel::SU2 | SpaceModel::SO3, Point::Rotation(q)) => {
                if (q.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidPoint {
                        space: format!("{self:?}"),
                        reason: format!("quaternion norm {} not within 1e-12 of 1", q.norm()),
                    });
                }
                Ok(())
            }
            _ => Err(Error::InvalidPoint {
                space: format!("{self:?}"),
                reason: "point kind does not match space".into(),
            }),
        }
    }

    /// Geodesic distance between two points of this space.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (SpaceModel::Circle | SpaceModel::FlatTorus(_), Point::Torus(a), Point::Torus(b)) => {
                let mut s = 0.0;
                for (u, v) in a.iter().zip(b.iter()) {
                    let d = (u - v).abs();
                    let d = d.min(1.0 - d);
                    s += d * d;
                }
                s.sqrt()
            }
            (SpaceModel::SU2, Point::Rotation(p), Point::Rotation(q)) => {
                self.radius_scale().unwrap() * p.angle(q)
            }
            (SpaceModel::SO3, Point::Rotation(p), Point::Rotation(q)) => {
                self.radius_scale().unwrap() * p.angle_mod_sign(q)
            }
            _ => f64::NAN,
        }
    }

    /// Squared geodesic distance (the transport cost).
    pub fn distance_sq(&self, x: &Point, y: &Point) -> f64 {
        let d = self.distance(x, y);
        d * d
    }
}

/// A point of one of the supported spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    /// Coordinates in `[0,1)^d`.
    Torus(Vec<f64>),
    /// Unit quaternion; SO(3) points are classes modulo sign.
    Rotation(Quaternion),
}

impl Point {
    /// Torus point with coordinates reduced mod 1.
    pub fn torus(coords: &[f64]) -> Point {
        Point::Torus(coords.iter().map(|v| v.rem_euclid(1.0)).collect())
    }

    pub fn circle(x: f64) -> Point {
        Point::Torus(vec![x.rem_euclid(1.0)])
    }

    pub fn rotation(q: Quaternion) -> Point {
        Point::Rotation(q.normalized())
    }

    pub fn torus_coords(&self) -> Option<&[f64]> {
        match self {
            Point::Torus(x) => Some(x),
            _ => None,
        }
    }

    pub fn quaternion(&self) -> Option<&Quaternion> {
        match self {
            Point::Rotation(q) => Some(q),
            _ => None,
        }
    }
}
