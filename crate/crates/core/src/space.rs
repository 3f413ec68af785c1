//! Configuration space: dimension and points.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Spatial dimension of the particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    One,
    Three,
}

impl Dimension {
    pub fn value(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Three => 3,
        }
    }

    pub fn from_value(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dimension::One),
            3 => Ok(Dimension::Three),
            other => Err(Error::BadDimension(other)),
        }
    }
}

/// A point of the configuration space. In one dimension only the first
/// coordinate is used and the other two are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<T>(pub [T; 3]);

impl<T: Real> Point<T> {
    pub fn line(x: T) -> Self {
        Point([x, T::zero(), T::zero()])
    }

    pub fn space(x: T, y: T, z: T) -> Self {
        Point([x, y, z])
    }

    pub fn x(&self) -> T {
        self.0[0]
    }

    pub fn coords(&self) -> [T; 3] {
        self.0
    }

    pub fn offset(&self, d: [T; 3]) -> Self {
        Point([self.0[0] + d[0], self.0[1] + d[1], self.0[2] + d[2]])
    }

    pub fn distance(&self, other: &Self) -> T {
        let d = [self.0[0] - other.0[0], self.0[1] - other.0[1], self.0[2] - other.0[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// The Green-function argument `self - other`: signed coordinate
    /// difference for d = 1, Euclidean distance for d = 3.
    pub fn displacement(&self, other: &Self, dim: Dimension) -> T {
        match dim {
            Dimension::One => self.0[0] - other.0[0],
            Dimension::Three => self.distance(other),
        }
    }
}
