//! Planar vector arithmetic shared by every module.
//!
//! Positions and velocities are points of the plane; where a module needs
//! complex-number structure (rotations, the unit-disc Green function) the
//! plane is identified with the complex numbers through [`Vec2::complex_mul`] and friends,
//! with `perp` playing the role of multiplication by the imaginary unit.

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A point or vector of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Counter-clockwise rotation by pi/2: `(x, y) -> (-y, x)`.
    ///
    /// This is the `perp` operation of the vortex equations and equals
    /// multiplication by `i` under the complex identification.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Scalar cross product `x1 y2 - y1 x2`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Product under the identification `(x, y) = x + iy`.
    pub fn complex_mul(self, other: Vec2) -> Vec2 {
        Vec2::new(
            self.x * other.x - self.y * other.y,
            self.x * other.y + self.y * other.x,
        )
    }

    /// Complex conjugate `(x, y) -> (x, -y)`.
    pub fn conj(self) -> Vec2 {
        Vec2::new(self.x, -self.y)
    }

    /// Quotient under the complex identification; caller guarantees `other != 0`.
    pub fn complex_div(self, other: Vec2) -> Vec2 {
        let d = other.norm_sq();
        Vec2::new(
            (self.x * other.x + self.y * other.y) / d,
            (self.y * other.x - self.x * other.y) / d,
        )
    }

    /// The unit complex number `e^{i theta} = (cos theta, sin theta)`.
    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

// Serialized as a plain `[x, y]` pair so scenario files stay readable.
impl Serialize for Vec2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.x)?;
        t.serialize_element(&self.y)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Vec2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vec2;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a pair [x, y] of numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec2, A::Error> {
                let x = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let y = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Vec2::new(x, y))
            }
        }
        deserializer.deserialize_tuple(2, V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perp_is_quarter_turn() {
        let v = Vec2::new(3.0, -2.0);
        assert_eq!(v.perp(), Vec2::new(2.0, 3.0));
        assert_eq!(v.perp().perp(), -v);
        assert_eq!(v.dot(v.perp()), 0.0);
    }

    #[test]
    fn complex_mul_matches_rotation() {
        let v = Vec2::new(1.0, 0.0);
        let r = v.complex_mul(Vec2::from_angle(std::f64::consts::FRAC_PI_2));
        assert!((r - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        // i * v = v.perp()
        let w = Vec2::new(0.3, -1.7);
        assert_eq!(w.complex_mul(Vec2::new(0.0, 1.0)), w.perp());
    }

    #[test]
    fn complex_div_inverts_mul() {
        let a = Vec2::new(0.4, -1.2);
        let b = Vec2::new(-2.0, 0.5);
        let q = a.complex_mul(b).complex_div(b);
        assert!((q - a).norm() < 1e-14);
    }

    #[test]
    fn serde_round_trip() {
        let v = Vec2::new(1.5, -0.25);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1.5,-0.25]");
        let back: Vec2 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
