use std::ops::Mul;

use nalgebra::{Isometry3, Translation3, UnitQuaternion};

use super::{Point3, Vector3};

/// A rigid transform `p ↦ R·p + t` with the rotation stored as a unit
/// quaternion (scalar first, as in `nalgebra`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3,
}

impl Default for RigidPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidPose {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3) -> Self {
        Self::new(UnitQuaternion::identity(), translation)
    }

    /// Builds a pose from a raw scalar-first quaternion `(w, x, y, z)`,
    /// normalizing it.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64, translation: Vector3) -> Self {
        let q = nalgebra::Quaternion::new(w, x, y, z);
        Self::new(UnitQuaternion::from_quaternion(q), translation)
    }

    #[inline]
    pub fn transform_point(&self, p: &Point3) -> Point3 {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        Self::new(inv, -(inv * self.translation))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.translation), self.rotation)
    }

    /// Quaternion coefficients in scalar-first order.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    /// Geodesic angle between the two rotations, in radians.
    pub fn rotation_angle_to(&self, other: &Self) -> f64 {
        self.rotation.angle_to(&other.rotation)
    }
}

impl Mul for RigidPose {
    type Output = RigidPose;

    fn mul(self, rhs: RigidPose) -> RigidPose {
        self.compose(&rhs)
    }
}
