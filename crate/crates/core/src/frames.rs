//! Coordinate frames: world, body-fixed and vessel-parallel.
//!
//! The vessel-parallel frame has its origin at the world origin and its axes
//! rotated by the vessel yaw, so a pose `eta_L` in that frame maps to the world
//! pose through the yaw-only transform `J_psi`.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use crate::error::{invalid, Result};
use crate::real::{wrap_angle, Real};

/// Position and intrinsic roll/pitch/yaw, angles kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerPose<T: Real> {
    pub position: Vector3<T>,
    pub orientation: Vector3<T>,
}

impl<T: Real> EulerPose<T> {
    /// Builds a pose, wrapping the angles. Non-finite input is rejected.
    pub fn new(position: Vector3<T>, orientation: Vector3<T>) -> Result<Self> {
        if !all_finite(position.iter()) || !all_finite(orientation.iter()) {
            return Err(invalid("pose components must be finite"));
        }
        Ok(Self::wrapped(position, orientation))
    }

    pub fn from_vector(eta: &Vector6<T>) -> Result<Self> {
        Self::new(eta.fixed_rows::<3>(0).into(), eta.fixed_rows::<3>(3).into())
    }

    pub fn origin() -> Self {
        Self {
            position: Vector3::zeros(),
            orientation: Vector3::zeros(),
        }
    }

    pub(crate) fn wrapped(position: Vector3<T>, orientation: Vector3<T>) -> Self {
        Self {
            position,
            orientation: orientation.map(wrap_angle),
        }
    }

    pub fn to_vector(&self) -> Vector6<T> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.position);
        v.fixed_rows_mut::<3>(3).copy_from(&self.orientation);
        v
    }

    pub fn roll(&self) -> T {
        self.orientation.x
    }

    pub fn pitch(&self) -> T {
        self.orientation.y
    }

    pub fn yaw(&self) -> T {
        self.orientation.z
    }

    /// Body-to-world rotation of this pose.
    pub fn rotation(&self) -> Matrix3<T> {
        rotation_zyx(&self.orientation)
    }
}

/// Linear and angular velocity in the body-fixed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyVelocity<T: Real> {
    pub linear: Vector3<T>,
    pub angular: Vector3<T>,
}

impl<T: Real> BodyVelocity<T> {
    pub fn new(linear: Vector3<T>, angular: Vector3<T>) -> Result<Self> {
        if !all_finite(linear.iter()) || !all_finite(angular.iter()) {
            return Err(invalid("velocity components must be finite"));
        }
        Ok(Self { linear, angular })
    }

    pub fn zeros() -> Self {
        Self {
            linear: Vector3::zeros(),
            angular: Vector3::zeros(),
        }
    }

    pub fn to_vector(&self) -> Vector6<T> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.linear);
        v.fixed_rows_mut::<3>(3).copy_from(&self.angular);
        v
    }
}

fn all_finite<'a, T: Real>(mut it: impl Iterator<Item = &'a T>) -> bool {
    it.all(|x| x.is_finite())
}

/// Rotation about the world z axis.
pub fn yaw_matrix<T: Real>(psi: T) -> Matrix3<T> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, -s, T::zero(), s, c, T::zero(), T::zero(), T::zero(), T::one())
}

/// The 6x6 transform `J_psi` taking a vessel-parallel pose to the world frame.
pub fn yaw_rotation<T: Real>(psi: T) -> Result<Matrix6<T>> {
    if !psi.is_finite() {
        return Err(invalid("yaw angle must be finite"));
    }
    let mut j = Matrix6::identity();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&yaw_matrix(psi));
    Ok(j)
}

/// `eta = J_psi(psi) * eta_L`.
pub fn to_world<T: Real>(eta_l: &EulerPose<T>, psi: T) -> EulerPose<T> {
    EulerPose::wrapped(yaw_matrix(psi) * eta_l.position, eta_l.orientation)
}

/// Inverse of [`to_world`].
pub fn to_vessel_parallel<T: Real>(eta: &EulerPose<T>, psi: T) -> EulerPose<T> {
    EulerPose::wrapped(yaw_matrix(psi).transpose() * eta.position, eta.orientation)
}

/// Body-to-world rotation for intrinsic z-y'-x'' (yaw, pitch, roll) angles.
pub fn rotation_zyx<T: Real>(angles: &Vector3<T>) -> Matrix3<T> {
    let (sr, cr) = angles.x.sin_cos();
    let (sp, cp) = angles.y.sin_cos();
    let (sy, cy) = angles.z.sin_cos();
    Matrix3::new(
        cy * cp,
        cy * sp * sr - sy * cr,
        cy * sp * cr + sy * sr,
        sy * cp,
        sy * sp * sr + cy * cr,
        sy * sp * cr - cy * sr,
        -sp,
        cp * sr,
        cp * cr,
    )
}

/// Roll/pitch/yaw recovered from a rotation matrix built by [`rotation_zyx`].
pub fn euler_from_rotation<T: Real>(r: &Matrix3<T>) -> Vector3<T> {
    let one = T::one();
    let pitch = -(r[(2, 0)].max(-one).min(one)).asin();
    let roll = r[(2, 1)].atan2(r[(2, 2)]);
    let yaw = r[(1, 0)].atan2(r[(0, 0)]);
    Vector3::new(roll, pitch, yaw)
}

/// Maps body angular rates to Euler angle rates. `None` at the pitch singularity.
pub fn euler_rate_matrix<T: Real>(angles: &Vector3<T>) -> Option<Matrix3<T>> {
    let (sr, cr) = angles.x.sin_cos();
    let cp = angles.y.cos();
    if cp.abs() < T::default_epsilon().sqrt() {
        return None;
    }
    let tp = angles.y.tan();
    Some(Matrix3::new(
        T::one(),
        sr * tp,
        cr * tp,
        T::zero(),
        cr,
        -sr,
        T::zero(),
        sr / cp,
        cr / cp,
    ))
}
