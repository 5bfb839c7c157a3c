use crate::error::{Error, Result};
use crate::lattice::Vec3;

/// A rotation by `angle` about the unit vector `axis`, acting on states as
/// `exp(−i·angle·axis·𝓘)` (active convention).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationSpec {
    axis: Vec3,
    angle: f64,
}

impl RotationSpec {
    /// Normalizes `axis`; fails on a zero or non-finite axis.
    pub fn new(axis: Vec3, angle: f64) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(n > 0.0 && n.is_finite() && angle.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad rotation axis {axis:?} / angle {angle}")));
        }
        Ok(Self { axis: [axis[0] / n, axis[1] / n, axis[2] / n], angle })
    }

    pub fn about_x(angle: f64) -> Self {
        Self { axis: [1.0, 0.0, 0.0], angle }
    }

    pub fn about_y(angle: f64) -> Self {
        Self { axis: [0.0, 1.0, 0.0], angle }
    }

    pub fn about_z(angle: f64) -> Self {
        Self { axis: [0.0, 0.0, 1.0], angle }
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn quaternion(&self) -> Quaternion {
        let (s, c) = (0.5 * self.angle).sin_cos();
        Quaternion { w: c, v: [s * self.axis[0], s * self.axis[1], s * self.axis[2]] }
    }
}

/// Unit quaternion for the SU(2) element `w·1 − i v·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub v: Vec3,
}

impl Quaternion {
    /// Matrix product `self · rhs`.
    pub fn then_right(&self, rhs: &Quaternion) -> Quaternion {
        let (a, b) = (self.v, rhs.v);
        let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        Quaternion {
            w: self.w * rhs.w - (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]),
            v: [
                self.w * b[0] + rhs.w * a[0] + cross[0],
                self.w * b[1] + rhs.w * a[1] + cross[1],
                self.w * b[2] + rhs.w * a[2] + cross[2],
            ],
        }
    }

    /// Angle in `[0, 2π)` and axis; the identity (±1) maps to angle 0 about ẑ.
    pub fn to_rotation(&self) -> RotationSpec {
        let s = (self.v[0] * self.v[0] + self.v[1] * self.v[1] + self.v[2] * self.v[2]).sqrt();
        if s < 1e-14 {
            return RotationSpec::about_z(0.0);
        }
        let angle = 2.0 * s.atan2(self.w);
        RotationSpec { axis: [self.v[0] / s, self.v[1] / s, self.v[2] / s], angle }
    }
}

/// Direction of the slow γ kicks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlowAxis {
    Y,
    Z,
}

impl SlowAxis {
    pub fn rotation(self, angle: f64) -> RotationSpec {
        match self {
            SlowAxis::Y => RotationSpec::about_y(angle),
            SlowAxis::Z => RotationSpec::about_z(angle),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SlowAxis::Y => "y",
            SlowAxis::Z => "z",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "y" => Some(SlowAxis::Y),
            "z" => Some(SlowAxis::Z),
            _ => None,
        }
    }
}

/// The single rotation equal to the operator product `Uₓᴺ · U_slow` with
/// `Uₓ = exp(−iϑ𝓘ₓ)` and `U_slow = exp(−iγ 𝓘_slow)`, composed exactly in
/// SU(2). Sign-flipped elements represent the same rotation, so the angle
/// always lands in `[0, 2π)`.
pub fn composite_rotation(fast_pulses: usize, theta: f64, gamma: f64, slow_axis: SlowAxis) -> RotationSpec {
    let fast = RotationSpec::about_x(fast_pulses as f64 * theta).quaternion();
    let slow = slow_axis.rotation(gamma).quaternion();
    let q = fast.then_right(&slow);
    let q = if q.w < 0.0 { Quaternion { w: -q.w, v: [-q.v[0], -q.v[1], -q.v[2]] } } else { q };
    q.to_rotation()
}
