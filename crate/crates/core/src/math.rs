//! Small linear-algebra kit: vectors, 3×3 matrices, quaternions and the two
//! transform flavours used by the scene (rigid camera poses and affine
//! instance placements). World units are meters, `+y` is up.

use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Unit vector in the same direction. Zero vectors stay zero.
    #[inline]
    pub fn normalized(self) -> Vec3 {
        let len = self.length();
        if len > 0.0 {
            self / len
        } else {
            self
        }
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    #[inline]
    pub fn mul_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    #[inline]
    pub fn max_component(self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    /// Index (0, 1, 2) of the component with the largest magnitude.
    #[inline]
    pub fn max_dimension(self) -> usize {
        let a = self.abs();
        if a.x > a.y {
            if a.x > a.z {
                0
            } else {
                2
            }
        } else if a.y > a.z {
            1
        } else {
            2
        }
    }

    #[inline]
    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Mirror `self` about the unit normal `n`.
    #[inline]
    pub fn reflect(self, n: Vec3) -> Vec3 {
        n * (2.0 * self.dot(n)) - self
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    #[inline]
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl MulAssign<f64> for Vec3 {
    #[inline]
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        let inv = 1.0 / s;
        Vec3::new(self.x * inv, self.y * inv, self.z * inv)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub rows: [Vec3; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [Vec3::X, Vec3::Y, Vec3::Z],
    };

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3 {
            rows: [
                Vec3::new(c0.x, c1.x, c2.x),
                Vec3::new(c0.y, c1.y, c2.y),
                Vec3::new(c0.z, c1.z, c2.z),
            ],
        }
    }

    pub fn scale(s: f64) -> Mat3 {
        Mat3 {
            rows: [Vec3::X * s, Vec3::Y * s, Vec3::Z * s],
        }
    }

    /// Rotation about `+y` by `angle` radians (counter-clockwise seen from above).
    pub fn rotation_y(angle: f64) -> Mat3 {
        let (s, c) = angle.sin_cos();
        Mat3 {
            rows: [Vec3::new(c, 0.0, s), Vec3::Y, Vec3::new(-s, 0.0, c)],
        }
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    pub fn col(&self, i: usize) -> Vec3 {
        Vec3::new(self.rows[0][i], self.rows[1][i], self.rows[2][i])
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3::from_cols(self.rows[0], self.rows[1], self.rows[2])
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let t = o.transpose();
        let row = |r: Vec3| Vec3::new(r.dot(t.rows[0]), r.dot(t.rows[1]), r.dot(t.rows[2]));
        Mat3 {
            rows: [row(self.rows[0]), row(self.rows[1]), row(self.rows[2])],
        }
    }

    pub fn determinant(&self) -> f64 {
        self.rows[0].dot(self.rows[1].cross(self.rows[2]))
    }

    pub fn inverse(&self) -> Option<Mat3> {
        let det = self.determinant();
        if det.abs() < 1e-300 {
            return None;
        }
        let [a, b, c] = self.rows;
        // Columns of the inverse are the cross products of row pairs.
        Some(Mat3::from_cols(b.cross(c) / det, c.cross(a) / det, a.cross(b) / det))
    }
}

/// Unit quaternion used for camera orientation and its interpolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let a = axis.normalized();
        let (s, c) = (angle * 0.5).sin_cos();
        Quat {
            w: c,
            x: a.x * s,
            y: a.y * s,
            z: a.z * s,
        }
    }

    /// Quaternion of a proper rotation matrix.
    pub fn from_mat3(m: &Mat3) -> Quat {
        let r = &m.rows;
        let trace = r[0].x + r[1].y + r[2].z;
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quat {
                w: 0.25 * s,
                x: (r[2].y - r[1].z) / s,
                y: (r[0].z - r[2].x) / s,
                z: (r[1].x - r[0].y) / s,
            }
        } else if r[0].x > r[1].y && r[0].x > r[2].z {
            let s = (1.0 + r[0].x - r[1].y - r[2].z).sqrt() * 2.0;
            Quat {
                w: (r[2].y - r[1].z) / s,
                x: 0.25 * s,
                y: (r[0].y + r[1].x) / s,
                z: (r[0].z + r[2].x) / s,
            }
        } else if r[1].y > r[2].z {
            let s = (1.0 + r[1].y - r[0].x - r[2].z).sqrt() * 2.0;
            Quat {
                w: (r[0].z - r[2].x) / s,
                x: (r[0].y + r[1].x) / s,
                y: 0.25 * s,
                z: (r[1].z + r[2].y) / s,
            }
        } else {
            let s = (1.0 + r[2].z - r[0].x - r[1].y).sqrt() * 2.0;
            Quat {
                w: (r[1].x - r[0].y) / s,
                x: (r[0].z + r[2].x) / s,
                y: (r[1].z + r[2].y) / s,
                z: 0.25 * s,
            }
        };
        q.normalized()
    }

    fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn normalized(self) -> Quat {
        let n = self.dot(self).sqrt();
        Quat {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// Inverse rotation of a unit quaternion.
    pub fn conjugate(self) -> Quat {
        Quat {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn rotate(self, v: Vec3) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Spherical linear interpolation along the shorter arc.
    pub fn slerp(self, mut o: Quat, t: f64) -> Quat {
        let mut cos = self.dot(o);
        if cos < 0.0 {
            o = Quat {
                w: -o.w,
                x: -o.x,
                y: -o.y,
                z: -o.z,
            };
            cos = -cos;
        }
        let (a, b) = if cos > 0.9995 {
            (1.0 - t, t)
        } else {
            let theta = cos.acos();
            let s = theta.sin();
            (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
        };
        Quat {
            w: a * self.w + b * o.w,
            x: a * self.x + b * o.x,
            y: a * self.y + b * o.y,
            z: a * self.z + b * o.z,
        }
        .normalized()
    }
}

/// Rotation followed by translation. Used for camera poses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Quat,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Quat::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Pose at `eye` whose local `-z` axis looks at `target`, local `+y` is
    /// as close to `up` as possible.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> RigidTransform {
        let forward = (target - eye).normalized();
        let right = forward.cross(up).normalized();
        let true_up = right.cross(forward);
        let m = Mat3::from_cols(right, true_up, -forward);
        RigidTransform {
            rotation: Quat::from_mat3(&m),
            translation: eye,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    /// Position lerp plus orientation slerp.
    pub fn interpolate(&self, end: &RigidTransform, t: f64) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation.slerp(end.rotation, t),
            translation: self.translation.lerp(end.translation, t),
        }
    }
}

/// General affine map `p ↦ linear·p + translation`, used to place library
/// prototypes in the world.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub linear: Mat3,
    pub translation: Vec3,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        linear: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Yaw about `+y`, then uniform scale, then translation.
    pub fn placement(position: Vec3, yaw: f64, scale: f64) -> Affine {
        Affine {
            linear: Mat3::rotation_y(yaw).mul_mat(&Mat3::scale(scale)),
            translation: position,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.linear.mul_vec(p) + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.linear.mul_vec(v)
    }

    /// Transforms a surface normal with the inverse transpose; result is unit length.
    pub fn transform_normal(&self, n: Vec3) -> Vec3 {
        match self.linear.inverse() {
            Some(inv) => inv.transpose().mul_vec(n).normalized(),
            None => n,
        }
    }

    /// Composition applying `self` first, then `outer`.
    pub fn then(&self, outer: &Affine) -> Affine {
        Affine {
            linear: outer.linear.mul_mat(&self.linear),
            translation: outer.transform_point(self.translation),
        }
    }
}

/// Builds an orthonormal basis `(t, b)` around the unit vector `n`
/// (Duff et al. branchless construction).
#[inline]
pub fn orthonormal_basis(n: Vec3) -> (Vec3, Vec3) {
    let sign = 1.0f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let t = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let bt = Vec3::new(b, sign + n.y * n.y * a, -n.y);
    (t, bt)
}

pub fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    if edge1 <= edge0 {
        return if x < edge0 { 0.0 } else { 1.0 };
    }
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3, eps: f64) -> bool {
        (a - b).length() < eps
    }

    #[test]
    fn look_at_maps_forward_to_target() {
        let pose = RigidTransform::look_at(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 2.0, 10.0), Vec3::Y);
        let fwd = pose.transform_vector(-Vec3::Z);
        assert!(close(fwd, Vec3::Z, 1e-12));
        let up = pose.transform_vector(Vec3::Y);
        assert!(close(up, Vec3::Y, 1e-12));
        let right = pose.transform_vector(Vec3::X);
        assert!(close(right, -Vec3::X, 1e-12));
    }

    #[test]
    fn quat_roundtrips_rotation_matrix() {
        for angle in [0.1, 1.0, 2.5, 3.1] {
            let axis = Vec3::new(0.3, -0.7, 0.2).normalized();
            let q = Quat::from_axis_angle(axis, angle);
            let m = Mat3::from_cols(q.rotate(Vec3::X), q.rotate(Vec3::Y), q.rotate(Vec3::Z));
            let q2 = Quat::from_mat3(&m);
            let v = Vec3::new(0.4, 1.2, -2.0);
            assert!(close(q.rotate(v), q2.rotate(v), 1e-10));
        }
    }

    #[test]
    fn slerp_endpoints() {
        let a = Quat::from_axis_angle(Vec3::Y, 0.2);
        let b = Quat::from_axis_angle(Vec3::Y, 1.4);
        let v = Vec3::X;
        assert!(close(a.slerp(b, 0.0).rotate(v), a.rotate(v), 1e-12));
        assert!(close(a.slerp(b, 1.0).rotate(v), b.rotate(v), 1e-12));
        let mid = Quat::from_axis_angle(Vec3::Y, 0.8);
        assert!(close(a.slerp(b, 0.5).rotate(v), mid.rotate(v), 1e-12));
    }

    #[test]
    fn affine_inverse_transpose_keeps_normals_perpendicular() {
        let a = Affine {
            linear: Mat3 {
                rows: [Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 0.5)],
            },
            translation: Vec3::new(1.0, 0.0, 0.0),
        };
        let tangent = Vec3::new(1.0, 1.0, 0.0);
        let normal = Vec3::new(1.0, -1.0, 0.0).normalized();
        let t2 = a.transform_vector(tangent);
        let n2 = a.transform_normal(normal);
        assert!(t2.dot(n2).abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [Vec3::Z, -Vec3::Z, Vec3::new(0.3, 0.4, -0.5).normalized(), Vec3::X] {
            let (t, b) = orthonormal_basis(n);
            assert!((t.length() - 1.0).abs() < 1e-12);
            assert!((b.length() - 1.0).abs() < 1e-12);
            assert!(t.dot(n).abs() < 1e-12 && b.dot(n).abs() < 1e-12 && t.dot(b).abs() < 1e-12);
        }
    }
}
