//! Pinhole camera with a linearly interpolated pose over the shutter.
//!
//! Film coordinates are continuous pixels: `(0, 0)` is the top-left corner
//! of the image, `(width, height)` the bottom-right. The camera looks along
//! its local `-z` with `+y` up.

use serde::{Deserialize, Serialize};

use crate::geometry::Ray;
use crate::math::{RigidTransform, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Psf {
    #[default]
    None,
    Gaussian { sigma: f64 },
    /// Gaussian core plus a wide, faint veil: `weight` of the energy is
    /// spread over a disk of `radius` pixels.
    Halo { sigma: f64, weight: f64, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub pose: RigidTransform,
    pub pose_end: RigidTransform,
    /// Vertical field of view, degrees.
    pub fov: f64,
    pub width: u32,
    pub height: u32,
    /// Open and close times within the normalized `[0, 1]` pose interval.
    pub shutter: [f64; 2],
    pub exposure: f64,
    pub psf: Psf,
}

/// Half-space `normal · p ≥ offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

impl Camera {
    /// Static camera with an open shutter, unit exposure and no PSF.
    pub fn new(pose: RigidTransform, fov: f64, width: u32, height: u32) -> Camera {
        Camera {
            pose,
            pose_end: pose,
            fov,
            width,
            height,
            shutter: [0.0, 1.0],
            exposure: 1.0,
            psf: Psf::None,
        }
    }

    pub fn look_at(eye: Vec3, target: Vec3, fov: f64, width: u32, height: u32) -> Camera {
        Camera::new(RigidTransform::look_at(eye, target, Vec3::Y), fov, width, height)
    }

    pub fn with_motion(mut self, pose_end: RigidTransform) -> Camera {
        self.pose_end = pose_end;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return Err(format!("camera fov {} outside (0, 180)", self.fov));
        }
        if self.width == 0 || self.height == 0 {
            return Err("camera resolution must be at least 1x1".into());
        }
        let [a, b] = self.shutter;
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(format!("shutter [{a}, {b}] outside [0, 1]"));
        }
        if !(self.exposure.is_finite() && self.exposure > 0.0) {
            return Err(format!("exposure {} must be positive", self.exposure));
        }
        Ok(())
    }

    /// Maps a uniform `u` to a time inside the shutter interval.
    pub fn shutter_time(&self, u: f64) -> f64 {
        self.shutter[0] + u * (self.shutter[1] - self.shutter[0])
    }

    pub fn mid_time(&self) -> f64 {
        self.shutter_time(0.5)
    }

    pub fn pose_at(&self, time: f64) -> RigidTransform {
        if self.pose == self.pose_end {
            self.pose
        } else {
            self.pose.interpolate(&self.pose_end, time)
        }
    }

    fn tan_half(&self) -> f64 {
        (self.fov.to_radians() / 2.0).tan()
    }

    fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    /// Unnormalized camera-space direction through film point `(px, py)`.
    pub fn local_direction(&self, px: f64, py: f64) -> Vec3 {
        let t = self.tan_half();
        let sx = (2.0 * px / self.width as f64 - 1.0) * t * self.aspect();
        let sy = (1.0 - 2.0 * py / self.height as f64) * t;
        Vec3::new(sx, sy, -1.0)
    }

    pub fn generate_ray(&self, px: f64, py: f64, time: f64) -> Ray {
        let pose = self.pose_at(time);
        let d = pose.transform_vector(self.local_direction(px, py));
        Ray::new(pose.translation, d).with_time(time)
    }

    /// Ray through the center of pixel `(x, y)` at mid-shutter.
    pub fn center_ray(&self, x: u32, y: u32) -> Ray {
        self.generate_ray(x as f64 + 0.5, y as f64 + 0.5, self.mid_time())
    }

    /// Film coordinates of world point `p` at `time`, if in front of the camera.
    pub fn project(&self, p: Vec3, time: f64) -> Option<(f64, f64)> {
        let pose = self.pose_at(time);
        let inv = pose.rotation.conjugate();
        let l = inv.rotate(p - pose.translation);
        if l.z >= 0.0 {
            return None;
        }
        let t = self.tan_half();
        let sx = l.x / -l.z / (t * self.aspect());
        let sy = l.y / -l.z / t;
        Some((
            (sx + 1.0) / 2.0 * self.width as f64,
            (1.0 - sy) / 2.0 * self.height as f64,
        ))
    }

    /// World-space viewing direction at `time`.
    pub fn forward(&self, time: f64) -> Vec3 {
        self.pose_at(time).transform_vector(-Vec3::Z)
    }

    /// The four side planes of the viewing pyramid plus the plane through
    /// the eye facing forward, all with inward normals.
    pub fn frustum(&self, time: f64) -> [Plane; 5] {
        let pose = self.pose_at(time);
        let eye = pose.translation;
        let (w, h) = (self.width as f64, self.height as f64);
        let c = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]
            .map(|(x, y)| pose.transform_vector(self.local_direction(x, y)));
        let fwd = self.forward(time);
        let center = c[0] + c[1] + c[2] + c[3];
        let side = |a: Vec3, b: Vec3| {
            let mut n = a.cross(b).normalized();
            if n.dot(center) < 0.0 {
                n = -n;
            }
            Plane {
                normal: n,
                offset: n.dot(eye),
            }
        };
        [
            side(c[0], c[1]),
            side(c[1], c[2]),
            side(c[2], c[3]),
            side(c[3], c[0]),
            Plane {
                normal: fwd,
                offset: fwd.dot(eye),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> Camera {
        Camera::look_at(Vec3::new(0.0, 1.5, 0.0), Vec3::new(0.0, 1.5, 10.0), 60.0, 64, 48)
    }

    #[test]
    fn center_ray_points_forward() {
        let c = cam();
        let r = c.generate_ray(32.0, 24.0, 0.5);
        assert!((r.direction - Vec3::Z).length() < 1e-12);
        assert_eq!(r.origin, Vec3::new(0.0, 1.5, 0.0));
    }

    #[test]
    fn top_edge_matches_fov() {
        let c = cam();
        let r = c.generate_ray(32.0, 0.0, 0.5);
        let angle = r.direction.y.atan2(r.direction.z).to_degrees();
        assert!((angle - 30.0).abs() < 1e-9);
        // Looking along +z with +y up, the image's right edge is world -x.
        let r = c.generate_ray(64.0, 24.0, 0.5);
        assert!(r.direction.x < 0.0);
    }

    #[test]
    fn projection_inverts_ray_generation() {
        let c = cam();
        for (px, py) in [(3.2, 7.9), (60.1, 40.5), (32.0, 24.0)] {
            let r = c.generate_ray(px, py, 0.5);
            let (x, y) = c.project(r.at(7.0), 0.5).unwrap();
            assert!((x - px).abs() < 1e-9 && (y - py).abs() < 1e-9);
        }
        assert!(c.project(Vec3::new(0.0, 1.5, -3.0), 0.5).is_none());
    }

    #[test]
    fn frustum_contains_view_rays() {
        let c = cam();
        let planes = c.frustum(0.5);
        for (px, py) in [(1.0, 1.0), (63.0, 47.0), (32.0, 24.0)] {
            let p = c.generate_ray(px, py, 0.5).at(20.0);
            assert!(planes.iter().all(|pl| pl.distance(p) > 0.0));
        }
        let behind = Vec3::new(0.0, 1.5, -5.0);
        assert!(planes[4].distance(behind) < 0.0);
        let beside = Vec3::new(50.0, 1.5, 1.0);
        assert!(planes.iter().any(|pl| pl.distance(beside) < 0.0));
    }

    #[test]
    fn motion_interpolates_pose() {
        let mut end = cam().pose;
        end.translation.x += 2.0;
        let c = cam().with_motion(end);
        assert!((c.pose_at(0.5).translation.x - 1.0).abs() < 1e-12);
        assert_eq!(c.center_ray(0, 0).time, 0.5);
    }
}
