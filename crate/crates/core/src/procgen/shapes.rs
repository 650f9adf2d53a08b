//! Mesh construction helpers: quads, boxes, prisms, ellipsoids.
//!
//! All closed shapes are wound counter-clockwise seen from outside, so the
//! face normal computed from the winding points outward.

use std::f64::consts::PI;

use crate::geometry::{GeometryError, InstanceId, MaterialId, TriangleMesh};
use crate::math::{Affine, Vec3};
use crate::taxonomy::ClassId;

/// Triangles with less area than this are dropped.
const MIN_AREA: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshBuilder {
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub indices: Vec<[u32; 3]>,
}

impl MeshBuilder {
    pub fn new() -> MeshBuilder {
        MeshBuilder::default()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn triangle_count(&self) -> usize {
        self.indices.len()
    }

    pub fn vertex(&mut self, p: Vec3, n: Vec3) -> u32 {
        self.positions.push(p);
        self.normals.push(n);
        (self.positions.len() - 1) as u32
    }

    /// Adds triangle `(a, b, c)` unless it is degenerate.
    pub fn triangle(&mut self, a: u32, b: u32, c: u32) {
        let [pa, pb, pc] = [a, b, c].map(|i| self.positions[i as usize]);
        if (pb - pa).cross(pc - pa).length() * 0.5 > MIN_AREA {
            self.indices.push([a, b, c]);
        }
    }

    /// Quad with per-corner normals, split along its `0-2` diagonal.
    pub fn quad_smooth(&mut self, p: [Vec3; 4], n: [Vec3; 4]) {
        let base = self.positions.len() as u32;
        for i in 0..4 {
            self.vertex(p[i], n[i]);
        }
        self.triangle(base, base + 1, base + 2);
        self.triangle(base, base + 2, base + 3);
        // Drop vertices nobody references (fully degenerate quad).
        if self.indices.last().is_none_or(|t| t[0] < base) {
            self.positions.truncate(base as usize);
            self.normals.truncate(base as usize);
        }
    }

    /// Flat quad; the face normal follows the winding `p0 → p1 → p2`.
    pub fn quad(&mut self, p: [Vec3; 4]) {
        let n = (p[1] - p[0]).cross(p[2] - p[0]);
        let n = if n.length_squared() > 0.0 {
            n.normalized()
        } else {
            (p[2] - p[0]).cross(p[3] - p[0]).normalized()
        };
        if !n.is_finite() {
            return;
        }
        self.quad_smooth(p, [n; 4]);
    }

    /// Rectangle centered at `c` facing `n`, with half sizes `hu` along `u`
    /// and `hv` along `n × u`.
    pub fn face(&mut self, c: Vec3, n: Vec3, u: Vec3, hu: f64, hv: f64) {
        let v = n.cross(u) * hv;
        let u = u * hu;
        self.quad_smooth([c - u - v, c + u - v, c + u + v, c - u + v], [n; 4]);
    }

    /// Axis-aligned box with outward faces.
    pub fn cuboid(&mut self, min: Vec3, max: Vec3) {
        let c = (min + max) * 0.5;
        let h = (max - min) * 0.5;
        let axes = [Vec3::X, Vec3::Y, Vec3::Z];
        for i in 0..3 {
            let u = axes[(i + 1) % 3];
            for sign in [1.0, -1.0] {
                let n = axes[i] * sign;
                self.face(c + n * h[i], n, u, h[(i + 1) % 3], h[(i + 2) % 3]);
            }
        }
    }

    /// Box centered at `c` with half extents `h`, rotated by `yaw` about `+y`.
    pub fn oriented_box(&mut self, c: Vec3, h: Vec3, yaw: f64) {
        let mut b = MeshBuilder::new();
        b.cuboid(-h, h);
        b.transform(&Affine::placement(c, yaw, 1.0));
        self.append(&b);
    }

    /// Vertical frustum from radius `r0` at `base` to `r1` at `base + h·y`,
    /// with an optional closed bottom and top. `r1 = 0` gives a cone.
    pub fn frustum(&mut self, base: Vec3, r0: f64, r1: f64, h: f64, segments: usize, caps: bool) {
        let ring = |r: f64, y: f64, i: usize| {
            let a = 2.0 * PI * (i % segments) as f64 / segments as f64;
            base + Vec3::new(r * a.cos(), y, r * a.sin())
        };
        let normal = |i: usize| {
            let a = 2.0 * PI * (i % segments) as f64 / segments as f64;
            Vec3::new(a.cos() * h, r0 - r1, a.sin() * h).normalized()
        };
        for i in 0..segments {
            if r1 > 0.0 {
                self.quad_smooth(
                    [ring(r0, 0.0, i), ring(r1, h, i), ring(r1, h, i + 1), ring(r0, 0.0, i + 1)],
                    [normal(i), normal(i), normal(i + 1), normal(i + 1)],
                );
            } else {
                let a = self.vertex(ring(r0, 0.0, i), normal(i));
                let b = self.vertex(base + Vec3::new(0.0, h, 0.0), (normal(i) + normal(i + 1)).normalized());
                let c = self.vertex(ring(r0, 0.0, i + 1), normal(i + 1));
                self.triangle(a, b, c);
            }
        }
        if caps {
            let bottom = self.vertex(base, -Vec3::Y);
            let ring0: Vec<u32> = (0..segments).map(|i| self.vertex(ring(r0, 0.0, i), -Vec3::Y)).collect();
            for i in 0..segments {
                self.triangle(bottom, ring0[i], ring0[(i + 1) % segments]);
            }
            if r1 > 0.0 {
                let top = self.vertex(base + Vec3::new(0.0, h, 0.0), Vec3::Y);
                let ring1: Vec<u32> = (0..segments).map(|i| self.vertex(ring(r1, h, i), Vec3::Y)).collect();
                for i in 0..segments {
                    self.triangle(top, ring1[(i + 1) % segments], ring1[i]);
                }
            }
        }
    }

    /// Closed vertical cylinder.
    pub fn cylinder(&mut self, base: Vec3, r: f64, h: f64, segments: usize) {
        self.frustum(base, r, r, h, segments, true);
    }

    /// Closed cylinder between two arbitrary points.
    pub fn cylinder_between(&mut self, a: Vec3, b: Vec3, r: f64, segments: usize) {
        let axis = b - a;
        let len = axis.length();
        if len <= 0.0 {
            return;
        }
        let mut c = MeshBuilder::new();
        c.cylinder(Vec3::ZERO, r, len, segments);
        let y = axis / len;
        let (t, bt) = crate::math::orthonormal_basis(y);
        let linear = crate::math::Mat3::from_cols(bt, y, t);
        c.transform(&Affine { linear, translation: a });
        self.append(&c);
    }

    /// Ellipsoid with radii `r`, using `stacks × slices` faces and smooth normals.
    pub fn ellipsoid(&mut self, c: Vec3, r: Vec3, stacks: usize, slices: usize) {
        let point = |j: usize, i: usize| {
            let phi = PI * j as f64 / stacks as f64;
            let theta = 2.0 * PI * (i % slices) as f64 / slices as f64;
            let u = Vec3::new(phi.sin() * theta.cos(), phi.cos(), phi.sin() * theta.sin());
            let p = c + u.mul_elem(r);
            let n = Vec3::new(u.x / r.x, u.y / r.y, u.z / r.z).normalized();
            (p, n)
        };
        for j in 0..stacks {
            for i in 0..slices {
                let corners = [point(j, i), point(j, i + 1), point(j + 1, i + 1), point(j + 1, i)];
                self.quad_smooth(corners.map(|x| x.0), corners.map(|x| x.1));
            }
        }
    }

    /// One-sided regular polygon approximating a disk facing `n`.
    pub fn disk(&mut self, c: Vec3, n: Vec3, r: f64, segments: usize) {
        let (t, b) = crate::math::orthonormal_basis(n);
        let center = self.vertex(c, n);
        let ring: Vec<u32> = (0..segments)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / segments as f64;
                self.vertex(c + (t * a.cos() + b * a.sin()) * r, n)
            })
            .collect();
        for i in 0..segments {
            self.triangle(center, ring[i], ring[(i + 1) % segments]);
        }
    }

    pub fn transform(&mut self, xf: &Affine) {
        for p in &mut self.positions {
            *p = xf.transform_point(*p);
        }
        for n in &mut self.normals {
            *n = xf.transform_normal(*n);
        }
        // A mirroring transform flips the winding.
        if xf.linear.determinant() < 0.0 {
            for t in &mut self.indices {
                t.swap(1, 2);
            }
        }
    }

    pub fn append(&mut self, other: &MeshBuilder) {
        let base = self.positions.len() as u32;
        self.positions.extend_from_slice(&other.positions);
        self.normals.extend_from_slice(&other.normals);
        self.indices
            .extend(other.indices.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }

    pub fn bounds(&self) -> crate::geometry::Aabb {
        crate::geometry::Aabb::from_points(self.positions.iter().copied())
    }

    pub fn into_mesh(
        self,
        material: MaterialId,
        instance: InstanceId,
        class: ClassId,
    ) -> Result<TriangleMesh, GeometryError> {
        TriangleMesh::new(self.positions, self.normals, self.indices, material, instance, class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn face_normal(m: &MeshBuilder, t: usize) -> Vec3 {
        let [a, b, c] = m.indices[t].map(|i| m.positions[i as usize]);
        (b - a).cross(c - a).normalized()
    }

    /// Every triangle of a closed convex shape faces away from `inside`.
    fn assert_outward(m: &MeshBuilder, inside: Vec3) {
        assert!(!m.is_empty());
        for t in 0..m.triangle_count() {
            let [a, b, c] = m.indices[t].map(|i| m.positions[i as usize]);
            let centroid = (a + b + c) / 3.0;
            assert!(face_normal(m, t).dot(centroid - inside) > 0.0, "triangle {t} faces inward");
            for i in m.indices[t] {
                assert!(m.normals[i as usize].dot(face_normal(m, t)) > 0.0);
            }
        }
    }

    #[test]
    fn cuboid_faces_outward_with_area() {
        let mut m = MeshBuilder::new();
        m.cuboid(Vec3::new(-1.0, 0.0, -2.0), Vec3::new(1.0, 3.0, 2.0));
        assert_eq!(m.triangle_count(), 12);
        assert_outward(&m, Vec3::new(0.0, 1.5, 0.0));
        let mesh = m.into_mesh(MaterialId(0), InstanceId(0), ClassId::Car).unwrap();
        let expect = 2.0 * (2.0 * 3.0 + 2.0 * 4.0 + 3.0 * 4.0);
        assert!((mesh.surface_area() - expect).abs() < 1e-9);
    }

    #[test]
    fn closed_round_shapes_face_outward() {
        let mut cyl = MeshBuilder::new();
        cyl.cylinder(Vec3::ZERO, 0.5, 2.0, 12);
        assert_outward(&cyl, Vec3::new(0.0, 1.0, 0.0));

        let mut e = MeshBuilder::new();
        e.ellipsoid(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 0.5, 2.0), 8, 12);
        assert_outward(&e, Vec3::new(1.0, 2.0, 3.0));

        let mut cone = MeshBuilder::new();
        cone.frustum(Vec3::ZERO, 1.0, 0.0, 2.0, 10, true);
        assert_outward(&cone, Vec3::new(0.0, 0.5, 0.0));

        let mut tilted = MeshBuilder::new();
        tilted.cylinder_between(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), 0.1, 8);
        assert_outward(&tilted, Vec3::new(0.5, 0.5, 0.0));
    }

    #[test]
    fn degenerate_quads_emit_nothing() {
        let mut m = MeshBuilder::new();
        let p = Vec3::new(1.0, 0.0, 0.0);
        m.quad([p, p, p, p]);
        assert!(m.is_empty());
        assert!(m.positions.is_empty());
    }

    #[test]
    fn disk_faces_its_normal() {
        let mut m = MeshBuilder::new();
        m.disk(Vec3::ZERO, -Vec3::Z, 0.1, 8);
        for t in 0..m.triangle_count() {
            assert!(face_normal(&m, t).dot(-Vec3::Z) > 0.99);
        }
    }
}
