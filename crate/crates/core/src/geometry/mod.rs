//! Rays, bounds, triangle meshes and the BVH that answers ray queries.

mod bvh;

pub use bvh::{Bvh, BvhNode, PrimitiveHit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec3;
use crate::taxonomy::ClassId;

/// Offset applied along the geometric normal when spawning secondary rays (meters).
pub const RAY_EPSILON: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("triangle {triangle} references vertex {index} but the mesh has {vertices} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        vertices: usize,
    },
    #[error("mesh has {positions} positions but {normals} normals")]
    NormalCountMismatch { positions: usize, normals: usize },
    #[error("vertex {0} is not finite")]
    NonFiniteVertex(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaterialId(pub u32);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
    /// Normalized shutter position in `[0, 1]`.
    pub time: f64,
}

impl Ray {
    /// Unbounded ray; `direction` is normalized here.
    pub fn new(origin: Vec3, direction: Vec3) -> Ray {
        Ray {
            origin,
            direction: direction.normalized(),
            t_min: 0.0,
            t_max: f64::INFINITY,
            time: 0.0,
        }
    }

    pub fn with_range(mut self, t_min: f64, t_max: f64) -> Ray {
        self.t_min = t_min;
        self.t_max = t_max;
        self
    }

    pub fn with_time(mut self, time: f64) -> Ray {
        self.time = time;
        self
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// The empty box: union identity, contains nothing.
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::splat(f64::INFINITY),
        max: Vec3::splat(f64::NEG_INFINITY),
    };

    pub fn new(a: Vec3, b: Vec3) -> Aabb {
        Aabb {
            min: a.min(b),
            max: a.max(b),
        }
    }

    pub fn from_points<I: IntoIterator<Item = Vec3>>(points: I) -> Aabb {
        points.into_iter().fold(Aabb::EMPTY, |b, p| b.grow(p))
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    #[inline]
    pub fn grow(self, p: Vec3) -> Aabb {
        Aabb {
            min: self.min.min(p),
            max: self.max.max(p),
        }
    }

    #[inline]
    pub fn union(self, o: Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    #[inline]
    pub fn extent(&self) -> Vec3 {
        if self.is_empty() {
            Vec3::ZERO
        } else {
            self.max - self.min
        }
    }

    #[inline]
    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn surface_area(&self) -> f64 {
        let e = self.extent();
        2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        o.is_empty()
            || (self.min.x <= o.min.x
                && self.min.y <= o.min.y
                && self.min.z <= o.min.z
                && self.max.x >= o.max.x
                && self.max.y >= o.max.y
                && self.max.z >= o.max.z)
    }

    /// Strict interior overlap (touching faces do not count).
    pub fn overlaps(&self, o: &Aabb) -> bool {
        self.min.x < o.max.x
            && o.min.x < self.max.x
            && self.min.y < o.max.y
            && o.min.y < self.max.y
            && self.min.z < o.max.z
            && o.min.z < self.max.z
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// Slab test against `[t0, t1]`, conservative under rounding.
    #[inline]
    pub fn hit_range(&self, origin: Vec3, inv_dir: Vec3, t0: f64, t1: f64) -> bool {
        self.entry(origin, inv_dir, t0, t1).is_some()
    }

    /// Parameter where the ray enters the box within `[t0, t1]`, if it does.
    #[inline]
    pub fn entry(&self, origin: Vec3, inv_dir: Vec3, t0: f64, t1: f64) -> Option<f64> {
        // 1 + 2·gamma(3) for f64 keeps the far bound from losing grazing hits.
        const ROBUST: f64 = 1.0 + 2.0 * (3.0 * f64::EPSILON * 0.5) / (1.0 - 3.0 * f64::EPSILON * 0.5);
        let mut lo = t0;
        let mut hi = t1;
        for axis in 0..3 {
            let inv = inv_dir[axis];
            if inv.is_infinite() {
                // direction parallel to this slab
                if origin[axis] < self.min[axis] || origin[axis] > self.max[axis] {
                    return None;
                }
                continue;
            }
            let a = (self.min[axis] - origin[axis]) * inv;
            let b = (self.max[axis] - origin[axis]) * inv;
            let near = a.min(b);
            let far = a.max(b) * ROBUST;
            lo = lo.max(near);
            hi = hi.min(far);
        }
        (lo <= hi).then_some(lo)
    }
}

/// Indexed triangle mesh tagged with one material, instance and class.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    /// Per-vertex unit normals, or empty for flat shading.
    pub normals: Vec<Vec3>,
    pub indices: Vec<[u32; 3]>,
    pub material: MaterialId,
    pub instance: InstanceId,
    pub class: ClassId,
}

impl TriangleMesh {
    pub fn new(
        positions: Vec<Vec3>,
        normals: Vec<Vec3>,
        indices: Vec<[u32; 3]>,
        material: MaterialId,
        instance: InstanceId,
        class: ClassId,
    ) -> Result<TriangleMesh, GeometryError> {
        let mesh = TriangleMesh {
            positions,
            normals,
            indices,
            material,
            instance,
            class,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !self.normals.is_empty() && self.normals.len() != self.positions.len() {
            return Err(GeometryError::NormalCountMismatch {
                positions: self.positions.len(),
                normals: self.normals.len(),
            });
        }
        if let Some(i) = self.positions.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFiniteVertex(i));
        }
        for (t, tri) in self.indices.iter().enumerate() {
            for &i in tri {
                if i as usize >= self.positions.len() {
                    return Err(GeometryError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        vertices: self.positions.len(),
                    });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.indices[t];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    pub fn triangle_count(&self) -> usize {
        self.indices.len()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.positions.iter().copied())
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.indices.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                (b - a).cross(c - a).length() * 0.5
            })
            .sum()
    }
}

/// Hit record for the nearest surface along a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceInteraction {
    pub t: f64,
    pub point: Vec3,
    /// Interpolated shading normal (unit).
    pub normal: Vec3,
    /// Face normal from the triangle winding (unit).
    pub geometric_normal: Vec3,
    pub material: MaterialId,
    pub instance: InstanceId,
    pub class: ClassId,
    /// Barycentric `(b1, b2)` of the hit.
    pub uv: (f64, f64),
    /// Global primitive index: triangles numbered across meshes in input order.
    pub primitive: u32,
    pub mesh: u32,
}

impl SurfaceInteraction {
    /// Secondary ray leaving the surface towards `direction`, with its origin
    /// pushed off the surface by [`RAY_EPSILON`] on the side it travels into.
    pub fn spawn_ray(&self, direction: Vec3, time: f64) -> Ray {
        let side = if direction.dot(self.geometric_normal) >= 0.0 {
            1.0
        } else {
            -1.0
        };
        let origin = self.point + self.geometric_normal * (RAY_EPSILON * side);
        Ray::new(origin, direction).with_time(time)
    }

    /// Shadow ray toward `target`, stopping short of it by [`RAY_EPSILON`].
    pub fn spawn_ray_to(&self, target: Vec3, time: f64) -> Ray {
        let d = target - self.point;
        let ray = self.spawn_ray(d, time);
        let dist = (target - ray.origin).length();
        ray.with_range(0.0, (dist - RAY_EPSILON).max(0.0))
    }
}

/// Ray/triangle test using the watertight scheme of Woop, Benthin and Wald:
/// the triangle is sheared into ray space so edge tests on shared edges are
/// exactly consistent between neighbours.
///
/// Returns `(t, [b0, b1, b2])` for hits with `t_min < t < t_max`, where
/// `b_i` weights vertex `i`. Degenerate triangles and rays in the triangle's
/// plane report no hit.
#[inline]
pub fn intersect_triangle(ray: &Ray, v0: Vec3, v1: Vec3, v2: Vec3) -> Option<(f64, [f64; 3])> {
    let d = ray.direction;
    let kz = d.max_dimension();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if d[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = d[kx] / d[kz];
    let sy = d[ky] / d[kz];
    let sz = 1.0 / d[kz];

    let a = v0 - ray.origin;
    let b = v1 - ray.origin;
    let c = v2 - ray.origin;

    let ax = a[kx] - sx * a[kz];
    let ay = a[ky] - sy * a[kz];
    let bx = b[kx] - sx * b[kz];
    let by = b[ky] - sy * b[kz];
    let cx = c[kx] - sx * c[kz];
    let cy = c[ky] - sy * c[kz];

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;

    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 || !det.is_finite() {
        return None;
    }

    let az = sz * a[kz];
    let bz = sz * b[kz];
    let cz = sz * c[kz];
    let t_scaled = u * az + v * bz + w * cz;
    let inv_det = 1.0 / det;
    let t = t_scaled * inv_det;
    if !(t > ray.t_min && t < ray.t_max) {
        return None;
    }
    Some((t, [u * inv_det, v * inv_det, w * inv_det]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, RngStream};

    #[test]
    fn hits_triangle_in_front() {
        let ray = Ray::new(Vec3::ZERO, Vec3::Z);
        let (t, b) = intersect_triangle(
            &ray,
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        )
        .unwrap();
        assert_eq!(t, 1.0);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn parallel_ray_misses() {
        let ray = Ray::new(Vec3::new(0.0, 0.0, 0.0), Vec3::X);
        let hit = intersect_triangle(
            &ray,
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        );
        assert!(hit.is_none());
        // in-plane
        let ray = Ray::new(Vec3::new(-5.0, 0.0, 1.0), Vec3::X);
        assert!(intersect_triangle(
            &ray,
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0)
        )
        .is_none());
    }

    #[test]
    fn degenerate_triangle_never_hits() {
        let ray = Ray::new(Vec3::new(0.5, 0.0, -1.0), Vec3::Z);
        let p = Vec3::new(0.5, 0.0, 0.0);
        assert!(intersect_triangle(&ray, p, p, p).is_none());
        let collinear = intersect_triangle(&ray, Vec3::ZERO, Vec3::X, Vec3::X * 2.0);
        assert!(collinear.is_none());
    }

    #[test]
    fn respects_t_range() {
        let tri = [Vec3::new(-1.0, -1.0, 2.0), Vec3::new(1.0, -1.0, 2.0), Vec3::new(0.0, 1.0, 2.0)];
        let ray = Ray::new(Vec3::ZERO, Vec3::Z).with_range(0.0, 1.9);
        assert!(intersect_triangle(&ray, tri[0], tri[1], tri[2]).is_none());
        let ray = Ray::new(Vec3::ZERO, Vec3::Z).with_range(2.1, 10.0);
        assert!(intersect_triangle(&ray, tri[0], tri[1], tri[2]).is_none());
    }

    #[test]
    fn shared_edge_is_watertight() {
        // Two triangles sharing the diagonal of a unit square; rays aimed
        // exactly at the diagonal must hit at least one of them.
        let a = Vec3::new(0.0, 0.0, 1.0);
        let b = Vec3::new(1.0, 0.0, 1.0);
        let c = Vec3::new(1.0, 1.0, 1.0);
        let d = Vec3::new(0.0, 1.0, 1.0);
        for i in 1..100 {
            let s = i as f64 / 100.0;
            let ray = Ray::new(Vec3::new(0.3, 0.7, 0.0), Vec3::new(s - 0.3, s - 0.7, 1.0));
            let h1 = intersect_triangle(&ray, a, b, c);
            let h2 = intersect_triangle(&ray, a, c, d);
            assert!(h1.is_some() || h2.is_some(), "crack at s={s}");
        }
    }

    /// Independent oracle: plane intersection + same-side edge tests.
    fn plane_oracle(ray: &Ray, v: [Vec3; 3]) -> Option<f64> {
        let n = (v[1] - v[0]).cross(v[2] - v[0]);
        let denom = n.dot(ray.direction);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = n.dot(v[0] - ray.origin) / denom;
        if !(t > ray.t_min && t < ray.t_max) {
            return None;
        }
        let p = ray.at(t);
        for k in 0..3 {
            let e = v[(k + 1) % 3] - v[k];
            if n.dot(e.cross(p - v[k])) < 0.0 {
                return None;
            }
        }
        Some(t)
    }

    fn edge_margin(ray: &Ray, v: [Vec3; 3]) -> f64 {
        // distance of the plane hit point to the closest edge line, relative
        let n = (v[1] - v[0]).cross(v[2] - v[0]);
        let denom = n.dot(ray.direction);
        if denom.abs() < 1e-9 {
            return 0.0;
        }
        let t = n.dot(v[0] - ray.origin) / denom;
        let p = ray.at(t);
        (0..3)
            .map(|k| {
                let e = v[(k + 1) % 3] - v[k];
                e.cross(p - v[k]).length() / e.length()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn agrees_with_plane_oracle_on_random_pairs() {
        let mut rng = RngStream::new(11, Domain::Auxiliary, 0, 0);
        let rv = |rng: &mut RngStream| Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
        let mut hits = 0;
        let mut checked = 0;
        while checked < 1000 {
            let v = [rv(&mut rng), rv(&mut rng), rv(&mut rng)];
            let origin = rv(&mut rng) * 3.0;
            let target = (v[0] + v[1] + v[2]) / 3.0 + rv(&mut rng) * 0.6;
            let ray = Ray::new(origin, target - origin);
            if edge_margin(&ray, v) < 1e-7 {
                continue;
            }
            checked += 1;
            let fast = intersect_triangle(&ray, v[0], v[1], v[2]);
            let slow = plane_oracle(&ray, v);
            match (fast, slow) {
                (Some((t, b)), Some(t2)) => {
                    hits += 1;
                    assert!((t - t2).abs() < 1e-5, "t {t} vs {t2}");
                    assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-6);
                }
                (None, None) => {}
                other => panic!("disagreement {other:?}"),
            }
        }
        assert!(hits > 200 && hits < 900, "hit count {hits} is unbalanced");
    }

    #[test]
    fn mesh_validation_catches_bad_indices() {
        let err = TriangleMesh::new(
            vec![Vec3::ZERO, Vec3::X, Vec3::Y],
            vec![],
            vec![[0, 1, 3]],
            MaterialId(0),
            InstanceId(0),
            ClassId::Road,
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::IndexOutOfRange { index: 3, .. }));
    }

    #[test]
    fn aabb_slab_handles_axis_parallel_rays() {
        let b = Aabb::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        let ray = Ray::new(Vec3::new(0.0, 0.0, -5.0), Vec3::Z);
        let inv = Vec3::new(1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z);
        assert!(b.hit_range(ray.origin, inv, 0.0, f64::INFINITY));
        // origin on the slab boundary, direction parallel to it
        let ray = Ray::new(Vec3::new(1.0, 0.0, -5.0), Vec3::Z);
        let inv = Vec3::new(1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z);
        assert!(b.hit_range(ray.origin, inv, 0.0, f64::INFINITY));
        let ray = Ray::new(Vec3::new(1.5, 0.0, -5.0), Vec3::Z);
        let inv = Vec3::new(1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z);
        assert!(!b.hit_range(ray.origin, inv, 0.0, f64::INFINITY));
    }
}
