//! Bounding volume hierarchy over world-space triangles.
//!
//! Built top-down with a binned surface-area heuristic (16 bins per axis),
//! leaves hold at most [`MAX_LEAF_SIZE`] triangles. Construction depends
//! only on the input order of meshes and triangles, so the same meshes
//! always give the same node array.

use super::{intersect_triangle, Aabb, Ray, SurfaceInteraction, TriangleMesh};
use crate::math::Vec3;

pub const MAX_LEAF_SIZE: usize = 4;
const BIN_COUNT: usize = 16;
/// Past this depth splits fall back to the object median, which bounds the
/// tree height (and the traversal stack) for any input.
const MEDIAN_DEPTH: usize = 64;
const STACK_SIZE: usize = 128;

/// Node bounds are stored in `f32`, rounded outward, so a node is 32 bytes.
#[derive(Clone, Copy, Debug, PartialEq)]
#[repr(C, align(32))]
pub struct BvhNode {
    lo: [f32; 3],
    /// Leaf: first slot in the triangle array. Interior: index of the second
    /// child (the first child directly follows its parent).
    offset: u32,
    hi: [f32; 3],
    /// Number of triangles; zero marks an interior node.
    count: u16,
    axis: u8,
}

fn round_down(x: f64) -> f32 {
    let f = x as f32;
    if f as f64 > x { f.next_down() } else { f }
}

fn round_up(x: f64) -> f32 {
    let f = x as f32;
    if (f as f64) < x { f.next_up() } else { f }
}

impl BvhNode {
    fn new(bounds: Aabb, offset: u32, count: u16, axis: u8) -> BvhNode {
        BvhNode {
            lo: [0, 1, 2].map(|a| round_down(bounds.min[a])),
            hi: [0, 1, 2].map(|a| round_up(bounds.max[a])),
            offset,
            count,
            axis,
        }
    }

    /// Stored bounds; they contain the exact bounds of the subtree.
    pub fn bounds(&self) -> Aabb {
        Aabb {
            min: Vec3::new(self.lo[0] as f64, self.lo[1] as f64, self.lo[2] as f64),
            max: Vec3::new(self.hi[0] as f64, self.hi[1] as f64, self.hi[2] as f64),
        }
    }

    /// Ray parameter at which the ray enters the node within `[t0, t1]`.
    /// `inv_dir` comes from [`inverse_direction`], so every product is
    /// finite or a signed infinity and never NaN.
    #[inline(always)]
    fn entry(&self, origin: Vec3, inv_dir: Vec3, t0: f64, t1: f64) -> Option<f64> {
        // 1 + 2·gamma(3) for f64 keeps the far bound from losing grazing hits.
        const ROBUST: f64 = 1.0 + 2.0 * (3.0 * f64::EPSILON * 0.5) / (1.0 - 3.0 * f64::EPSILON * 0.5);
        let x0 = (self.lo[0] as f64 - origin.x) * inv_dir.x;
        let x1 = (self.hi[0] as f64 - origin.x) * inv_dir.x;
        let y0 = (self.lo[1] as f64 - origin.y) * inv_dir.y;
        let y1 = (self.hi[1] as f64 - origin.y) * inv_dir.y;
        let z0 = (self.lo[2] as f64 - origin.z) * inv_dir.z;
        let z1 = (self.hi[2] as f64 - origin.z) * inv_dir.z;
        let near = max(max(min(x0, x1), min(y0, y1)), max(min(z0, z1), t0));
        let far = min(min(max(x0, x1), max(y0, y1)), max(z0, z1)) * ROBUST;
        (near <= min(far, t1)).then_some(near)
    }

    pub fn is_leaf(&self) -> bool {
        self.count > 0
    }

    /// Children of an interior node at `index`.
    pub fn children(&self, index: usize) -> Option<(usize, usize)> {
        (!self.is_leaf()).then(|| (index + 1, self.offset as usize))
    }

    /// Slot range of a leaf in [`Bvh::leaf_primitive`] order.
    pub fn primitive_range(&self) -> Option<std::ops::Range<usize>> {
        self.is_leaf()
            .then(|| self.offset as usize..self.offset as usize + self.count as usize)
    }
}

#[derive(Clone, Copy, Debug)]
struct PackedTriangle {
    v0: Vec3,
    v1: Vec3,
    v2: Vec3,
    prim: u32,
}

/// Low-level nearest hit: global primitive id, ray parameter and barycentrics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveHit {
    pub primitive: u32,
    pub t: f64,
    pub barycentric: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    triangles: Vec<PackedTriangle>,
    meshes: Vec<TriangleMesh>,
    /// First global primitive id of each mesh, plus a trailing total.
    prim_offsets: Vec<u32>,
}

#[derive(Clone, Copy)]
struct BuildPrim {
    bounds: Aabb,
    centroid: Vec3,
    prim: u32,
}

#[derive(Clone, Copy)]
struct Bin {
    bounds: Aabb,
    count: usize,
}

impl Bvh {
    /// Builds the hierarchy; primitives are numbered across `meshes` in order.
    pub fn build(meshes: Vec<TriangleMesh>) -> Bvh {
        let mut prim_offsets = Vec::with_capacity(meshes.len() + 1);
        let mut prims = Vec::new();
        let mut next = 0u32;
        for mesh in &meshes {
            prim_offsets.push(next);
            for t in 0..mesh.triangle_count() {
                let [a, b, c] = mesh.triangle(t);
                let bounds = Aabb::from_points([a, b, c]);
                prims.push(BuildPrim {
                    bounds,
                    centroid: bounds.center(),
                    prim: next,
                });
                next += 1;
            }
        }
        prim_offsets.push(next);

        let mut nodes = Vec::with_capacity(prims.len().max(1) * 2 / MAX_LEAF_SIZE + 1);
        if !prims.is_empty() {
            build_node(&mut prims, 0, 0, &mut nodes);
        }

        let mut bvh = Bvh {
            nodes,
            triangles: Vec::with_capacity(prims.len()),
            meshes,
            prim_offsets,
        };
        let triangles: Vec<PackedTriangle> = prims
            .iter()
            .map(|p| {
                let [v0, v1, v2] = bvh.triangle(p.prim);
                PackedTriangle { v0, v1, v2, prim: p.prim }
            })
            .collect();
        bvh.triangles = triangles;
        bvh
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn meshes(&self) -> &[TriangleMesh] {
        &self.meshes
    }

    pub fn primitive_count(&self) -> usize {
        *self.prim_offsets.last().unwrap_or(&0) as usize
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map_or(Aabb::EMPTY, |n| n.bounds())
    }

    /// Global primitive id stored at a leaf slot.
    pub fn leaf_primitive(&self, slot: usize) -> u32 {
        self.triangles[slot].prim
    }

    /// `(mesh index, triangle index within mesh)` for a global primitive id.
    pub fn locate(&self, prim: u32) -> (usize, usize) {
        let mesh = self.prim_offsets.partition_point(|&o| o <= prim) - 1;
        (mesh, (prim - self.prim_offsets[mesh]) as usize)
    }

    pub fn triangle(&self, prim: u32) -> [Vec3; 3] {
        let (m, t) = self.locate(prim);
        self.meshes[m].triangle(t)
    }

    /// Nearest hit with `t_min < t < t_max`. Equal-`t` ties go to the lower primitive id.
    pub fn nearest(&self, ray: &Ray) -> Option<PrimitiveHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = inverse_direction(ray.direction);
        let mut best: Option<PrimitiveHit> = None;
        let mut best_t = ray.t_max;
        self.nodes[0].entry(ray.origin, inv, ray.t_min, best_t)?;
        // Stack entries carry the child's entry distance so subtrees that
        // start beyond the current best hit are skipped when popped.
        let mut stack = [(0u32, 0.0f64); STACK_SIZE];
        let mut sp = 0usize;
        let mut index = 0usize;
        loop {
            let node = &self.nodes[index];
            if node.is_leaf() {
                let start = node.offset as usize;
                for tri in &self.triangles[start..start + node.count as usize] {
                    if let Some((t, b)) = intersect_triangle(ray, tri.v0, tri.v1, tri.v2) {
                        let better = match best {
                            None => true,
                            Some(h) => t < h.t || (t == h.t && tri.prim < h.primitive),
                        };
                        if better {
                            best_t = t;
                            best = Some(PrimitiveHit {
                                primitive: tri.prim,
                                t,
                                barycentric: b,
                            });
                        }
                    }
                }
            } else {
                let (l, r) = (index + 1, node.offset as usize);
                let tl = self.nodes[l].entry(ray.origin, inv, ray.t_min, best_t);
                let tr = self.nodes[r].entry(ray.origin, inv, ray.t_min, best_t);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        let ((near, _), far) = if b < a { ((r, b), (l, a)) } else { ((l, a), (r, b)) };
                        stack[sp] = (far.0 as u32, far.1);
                        sp += 1;
                        index = near;
                        continue;
                    }
                    (Some(_), None) => {
                        index = l;
                        continue;
                    }
                    (None, Some(_)) => {
                        index = r;
                        continue;
                    }
                    (None, None) => {}
                }
            }
            // Equal-t ties must still reach lower ids, so only subtrees
            // clearly beyond the best hit are culled.
            loop {
                if sp == 0 {
                    return best;
                }
                sp -= 1;
                let (i, t) = stack[sp];
                if t <= best_t * (1.0 + 1e-12) {
                    index = i as usize;
                    break;
                }
            }
        }
    }

    /// Nearest surface interaction along `ray`.
    pub fn intersect(&self, ray: &Ray) -> Option<SurfaceInteraction> {
        self.nearest(ray).map(|hit| self.interaction(ray, &hit))
    }

    /// Expands a primitive hit into a full interaction record.
    pub fn interaction(&self, ray: &Ray, hit: &PrimitiveHit) -> SurfaceInteraction {
        let (m, t) = self.locate(hit.primitive);
        let mesh = &self.meshes[m];
        let [i0, i1, i2] = mesh.indices[t];
        let [p0, p1, p2] = mesh.triangle(t);
        let [b0, b1, b2] = hit.barycentric;
        let geometric_normal = (p1 - p0).cross(p2 - p0).normalized();
        let normal = if mesh.normals.is_empty() {
            geometric_normal
        } else {
            let n = mesh.normals[i0 as usize] * b0 + mesh.normals[i1 as usize] * b1 + mesh.normals[i2 as usize] * b2;
            let n = n.normalized();
            if n.length_squared() > 0.0 {
                n
            } else {
                geometric_normal
            }
        };
        SurfaceInteraction {
            t: hit.t,
            point: ray.at(hit.t),
            normal,
            geometric_normal,
            material: mesh.material,
            instance: mesh.instance,
            class: mesh.class,
            uv: (b1, b2),
            primitive: hit.primitive,
            mesh: m as u32,
        }
    }

    /// True iff some triangle intersects `ray` with `t_min < t < t_max`.
    pub fn occluded(&self, ray: &Ray) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = inverse_direction(ray.direction);
        let mut stack = [0u32; STACK_SIZE];
        let mut sp = 0usize;
        let mut index = 0usize;
        loop {
            let node = &self.nodes[index];
            if node.entry(ray.origin, inv, ray.t_min, ray.t_max).is_some() {
                if node.is_leaf() {
                    let start = node.offset as usize;
                    for tri in &self.triangles[start..start + node.count as usize] {
                        if intersect_triangle(ray, tri.v0, tri.v1, tri.v2).is_some() {
                            return true;
                        }
                    }
                } else {
                    stack[sp] = node.offset;
                    sp += 1;
                    index += 1;
                    continue;
                }
            }
            if sp == 0 {
                return false;
            }
            sp -= 1;
            index = stack[sp] as usize;
        }
    }
}

#[inline(always)]
fn min(a: f64, b: f64) -> f64 {
    if a < b { a } else { b }
}

#[inline(always)]
fn max(a: f64, b: f64) -> f64 {
    if a > b { a } else { b }
}

/// Component-wise reciprocal with zero (or subnormal) components mapped to
/// ±1e300 by their sign. Slab products then stay NaN-free: `0 · 1e300 = 0`
/// where `0 · ∞` would not be. Any unit direction has a component of at
/// least 1/√3, whose finite slab bounds the entry test.
#[inline]
fn inverse_direction(d: Vec3) -> Vec3 {
    let inv = |c: f64| {
        let r = 1.0 / c;
        if r.is_finite() { r } else { 1e300f64.copysign(c) }
    };
    Vec3::new(inv(d.x), inv(d.y), inv(d.z))
}

fn build_node(prims: &mut [BuildPrim], first: usize, depth: usize, nodes: &mut Vec<BvhNode>) -> usize {
    let bounds = prims.iter().fold(Aabb::EMPTY, |b, p| b.union(p.bounds));
    let index = nodes.len();
    if prims.len() <= MAX_LEAF_SIZE {
        nodes.push(BvhNode::new(bounds, first as u32, prims.len() as u16, 0));
        return index;
    }

    let centroid_bounds = prims.iter().fold(Aabb::EMPTY, |b, p| b.grow(p.centroid));
    let extent = centroid_bounds.extent();
    let widest = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };

    let split = if depth < MEDIAN_DEPTH {
        sah_split(prims, &centroid_bounds)
    } else {
        None
    };
    let (axis, mid) = match split {
        Some((axis, bin)) => {
            let mid = partition(prims, |p| bin_index(p.centroid, &centroid_bounds, axis) <= bin);
            (axis, mid)
        }
        None => {
            prims.sort_by(|a, b| {
                a.centroid[widest]
                    .total_cmp(&b.centroid[widest])
                    .then(a.prim.cmp(&b.prim))
            });
            (widest, prims.len() / 2)
        }
    };

    nodes.push(BvhNode::new(bounds, 0, 0, axis as u8));
    let (left, right) = prims.split_at_mut(mid);
    build_node(left, first, depth + 1, nodes);
    let right_index = build_node(right, first + mid, depth + 1, nodes);
    nodes[index].offset = right_index as u32;
    index
}

#[inline]
fn bin_index(c: Vec3, cb: &Aabb, axis: usize) -> usize {
    let lo = cb.min[axis];
    let span = cb.max[axis] - lo;
    let b = ((c[axis] - lo) / span * BIN_COUNT as f64) as usize;
    b.min(BIN_COUNT - 1)
}

/// Best `(axis, last bin of the left side)` by SAH cost, or `None` when no
/// axis separates the centroids.
fn sah_split(prims: &[BuildPrim], cb: &Aabb) -> Option<(usize, usize)> {
    let extent = cb.extent();
    let mut best: Option<(f64, usize, usize)> = None;
    for axis in 0..3 {
        if extent[axis] <= 0.0 {
            continue;
        }
        let mut bins = [Bin {
            bounds: Aabb::EMPTY,
            count: 0,
        }; BIN_COUNT];
        for p in prims {
            let b = &mut bins[bin_index(p.centroid, cb, axis)];
            b.bounds = b.bounds.union(p.bounds);
            b.count += 1;
        }
        // Suffix sweep for the right side, prefix sweep for the left.
        let mut right_area = [0.0; BIN_COUNT];
        let mut right_count = [0usize; BIN_COUNT];
        let mut acc = Aabb::EMPTY;
        let mut n = 0;
        for i in (1..BIN_COUNT).rev() {
            acc = acc.union(bins[i].bounds);
            n += bins[i].count;
            right_area[i] = acc.surface_area();
            right_count[i] = n;
        }
        let mut acc = Aabb::EMPTY;
        let mut n = 0;
        for i in 0..BIN_COUNT - 1 {
            acc = acc.union(bins[i].bounds);
            n += bins[i].count;
            let rn = right_count[i + 1];
            if n == 0 || rn == 0 {
                continue;
            }
            let cost = acc.surface_area() * n as f64 + right_area[i + 1] * rn as f64;
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, axis, i));
            }
        }
    }
    best.map(|(_, axis, bin)| (axis, bin))
}

/// In-place partition; returns the number of elements satisfying `pred`.
fn partition<F: Fn(&BuildPrim) -> bool>(prims: &mut [BuildPrim], pred: F) -> usize {
    let mut i = 0;
    for j in 0..prims.len() {
        if pred(&prims[j]) {
            prims.swap(i, j);
            i += 1;
        }
    }
    i
}
