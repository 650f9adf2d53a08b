//! Turns a sampled world into a flat scene restricted to camera-relevant
//! geometry.
//!
//! A group of meshes is kept when its bounds reach the view frustum dilated
//! by [`REFLECTION_RADIUS`], or when the bounds swept along the horizontal
//! sun-shadow direction by the shadow distance (see
//! [`Relevance::shadow_distance`]) and extended to the ground reach the
//! undilated frustum.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use super::assets::{AssetLibrary, MaterialSlot, Prototype};
use super::builders::{self, Piece};
use super::shapes::MeshBuilder;
use super::world::{
    Placement, PlacementKind, Side, WorldSpec, STREET_END, STREET_START,
};
use super::ProcgenError;
use crate::geometry::{Aabb, InstanceId, MaterialId, TriangleMesh};
use crate::lighting::{Environment, Material, Spectrum, SunSky};
use crate::math::{Affine, RigidTransform, Vec3};
use crate::render::{Camera, Plane, Psf};
use crate::taxonomy::{instance_code, ClassId};

pub const REFLECTION_RADIUS: f64 = 20.0;
/// Height of the reference occluder whose shadow length sets the margin.
pub const SHADOW_OCCLUDER_HEIGHT: f64 = 30.0;
pub const SHADOW_FLOOR: f64 = 50.0;
/// Cap for grazing sun angles.
pub const SHADOW_CAP: f64 = 500.0;

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceInfo {
    pub id: InstanceId,
    pub class: ClassId,
    /// Instance-map code, `class * 1000 + index` for countable classes.
    pub code: u32,
    pub label: String,
}

/// Flattened scene: world-space meshes, their materials and instances.
#[derive(Clone, Debug)]
pub struct SceneGraph {
    pub meshes: Vec<TriangleMesh>,
    pub materials: Vec<Material>,
    pub instances: Vec<InstanceInfo>,
    pub environment: Environment,
    pub camera: Camera,
    next_index: [u32; ClassId::COUNT],
}

impl SceneGraph {
    pub fn new(environment: Environment, camera: Camera) -> SceneGraph {
        SceneGraph {
            meshes: Vec::new(),
            materials: Vec::new(),
            instances: Vec::new(),
            environment,
            camera,
            next_index: [0; ClassId::COUNT],
        }
    }

    pub fn intern_material(&mut self, m: Material) -> MaterialId {
        if let Some(i) = self.materials.iter().position(|x| *x == m) {
            return MaterialId(i as u32);
        }
        self.materials.push(m);
        MaterialId(self.materials.len() as u32 - 1)
    }

    /// Adds one instance made of `(material, mesh)` parts in world space.
    /// Empty parts are skipped; countable classes get consecutive indices.
    pub fn add_instance(
        &mut self,
        class: ClassId,
        label: &str,
        parts: Vec<(Material, MeshBuilder)>,
    ) -> Result<InstanceId, ProcgenError> {
        let id = InstanceId(self.instances.len() as u32);
        let index = self.next_index[class.code() as usize];
        if class.is_countable() {
            if index >= 1000 {
                return Err(ProcgenError::Infeasible(format!(
                    "more than 999 visible instances of {class}"
                )));
            }
            self.next_index[class.code() as usize] += 1;
        }
        for (material, mesh) in parts {
            if mesh.is_empty() {
                continue;
            }
            let mid = self.intern_material(material);
            self.meshes.push(mesh.into_mesh(mid, id, class)?);
        }
        self.instances.push(InstanceInfo {
            id,
            class,
            code: instance_code(class, index),
            label: label.to_string(),
        });
        Ok(id)
    }

    pub fn instance(&self, id: InstanceId) -> &InstanceInfo {
        &self.instances[id.0 as usize]
    }

    pub fn material(&self, id: MaterialId) -> &Material {
        &self.materials[id.0 as usize]
    }

    /// Classes with geometry in the scene, plus sky.
    pub fn classes(&self) -> BTreeSet<ClassId> {
        let mut s: BTreeSet<ClassId> = self.meshes.iter().map(|m| m.class).collect();
        s.insert(ClassId::Sky);
        s
    }

    pub fn triangle_count(&self) -> usize {
        self.meshes.iter().map(|m| m.triangle_count()).sum()
    }

    /// Checks the scene-level invariants: unique instance ids, every mesh's
    /// class matching its instance, and materials in range.
    pub fn validate(&self) -> Result<(), String> {
        for (i, inst) in self.instances.iter().enumerate() {
            if inst.id.0 as usize != i {
                return Err(format!("instance {i} has id {}", inst.id.0));
            }
        }
        for m in &self.meshes {
            let inst = self
                .instances
                .get(m.instance.0 as usize)
                .ok_or_else(|| format!("mesh references unknown instance {}", m.instance.0))?;
            if inst.class != m.class {
                return Err(format!("mesh class {} differs from instance class {}", m.class, inst.class));
            }
            if m.material.0 as usize >= self.materials.len() {
                return Err(format!("mesh references unknown material {}", m.material.0));
            }
        }
        Ok(())
    }
}

/// Camera relevance test used for culling.
#[derive(Clone, Debug)]
pub struct Relevance {
    planes: [Plane; 5],
    /// Horizontal offset from an occluder to the far end of its shadow.
    shadow: Option<Vec3>,
}

impl Relevance {
    pub fn new(camera: &Camera, sun: Option<&SunSky>) -> Relevance {
        let shadow = sun.and_then(|s| {
            let d = s.sun_direction();
            let h = Vec3::new(d.x, 0.0, d.z);
            (d.y > 0.0 && h.length() > 1e-9)
                .then(|| -h.normalized() * Relevance::shadow_distance(s.sun_latitude))
        });
        Relevance {
            planes: camera.frustum(camera.mid_time()),
            shadow,
        }
    }

    /// Horizontal shadow length of a [`SHADOW_OCCLUDER_HEIGHT`] occluder at
    /// sun elevation `elevation_deg`, floored at [`SHADOW_FLOOR`] and capped.
    pub fn shadow_distance(elevation_deg: f64) -> f64 {
        let t = elevation_deg.to_radians().tan();
        let d = if t > 0.0 { SHADOW_OCCLUDER_HEIGHT / t } else { SHADOW_CAP };
        d.clamp(SHADOW_FLOOR, SHADOW_CAP)
    }

    /// Conservative test: no plane has all eight corners more than `margin` outside.
    pub fn in_frustum(&self, b: &Aabb, margin: f64) -> bool {
        let corners = b.corners();
        self.planes
            .iter()
            .all(|p| corners.iter().any(|&c| p.distance(c) >= -margin))
    }

    pub fn is_relevant(&self, b: &Aabb) -> bool {
        if b.is_empty() {
            return false;
        }
        if self.in_frustum(b, REFLECTION_RADIUS) {
            return true;
        }
        match self.shadow {
            Some(s) => {
                let mut swept = b.union(Aabb::new(b.min + s, b.max + s));
                swept.min.y = swept.min.y.min(0.0);
                self.in_frustum(&swept, 0.0)
            }
            None => false,
        }
    }
}

/// Auto exposure `π / E`, where `E` is the horizontal irradiance from sun
/// and sky, so an 18% gray card in full light maps to 0.18.
pub fn auto_exposure(env: &Environment) -> f64 {
    const N_THETA: usize = 32;
    const N_PHI: usize = 64;
    let mut e = 0.0;
    for i in 0..N_THETA {
        let theta = (i as f64 + 0.5) / N_THETA as f64 * PI / 2.0;
        for j in 0..N_PHI {
            let phi = (j as f64 + 0.5) / N_PHI as f64 * 2.0 * PI;
            let d = Vec3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin());
            let l = match env {
                Environment::SunSky(s) => s.background(d),
                Environment::Uniform { radiance } => *radiance,
            };
            e += l.luminance() * theta.cos() * theta.sin();
        }
    }
    e *= (PI / 2.0 / N_THETA as f64) * (2.0 * PI / N_PHI as f64);
    if let Some(s) = env.sun() {
        let d = s.sun_direction();
        if d.y > 0.0 {
            let disk = s.sun_radiance * (1.0 - s.cloud_cover) + s.background(d) * s.cloud_cover;
            e += disk.luminance() * s.sun_solid_angle() * d.y;
        }
    }
    if e > 0.0 {
        PI / e
    } else {
        1.0
    }
}

/// The ego camera of `world` at the given resolution.
pub fn ego_camera(world: &WorldSpec, width: u32, height: u32) -> Camera {
    let e = &world.ego;
    let eye = Vec3::new(e.x, e.height, 0.0);
    let (yaw, pitch) = (e.yaw.to_radians(), e.pitch.to_radians());
    let dir = Vec3::new(yaw.sin() * pitch.cos(), pitch.sin(), yaw.cos() * pitch.cos());
    let pose = RigidTransform::look_at(eye, eye + dir, Vec3::Y);
    let mut end = pose;
    end.translation.z += e.speed * e.shutter;
    let mut cam = Camera::new(pose, e.fov, width, height).with_motion(end);
    cam.exposure = auto_exposure(&Environment::SunSky(world.sun));
    cam.psf = Psf::Gaussian { sigma: e.psf_sigma };
    cam
}

/// Material for a prototype part given the placement's colors.
fn slot_material(slot: MaterialSlot, p: &Placement) -> Material {
    let color = Spectrum::from_array(p.color);
    let second = Spectrum::from_array(p.secondary_color);
    match slot {
        MaterialSlot::Paint => Material::rough_specular(color, 0.4),
        MaterialSlot::Glass => Material::rough_specular(Spectrum::new(0.2, 0.22, 0.24), 0.1),
        MaterialSlot::Rubber => Material::lambertian(Spectrum::gray(0.03)),
        MaterialSlot::Metal => Material::rough_specular(Spectrum::gray(0.6), 0.3),
        MaterialSlot::Trim => Material::lambertian(Spectrum::gray(0.04)),
        MaterialSlot::Lamp => Material::lambertian(Spectrum::new(0.85, 0.85, 0.8)),
        MaterialSlot::Skin => Material::lambertian(second),
        MaterialSlot::Cloth => Material::lambertian(color),
        MaterialSlot::Hair => Material::lambertian(Spectrum::new(0.06, 0.04, 0.03)),
        MaterialSlot::Foliage => Material::lambertian(color),
        MaterialSlot::Bark => Material::lambertian(second),
        MaterialSlot::SignFace => Material::lambertian(color),
        MaterialSlot::SignBack => Material::lambertian(second),
    }
}

fn transformed(mesh: &MeshBuilder, xf: &Affine) -> MeshBuilder {
    let mut m = mesh.clone();
    m.transform(xf);
    m
}

fn prototype_parts(proto: &Prototype, xf: &Affine, p: &Placement) -> Vec<(Material, MeshBuilder)> {
    proto
        .parts
        .iter()
        .map(|part| (slot_material(part.slot, p), transformed(&part.mesh, xf)))
        .collect()
}

/// Instances contributed by one placement, culled together.
struct Group {
    label: String,
    instances: Vec<(ClassId, Vec<(Material, MeshBuilder)>)>,
}

impl Group {
    fn bounds(&self) -> Aabb {
        self.instances
            .iter()
            .flat_map(|(_, parts)| parts.iter())
            .fold(Aabb::EMPTY, |b, (_, m)| b.union(m.bounds()))
    }

    fn single(label: String, piece: Piece) -> Group {
        Group {
            label,
            instances: vec![(piece.class, vec![(piece.material, piece.mesh)])],
        }
    }
}

fn placement_group(p: &Placement, index: usize, lib: &AssetLibrary) -> Result<Group, ProcgenError> {
    let xf = p.transform();
    let label = format!("placement {index}: {}", if p.prototype.is_empty() { "procedural" } else { &p.prototype });
    let metal = Material::lambertian(Spectrum::from_array(p.color));
    let instances = match &p.kind {
        PlacementKind::Vehicle { class, .. } => {
            vec![(*class, prototype_parts(lib.get(&p.prototype)?, &xf, p))]
        }
        PlacementKind::Person => vec![(ClassId::Person, prototype_parts(lib.get(&p.prototype)?, &xf, p))],
        PlacementKind::Vegetation => {
            vec![(ClassId::Vegetation, prototype_parts(lib.get(&p.prototype)?, &xf, p))]
        }
        PlacementKind::Rider { vehicle, vehicle_class } => {
            let vproto = lib.get(vehicle)?;
            let rproto = lib.get(&p.prototype)?;
            let seat = vproto.anchor("seat").unwrap_or(Vec3::ZERO);
            let hip = rproto.anchor("hip").unwrap_or(Vec3::ZERO);
            let rxf = Affine::placement(seat - hip, 0.0, 1.0).then(&xf);
            // The vehicle keeps the rider's clothing as a neutral paint color.
            let mut vp = p.clone();
            vp.color = [0.15, 0.15, 0.16];
            vec![
                (ClassId::Rider, prototype_parts(rproto, &rxf, p)),
                (*vehicle_class, prototype_parts(vproto, &xf, &vp)),
            ]
        }
        PlacementKind::Pole { height } => {
            let (mast, head) = builders::street_lamp(*height);
            vec![(
                ClassId::Pole,
                vec![
                    (metal, transformed(&mast, &xf)),
                    (Material::lambertian(Spectrum::new(0.8, 0.8, 0.75)), transformed(&head, &xf)),
                ],
            )]
        }
        PlacementKind::TrafficLight { height, state } => {
            let (pole, housing, lamps) = builders::traffic_light(*height);
            let lit = builders::signal_color(*state);
            let dark = [
                Spectrum::new(0.08, 0.01, 0.01),
                Spectrum::new(0.08, 0.05, 0.01),
                Spectrum::new(0.01, 0.07, 0.04),
            ];
            let mut head = vec![(Material::lambertian(Spectrum::from_array(p.color)), transformed(&housing, &xf))];
            for (i, lamp) in lamps.iter().enumerate() {
                let m = if i == lit {
                    Material::emissive(builders::signal_emission(i))
                } else {
                    Material::lambertian(dark[i])
                };
                head.push((m, transformed(lamp, &xf)));
            }
            vec![
                (
                    ClassId::Pole,
                    vec![(Material::lambertian(Spectrum::gray(0.3)), transformed(&pole, &xf))],
                ),
                (ClassId::TrafficLight, head),
            ]
        }
        PlacementKind::TrafficSign { height } => {
            let plate = lib.get(&p.prototype)?;
            let mount = plate.anchor("mount").unwrap_or(Vec3::ZERO);
            let target = Vec3::new(0.0, *height, -0.035);
            let local = Affine::placement(target - mount * p.scale, 0.0, p.scale);
            let pxf = local.then(&Affine::placement(p.position, p.yaw, 1.0));
            let post = builders::sign_post(*height);
            vec![
                (
                    ClassId::Pole,
                    vec![(
                        Material::lambertian(Spectrum::gray(0.4)),
                        transformed(&post, &Affine::placement(p.position, p.yaw, 1.0)),
                    )],
                ),
                (ClassId::TrafficSign, prototype_parts(plate, &pxf, p)),
            ]
        }
    };
    Ok(Group { label, instances })
}

/// Static street geometry, chunked along the street.
fn static_groups(world: &WorldSpec) -> Vec<Group> {
    let mut out = Vec::new();
    let road_mat = builders::road_material(&world.road, world.seed);
    let walk_mat = builders::sidewalk_material(world);
    let mut z = STREET_START;
    while z < STREET_END {
        let z1 = (z + builders::CHUNK_LENGTH).min(STREET_END);
        out.push(Group {
            label: format!("road {z:.0}..{z1:.0}"),
            instances: vec![(
                ClassId::Road,
                vec![
                    (road_mat, builders::road_surface(&world.road, z, z1)),
                    (builders::marking_material(), builders::lane_markings(&world.road, z, z1)),
                ],
            )],
        });
        for side in Side::BOTH {
            out.push(Group::single(
                format!("sidewalk {side:?} {z:.0}..{z1:.0}"),
                Piece {
                    class: ClassId::Sidewalk,
                    material: walk_mat,
                    mesh: builders::sidewalk_strip(world, side, z, z1),
                },
            ));
        }
        z = z1;
    }
    out.push(Group::single(
        "terrain".into(),
        Piece {
            class: ClassId::Terrain,
            material: builders::terrain_material(),
            mesh: builders::terrain(),
        },
    ));
    for (i, lot) in world.lots.iter().enumerate() {
        if let Some(b) = &lot.building {
            let (wall, glass) = builders::building_parts(world, lot, b);
            out.push(Group {
                label: format!("building {i}"),
                instances: vec![(
                    ClassId::Building,
                    vec![
                        (builders::facade_material(b), wall),
                        (builders::window_material(), glass),
                    ],
                )],
            });
        }
    }
    out
}

/// Realizes `world` for `camera` using the built-in asset library.
pub fn realize_world(world: &WorldSpec, camera: &Camera) -> Result<SceneGraph, ProcgenError> {
    realize_world_with(world, camera, AssetLibrary::builtin())
}

pub fn realize_world_with(
    world: &WorldSpec,
    camera: &Camera,
    lib: &AssetLibrary,
) -> Result<SceneGraph, ProcgenError> {
    let relevance = Relevance::new(camera, Some(&world.sun));
    let mut scene = SceneGraph::new(Environment::SunSky(world.sun), *camera);
    let mut groups = static_groups(world);
    for (i, p) in world.placements.iter().enumerate() {
        groups.push(placement_group(p, i, lib)?);
    }
    for g in groups {
        if !relevance.is_relevant(&g.bounds()) {
            continue;
        }
        for (class, parts) in g.instances {
            scene.add_instance(class, &g.label, parts)?;
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procgen::{sample_world, ScenarioScope};

    fn forward_camera(sun_lon: f64) -> (WorldSpec, Camera) {
        let mut w = sample_world(&ScenarioScope::empty_street(), 3).unwrap();
        w.sun.sun_longitude = sun_lon;
        w.sun.sun_latitude = 10.0;
        w.ego.pitch = 0.0;
        w.ego.yaw = 0.0;
        let cam = ego_camera(&w, 64, 36);
        (w, cam)
    }

    #[test]
    fn empty_street_has_only_stuff_classes() {
        let (w, cam) = forward_camera(0.0);
        let scene = realize_world(&w, &cam).unwrap();
        let expected = BTreeSet::from([ClassId::Road, ClassId::Sidewalk, ClassId::Terrain, ClassId::Sky]);
        assert_eq!(scene.classes(), expected);
        scene.validate().unwrap();
    }

    #[test]
    fn shadow_distance_formula() {
        assert_eq!(Relevance::shadow_distance(80.0), SHADOW_FLOOR);
        let d = Relevance::shadow_distance(10.0);
        assert!((d - 30.0 / 10f64.to_radians().tan()).abs() < 1e-9);
        assert_eq!(Relevance::shadow_distance(0.5), SHADOW_CAP);
    }

    /// Independent check: bounds behind the camera beyond the reflection
    /// radius, with the sun in front, are culled.
    #[test]
    fn object_behind_camera_is_culled() {
        let (_, cam) = forward_camera(0.0);
        let sky = SunSky {
            sun_longitude: 0.0,
            sun_latitude: 30.0,
            ..Default::default()
        };
        let rel = Relevance::new(&cam, Some(&sky));
        let eye = cam.pose.translation;
        let behind = Aabb::new(eye + Vec3::new(-1.0, -1.0, -45.0), eye + Vec3::new(1.0, 2.0, -42.0));
        assert!(!rel.is_relevant(&behind));
        let near_behind = Aabb::new(eye + Vec3::new(-1.0, -1.0, -8.0), eye + Vec3::new(1.0, 2.0, -6.0));
        assert!(rel.is_relevant(&near_behind));
        let ahead = Aabb::new(eye + Vec3::new(-1.0, -1.0, 30.0), eye + Vec3::new(1.0, 2.0, 32.0));
        assert!(rel.is_relevant(&ahead));
    }

    #[test]
    fn low_sun_behind_keeps_shadow_casters() {
        let (_, cam) = forward_camera(180.0);
        let sky = SunSky {
            sun_longitude: 180.0,
            sun_latitude: 10.0,
            ..Default::default()
        };
        let rel = Relevance::new(&cam, Some(&sky));
        let building = Aabb::new(Vec3::new(8.0, 0.0, -58.0), Vec3::new(20.0, 15.0, -40.0));
        assert!(rel.is_relevant(&building));
        // Same building with the sun in front: its shadow points away.
        let mut front = sky;
        front.sun_longitude = 0.0;
        let rel = Relevance::new(&cam, Some(&front));
        assert!(!rel.is_relevant(&building));
    }

    #[test]
    fn realize_is_deterministic_and_valid() {
        let w = sample_world(&ScenarioScope::default(), 11).unwrap();
        let cam = ego_camera(&w, 64, 36);
        let a = realize_world(&w, &cam).unwrap();
        let b = realize_world(&w, &cam).unwrap();
        a.validate().unwrap();
        assert_eq!(a.meshes, b.meshes);
        assert_eq!(a.instances, b.instances);
        let codes: BTreeSet<u32> = a
            .instances
            .iter()
            .filter(|i| i.class.is_countable())
            .map(|i| i.code)
            .collect();
        assert_eq!(codes.len(), a.instances.iter().filter(|i| i.class.is_countable()).count());
    }

    #[test]
    fn auto_exposure_maps_gray_card() {
        let env = Environment::Uniform {
            radiance: Spectrum::gray(2.0),
        };
        // E = π·L for a uniform sky.
        assert!((auto_exposure(&env) - 0.5).abs() < 1e-3);
    }
}
