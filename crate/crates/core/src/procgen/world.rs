//! Concrete worlds and the rule set that samples them from a scope.
//!
//! Layout: one straight street along `+z` from [`STREET_START`] to
//! [`STREET_END`]. The road spans `|x| ≤ W/2`, each sidewalk runs from the
//! curb at `|x| = W/2` to `|x| = W/2 + S`, then a terrain strip (`setback`)
//! separates it from the building lots. The ego camera stands at `z = 0` in a
//! lane heading `+z`; dynamic objects are placed in [`DYNAMIC_ZONE`].
//!
//! Every scalar parameter draws from its own counter-based stream keyed by
//! `(seed, parameter index)`, and placements from `(seed, group, instance)`,
//! so inserting a parameter never shifts the values of the others.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::assets::{AssetLibrary, Prototype};
use super::scope::{
    FacadeMaterial, Interval, PavementMaterial, PedestrianRule, RiderVehicle, RoadMaterial,
    ScenarioScope, VehicleScope,
};
use super::ProcgenError;
use crate::geometry::Aabb;
use crate::lighting::{Spectrum, SunSky};
use crate::math::{Affine, Vec3};
use crate::rng::{Domain, RngStream};
use crate::taxonomy::ClassId;

pub const STREET_START: f64 = -60.0;
pub const STREET_END: f64 = 200.0;
/// Range of `z` where vehicles and pedestrians are placed.
pub const DYNAMIC_ZONE: (f64, f64) = (6.0, 90.0);
pub const MIN_LANE_WIDTH: f64 = 2.8;
/// Crosswalk extent along the street.
pub const CROSSWALK_DEPTH: f64 = 3.0;
pub const MAX_ATTEMPTS: u32 = 1000;
/// Minimum free space kept between footprints.
pub const CLEARANCE: f64 = 0.1;
/// Gap between a parked vehicle and the curb.
const CURB_GAP: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    /// `-1` for the `-x` side, `+1` for `+x`.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadSpec {
    pub width: f64,
    pub lanes: u32,
    pub material: RoadMaterial,
    pub repair_density: f64,
    pub crack_density: f64,
    /// Center of the crosswalk along the street, if any.
    pub crosswalk: Option<f64>,
}

impl RoadSpec {
    pub fn lane_width(&self) -> f64 {
        self.width / self.lanes as f64
    }

    /// `x` extent of lane `i`, counted from the `-x` edge.
    pub fn lane_bounds(&self, i: u32) -> (f64, f64) {
        let lw = self.lane_width();
        let x0 = -self.width / 2.0 + i as f64 * lw;
        (x0, x0 + lw)
    }

    /// Lanes on the `+x` half carry traffic toward `+z` (yaw 0), the others
    /// toward `-z`. The middle lane of an odd count heads `+z`.
    pub fn lane_yaw(&self, i: u32) -> f64 {
        if i >= self.lanes / 2 {
            0.0
        } else {
            PI
        }
    }

    /// Centers of the dashed lines between lanes.
    pub fn divider_offsets(&self) -> Vec<f64> {
        (1..self.lanes)
            .map(|k| -self.width / 2.0 + k as f64 * self.lane_width())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidewalkSpec {
    pub width: f64,
    pub curb_height: f64,
    pub material: PavementMaterial,
    pub dirt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub width: f64,
    pub height: f64,
    pub depth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildingSpec {
    pub height: f64,
    pub depth: f64,
    pub material: FacadeMaterial,
    /// Albedo multiplier applied to the facade material, each in `[0.7, 1]`.
    pub tint: [f64; 3],
    pub window: WindowSpec,
}

/// One frontage slot along the street; empty lots show terrain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lot {
    pub side: Side,
    pub z0: f64,
    pub z1: f64,
    pub building: Option<BuildingSpec>,
}

/// Ego camera parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoSpec {
    pub lane: u32,
    pub x: f64,
    pub height: f64,
    pub fov: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub speed: f64,
    pub shutter: f64,
    pub psf_sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalState {
    Red,
    Amber,
    Green,
}

/// Region a placement was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "region", content = "index", rename_all = "snake_case")]
pub enum Region {
    Lane(u32),
    /// Curb-side parking strip inside the outer lane.
    Parking(Side),
    Sidewalk(Side),
    Crosswalk,
    Road,
    /// Terrain strip between sidewalk and buildings.
    Verge(Side),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlacementKind {
    /// Library vehicle of class car, truck, bus, motorcycle or bicycle.
    Vehicle { class: ClassId, parked: bool },
    Person,
    /// A rider seated on a library bicycle or motorcycle.
    Rider { vehicle: String, vehicle_class: ClassId },
    Vegetation,
    /// Procedural street-lamp pole.
    Pole { height: f64 },
    /// Procedural signal: pole plus head.
    TrafficLight { height: f64, state: SignalState },
    /// Library sign plate mounted on a procedural pole.
    TrafficSign { height: f64 },
}

/// Axis-aligned rectangle in the ground plane, `[x, z]` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Footprint {
    pub fn from_aabb(b: &Aabb) -> Footprint {
        Footprint {
            min: [b.min.x, b.min.z],
            max: [b.max.x, b.max.z],
        }
    }

    pub fn overlaps(&self, o: &Footprint, clearance: f64) -> bool {
        self.min[0] < o.max[0] + clearance
            && o.min[0] < self.max[0] + clearance
            && self.min[1] < o.max[1] + clearance
            && o.min[1] < self.max[1] + clearance
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.min[0], self.min[1]],
            [self.max[0], self.min[1]],
            [self.max[0], self.max[1]],
            [self.min[0], self.max[1]],
        ]
    }

    pub fn inside(&self, r: &Rect) -> bool {
        self.min[0] >= r.x0 && self.max[0] <= r.x1 && self.min[1] >= r.z0 && self.max[1] <= r.z1
    }
}

/// Axis-aligned region in `x, z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl Rect {
    pub fn polygon(&self) -> Vec<[f64; 2]> {
        vec![
            [self.x0, self.z0],
            [self.x1, self.z0],
            [self.x1, self.z1],
            [self.x0, self.z1],
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub kind: PlacementKind,
    /// Library prototype; empty for purely procedural objects.
    pub prototype: String,
    pub position: Vec3,
    pub yaw: f64,
    pub scale: f64,
    pub color: [f64; 3],
    pub secondary_color: [f64; 3],
    pub region: Region,
    pub footprint: Footprint,
}

impl Placement {
    pub fn transform(&self) -> Affine {
        Affine::placement(self.position, self.yaw, self.scale)
    }

    /// Classes this placement contributes to the scene.
    pub fn classes(&self) -> Vec<ClassId> {
        match &self.kind {
            PlacementKind::Vehicle { class, .. } => vec![*class],
            PlacementKind::Person => vec![ClassId::Person],
            PlacementKind::Rider { vehicle_class, .. } => vec![ClassId::Rider, *vehicle_class],
            PlacementKind::Vegetation => vec![ClassId::Vegetation],
            PlacementKind::Pole { .. } => vec![ClassId::Pole],
            PlacementKind::TrafficLight { .. } => vec![ClassId::Pole, ClassId::TrafficLight],
            PlacementKind::TrafficSign { .. } => vec![ClassId::Pole, ClassId::TrafficSign],
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(
            self.kind,
            PlacementKind::Vehicle { .. } | PlacementKind::Person | PlacementKind::Rider { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub seed: u64,
    pub road: RoadSpec,
    pub sidewalk: SidewalkSpec,
    pub setback: f64,
    pub gap_probability: f64,
    pub lots: Vec<Lot>,
    pub sun: SunSky,
    pub ego: EgoSpec,
    pub placements: Vec<Placement>,
}

impl WorldSpec {
    /// SHA-256 of the canonical JSON serialization, as lowercase hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("world spec serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn half_width(&self) -> f64 {
        self.road.width / 2.0
    }

    /// Outer sidewalk edge distance from the street axis.
    pub fn sidewalk_outer(&self) -> f64 {
        self.half_width() + self.sidewalk.width
    }

    /// Facade distance from the street axis.
    pub fn facade_offset(&self) -> f64 {
        self.sidewalk_outer() + self.setback
    }

    pub fn region_rect(&self, region: Region) -> Rect {
        let hw = self.half_width();
        let full = (STREET_START, STREET_END);
        let side_rect = |side: Side, a: f64, b: f64| {
            let (x0, x1) = if side.sign() > 0.0 { (a, b) } else { (-b, -a) };
            Rect {
                x0,
                x1,
                z0: full.0,
                z1: full.1,
            }
        };
        match region {
            Region::Lane(i) => {
                let (x0, x1) = self.road.lane_bounds(i);
                Rect {
                    x0,
                    x1,
                    z0: full.0,
                    z1: full.1,
                }
            }
            Region::Parking(side) => side_rect(side, hw - self.road.lane_width().min(2.6), hw),
            Region::Sidewalk(side) => side_rect(side, hw, self.sidewalk_outer()),
            Region::Verge(side) => side_rect(side, self.sidewalk_outer(), self.facade_offset()),
            Region::Road => Rect {
                x0: -hw,
                x1: hw,
                z0: full.0,
                z1: full.1,
            },
            Region::Crosswalk => {
                let zc = self.road.crosswalk.unwrap_or(f64::NAN);
                Rect {
                    x0: -hw,
                    x1: hw,
                    z0: zc - CROSSWALK_DEPTH / 2.0,
                    z1: zc + CROSSWALK_DEPTH / 2.0,
                }
            }
        }
    }

    /// Classes the realized world will contain (before visibility culling).
    pub fn classes_present(&self) -> BTreeSet<ClassId> {
        let mut set = BTreeSet::from([ClassId::Road, ClassId::Sidewalk, ClassId::Terrain, ClassId::Sky]);
        if self.lots.iter().any(|l| l.building.is_some()) {
            set.insert(ClassId::Building);
        }
        for p in &self.placements {
            set.extend(p.classes());
        }
        set
    }

    /// Aligned prototype name for vehicles carried by a rider placement.
    pub fn rider_vehicle(&self, p: &Placement) -> Option<String> {
        match &p.kind {
            PlacementKind::Rider { vehicle, .. } => Some(vehicle.clone()),
            _ => None,
        }
    }
}

/// Scalar parameter slots. Appending new slots keeps existing streams.
#[derive(Clone, Copy)]
#[repr(u32)]
enum Param {
    RoadWidth,
    Lanes,
    RoadMaterial,
    RepairDensity,
    CrackDensity,
    Crosswalk,
    SidewalkWidth,
    CurbHeight,
    SidewalkMaterial,
    Dirt,
    Setback,
    GapProbability,
    Lots,
    SunLongitude,
    SunLatitude,
    CloudCover,
    CloudSeed,
    Ego,
    Counts,
}

/// Placement groups; each instance of a group has its own stream.
#[derive(Clone, Copy)]
#[repr(u32)]
enum Group {
    Poles,
    TrafficLights,
    TrafficSigns,
    Vegetation,
    Buses,
    Trucks,
    Cars,
    Motorcycles,
    Riders,
    Bicycles,
    Pedestrians,
}

fn param(seed: u64, p: Param) -> RngStream {
    RngStream::new(seed, Domain::WorldParameter, p as u32, 0)
}

fn draw(seed: u64, p: Param, i: Interval<f64>) -> f64 {
    param(seed, p).range(i.0, i.1)
}

fn count(seed: u64, slot: u32, i: Interval<u32>) -> u32 {
    RngStream::new(seed, Domain::WorldParameter, Param::Counts as u32, slot).range_inclusive(i.0, i.1)
}

fn pick<T: Clone>(rng: &mut RngStream, items: &[T]) -> T {
    items[rng.index(items.len())].clone()
}

/// Footprint of `proto` placed with `xf`; for trees only the trunk counts.
pub fn footprint_of(proto: &Prototype, xf: &Affine) -> Footprint {
    use super::assets::MaterialSlot;
    let trunk: Vec<_> = proto
        .parts
        .iter()
        .filter(|p| p.slot == MaterialSlot::Bark)
        .collect();
    let local = if trunk.is_empty() {
        proto.bounds()
    } else {
        trunk.iter().fold(Aabb::EMPTY, |b, p| b.union(p.mesh.bounds()))
    };
    Footprint::from_aabb(&Aabb::from_points(local.corners().map(|c| xf.transform_point(c))))
}

/// Square footprint of a procedural pole of radius `r`.
fn pole_footprint(x: f64, z: f64, r: f64) -> Footprint {
    Footprint {
        min: [x - r, z - r],
        max: [x + r, z + r],
    }
}

struct Placer<'a> {
    world: WorldSpec,
    lib: &'a AssetLibrary,
    taken: Vec<Footprint>,
}

/// One candidate produced by a placement rule.
struct Candidate {
    placement: Placement,
    /// Additional footprint (rider's vehicle) merged into the placement's.
    extra: Option<Footprint>,
}

impl<'a> Placer<'a> {
    fn free(&self, f: &Footprint) -> bool {
        self.taken.iter().all(|t| !t.overlaps(f, CLEARANCE))
    }

    /// Runs `rule` up to [`MAX_ATTEMPTS`] times until it yields a
    /// candidate inside its region and clear of earlier footprints.
    fn place<F>(&mut self, group: Group, index: u32, what: &str, mut rule: F) -> Result<(), ProcgenError>
    where
        F: FnMut(&WorldSpec, &AssetLibrary, &mut RngStream) -> Result<Option<Candidate>, ProcgenError>,
    {
        let mut rng = RngStream::new(self.world.seed, Domain::Placement, group as u32, index);
        for _ in 0..MAX_ATTEMPTS {
            let Some(c) = rule(&self.world, self.lib, &mut rng)? else {
                continue;
            };
            let mut fp = c.placement.footprint;
            if let Some(e) = c.extra {
                fp = Footprint {
                    min: [fp.min[0].min(e.min[0]), fp.min[1].min(e.min[1])],
                    max: [fp.max[0].max(e.max[0]), fp.max[1].max(e.max[1])],
                };
            }
            let region = self.world.region_rect(c.placement.region);
            let contained = match c.placement.kind {
                // Vegetation canopies may overhang; only the trunk position is constrained.
                PlacementKind::Vegetation => {
                    let p = c.placement.position;
                    p.x >= region.x0 && p.x <= region.x1 && p.z >= region.z0 && p.z <= region.z1
                }
                _ => fp.inside(&region),
            };
            if contained && self.free(&fp) {
                let mut p = c.placement;
                p.footprint = fp;
                self.taken.push(fp);
                self.world.placements.push(p);
                return Ok(());
            }
        }
        Err(ProcgenError::Infeasible(format!(
            "{what} #{index}: no collision-free position inside its region after {MAX_ATTEMPTS} attempts"
        )))
    }
}

fn vehicle_rule(
    vs: &VehicleScope,
    class: ClassId,
) -> impl FnMut(&WorldSpec, &AssetLibrary, &mut RngStream) -> Result<Option<Candidate>, ProcgenError> + '_ {
    move |w, lib, rng| {
        let name = pick(rng, &vs.types);
        let proto = lib.get(&name)?;
        let b = proto.bounds();
        let half_w = (b.max.x - b.min.x) / 2.0;
        let parked = rng.bernoulli(vs.parked_probability);
        let z = rng.range(DYNAMIC_ZONE.0, DYNAMIC_ZONE.1);
        let color = pick(rng, &vs.colors);
        let (x, yaw, region) = if parked {
            let side = if rng.bernoulli(0.5) { Side::Right } else { Side::Left };
            let x = side.sign() * (w.half_width() - CURB_GAP - half_w - rng.range(0.0, 0.15));
            let yaw = if side == Side::Right { 0.0 } else { PI };
            (x, yaw, Region::Parking(side))
        } else {
            let lane = rng.index(w.road.lanes as usize) as u32;
            let (x0, x1) = w.road.lane_bounds(lane);
            let slack = ((x1 - x0) / 2.0 - half_w - 0.1).max(0.0);
            let x = (x0 + x1) / 2.0 + rng.range(-slack, slack);
            (x, w.road.lane_yaw(lane), Region::Lane(lane))
        };
        let position = Vec3::new(x, 0.0, z);
        let xf = Affine::placement(position, yaw, 1.0);
        Ok(Some(Candidate {
            placement: Placement {
                kind: PlacementKind::Vehicle { class, parked },
                prototype: name,
                position,
                yaw,
                scale: 1.0,
                color,
                secondary_color: color,
                region,
                footprint: footprint_of(proto, &xf),
            },
            extra: None,
        }))
    }
}

/// Samples rule set values from `scope` for `seed`.
pub fn sample_world(scope: &ScenarioScope, seed: u64) -> Result<WorldSpec, ProcgenError> {
    sample_world_with(scope, seed, AssetLibrary::builtin())
}

pub fn sample_world_with(
    scope: &ScenarioScope,
    seed: u64,
    lib: &AssetLibrary,
) -> Result<WorldSpec, ProcgenError> {
    scope.validate()?;
    let rs = &scope.road;
    let width = draw(seed, Param::RoadWidth, rs.width);
    let max_lanes = (width / MIN_LANE_WIDTH + 1e-9).floor() as u32;
    if rs.lanes.min() > max_lanes {
        return Err(ProcgenError::Infeasible(format!(
            "lane width: {} lanes need at least {:.2} m but the road is {width:.2} m wide (minimum lane width {MIN_LANE_WIDTH} m)",
            rs.lanes.min(),
            rs.lanes.min() as f64 * MIN_LANE_WIDTH
        )));
    }
    let lanes = param(seed, Param::Lanes).range_inclusive(rs.lanes.min(), rs.lanes.max().min(max_lanes));
    let crosswalk = {
        let mut r = param(seed, Param::Crosswalk);
        let present = r.bernoulli(rs.crosswalk_probability);
        let z = r.range(14.0, 60.0);
        present.then_some(z)
    };
    let road = RoadSpec {
        width,
        lanes,
        material: pick(&mut param(seed, Param::RoadMaterial), &rs.materials),
        repair_density: draw(seed, Param::RepairDensity, rs.repair_density),
        crack_density: draw(seed, Param::CrackDensity, rs.crack_density),
        crosswalk,
    };
    let ss = &scope.sidewalk;
    let sidewalk = SidewalkSpec {
        width: draw(seed, Param::SidewalkWidth, ss.width),
        curb_height: draw(seed, Param::CurbHeight, ss.curb_height),
        material: pick(&mut param(seed, Param::SidewalkMaterial), &ss.materials),
        dirt: draw(seed, Param::Dirt, ss.dirt),
    };
    let bs = &scope.building;
    let setback = draw(seed, Param::Setback, bs.setback);
    let gap_probability = draw(seed, Param::GapProbability, bs.gap_probability);

    let mut lots = Vec::new();
    for (si, side) in Side::BOTH.into_iter().enumerate() {
        let mut r = RngStream::new(seed, Domain::WorldParameter, Param::Lots as u32, si as u32);
        let mut z = STREET_START;
        loop {
            let w = r.range(bs.width.0, bs.width.1);
            if z + w > STREET_END {
                break;
            }
            let empty = r.bernoulli(gap_probability);
            let building = BuildingSpec {
                height: r.range(bs.height.0, bs.height.1),
                depth: r.range(bs.depth.0, bs.depth.1),
                material: pick(&mut r, &bs.materials),
                tint: [r.range(0.7, 1.0), r.range(0.7, 1.0), r.range(0.7, 1.0)],
                window: WindowSpec {
                    width: r.range(bs.window_width.0, bs.window_width.1),
                    height: r.range(bs.window_height.0, bs.window_height.1),
                    depth: r.range(bs.window_depth.0, bs.window_depth.1),
                },
            };
            lots.push(Lot {
                side,
                z0: z,
                z1: z + w,
                building: (!empty).then_some(building),
            });
            z += w;
        }
    }

    let sc = &scope.sun;
    let sun = SunSky {
        sun_longitude: draw(seed, Param::SunLongitude, sc.longitude),
        sun_latitude: draw(seed, Param::SunLatitude, sc.latitude),
        cloud_cover: draw(seed, Param::CloudCover, sc.cloud_cover),
        cloud_noise_seed: param(seed, Param::CloudSeed).next_u64(),
        ..SunSky::default()
    };

    let cs = &scope.camera;
    let ego = {
        let mut r = param(seed, Param::Ego);
        let first = road.lanes / 2;
        let lane = r.range_inclusive(first, road.lanes - 1);
        let (x0, x1) = road.lane_bounds(lane);
        EgoSpec {
            lane,
            x: (x0 + x1) / 2.0 + r.range(-0.3, 0.3),
            height: r.range(cs.height.0, cs.height.1),
            fov: r.range(cs.fov.0, cs.fov.1),
            pitch: r.range(cs.pitch.0, cs.pitch.1),
            yaw: r.range(cs.yaw.0, cs.yaw.1),
            speed: r.range(cs.speed.0, cs.speed.1),
            shutter: r.range(cs.shutter.0, cs.shutter.1),
            psf_sigma: r.range(cs.psf_sigma.0, cs.psf_sigma.1),
        }
    };

    let world = WorldSpec {
        seed,
        road,
        sidewalk,
        setback,
        gap_probability,
        lots,
        sun,
        ego,
        placements: Vec::new(),
    };
    let mut placer = Placer {
        world,
        lib,
        taken: Vec::new(),
    };
    place_objects(scope, seed, &mut placer)?;
    Ok(placer.world)
}

fn side_of(rng: &mut RngStream) -> Side {
    if rng.bernoulli(0.5) {
        Side::Right
    } else {
        Side::Left
    }
}

/// Position on the sidewalk within `band` meters of the curb.
fn curbside(w: &WorldSpec, rng: &mut RngStream, side: Side, band: (f64, f64), z: (f64, f64)) -> Vec3 {
    let d = rng.range(band.0, band.1.min(w.sidewalk.width - band.0).max(band.0));
    Vec3::new(side.sign() * (w.half_width() + d), w.sidewalk.curb_height, rng.range(z.0, z.1))
}

fn place_objects(scope: &ScenarioScope, seed: u64, placer: &mut Placer) -> Result<(), ProcgenError> {
    let misc = &scope.misc;

    for i in 0..count(seed, 0, misc.poles) {
        placer.place(Group::Poles, i, "pole", |w, _, rng| {
            let side = side_of(rng);
            let p = curbside(w, rng, side, (0.3, 0.6), (-20.0, 140.0));
            let height = rng.range(5.0, 8.0);
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::Pole { height },
                    prototype: String::new(),
                    position: p,
                    yaw: if side == Side::Right { -FRAC_PI_2 } else { FRAC_PI_2 },
                    scale: 1.0,
                    color: [0.35, 0.36, 0.38],
                    secondary_color: [0.35, 0.36, 0.38],
                    region: Region::Sidewalk(side),
                    footprint: pole_footprint(p.x, p.z, 0.15),
                },
                extra: None,
            }))
        })?;
    }

    for i in 0..count(seed, 1, misc.traffic_lights) {
        placer.place(Group::TrafficLights, i, "traffic light", |w, _, rng| {
            let side = side_of(rng);
            let z = match w.road.crosswalk {
                Some(zc) => {
                    let before = rng.bernoulli(0.7);
                    let off = CROSSWALK_DEPTH / 2.0 + rng.range(0.5, 3.0);
                    if before { (zc - off, zc - off) } else { (zc + off, zc + off) }
                }
                None => (12.0, 80.0),
            };
            let p = curbside(w, rng, side, (0.3, 0.7), z);
            let state = pick(rng, &[SignalState::Red, SignalState::Amber, SignalState::Green]);
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::TrafficLight {
                        height: rng.range(2.6, 3.4),
                        state,
                    },
                    prototype: String::new(),
                    position: p,
                    yaw: rng.range(-0.15, 0.15),
                    scale: 1.0,
                    color: [0.04, 0.04, 0.04],
                    secondary_color: [0.04, 0.04, 0.04],
                    region: Region::Sidewalk(side),
                    footprint: pole_footprint(p.x, p.z, 0.25),
                },
                extra: None,
            }))
        })?;
    }

    const SIGN_COLORS: [[f64; 3]; 4] = [
        [0.65, 0.05, 0.04],
        [0.04, 0.15, 0.55],
        [0.75, 0.62, 0.05],
        [0.8, 0.8, 0.78],
    ];
    for i in 0..count(seed, 2, misc.traffic_signs) {
        placer.place(Group::TrafficSigns, i, "traffic sign", |w, _, rng| {
            let side = side_of(rng);
            let p = curbside(w, rng, side, (0.3, 0.8), (8.0, 110.0));
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::TrafficSign {
                        height: rng.range(2.0, 2.8),
                    },
                    prototype: pick(rng, &misc.sign_types),
                    position: p,
                    yaw: rng.range(-0.3, 0.3),
                    scale: rng.range(0.9, 1.2),
                    color: pick(rng, &SIGN_COLORS),
                    secondary_color: [0.45, 0.45, 0.45],
                    region: Region::Sidewalk(side),
                    footprint: pole_footprint(p.x, p.z, 0.2),
                },
                extra: None,
            }))
        })?;
    }

    let veg = &scope.vegetation;
    for i in 0..count(seed, 3, veg.count) {
        placer.place(Group::Vegetation, i, "vegetation", |w, lib, rng| {
            let side = side_of(rng);
            let name = pick(rng, &veg.types);
            let proto = lib.get(&name)?;
            let z = rng.range(-10.0, 140.0);
            let (x, region, y) = if w.setback >= 1.0 && rng.bernoulli(0.7) {
                let d = rng.range(0.5, w.setback - 0.5);
                (side.sign() * (w.sidewalk_outer() + d), Region::Verge(side), 0.0)
            } else {
                let d = rng.range(0.4, 0.8).min(w.sidewalk.width / 2.0);
                (side.sign() * (w.sidewalk_outer() - d), Region::Sidewalk(side), w.sidewalk.curb_height)
            };
            let position = Vec3::new(x, y, z);
            let yaw = rng.range(0.0, 2.0 * PI);
            let scale = rng.range(0.8, 1.25);
            let g = rng.range(0.8, 1.2);
            let xf = Affine::placement(position, yaw, scale);
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::Vegetation,
                    prototype: name,
                    position,
                    yaw,
                    scale,
                    color: [0.07 * g, 0.17 * g, 0.04 * g],
                    secondary_color: [0.16, 0.11, 0.07],
                    region,
                    footprint: footprint_of(proto, &xf),
                },
                extra: None,
            }))
        })?;
    }

    for (group, slot, what, class, vs) in [
        (Group::Buses, 4, "bus", ClassId::Bus, &scope.buses),
        (Group::Trucks, 5, "truck", ClassId::Truck, &scope.trucks),
        (Group::Cars, 6, "car", ClassId::Car, &scope.cars),
        (Group::Motorcycles, 7, "motorcycle", ClassId::Motorcycle, &scope.motorcycles),
    ] {
        for i in 0..count(seed, slot, vs.count) {
            placer.place(group, i, what, vehicle_rule(vs, class))?;
        }
    }

    let rd = &scope.riders;
    for i in 0..count(seed, 8, rd.count) {
        placer.place(Group::Riders, i, "rider", |w, lib, rng| {
            let kind = pick(rng, &rd.vehicles);
            let (vehicle, vehicle_class) = match kind {
                RiderVehicle::Bicycle => (pick(rng, &rd.bicycle_types), ClassId::Bicycle),
                RiderVehicle::Motorcycle => (pick(rng, &rd.motorcycle_types), ClassId::Motorcycle),
            };
            let model = pick(rng, &rd.models);
            let vproto = lib.get(&vehicle)?;
            let rproto = lib.get(&model)?;
            let seat = vproto
                .anchor("seat")
                .ok_or_else(|| ProcgenError::Asset(format!("{vehicle}: missing seat anchor")))?;
            let hip = rproto
                .anchor("hip")
                .ok_or_else(|| ProcgenError::Asset(format!("{model}: missing hip anchor")))?;
            let lane = rng.index(w.road.lanes as usize) as u32;
            let (x0, x1) = w.road.lane_bounds(lane);
            let yaw = w.road.lane_yaw(lane);
            let x = rng.range(x0 + 0.6, x1 - 0.6);
            let z = rng.range(DYNAMIC_ZONE.0, DYNAMIC_ZONE.1);
            let position = Vec3::new(x, 0.0, z);
            let vxf = Affine::placement(position, yaw, 1.0);
            let rxf = Affine::placement(Vec3::ZERO + (seat - hip), 0.0, 1.0).then(&vxf);
            let color = pick(rng, &scope.pedestrians.clothing_colors);
            let skin = pick(rng, &scope.pedestrians.skin_tones);
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::Rider {
                        vehicle,
                        vehicle_class,
                    },
                    prototype: model,
                    position,
                    yaw,
                    scale: 1.0,
                    color,
                    secondary_color: skin,
                    region: Region::Lane(lane),
                    footprint: footprint_of(rproto, &rxf),
                },
                extra: Some(footprint_of(vproto, &vxf)),
            }))
        })?;
    }

    let bikes = &scope.bicycles;
    for i in 0..count(seed, 9, bikes.count) {
        placer.place(Group::Bicycles, i, "bicycle", |w, lib, rng| {
            let name = pick(rng, &bikes.types);
            let proto = lib.get(&name)?;
            let side = side_of(rng);
            let along = rng.bernoulli(0.5);
            let band = if along { (0.5, 0.9) } else { (1.0, 1.2) };
            let mut p = curbside(w, rng, side, band, DYNAMIC_ZONE);
            p.y = w.sidewalk.curb_height;
            let yaw = if along { rng.range(-0.1, 0.1) } else { FRAC_PI_2 + rng.range(-0.2, 0.2) };
            let xf = Affine::placement(p, yaw, 1.0);
            let color = pick(rng, &bikes.colors);
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::Vehicle {
                        class: ClassId::Bicycle,
                        parked: true,
                    },
                    prototype: name,
                    position: p,
                    yaw,
                    scale: 1.0,
                    color,
                    secondary_color: color,
                    region: Region::Sidewalk(side),
                    footprint: footprint_of(proto, &xf),
                },
                extra: None,
            }))
        })?;
    }

    let ped = &scope.pedestrians;
    let rules: Vec<(PedestrianRule, f64)> = ped
        .placement
        .iter()
        .filter(|(r, w)| **w > 0.0 && (**r != PedestrianRule::Crosswalk || placer.world.road.crosswalk.is_some()))
        .map(|(r, w)| (*r, *w))
        .collect();
    let total: f64 = rules.iter().map(|r| r.1).sum();
    for i in 0..count(seed, 10, ped.count) {
        placer.place(Group::Pedestrians, i, "pedestrian", |w, lib, rng| {
            let mut u = rng.uniform() * total;
            let mut rule = PedestrianRule::Sidewalk;
            for (r, wt) in &rules {
                rule = *r;
                if u < *wt {
                    break;
                }
                u -= wt;
            }
            let name = pick(rng, &ped.models);
            let proto = lib.get(&name)?;
            let hw = w.half_width();
            let (position, yaw, region) = match rule {
                PedestrianRule::Sidewalk => {
                    let side = side_of(rng);
                    let d = rng.range(0.4, w.sidewalk.width - 0.4);
                    let p = Vec3::new(
                        side.sign() * (hw + d),
                        w.sidewalk.curb_height,
                        rng.range(DYNAMIC_ZONE.0, DYNAMIC_ZONE.1),
                    );
                    (p, rng.range(0.0, 2.0 * PI), Region::Sidewalk(side))
                }
                PedestrianRule::Crosswalk => {
                    let zc = w.road.crosswalk.expect("crosswalk rule filtered");
                    let p = Vec3::new(
                        rng.range(-hw + 0.4, hw - 0.4),
                        0.0,
                        zc + rng.range(-CROSSWALK_DEPTH / 2.0 + 0.5, CROSSWALK_DEPTH / 2.0 - 0.5),
                    );
                    let dir = if rng.bernoulli(0.5) { FRAC_PI_2 } else { -FRAC_PI_2 };
                    (p, dir + rng.range(-0.2, 0.2), Region::Crosswalk)
                }
                PedestrianRule::Road => {
                    let p = Vec3::new(
                        rng.range(-hw + 0.4, hw - 0.4),
                        0.0,
                        rng.range(DYNAMIC_ZONE.0, DYNAMIC_ZONE.1),
                    );
                    let dir = if rng.bernoulli(0.5) { FRAC_PI_2 } else { -FRAC_PI_2 };
                    (p, dir + rng.range(-0.4, 0.4), Region::Road)
                }
            };
            let scale = rng.range(0.9, 1.1);
            let xf = Affine::placement(position, yaw, scale);
            Ok(Some(Candidate {
                placement: Placement {
                    kind: PlacementKind::Person,
                    prototype: name,
                    position,
                    yaw,
                    scale,
                    color: pick(rng, &ped.clothing_colors),
                    secondary_color: pick(rng, &ped.skin_tones),
                    region,
                    footprint: footprint_of(proto, &xf),
                },
                extra: None,
            }))
        })?;
    }
    Ok(())
}

/// Albedo of the facade material before tinting.
pub fn facade_albedo(m: FacadeMaterial) -> Spectrum {
    match m {
        FacadeMaterial::Plaster => Spectrum::new(0.72, 0.66, 0.56),
        FacadeMaterial::Brick => Spectrum::new(0.45, 0.2, 0.13),
        FacadeMaterial::Concrete => Spectrum::new(0.5, 0.5, 0.48),
        FacadeMaterial::Stone => Spectrum::new(0.6, 0.56, 0.5),
    }
}
