//! Procedural geometry: road, markings, sidewalks, terrain, buildings and
//! the pole-mounted street furniture.

use super::shapes::MeshBuilder;
use super::world::{
    facade_albedo, BuildingSpec, Lot, RoadSpec, SignalState, Side, WorldSpec, CROSSWALK_DEPTH,
    STREET_END, STREET_START,
};
use super::scope::{PavementMaterial, RoadMaterial};
use crate::geometry::{GeometryError, InstanceId, MaterialId, TriangleMesh};
use crate::lighting::{Material, Spectrum, SurfacePattern};
use crate::math::Vec3;
use crate::rng::mix64;
use crate::taxonomy::ClassId;

pub const FLOOR_HEIGHT: f64 = 3.0;
/// Clear wall left at each end of a facade before the first window column.
pub const WINDOW_MARGIN: f64 = 0.5;
pub const MARKING_WIDTH: f64 = 0.15;
pub const DASH_LENGTH: f64 = 3.0;
pub const DASH_GAP: f64 = 6.0;
/// Distance from the road edge to the center of each solid edge line.
pub const EDGE_LINE_INSET: f64 = 0.3;
pub const MARKING_LIFT: f64 = 0.002;
pub const STRIPE_WIDTH: f64 = 0.5;
/// Terrain plane height; slightly below the road so the two never coincide.
pub const TERRAIN_LEVEL: f64 = -0.02;
/// Road and sidewalk are emitted in chunks of this length so culling can
/// drop the parts far behind the camera.
pub const CHUNK_LENGTH: f64 = 20.0;
/// Gap left between neighboring buildings.
const PARTY_GAP: f64 = 0.05;

/// Geometry that shares one class and one material.
#[derive(Clone, Debug)]
pub struct Piece {
    pub class: ClassId,
    pub material: Material,
    pub mesh: MeshBuilder,
}

/// Rectangle in the plane `x = const` facing `sign·x`.
pub(crate) fn rect_x(b: &mut MeshBuilder, x: f64, sign: f64, y: (f64, f64), z: (f64, f64)) {
    let c = Vec3::new(x, (y.0 + y.1) / 2.0, (z.0 + z.1) / 2.0);
    b.face(c, Vec3::X * sign, Vec3::Z, (z.1 - z.0) / 2.0, (y.1 - y.0) / 2.0);
}

/// Rectangle in the plane `y = const` facing `sign·y`.
pub(crate) fn rect_y(b: &mut MeshBuilder, y: f64, sign: f64, x: (f64, f64), z: (f64, f64)) {
    let c = Vec3::new((x.0 + x.1) / 2.0, y, (z.0 + z.1) / 2.0);
    b.face(c, Vec3::Y * sign, Vec3::X, (x.1 - x.0).abs() / 2.0, (z.1 - z.0) / 2.0);
}

/// Rectangle in the plane `z = const` facing `sign·z`.
pub(crate) fn rect_z(b: &mut MeshBuilder, z: f64, sign: f64, x: (f64, f64), y: (f64, f64)) {
    let c = Vec3::new((x.0 + x.1) / 2.0, (y.0 + y.1) / 2.0, z);
    b.face(c, Vec3::Z * sign, Vec3::X, (x.1 - x.0).abs() / 2.0, (y.1 - y.0) / 2.0);
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn road_material(road: &RoadSpec, seed: u64) -> Material {
    let albedo = match road.material {
        RoadMaterial::AsphaltDark => Spectrum::gray(0.08),
        RoadMaterial::AsphaltWorn => Spectrum::new(0.13, 0.13, 0.125),
        RoadMaterial::Concrete => Spectrum::new(0.3, 0.29, 0.27),
    };
    Material::Lambertian {
        albedo,
        pattern: SurfacePattern::Asphalt {
            crack_density: road.crack_density,
            repair_density: road.repair_density,
            seed: mix64(seed ^ 0x0a5f),
        },
    }
}

pub fn sidewalk_material(world: &WorldSpec) -> Material {
    let albedo = match world.sidewalk.material {
        PavementMaterial::ConcreteSlab => Spectrum::new(0.36, 0.35, 0.33),
        PavementMaterial::BrickPaver => Spectrum::new(0.36, 0.2, 0.15),
        PavementMaterial::Asphalt => Spectrum::gray(0.11),
    };
    Material::Lambertian {
        albedo,
        pattern: SurfacePattern::Pavement {
            dirt: world.sidewalk.dirt,
            seed: mix64(world.seed ^ 0x51de),
        },
    }
}

pub fn marking_material() -> Material {
    Material::lambertian(Spectrum::new(0.75, 0.75, 0.72))
}

pub fn terrain_material() -> Material {
    Material::lambertian(Spectrum::new(0.1, 0.14, 0.06))
}

/// Road surface between `z0` and `z1`.
pub fn road_surface(road: &RoadSpec, z0: f64, z1: f64) -> MeshBuilder {
    let mut b = MeshBuilder::new();
    let hw = road.width / 2.0;
    rect_y(&mut b, 0.0, 1.0, (-hw, hw), (z0, z1));
    b
}

fn crosswalk_range(road: &RoadSpec) -> Option<(f64, f64)> {
    road.crosswalk
        .map(|zc| (zc - CROSSWALK_DEPTH / 2.0, zc + CROSSWALK_DEPTH / 2.0))
}

/// Lane markings whose start lies in `[z0, z1)`: dashed dividers centered at
/// `-W/2 + k·W/L` for `k = 1..L`, solid edge lines at `±(W/2 - 0.3)`, and
/// zebra stripes across the crosswalk. Lines are interrupted at the crosswalk.
pub fn lane_markings(road: &RoadSpec, z0: f64, z1: f64) -> MeshBuilder {
    let mut b = MeshBuilder::new();
    let hw = road.width / 2.0;
    let half = MARKING_WIDTH / 2.0;
    let cw = crosswalk_range(road);
    let clear = |a: f64, e: f64| cw.is_none_or(|(c0, c1)| e <= c0 || a >= c1);
    // Segments on crosswalk boundaries are clipped rather than dropped.
    let clip = |a: f64, e: f64| -> Vec<(f64, f64)> {
        match cw {
            Some((c0, c1)) if !clear(a, e) => {
                let mut out = Vec::new();
                if a < c0 {
                    out.push((a, c0));
                }
                if e > c1 {
                    out.push((c1, e));
                }
                out
            }
            _ => vec![(a, e)],
        }
    };

    for x in road.divider_offsets() {
        let period = DASH_LENGTH + DASH_GAP;
        let first = ((z0 - STREET_START) / period).ceil() as i64;
        let mut k = first;
        loop {
            let a = STREET_START + k as f64 * period;
            if a >= z1 || a >= STREET_END {
                break;
            }
            let e = (a + DASH_LENGTH).min(STREET_END);
            for (s, t) in clip(a, e) {
                rect_y(&mut b, MARKING_LIFT, 1.0, (x - half, x + half), (s, t));
            }
            k += 1;
        }
    }
    let edge = hw - EDGE_LINE_INSET;
    for x in [-edge, edge] {
        for (s, t) in clip(z0, z1) {
            rect_y(&mut b, MARKING_LIFT, 1.0, (x - half, x + half), (s, t));
        }
    }
    if let Some((c0, c1)) = cw {
        if c0 >= z0 && c0 < z1 {
            let mut x = -hw + STRIPE_WIDTH / 2.0;
            while x + STRIPE_WIDTH <= hw + 1e-9 {
                rect_y(&mut b, MARKING_LIFT, 1.0, (x, x + STRIPE_WIDTH), (c0, c1));
                x += 2.0 * STRIPE_WIDTH;
            }
        }
    }
    b
}

/// Sidewalk slab on one side: top, curb face toward the road and outer face.
/// A zero curb height gives a slab flush with the road and no curb face.
pub fn sidewalk_strip(world: &WorldSpec, side: Side, z0: f64, z1: f64) -> MeshBuilder {
    let mut b = MeshBuilder::new();
    let s = side.sign();
    let h = world.sidewalk.curb_height;
    let inner = world.half_width();
    let outer = world.sidewalk_outer();
    rect_y(&mut b, h, 1.0, ordered(s * inner, s * outer), (z0, z1));
    if h > 0.0 {
        rect_x(&mut b, s * inner, -s, (0.0, h), (z0, z1));
    }
    rect_x(&mut b, s * outer, s, (TERRAIN_LEVEL, h), (z0, z1));
    b
}

pub fn terrain() -> MeshBuilder {
    let mut b = MeshBuilder::new();
    rect_y(&mut b, TERRAIN_LEVEL, 1.0, (-600.0, 600.0), (-600.0, 1200.0));
    b
}

/// Closed-form window grid `(columns, rows)` for a facade `width` wide and
/// `height` tall. Columns use gaps equal to the window width and a
/// [`WINDOW_MARGIN`] at each end: `floor((W − 2m + w) / 2w)`. Rows are one
/// per full [`FLOOR_HEIGHT`] storey whose window fits.
pub fn window_grid(width: f64, height: f64, window_width: f64, window_height: f64) -> (usize, usize) {
    let cols = ((width - 2.0 * WINDOW_MARGIN + window_width) / (2.0 * window_width) + 1e-9).floor();
    let rows = if window_height < FLOOR_HEIGHT {
        (height / FLOOR_HEIGHT + 1e-9).floor()
    } else {
        0.0
    };
    (cols.max(0.0) as usize, rows.max(0.0) as usize)
}

pub fn window_count(width: f64, height: f64, window_width: f64, window_height: f64) -> usize {
    let (c, r) = window_grid(width, height, window_width, window_height);
    c * r
}

/// Building parts: facade walls, recessed window glass, and the remaining
/// box faces. Returned as `(facade, glass)`.
pub fn building_parts(world: &WorldSpec, lot: &Lot, spec: &BuildingSpec) -> (MeshBuilder, MeshBuilder) {
    let s = lot.side.sign();
    let xf = s * world.facade_offset();
    let xb = xf + s * spec.depth;
    let z0 = lot.z0 + PARTY_GAP;
    let z1 = lot.z1 - PARTY_GAP;
    let (y0, y1) = (TERRAIN_LEVEL, spec.height);
    let w = &spec.window;
    let mut wall = MeshBuilder::new();
    let mut glass = MeshBuilder::new();

    rect_x(&mut wall, xb, s, (y0, y1), (z0, z1));
    rect_z(&mut wall, z0, -1.0, ordered(xf, xb), (y0, y1));
    rect_z(&mut wall, z1, 1.0, ordered(xf, xb), (y0, y1));
    rect_y(&mut wall, y1, 1.0, ordered(xf, xb), (z0, z1));

    let (cols, rows) = window_grid(z1 - z0, spec.height, w.width, w.height);
    // Breakpoints of the facade grid; odd cells are window openings.
    let mut zs = vec![z0];
    let span = cols as f64 * w.width + cols.saturating_sub(1) as f64 * w.width;
    let start = z0 + ((z1 - z0) - span) / 2.0;
    for c in 0..cols {
        let a = start + 2.0 * c as f64 * w.width;
        zs.push(a);
        zs.push(a + w.width);
    }
    zs.push(z1);
    let mut ys = vec![y0];
    for r in 0..rows {
        let sill = r as f64 * FLOOR_HEIGHT + (FLOOR_HEIGHT - w.height) / 2.0;
        ys.push(sill);
        ys.push(sill + w.height);
    }
    ys.push(y1);

    let xg = xf + s * w.depth;
    for j in 0..ys.len() - 1 {
        for i in 0..zs.len() - 1 {
            let (za, zb) = (zs[i], zs[i + 1]);
            let (ya, yb) = (ys[j], ys[j + 1]);
            if zb - za <= 0.0 || yb - ya <= 0.0 {
                continue;
            }
            if i % 2 == 1 && j % 2 == 1 {
                rect_x(&mut glass, xg, -s, (ya, yb), (za, zb));
                rect_y(&mut wall, ya, 1.0, ordered(xf, xg), (za, zb));
                rect_y(&mut wall, yb, -1.0, ordered(xf, xg), (za, zb));
                rect_z(&mut wall, za, 1.0, ordered(xf, xg), (ya, yb));
                rect_z(&mut wall, zb, -1.0, ordered(xf, xg), (ya, yb));
            } else {
                rect_x(&mut wall, xf, -s, (ya, yb), (za, zb));
            }
        }
    }
    (wall, glass)
}

pub fn facade_material(spec: &BuildingSpec) -> Material {
    Material::lambertian(facade_albedo(spec.material) * Spectrum::from_array(spec.tint))
}

pub fn window_material() -> Material {
    Material::rough_specular(Spectrum::new(0.22, 0.24, 0.26), 0.12)
}

fn combine(parts: impl IntoIterator<Item = MeshBuilder>, class: ClassId) -> Result<TriangleMesh, GeometryError> {
    let mut all = MeshBuilder::new();
    for p in parts {
        all.append(&p);
    }
    all.into_mesh(MaterialId(0), InstanceId(0), class)
}

/// Full-length road with markings as one mesh.
pub fn generate_road(world: &WorldSpec) -> Result<TriangleMesh, GeometryError> {
    combine(
        [
            road_surface(&world.road, STREET_START, STREET_END),
            lane_markings(&world.road, STREET_START, STREET_END),
        ],
        ClassId::Road,
    )
}

/// Both sidewalks, full length, as one mesh.
pub fn generate_sidewalk(world: &WorldSpec) -> Result<TriangleMesh, GeometryError> {
    combine(
        Side::BOTH.map(|s| sidewalk_strip(world, s, STREET_START, STREET_END)),
        ClassId::Sidewalk,
    )
}

/// One building as a single mesh; an empty lot yields an empty mesh.
pub fn generate_building(world: &WorldSpec, lot: &Lot) -> Result<TriangleMesh, GeometryError> {
    match &lot.building {
        Some(spec) => {
            let (wall, glass) = building_parts(world, lot, spec);
            combine([wall, glass], ClassId::Building)
        }
        None => combine([], ClassId::Building),
    }
}

/// Street lamp in local coordinates: mast of `height`, arm toward local `+z`.
pub fn street_lamp(height: f64) -> (MeshBuilder, MeshBuilder) {
    let mut mast = MeshBuilder::new();
    mast.frustum(Vec3::ZERO, 0.09, 0.06, height, 10, true);
    let arm_y = height - 0.15;
    mast.cylinder_between(Vec3::new(0.0, arm_y, 0.0), Vec3::new(0.0, arm_y, 1.5), 0.04, 8);
    let mut head = MeshBuilder::new();
    head.cuboid(Vec3::new(-0.15, arm_y - 0.12, 1.3), Vec3::new(0.15, arm_y + 0.03, 1.9));
    (mast, head)
}

/// Signal pole plus head (housing, and three lamps on its `-z` face).
/// Returns `(pole, housing, [red, amber, green] lamps)`.
pub fn traffic_light(height: f64) -> (MeshBuilder, MeshBuilder, [MeshBuilder; 3]) {
    let mut pole = MeshBuilder::new();
    pole.cylinder(Vec3::ZERO, 0.07, height, 10);
    let mut housing = MeshBuilder::new();
    let (hx, hz) = (0.16, 0.13);
    let zc = -0.07 - hz;
    let y0 = height;
    let y1 = height + 0.95;
    housing.cuboid(Vec3::new(-hx, y0, zc - hz), Vec3::new(hx, y1, zc + hz));
    let face = zc - hz - 0.003;
    let lamps = [0usize, 1, 2].map(|i| {
        let mut m = MeshBuilder::new();
        let y = y1 - 0.17 - i as f64 * 0.305;
        m.disk(Vec3::new(0.0, y, face), -Vec3::Z, 0.1, 12);
        m
    });
    (pole, housing, lamps)
}

pub fn signal_color(state: SignalState) -> usize {
    match state {
        SignalState::Red => 0,
        SignalState::Amber => 1,
        SignalState::Green => 2,
    }
}

/// Emitted radiance of a lit signal lamp.
pub fn signal_emission(lamp: usize) -> Spectrum {
    match lamp {
        0 => Spectrum::new(24.0, 1.5, 0.5),
        1 => Spectrum::new(24.0, 12.0, 0.6),
        _ => Spectrum::new(1.0, 20.0, 9.0),
    }
}

/// Sign post: a thin pole whose top sits at `height`.
pub fn sign_post(height: f64) -> MeshBuilder {
    let mut b = MeshBuilder::new();
    b.cylinder(Vec3::ZERO, 0.035, height + 0.3, 8);
    b
}
