//! Regenerates the built-in prototype library under `crates/core/assets/`.
//!
//! ```sh
//! cargo run -p streetsynth --example export_assets
//! ```

use std::path::PathBuf;

use streetsynth::math::Vec3;
use streetsynth::procgen::{MaterialSlot as S, MeshBuilder, Prototype};
use streetsynth::taxonomy::ClassId;

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Wheel with its axle along x.
fn wheel(m: &mut MeshBuilder, x: f64, z: f64, r: f64, width: f64) {
    m.cylinder_between(v(x - width / 2.0, r, z), v(x + width / 2.0, r, z), r, 14);
}

struct CarShape {
    length: f64,
    width: f64,
    sill: f64,
    belt: f64,
    roof: f64,
    cabin: (f64, f64),
    wheel_r: f64,
    axles: (f64, f64),
}

fn car(name: &str, s: CarShape) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Car);
    let (hl, hw) = (s.length / 2.0, s.width / 2.0);
    p.part_mut("body", S::Paint)
        .cuboid(v(-hw, s.sill, -hl), v(hw, s.belt, hl));
    let inset = 0.1;
    p.part_mut("cabin", S::Glass)
        .cuboid(v(-hw + inset, s.belt, s.cabin.0), v(hw - inset, s.roof - 0.05, s.cabin.1));
    p.part_mut("body", S::Paint)
        .cuboid(v(-hw + inset, s.roof - 0.05, s.cabin.0 + 0.1), v(hw - inset, s.roof, s.cabin.1 - 0.1));
    let tyres = p.part_mut("tyres", S::Rubber);
    for z in [s.axles.0, s.axles.1] {
        for x in [-hw + 0.12, hw - 0.12] {
            wheel(tyres, x, z, s.wheel_r, 0.22);
        }
    }
    let lamps = p.part_mut("lamps", S::Lamp);
    for x in [-hw + 0.25, hw - 0.25] {
        lamps.cuboid(v(x - 0.18, s.belt - 0.2, hl), v(x + 0.18, s.belt - 0.08, hl + 0.03));
        lamps.cuboid(v(x - 0.15, s.belt - 0.18, -hl - 0.03), v(x + 0.15, s.belt - 0.08, -hl));
    }
    let trim = p.part_mut("bumpers", S::Trim);
    trim.cuboid(v(-hw, s.sill, hl), v(hw, s.sill + 0.18, hl + 0.08));
    trim.cuboid(v(-hw, s.sill, -hl - 0.08), v(hw, s.sill + 0.18, -hl));
    p
}

fn truck_box() -> Prototype {
    let mut p = Prototype::new("truck_box", ClassId::Truck);
    let hw = 1.2;
    p.part_mut("cab", S::Paint).cuboid(v(-hw, 0.55, 2.1), v(hw, 2.3, 3.75));
    p.part_mut("windscreen", S::Glass).cuboid(v(-hw + 0.1, 1.6, 3.75), v(hw - 0.1, 2.2, 3.8));
    p.part_mut("cargo", S::Metal).cuboid(v(-hw - 0.05, 0.9, -3.75), v(hw + 0.05, 3.6, 1.95));
    p.part_mut("chassis", S::Trim).cuboid(v(-0.8, 0.45, -3.6), v(0.8, 0.9, 3.6));
    let tyres = p.part_mut("tyres", S::Rubber);
    for z in [2.9, -1.6, -2.7] {
        for x in [-hw + 0.2, hw - 0.2] {
            wheel(tyres, x, z, 0.5, 0.35);
        }
    }
    p
}

fn truck_pickup() -> Prototype {
    let mut p = Prototype::new("truck_pickup", ClassId::Truck);
    let hw = 1.0;
    let body = p.part_mut("body", S::Paint);
    body.cuboid(v(-hw, 0.5, -2.65), v(hw, 1.15, 2.65));
    body.cuboid(v(-hw + 0.08, 1.8, -0.3), v(hw - 0.08, 1.88, 1.2));
    // Bed walls.
    body.cuboid(v(-hw, 1.15, -2.65), v(-hw + 0.08, 1.5, -0.4));
    body.cuboid(v(hw - 0.08, 1.15, -2.65), v(hw, 1.5, -0.4));
    body.cuboid(v(-hw, 1.15, -2.65), v(hw, 1.5, -2.57));
    p.part_mut("cabin", S::Glass).cuboid(v(-hw + 0.08, 1.15, -0.3), v(hw - 0.08, 1.8, 1.2));
    let tyres = p.part_mut("tyres", S::Rubber);
    for z in [1.75, -1.75] {
        for x in [-hw + 0.15, hw - 0.15] {
            wheel(tyres, x, z, 0.42, 0.28);
        }
    }
    p
}

fn bus(name: &str, length: f64, height: f64, band: (f64, f64)) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Bus);
    let (hl, hw) = (length / 2.0, 1.27);
    p.part_mut("lower", S::Paint).cuboid(v(-hw, 0.35, -hl), v(hw, band.0, hl));
    p.part_mut("windows", S::Glass).cuboid(v(-hw + 0.02, band.0, -hl + 0.02), v(hw - 0.02, band.1, hl - 0.02));
    p.part_mut("upper", S::Paint).cuboid(v(-hw, band.1, -hl), v(hw, height, hl));
    let tyres = p.part_mut("tyres", S::Rubber);
    for z in [hl - 2.6, -hl + 3.0] {
        for x in [-hw + 0.2, hw - 0.2] {
            wheel(tyres, x, z, 0.5, 0.3);
        }
    }
    p
}

fn motorcycle(name: &str, wheelbase: f64, r: f64, seat: Vec3, fairing: bool) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Motorcycle);
    let hz = wheelbase / 2.0;
    let tyres = p.part_mut("tyres", S::Rubber);
    wheel(tyres, 0.0, hz, r, 0.14);
    wheel(tyres, 0.0, -hz, r, 0.16);
    let body = p.part_mut("body", S::Paint);
    body.cuboid(v(-0.16, r + 0.05, -hz + 0.2), v(0.16, seat.y - 0.1, hz - 0.25));
    if fairing {
        body.cuboid(v(-0.2, r + 0.25, hz - 0.45), v(0.2, seat.y + 0.15, hz - 0.15));
    } else {
        body.cuboid(v(-0.22, r - 0.05, -0.35), v(0.22, r + 0.05, hz - 0.35));
    }
    p.part_mut("seat", S::Trim)
        .cuboid(v(-0.15, seat.y - 0.1, seat.z - 0.3), v(0.15, seat.y, seat.z + 0.3));
    let metal = p.part_mut("forks", S::Metal);
    metal.cylinder_between(v(0.0, r, hz), v(0.0, seat.y + 0.2, hz - 0.3), 0.035, 6);
    metal.cylinder_between(v(-0.35, seat.y + 0.2, hz - 0.3), v(0.35, seat.y + 0.2, hz - 0.3), 0.02, 6);
    p.anchors.insert("seat".into(), seat);
    p
}

fn bicycle(name: &str, r: f64, seat: Vec3, drop_bar: bool) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Bicycle);
    let hz = 0.52;
    let tyres = p.part_mut("tyres", S::Rubber);
    wheel(tyres, 0.0, hz, r, 0.04);
    wheel(tyres, 0.0, -hz, r, 0.04);
    let frame = p.part_mut("frame", S::Paint);
    let crank = v(0.0, r - 0.05, 0.0);
    let head = v(0.0, seat.y - 0.05, hz - 0.12);
    let seat_tube_top = v(0.0, seat.y - 0.1, seat.z);
    for (a, b) in [
        (crank, seat_tube_top),
        (crank, head),
        (seat_tube_top, head),
        (crank, v(0.0, r, -hz)),
        (seat_tube_top, v(0.0, r, -hz)),
        (head, v(0.0, r, hz)),
    ] {
        frame.cylinder_between(a, b, 0.02, 6);
    }
    let metal = p.part_mut("bars", S::Metal);
    let bar_y = if drop_bar { seat.y - 0.02 } else { seat.y + 0.1 };
    metal.cylinder_between(head, v(0.0, bar_y, hz - 0.15), 0.015, 6);
    metal.cylinder_between(v(-0.25, bar_y, hz - 0.15), v(0.25, bar_y, hz - 0.15), 0.015, 6);
    p.part_mut("saddle", S::Trim)
        .cuboid(v(-0.07, seat.y - 0.1, seat.z - 0.12), v(0.07, seat.y - 0.04, seat.z + 0.12));
    p.anchors.insert("seat".into(), seat);
    p
}

/// Limb as a closed cylinder between two joints.
fn limb(m: &mut MeshBuilder, a: Vec3, b: Vec3, r: f64) {
    m.cylinder_between(a, b, r, 8);
}

fn head(p: &mut Prototype, c: Vec3) {
    p.part_mut("head", S::Skin).ellipsoid(c, v(0.1, 0.12, 0.11), 6, 10);
    p.part_mut("hair", S::Hair)
        .ellipsoid(c + v(0.0, 0.04, -0.01), v(0.105, 0.09, 0.115), 5, 10);
}

fn person(name: &str, stride: f64, arm_swing: f64) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Person);
    let hip = 0.92;
    let legs = p.part_mut("legs", S::Cloth);
    for (x, s) in [(-0.1, 1.0), (0.1, -1.0)] {
        limb(legs, v(x, hip, 0.0), v(x, 0.05, stride * s), 0.07);
    }
    let torso = p.part_mut("torso", S::Cloth);
    torso.cuboid(v(-0.19, hip - 0.05, -0.11), v(0.19, 1.45, 0.11));
    let arms = p.part_mut("arms", S::Skin);
    for (x, s) in [(-0.25, -1.0), (0.25, 1.0)] {
        limb(arms, v(x, 1.42, 0.0), v(x * 1.05, 0.85, arm_swing * s), 0.045);
    }
    let shoes = p.part_mut("shoes", S::Trim);
    for (x, s) in [(-0.1, 1.0), (0.1, -1.0)] {
        let z = stride * s;
        shoes.cuboid(v(x - 0.05, 0.0, z - 0.08), v(x + 0.05, 0.07, z + 0.14));
    }
    head(&mut p, v(0.0, 1.6, 0.0));
    p
}

fn rider(name: &str, lean: f64) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Rider);
    // Modeled around the hip joint at the origin height of a saddle.
    let hip = v(0.0, 0.0, 0.0);
    let legs = p.part_mut("legs", S::Cloth);
    for x in [-0.12, 0.12] {
        let knee = v(x, -0.05, 0.38);
        limb(legs, hip + v(x, 0.0, 0.0), knee, 0.07);
        limb(legs, knee, v(x, -0.55, 0.25), 0.06);
    }
    let shoulder = v(0.0, 0.55 * (1.0 - lean * 0.4), 0.45 * lean);
    let torso = p.part_mut("torso", S::Cloth);
    torso.cylinder_between(hip + v(0.0, 0.0, 0.0), shoulder, 0.17, 8);
    let arms = p.part_mut("arms", S::Skin);
    let hands = v(0.0, 0.2 + 0.1 * (1.0 - lean), 0.55 + 0.1 * lean);
    for x in [-0.22, 0.22] {
        limb(arms, shoulder + v(x, 0.0, 0.0), hands + v(x * 1.1, 0.0, 0.0), 0.045);
    }
    head(&mut p, shoulder + v(0.0, 0.2, 0.05 + 0.05 * lean));
    p.anchors.insert("hip".into(), hip);
    // Shift so the lowest point sits on the ground when placed standalone.
    let drop = p.bounds().min.y;
    for part in &mut p.parts {
        for q in &mut part.mesh.positions {
            q.y -= drop;
        }
    }
    p.anchors.insert("hip".into(), v(0.0, -drop, 0.0));
    p
}

fn sign(name: &str, triangle: bool) -> Prototype {
    let mut p = Prototype::new(name, ClassId::TrafficSign);
    // Plate centered at the origin facing -z; mounted to a pole behind it.
    let thickness = 0.02;
    if triangle {
        let r = 0.45;
        let corner = |k: usize, z: f64| {
            let a = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            v(r * a.cos(), r * a.sin(), z)
        };
        let face = p.part_mut("face", S::SignFace);
        let [a, b, c] = [0, 1, 2].map(|k| corner(k, -thickness));
        let n = -Vec3::Z;
        let ia = face.vertex(a, n);
        let ib = face.vertex(b, n);
        let ic = face.vertex(c, n);
        // Seen from -z the corners run clockwise, so reverse them.
        face.triangle(ia, ic, ib);
        let back = p.part_mut("back", S::SignBack);
        let [a2, b2, c2] = [0, 1, 2].map(|k| corner(k, 0.0));
        let ja = back.vertex(a2, Vec3::Z);
        let jb = back.vertex(b2, Vec3::Z);
        let jc = back.vertex(c2, Vec3::Z);
        back.triangle(ja, jb, jc);
        for (k0, k1) in [(0, 1), (1, 2), (2, 0)] {
            back.quad([corner(k0, 0.0), corner(k0, -thickness), corner(k1, -thickness), corner(k1, 0.0)]);
        }
    } else {
        let r = 0.35;
        p.part_mut("back", S::SignBack)
            .cylinder_between(v(0.0, 0.0, -thickness), v(0.0, 0.0, 0.0), r, 16);
        p.part_mut("face", S::SignFace)
            .disk(v(0.0, 0.0, -thickness - 0.002), -Vec3::Z, r * 0.97, 16);
    }
    p.anchors.insert("mount".into(), v(0.0, 0.0, 0.03));
    p
}

fn tree_round() -> Prototype {
    let mut p = Prototype::new("tree_round", ClassId::Vegetation);
    p.part_mut("trunk", S::Bark).frustum(v(0.0, 0.0, 0.0), 0.17, 0.12, 2.6, 8, true);
    let crown = p.part_mut("crown", S::Foliage);
    crown.ellipsoid(v(0.0, 3.7, 0.0), v(1.7, 1.5, 1.7), 7, 12);
    crown.ellipsoid(v(0.6, 4.5, -0.3), v(1.0, 0.9, 1.0), 5, 9);
    p
}

fn tree_conical() -> Prototype {
    let mut p = Prototype::new("tree_conical", ClassId::Vegetation);
    p.part_mut("trunk", S::Bark).frustum(v(0.0, 0.0, 0.0), 0.15, 0.1, 1.5, 8, true);
    let crown = p.part_mut("crown", S::Foliage);
    crown.frustum(v(0.0, 1.0, 0.0), 1.4, 0.0, 3.2, 12, true);
    crown.frustum(v(0.0, 2.8, 0.0), 1.0, 0.0, 2.8, 12, true);
    p
}

fn bush(name: &str, r: Vec3) -> Prototype {
    let mut p = Prototype::new(name, ClassId::Vegetation);
    let crown = p.part_mut("crown", S::Foliage);
    crown.ellipsoid(v(0.0, r.y, 0.0), r, 6, 12);
    crown.ellipsoid(v(r.x * 0.4, r.y * 1.2, r.z * 0.2), r * 0.6, 5, 9);
    p
}

fn library() -> Vec<Prototype> {
    vec![
        car(
            "car_sedan",
            CarShape {
                length: 4.6,
                width: 1.8,
                sill: 0.3,
                belt: 0.95,
                roof: 1.45,
                cabin: (-1.3, 0.9),
                wheel_r: 0.33,
                axles: (1.4, -1.4),
            },
        ),
        car(
            "car_hatchback",
            CarShape {
                length: 4.0,
                width: 1.75,
                sill: 0.3,
                belt: 0.95,
                roof: 1.5,
                cabin: (-1.85, 0.6),
                wheel_r: 0.31,
                axles: (1.25, -1.25),
            },
        ),
        truck_box(),
        truck_pickup(),
        bus("bus_city", 12.0, 3.0, (1.2, 2.5)),
        bus("bus_coach", 12.4, 3.5, (1.7, 3.0)),
        motorcycle("motorcycle_sport", 1.45, 0.31, v(0.0, 0.85, -0.25), true),
        motorcycle("motorcycle_scooter", 1.3, 0.24, v(0.0, 0.78, -0.3), false),
        bicycle("bicycle_city", 0.35, v(0.0, 0.95, -0.25), false),
        bicycle("bicycle_road", 0.34, v(0.0, 1.0, -0.3), true),
        person("person_walking", 0.25, 0.18),
        person("person_standing", 0.06, 0.03),
        rider("rider_upright", 0.2),
        rider("rider_crouched", 0.8),
        sign("sign_round", false),
        sign("sign_triangle", true),
        tree_round(),
        tree_conical(),
        bush("bush_round", v(0.8, 0.6, 0.8)),
        bush("bush_low", v(1.2, 0.45, 0.5)),
    ]
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets");
    std::fs::create_dir_all(&dir)?;
    for p in library() {
        let path = dir.join(format!("{}.itm", p.name));
        let header = format!(
            "# {} ({}), {} triangles. Generated by examples/export_assets.rs\n",
            p.name,
            p.class,
            p.triangle_count()
        );
        std::fs::write(&path, header + &p.to_itm())?;
        println!("{}", path.display());
    }
    Ok(())
}
