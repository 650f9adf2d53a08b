//! Prototype mesh library in the `.itm` indexed-triangle text format.
//!
//! ```text
//! # comment
//! prototype car_sedan
//! class car
//! anchor seat 0 0.9 -0.1
//! part body paint
//! v x y z nx ny nz
//! f i j k
//! ```
//!
//! `v` and `f` lines belong to the most recent `part`; face indices are
//! zero-based within that part. Prototypes are modeled in meters with `+y`
//! up, `+z` forward and the origin on the ground at the footprint center.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::shapes::MeshBuilder;
use super::ProcgenError;
use crate::geometry::Aabb;
use crate::math::Vec3;
use crate::taxonomy::ClassId;

/// Material role a prototype part plays; resolved to a concrete material per
/// placement (paint color, clothing color, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialSlot {
    Paint,
    Glass,
    Rubber,
    Metal,
    Trim,
    Lamp,
    Skin,
    Cloth,
    Hair,
    Foliage,
    Bark,
    SignFace,
    SignBack,
}

impl MaterialSlot {
    pub const ALL: [MaterialSlot; 13] = [
        MaterialSlot::Paint,
        MaterialSlot::Glass,
        MaterialSlot::Rubber,
        MaterialSlot::Metal,
        MaterialSlot::Trim,
        MaterialSlot::Lamp,
        MaterialSlot::Skin,
        MaterialSlot::Cloth,
        MaterialSlot::Hair,
        MaterialSlot::Foliage,
        MaterialSlot::Bark,
        MaterialSlot::SignFace,
        MaterialSlot::SignBack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaterialSlot::Paint => "paint",
            MaterialSlot::Glass => "glass",
            MaterialSlot::Rubber => "rubber",
            MaterialSlot::Metal => "metal",
            MaterialSlot::Trim => "trim",
            MaterialSlot::Lamp => "lamp",
            MaterialSlot::Skin => "skin",
            MaterialSlot::Cloth => "cloth",
            MaterialSlot::Hair => "hair",
            MaterialSlot::Foliage => "foliage",
            MaterialSlot::Bark => "bark",
            MaterialSlot::SignFace => "sign_face",
            MaterialSlot::SignBack => "sign_back",
        }
    }

    pub fn parse(s: &str) -> Option<MaterialSlot> {
        MaterialSlot::ALL.iter().copied().find(|m| m.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub name: String,
    pub slot: MaterialSlot,
    pub mesh: MeshBuilder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prototype {
    pub name: String,
    pub class: ClassId,
    pub parts: Vec<Part>,
    pub anchors: BTreeMap<String, Vec3>,
}

impl Prototype {
    pub fn new(name: &str, class: ClassId) -> Prototype {
        Prototype {
            name: name.to_string(),
            class,
            parts: Vec::new(),
            anchors: BTreeMap::new(),
        }
    }

    /// Appends geometry to the part named `name`, creating it if needed.
    pub fn part_mut(&mut self, name: &str, slot: MaterialSlot) -> &mut MeshBuilder {
        let i = match self.parts.iter().position(|p| p.name == name) {
            Some(i) => i,
            None => {
                self.parts.push(Part {
                    name: name.to_string(),
                    slot,
                    mesh: MeshBuilder::new(),
                });
                self.parts.len() - 1
            }
        };
        &mut self.parts[i].mesh
    }

    pub fn bounds(&self) -> Aabb {
        self.parts
            .iter()
            .fold(Aabb::EMPTY, |b, p| b.union(p.mesh.bounds()))
    }

    pub fn triangle_count(&self) -> usize {
        self.parts.iter().map(|p| p.mesh.triangle_count()).sum()
    }

    pub fn anchor(&self, name: &str) -> Option<Vec3> {
        self.anchors.get(name).copied()
    }

    pub fn to_itm(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "prototype {}", self.name);
        let _ = writeln!(s, "class {}", self.class.name());
        for (name, p) in &self.anchors {
            let _ = writeln!(s, "anchor {name} {} {} {}", fmt(p.x), fmt(p.y), fmt(p.z));
        }
        for part in &self.parts {
            let _ = writeln!(s, "part {} {}", part.name, part.slot.name());
            for (p, n) in part.mesh.positions.iter().zip(&part.mesh.normals) {
                let _ = writeln!(
                    s,
                    "v {} {} {} {} {} {}",
                    fmt(p.x),
                    fmt(p.y),
                    fmt(p.z),
                    fmt(n.x),
                    fmt(n.y),
                    fmt(n.z)
                );
            }
            for t in &part.mesh.indices {
                let _ = writeln!(s, "f {} {} {}", t[0], t[1], t[2]);
            }
        }
        s
    }

    pub fn parse_itm(text: &str) -> Result<Prototype, ProcgenError> {
        let err = |line: usize, msg: &str| ProcgenError::Asset(format!("line {}: {msg}", line + 1));
        let mut name = None;
        let mut class = None;
        let mut anchors = BTreeMap::new();
        let mut parts: Vec<Part> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            let key = tok.next().unwrap_or_default();
            let rest: Vec<&str> = tok.collect();
            let nums = |n: usize| -> Result<Vec<f64>, ProcgenError> {
                if rest.len() != n {
                    return Err(err(ln, &format!("`{key}` expects {n} values")));
                }
                rest.iter()
                    .map(|t| t.parse::<f64>().map_err(|_| err(ln, &format!("bad number `{t}`"))))
                    .collect()
            };
            match key {
                "prototype" => name = Some(rest.join(" ")),
                "class" => {
                    let c = rest.first().ok_or_else(|| err(ln, "missing class"))?;
                    class = Some(c.parse::<ClassId>().map_err(|e| err(ln, &e))?);
                }
                "anchor" => {
                    if rest.len() != 4 {
                        return Err(err(ln, "anchor expects a name and 3 values"));
                    }
                    let v: Result<Vec<f64>, _> = rest[1..].iter().map(|t| t.parse::<f64>()).collect();
                    let v = v.map_err(|_| err(ln, "bad anchor coordinate"))?;
                    anchors.insert(rest[0].to_string(), Vec3::new(v[0], v[1], v[2]));
                }
                "part" => {
                    if rest.len() != 2 {
                        return Err(err(ln, "part expects a name and a material slot"));
                    }
                    let slot = MaterialSlot::parse(rest[1])
                        .ok_or_else(|| err(ln, &format!("unknown material slot `{}`", rest[1])))?;
                    parts.push(Part {
                        name: rest[0].to_string(),
                        slot,
                        mesh: MeshBuilder::new(),
                    });
                }
                "v" => {
                    let v = nums(6)?;
                    let part = parts.last_mut().ok_or_else(|| err(ln, "vertex before any part"))?;
                    part.mesh.positions.push(Vec3::new(v[0], v[1], v[2]));
                    let n = Vec3::new(v[3], v[4], v[5]);
                    let len = n.length();
                    if len.is_nan() || len <= 0.0 {
                        return Err(err(ln, "zero-length normal"));
                    }
                    part.mesh.normals.push(if (len - 1.0).abs() > 1e-9 { n / len } else { n });
                }
                "f" => {
                    if rest.len() != 3 {
                        return Err(err(ln, "face expects 3 indices"));
                    }
                    let part = parts.last_mut().ok_or_else(|| err(ln, "face before any part"))?;
                    let mut idx = [0u32; 3];
                    for (k, t) in rest.iter().enumerate() {
                        idx[k] = t.parse().map_err(|_| err(ln, &format!("bad index `{t}`")))?;
                        if idx[k] as usize >= part.mesh.positions.len() {
                            return Err(err(ln, &format!("index {} out of range", idx[k])));
                        }
                    }
                    part.mesh.indices.push(idx);
                }
                other => return Err(err(ln, &format!("unknown record `{other}`"))),
            }
        }
        let name = name.ok_or_else(|| ProcgenError::Asset("missing `prototype` line".into()))?;
        let class = class.ok_or_else(|| ProcgenError::Asset(format!("{name}: missing `class` line")))?;
        if parts.iter().all(|p| p.mesh.is_empty()) {
            return Err(ProcgenError::Asset(format!("{name}: no triangles")));
        }
        Ok(Prototype {
            name,
            class,
            parts,
            anchors,
        })
    }
}

/// Shortest decimal that round-trips, without a trailing `.0`.
fn fmt(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

macro_rules! builtin_assets {
    ($($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!("../../assets/", $file)))),*]
    };
}

/// Files shipped in `crates/core/assets/`.
pub const BUILTIN_FILES: &[(&str, &str)] = builtin_assets!(
    "car_sedan.itm",
    "car_hatchback.itm",
    "truck_box.itm",
    "truck_pickup.itm",
    "bus_city.itm",
    "bus_coach.itm",
    "motorcycle_sport.itm",
    "motorcycle_scooter.itm",
    "bicycle_city.itm",
    "bicycle_road.itm",
    "person_walking.itm",
    "person_standing.itm",
    "rider_upright.itm",
    "rider_crouched.itm",
    "sign_round.itm",
    "sign_triangle.itm",
    "tree_round.itm",
    "tree_conical.itm",
    "bush_round.itm",
    "bush_low.itm",
);

#[derive(Clone, Debug, Default)]
pub struct AssetLibrary {
    prototypes: BTreeMap<String, Prototype>,
}

impl AssetLibrary {
    pub fn from_prototypes(list: Vec<Prototype>) -> AssetLibrary {
        AssetLibrary {
            prototypes: list.into_iter().map(|p| (p.name.clone(), p)).collect(),
        }
    }

    /// Library parsed from the embedded asset files.
    pub fn builtin() -> &'static AssetLibrary {
        static LIB: std::sync::OnceLock<AssetLibrary> = std::sync::OnceLock::new();
        LIB.get_or_init(|| {
            let list = BUILTIN_FILES
                .iter()
                .map(|(file, text)| {
                    Prototype::parse_itm(text).unwrap_or_else(|e| panic!("built-in asset {file}: {e}"))
                })
                .collect();
            AssetLibrary::from_prototypes(list)
        })
    }

    pub fn get(&self, name: &str) -> Result<&Prototype, ProcgenError> {
        self.prototypes
            .get(name)
            .ok_or_else(|| ProcgenError::Asset(format!("unknown prototype `{name}`")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.prototypes.keys().map(String::as_str)
    }

    pub fn of_class(&self, class: ClassId) -> impl Iterator<Item = &Prototype> {
        self.prototypes.values().filter(move |p| p.class == class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_library_loads_with_two_variants_per_class() {
        let lib = AssetLibrary::builtin();
        for class in [
            ClassId::Car,
            ClassId::Truck,
            ClassId::Bus,
            ClassId::Motorcycle,
            ClassId::Bicycle,
            ClassId::Person,
            ClassId::Rider,
            ClassId::TrafficSign,
            ClassId::Vegetation,
        ] {
            assert!(lib.of_class(class).count() >= 2, "{class}");
        }
        for p in lib.of_class(ClassId::Bicycle).chain(lib.of_class(ClassId::Motorcycle)) {
            assert!(p.anchor("seat").is_some(), "{}", p.name);
        }
        for p in lib.of_class(ClassId::Rider) {
            assert!(p.anchor("hip").is_some(), "{}", p.name);
        }
    }

    #[test]
    fn prototypes_stand_on_the_ground() {
        for p in AssetLibrary::builtin().of_class(ClassId::Car) {
            let b = p.bounds();
            assert!(b.min.y.abs() < 0.05, "{}: min y {}", p.name, b.min.y);
            assert!(b.center().x.abs() < 0.05);
        }
    }

    #[test]
    fn text_format_round_trips() {
        let mut p = Prototype::new("crate", ClassId::Car);
        p.part_mut("body", MaterialSlot::Paint)
            .cuboid(Vec3::new(-1.0, 0.0, -2.0), Vec3::new(1.0, 1.5, 2.0));
        p.anchors.insert("seat".into(), Vec3::new(0.0, 0.75, 0.1));
        let back = Prototype::parse_itm(&p.to_itm()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn malformed_files_report_the_line() {
        let e = Prototype::parse_itm("prototype x\nclass car\npart a paint\nv 0 0 0 0 1 0\nf 0 1 2\n")
            .unwrap_err();
        assert!(e.to_string().contains("line 5"), "{e}");
        let e = Prototype::parse_itm("prototype x\nclass plane\n").unwrap_err();
        assert!(e.to_string().contains("plane"), "{e}");
    }
}
