//! The 16-class label set and its display palette.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Label code reserved for "no annotation". The generator never writes it.
pub const VOID_CODE: u8 = 255;

/// Semantic classes, numbered 0–15 in benchmark column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum ClassId {
    Road = 0,
    Sidewalk = 1,
    Building = 2,
    Pole = 3,
    TrafficLight = 4,
    TrafficSign = 5,
    Vegetation = 6,
    Terrain = 7,
    Sky = 8,
    Person = 9,
    Rider = 10,
    Car = 11,
    Truck = 12,
    Bus = 13,
    Motorcycle = 14,
    Bicycle = 15,
}

impl ClassId {
    pub const COUNT: usize = 16;

    pub const ALL: [ClassId; 16] = [
        ClassId::Road,
        ClassId::Sidewalk,
        ClassId::Building,
        ClassId::Pole,
        ClassId::TrafficLight,
        ClassId::TrafficSign,
        ClassId::Vegetation,
        ClassId::Terrain,
        ClassId::Sky,
        ClassId::Person,
        ClassId::Rider,
        ClassId::Car,
        ClassId::Truck,
        ClassId::Bus,
        ClassId::Motorcycle,
        ClassId::Bicycle,
    ];

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<ClassId> {
        ClassId::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Road => "road",
            ClassId::Sidewalk => "sidewalk",
            ClassId::Building => "building",
            ClassId::Pole => "pole",
            ClassId::TrafficLight => "traffic_light",
            ClassId::TrafficSign => "traffic_sign",
            ClassId::Vegetation => "vegetation",
            ClassId::Terrain => "terrain",
            ClassId::Sky => "sky",
            ClassId::Person => "person",
            ClassId::Rider => "rider",
            ClassId::Car => "car",
            ClassId::Truck => "truck",
            ClassId::Bus => "bus",
            ClassId::Motorcycle => "motorcycle",
            ClassId::Bicycle => "bicycle",
        }
    }

    /// Classes whose instances get individual ids in the instance map.
    pub fn is_countable(self) -> bool {
        matches!(
            self,
            ClassId::Person
                | ClassId::Rider
                | ClassId::Car
                | ClassId::Truck
                | ClassId::Bus
                | ClassId::Motorcycle
                | ClassId::Bicycle
                | ClassId::TrafficLight
                | ClassId::TrafficSign
                | ClassId::Pole
        )
    }

    /// Display color, following the common street-scene convention.
    pub fn color(self) -> [u8; 3] {
        match self {
            ClassId::Road => [128, 64, 128],
            ClassId::Sidewalk => [244, 35, 232],
            ClassId::Building => [70, 70, 70],
            ClassId::Pole => [153, 153, 153],
            ClassId::TrafficLight => [250, 170, 30],
            ClassId::TrafficSign => [220, 220, 0],
            ClassId::Vegetation => [107, 142, 35],
            ClassId::Terrain => [152, 251, 152],
            ClassId::Sky => [70, 130, 180],
            ClassId::Person => [220, 20, 60],
            ClassId::Rider => [255, 0, 0],
            ClassId::Car => [0, 0, 142],
            ClassId::Truck => [0, 0, 70],
            ClassId::Bus => [0, 60, 100],
            ClassId::Motorcycle => [0, 0, 230],
            ClassId::Bicycle => [119, 11, 32],
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown class `{s}`"))
    }
}

/// One palette row: label code, name and display color.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub code: u8,
    pub name: String,
    pub color: [u8; 3],
}

/// Palette covering codes 0–15 plus void.
pub fn default_palette() -> Vec<PaletteEntry> {
    let mut p: Vec<PaletteEntry> = ClassId::ALL
        .iter()
        .map(|c| PaletteEntry {
            code: c.code(),
            name: c.name().to_string(),
            color: c.color(),
        })
        .collect();
    p.push(PaletteEntry {
        code: VOID_CODE,
        name: "void".to_string(),
        color: [0, 0, 0],
    });
    p
}

/// Instance-map code: `class * 1000 + index` for countable classes, else `class * 1000`.
#[inline]
pub fn instance_code(class: ClassId, index: u32) -> u32 {
    let base = class.code() as u32 * 1000;
    if class.is_countable() {
        base + index
    } else {
        base
    }
}

/// Class code stored in an instance-map code.
#[inline]
pub fn class_of_instance_code(code: u32) -> u32 {
    code / 1000
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_column_order() {
        for (i, c) in ClassId::ALL.iter().enumerate() {
            assert_eq!(c.code() as usize, i);
            assert_eq!(ClassId::from_code(i as u8), Some(*c));
            assert_eq!(c.name().parse::<ClassId>().unwrap(), *c);
        }
        assert_eq!(ClassId::from_code(16), None);
        assert_eq!(ClassId::from_code(VOID_CODE), None);
    }

    #[test]
    fn palette_covers_all_codes_and_void() {
        let p = default_palette();
        assert_eq!(p.len(), 17);
        assert!(p.iter().any(|e| e.code == VOID_CODE));
    }

    #[test]
    fn instance_codes_decode_to_class() {
        assert_eq!(instance_code(ClassId::Car, 1), 11_001);
        assert_eq!(instance_code(ClassId::Building, 7), 2_000);
        assert_eq!(class_of_instance_code(instance_code(ClassId::Bicycle, 999)), 15);
    }
}
