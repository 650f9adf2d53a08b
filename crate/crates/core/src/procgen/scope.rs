//! Scenario scope: the parameter ranges and choice sets worlds are drawn from.
//!
//! Ranges serialize as two-element arrays `[min, max]`. Every section and key
//! is optional in the TOML file; missing entries take the defaults defined
//! here (mirrored in `configs/default_scope.toml`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ProcgenError;

/// Closed interval written as `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval<T>(pub T, pub T);

impl<T: Copy + PartialOrd> Interval<T> {
    pub fn fixed(v: T) -> Self {
        Interval(v, v)
    }

    pub fn min(&self) -> T {
        self.0
    }

    pub fn max(&self) -> T {
        self.1
    }

    pub fn contains(&self, v: T) -> bool {
        self.0 <= v && v <= self.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoadMaterial {
    AsphaltDark,
    AsphaltWorn,
    Concrete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PavementMaterial {
    ConcreteSlab,
    BrickPaver,
    Asphalt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacadeMaterial {
    Plaster,
    Brick,
    Concrete,
    Stone,
}

/// Where a pedestrian may stand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PedestrianRule {
    Sidewalk,
    Crosswalk,
    Road,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiderVehicle {
    Bicycle,
    Motorcycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadScope {
    pub width: Interval<f64>,
    pub lanes: Interval<u32>,
    pub materials: Vec<RoadMaterial>,
    pub repair_density: Interval<f64>,
    pub crack_density: Interval<f64>,
    pub crosswalk_probability: f64,
}

impl Default for RoadScope {
    fn default() -> Self {
        RoadScope {
            width: Interval(7.5, 14.0),
            lanes: Interval(2, 4),
            materials: vec![RoadMaterial::AsphaltDark, RoadMaterial::AsphaltWorn, RoadMaterial::Concrete],
            repair_density: Interval(0.0, 0.6),
            crack_density: Interval(0.0, 0.8),
            crosswalk_probability: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SidewalkScope {
    pub width: Interval<f64>,
    pub curb_height: Interval<f64>,
    pub materials: Vec<PavementMaterial>,
    pub dirt: Interval<f64>,
}

impl Default for SidewalkScope {
    fn default() -> Self {
        SidewalkScope {
            width: Interval(2.5, 5.0),
            curb_height: Interval(0.08, 0.2),
            materials: vec![
                PavementMaterial::ConcreteSlab,
                PavementMaterial::BrickPaver,
                PavementMaterial::Asphalt,
            ],
            dirt: Interval(0.0, 0.7),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildingScope {
    pub height: Interval<f64>,
    /// Facade length along the street.
    pub width: Interval<f64>,
    pub depth: Interval<f64>,
    /// Distance from the sidewalk's outer edge to the facade (terrain strip).
    pub setback: Interval<f64>,
    /// Probability that a lot stays empty.
    pub gap_probability: Interval<f64>,
    pub window_height: Interval<f64>,
    pub window_width: Interval<f64>,
    pub window_depth: Interval<f64>,
    pub materials: Vec<FacadeMaterial>,
}

impl Default for BuildingScope {
    fn default() -> Self {
        BuildingScope {
            height: Interval(6.0, 30.0),
            width: Interval(8.0, 24.0),
            depth: Interval(8.0, 16.0),
            setback: Interval(2.0, 5.0),
            gap_probability: Interval(0.05, 0.25),
            window_height: Interval(1.0, 1.8),
            window_width: Interval(0.8, 1.6),
            window_depth: Interval(0.1, 0.4),
            materials: vec![
                FacadeMaterial::Plaster,
                FacadeMaterial::Brick,
                FacadeMaterial::Concrete,
                FacadeMaterial::Stone,
            ],
        }
    }
}

/// Library-based vehicles of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleScope {
    /// Prototype names from the asset library.
    pub types: Vec<String>,
    pub count: Interval<u32>,
    /// Chance a vehicle is parked at the curb instead of driving in a lane.
    pub parked_probability: f64,
    pub colors: Vec<[f64; 3]>,
}

impl Default for VehicleScope {
    fn default() -> Self {
        VehicleScope {
            types: Vec::new(),
            count: Interval(0, 0),
            parked_probability: 0.0,
            colors: vec![[0.6, 0.6, 0.6]],
        }
    }
}

fn vehicle(types: &[&str], count: (u32, u32), parked: f64, colors: &[[f64; 3]]) -> VehicleScope {
    VehicleScope {
        types: types.iter().map(|s| s.to_string()).collect(),
        count: Interval(count.0, count.1),
        parked_probability: parked,
        colors: colors.to_vec(),
    }
}

const CAR_COLORS: [[f64; 3]; 8] = [
    [0.8, 0.8, 0.8],
    [0.03, 0.03, 0.03],
    [0.45, 0.46, 0.48],
    [0.55, 0.05, 0.04],
    [0.05, 0.12, 0.45],
    [0.08, 0.25, 0.12],
    [0.75, 0.6, 0.1],
    [0.3, 0.18, 0.1],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PedestrianScope {
    pub models: Vec<String>,
    pub count: Interval<u32>,
    /// Relative weights of the placement rules. `crosswalk` is ignored in
    /// worlds without a crosswalk.
    pub placement: BTreeMap<PedestrianRule, f64>,
    pub clothing_colors: Vec<[f64; 3]>,
    pub skin_tones: Vec<[f64; 3]>,
}

const CLOTHING: [[f64; 3]; 6] = [
    [0.05, 0.05, 0.08],
    [0.5, 0.05, 0.05],
    [0.1, 0.2, 0.5],
    [0.6, 0.55, 0.45],
    [0.15, 0.35, 0.15],
    [0.7, 0.7, 0.7],
];

const SKIN: [[f64; 3]; 4] = [
    [0.62, 0.45, 0.36],
    [0.45, 0.3, 0.22],
    [0.25, 0.15, 0.1],
    [0.7, 0.55, 0.45],
];

impl Default for PedestrianScope {
    fn default() -> Self {
        PedestrianScope {
            models: vec!["person_walking".into(), "person_standing".into()],
            count: Interval(2, 12),
            placement: BTreeMap::from([
                (PedestrianRule::Sidewalk, 0.7),
                (PedestrianRule::Crosswalk, 0.2),
                (PedestrianRule::Road, 0.1),
            ]),
            clothing_colors: CLOTHING.to_vec(),
            skin_tones: SKIN.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiderScope {
    pub models: Vec<String>,
    pub count: Interval<u32>,
    pub vehicles: Vec<RiderVehicle>,
    pub bicycle_types: Vec<String>,
    pub motorcycle_types: Vec<String>,
}

impl Default for RiderScope {
    fn default() -> Self {
        RiderScope {
            models: vec!["rider_upright".into(), "rider_crouched".into()],
            count: Interval(1, 3),
            vehicles: vec![RiderVehicle::Bicycle, RiderVehicle::Motorcycle],
            bicycle_types: vec!["bicycle_city".into(), "bicycle_road".into()],
            motorcycle_types: vec!["motorcycle_sport".into(), "motorcycle_scooter".into()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VegetationScope {
    pub types: Vec<String>,
    pub count: Interval<u32>,
}

impl Default for VegetationScope {
    fn default() -> Self {
        VegetationScope {
            types: vec![
                "tree_round".into(),
                "tree_conical".into(),
                "bush_round".into(),
                "bush_low".into(),
            ],
            count: Interval(3, 12),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SunScope {
    pub longitude: Interval<f64>,
    pub latitude: Interval<f64>,
    pub cloud_cover: Interval<f64>,
}

impl Default for SunScope {
    fn default() -> Self {
        SunScope {
            longitude: Interval(0.0, 360.0),
            latitude: Interval(8.0, 70.0),
            cloud_cover: Interval(0.0, 0.9),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiscScope {
    pub poles: Interval<u32>,
    pub traffic_lights: Interval<u32>,
    pub traffic_signs: Interval<u32>,
    pub sign_types: Vec<String>,
}

impl Default for MiscScope {
    fn default() -> Self {
        MiscScope {
            poles: Interval(1, 6),
            traffic_lights: Interval(1, 3),
            traffic_signs: Interval(1, 4),
            sign_types: vec!["sign_round".into(), "sign_triangle".into()],
        }
    }
}

/// Ego camera mounting and optics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraScope {
    pub height: Interval<f64>,
    /// Vertical field of view in degrees.
    pub fov: Interval<f64>,
    /// Pitch in degrees, positive looks up.
    pub pitch: Interval<f64>,
    /// Yaw deviation from the street axis in degrees.
    pub yaw: Interval<f64>,
    /// Ego speed in m/s along the street.
    pub speed: Interval<f64>,
    /// Exposure time in seconds.
    pub shutter: Interval<f64>,
    /// Gaussian PSF width in pixels.
    pub psf_sigma: Interval<f64>,
}

impl Default for CameraScope {
    fn default() -> Self {
        CameraScope {
            height: Interval(1.3, 1.7),
            fov: Interval(45.0, 65.0),
            pitch: Interval(-4.0, 1.0),
            yaw: Interval(-4.0, 4.0),
            speed: Interval(0.0, 14.0),
            shutter: Interval(0.001, 0.012),
            psf_sigma: Interval(0.3, 0.7),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioScope {
    pub road: RoadScope,
    pub sidewalk: SidewalkScope,
    pub building: BuildingScope,
    pub cars: VehicleScope,
    pub trucks: VehicleScope,
    pub buses: VehicleScope,
    pub motorcycles: VehicleScope,
    pub bicycles: VehicleScope,
    pub pedestrians: PedestrianScope,
    pub riders: RiderScope,
    pub vegetation: VegetationScope,
    pub sun: SunScope,
    pub misc: MiscScope,
    pub camera: CameraScope,
}

impl Default for ScenarioScope {
    fn default() -> Self {
        ScenarioScope {
            road: RoadScope::default(),
            sidewalk: SidewalkScope::default(),
            building: BuildingScope::default(),
            cars: vehicle(&["car_sedan", "car_hatchback"], (3, 10), 0.4, &CAR_COLORS),
            trucks: vehicle(&["truck_box", "truck_pickup"], (1, 2), 0.3, &CAR_COLORS[..4]),
            buses: vehicle(&["bus_city", "bus_coach"], (1, 1), 0.0, &[[0.7, 0.1, 0.05], [0.9, 0.85, 0.2], [0.85, 0.85, 0.85]]),
            motorcycles: vehicle(&["motorcycle_sport", "motorcycle_scooter"], (1, 2), 0.5, &CAR_COLORS),
            bicycles: vehicle(&["bicycle_city", "bicycle_road"], (1, 3), 1.0, &CAR_COLORS),
            pedestrians: PedestrianScope::default(),
            riders: RiderScope::default(),
            vegetation: VegetationScope::default(),
            sun: SunScope::default(),
            misc: MiscScope::default(),
            camera: CameraScope::default(),
        }
    }
}

/// Largest count of any countable class, so instance indices stay below 1000.
pub const MAX_COUNT: u32 = 200;

impl ScenarioScope {
    pub fn from_toml(text: &str) -> Result<ScenarioScope, ProcgenError> {
        let scope: ScenarioScope =
            toml::from_str(text).map_err(|e| ProcgenError::InvalidScope(e.to_string()))?;
        scope.validate()?;
        Ok(scope)
    }

    pub fn load(path: &Path) -> Result<ScenarioScope, ProcgenError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProcgenError::InvalidScope(format!("{}: {e}", path.display())))?;
        ScenarioScope::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scope serializes")
    }

    /// A scope with a bare street: no buildings, objects or crosswalk.
    pub fn empty_street() -> ScenarioScope {
        let mut s = ScenarioScope::default();
        s.road.crosswalk_probability = 0.0;
        s.building.gap_probability = Interval(1.0, 1.0);
        for v in [&mut s.cars, &mut s.trucks, &mut s.buses, &mut s.motorcycles, &mut s.bicycles] {
            v.count = Interval(0, 0);
        }
        s.pedestrians.count = Interval(0, 0);
        s.riders.count = Interval(0, 0);
        s.vegetation.count = Interval(0, 0);
        s.misc.poles = Interval(0, 0);
        s.misc.traffic_lights = Interval(0, 0);
        s.misc.traffic_signs = Interval(0, 0);
        s
    }

    pub fn validate(&self) -> Result<(), ProcgenError> {
        let mut v = Validator::default();
        let r = &self.road;
        v.positive("road.width", r.width);
        v.count("road.lanes", r.lanes);
        v.check(r.lanes.min() >= 1, "road.lanes must be at least 1");
        v.non_empty("road.materials", r.materials.len());
        v.unit("road.repair_density", r.repair_density);
        v.unit("road.crack_density", r.crack_density);
        v.probability("road.crosswalk_probability", r.crosswalk_probability);

        let s = &self.sidewalk;
        v.positive("sidewalk.width", s.width);
        v.non_negative("sidewalk.curb_height", s.curb_height);
        v.non_empty("sidewalk.materials", s.materials.len());
        v.unit("sidewalk.dirt", s.dirt);

        let b = &self.building;
        for (name, i) in [
            ("building.height", b.height),
            ("building.width", b.width),
            ("building.depth", b.depth),
            ("building.window_height", b.window_height),
            ("building.window_width", b.window_width),
            ("building.window_depth", b.window_depth),
        ] {
            v.positive(name, i);
        }
        v.non_negative("building.setback", b.setback);
        v.unit("building.gap_probability", b.gap_probability);
        v.non_empty("building.materials", b.materials.len());
        v.check(
            b.window_height.max() <= super::builders::FLOOR_HEIGHT - 0.4,
            "building.window_height must leave 0.4 m of wall per floor",
        );

        for (name, vs) in [
            ("cars", &self.cars),
            ("trucks", &self.trucks),
            ("buses", &self.buses),
            ("motorcycles", &self.motorcycles),
            ("bicycles", &self.bicycles),
        ] {
            v.count(&format!("{name}.count"), vs.count);
            v.probability(&format!("{name}.parked_probability"), vs.parked_probability);
            if vs.count.max() > 0 {
                v.non_empty(&format!("{name}.types"), vs.types.len());
                v.non_empty(&format!("{name}.colors"), vs.colors.len());
            }
            v.colors(&format!("{name}.colors"), &vs.colors);
        }

        let p = &self.pedestrians;
        v.count("pedestrians.count", p.count);
        if p.count.max() > 0 {
            v.non_empty("pedestrians.models", p.models.len());
            v.non_empty("pedestrians.clothing_colors", p.clothing_colors.len());
            v.non_empty("pedestrians.skin_tones", p.skin_tones.len());
            v.check(
                p.placement.values().any(|&w| w > 0.0),
                "pedestrians.placement needs a positive weight",
            );
        }
        v.check(
            p.placement.values().all(|&w| w >= 0.0 && w.is_finite()),
            "pedestrians.placement weights must be non-negative",
        );
        v.colors("pedestrians.clothing_colors", &p.clothing_colors);
        v.colors("pedestrians.skin_tones", &p.skin_tones);

        let rd = &self.riders;
        v.count("riders.count", rd.count);
        if rd.count.max() > 0 {
            v.non_empty("riders.models", rd.models.len());
            v.non_empty("riders.vehicles", rd.vehicles.len());
            if rd.vehicles.contains(&RiderVehicle::Bicycle) {
                v.non_empty("riders.bicycle_types", rd.bicycle_types.len());
            }
            if rd.vehicles.contains(&RiderVehicle::Motorcycle) {
                v.non_empty("riders.motorcycle_types", rd.motorcycle_types.len());
            }
        }

        v.count("vegetation.count", self.vegetation.count);
        if self.vegetation.count.max() > 0 {
            v.non_empty("vegetation.types", self.vegetation.types.len());
        }

        let sun = &self.sun;
        v.ordered("sun.longitude", sun.longitude);
        v.ordered("sun.latitude", sun.latitude);
        v.check(
            sun.latitude.min() >= -90.0 && sun.latitude.max() <= 90.0,
            "sun.latitude must lie in [-90, 90]",
        );
        v.unit("sun.cloud_cover", sun.cloud_cover);

        let m = &self.misc;
        v.count("misc.poles", m.poles);
        v.count("misc.traffic_lights", m.traffic_lights);
        v.count("misc.traffic_signs", m.traffic_signs);
        if m.traffic_signs.max() > 0 {
            v.non_empty("misc.sign_types", m.sign_types.len());
        }

        let c = &self.camera;
        v.positive("camera.height", c.height);
        v.positive("camera.fov", c.fov);
        v.check(c.fov.max() < 180.0, "camera.fov must be below 180 degrees");
        v.ordered("camera.pitch", c.pitch);
        v.ordered("camera.yaw", c.yaw);
        v.non_negative("camera.speed", c.speed);
        v.non_negative("camera.shutter", c.shutter);
        v.non_negative("camera.psf_sigma", c.psf_sigma);

        v.finish()
    }
}

#[derive(Default)]
struct Validator {
    problems: Vec<String>,
}

impl Validator {
    fn check(&mut self, ok: bool, msg: &str) {
        if !ok {
            self.problems.push(msg.to_string());
        }
    }

    fn ordered(&mut self, name: &str, i: Interval<f64>) {
        self.check(
            i.0.is_finite() && i.1.is_finite() && i.0 <= i.1,
            &format!("{name}: min must not exceed max"),
        );
    }

    fn positive(&mut self, name: &str, i: Interval<f64>) {
        self.ordered(name, i);
        self.check(i.0 > 0.0, &format!("{name} must be positive"));
    }

    fn non_negative(&mut self, name: &str, i: Interval<f64>) {
        self.ordered(name, i);
        self.check(i.0 >= 0.0, &format!("{name} must be non-negative"));
    }

    fn unit(&mut self, name: &str, i: Interval<f64>) {
        self.ordered(name, i);
        self.check(i.0 >= 0.0 && i.1 <= 1.0, &format!("{name} must lie in [0, 1]"));
    }

    fn probability(&mut self, name: &str, p: f64) {
        self.check((0.0..=1.0).contains(&p), &format!("{name} must lie in [0, 1]"));
    }

    fn count(&mut self, name: &str, i: Interval<u32>) {
        self.check(i.0 <= i.1, &format!("{name}: min must not exceed max"));
        self.check(i.1 <= MAX_COUNT, &format!("{name} must not exceed {MAX_COUNT}"));
    }

    fn non_empty(&mut self, name: &str, len: usize) {
        self.check(len > 0, &format!("{name} must not be empty"));
    }

    fn colors(&mut self, name: &str, colors: &[[f64; 3]]) {
        self.check(
            colors.iter().flatten().all(|c| (0.0..=1.0).contains(c)),
            &format!("{name} components must lie in [0, 1]"),
        );
    }

    fn finish(self) -> Result<(), ProcgenError> {
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(ProcgenError::InvalidScope(self.problems.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scope_is_valid_and_round_trips() {
        let s = ScenarioScope::default();
        s.validate().unwrap();
        let back = ScenarioScope::from_toml(&s.to_toml()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn shipped_config_matches_defaults() {
        let text = include_str!("../../../../configs/default_scope.toml");
        assert_eq!(ScenarioScope::from_toml(text).unwrap(), ScenarioScope::default());
    }

    #[test]
    fn partial_file_fills_defaults() {
        let s = ScenarioScope::from_toml("[road]\nlanes = [2, 2]\n").unwrap();
        assert_eq!(s.road.lanes, Interval(2, 2));
        assert_eq!(s.road.width, RoadScope::default().width);
        assert_eq!(s.cars, ScenarioScope::default().cars);
    }

    #[test]
    fn inverted_range_is_rejected() {
        let err = ScenarioScope::from_toml("[road]\nwidth = [9.0, 7.0]\n").unwrap_err();
        assert!(err.to_string().contains("road.width"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioScope::from_toml("[road]\nwidht = [7.0, 9.0]\n").is_err());
    }
}
