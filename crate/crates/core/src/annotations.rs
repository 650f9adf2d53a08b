//! Class, instance and depth maps from one center ray per pixel at the
//! shutter midpoint. Labels are crisp: no area sampling, motion or PSF.

use crate::render::RenderScene;
use crate::taxonomy::{class_of_instance_code, instance_code, ClassId, VOID_CODE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u32>,
}

/// Meters along the camera ray; 0 where the ray escapes.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Annotations {
    pub label: LabelMap,
    pub instance: InstanceMap,
    pub depth: DepthMap,
}

impl LabelMap {
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[(y * self.width + x) as usize]
    }

    /// Pixel count per class code 0–15.
    pub fn histogram(&self) -> [u64; ClassId::COUNT] {
        let mut h = [0u64; ClassId::COUNT];
        for &c in &self.data {
            if let Some(slot) = h.get_mut(c as usize) {
                *slot += 1;
            }
        }
        h
    }
}

impl InstanceMap {
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.data[(y * self.width + x) as usize]
    }

    pub fn max_code(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

impl DepthMap {
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[(y * self.width + x) as usize]
    }
}

pub fn render_annotations(scene: &RenderScene) -> Annotations {
    let cam = &scene.camera;
    let (w, h) = (cam.width, cam.height);
    let sky = instance_code(ClassId::Sky, 0);
    let rows = crate::exec::map_indexed(h as usize, |y| {
        (0..w)
            .map(|x| match scene.bvh.intersect(&cam.center_ray(x, y as u32)) {
                Some(hit) => {
                    let info = &scene.instances[hit.instance.0 as usize];
                    (info.class.code(), info.code, hit.t as f32)
                }
                None => (ClassId::Sky.code(), sky, 0.0),
            })
            .collect::<Vec<_>>()
    });
    let n = (w * h) as usize;
    let (mut label, mut instance, mut depth) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (l, i, d) in rows.into_iter().flatten() {
        label.push(l);
        instance.push(i);
        depth.push(d);
    }
    Annotations {
        label: LabelMap { width: w, height: h, data: label },
        instance: InstanceMap { width: w, height: h, data: instance },
        depth: DepthMap { width: w, height: h, data: depth },
    }
}

/// First pixel violating a map invariant, as `(x, y, reason)`.
pub fn check_consistency(a: &Annotations) -> Option<(u32, u32, String)> {
    let w = a.label.width;
    for (i, ((&l, &c), &d)) in a.label.data.iter().zip(&a.instance.data).zip(&a.depth.data).enumerate() {
        let (x, y) = (i as u32 % w, i as u32 / w);
        if l == VOID_CODE || ClassId::from_code(l).is_none() {
            return Some((x, y, format!("label {l} is not a class code")));
        }
        if class_of_instance_code(c) != l as u32 {
            return Some((x, y, format!("instance {c} disagrees with label {l}")));
        }
        if c % 1000 != 0 && !ClassId::from_code(l).is_some_and(|k| k.is_countable()) {
            return Some((x, y, format!("stuff class {l} carries instance index {}", c % 1000)));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Some((x, y, format!("depth {d} is not a distance")));
        }
    }
    None
}
