//! Procedural street-scene generator with a path-traced renderer and
//! pixel-exact annotations.

pub mod annotations;
pub mod eval;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod lighting;
pub mod math;
pub mod noise;
pub mod pipeline;
pub mod rng;
pub mod sampling;
pub mod taxonomy;
pub mod procgen;
pub mod render;
