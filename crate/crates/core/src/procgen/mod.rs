//! Procedural world generation: scope → sampled world → realized scene.

mod assets;
pub mod builders;
mod realize;
mod scope;
mod shapes;
mod world;

pub use assets::{AssetLibrary, MaterialSlot, Part, Prototype, BUILTIN_FILES};
pub use realize::{
    auto_exposure, ego_camera, realize_world, realize_world_with, InstanceInfo, Relevance, SceneGraph,
    REFLECTION_RADIUS,
};
pub use scope::*;
pub use shapes::MeshBuilder;
pub use world::*;

use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum ProcgenError {
    #[error("invalid scope: {0}")]
    InvalidScope(String),
    #[error("infeasible world: {0}")]
    Infeasible(String),
    #[error("asset error: {0}")]
    Asset(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
