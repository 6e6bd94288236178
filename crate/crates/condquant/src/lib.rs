pub mod asymptotics;
pub mod constructions;
pub mod error;
pub mod integrals;
pub mod measure;
pub mod rational;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{CondensationSystem, NuSpec, Preset, RegionKind, SimilarityMap, Word};
pub use rational::Rational;
