pub mod capacity;
pub mod distance;
pub mod domain;
pub mod error;
pub mod experiments;
mod format;
pub mod geometry;
pub mod hp;
pub mod quasiflat;
pub mod scalar;
pub mod weights;

pub use error::{EchError, Result};
pub use geometry::{inclusion_scale, Ellipsoid, MomentProfile, MomentRegion, ScaleFactor, Vertex};
pub use scalar::Scalar;
pub use weights::{ellipsoid_weights, realize, weight_expansion, WeightMultiset};
