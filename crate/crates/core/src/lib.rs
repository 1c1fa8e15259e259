pub mod annealing;
pub mod bodies;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod sampling;
pub mod zonored;

pub use bodies::{ConvexBody, HPolytope, Polytope, Representation, VPolytope, Zonotope};
pub use error::{Error, Result};
pub use estimate::{volume, BodyChoice, VolumeConfig, VolumeReport};
pub use sampling::WalkMode;
