pub mod clifford;
pub mod convergence;
pub mod dirac;
pub mod error;
pub mod fields;
pub mod linalg;
pub mod polyhedron;
pub mod sl;
pub mod suite;
pub mod tolerances;
pub mod transport;

pub use clifford::{CliffordRep, OmegaMatrix, Parity};
pub use error::{Error, Result};
pub use fields::{FieldSet, FramePoint, GridSpec, Level, Preset};
pub use polyhedron::{HalfSpace, Membership, Polyhedron, ThetaProfile};
