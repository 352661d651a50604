pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod patch;
pub mod polytope;
pub mod spherical;
pub mod tensor;
pub mod valuations;

pub use error::{MtlError, Result};
pub use patch::{ConeRegion, PatchPiece, PositionRegion, SupportPatch};
pub use polytope::{Face, FaceId, Halfspace, Polytope, Relation};
pub use spherical::{ConeConstraint, QuadratureConfig, SphericalRegion, Weight};
pub use tensor::{Rotation, Subspace, SymTensor};
pub use valuations::{enumerate_basis, BasisDescriptor, BasisKind};
