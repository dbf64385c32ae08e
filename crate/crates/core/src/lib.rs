//! Whitney extension of Hölder jets from finite sets, with numerical checks of
//! the small, large and far vanishing scales.

pub mod cube;
pub mod error;
pub mod extension;
pub mod functions;
pub mod jet;
pub mod kdtree;
pub mod modulus;
pub mod multi_index;
pub mod partition;
pub mod problem;
pub mod profile;
pub mod seminorm;
pub mod symnorm;
pub mod taylor;
pub mod verify;

pub use cube::{CubeCover, CubeRecord, DyadicCube};
pub use error::{Error, Result};
pub use extension::{ExtensionField, FieldDerivatives};
pub use jet::{Jet, PointSet};
pub use modulus::{Modulus, ModulusKind};
pub use multi_index::{Basis, MultiIndex};
pub use profile::{FarForm, Scale, VanishingProfile};
pub use taylor::TaylorValue;
