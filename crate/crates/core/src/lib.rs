//! Exact `p`-adic matrix arithmetic for twisted orbital integrals on `GL_2`,
//! the weight factors attached to torus volumes, and the residue at `s = 0`
//! of the resulting coefficient series.

pub mod character;
pub mod error;
pub mod integrator;
pub mod localfield;
pub mod matlattice;
pub mod residue;
pub mod supercuspidal;
pub mod twisted;
pub mod weights;

pub use character::CharacterValue;
pub use error::{Error, Result};
pub use localfield::{make_field, Elem, LocalFieldCtx, ResidueRing, SquareClassSet, Val};
pub use matlattice::{mat_ord, GroupForm, LatticeSpec, Mat};
pub use twisted::{DiscriminantReport, TorusElem};
