//! Exact wall-crossing computations on the Mukai lattice of an elliptic K3
//! surface with a section.

pub mod classify;
pub mod duality;
pub mod error;
pub mod mukai;
pub mod quad;
pub mod slice;
pub mod tower;
pub mod wall;

pub use error::{Error, Result};
pub use mukai::{DivisorClass, MukaiVector, SheafData};
pub use quad::QuadExt;
