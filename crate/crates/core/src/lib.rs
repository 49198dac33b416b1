//! Laws of Dirichlet process mean functionals and the GGC subordinators
//! built from them.

pub mod catalog;
pub mod descriptor;
pub mod dist;
pub mod error;
pub mod functionals;
pub mod mean_laws;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod subordinators;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
