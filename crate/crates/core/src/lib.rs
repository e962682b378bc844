//! Computational objects around the global Holmgren problem for powers of
//! the Laplacian: Almansi decompositions in two and three dimensions,
//! Schwarz functions of conics and rational-map domains, the explicit
//! construction of biharmonic functions flat to order three on a boundary
//! arc, and the matrix factorization of the three-dimensional bilaplacian.

pub mod almansi2d;
pub mod arcflat;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fieldlab;
pub mod polyrat;
pub mod quad;
pub mod schwarz;
pub mod series;
pub mod trilap;

pub use error::{Error, Result};
