//! Hecke-Maass L-functions for SL2(Z): Sarnak equidistribution of Hecke eigenvalues,
//! evaluation of L(s, u) by an approximate functional equation, and finite-Euler-product
//! universality experiments on discs inside the critical strip.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod hecke;
pub mod io;
pub mod lfunc;
pub mod rng;
pub mod sarnak;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
