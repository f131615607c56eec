//! Special functions and numerical building blocks.

pub mod cutoff;
pub mod gamma;
pub mod primes;
pub mod quad;
pub mod zeta;

pub use cutoff::{cutoff, cutoff_derivative, mellin_cutoff};
pub use gamma::log_gamma;
pub use primes::{factorize, is_prime, primes_in_range, primes_up_to};
pub use quad::{integrate, Quadrature};
pub use zeta::zeta_reference;
