//! Statistics of the STFT-based synchrosqueezing transform (SST).
//!
//! The library has three layers:
//!
//! * numerical primitives: adaptive quadrature ([`quad`]), the special
//!   functions entering the complex-Gaussian quotient density ([`special`]),
//!   and improper complex Gaussian vectors with their quotient law
//!   ([`gaussian`]);
//! * the transform itself: the Gaussian analysis window and its exact noise
//!   second-order structure ([`window`]), and the discrete STFT /
//!   reassignment / SST pipeline ([`sst`]);
//! * inference: seeded Monte Carlo experiments ([`experiments`]) and the
//!   block-bootstrap oscillation detection test ([`detect`]).
//!
//! All randomized routines take explicit seeds and derive one counter-based
//! stream per replicate, so results are reproducible bit-for-bit regardless
//! of thread count.

pub mod detect;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod quad;
pub mod special;
pub mod sst;
pub mod stats;
pub mod window;

pub use error::{Error, Result};
