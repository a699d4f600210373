//! Symbolic motivic integration with additive characters.
//!
//! Values live in presented quotients of Grothendieck rings: [`motvalues::MotElem`]
//! for ball volumes and [`motvalues::CElem`] once characters enter. Functions are
//! finite sums of wave packets ([`wavefn::MotFn`]) and every integral, Fourier
//! transform and convolution is computed in closed form on that class.

pub mod error;
pub mod valfield;
pub mod motvalues;
pub mod geometry;
pub mod wavefn;
pub mod integrator;
pub mod report;
pub mod fourier;
pub mod distrib;
pub mod weil;
pub mod newton;
pub mod padic;
pub mod shell;
pub mod corpus;

pub use error::{MfError, MfResult};
