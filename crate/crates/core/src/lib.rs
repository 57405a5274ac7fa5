//! Bifurcation analysis of doubly periodic internal waves in a stack of
//! immiscible fluid layers, each carrying a helical Beltrami flow.
//!
//! The crate is organised bottom-up:
//!
//! * [`config`] holds the fluid stack, the lattice and the vertical
//!   non-resonance check.
//! * [`trivial`] evaluates the layered helical background flows.
//! * [`modes`] gives the vertical mode functions of each layer.
//! * [`dispersion`] assembles the tridiagonal dispersion matrix and its
//!   derivatives.
//! * [`bifurcation`] locates, validates and continues bifurcation points.
//! * [`flattening`] and [`wavefield`] reconstruct first-order wave fields.
//! * [`lsbif`] is a generic multi-parameter Lyapunov-Schmidt engine.

pub mod bifurcation;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod flattening;
pub mod lsbif;
pub mod modes;
pub mod numeric;
pub mod tridiag;
pub mod trivial;
pub mod wavefield;

pub use config::{Config, DualPoint, FluidStack, Lattice};
pub use error::{Error, Result};
pub use trivial::Tau;
