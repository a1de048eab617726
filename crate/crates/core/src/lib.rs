//! Numerical core for the compressible Navier–Stokes–Fourier system and its
//! dissipative measure-valued (DMV) solutions.
//!
//! Modules, bottom up:
//! - [`thermo`]: equations of state, transport coefficients, constitutive laws.
//! - [`field`]: Cartesian grids, discrete fields and differential operators.
//! - [`solver`]: finite-difference NSF solver, manufactured solutions, monitors.
//! - [`dmv`]: discrete Young measures and the weak identities of a DMV solution.
//! - [`relenergy`]: relative energy, coercivity and Gronwall-type stability checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dmv;
pub mod field;
pub mod linalg;
pub mod relenergy;
pub mod solver;
pub mod thermo;

pub(crate) mod num;

pub use linalg::{Tensor, Vector};
