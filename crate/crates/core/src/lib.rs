//! Self-consistent Meissner effect in a cylindrical London superconductor.
//!
//! A condensate of charged bosons confined to a cylinder of radius `R` is
//! placed in an axial field. The induction inside follows from the density
//! through a nonlocal screening equation and the density is the ground state
//! of the radial Hamiltonian in the resulting vector potential. This crate
//! solves both halves, iterates them to self-consistency and extracts the
//! energy curve, critical fields and penetration depth.
//!
//! Lengths are in units of `R`, inductions in units of `hbar / (e R^2)` and
//! energies in units of `hbar^2 / (2 m R^2)`.

pub mod analysis;
pub mod constants;
pub mod eigensolver;
pub mod error;
pub mod field_solver;
pub mod grid;
pub mod self_consistent;
pub mod special_functions;
mod tridiagonal;

pub use error::{Error, Result};
pub use grid::RadialGrid;
