//! Oseen-Frank elasticity and Ericksen-Leslie hydrodynamics of nematic liquid crystals.
//!
//! The crate is organised bottom up:
//!
//! - [`coefficients`]: elastic and viscous constants and their admissibility checks.
//! - [`fields`]: grids (periodic boxes and slabs), fields and finite-difference operators.
//! - [`energy`], [`ericksen`], [`leslie`]: energy density, elastic operator and boundary
//!   condition, stresses.
//! - [`symbols`]: Fourier symbols, eigenvalue closed forms, ellipticity certificates and
//!   accretivity checks.
//! - [`lopatinskii`]: half-line boundary problems and the Lopatinskii-Shapiro condition.
//! - [`simulator`]: semi-implicit time stepping with FFT solvers from [`spectral`].
//! - [`config`], [`io`], [`cli`]: JSON configuration, snapshots and CSV, command-line tool.
//!
//! Conventions: `(grad d)_ij = d_j d_i`, director fields are unit vectors, and
//! every randomized routine takes an explicit seed (42 by default).

pub mod cli;
pub mod coefficients;
pub mod config;
pub mod energy;
pub mod ericksen;
pub mod error;
pub mod fields;
pub mod io;
pub mod leslie;
pub mod lopatinskii;
pub mod sampling;
pub mod simulator;
pub mod spectral;
pub mod symbols;
