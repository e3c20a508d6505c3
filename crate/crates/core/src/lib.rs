//! Steady-state spectroscopy of a seven-level rubidium-85 ladder in
//! ultrathin vapor cells.
//!
//! The model couples two ground hyperfine levels, two intermediate
//! levels and three upper levels with a probe and a coupling beam,
//! relaxes them through spontaneous cascade decay, self-broadening and
//! velocity-dependent wall collisions, and averages the resulting
//! steady states over a thermal velocity distribution. The crate
//! provides:
//!
//! - exact angular-momentum algebra for the hyperfine line strengths
//!   ([`angular`]),
//! - cell geometry, wall-collision rates and velocity quadrature
//!   ([`confinement`]),
//! - the ladder Hamiltonian and beam parameters ([`atom`]),
//! - the master-equation generator in two population-bookkeeping
//!   conventions ([`master`]),
//! - steady-state and time-domain solvers ([`solver`]),
//! - velocity-averaged spectra and population diagnostics
//!   ([`observables`]),
//! - a JSON configuration layer with a bundled parameter profile
//!   ([`config`]).
//!
//! All numerics are generic over the real scalar type ([`Scalar`]);
//! the `*F64` aliases fix the production precision.

pub mod angular;
pub mod atom;
pub mod config;
pub mod confinement;
pub mod constants;
pub mod error;
pub mod master;
pub mod observables;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Re-exported so downstream code can name the matrix types that appear
/// in this crate's public API without pinning its own nalgebra version.
pub use nalgebra;

/// Production-precision aliases of the generic core types.
pub type LevelSchemeF64 = atom::LevelScheme<f64>;
pub type FieldConfigF64 = atom::FieldConfig<f64>;
pub type CellConfigF64 = confinement::CellConfig<f64>;
pub type VelocityGridF64 = confinement::VelocityGrid<f64>;
pub type DensityMatrixF64 = master::DensityMatrix<f64>;
pub type RelaxationStructureF64 = master::RelaxationStructure<f64>;
pub type LiouvillianF64 = master::Liouvillian<f64>;
pub type SolverOptionsF64 = solver::SolverOptions<f64>;
pub type SweepConfigF64 = observables::SweepConfig<f64>;
pub type SpectrumF64 = observables::Spectrum<f64>;
pub type PointSignalsF64 = observables::PointSignals<f64>;
pub type PopulationRecordF64 = observables::PopulationRecord<f64>;
