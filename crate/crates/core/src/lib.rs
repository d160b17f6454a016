//! Classical capacity of noiseless channels that carry a finite average
//! number of trapped massive bosons or fermions.
//!
//! The capacity of such a channel is the von Neumann entropy (in bits) of the
//! grand-canonical state fixed by the average particle number and the average
//! energy. This crate builds truncated trap spectra, solves the chemical
//! potential, evaluates the capacities, sweeps them over temperature grids,
//! expands them at high temperature and solves the mean-field BCS problem for
//! weakly attractive fermions.
//!
//! All energies and temperatures are dimensionless (`k_B = 1`); see
//! [`units`] for the unit conventions.

pub mod bcs;
pub mod capacity;
pub mod config;
pub mod error;
pub mod expansion;
pub mod output;
pub mod roots;
pub mod spectrum;
pub mod statistics;
pub mod units;

pub use bcs::{BcsParams, BcsSolution};
pub use capacity::{Inflection, SweepRow, SweepTable};
pub use config::{RawConfig, RunConfig, StatisticsKind};
pub use error::{Error, Result};
pub use expansion::ExpansionReport;
pub use spectrum::{CutoffPolicy, Level, TrapSpec, TrapSpectrum};
pub use statistics::{GasState, Statistics};
