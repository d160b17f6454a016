//! Reduced units.
//!
//! Energies, chemical potentials, gaps and temperatures are dimensionless
//! multiples of the active trap's natural energy unit, with `k_B = 1`. For
//! box traps the unit is `eps0 = 2 pi^2 hbar^2 / (m L^2)`, the level spacing
//! prefactor of a periodic box of side `L`; in that unit the periodic-box
//! levels are the integers `nx^2 + ny^2 + nz^2`.
//!
//! Conversion to SI happens only in [`UnitSystem::to_kelvin`].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J / K.
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of a rubidium-87 atom, kg.
pub const RB87_MASS: f64 = 86.909_180_527 * AMU;

/// `hbar^2 / (m L^2)` expressed in `eps0` units.
pub const HBAR2_OVER_ML2: f64 = 1.0 / (2.0 * PI * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// `eps0 = 2 pi^2 hbar^2 / (m L^2)` of a reference box of side `L`.
    BoxPbc,
    /// `hbar omega` of an isotropic oscillator.
    Oscillator,
    /// `hbar = m = 1` with the potential `V = r^gamma`.
    PowerLaw,
}

impl UnitSystem {
    pub fn description(self) -> &'static str {
        match self {
            UnitSystem::BoxPbc => "eps0 = 2 pi^2 hbar^2 / (m L^2), k_B = 1",
            UnitSystem::Oscillator => "hbar omega, k_B = 1",
            UnitSystem::PowerLaw => "hbar = m = 1, V = r^gamma, k_B = 1",
        }
    }

    /// Converts a reduced box-unit temperature to kelvin for particles of
    /// mass `mass_kg` in a reference box of side `length_m`.
    pub fn to_kelvin(reduced: f64, mass_kg: f64, length_m: f64) -> f64 {
        reduced * 2.0 * PI * PI * HBAR * HBAR / (mass_kg * length_m * length_m * K_B)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kelvin_scale_for_rubidium() {
        // one eps0 for Rb-87 in a 1 um box is ~0.11 uK
        let t = UnitSystem::to_kelvin(1.0, RB87_MASS, 1e-6);
        assert!(t > 1.0e-7 && t < 1.2e-7, "{t}");
    }
}
