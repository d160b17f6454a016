//! Grand-canonical occupations and the chemical potential.
//!
//! Occupations are per single-particle orbital state: a Bose state holds
//! `1 / (e^{beta(eps - mu)} - 1)` particles and a Fermi state
//! `g / (e^{beta(eps - mu)} + 1)`, where `g` is the spin degeneracy. Sums over
//! a [`TrapSpectrum`] weight every level by its orbital degeneracy once, so
//! the particle count is `N = sum_i g_i n_i`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::roots::{brent, Tolerance};
use crate::spectrum::{TrapSpec, TrapSpectrum};

/// Relative particle-count tolerance used by [`solve_mu`] unless overridden.
pub const DEFAULT_TOL_N_REL: f64 = 1e-9;

/// `zeta(3/2)` as it enters the thermodynamic BEC temperature.
pub const ZETA_3_2: f64 = 2.612;
/// `zeta(3)`, for the harmonic BEC temperature.
pub const ZETA_3: f64 = 1.202_056_903_159_594_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Bose,
    Fermi,
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        })
    }
}

/// Bose occupation at reduced distance `x = beta (eps - mu) > 0`.
#[inline]
pub(crate) fn bose_x(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// Fermi occupation (per spin state) at `x = beta (eps - mu)`.
#[inline]
pub(crate) fn fermi_x(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Mean occupation of one orbital state at energy `energy`.
pub fn occupation(energy: f64, beta: f64, mu: f64, statistics: Statistics, spin: u32) -> Result<f64> {
    let x = beta * (energy - mu);
    match statistics {
        Statistics::Bose => {
            if !(energy > mu) {
                return Err(Error::BoseDomain { energy, mu });
            }
            Ok(bose_x(x))
        }
        Statistics::Fermi => Ok(spin as f64 * fermi_x(x)),
    }
}

/// Total particle number `sum_i g_i n_i` at chemical potential `mu`.
pub fn particle_count(spectrum: &TrapSpectrum, beta: f64, mu: f64, statistics: Statistics, spin: u32) -> Result<f64> {
    match statistics {
        Statistics::Bose => {
            let e0 = spectrum.ground_energy();
            if !(mu < e0) {
                return Err(Error::BoseDomain { energy: e0, mu });
            }
            Ok(bose_count(spectrum, beta, e0 - mu))
        }
        Statistics::Fermi => Ok(fermi_count(spectrum, beta, mu, spin)),
    }
}

/// Bose count parametrized by the gap `delta = eps_min - mu > 0`, which keeps
/// full precision when `mu` sits just below the ground level.
fn bose_count(spectrum: &TrapSpectrum, beta: f64, delta: f64) -> f64 {
    let e0 = spectrum.ground_energy();
    spectrum
        .levels
        .iter()
        .map(|l| l.weight() * bose_x(beta * ((l.energy - e0) + delta)))
        .sum()
}

fn fermi_count(spectrum: &TrapSpectrum, beta: f64, mu: f64, spin: u32) -> f64 {
    fermi_count_shifted(spectrum, beta, MuSplit { reference: 0.0, offset: mu }, spin)
}

/// Chemical potential held as `reference + offset`, with `reference` an exact
/// level energy. At low temperature the count changes by more than the
/// tolerance across one ulp of `mu`; `eps - mu` evaluated as
/// `(eps - reference) - offset` keeps the resolution of the small offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MuSplit {
    pub reference: f64,
    pub offset: f64,
}

impl MuSplit {
    pub fn value(self) -> f64 {
        self.reference + self.offset
    }

    #[inline]
    pub fn xi(self, energy: f64) -> f64 {
        (energy - self.reference) - self.offset
    }

    /// Split `mu` around the level energy closest to it.
    pub fn near(spectrum: &TrapSpectrum, mu: f64) -> Self {
        let reference = spectrum
            .levels
            .iter()
            .map(|l| l.energy)
            .min_by(|a, b| (a - mu).abs().total_cmp(&(b - mu).abs()))
            .unwrap_or(0.0);
        Self {
            reference,
            offset: mu - reference,
        }
    }
}

pub(crate) fn fermi_count_shifted(spectrum: &TrapSpectrum, beta: f64, mu: MuSplit, spin: u32) -> f64 {
    let g = spin as f64;
    spectrum
        .levels
        .iter()
        .map(|l| l.weight() * g * fermi_x(beta * mu.xi(l.energy)))
        .sum()
}

/// A solved grand-canonical state on a given spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub beta: f64,
    pub mu: f64,
    pub particles: f64,
    pub spin: u32,
    pub statistics: Statistics,
    /// Per-state occupation, aligned with the spectrum levels.
    pub occupations: Vec<f64>,
    /// Average energy `sum_i g_i n_i eps_i`.
    pub energy: f64,
}

impl GasState {
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

/// Chemical potential for which the average particle count equals
/// `particles` within `tol_rel * particles`.
pub fn solve_mu(
    spectrum: &TrapSpectrum,
    beta: f64,
    particles: f64,
    statistics: Statistics,
    spin: u32,
    tol_rel: f64,
) -> Result<f64> {
    Ok(match statistics {
        Statistics::Bose => spectrum.ground_energy() - solve_bose_delta(spectrum, beta, particles, tol_rel)?,
        Statistics::Fermi => solve_fermi_mu(spectrum, beta, particles, spin, tol_rel, None)?.value(),
    })
}

fn check_inputs(beta: f64, particles: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Invalid(format!("beta must be positive and finite, got {beta}")));
    }
    if !(particles > 0.0 && particles.is_finite()) {
        return Err(Error::Invalid(format!("N must be positive, got {particles}")));
    }
    Ok(())
}

fn solve_bose_delta(spectrum: &TrapSpectrum, beta: f64, particles: f64, tol_rel: f64) -> Result<f64> {
    check_inputs(beta, particles)?;
    let tol = tol_rel * particles;
    let gap = spectrum
        .levels
        .get(1)
        .map(|l| l.energy - spectrum.ground_energy())
        .unwrap_or(1.0);
    let count = |delta: f64| bose_count(spectrum, beta, delta);

    // lower mu end: grow Lambda until the count falls below N
    let mut hi = gap.max(1.0 / beta);
    while count(hi) >= particles {
        hi *= 4.0;
        if !hi.is_finite() {
            return Err(not_bracketable(particles, beta, 0.0, count(f64::MAX)));
        }
    }
    // upper mu end: shrink delta until the count exceeds N
    let floor = 1e-14 * gap;
    let mut lo = hi;
    while count(lo) <= particles {
        if lo <= floor {
            return Err(not_bracketable(particles, beta, count(hi), count(floor)));
        }
        lo = (lo * 1e-2).max(floor);
    }

    let f = |u: f64| count(u.exp()) - particles;
    let root = brent(
        f,
        lo.ln(),
        hi.ln(),
        Tolerance {
            f_abs: tol,
            x_rel: 0.0,
            x_abs: 1e-15,
            ..Tolerance::default()
        },
    )?;
    if root.fx.abs() > tol {
        return Err(Error::Tolerance {
            residual: root.fx,
            tolerance: tol,
            temperature: 1.0 / beta,
        });
    }
    Ok(root.x.exp())
}

pub(crate) fn solve_fermi_mu(
    spectrum: &TrapSpectrum,
    beta: f64,
    particles: f64,
    spin: u32,
    tol_rel: f64,
    guess: Option<f64>,
) -> Result<MuSplit> {
    check_inputs(beta, particles)?;
    let tol = tol_rel * particles;
    let capacity = spin as f64 * spectrum.total_states();
    if capacity <= particles {
        return Err(not_bracketable(particles, beta, 0.0, capacity));
    }
    let count = |mu: f64| fermi_count(spectrum, beta, mu, spin);
    let e0 = spectrum.ground_energy();
    let width = 1.0 / beta;
    let (mut lo, mut hi) = match guess {
        Some(m) => (m - width, m + width),
        None => (e0 - width, spectrum.cutoff_energy.max(e0) + width),
    };
    let mut step = width.max(1.0);
    while count(lo) >= particles {
        lo -= step;
        step *= 2.0;
        if !lo.is_finite() {
            return Err(not_bracketable(particles, beta, count(lo), capacity));
        }
    }
    let mut step = width.max(1.0);
    while count(hi) <= particles {
        hi += step;
        step *= 2.0;
        if !hi.is_finite() || step > 1e300 {
            return Err(not_bracketable(particles, beta, 0.0, capacity));
        }
    }
    let tolerance = Tolerance {
        f_abs: tol,
        x_rel: 2.0 * f64::EPSILON,
        x_abs: 0.0,
        ..Tolerance::default()
    };
    let root = brent(|mu| count(mu) - particles, lo, hi, tolerance)?;
    if root.fx.abs() <= tol {
        return Ok(MuSplit {
            reference: 0.0,
            offset: root.x,
        });
    }
    // resolve the remaining ulps as an offset from the nearest level
    let split = MuSplit::near(spectrum, root.x);
    let r = split.reference;
    let shifted = |u: f64| fermi_count_shifted(spectrum, beta, MuSplit { reference: r, offset: u }, spin) - particles;
    let root = brent(
        shifted,
        lo - r,
        hi - r,
        Tolerance {
            x_abs: f64::MIN_POSITIVE,
            ..tolerance
        },
    )?;
    if root.fx.abs() > tol {
        return Err(Error::Tolerance {
            residual: root.fx,
            tolerance: tol,
            temperature: 1.0 / beta,
        });
    }
    Ok(MuSplit {
        reference: r,
        offset: root.x,
    })
}

fn not_bracketable(target: f64, beta: f64, min_count: f64, max_count: f64) -> Error {
    Error::NotBracketable {
        target,
        temperature: 1.0 / beta,
        min_count,
        max_count,
    }
}

/// Solves `mu` and fills in occupations and the average energy.
pub fn solve_state(
    spectrum: &TrapSpectrum,
    beta: f64,
    particles: f64,
    statistics: Statistics,
    spin: u32,
    tol_rel: f64,
) -> Result<GasState> {
    let (mu, occupations) = match statistics {
        Statistics::Bose => {
            let delta = solve_bose_delta(spectrum, beta, particles, tol_rel)?;
            let e0 = spectrum.ground_energy();
            let occ = spectrum
                .levels
                .iter()
                .map(|l| bose_x(beta * ((l.energy - e0) + delta)))
                .collect();
            (e0 - delta, occ)
        }
        Statistics::Fermi => {
            let mu = solve_fermi_mu(spectrum, beta, particles, spin, tol_rel, None)?;
            (mu.value(), fermi_occupations(spectrum, beta, mu, spin))
        }
    };
    let mut state = GasState {
        beta,
        mu,
        particles,
        spin,
        statistics,
        occupations,
        energy: 0.0,
    };
    state.energy = average_energy(spectrum, &state);
    Ok(state)
}

pub(crate) fn fermi_occupations(spectrum: &TrapSpectrum, beta: f64, mu: MuSplit, spin: u32) -> Vec<f64> {
    spectrum
        .levels
        .iter()
        .map(|l| spin as f64 * fermi_x(beta * mu.xi(l.energy)))
        .collect()
}

/// `E = sum_i g_i n_i eps_i`.
pub fn average_energy(spectrum: &TrapSpectrum, state: &GasState) -> f64 {
    spectrum
        .levels
        .iter()
        .zip(&state.occupations)
        .map(|(l, n)| l.weight() * n * l.energy)
        .sum()
}

/// Thermodynamic-limit reference temperatures, used to normalize axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalTemperatures {
    /// BEC temperature `T_c`.
    pub bec: f64,
    /// Fermi temperature `T_f`.
    pub fermi: f64,
}

/// `T_c = (2 pi hbar^2 / m)(N / 2.612 V)^{2/3}` and
/// `T_f = (hbar^2 / 2m)(6 pi^2 N / g V)^{2/3}` for boxes, in box units; the
/// isotropic 3D oscillator uses `T_c = hbar omega (N / zeta 3)^{1/3}` and
/// `T_f = hbar omega (6 N / g)^{1/3}`.
pub fn critical_temperatures(trap: &TrapSpec, particles: f64, spin: u32) -> Result<CriticalTemperatures> {
    let g = spin as f64;
    match *trap {
        TrapSpec::Box3dPbc { length } | TrapSpec::Box3dHard { length } => {
            let volume = length.powi(3);
            Ok(CriticalTemperatures {
                bec: (particles / (ZETA_3_2 * volume)).powf(2.0 / 3.0) / PI,
                fermi: (6.0 * PI * PI * particles / (g * volume)).powf(2.0 / 3.0) / (4.0 * PI * PI),
            })
        }
        TrapSpec::HarmonicIso { dim: 3, quantum } => Ok(CriticalTemperatures {
            bec: quantum * (particles / ZETA_3).cbrt(),
            fermi: quantum * (6.0 * particles / g).cbrt(),
        }),
        _ => Err(Error::UnsupportedTrap {
            operation: "critical_temperatures",
            trap: trap.to_string(),
        }),
    }
}
