//! Mean-field BCS pairing of weakly attractive fermions in the periodic box.
//!
//! Modes with `|eps_k| <= delta_eps`, `eps_k = t_k - mu`, feel a constant
//! attraction `-V0` and share the gap `Delta`; all other modes keep
//! Fermi-Dirac occupations. The pair `(Delta, mu)` solves
//!
//! ```text
//! 1 = V0 sum_shell tanh(beta E_k / 2) / E_k,   E_k = sqrt(eps_k^2 + Delta^2)
//! m sum_k N_k = N
//! ```
//!
//! with `N_k = (1 - (eps_k / E_k) tanh(beta E_k / 2)) / 2`. The multiplicity
//! `m` is 1 (one term per momentum mode) unless spin pairs are counted, when
//! it is 2; it also multiplies the capacity.

use serde::{Deserialize, Serialize};

use crate::capacity::{binary_entropy, detect_on_grid, refine_inflection, SweepRow, SweepTable};
use crate::config::{BcsSettings, RunConfig, StatisticsKind};
use crate::error::{Error, Result};
use crate::roots::{brent, RootError, Tolerance};
use crate::spectrum::TrapSpectrum;
use crate::statistics::{fermi_x, solve_fermi_mu, MuSplit};

/// Gap-equation residual tolerance, relative to `max(Delta, delta_eps)`.
pub const GAP_TOL_REL: f64 = 1e-10;
/// Particle-count residual tolerance, relative to `N`.
pub const COUNT_TOL_REL: f64 = 1e-9;
/// Gaps below this many ulps of `max(|mu|, delta_eps)` are reported as zero.
pub const RESOLUTION_ULPS: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BcsParams {
    pub shell_half_width: f64,
    pub coupling: f64,
    pub particles: f64,
    pub count_spin_pairs: bool,
    /// Kinetic levels `t_k` of the periodic box.
    pub spectrum: TrapSpectrum,
}

impl BcsParams {
    pub fn new(settings: BcsSettings, particles: f64, spectrum: TrapSpectrum) -> Result<Self> {
        let p = Self {
            shell_half_width: settings.shell_half_width,
            coupling: settings.coupling,
            particles,
            count_spin_pairs: settings.count_spin_pairs,
            spectrum,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shell_half_width > 0.0 && self.shell_half_width.is_finite()) {
            return Err(Error::Invalid(format!("delta_eps must be positive, got {}", self.shell_half_width)));
        }
        // V0 = 0 is the noninteracting limit and is accepted
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::Invalid(format!("V0 must be nonnegative, got {}", self.coupling)));
        }
        if !(self.particles > 0.0 && self.particles.is_finite()) {
            return Err(Error::Invalid(format!("N must be positive, got {}", self.particles)));
        }
        Ok(())
    }

    pub fn multiplicity(&self) -> f64 {
        if self.count_spin_pairs {
            2.0
        } else {
            1.0
        }
    }

    fn in_shell(&self, energy: f64, mu: MuSplit) -> bool {
        mu.xi(energy).abs() <= self.shell_half_width
    }
}

/// `N_k` for a mode of kinetic energy `t`. `shell_gap` is the gap the mode
/// sees: `Delta` inside the shell, 0 outside.
pub fn bcs_occupation(t: f64, mu: f64, shell_gap: f64, beta: f64) -> f64 {
    occupation_xi(t - mu, shell_gap, beta)
}

fn occupation_xi(eps: f64, shell_gap: f64, beta: f64) -> f64 {
    if shell_gap == 0.0 {
        return fermi_x(beta * eps);
    }
    if eps == 0.0 {
        return 0.5;
    }
    // 1 - (a/E) tanh(beta E / 2) = (D^2 / (E + a) + 2 a f(beta E)) / E, a = |eps|
    let a = eps.abs();
    let e = a.hypot(shell_gap);
    let small = (shell_gap * shell_gap / (e + a) + 2.0 * a * fermi_x(beta * e)) / (2.0 * e);
    if eps > 0.0 {
        small
    } else {
        1.0 - small
    }
}

/// `tanh(beta E / 2) / E`, with the `E -> 0` limit `beta / 2`.
fn pair_kernel(e: f64, beta: f64) -> f64 {
    if e == 0.0 {
        beta / 2.0
    } else {
        (beta * e / 2.0).tanh() / e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsSolution {
    pub temperature: f64,
    pub gap: f64,
    pub mu: f64,
    /// `mu = mu_reference + mu_offset`, with `mu_reference` a level energy;
    /// `eps_k` is evaluated as `(t_k - mu_reference) - mu_offset`.
    pub mu_reference: f64,
    pub mu_offset: f64,
    /// `N_k` per level, aligned with the spectrum.
    pub occupations: Vec<f64>,
    /// Indices of the levels inside the pairing shell.
    pub shell: Vec<usize>,
    /// Kinetic energy `m sum_k t_k N_k`.
    pub energy: f64,
    pub converged: bool,
    /// `|Delta - V0 sum_shell (Delta / E_k) tanh(beta E_k / 2)|`.
    pub gap_residual: f64,
    /// `m sum_k N_k - N`.
    pub count_residual: f64,
    /// A nontrivial gap exists but lies below floating resolution; `gap` is 0.
    pub below_resolution: bool,
}

impl BcsSolution {
    /// `eps_k = t_k - mu` per level.
    pub fn xi(&self, spectrum: &TrapSpectrum) -> Vec<f64> {
        let mu = MuSplit {
            reference: self.mu_reference,
            offset: self.mu_offset,
        };
        spectrum.levels.iter().map(|l| mu.xi(l.energy)).collect()
    }

    /// `E_k` per level, with `Delta_k = 0` outside the shell.
    pub fn quasiparticle_energies(&self, spectrum: &TrapSpectrum) -> Vec<f64> {
        let mut e: Vec<f64> = self.xi(spectrum).into_iter().map(f64::abs).collect();
        for &i in &self.shell {
            e[i] = e[i].hypot(self.gap);
        }
        e
    }
}

struct Inner {
    gap: f64,
    below_resolution: bool,
    shell: Vec<usize>,
}

/// Largest nonnegative `Delta` solving the gap equation at fixed `mu`.
fn solve_gap(params: &BcsParams, beta: f64, mu: MuSplit) -> Inner {
    let shell: Vec<usize> = params
        .spectrum
        .levels
        .iter()
        .enumerate()
        .filter(|(_, l)| params.in_shell(l.energy, mu))
        .map(|(i, _)| i)
        .collect();
    let weight: f64 = shell.iter().map(|&i| params.spectrum.levels[i].weight()).sum();
    let normal = Inner {
        gap: 0.0,
        below_resolution: false,
        shell: shell.clone(),
    };
    if shell.is_empty() || params.coupling == 0.0 {
        return normal;
    }
    let eps: Vec<(f64, f64)> = shell
        .iter()
        .map(|&i| {
            let l = &params.spectrum.levels[i];
            (mu.xi(l.energy), l.weight())
        })
        .collect();
    // 1 - V0 sum g phi(E) increases with Delta; a root exists iff it is
    // negative at 0, and it lies below V0 sum g since phi(E) <= 1 / E
    let f = |d: f64| 1.0 - params.coupling * eps.iter().map(|&(x, g)| g * pair_kernel(x.hypot(d), beta)).sum::<f64>();
    if f(0.0) >= 0.0 {
        return normal;
    }
    let hi = params.coupling * weight;
    // at beta = infinity a mode on the Fermi surface makes f(0) = -inf
    let lo = if f(0.0).is_finite() { 0.0 } else { f64::MIN_POSITIVE };
    let root = match brent(f, lo, hi, Tolerance::default()) {
        Ok(r) => r.x,
        Err(RootError::IterationLimit { a, b }) => 0.5 * (a + b),
        Err(_) => hi,
    };
    let floor = RESOLUTION_ULPS * f64::EPSILON * mu.value().abs().max(params.shell_half_width);
    if root < floor {
        Inner {
            gap: 0.0,
            below_resolution: true,
            shell,
        }
    } else {
        Inner {
            gap: root,
            below_resolution: false,
            shell,
        }
    }
}

fn occupations(params: &BcsParams, beta: f64, mu: MuSplit, inner: &Inner) -> Vec<f64> {
    params
        .spectrum
        .levels
        .iter()
        .map(|l| {
            let d = if params.in_shell(l.energy, mu) { inner.gap } else { 0.0 };
            occupation_xi(mu.xi(l.energy), d, beta)
        })
        .collect()
}

fn count(params: &BcsParams, occ: &[f64]) -> f64 {
    params.multiplicity()
        * params
            .spectrum
            .levels
            .iter()
            .zip(occ)
            .map(|(l, n)| l.weight() * n)
            .sum::<f64>()
}

fn gap_residual(params: &BcsParams, beta: f64, mu: MuSplit, inner: &Inner) -> f64 {
    if inner.gap == 0.0 {
        return 0.0;
    }
    let s: f64 = inner
        .shell
        .iter()
        .map(|&i| {
            let l = &params.spectrum.levels[i];
            l.weight() * pair_kernel(mu.xi(l.energy).hypot(inner.gap), beta)
        })
        .sum();
    (inner.gap - params.coupling * inner.gap * s).abs()
}

/// Self-consistent `(Delta, mu)` at temperature `t`.
pub fn solve_gap_and_mu(params: &BcsParams, t: f64) -> Result<BcsSolution> {
    solve_from(params, t, None)
}

/// Same as [`solve_gap_and_mu`], with the `mu` search started at `guess`.
pub fn solve_from(params: &BcsParams, t: f64, guess: Option<f64>) -> Result<BcsSolution> {
    params.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Invalid(format!("temperature must be positive, got {t}")));
    }
    let beta = 1.0 / t;
    let n = params.particles;
    let m = params.multiplicity();
    let tol = COUNT_TOL_REL * n;
    let seed = match guess {
        Some(g) => MuSplit::near(&params.spectrum, g),
        None => {
            let free = solve_fermi_mu(&params.spectrum, beta, n / m, 1, COUNT_TOL_REL, None)?;
            MuSplit::near(&params.spectrum, free.value())
        }
    };
    let reference = seed.reference;
    let split = |u: f64| MuSplit { reference, offset: u };
    let seed = seed.offset;
    let excess = |u: f64| {
        let mu = split(u);
        let inner = solve_gap(params, beta, mu);
        count(params, &occupations(params, beta, mu, &inner)) - n
    };

    let mut width = t.max(params.shell_half_width * 1e-6);
    let (mut lo, mut hi) = (seed - width, seed + width);
    while excess(lo) >= 0.0 {
        lo -= width;
        width *= 2.0;
        if !lo.is_finite() {
            return Err(Error::NotBracketable {
                target: n,
                temperature: t,
                min_count: excess(lo) + n,
                max_count: f64::INFINITY,
            });
        }
    }
    let mut width = t.max(params.shell_half_width * 1e-6);
    let capacity = m * params.spectrum.total_states();
    while excess(hi) <= 0.0 {
        hi += width;
        width *= 2.0;
        if !hi.is_finite() || width > 1e300 {
            return Err(Error::NotBracketable {
                target: n,
                temperature: t,
                min_count: 0.0,
                max_count: capacity,
            });
        }
    }
    let mu = match brent(
        excess,
        lo,
        hi,
        Tolerance {
            f_abs: tol,
            x_rel: 2.0 * f64::EPSILON,
            x_abs: f64::MIN_POSITIVE,
            ..Tolerance::default()
        },
    ) {
        Ok(r) => split(r.x),
        Err(RootError::IterationLimit { a, b }) => split(0.5 * (a + b)),
        Err(e) => return Err(e.into()),
    };

    let inner = solve_gap(params, beta, mu);
    let occ = occupations(params, beta, mu, &inner);
    let count_residual = count(params, &occ) - n;
    let gap_residual = gap_residual(params, beta, mu, &inner);
    let energy = m * params
        .spectrum
        .levels
        .iter()
        .zip(&occ)
        .map(|(l, x)| l.weight() * x * l.energy)
        .sum::<f64>();
    let converged = count_residual.abs() <= tol
        && gap_residual <= GAP_TOL_REL * inner.gap.max(params.shell_half_width);
    Ok(BcsSolution {
        temperature: t,
        gap: inner.gap,
        mu: mu.value(),
        mu_reference: mu.reference,
        mu_offset: mu.offset,
        occupations: occ,
        shell: inner.shell,
        energy,
        converged,
        gap_residual,
        count_residual,
        below_resolution: inner.below_resolution,
    })
}

/// `m sum_k g_k H2(N_k)`, in bits.
pub fn capacity_bcs(params: &BcsParams, solution: &BcsSolution) -> f64 {
    params.multiplicity()
        * params
            .spectrum
            .levels
            .iter()
            .zip(&solution.occupations)
            .map(|(l, &x)| l.weight() * binary_entropy(x))
            .sum::<f64>()
}

/// Zero-temperature gap at the given `mu`, from `1 = V0 sum_shell 1 / E_k`.
pub fn zero_temperature_gap(params: &BcsParams, mu: f64) -> f64 {
    solve_gap(params, f64::INFINITY, MuSplit::near(&params.spectrum, mu)).gap
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsSweep {
    pub table: SweepTable,
    /// One entry per grid temperature; `None` where the solve failed.
    pub solutions: Vec<Option<BcsSolution>>,
    /// Failure message per failed row.
    pub failures: Vec<(f64, String)>,
    /// `beta -> infinity` gap at the noninteracting `mu` of the coldest row.
    pub zero_temperature_gap: f64,
    /// First grid temperature where the gap is zero after being positive.
    pub gap_vanishes_at: Option<f64>,
}

/// Solves every grid temperature from coldest to hottest, each seeded with
/// the previous `mu`. Failed rows are kept with `converged = false` and NaN
/// values, and are left out of the curvature analysis.
pub fn bcs_sweep(params: &BcsParams, temperatures: &[f64], normalizer: f64) -> Result<BcsSweep> {
    params.validate()?;
    let m = params.multiplicity();
    let zero_temperature_gap = match temperatures.first() {
        Some(&t0) => {
            let mu0 = solve_fermi_mu(&params.spectrum, 1.0 / t0, params.particles / m, 1, COUNT_TOL_REL, None)?;
            zero_temperature_gap(params, mu0.value())
        }
        None => 0.0,
    };
    let mut guess = None;
    let mut rows = Vec::with_capacity(temperatures.len());
    let mut solutions = Vec::with_capacity(temperatures.len());
    let mut failures = Vec::new();
    for &t in temperatures {
        match solve_from(params, t, guess) {
            Ok(sol) => {
                guess = Some(sol.mu);
                rows.push(SweepRow {
                    temperature: t,
                    normalized: t / normalizer,
                    mu: sol.mu,
                    energy: sol.energy,
                    capacity: capacity_bcs(params, &sol),
                    gap: Some(sol.gap),
                    converged: sol.converged,
                });
                solutions.push(Some(sol));
            }
            Err(e) => {
                failures.push((t, e.to_string()));
                rows.push(SweepRow {
                    temperature: t,
                    normalized: t / normalizer,
                    mu: f64::NAN,
                    energy: f64::NAN,
                    capacity: f64::NAN,
                    gap: None,
                    converged: false,
                });
                solutions.push(None);
            }
        }
    }

    let mut seen_gap = false;
    let mut gap_vanishes_at = None;
    for r in &rows {
        match r.gap {
            Some(g) if g > 0.0 => seen_gap = true,
            Some(_) if seen_gap => {
                gap_vanishes_at = Some(r.temperature);
                break;
            }
            _ => {}
        }
    }

    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.capacity.is_finite()).collect();
    let t: Vec<f64> = good.iter().map(|r| r.temperature).collect();
    let c: Vec<f64> = good.iter().map(|r| r.capacity).collect();
    let inflection = match detect_on_grid(&t, &c) {
        Some(coarse) => Some(refine_inflection(&coarse, &t, |x| {
            solve_gap_and_mu(params, x).map(|s| capacity_bcs(params, &s))
        })?),
        None => None,
    };
    Ok(BcsSweep {
        table: SweepTable {
            statistics: StatisticsKind::Bcs,
            particles: params.particles,
            normalizer,
            rows,
            inflection,
        },
        solutions,
        failures,
        zero_temperature_gap,
        gap_vanishes_at,
    })
}

/// Parameters for a validated BCS configuration.
pub fn bcs_params(config: &RunConfig) -> Result<BcsParams> {
    let settings = config
        .bcs
        .ok_or_else(|| Error::Invalid("bcs statistics requires delta_eps and v0".into()))?;
    let spectrum = crate::capacity::spectrum_for(config)?;
    BcsParams::new(settings, config.particles, spectrum)
}

pub fn bcs_sweep_full(config: &RunConfig) -> Result<BcsSweep> {
    let params = bcs_params(config)?;
    let normalizer = config.normalizer().unwrap_or(1.0);
    bcs_sweep(&params, &config.temperatures, normalizer)
}

/// Sweep table of a BCS configuration.
pub fn bcs_sweep_config(config: &RunConfig) -> Result<SweepTable> {
    Ok(bcs_sweep_full(config)?.table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::capacity_fermi;
    use crate::spectrum::{build_spectrum, CutoffPolicy, TrapSpec};
    use crate::statistics::{solve_state, Statistics};
    use crate::units::HBAR2_OVER_ML2;

    fn params(v0: f64) -> BcsParams {
        let spectrum = build_spectrum(&TrapSpec::box_pbc(), &CutoffPolicy::Fixed { energy: 80.0 }, 100.0).unwrap();
        BcsParams {
            shell_half_width: HBAR2_OVER_ML2,
            coupling: v0,
            particles: 100.0,
            count_spin_pairs: false,
            spectrum,
        }
    }

    #[test]
    fn zero_gap_is_fermi_dirac() {
        for &(t, mu, beta) in &[(3.0, 2.0, 1.7), (1.0, 2.0, 40.0), (5.0, 5.0, 1.0)] {
            assert_eq!(bcs_occupation(t, mu, 0.0, beta), fermi_x(beta * (t - mu)));
        }
    }

    #[test]
    fn fermi_surface_mode_is_half_filled() {
        assert_eq!(bcs_occupation(9.0, 9.0, 1e-3, 10.0), 0.5);
    }

    #[test]
    fn occupation_matches_textbook_form() {
        let (t, mu, d, beta) = (9.01, 9.0, 0.02, 30.0);
        let eps: f64 = t - mu;
        let e = eps.hypot(d);
        let direct = 0.5 * (1.0 - eps / e * (beta * e / 2.0).tanh());
        assert!((bcs_occupation(t, mu, d, beta) - direct).abs() < 1e-15);
        assert!((bcs_occupation(mu - eps, mu, d, beta) - (1.0 - direct)).abs() < 1e-15);
        // beta -> infinity
        let cold = bcs_occupation(t, mu, d, f64::INFINITY);
        assert!((cold - 0.5 * (1.0 - eps / e)).abs() < 1e-15);
    }

    #[test]
    fn no_coupling_reduces_to_free_fermions() {
        let p = params(0.0);
        let sol = solve_gap_and_mu(&p, 2.0).unwrap();
        assert_eq!(sol.gap, 0.0);
        let free = solve_state(&p.spectrum, 0.5, 100.0, Statistics::Fermi, 1, 1e-12).unwrap();
        assert!((sol.mu - free.mu).abs() < 1e-9);
        let c = capacity_fermi(&p.spectrum, &free);
        assert!((capacity_bcs(&p, &sol) - c).abs() < 1e-9 * c);
    }

    #[test]
    fn gap_is_positive_when_cold_and_zero_when_hot() {
        let p = params(1e-6 * HBAR2_OVER_ML2);
        let cold = solve_gap_and_mu(&p, 1e-8).unwrap();
        assert!(cold.gap > 1e-7, "gap {}", cold.gap);
        assert!(cold.converged, "{cold:?}");
        let hot = solve_gap_and_mu(&p, 1e-4).unwrap();
        assert_eq!(hot.gap, 0.0);
        assert!(hot.converged);
    }

    #[test]
    fn residuals_within_tolerance() {
        let p = params(1e-6 * HBAR2_OVER_ML2);
        for &t in &[1e-8, 3e-7, 6e-7] {
            let s = solve_gap_and_mu(&p, t).unwrap();
            assert!(s.gap_residual <= GAP_TOL_REL * s.gap.max(p.shell_half_width));
            assert!(s.count_residual.abs() <= COUNT_TOL_REL * 100.0);
            assert!(s.occupations.iter().all(|&n| (0.0..=1.0).contains(&n)));
        }
    }

    #[test]
    fn stronger_coupling_closes_the_gap_later() {
        let grid: Vec<f64> = (0..40).map(|i| 1e-8 * 1.25f64.powi(i)).collect();
        let weak = bcs_sweep(&params(1e-6 * HBAR2_OVER_ML2), &grid, 1.0).unwrap();
        let strong = bcs_sweep(&params(1e-5 * HBAR2_OVER_ML2), &grid, 1.0).unwrap();
        let (a, b) = (weak.gap_vanishes_at.unwrap(), strong.gap_vanishes_at.unwrap());
        assert!(b > a, "{a} {b}");
    }

    #[test]
    fn spin_pairs_halve_per_mode_filling() {
        let mut p = params(0.0);
        p.count_spin_pairs = true;
        let s = solve_gap_and_mu(&p, 1.0).unwrap();
        let free = solve_state(&p.spectrum, 1.0, 50.0, Statistics::Fermi, 1, 1e-12).unwrap();
        assert!((s.mu - free.mu).abs() < 1e-9);
        let c = 2.0 * capacity_fermi(&p.spectrum, &free);
        assert!((capacity_bcs(&p, &s) - c).abs() < 1e-9 * c);
    }
}
