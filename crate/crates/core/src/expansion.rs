//! Third-order high-temperature expansion of the capacities.
//!
//! With `x = N / S_1` the capacities expand as
//!
//! ```text
//! C = (a1 x + a2 x^2 + a3 x^3) log2 e + b1 x log2 x + b2 x^2 log2 x + O(x^4)
//! ```
//!
//! Two coefficient sets are carried side by side. [`CoefficientSet::Printed`]
//! holds the closed forms as they are usually quoted, including
//! `a3 = -3 S2 + S3/3 + 2 S2^2/S1 + ...` and `b2(fermi) = 2 S2`.
//! [`CoefficientSet::Derived`] is obtained by inverting the particle-number
//! series for the fugacity and substituting into `S = beta E - beta mu N +
//! ln Xi`; it differs in the non-`D` part of `a3` (`S3/3 - S2^2 / 2 S1`) and
//! has no `x^2 log x` term for either statistics. Only the derived set leaves
//! an `O(x^4)` residual against the exact capacity (a single mode at zero
//! energy already shows this: `(1+n)ln(1+n) - n ln n = n - n ln n + n^2/2 -
//! n^3/6 + ...`), so [`series_capacity`] uses it.

use serde::{Deserialize, Serialize};
use std::f64::consts::LOG2_E;

use crate::capacity::capacity;
use crate::error::{Error, Result};
use crate::spectrum::{build_spectrum, integral_sums, smooth_sums, CutoffPolicy, TrapSpec, TrapSpectrum};
use crate::statistics::{solve_state, Statistics};

/// Above this `x = N / S_1` the report flags the temperature as outside the
/// high-temperature regime.
pub const HIGH_TEMPERATURE_X: f64 = 0.3;

/// `S_1..S_3` and `D_1..D_3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sums {
    pub s: [f64; 3],
    pub d: [f64; 3],
}

impl Sums {
    pub fn from_spectrum(spectrum: &TrapSpectrum, beta: f64, tail_tol: f64) -> Result<Self> {
        let mut out = Sums { s: [0.0; 3], d: [0.0; 3] };
        for k in 1..=3u32 {
            let sums = smooth_sums(spectrum, beta, k, tail_tol)?;
            out.s[k as usize - 1] = sums.direct.s;
            out.d[k as usize - 1] = sums.direct.d;
        }
        Ok(out)
    }

    pub fn from_density_of_states(trap: &TrapSpec, beta: f64) -> Self {
        let mut out = Sums { s: [0.0; 3], d: [0.0; 3] };
        for k in 1..=3u32 {
            let p = integral_sums(trap, beta, k);
            out.s[k as usize - 1] = p.s;
            out.d[k as usize - 1] = p.d;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSet {
    Printed,
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    pub alpha_bose: [f64; 3],
    pub alpha_fermi: [f64; 3],
    pub beta_bose: [f64; 2],
    pub beta_fermi: [f64; 2],
}

impl SeriesCoefficients {
    pub fn printed(sums: &Sums) -> Self {
        let [s1, s2, s3] = sums.s;
        let [d1, d2, d3] = sums.d;
        let a1 = s1 + d1;
        let a2 = s2 / 2.0 - s2 * d1 / s1 + d2;
        let a3 = -3.0 * s2 + s3 / 3.0 + 2.0 * s2 * s2 / s1 + (2.0 * s2 * s2 - s1 * s3) * d1 / (s1 * s1)
            - 2.0 * s2 * d2 / s1
            + d3;
        Self {
            alpha_bose: [a1, a2, a3],
            alpha_fermi: [a1, -a2, a3],
            beta_bose: [-s1, 0.0],
            beta_fermi: [-s1, 2.0 * s2],
        }
    }

    pub fn derived(sums: &Sums) -> Self {
        let [s1, s2, s3] = sums.s;
        let [d1, d2, d3] = sums.d;
        let a1 = s1 + d1;
        let a2 = s2 / 2.0 - s2 * d1 / s1 + d2;
        let a3 = s3 / 3.0 - s2 * s2 / (2.0 * s1) + (2.0 * s2 * s2 - s1 * s3) * d1 / (s1 * s1)
            - 2.0 * s2 * d2 / s1
            + d3;
        Self {
            alpha_bose: [a1, a2, a3],
            alpha_fermi: [a1, -a2, a3],
            beta_bose: [-s1, 0.0],
            beta_fermi: [-s1, 0.0],
        }
    }

    pub fn for_set(set: CoefficientSet, sums: &Sums) -> Self {
        match set {
            CoefficientSet::Printed => Self::printed(sums),
            CoefficientSet::Derived => Self::derived(sums),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `alpha2(fermi) - alpha2(bose) > 0`.
    FermionsAhead,
    Tie,
    BosonsAhead,
}

impl Verdict {
    fn from_gap(gap: f64) -> Self {
        if gap > 0.0 {
            Verdict::FermionsAhead
        } else if gap < 0.0 {
            Verdict::BosonsAhead
        } else {
            Verdict::Tie
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub beta: f64,
    pub particles: f64,
    /// Expansion parameter `N / S_1`.
    pub x: f64,
    pub sums: Sums,
    pub printed: SeriesCoefficients,
    pub derived: SeriesCoefficients,
    /// `S2 (1 - beta <eps>_beta + beta <eps>_{2 beta})`, the mean-energy form
    /// of `alpha2(bose)`.
    pub alpha2_bose_mean_energy_form: f64,
    /// Truncated series, derived coefficients, in bits.
    pub series_bose: f64,
    pub series_fermi: f64,
    /// Same series with the printed coefficients.
    pub series_bose_printed: f64,
    pub series_fermi_printed: f64,
    pub high_temperature: bool,
    /// `1/gamma + 1/2 > 1/d`, when the trap is a power law.
    pub systematic: Option<bool>,
    pub theorem_verdict: Verdict,
}

/// Coefficients and truncated series from precomputed sums.
pub fn expansion_coefficients(sums: &Sums, beta: f64, particles: f64, trap: Option<&TrapSpec>) -> Result<ExpansionReport> {
    let [s1, s2, _] = sums.s;
    let [d1, d2, _] = sums.d;
    if !(s1 > 0.0 && s1.is_finite()) {
        return Err(Error::Invalid(format!("S_1 must be positive, got {s1}")));
    }
    let x = particles / s1;
    let printed = SeriesCoefficients::printed(sums);
    let derived = SeriesCoefficients::derived(sums);
    let mean_beta = d1 / s1;
    let mean_2beta = d2 / s2;
    Ok(ExpansionReport {
        beta,
        particles,
        x,
        sums: *sums,
        printed,
        derived,
        alpha2_bose_mean_energy_form: s2 * (1.0 - mean_beta + mean_2beta),
        series_bose: series_value(&derived, x, Statistics::Bose),
        series_fermi: series_value(&derived, x, Statistics::Fermi),
        series_bose_printed: series_value(&printed, x, Statistics::Bose),
        series_fermi_printed: series_value(&printed, x, Statistics::Fermi),
        high_temperature: x < HIGH_TEMPERATURE_X,
        systematic: trap.map(|t| systematicity(t.gamma(), t.dim())),
        theorem_verdict: Verdict::from_gap(derived.alpha_fermi[1] - derived.alpha_bose[1]),
    })
}

/// Report on a discrete spectrum, using direct sums.
pub fn expansion_report(spectrum: &TrapSpectrum, beta: f64, particles: f64, tail_tol: f64) -> Result<ExpansionReport> {
    let sums = Sums::from_spectrum(spectrum, beta, tail_tol)?;
    expansion_coefficients(&sums, beta, particles, spectrum.trap.as_ref())
}

/// `x log2 x` with the `x -> 0` limit.
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Truncated series at expansion parameter `x`, in bits.
pub fn series_value(c: &SeriesCoefficients, x: f64, statistics: Statistics) -> f64 {
    let (alpha, beta) = match statistics {
        Statistics::Bose => (&c.alpha_bose, &c.beta_bose),
        Statistics::Fermi => (&c.alpha_fermi, &c.beta_fermi),
    };
    let poly = alpha[0] * x + alpha[1] * x * x + alpha[2] * x * x * x;
    poly * LOG2_E + beta[0] * xlog2x(x) + beta[1] * x * xlog2x(x)
}

/// Truncated-series capacity for `particles` at the report's temperature.
pub fn series_capacity(report: &ExpansionReport, particles: f64, statistics: Statistics) -> f64 {
    series_value(&report.derived, particles / report.sums.s[0], statistics)
}

pub fn series_capacity_with(report: &ExpansionReport, set: CoefficientSet, particles: f64, statistics: Statistics) -> f64 {
    let c = match set {
        CoefficientSet::Printed => &report.printed,
        CoefficientSet::Derived => &report.derived,
    };
    series_value(c, particles / report.sums.s[0], statistics)
}

/// Fugacity `z = e^{beta mu}` to third order in `x`, with energies referred to
/// the spectrum's zero.
pub fn fugacity_series(sums: &Sums, x: f64, statistics: Statistics) -> f64 {
    let a = sums.s[1] / sums.s[0];
    let b = sums.s[2] / sums.s[0];
    match statistics {
        Statistics::Bose => x - a * x * x + (2.0 * a * a - b) * x * x * x,
        Statistics::Fermi => x + a * x * x + (2.0 * a * a - b) * x * x * x,
    }
}

/// `1/gamma + 1/2 > 1/d`; infinite `gamma` is the box limit.
pub fn systematicity(gamma: f64, dim: u32) -> bool {
    let inv_gamma = if gamma.is_infinite() { 0.0 } else { 1.0 / gamma };
    inv_gamma + 0.5 > 1.0 / dim as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub beta: f64,
    pub x: f64,
    pub alpha2_bose: f64,
    pub alpha2_bose_mean_energy_form: f64,
    /// `alpha2(fermi) - alpha2(bose) = -2 alpha2(bose)`.
    pub alpha2_gap: f64,
    /// `b2(fermi) x^2 log2 x` with the printed `b2(fermi) = 2 S2`.
    pub printed_beta2_correction: f64,
    /// Series fermion minus boson capacity, derived coefficients, bits.
    pub series_gap: f64,
    /// Direct fermion minus boson capacity, when the trap has a spectrum.
    pub direct_gap: Option<f64>,
    pub in_scope: bool,
    pub fermions_ahead: bool,
}

/// Per-temperature comparison of fermion and boson capacities for a power-law
/// trap. Sums come from the spectrum when one exists, otherwise from the
/// density of states.
pub fn theorem_check(trap: &TrapSpec, betas: &[f64], particles: f64, tail_tol: f64) -> Result<Vec<TheoremRow>> {
    trap.validate().map_err(Error::Invalid)?;
    let in_scope = systematicity(trap.gamma(), trap.dim());
    let spectrum = match (trap.discrete(), betas.iter().cloned().reduce(f64::min)) {
        (Some(discrete), Some(beta_min)) => Some(build_spectrum(
            &discrete,
            &CutoffPolicy::Adaptive {
                tail_tol,
                temperature: 1.0 / beta_min,
                particles,
                statistics: Statistics::Fermi,
                spin: 1,
                max_energy: crate::spectrum::DEFAULT_MAX_CUTOFF,
            },
            particles,
        )?),
        _ => None,
    };
    betas
        .iter()
        .map(|&beta| {
            let (sums, direct_gap) = match &spectrum {
                Some(spec) => {
                    let sums = Sums::from_spectrum(spec, beta, 1.0)?;
                    let b = solve_state(spec, beta, particles, Statistics::Bose, 1, 1e-12)?;
                    let f = solve_state(spec, beta, particles, Statistics::Fermi, 1, 1e-12)?;
                    (sums, Some(capacity(spec, &f) - capacity(spec, &b)))
                }
                None => (Sums::from_density_of_states(trap, beta), None),
            };
            let r = expansion_coefficients(&sums, beta, particles, Some(trap))?;
            let alpha2 = r.derived.alpha_bose[1];
            let series_gap = r.series_fermi - r.series_bose;
            Ok(TheoremRow {
                beta,
                x: r.x,
                alpha2_bose: alpha2,
                alpha2_bose_mean_energy_form: r.alpha2_bose_mean_energy_form,
                alpha2_gap: r.derived.alpha_fermi[1] - alpha2,
                printed_beta2_correction: r.printed.beta_fermi[1] * r.x * xlog2x(r.x),
                series_gap,
                direct_gap,
                in_scope,
                fermions_ahead: in_scope && series_gap > 0.0 && direct_gap.is_none_or(|g| g > 0.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Level;

    fn single_level() -> Sums {
        Sums { s: [1.0; 3], d: [0.0; 3] }
    }

    #[test]
    fn printed_single_level_values() {
        let c = SeriesCoefficients::printed(&single_level());
        assert_eq!(c.alpha_bose[0], 1.0);
        assert_eq!(c.alpha_bose[1], 0.5);
        assert!((c.alpha_bose[2] + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derived_single_level_matches_mode_entropy_taylor() {
        // (1+n)ln(1+n) - n ln n = n - n ln n + n^2/2 - n^3/6 + n^4/12 ...
        let c = SeriesCoefficients::derived(&single_level());
        let close = |a: [f64; 3], b: [f64; 3]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(c.alpha_bose, [1.0, 0.5, -1.0 / 6.0]));
        // -n ln n - (1-n)ln(1-n) = n - n ln n - n^2/2 - n^3/6 ...
        assert!(close(c.alpha_fermi, [1.0, -0.5, -1.0 / 6.0]));
    }

    #[test]
    fn series_vanishes_with_particles() {
        let r = expansion_coefficients(&single_level(), 1.0, 1e-300, None).unwrap();
        assert!(r.series_bose.abs() < 1e-290);
        assert_eq!(series_capacity(&r, 0.0, Statistics::Fermi), 0.0);
    }

    #[test]
    fn systematicity_cases() {
        assert!(systematicity(2.0, 3));
        assert!(systematicity(2.0, 2));
        assert!(systematicity(f64::INFINITY, 3));
        assert!(!systematicity(f64::INFINITY, 1));
        // 1/2 + 1/2 > 1/1 fails at equality
        assert!(!systematicity(2.0, 1));
    }

    #[test]
    fn mean_energy_form_single_level() {
        let spec = TrapSpectrum::from_levels(vec![Level::new(0.0, 1), Level::new(1.0, 2)]).unwrap();
        let r = expansion_report(&spec, 0.5, 0.1, 1.0).unwrap();
        let [_, s2, _] = r.sums.s;
        let [d1, d2, _] = r.sums.d;
        let s1 = r.sums.s[0];
        assert!((r.alpha2_bose_mean_energy_form - s2 * (1.0 - d1 / s1 + d2 / s2)).abs() < 1e-15);
    }
}
