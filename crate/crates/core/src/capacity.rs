//! Channel capacities, temperature sweeps and curvature-change detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::config::{RunConfig, StatisticsKind};
use crate::error::{Error, Result};
use crate::spectrum::{build_spectrum, CutoffPolicy, TrapSpectrum};
use crate::statistics::{solve_state, GasState, Statistics};

/// `(1 + n) log2(1 + n) - n log2 n`, with `0 log 0 = 0`.
#[inline]
pub fn bose_mode_entropy(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    ((1.0 + n) * n.ln_1p() - n * n.ln()) / LN_2
}

/// Binary entropy of `p`, in bits.
#[inline]
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.ln() + (1.0 - p) * (-p).ln_1p()) / LN_2
}

/// `C = -sum_i g_i (n_i log2 n_i - (1 + n_i) log2(1 + n_i))`.
pub fn capacity_bose(spectrum: &TrapSpectrum, state: &GasState) -> f64 {
    spectrum
        .levels
        .iter()
        .zip(&state.occupations)
        .map(|(l, &n)| l.weight() * bose_mode_entropy(n))
        .sum()
}

/// `C = g sum_i g_i H2(n_i / g)` with `H2` the binary entropy.
pub fn capacity_fermi(spectrum: &TrapSpectrum, state: &GasState) -> f64 {
    let g = state.spin as f64;
    g * spectrum
        .levels
        .iter()
        .zip(&state.occupations)
        .map(|(l, &n)| l.weight() * binary_entropy(n / g))
        .sum::<f64>()
}

pub fn capacity(spectrum: &TrapSpectrum, state: &GasState) -> f64 {
    match state.statistics {
        Statistics::Bose => capacity_bose(spectrum, state),
        Statistics::Fermi => capacity_fermi(spectrum, state),
    }
}

/// Grand-canonical entropy `beta E - beta mu N + ln Xi`, in bits. An
/// independent route to the capacity through the grand potential.
pub fn grand_potential_entropy(spectrum: &TrapSpectrum, state: &GasState) -> f64 {
    let b = state.beta;
    let ln_xi: f64 = match state.statistics {
        Statistics::Bose => spectrum
            .levels
            .iter()
            .zip(&state.occupations)
            // -ln(1 - e^{-x}) = ln(1 + n)
            .map(|(l, &n)| l.weight() * n.ln_1p())
            .sum(),
        Statistics::Fermi => {
            let g = state.spin as f64;
            spectrum
                .levels
                .iter()
                .zip(&state.occupations)
                // ln(1 + e^{-x}) = -ln(1 - p) per spin state
                .map(|(l, &n)| -l.weight() * g * (-(n / g)).ln_1p())
                .sum()
        }
    };
    let count: f64 = spectrum
        .levels
        .iter()
        .zip(&state.occupations)
        .map(|(l, n)| l.weight() * n)
        .sum();
    (b * state.energy - b * state.mu * count + ln_xi) / LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub temperature: f64,
    /// `T / T_c` for bosons, `T / T_f` for fermions.
    pub normalized: f64,
    pub mu: f64,
    pub energy: f64,
    /// Capacity in bits.
    pub capacity: f64,
    /// BCS gap; `None` for noninteracting sweeps.
    pub gap: Option<f64>,
    pub converged: bool,
}

/// Where a convex-to-concave change of `C(T)` was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inflection {
    pub temperature: f64,
    /// In `[0, 1)`: size of the curvature on both sides of the change relative
    /// to the difference noise, mapped through `r / (1 + r)`.
    pub confidence: f64,
    /// Last convex and first concave grid temperature.
    pub bracket: (f64, f64),
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub statistics: StatisticsKind,
    pub particles: f64,
    /// Temperature dividing the `normalized` column.
    pub normalizer: f64,
    pub rows: Vec<SweepRow>,
    pub inflection: Option<Inflection>,
}

impl SweepTable {
    pub fn temperatures(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.temperature).collect()
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.capacity).collect()
    }
}

/// Spectrum adequate for every temperature of `config`.
pub fn spectrum_for(config: &RunConfig) -> Result<TrapSpectrum> {
    let t_max = config.max_temperature().unwrap_or(1.0);
    let stats = config.statistics.base();
    let policy = CutoffPolicy::Adaptive {
        tail_tol: config.tail_tol,
        temperature: t_max,
        particles: config.particles,
        statistics: stats,
        spin: config.spin,
        max_energy: config.max_cutoff,
    };
    build_spectrum(&config.trap, &policy, config.particles)
}

/// Solves `mu`, `E` and `C` at every grid temperature, detects the
/// curvature change and refines it on a finer local grid.
pub fn sweep(config: &RunConfig) -> Result<SweepTable> {
    if config.statistics == StatisticsKind::Bcs {
        return crate::bcs::bcs_sweep_config(config);
    }
    let normalizer = config.normalizer().unwrap_or(1.0);
    if config.temperatures.is_empty() {
        return Ok(SweepTable {
            statistics: config.statistics,
            particles: config.particles,
            normalizer,
            rows: Vec::new(),
            inflection: None,
        });
    }
    let spectrum = spectrum_for(config)?;
    sweep_on(
        &spectrum,
        config.statistics.base(),
        config.particles,
        config.spin,
        &config.temperatures,
        normalizer,
        config.tol_n_rel,
    )
}

/// [`sweep`] on a prepared spectrum.
pub fn sweep_on(
    spectrum: &TrapSpectrum,
    statistics: Statistics,
    particles: f64,
    spin: u32,
    temperatures: &[f64],
    normalizer: f64,
    tol_rel: f64,
) -> Result<SweepTable> {
    let solve = |t: f64| -> Result<(GasState, f64)> {
        let st = solve_state(spectrum, 1.0 / t, particles, statistics, spin, tol_rel).map_err(|e| {
            match e {
                Error::Invalid(m) => Error::Invalid(format!("T = {t}: {m}")),
                other => other,
            }
        })?;
        let c = capacity(spectrum, &st);
        Ok((st, c))
    };
    let rows = temperatures
        .par_iter()
        .map(|&t| {
            let (st, c) = solve(t)?;
            Ok(SweepRow {
                temperature: t,
                normalized: t / normalizer,
                mu: st.mu,
                energy: st.energy,
                capacity: c,
                gap: None,
                converged: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = SweepTable {
        statistics: match statistics {
            Statistics::Bose => StatisticsKind::Bose,
            Statistics::Fermi => StatisticsKind::Fermi,
        },
        particles,
        normalizer,
        rows,
        inflection: None,
    };
    if let Some(coarse) = detect_inflection(&table) {
        let refined = refine_inflection(&coarse, &table.temperatures(), |t| solve(t).map(|x| x.1))?;
        table.inflection = Some(refined);
    }
    Ok(table)
}

/// Relative accuracy assumed for capacity values when separating real
/// curvature from round-off.
pub const CURVATURE_NOISE_REL: f64 = 1e-9;

/// Second derivative of `c(t)` at interior nodes of a nonuniform grid, paired
/// with the noise level of each estimate.
pub fn second_differences(t: &[f64], c: &[f64]) -> Vec<(f64, f64)> {
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (1..t.len().saturating_sub(1))
        .map(|i| {
            let hm = t[i] - t[i - 1];
            let hp = t[i + 1] - t[i];
            let d2 = 2.0 * ((c[i + 1] - c[i]) / hp - (c[i] - c[i - 1]) / hm) / (hp + hm);
            let noise = 4.0 * CURVATURE_NOISE_REL * scale / (hm * hp);
            (d2, noise)
        })
        .collect()
}

/// Convex-to-concave change of `C(T)` on the table's grid.
///
/// Curvatures within the noise band are ignored. A change is reported only
/// when every resolved curvature below it is convex and every one above it
/// is concave; any other pattern, including no change at all, gives `None`.
pub fn detect_inflection(table: &SweepTable) -> Option<Inflection> {
    detect_on_grid(&table.temperatures(), &table.capacities())
}

pub fn detect_on_grid(t: &[f64], c: &[f64]) -> Option<Inflection> {
    if t.len() < 5 || t.len() != c.len() {
        return None;
    }
    let d2 = second_differences(t, c);
    let resolved: Vec<(usize, f64, f64)> = d2
        .iter()
        .enumerate()
        .filter(|(_, (v, n))| v.abs() > *n)
        .map(|(i, &(v, n))| (i + 1, v, n))
        .collect();
    let first_concave = resolved.iter().position(|r| r.1 < 0.0)?;
    if first_concave == 0 {
        return None;
    }
    if resolved[first_concave..].iter().any(|r| r.1 > 0.0) {
        return None;
    }
    let (i, vi, ni) = resolved[first_concave - 1];
    let (j, vj, nj) = resolved[first_concave];
    let frac = vi / (vi - vj);
    let ratio = (vi / ni).min(-vj / nj);
    Some(Inflection {
        temperature: t[i] + frac * (t[j] - t[i]),
        confidence: ratio / (1.0 + ratio),
        bracket: (t[i], t[j]),
        refined: false,
    })
}

/// Re-evaluates `capacity_at` on a grid ten times finer spanning one coarse
/// node either side of the bracket and re-locates the change there. Falls
/// back to the coarse estimate if the local grid shows no clean change.
pub fn refine_inflection<F>(coarse: &Inflection, grid: &[f64], capacity_at: F) -> Result<Inflection>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let lo_idx = grid.iter().position(|&t| t == coarse.bracket.0);
    let hi_idx = grid.iter().position(|&t| t == coarse.bracket.1);
    let (Some(lo_idx), Some(hi_idx)) = (lo_idx, hi_idx) else {
        return Ok(*coarse);
    };
    let a = lo_idx.saturating_sub(1);
    let b = (hi_idx + 1).min(grid.len() - 1);
    let intervals = 10 * (b - a);
    let (t0, t1) = (grid[a], grid[b]);
    let local: Vec<f64> = (0..=intervals)
        .map(|k| t0 + (t1 - t0) * k as f64 / intervals as f64)
        .collect();
    let values = local
        .par_iter()
        .map(|&t| capacity_at(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(match detect_on_grid(&local, &values) {
        Some(mut fine) => {
            fine.refined = true;
            fine
        }
        None => *coarse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Level;
    use crate::statistics::solve_state;

    #[test]
    fn vanishing_occupations_give_zero() {
        assert_eq!(bose_mode_entropy(0.0), 0.0);
        assert!(bose_mode_entropy(1e-300) < 1e-290);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn unit_bose_mode_carries_two_bits() {
        assert!((bose_mode_entropy(1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn half_filled_fermi_state_carries_g_bits() {
        let spec = TrapSpectrum::from_levels(vec![Level::new(0.0, 1)]).unwrap();
        for g in 1..=3u32 {
            let st = GasState {
                beta: 1.0,
                mu: 0.0,
                particles: g as f64 / 2.0,
                spin: g,
                statistics: Statistics::Fermi,
                occupations: vec![g as f64 / 2.0],
                energy: 0.0,
            };
            assert!((capacity_fermi(&spec, &st) - g as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn grand_potential_route_agrees() {
        let spec = TrapSpectrum::from_levels(vec![
            Level::new(0.0, 1),
            Level::new(0.4, 3),
            Level::new(1.1, 5),
        ])
        .unwrap();
        for stats in [Statistics::Bose, Statistics::Fermi] {
            let st = solve_state(&spec, 1.7, 2.5, stats, 1, 1e-13).unwrap();
            let a = capacity(&spec, &st);
            let b = grand_potential_entropy(&spec, &st);
            assert!(((a - b) / a).abs() < 1e-12, "{stats}: {a} vs {b}");
        }
    }

    #[test]
    fn convex_curve_has_no_inflection() {
        let t: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        let c: Vec<f64> = t.iter().map(|x| x * x).collect();
        assert!(detect_on_grid(&t, &c).is_none());
    }

    #[test]
    fn logistic_inflection_is_located() {
        let t: Vec<f64> = (0..41).map(|i| i as f64 * 0.25).collect();
        let c: Vec<f64> = t.iter().map(|x| 1.0 / (1.0 + (-(x - 4.3)).exp())).collect();
        let inf = detect_on_grid(&t, &c).unwrap();
        assert!((inf.temperature - 4.3).abs() < 0.1, "{inf:?}");
        assert!(inf.confidence > 0.9);
        let fine = refine_inflection(&inf, &t, |x| Ok(1.0 / (1.0 + (-(x - 4.3)).exp()))).unwrap();
        assert!(fine.refined);
        assert!((fine.temperature - 4.3).abs() < 0.01, "{fine:?}");
    }

    #[test]
    fn concave_then_convex_is_not_a_signature() {
        let t: Vec<f64> = (0..41).map(|i| i as f64 * 0.25).collect();
        let c: Vec<f64> = t.iter().map(|x| -1.0 / (1.0 + (-(x - 4.3)).exp())).collect();
        assert!(detect_on_grid(&t, &c).is_none());
    }

    #[test]
    fn short_tables_are_skipped() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let c = [1.0, 4.0, 5.0, 5.5];
        assert!(detect_on_grid(&t, &c).is_none());
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let raw = crate::config::RawConfig::parse_str("grid_points = 0").unwrap();
        let cfg = crate::config::validate_config(&raw).unwrap();
        let table = sweep(&cfg).unwrap();
        assert!(table.rows.is_empty());
        assert!(table.inflection.is_none());
    }
}
