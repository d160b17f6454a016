//! Run configuration.
//!
//! Config files are line oriented: one `key = value` per line, `#` starts a
//! comment, blank lines are ignored. Lists are comma separated. Recognised
//! keys (CLI flags mirror them):
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `trap` | `box3d_pbc`, `box3d_hard`, `harmonic_iso(d)`, `power_law(gamma,d)` | `box3d_pbc` |
//! | `length` | box side or oscillator length, in units of the reference side | `1` |
//! | `hbar_omega` | oscillator quantum in box units (overrides `length`) | |
//! | `N` | average particle number | `100` |
//! | `statistics` | `bose`, `fermi` or `bcs` | `bose` |
//! | `g` | spin degeneracy | `1` |
//! | `temperatures` | explicit temperature list | |
//! | `grid_min`, `grid_max`, `grid_points`, `grid_spacing` | grid relative to `T_c` (bose) or `T_f` | `0.05`, `2.5`, `60`, `log` |
//! | `tail_tol` | adaptive cutoff tail tolerance | `1e-9` |
//! | `max_cutoff` | largest cutoff energy tried | `1e6` |
//! | `tol_n` | relative particle-count tolerance | `1e-9` |
//! | `delta_eps`, `v0` | BCS shell half-width and coupling | |
//! | `spin_pairs` | count both spin species in BCS sums | `false` |

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::{TrapSpec, DEFAULT_MAX_CUTOFF, DEFAULT_TAIL_TOL};
use crate::statistics::{critical_temperatures, Statistics, DEFAULT_TOL_N_REL};
use crate::units::HBAR2_OVER_ML2;

/// Every violated constraint of a configuration, one message each.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.violations.join("; "))
    }
}

impl ConfigError {
    fn single(msg: impl Into<String>) -> Self {
        Self {
            violations: vec![msg.into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsKind {
    Bose,
    Fermi,
    Bcs,
}

impl StatisticsKind {
    /// Noninteracting statistics underlying the kind (BCS reduces to Fermi).
    pub fn base(self) -> Statistics {
        match self {
            StatisticsKind::Bose => Statistics::Bose,
            StatisticsKind::Fermi | StatisticsKind::Bcs => Statistics::Fermi,
        }
    }
}

impl std::str::FromStr for StatisticsKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "bose" => Ok(StatisticsKind::Bose),
            "fermi" => Ok(StatisticsKind::Fermi),
            "bcs" => Ok(StatisticsKind::Bcs),
            other => Err(format!("unknown statistics {other:?} (bose | fermi | bcs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Log,
    Linear,
}

/// Unvalidated configuration as read from a file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawConfig {
    pub trap: Option<String>,
    pub length: Option<f64>,
    pub hbar_omega: Option<f64>,
    pub particles: Option<f64>,
    pub statistics: Option<String>,
    pub spin: Option<i64>,
    pub temperatures: Option<Vec<f64>>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: Option<i64>,
    pub grid_spacing: Option<String>,
    pub tail_tol: Option<f64>,
    pub max_cutoff: Option<f64>,
    pub tol_n: Option<f64>,
    pub delta_eps: Option<f64>,
    pub v0: Option<f64>,
    pub spin_pairs: Option<bool>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "trap",
    "length",
    "hbar_omega",
    "N",
    "statistics",
    "g",
    "temperatures",
    "grid_min",
    "grid_max",
    "grid_points",
    "grid_spacing",
    "tail_tol",
    "max_cutoff",
    "tol_n",
    "delta_eps",
    "v0",
    "spin_pairs",
];

fn num(key: &str, v: &str) -> Result<f64, String> {
    v.trim()
        .parse::<f64>()
        .map_err(|e| format!("{key}: cannot parse {v:?} as a number ({e})"))
}

fn int(key: &str, v: &str) -> Result<i64, String> {
    v.trim()
        .parse::<i64>()
        .map_err(|e| format!("{key}: cannot parse {v:?} as an integer ({e})"))
}

impl RawConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "trap" => self.trap = Some(v.to_string()),
            "length" => self.length = Some(num(key, v)?),
            "hbar_omega" => self.hbar_omega = Some(num(key, v)?),
            "N" | "n" | "particles" => self.particles = Some(num(key, v)?),
            "statistics" => self.statistics = Some(v.to_string()),
            "g" | "spin" => self.spin = Some(int(key, v)?),
            "temperatures" => {
                self.temperatures = Some(
                    v.split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| num(key, s))
                        .collect::<Result<_, _>>()?,
                )
            }
            "grid_min" => self.grid_min = Some(num(key, v)?),
            "grid_max" => self.grid_max = Some(num(key, v)?),
            "grid_points" => self.grid_points = Some(int(key, v)?),
            "grid_spacing" => self.grid_spacing = Some(v.to_string()),
            "tail_tol" => self.tail_tol = Some(num(key, v)?),
            "max_cutoff" => self.max_cutoff = Some(num(key, v)?),
            "tol_n" => self.tol_n = Some(num(key, v)?),
            "delta_eps" => self.delta_eps = Some(num(key, v)?),
            "v0" => self.v0 = Some(num(key, v)?),
            "spin_pairs" => {
                self.spin_pairs = Some(match v {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(format!("spin_pairs: expected true or false, got {v:?}")),
                })
            }
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = raw.set(k, v) {
                        errors.push(format!("line {}: {e}", i + 1));
                    }
                }
                None => errors.push(format!("line {}: expected key = value", i + 1)),
            }
        }
        if errors.is_empty() {
            Ok(raw)
        } else {
            Err(ConfigError { violations: errors })
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Overlays every key set in `other`.
    pub fn merge(&mut self, other: &RawConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            trap, length, hbar_omega, particles, statistics, spin, temperatures, grid_min,
            grid_max, grid_points, grid_spacing, tail_tol, max_cutoff, tol_n, delta_eps, v0,
            spin_pairs
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcsSettings {
    /// Half-width of the pairing shell around the Fermi surface.
    pub shell_half_width: f64,
    /// Attraction strength `V0 > 0`.
    pub coupling: f64,
    /// Count both spin species in the particle sum and the capacity.
    pub count_spin_pairs: bool,
}

impl BcsSettings {
    /// `delta_eps = hbar^2 / m L^2`, `V0 = 1e-6 hbar^2 / m L^2`.
    pub fn reference() -> Self {
        Self {
            shell_half_width: HBAR2_OVER_ML2,
            coupling: 1e-6 * HBAR2_OVER_ML2,
            count_spin_pairs: false,
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trap: TrapSpec,
    pub particles: f64,
    pub statistics: StatisticsKind,
    pub spin: u32,
    pub temperatures: Vec<f64>,
    pub tail_tol: f64,
    pub max_cutoff: f64,
    pub tol_n_rel: f64,
    pub bcs: Option<BcsSettings>,
}

impl RunConfig {
    /// Raw form that validates back to `self`.
    pub fn to_raw(&self) -> RawConfig {
        let (length, hbar_omega) = match self.trap {
            TrapSpec::Box3dPbc { length } | TrapSpec::Box3dHard { length } => (Some(length), None),
            TrapSpec::HarmonicIso { quantum, .. } => (None, Some(quantum)),
            TrapSpec::PowerLaw { .. } => (None, None),
        };
        RawConfig {
            trap: Some(self.trap.to_string()),
            length,
            hbar_omega,
            particles: Some(self.particles),
            statistics: Some(
                match self.statistics {
                    StatisticsKind::Bose => "bose",
                    StatisticsKind::Fermi => "fermi",
                    StatisticsKind::Bcs => "bcs",
                }
                .into(),
            ),
            spin: Some(self.spin as i64),
            temperatures: Some(self.temperatures.clone()),
            tail_tol: Some(self.tail_tol),
            max_cutoff: Some(self.max_cutoff),
            tol_n: Some(self.tol_n_rel),
            delta_eps: self.bcs.map(|b| b.shell_half_width),
            v0: self.bcs.map(|b| b.coupling),
            spin_pairs: self.bcs.map(|b| b.count_spin_pairs),
            ..RawConfig::default()
        }
    }

    /// Axis normalizer: `T_c` for bosons, `T_f` otherwise.
    pub fn normalizer(&self) -> Option<f64> {
        normalizer(&self.trap, self.particles, self.spin, self.statistics)
    }

    pub fn max_temperature(&self) -> Option<f64> {
        self.temperatures.last().copied()
    }
}

pub(crate) fn normalizer(trap: &TrapSpec, particles: f64, spin: u32, kind: StatisticsKind) -> Option<f64> {
    let t = critical_temperatures(trap, particles, spin).ok()?;
    Some(match kind {
        StatisticsKind::Bose => t.bec,
        _ => t.fermi,
    })
}

/// Temperature grid `lo..hi` (relative units) with `points` nodes.
pub fn make_grid(lo: f64, hi: f64, points: usize, spacing: GridSpacing) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                let f = i as f64 / (points - 1) as f64;
                match spacing {
                    GridSpacing::Log => (lo.ln() + f * (hi.ln() - lo.ln())).exp(),
                    GridSpacing::Linear => lo + f * (hi - lo),
                }
            })
            .collect(),
    }
}

pub const DEFAULT_GRID: (f64, f64, usize) = (0.05, 2.5, 60);

/// Checks every invariant and fills defaults. All violations are reported
/// together.
pub fn validate_config(raw: &RawConfig) -> Result<RunConfig, ConfigError> {
    let mut v = Vec::new();

    let statistics = match raw.statistics.as_deref().unwrap_or("bose").parse::<StatisticsKind>() {
        Ok(s) => s,
        Err(e) => {
            v.push(e);
            StatisticsKind::Bose
        }
    };

    let trap = match raw.trap.as_deref().unwrap_or("box3d_pbc").parse::<TrapSpec>() {
        Ok(mut t) => {
            match &mut t {
                TrapSpec::Box3dPbc { length } | TrapSpec::Box3dHard { length } => {
                    if let Some(l) = raw.length {
                        *length = l;
                    }
                }
                TrapSpec::HarmonicIso { quantum, .. } => {
                    if let Some(l) = raw.length {
                        *quantum = HBAR2_OVER_ML2 / (l * l);
                    }
                    if let Some(w) = raw.hbar_omega {
                        *quantum = w;
                    }
                }
                TrapSpec::PowerLaw { .. } => {}
            }
            if let Err(e) = t.validate() {
                v.push(e);
            }
            Some(t)
        }
        Err(e) => {
            v.push(e);
            None
        }
    };

    let particles = raw.particles.unwrap_or(100.0);
    if !(particles > 0.0 && particles.is_finite()) {
        v.push("N must be positive".into());
    }

    let spin = raw.spin.unwrap_or(1);
    if spin < 1 {
        v.push(format!("g must be >= 1, got {spin}"));
    }
    if statistics == StatisticsKind::Bose && spin != 1 {
        v.push("bosons are spinless in this model (g must be 1)".into());
    }
    let spin = spin.max(1) as u32;

    let bcs = if statistics == StatisticsKind::Bcs {
        if raw.delta_eps.is_none() {
            v.push("bcs statistics requires delta_eps".into());
        }
        if raw.v0.is_none() {
            v.push("bcs statistics requires v0".into());
        }
        if let Some(d) = raw.delta_eps {
            if !(d > 0.0 && d.is_finite()) {
                v.push(format!("delta_eps must be positive, got {d}"));
            }
        }
        if let Some(c) = raw.v0 {
            if !(c >= 0.0 && c.is_finite()) {
                v.push(format!("v0 must be non-negative, got {c}"));
            }
        }
        if let Some(t) = &trap {
            if !matches!(t, TrapSpec::Box3dPbc { .. }) {
                v.push(format!("bcs statistics needs trap box3d_pbc, got {t}"));
            }
        }
        Some(BcsSettings {
            shell_half_width: raw.delta_eps.unwrap_or(f64::NAN),
            coupling: raw.v0.unwrap_or(f64::NAN),
            count_spin_pairs: raw.spin_pairs.unwrap_or(false),
        })
    } else {
        None
    };

    let positive = |name: &str, x: Option<f64>, default: f64, v: &mut Vec<String>| {
        let x = x.unwrap_or(default);
        if !(x > 0.0 && x.is_finite()) {
            v.push(format!("{name} must be positive, got {x}"));
        }
        x
    };
    let tail_tol = positive("tail_tol", raw.tail_tol, DEFAULT_TAIL_TOL, &mut v);
    let max_cutoff = positive("max_cutoff", raw.max_cutoff, DEFAULT_MAX_CUTOFF, &mut v);
    let tol_n_rel = positive("tol_n", raw.tol_n, DEFAULT_TOL_N_REL, &mut v);

    let temperatures = match &raw.temperatures {
        Some(ts) => ts.clone(),
        None => {
            let lo = raw.grid_min.unwrap_or(DEFAULT_GRID.0);
            let hi = raw.grid_max.unwrap_or(DEFAULT_GRID.1);
            let points = raw.grid_points.unwrap_or(DEFAULT_GRID.2 as i64);
            let spacing = match raw.grid_spacing.as_deref().unwrap_or("log") {
                "log" => GridSpacing::Log,
                "linear" | "lin" => GridSpacing::Linear,
                other => {
                    v.push(format!("grid_spacing must be log or linear, got {other:?}"));
                    GridSpacing::Log
                }
            };
            if points < 0 {
                v.push(format!("grid_points must be >= 0, got {points}"));
            }
            if !(lo > 0.0 && hi >= lo) {
                v.push(format!("grid bounds must satisfy 0 < grid_min <= grid_max, got {lo}..{hi}"));
            }
            let scale = trap
                .as_ref()
                .and_then(|t| normalizer(t, particles.max(f64::MIN_POSITIVE), spin, statistics));
            match scale {
                Some(s) if s.is_finite() => make_grid(lo, hi, points.max(0) as usize, spacing)
                    .into_iter()
                    .map(|t| t * s)
                    .collect(),
                _ => {
                    if trap.is_some() {
                        v.push("this trap has no reference temperature; give explicit temperatures".into());
                    }
                    Vec::new()
                }
            }
        }
    };
    if temperatures.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        v.push("every temperature must be positive".into());
    }
    if temperatures.windows(2).any(|w| !(w[1] > w[0])) {
        v.push("temperatures must be strictly increasing".into());
    }

    if !v.is_empty() {
        return Err(ConfigError { violations: v });
    }
    Ok(RunConfig {
        trap: trap.expect("checked"),
        particles,
        statistics,
        spin,
        temperatures,
        tail_tol,
        max_cutoff,
        tol_n_rel,
        bcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawConfig {
        RawConfig::parse_str(text).unwrap()
    }

    #[test]
    fn hundred_bosons_accepted() {
        let c = validate_config(&raw("N = 100\nstatistics = bose\ng = 1\ngrid_min = 0.1\ngrid_max = 2.0")).unwrap();
        assert_eq!(c.particles, 100.0);
        assert_eq!(c.temperatures.len(), 60);
        let tc = c.normalizer().unwrap();
        assert!((c.temperatures[0] - 0.1 * tc).abs() < 1e-12);
        assert!((c.temperatures[59] - 2.0 * tc).abs() < 1e-9);
    }

    #[test]
    fn zero_particles_rejected() {
        let err = validate_config(&raw("N = 0")).unwrap_err();
        assert!(err.violations.iter().any(|m| m == "N must be positive"), "{err}");
    }

    #[test]
    fn spinful_bosons_rejected() {
        let err = validate_config(&raw("statistics = bose\ng = 2")).unwrap_err();
        assert!(err.to_string().contains("bosons are spinless in this model"));
    }

    #[test]
    fn bcs_needs_shell_parameters() {
        let err = validate_config(&raw("statistics = bcs")).unwrap_err();
        assert_eq!(err.violations.len(), 2, "{err}");
        let ok = validate_config(&raw("statistics = bcs\ndelta_eps = 0.05\nv0 = 1e-8")).unwrap();
        assert_eq!(ok.bcs.unwrap().coupling, 1e-8);
    }

    #[test]
    fn reports_all_violations() {
        let err = validate_config(&raw("N = -1\ng = 0\ntemperatures = 1, -2")).unwrap_err();
        assert!(err.violations.len() >= 3, "{err}");
    }

    #[test]
    fn non_increasing_grid_rejected() {
        let err = validate_config(&raw("temperatures = 1, 1")).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"));
    }

    #[test]
    fn empty_grid_is_valid() {
        let c = validate_config(&raw("grid_points = 0")).unwrap();
        assert!(c.temperatures.is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RawConfig::parse_str("N = 10\nbogus\nfoo = 1").unwrap_err();
        assert_eq!(err.violations.len(), 2);
        assert!(err.violations[0].starts_with("line 2"));
    }

    #[test]
    fn validation_is_idempotent() {
        for text in [
            "N = 100",
            "trap = harmonic_iso(3)\nstatistics = fermi\ng = 2\nN = 40",
            "statistics = bcs\ndelta_eps = 0.05\nv0 = 1e-8\nspin_pairs = true",
            "trap = box3d_hard\nlength = 1.5\ntemperatures = 0.5, 1, 2",
        ] {
            let once = validate_config(&raw(text)).unwrap();
            let twice = validate_config(&once.to_raw()).unwrap();
            assert_eq!(once, twice, "{text}");
        }
    }
}
