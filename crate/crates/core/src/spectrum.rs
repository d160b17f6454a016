//! Truncated single-particle spectra and semiclassical densities of states.
//!
//! Levels are stored once per distinct energy with an explicit integer
//! degeneracy; every downstream sum is weighted by it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta as beta_fn;
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::statistics::{self, Statistics};
use crate::units::{UnitSystem, HBAR2_OVER_ML2};

/// Trap geometry. Characteristic lengths and frequencies are folded into the
/// reduced unit; `length` is the box side relative to the reference `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrapSpec {
    /// Periodic box, levels `(nx^2 + ny^2 + nz^2) / length^2` with `n` in Z.
    Box3dPbc { length: f64 },
    /// Hard-wall box, levels `(nx^2 + ny^2 + nz^2) / (4 length^2)` with `n >= 1`.
    Box3dHard { length: f64 },
    /// Isotropic oscillator in `dim` dimensions, levels `n * quantum` measured
    /// from the ground state.
    HarmonicIso { dim: u32, quantum: f64 },
    /// `V = r^gamma` in `dim` dimensions (`hbar = m = 1`). Infinite `gamma`
    /// is the spherical box. Only `gamma = 2` has a discrete spectrum here.
    PowerLaw {
        #[serde(with = "gamma_serde")]
        gamma: f64,
        dim: u32,
    },
}

mod gamma_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &f64, s: S) -> Result<S::Ok, S::Error> {
        if g.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*g)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => super::parse_gamma(&s).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_gamma(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "Inf" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("bad gamma {t:?}: {e}")),
    }
}

impl TrapSpec {
    pub fn box_pbc() -> Self {
        TrapSpec::Box3dPbc { length: 1.0 }
    }

    pub fn box_hard() -> Self {
        TrapSpec::Box3dHard { length: 1.0 }
    }

    /// Oscillator whose length `sqrt(hbar / m omega)` equals `length` times the
    /// reference box side, expressed in box units.
    pub fn harmonic_matched(dim: u32, length: f64) -> Self {
        TrapSpec::HarmonicIso {
            dim,
            quantum: HBAR2_OVER_ML2 / (length * length),
        }
    }

    /// Oscillator in its own units (`hbar omega = 1`).
    pub fn harmonic_natural(dim: u32) -> Self {
        TrapSpec::HarmonicIso { dim, quantum: 1.0 }
    }

    pub fn unit_system(&self) -> UnitSystem {
        match self {
            TrapSpec::Box3dPbc { .. } | TrapSpec::Box3dHard { .. } => UnitSystem::BoxPbc,
            TrapSpec::HarmonicIso { quantum, .. } if *quantum == 1.0 => UnitSystem::Oscillator,
            TrapSpec::HarmonicIso { .. } => UnitSystem::BoxPbc,
            TrapSpec::PowerLaw { .. } => UnitSystem::PowerLaw,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            TrapSpec::Box3dPbc { length } | TrapSpec::Box3dHard { length } => {
                if !(length.is_finite() && length > 0.0) {
                    return Err(format!("box length must be positive, got {length}"));
                }
            }
            TrapSpec::HarmonicIso { dim, quantum } => {
                if !(1..=3).contains(&dim) {
                    return Err(format!("harmonic dimension must be 1, 2 or 3, got {dim}"));
                }
                if !(quantum.is_finite() && quantum > 0.0) {
                    return Err(format!("hbar omega must be positive, got {quantum}"));
                }
            }
            TrapSpec::PowerLaw { gamma, dim } => {
                if !(1..=3).contains(&dim) {
                    return Err(format!("power-law dimension must be 1, 2 or 3, got {dim}"));
                }
                if gamma.is_nan() || gamma <= 0.0 {
                    return Err(format!("power-law exponent must be positive, got {gamma}"));
                }
            }
        }
        Ok(())
    }

    /// Spatial dimension.
    pub fn dim(&self) -> u32 {
        match *self {
            TrapSpec::Box3dPbc { .. } | TrapSpec::Box3dHard { .. } => 3,
            TrapSpec::HarmonicIso { dim, .. } | TrapSpec::PowerLaw { dim, .. } => dim,
        }
    }

    /// Exponent of the confining potential (`inf` for boxes).
    pub fn gamma(&self) -> f64 {
        match *self {
            TrapSpec::Box3dPbc { .. } | TrapSpec::Box3dHard { .. } => f64::INFINITY,
            TrapSpec::HarmonicIso { .. } => 2.0,
            TrapSpec::PowerLaw { gamma, .. } => gamma,
        }
    }

    /// Energy of the lowest quantum level above the classical potential
    /// minimum, i.e. the offset between phase-space energies and spectrum
    /// energies. Only the oscillator's zero point is subtracted from its
    /// spectrum; box levels are kept absolute.
    pub fn zero_point(&self) -> f64 {
        match *self {
            TrapSpec::HarmonicIso { dim, quantum } => 0.5 * dim as f64 * quantum,
            TrapSpec::PowerLaw { gamma, dim } if gamma == 2.0 => {
                0.5 * dim as f64 * std::f64::consts::SQRT_2
            }
            _ => 0.0,
        }
    }

    /// Weyl density of states `rho(E) = prefactor * E^(exponent - 1)` of the
    /// phase-space integral, as `(prefactor, exponent)`. Energies are measured
    /// from the classical potential minimum.
    pub fn dos_law(&self) -> (f64, f64) {
        use std::f64::consts::PI;
        match *self {
            TrapSpec::Box3dPbc { length } | TrapSpec::Box3dHard { length } => {
                (2.0 * PI * length.powi(3), 1.5)
            }
            TrapSpec::HarmonicIso { dim, quantum } => {
                let d = dim as f64;
                (1.0 / (gamma(d) * quantum.powf(d)), d)
            }
            TrapSpec::PowerLaw { gamma: g, dim } => {
                let d = dim as f64;
                // unit-sphere surface area
                let omega = 2.0 * PI.powf(0.5 * d) / gamma(0.5 * d);
                // radial integral (1/g) B(d/g, d/2); tends to 1/d for a hard sphere
                let radial = if g.is_infinite() {
                    1.0 / d
                } else {
                    beta_fn(d / g, 0.5 * d) / g
                };
                let m = 1.0;
                let pref = omega * omega * m * (2.0 * m).powf(0.5 * d - 1.0) * radial
                    / (2.0 * PI).powf(d);
                let exponent = if g.is_infinite() { 0.5 * d } else { 0.5 * d + d / g };
                (pref, exponent)
            }
        }
    }

    pub fn discrete(&self) -> Option<Self> {
        match *self {
            TrapSpec::PowerLaw { gamma, dim } if gamma == 2.0 => Some(TrapSpec::HarmonicIso {
                dim,
                quantum: std::f64::consts::SQRT_2,
            }),
            TrapSpec::PowerLaw { .. } => None,
            other => Some(other),
        }
    }
}

impl fmt::Display for TrapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TrapSpec::Box3dPbc { .. } => write!(f, "box3d_pbc"),
            TrapSpec::Box3dHard { .. } => write!(f, "box3d_hard"),
            TrapSpec::HarmonicIso { dim, .. } => write!(f, "harmonic_iso({dim})"),
            TrapSpec::PowerLaw { gamma, dim } if gamma.is_infinite() => {
                write!(f, "power_law(inf,{dim})")
            }
            TrapSpec::PowerLaw { gamma, dim } => write!(f, "power_law({gamma},{dim})"),
        }
    }
}

/// Parses `box3d_pbc`, `box3d_hard`, `harmonic_iso(d)` (matched to the
/// reference length) and `power_law(gamma,d)`.
impl FromStr for TrapSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("unterminated trap arguments in {s:?}"))?;
                (&s[..i], inner.split(',').map(str::trim).collect::<Vec<_>>())
            }
            None => (s, Vec::new()),
        };
        let parse_dim = |t: &str| {
            t.parse::<u32>()
                .map_err(|e| format!("bad dimension {t:?}: {e}"))
        };
        let trap = match (name, args.as_slice()) {
            ("box3d_pbc", []) => TrapSpec::box_pbc(),
            ("box3d_hard", []) => TrapSpec::box_hard(),
            ("harmonic3d", []) => TrapSpec::harmonic_matched(3, 1.0),
            ("harmonic_iso", [d]) => TrapSpec::harmonic_matched(parse_dim(d)?, 1.0),
            ("power_law", [g, d]) => TrapSpec::PowerLaw {
                gamma: parse_gamma(g)?,
                dim: parse_dim(d)?,
            },
            _ => return Err(format!("unknown trap {s:?}")),
        };
        trap.validate()?;
        Ok(trap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u64,
}

impl Level {
    pub fn new(energy: f64, degeneracy: u64) -> Self {
        Self { energy, degeneracy }
    }

    #[inline]
    pub fn weight(&self) -> f64 {
        self.degeneracy as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapSpectrum {
    pub trap: Option<TrapSpec>,
    pub levels: Vec<Level>,
    pub cutoff_energy: f64,
}

impl TrapSpectrum {
    /// A hand-made spectrum. Energies must be strictly increasing and every
    /// degeneracy at least one.
    pub fn from_levels(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Invalid("spectrum needs at least one level".into()));
        }
        for w in levels.windows(2) {
            if !(w[1].energy > w[0].energy) {
                return Err(Error::Invalid(format!(
                    "level energies must be strictly increasing: {} then {}",
                    w[0].energy, w[1].energy
                )));
            }
        }
        if let Some(l) = levels.iter().find(|l| l.degeneracy == 0 || !l.energy.is_finite()) {
            return Err(Error::Invalid(format!("invalid level {l:?}")));
        }
        let cutoff_energy = levels.last().map(|l| l.energy).unwrap_or(0.0);
        Ok(Self {
            trap: None,
            levels,
            cutoff_energy,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.levels[0].energy
    }

    pub fn total_states(&self) -> f64 {
        self.levels.iter().map(Level::weight).sum()
    }

    /// Number of states with energy at or below `energy`.
    pub fn states_below(&self, energy: f64) -> f64 {
        self.levels
            .iter()
            .take_while(|l| l.energy <= energy)
            .map(Level::weight)
            .sum()
    }
}

/// How far up the spectrum is enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum CutoffPolicy {
    /// Keep every level at or below `energy`.
    Fixed { energy: f64 },
    /// Grow the cutoff until the per-state occupation of the topmost level,
    /// at the hottest temperature to be used, drops below `tail_tol * N`.
    Adaptive {
        tail_tol: f64,
        temperature: f64,
        particles: f64,
        statistics: Statistics,
        spin: u32,
        max_energy: f64,
    },
}

impl CutoffPolicy {
    pub fn adaptive(temperature: f64, particles: f64, statistics: Statistics, spin: u32) -> Self {
        CutoffPolicy::Adaptive {
            tail_tol: DEFAULT_TAIL_TOL,
            temperature,
            particles,
            statistics,
            spin,
            max_energy: DEFAULT_MAX_CUTOFF,
        }
    }
}

pub const DEFAULT_TAIL_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_CUTOFF: f64 = 1e6;

/// Enumerates every distinct level up to the policy's cutoff with exact
/// integer degeneracies. `particles` is the number of states the spectrum
/// must hold at minimum.
pub fn build_spectrum(trap: &TrapSpec, policy: &CutoffPolicy, particles: f64) -> Result<TrapSpectrum> {
    trap.validate().map_err(Error::Invalid)?;
    let discrete = trap.discrete().ok_or_else(|| Error::UnsupportedTrap {
        operation: "build_spectrum",
        trap: trap.to_string(),
    })?;
    match *policy {
        CutoffPolicy::Fixed { energy } => {
            let spec = enumerate(&discrete, energy)?;
            check_capacity(&discrete, spec, energy, particles)
        }
        CutoffPolicy::Adaptive {
            tail_tol,
            temperature,
            particles: n,
            statistics,
            spin,
            max_energy,
        } => adaptive(&discrete, tail_tol, temperature, n.max(particles), statistics, spin, max_energy),
    }
}

fn check_capacity(trap: &TrapSpec, spec: TrapSpectrum, cutoff: f64, particles: f64) -> Result<TrapSpectrum> {
    let states = spec.total_states();
    if states < particles {
        // invert the Weyl count for a suggested cutoff
        let (a, s) = trap.dos_law();
        let min_cutoff = (particles * s / a).powf(1.0 / s) + trap.zero_point();
        return Err(Error::CutoffTooSmall {
            cutoff,
            states,
            required: particles,
            min_cutoff: min_cutoff.max(cutoff * 2.0),
        });
    }
    Ok(spec)
}

fn adaptive(
    trap: &TrapSpec,
    tail_tol: f64,
    temperature: f64,
    particles: f64,
    statistics: Statistics,
    spin: u32,
    max_energy: f64,
) -> Result<TrapSpectrum> {
    let (a, s) = trap.dos_law();
    // enough room for ~2N states plus a few thermal widths
    let fill = (2.0 * particles * s / a).powf(1.0 / s);
    let mut energy = (fill + 10.0 * temperature).max(4.0 * level_unit(trap));
    loop {
        if energy > max_energy {
            return Err(Error::CutoffExhausted {
                tail_tol,
                max_energy,
            });
        }
        let spec = enumerate(trap, energy)?;
        if spec.total_states() < particles * 1.01 + 1.0 {
            energy *= 2.0;
            continue;
        }
        let beta = 1.0 / temperature;
        let mu = statistics::solve_mu(&spec, beta, particles, statistics, spin, statistics::DEFAULT_TOL_N_REL)?;
        let top = spec.levels.last().expect("non-empty");
        let n_top = statistics::occupation(top.energy, beta, mu, statistics, spin)? / spin as f64;
        if n_top < tail_tol * particles {
            return Ok(spec);
        }
        // aim where a Boltzmann tail would cross the tolerance
        let target = mu + temperature * (1.0 / (tail_tol * particles)).ln() + 2.0 * temperature;
        energy = (energy * 1.5).max(target);
    }
}

fn level_unit(trap: &TrapSpec) -> f64 {
    match *trap {
        TrapSpec::Box3dPbc { length } => 1.0 / (length * length),
        TrapSpec::Box3dHard { length } => 1.0 / (4.0 * length * length),
        TrapSpec::HarmonicIso { quantum, .. } => quantum,
        TrapSpec::PowerLaw { .. } => 1.0,
    }
}

fn enumerate(trap: &TrapSpec, cutoff: f64) -> Result<TrapSpectrum> {
    if !(cutoff.is_finite() && cutoff >= 0.0) {
        return Err(Error::Invalid(format!("cutoff energy must be finite and >= 0, got {cutoff}")));
    }
    let levels = match *trap {
        TrapSpec::Box3dPbc { length } => {
            let scale = 1.0 / (length * length);
            square_sums((cutoff / scale + 1e-9).floor() as usize, true)
                .into_iter()
                .map(|(m, g)| Level::new(m as f64 * scale, g))
                .collect()
        }
        TrapSpec::Box3dHard { length } => {
            let scale = 1.0 / (4.0 * length * length);
            square_sums((cutoff / scale + 1e-9).floor() as usize, false)
                .into_iter()
                .map(|(m, g)| Level::new(m as f64 * scale, g))
                .collect()
        }
        TrapSpec::HarmonicIso { dim, quantum } => {
            let top = (cutoff / quantum + 1e-9).floor() as u64;
            (0..=top)
                .map(|n| Level::new(n as f64 * quantum, oscillator_degeneracy(n, dim)))
                .collect()
        }
        TrapSpec::PowerLaw { .. } => {
            return Err(Error::UnsupportedTrap {
                operation: "build_spectrum",
                trap: trap.to_string(),
            })
        }
    };
    Ok(TrapSpectrum {
        trap: Some(*trap),
        levels,
        cutoff_energy: cutoff,
    })
}

/// `C(n + d - 1, d - 1)`: ways to split `n` quanta among `d` axes.
pub fn oscillator_degeneracy(n: u64, dim: u32) -> u64 {
    match dim {
        1 => 1,
        2 => n + 1,
        3 => (n + 1) * (n + 2) / 2,
        _ => unreachable!("validated dimension"),
    }
}

/// Representation counts of `m <= max` as `nx^2 + ny^2 + nz^2`, over all
/// integers when `signed`, else over positive integers. Only `m` with at
/// least one representation are returned.
fn square_sums(max: usize, signed: bool) -> Vec<(usize, u64)> {
    let mut r1 = vec![0u64; max + 1];
    let mut n = if signed { 0usize } else { 1 };
    while n * n <= max {
        r1[n * n] += if signed && n > 0 { 2 } else { 1 };
        n += 1;
    }
    let squares: Vec<(usize, u64)> = r1
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| (m, c))
        .collect();
    let convolve = |a: &[u64]| {
        let mut out = vec![0u64; max + 1];
        for (m, &ca) in a.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for &(sq, cs) in &squares {
                if m + sq > max {
                    break;
                }
                out[m + sq] += ca * cs;
            }
        }
        out
    };
    let r2 = convolve(&r1);
    let r3 = convolve(&r2);
    r3.into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .collect()
}

/// Weyl density of states of `trap` at phase-space energy `energy`.
pub fn density_of_states(trap: &TrapSpec, energy: f64) -> Result<f64> {
    trap.validate().map_err(Error::Invalid)?;
    if energy < 0.0 {
        return Err(Error::Invalid(format!("density of states needs energy >= 0, got {energy}")));
    }
    let (a, s) = trap.dos_law();
    Ok(if energy == 0.0 {
        if s < 1.0 {
            f64::INFINITY
        } else if s == 1.0 {
            a
        } else {
            0.0
        }
    } else {
        a * energy.powf(s - 1.0)
    })
}

/// Integrated Weyl state count below phase-space energy `energy`.
pub fn weyl_count(trap: &TrapSpec, energy: f64) -> f64 {
    let (a, s) = trap.dos_law();
    if energy <= 0.0 {
        0.0
    } else {
        a * energy.powf(s) / s
    }
}

/// `S_k = sum_i g_i exp(-k beta eps_i)` and `D_k = sum_i g_i beta eps_i exp(-k beta eps_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumPair {
    pub s: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothSums {
    pub k: u32,
    pub direct: SumPair,
    /// Density-of-states evaluation, when the trap has a Weyl law.
    pub integral: Option<SumPair>,
}

impl SmoothSums {
    /// Relative gap between the direct and integral values of `S_k`.
    pub fn relative_gap(&self) -> Option<f64> {
        self.integral
            .map(|i| ((i.s - self.direct.s) / self.direct.s).abs())
    }
}

/// Direct truncated sums over `spectrum`, plus the density-of-states integral
/// when the spectrum came from a known trap. Fails if the Weyl estimate of the
/// Boltzmann weight beyond the cutoff exceeds `tail_tol`.
pub fn smooth_sums(spectrum: &TrapSpectrum, beta: f64, k: u32, tail_tol: f64) -> Result<SmoothSums> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
    }
    if !(1..=3).contains(&k) {
        return Err(Error::Invalid(format!("k must be 1, 2 or 3, got {k}")));
    }
    let kb = k as f64 * beta;
    let mut s = 0.0;
    let mut d = 0.0;
    for l in &spectrum.levels {
        let w = l.weight() * (-kb * l.energy).exp();
        s += w;
        d += w * beta * l.energy;
    }
    let integral = spectrum.trap.map(|t| integral_sums(&t, beta, k));
    if let Some(trap) = spectrum.trap {
        let (_, exponent) = trap.dos_law();
        let tail = gamma_ur(exponent, kb * (spectrum.cutoff_energy + trap.zero_point()));
        if tail > tail_tol {
            return Err(Error::CutoffExhausted {
                tail_tol,
                max_energy: spectrum.cutoff_energy,
            });
        }
    }
    Ok(SmoothSums {
        k,
        direct: SumPair { s, d },
        integral,
    })
}

/// `S_k` and `D_k` from the Weyl density of states, with energies referred to
/// the trap's lowest quantum level like the spectrum itself.
pub fn integral_sums(trap: &TrapSpec, beta: f64, k: u32) -> SumPair {
    let (a, s) = trap.dos_law();
    let kb = k as f64 * beta;
    let zp = trap.zero_point();
    let shift = (kb * zp).exp();
    let i0 = a * gamma(s) * kb.powf(-s);
    let i1 = a * gamma(s + 1.0) * kb.powf(-s - 1.0);
    SumPair {
        s: shift * i0,
        d: shift * beta * (i1 - zp * i0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_pbc(max: i64) -> Vec<(i64, u64)> {
        let mut counts = std::collections::BTreeMap::new();
        let r = (max as f64).sqrt() as i64 + 1;
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let m = x * x + y * y + z * z;
                    if m <= max {
                        *counts.entry(m).or_insert(0u64) += 1;
                    }
                }
            }
        }
        counts.into_iter().collect()
    }

    #[test]
    fn pbc_shells_match_enumeration() {
        let spec = build_spectrum(&TrapSpec::box_pbc(), &CutoffPolicy::Fixed { energy: 60.0 }, 1.0).unwrap();
        let brute = brute_pbc(60);
        assert_eq!(spec.len(), brute.len());
        for (l, (m, g)) in spec.levels.iter().zip(brute) {
            assert_eq!(l.energy, m as f64);
            assert_eq!(l.degeneracy, g);
        }
        assert_eq!(spec.levels[0], Level::new(0.0, 1));
        assert_eq!(spec.levels[1], Level::new(1.0, 6));
        assert_eq!(spec.levels[2], Level::new(2.0, 12));
    }

    #[test]
    fn pbc_skips_three_square_exceptions() {
        // 7 = 4^a (8b + 7) has no representation
        let spec = build_spectrum(&TrapSpec::box_pbc(), &CutoffPolicy::Fixed { energy: 10.0 }, 1.0).unwrap();
        assert!(spec.levels.iter().all(|l| l.energy != 7.0));
    }

    #[test]
    fn hard_box_starts_at_one_one_one() {
        let spec = build_spectrum(&TrapSpec::box_hard(), &CutoffPolicy::Fixed { energy: 3.0 }, 1.0).unwrap();
        assert_eq!(spec.levels[0], Level::new(0.75, 1));
        // (1,1,2) and permutations
        assert_eq!(spec.levels[1], Level::new(1.5, 3));
    }

    #[test]
    fn harmonic_degeneracies() {
        let trap = TrapSpec::harmonic_natural(3);
        let spec = build_spectrum(&trap, &CutoffPolicy::Fixed { energy: 5.0 }, 1.0).unwrap();
        let g: Vec<u64> = spec.levels.iter().map(|l| l.degeneracy).collect();
        assert_eq!(g, vec![1, 3, 6, 10, 15, 21]);
        assert_eq!(spec.ground_energy(), 0.0);
    }

    #[test]
    fn cutoff_too_small_reports_minimum() {
        let err = build_spectrum(&TrapSpec::box_pbc(), &CutoffPolicy::Fixed { energy: 1.0 }, 100.0).unwrap_err();
        match err {
            Error::CutoffTooSmall { states, min_cutoff, .. } => {
                assert_eq!(states, 7.0);
                assert!(min_cutoff > 1.0);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn general_power_law_has_no_spectrum() {
        let trap = TrapSpec::PowerLaw { gamma: 3.0, dim: 3 };
        assert!(matches!(
            build_spectrum(&trap, &CutoffPolicy::Fixed { energy: 5.0 }, 1.0),
            Err(Error::UnsupportedTrap { .. })
        ));
    }

    #[test]
    fn dos_exponents() {
        let box_law = TrapSpec::PowerLaw { gamma: f64::INFINITY, dim: 3 }.dos_law();
        assert_eq!(box_law.1, 1.5);
        assert_eq!(TrapSpec::PowerLaw { gamma: 2.0, dim: 3 }.dos_law().1, 3.0);
        assert_eq!(TrapSpec::PowerLaw { gamma: 2.0, dim: 2 }.dos_law().1, 2.0);
    }

    #[test]
    fn power_law_harmonic_prefactor_matches_oscillator() {
        // V = r^2 with m = 1 is an oscillator with hbar omega = sqrt 2
        for dim in 1..=3 {
            let pl = TrapSpec::PowerLaw { gamma: 2.0, dim }.dos_law();
            let ho = TrapSpec::HarmonicIso { dim, quantum: std::f64::consts::SQRT_2 }.dos_law();
            assert!((pl.0 - ho.0).abs() < 1e-14 * ho.0, "dim {dim}: {pl:?} vs {ho:?}");
        }
    }

    #[test]
    fn dos_by_quadrature_of_phase_space() {
        // rho(E) = d/dE of phase-space volume / (2 pi)^d; check the 1D
        // power law numerically: volume = int dx 2 sqrt(2(E - |x|^g))
        let g = 3.0;
        let trap = TrapSpec::PowerLaw { gamma: g, dim: 1 };
        let volume = |e: f64| {
            let xmax = e.powf(1.0 / g);
            let n = 20000;
            let h = xmax / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) * h;
                acc += 2.0 * (2.0 * (e - x.powf(g))).max(0.0).sqrt() * h;
            }
            2.0 * acc / (2.0 * std::f64::consts::PI)
        };
        let e = 2.0;
        let de = 1e-3;
        let numeric = (volume(e + de) - volume(e - de)) / (2.0 * de);
        let exact = density_of_states(&trap, e).unwrap();
        assert!((numeric - exact).abs() < 1e-3 * exact, "{numeric} vs {exact}");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["box3d_pbc", "box3d_hard", "harmonic_iso(2)", "power_law(2.5,3)", "power_law(inf,3)"] {
            let t: TrapSpec = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        assert!("power_law(-1,3)".parse::<TrapSpec>().is_err());
        assert!("power_law(2,4)".parse::<TrapSpec>().is_err());
    }

    #[test]
    fn single_and_two_level_sums() {
        let one = TrapSpectrum::from_levels(vec![Level::new(0.0, 1)]).unwrap();
        for k in 1..=3 {
            let s = smooth_sums(&one, 1.3, k, 1.0).unwrap();
            assert_eq!(s.direct, SumPair { s: 1.0, d: 0.0 });
            assert!(s.integral.is_none());
        }
        let eps = 0.7;
        let two = TrapSpectrum::from_levels(vec![Level::new(0.0, 1), Level::new(eps, 1)]).unwrap();
        let s = smooth_sums(&two, 1.0, 1, 1.0).unwrap();
        assert!((s.direct.s - (1.0 + (-eps).exp())).abs() < 1e-15);
        assert!((s.direct.d - eps * (-eps).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsorted_levels() {
        assert!(TrapSpectrum::from_levels(vec![Level::new(1.0, 1), Level::new(1.0, 2)]).is_err());
        assert!(TrapSpectrum::from_levels(vec![Level::new(0.0, 0)]).is_err());
    }
}
