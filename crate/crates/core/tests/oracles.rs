//! Library results against independent slow evaluations.

use std::f64::consts::LN_2;

use approx::assert_relative_eq;
use gce_capacity::capacity::{capacity, grand_potential_entropy};
use gce_capacity::expansion::{expansion_report, series_capacity_with, CoefficientSet};
use gce_capacity::spectrum::{build_spectrum, weyl_count, CutoffPolicy, Level, TrapSpec, TrapSpectrum};
use gce_capacity::statistics::{critical_temperatures, solve_mu, solve_state, Statistics};

/// Plain bisection on the particle count, 200 halvings.
fn bisect_mu(spec: &TrapSpectrum, beta: f64, n: f64, stats: Statistics, spin: u32) -> f64 {
    let count = |mu: f64| -> f64 {
        spec.levels
            .iter()
            .map(|l| {
                let x = beta * (l.energy - mu);
                l.degeneracy as f64
                    * match stats {
                        Statistics::Bose => 1.0 / (x.exp() - 1.0),
                        Statistics::Fermi => spin as f64 / (x.exp() + 1.0),
                    }
            })
            .sum()
    };
    let e0 = spec.levels[0].energy;
    let (mut lo, mut hi) = match stats {
        Statistics::Bose => (e0 - 1e4, e0 - 1e-300),
        Statistics::Fermi => (e0 - 1e4, spec.levels.last().unwrap().energy + 1e4),
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn pbc(cutoff: f64) -> TrapSpectrum {
    build_spectrum(&TrapSpec::box_pbc(), &CutoffPolicy::Fixed { energy: cutoff }, 1.0).unwrap()
}

#[test]
fn mu_matches_bisection() {
    let spec = pbc(400.0);
    for &(t, n) in &[(2.0, 100.0), (5.0, 100.0), (20.0, 500.0)] {
        for stats in [Statistics::Bose, Statistics::Fermi] {
            let mu = solve_mu(&spec, 1.0 / t, n, stats, 1, 1e-12).unwrap();
            let oracle = bisect_mu(&spec, 1.0 / t, n, stats, 1);
            assert!((mu - oracle).abs() < 1e-9 * mu.abs().max(1.0), "{stats} T={t}: {mu} vs {oracle}");
        }
    }
}

fn two_level() -> TrapSpectrum {
    TrapSpectrum::from_levels(vec![Level::new(0.0, 1), Level::new(1.0, 1)]).unwrap()
}

#[test]
fn two_level_bose_fock_entropy() {
    let spec = two_level();
    let st = solve_state(&spec, 1.0, 1.0, Statistics::Bose, 1, 1e-14).unwrap();
    // occupation cutoff 60 per mode; the tail beyond it is below 1e-15
    let q0 = st.mu.exp();
    let q1 = (st.mu - 1.0).exp();
    assert!(q0.powi(61) < 1e-12);
    let mut log_w = Vec::new();
    for a in 0..=60 {
        for b in 0..=60 {
            log_w.push(a as f64 * q0.ln() + b as f64 * q1.ln());
        }
    }
    let z: f64 = log_w.iter().map(|l| l.exp()).sum();
    let s: f64 = log_w.iter().map(|l| l.exp() / z).map(|p| -p * p.log2()).sum();
    assert_relative_eq!(capacity(&spec, &st), s, max_relative = 1e-8);
}

#[test]
fn two_level_fermi_fock_entropy() {
    let spec = two_level();
    let st = solve_state(&spec, 1.0, 1.0, Statistics::Fermi, 1, 1e-14).unwrap();
    let w: Vec<f64> = [(0, 0), (1, 0), (0, 1), (1, 1)]
        .iter()
        .map(|&(a, b)| ((a + b) as f64 * st.mu - b as f64).exp())
        .collect();
    let z: f64 = w.iter().sum();
    let s: f64 = w.iter().map(|x| x / z).map(|p| -p * p.log2()).sum();
    assert_relative_eq!(capacity(&spec, &st), s, max_relative = 1e-12);
}

#[test]
fn entropy_from_grand_potential() {
    let spec = pbc(400.0);
    for stats in [Statistics::Bose, Statistics::Fermi] {
        for t in [0.5, 3.0, 10.0] {
            let st = solve_state(&spec, 1.0 / t, 100.0, stats, 1, 1e-12).unwrap();
            assert_relative_eq!(capacity(&spec, &st), grand_potential_entropy(&spec, &st), max_relative = 1e-6);
        }
    }
}

/// `S = -d(Omega)/dT` by central differences, in bits.
#[test]
fn entropy_from_temperature_derivative() {
    let spec = pbc(400.0);
    let t = 6.0;
    let st = solve_state(&spec, 1.0 / t, 100.0, Statistics::Bose, 1, 1e-13).unwrap();
    let omega = |temp: f64| -> f64 {
        spec.levels
            .iter()
            .map(|l| l.degeneracy as f64 * temp * (-((st.mu - l.energy) / temp).exp()).ln_1p())
            .sum()
    };
    let h = 1e-4;
    let s = -(omega(t + h) - omega(t - h)) / (2.0 * h) / LN_2;
    assert_relative_eq!(capacity(&spec, &st), s, max_relative = 1e-7);
}

#[test]
fn printed_coefficients_miss_fourth_order_scaling() {
    let spec = pbc(2500.0);
    let tc = critical_temperatures(&TrapSpec::box_pbc(), 100.0, 1).unwrap().bec;
    let beta = 1.0 / (3.0 * tc);
    let report = expansion_report(&spec, beta, 100.0, 1e-9).unwrap();
    let residual = |set, n: f64| {
        let st = solve_state(&spec, beta, n, Statistics::Bose, 1, 1e-14).unwrap();
        (series_capacity_with(&report, set, n, Statistics::Bose) - capacity(&spec, &st)).abs()
    };
    let derived = residual(CoefficientSet::Derived, 100.0) / residual(CoefficientSet::Derived, 10.0);
    let printed = residual(CoefficientSet::Printed, 100.0) / residual(CoefficientSet::Printed, 10.0);
    assert!((derived / 1e4 - 1.0).abs() < 0.1, "{derived}");
    // the printed alpha3 leaves an x^3 term
    assert!((printed / 1e3 - 1.0).abs() < 0.2, "{printed}");
}

#[test]
fn pbc_state_count_follows_weyl_law() {
    let spec = pbc(400.0);
    for e in [20.0, 50.0, 100.0, 400.0] {
        let exact = spec.states_below(e + 0.5);
        let weyl = weyl_count(&TrapSpec::box_pbc(), e + 0.5);
        assert!(((exact - weyl) / weyl).abs() < 0.05, "E={e}: {exact} vs {weyl}");
    }
}

#[test]
fn fermi_ground_state_energy_is_filled_sea() {
    // N = 93 fills the shells n^2 <= 8
    let spec = pbc(100.0);
    let st = solve_state(&spec, 200.0, 93.0, Statistics::Fermi, 1, 1e-12).unwrap();
    let mut left = 93u64;
    let mut sea = 0.0;
    for l in &spec.levels {
        let k = left.min(l.degeneracy);
        sea += k as f64 * l.energy;
        left -= k;
    }
    assert_relative_eq!(st.energy, sea, max_relative = 1e-12);
}
