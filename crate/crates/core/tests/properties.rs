//! Randomized invariants of the solvers and capacities.

use gce_capacity::capacity::capacity;
use gce_capacity::spectrum::{Level, TrapSpectrum};
use gce_capacity::statistics::{particle_count, solve_state, Statistics};
use proptest::prelude::*;

fn spectrum() -> impl Strategy<Value = TrapSpectrum> {
    prop::collection::btree_map(0u32..2000, 1u64..12, 2..20).prop_map(|m| {
        TrapSpectrum::from_levels(m.into_iter().map(|(k, g)| Level::new(k as f64 / 100.0, g)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bose_state_is_consistent(spec in spectrum(), t in 0.05f64..50.0, frac in 0.01f64..5.0) {
        let n = frac * spec.total_states();
        let st = solve_state(&spec, 1.0 / t, n, Statistics::Bose, 1, 1e-10).unwrap();
        prop_assert!(st.mu < spec.ground_energy());
        prop_assert!(st.occupations.iter().all(|&x| x >= 0.0));
        let count = particle_count(&spec, 1.0 / t, st.mu, Statistics::Bose, 1).unwrap();
        prop_assert!((count - n).abs() <= 1e-8 * n);
        prop_assert!(capacity(&spec, &st) >= 0.0);
    }

    #[test]
    fn fermi_state_is_consistent(spec in spectrum(), t in 0.05f64..50.0, frac in 0.01f64..0.95, g in 1u32..3) {
        let n = frac * g as f64 * spec.total_states();
        let st = solve_state(&spec, 1.0 / t, n, Statistics::Fermi, g, 1e-10).unwrap();
        prop_assert!(st.occupations.iter().all(|&x| (0.0..=g as f64).contains(&x)));
        let count: f64 = spec.levels.iter().zip(&st.occupations).map(|(l, x)| l.weight() * x).sum();
        prop_assert!((count - n).abs() <= 1e-8 * n);
    }

    #[test]
    fn capacity_grows_with_temperature(spec in spectrum(), t in 0.05f64..20.0, frac in 0.05f64..0.9) {
        let n = frac * spec.total_states();
        for stats in [Statistics::Bose, Statistics::Fermi] {
            let c = |temp: f64| {
                let st = solve_state(&spec, 1.0 / temp, n, stats, 1, 1e-12).unwrap();
                capacity(&spec, &st)
            };
            let (lo, hi) = (c(t), c(1.2 * t));
            prop_assert!(hi >= lo - 1e-9 * lo.abs(), "{stats}: C({t}) = {lo}, C({}) = {hi}", 1.2 * t);
        }
    }

    #[test]
    fn capacity_grows_with_particles(spec in spectrum(), t in 0.05f64..20.0, frac in 0.05f64..0.4) {
        let n = frac * spec.total_states();
        let c = |m: f64| {
            let st = solve_state(&spec, 1.0 / t, m, Statistics::Bose, 1, 1e-12).unwrap();
            capacity(&spec, &st)
        };
        prop_assert!(c(1.5 * n) > c(n));
    }
}
