//! CSV and JSON artifacts.
//!
//! Floats are written in Rust's shortest round-trip form (`{:?}`), so the
//! same inputs always produce byte-identical files and every value parses
//! back exactly.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

use crate::bcs::BcsSweep;
use crate::capacity::SweepTable;
use crate::config::RawConfig;
use crate::error::Result;
use crate::expansion::TheoremRow;
use crate::spectrum::TrapSpectrum;

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut s = String::from("T,T_norm,mu,E,C_bits\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(r.temperature),
            fmt_f64(r.normalized),
            fmt_f64(r.mu),
            fmt_f64(r.energy),
            fmt_f64(r.capacity)
        );
    }
    s
}

pub fn bcs_csv(sweep: &BcsSweep) -> String {
    let mut s = String::from("T,T_over_Tf,mu,Delta,E,C_bits,converged\n");
    for r in &sweep.table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.temperature),
            fmt_f64(r.normalized),
            fmt_f64(r.mu),
            fmt_f64(r.gap.unwrap_or(f64::NAN)),
            fmt_f64(r.energy),
            fmt_f64(r.capacity),
            r.converged
        );
    }
    s
}

/// Two sweeps on their own normalized axes, row-aligned by grid index.
pub fn compare_csv(bose: &SweepTable, fermi: &SweepTable) -> String {
    let mut s = String::from("T_over_Tc,C_bose_bits,T_over_Tf,C_fermi_bits\n");
    let n = bose.rows.len().max(fermi.rows.len());
    let cell = |r: Option<f64>| r.map(fmt_f64).unwrap_or_default();
    for i in 0..n {
        let b = bose.rows.get(i);
        let f = fermi.rows.get(i);
        let _ = writeln!(
            s,
            "{},{},{},{}",
            cell(b.map(|r| r.normalized)),
            cell(b.map(|r| r.capacity)),
            cell(f.map(|r| r.normalized)),
            cell(f.map(|r| r.capacity))
        );
    }
    s
}

pub fn spectrum_csv(spectrum: &TrapSpectrum) -> String {
    let mut s = String::from("index,energy,degeneracy\n");
    for (i, l) in spectrum.levels.iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", i, fmt_f64(l.energy), l.degeneracy);
    }
    s
}

pub fn theorem_csv(rows: &[TheoremRow]) -> String {
    let mut s = String::from(
        "beta,x,alpha2_bose,alpha2_bose_mean_energy_form,alpha2_gap,printed_beta2_correction,series_gap_bits,direct_gap_bits,in_scope,fermions_ahead\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.beta),
            fmt_f64(r.x),
            fmt_f64(r.alpha2_bose),
            fmt_f64(r.alpha2_bose_mean_energy_form),
            fmt_f64(r.alpha2_gap),
            fmt_f64(r.printed_beta2_correction),
            fmt_f64(r.series_gap),
            r.direct_gap.map(fmt_f64).unwrap_or_default(),
            r.in_scope,
            r.fermions_ahead
        );
    }
    s
}

/// JSON artifact: the configuration that produced it plus a payload.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub config: &'a RawConfig,
    #[serde(flatten)]
    pub payload: T,
}

pub fn report_json<T: Serialize>(config: &RawConfig, payload: T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Report { config, payload })?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(1.0), "1.0");
    }
}
