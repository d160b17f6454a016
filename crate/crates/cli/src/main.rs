//! `gcecap`: temperature sweeps, series checks and spectrum dumps.
//!
//! Exit status: 0 on success, 2 for an invalid configuration, 3 for a
//! numerical failure (including any BCS row that did not converge; its
//! artifacts are still written), 1 for I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gce_capacity::bcs::{bcs_sweep_full, BcsSweep};
use gce_capacity::capacity::{capacity, spectrum_for, sweep};
use gce_capacity::config::{validate_config, BcsSettings, ConfigError, RawConfig, RunConfig};
use gce_capacity::expansion::{expansion_report, series_capacity_with, theorem_check, CoefficientSet};
use gce_capacity::output::{
    bcs_csv, compare_csv, fmt_f64, report_json, spectrum_csv, sweep_csv, theorem_csv, write_text,
};
use gce_capacity::statistics::{solve_state, Statistics};
use gce_capacity::{Error, SweepTable};

#[derive(Parser)]
#[command(name = "gcecap", version, about = "Channel capacities of trapped bosons and fermions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Boson capacity sweep (statistics = bose).
    SweepBose,
    /// Noninteracting fermion capacity sweep (statistics = fermi).
    SweepFermi,
    /// Mean-field BCS sweep; delta_eps and v0 default to hbar^2/mL^2 and 1e-6 hbar^2/mL^2.
    SweepBcs,
    /// Fermion and boson sweeps, each on its own normalized grid.
    Compare,
    /// Third-order high-temperature series against the direct capacities.
    ExpansionReport,
    /// Fermion-minus-boson capacity and the alpha2 sign per temperature.
    TheoremCheck,
    /// Levels of the truncated spectrum used by the configuration.
    SpectrumDump,
}

#[derive(Args)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// box3d_pbc, box3d_hard, harmonic3d, harmonic_iso(d) or power_law(gamma,d).
    #[arg(long, global = true)]
    trap: Option<String>,
    /// Box side (or oscillator length) in units of the reference side.
    #[arg(long, global = true)]
    length: Option<String>,
    /// Oscillator quantum in box units.
    #[arg(long = "hbar-omega", global = true)]
    hbar_omega: Option<String>,
    /// Average particle number.
    #[arg(long = "N", global = true)]
    particles: Option<String>,
    /// Spin degeneracy.
    #[arg(long, global = true)]
    g: Option<String>,
    /// Comma-separated temperatures (overrides the grid).
    #[arg(long, global = true)]
    temperatures: Option<String>,
    /// Grid start, in units of T_c (bose) or T_f.
    #[arg(long = "grid-min", global = true)]
    grid_min: Option<String>,
    /// Grid end, in units of T_c (bose) or T_f.
    #[arg(long = "grid-max", global = true)]
    grid_max: Option<String>,
    #[arg(long = "grid-points", global = true)]
    grid_points: Option<String>,
    /// log or linear.
    #[arg(long = "grid-spacing", global = true)]
    grid_spacing: Option<String>,
    /// Adaptive cutoff tail tolerance.
    #[arg(long = "tail-tol", global = true)]
    tail_tol: Option<String>,
    /// Largest cutoff energy tried.
    #[arg(long = "max-cutoff", global = true)]
    max_cutoff: Option<String>,
    /// Relative particle-count tolerance.
    #[arg(long = "tol-n", global = true)]
    tol_n: Option<String>,
    /// BCS shell half-width.
    #[arg(long = "delta-eps", global = true)]
    delta_eps: Option<String>,
    /// BCS coupling.
    #[arg(long, global = true)]
    v0: Option<String>,
    /// Count both spin species in BCS sums (true or false).
    #[arg(long = "spin-pairs", global = true)]
    spin_pairs: Option<String>,
    /// Any config key, as key=value; repeatable, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

enum Failure {
    Config(Vec<String>),
    Numeric(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.violations)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => Failure::Config(c.violations),
            Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn raw_config(common: &Common) -> Result<RawConfig, Failure> {
    let mut raw = match &common.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    let flags = [
        ("trap", &common.trap),
        ("length", &common.length),
        ("hbar_omega", &common.hbar_omega),
        ("N", &common.particles),
        ("g", &common.g),
        ("temperatures", &common.temperatures),
        ("grid_min", &common.grid_min),
        ("grid_max", &common.grid_max),
        ("grid_points", &common.grid_points),
        ("grid_spacing", &common.grid_spacing),
        ("tail_tol", &common.tail_tol),
        ("max_cutoff", &common.max_cutoff),
        ("tol_n", &common.tol_n),
        ("delta_eps", &common.delta_eps),
        ("v0", &common.v0),
        ("spin_pairs", &common.spin_pairs),
    ];
    let mut errors = Vec::new();
    for (key, value) in flags {
        if let Some(v) = value {
            if let Err(e) = raw.set(key, v) {
                errors.push(e);
            }
        }
    }
    for pair in &common.set {
        match pair.split_once('=') {
            Some((k, v)) => {
                if let Err(e) = raw.set(k, v) {
                    errors.push(e);
                }
            }
            None => errors.push(format!("--set expects key=value, got {pair:?}")),
        }
    }
    if errors.is_empty() {
        Ok(raw)
    } else {
        Err(Failure::Config(errors))
    }
}

fn with_statistics(raw: &RawConfig, stats: &str) -> RawConfig {
    let mut r = raw.clone();
    r.statistics = Some(stats.into());
    r
}

fn write(out: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    let path = out.join(name);
    write_text(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn summarize_sweep(label: &str, table: &SweepTable) {
    let axis = if label == "bose" { "T_c" } else { "T_f" };
    println!(
        "{label}: N = {}, {} rows, {axis} = {:.6}",
        table.particles,
        table.rows.len(),
        table.normalizer
    );
    if let (Some(first), Some(last)) = (table.rows.first(), table.rows.last()) {
        println!(
            "  C from {:.6} bits at T/{axis} = {:.4} to {:.6} bits at T/{axis} = {:.4}",
            first.capacity, first.normalized, last.capacity, last.normalized
        );
    }
    match table.inflection {
        Some(i) => println!(
            "  inflection T* = {:.6} (T*/{axis} = {:.4}), confidence {:.3}, refined {}",
            i.temperature,
            i.temperature / table.normalizer,
            i.confidence,
            i.refined
        ),
        None => println!("  no convex-to-concave change detected"),
    }
}

fn run_sweep(raw: &RawConfig, stats: &str, out: &Path) -> Result<(), Failure> {
    let cfg = validate_config(&with_statistics(raw, stats))?;
    let table = sweep(&cfg)?;
    let csv = write(out, &format!("sweep_{stats}.csv"), &sweep_csv(&table))?;
    let json = report_json(
        &cfg.to_raw(),
        json!({ "normalizer": table.normalizer, "inflection": table.inflection }),
    )?;
    write(out, &format!("sweep_{stats}.json"), &json)?;
    summarize_sweep(stats, &table);
    println!("  wrote {}", csv.display());
    Ok(())
}

fn run_bcs(raw: &RawConfig, out: &Path) -> Result<(), Failure> {
    let mut raw = with_statistics(raw, "bcs");
    let reference = BcsSettings::reference();
    raw.delta_eps.get_or_insert(reference.shell_half_width);
    raw.v0.get_or_insert(reference.coupling);
    let cfg = validate_config(&raw)?;
    let run: BcsSweep = bcs_sweep_full(&cfg)?;
    let csv = write(out, "sweep_bcs.csv", &bcs_csv(&run))?;
    let rows: Vec<_> = run
        .solutions
        .iter()
        .zip(&run.table.rows)
        .map(|(s, r)| match s {
            Some(s) => json!({
                "T": r.temperature,
                "converged": s.converged,
                "gap_residual": s.gap_residual,
                "count_residual": s.count_residual,
                "below_resolution": s.below_resolution,
                "shell_levels": s.shell.len(),
            }),
            None => json!({ "T": r.temperature, "converged": false }),
        })
        .collect();
    let json = report_json(
        &cfg.to_raw(),
        json!({
            "normalizer": run.table.normalizer,
            "inflection": run.table.inflection,
            "zero_temperature_gap": run.zero_temperature_gap,
            "gap_vanishes_at": run.gap_vanishes_at,
            "failures": run.failures,
            "rows": rows,
        }),
    )?;
    write(out, "sweep_bcs.json", &json)?;
    summarize_sweep("bcs", &run.table);
    let max_gap = run.table.rows.iter().filter_map(|r| r.gap).fold(0.0, f64::max);
    let max_count = run
        .solutions
        .iter()
        .flatten()
        .map(|s| s.count_residual.abs())
        .fold(0.0, f64::max);
    let max_gap_res = run.solutions.iter().flatten().map(|s| s.gap_residual).fold(0.0, f64::max);
    println!(
        "  zero-temperature gap {:.4e}, largest gap on grid {:.4e}, gap closes at {}",
        run.zero_temperature_gap,
        max_gap,
        run.gap_vanishes_at.map_or("none".into(), fmt_f64)
    );
    println!("  residual maxima: count {max_count:.3e}, gap equation {max_gap_res:.3e}");
    println!("  wrote {}", csv.display());
    let bad = run.table.rows.iter().filter(|r| !r.converged).count();
    if bad > 0 {
        return Err(Failure::Numeric(format!("{bad} BCS rows did not converge")));
    }
    Ok(())
}

fn run_compare(raw: &RawConfig, out: &Path) -> Result<(), Failure> {
    let bose_cfg = validate_config(&with_statistics(raw, "bose"))?;
    let fermi_cfg = validate_config(&with_statistics(raw, "fermi"))?;
    let bose = sweep(&bose_cfg)?;
    let fermi = sweep(&fermi_cfg)?;
    let csv = write(out, "compare.csv", &compare_csv(&bose, &fermi))?;
    let json = report_json(
        &fermi_cfg.to_raw(),
        json!({
            "bose": { "normalizer": bose.normalizer, "inflection": bose.inflection },
            "fermi": { "normalizer": fermi.normalizer, "inflection": fermi.inflection },
        }),
    )?;
    write(out, "compare.json", &json)?;
    summarize_sweep("bose", &bose);
    summarize_sweep("fermi", &fermi);
    println!("  wrote {}", csv.display());
    Ok(())
}

fn run_expansion(raw: &RawConfig, out: &Path) -> Result<(), Failure> {
    let cfg: RunConfig = validate_config(&with_statistics(raw, "bose"))?;
    let spectrum = spectrum_for(&cfg)?;
    let mut csv = String::from(
        "T,x,S1,S2,S3,D1,D2,D3,alpha2_bose,alpha3,alpha3_printed,series_bose_bits,series_fermi_bits,direct_bose_bits,direct_fermi_bits,rel_err_bose,rel_err_fermi,rel_err_bose_printed,rel_err_fermi_printed,high_temperature\n",
    );
    let mut reports = Vec::new();
    let mut worst: f64 = 0.0;
    for &t in &cfg.temperatures {
        let beta = 1.0 / t;
        let r = expansion_report(&spectrum, beta, cfg.particles, 1.0)?;
        let direct = |stats| -> Result<f64, Error> {
            Ok(capacity(&spectrum, &solve_state(&spectrum, beta, cfg.particles, stats, 1, cfg.tol_n_rel)?))
        };
        let (db, df) = (direct(Statistics::Bose)?, direct(Statistics::Fermi)?);
        let printed = |stats| series_capacity_with(&r, CoefficientSet::Printed, cfg.particles, stats);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        if r.high_temperature {
            worst = worst.max(rel(r.series_bose, db)).max(rel(r.series_fermi, df));
        }
        let cells = [
            t,
            r.x,
            r.sums.s[0],
            r.sums.s[1],
            r.sums.s[2],
            r.sums.d[0],
            r.sums.d[1],
            r.sums.d[2],
            r.derived.alpha_bose[1],
            r.derived.alpha_bose[2],
            r.printed.alpha_bose[2],
            r.series_bose,
            r.series_fermi,
            db,
            df,
            rel(r.series_bose, db),
            rel(r.series_fermi, df),
            rel(printed(Statistics::Bose), db),
            rel(printed(Statistics::Fermi), df),
        ];
        let line: Vec<String> = cells.iter().map(|&x| fmt_f64(x)).collect();
        csv.push_str(&line.join(","));
        csv.push_str(&format!(",{}\n", r.high_temperature));
        reports.push(r);
    }
    let path = write(out, "expansion.csv", &csv)?;
    write(out, "expansion.json", &report_json(&cfg.to_raw(), json!({ "reports": reports }))?)?;
    let high = reports.iter().filter(|r| r.high_temperature).count();
    println!(
        "expansion: N = {}, {} temperatures, {high} with x < 0.3",
        cfg.particles,
        reports.len()
    );
    if high > 0 {
        println!("  largest series relative error where x < 0.3: {worst:.3e}");
    }
    println!("  wrote {}", path.display());
    Ok(())
}

fn run_theorem(raw: &RawConfig, out: &Path) -> Result<(), Failure> {
    let cfg = validate_config(&with_statistics(raw, "fermi"))?;
    let betas: Vec<f64> = cfg.temperatures.iter().map(|t| 1.0 / t).collect();
    let rows = theorem_check(&cfg.trap, &betas, cfg.particles, cfg.tail_tol)?;
    let path = write(out, "theorem.csv", &theorem_csv(&rows))?;
    write(out, "theorem.json", &report_json(&cfg.to_raw(), json!({ "rows": rows }))?)?;
    let in_scope = rows.first().is_some_and(|r| r.in_scope);
    let ahead = rows.iter().filter(|r| r.fermions_ahead).count();
    let max_alpha2 = rows.iter().map(|r| r.alpha2_bose).fold(f64::NEG_INFINITY, f64::max);
    println!(
        "theorem: trap {}, systematic (1/gamma + 1/2 > 1/d): {in_scope}",
        cfg.trap
    );
    println!("  fermions ahead at {ahead} of {} temperatures; max alpha2(bose) = {max_alpha2:.4e}", rows.len());
    println!(
        "  verdict: {}",
        if in_scope && ahead == rows.len() {
            "fermion capacity exceeds boson capacity at every temperature"
        } else {
            "not established at every temperature"
        }
    );
    println!("  wrote {}", path.display());
    Ok(())
}

fn run_spectrum(raw: &RawConfig, out: &Path) -> Result<(), Failure> {
    let cfg = validate_config(raw)?;
    let spectrum = spectrum_for(&cfg)?;
    let path = write(out, "spectrum.csv", &spectrum_csv(&spectrum))?;
    println!(
        "spectrum: trap {}, {} levels, {} states, cutoff {}",
        cfg.trap,
        spectrum.len(),
        spectrum.total_states(),
        fmt_f64(spectrum.cutoff_energy)
    );
    println!("  wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let raw = raw_config(&cli.common)?;
    let out = &cli.common.out;
    match cli.command {
        Command::SweepBose => run_sweep(&raw, "bose", out),
        Command::SweepFermi => run_sweep(&raw, "fermi", out),
        Command::SweepBcs => run_bcs(&raw, out),
        Command::Compare => run_compare(&raw, out),
        Command::ExpansionReport => run_expansion(&raw, out),
        Command::TheoremCheck => run_theorem(&raw, out),
        Command::SpectrumDump => run_spectrum(&raw, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(violations)) => {
            eprintln!("error: invalid configuration");
            for v in violations {
                eprintln!("  {v}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
