use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use cavray_core::config::ScenarioConfig;
use cavray_core::experiment::ModelScale;
use cavray_core::optics::{derive_cavity_params, CavityParams};
use cavray_core::overlap::{
    fraction_into_cavity_mode, overlap_eta_analytic, overlap_eta_numeric, purcell_factor_2c, purcell_ratio,
    OverlapQuadrature,
};
use cavray_core::species::{SpeciesDatabase, SPECIES_DB_ENV};
use cavray_core::spectra::{scan_spectrum, spectral_overlap, SpectralProfile};
use cavray_core::validate::run_validation;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Cavity-enhanced Rayleigh scattering calculator.
#[derive(Debug, Parser)]
#[command(name = "cavray", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file; the reference campaign when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory to write the result into instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Seed for the Monte-Carlo and random-draw checks.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Gas-species table (CSV: name,molar_mass_g_per_mol,polarizability_A3).
    #[arg(long, global = true, env = SPECIES_DB_ENV)]
    species_db: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived resonator parameters.
    Cavity,
    /// Simulated transmission scan over the configured range.
    Scan,
    /// Dipole-cavity mode overlap and spectral overlaps.
    Overlap,
    /// Finesse dependence and free-space back-out.
    Enhance,
    /// Cavity-to-free-space ratio and the Purcell factor.
    Purcell,
    /// Scattering rates for a small cold ensemble.
    Forecast,
    /// Runs the oracle validation suite.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Table => "txt",
        }
    }
}

/// Rendered output of one subcommand.
struct Output {
    name: &'static str,
    body: String,
    ok: bool,
}

/// `quantity,value,unit` rows shared by the csv and table renderings.
struct Rows(Vec<(String, f64, &'static str)>);

impl Rows {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn push(&mut self, quantity: impl Into<String>, value: f64, unit: &'static str) {
        self.0.push((quantity.into(), value, unit));
    }

    fn csv(&self) -> String {
        let mut out = String::from("quantity,value,unit\n");
        for (q, v, u) in &self.0 {
            let _ = writeln!(out, "{q},{v:.11e},{u}");
        }
        out
    }

    fn table(&self) -> String {
        let width = self.0.iter().map(|(q, _, _)| q.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (q, v, u) in &self.0 {
            let _ = writeln!(out, "{q:width$}  {}  {u}", fmt_value(*v));
        }
        out
    }

    fn render(&self, format: Format, json: serde_json::Value) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Table => self.table(),
            Format::Json => pretty(&json),
        }
    }
}

fn fmt_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e5).contains(&a) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn cavity_rows(rows: &mut Rows, prefix: &str, p: &CavityParams) {
    rows.push(format!("{prefix}finesse"), p.finesse, "");
    rows.push(format!("{prefix}free_spectral_range"), p.free_spectral_range / 1e9, "GHz");
    rows.push(format!("{prefix}linewidth"), p.linewidth / 1e6, "MHz");
    rows.push(format!("{prefix}q_factor"), p.q_factor, "");
    rows.push(format!("{prefix}waist"), p.waist * 1e6, "um");
    rows.push(format!("{prefix}rayleigh_length"), p.rayleigh_length * 1e3, "mm");
    rows.push(format!("{prefix}transverse_mode_spacing"), p.transverse_mode_spacing / 1e9, "GHz");
    rows.push(format!("{prefix}mode_volume"), p.mode_volume, "m^3");
}

fn cavity(s: &ScenarioConfig, format: Format) -> Result<Output> {
    let geometric = derive_cavity_params(&s.geometry, s.pump.wavelength)?;
    let effective = s.cavity_params()?;
    let mut rows = Rows::new();
    rows.push("mirror_separation", geometric.mirror_separation * 1e3, "mm");
    rows.push("wavelength", geometric.wavelength * 1e9, "nm");
    cavity_rows(&mut rows, "", &geometric);
    if effective != geometric {
        cavity_rows(&mut rows, "effective.", &effective);
    }
    let body = rows.render(format, json!({ "geometric": geometric, "effective": effective }));
    Ok(Output { name: "cavity", body, ok: true })
}

fn scan(s: &ScenarioConfig, format: Format) -> Result<Output> {
    let cavity = s.cavity_params()?;
    let trace = scan_spectrum(&cavity, &s.scan.components, s.scan.range, s.scan.resolution, &s.scan.normalization)?;
    let body = match format {
        Format::Csv => trace.to_csv(),
        Format::Json => trace.to_json() + "\n",
        Format::Table => {
            let mut out = format!(
                "species {}, {} points from {:.3} to {:.3} GHz\n",
                trace.species.join(", "),
                trace.detunings.len(),
                s.scan.range.start / 1e9,
                s.scan.range.stop / 1e9
            );
            let fsr = cavity.free_spectral_range;
            let first = (s.scan.range.start / fsr).ceil() as i64;
            let last = (s.scan.range.stop / fsr).floor() as i64;
            out.push_str("order  centre [GHz]  peak      FWHM [MHz]\n");
            for order in first..=last {
                let centre = order as f64 * fsr;
                let index = nearest(&trace.detunings, centre);
                let fwhm = trace.peak_fwhm(centre).map_or("-".into(), |w| format!("{:.1}", w / 1e6));
                let _ = writeln!(out, "{order:>5}  {:>12.4}  {:<8.4}  {fwhm}", centre / 1e9, trace.signals[index]);
            }
            out
        }
    };
    Ok(Output { name: "scan", body, ok: true })
}

fn nearest(xs: &[f64], x: f64) -> usize {
    xs.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map_or(0, |(i, _)| i)
}

fn overlap(s: &ScenarioConfig, format: Format) -> Result<Output> {
    let cavity = s.cavity_params()?;
    let (lambda, w0) = (cavity.wavelength, cavity.waist);
    let z = s.overlap.z_over_z0 * cavity.rayleigh_length;
    let settings = OverlapQuadrature {
        weighting: s.overlap.weighting,
        ..OverlapQuadrature::default()
    };
    let analytic = overlap_eta_analytic(lambda, w0);
    let numeric = overlap_eta_numeric(lambda, w0, z, &settings)?;
    let mut rows = Rows::new();
    rows.push("eta_analytic", analytic, "");
    rows.push("eta_numeric", numeric, "");
    rows.push("eta_relative_difference", (numeric - analytic) / analytic, "");
    rows.push("plane_z_over_z0", s.overlap.z_over_z0, "");
    rows.push("fraction_into_cavity_mode", fraction_into_cavity_mode(lambda, w0), "");

    let profile = SpectralProfile::for_species(&s.gas, lambda)?;
    rows.push(format!("doppler_fwhm_observed.{}", s.gas.name), profile.doppler_fwhm_observed / 1e6, "MHz");
    let mut finesses: Vec<f64> = s.measurements.iter().map(|m| m.finesse).collect();
    if finesses.is_empty() {
        finesses.push(cavity.finesse);
    }
    let mut spectral = Vec::new();
    for f in finesses {
        let value = spectral_overlap(&profile, cavity.with_finesse(f)?.linewidth)?;
        rows.push(format!("spectral_overlap.F{f}"), value, "");
        spectral.push(json!({ "finesse": f, "overlap": value }));
    }
    let body = rows.render(
        format,
        json!({
            "eta_analytic": analytic,
            "eta_numeric": numeric,
            "plane_z": z,
            "fraction_into_cavity_mode": fraction_into_cavity_mode(lambda, w0),
            "doppler_fwhm_observed": profile.doppler_fwhm_observed,
            "spectral_overlap": spectral,
        }),
    );
    Ok(Output { name: "overlap", body, ok: true })
}

fn enhance(s: &ScenarioConfig, format: Format) -> Result<Output> {
    let report = s.enhancement_report(ModelScale::default())?;
    let body = match format {
        Format::Table => report.to_table(),
        Format::Json => pretty(&serde_json::to_value(&report)?),
        Format::Csv => {
            let mut out = String::from("finesse,outcoupling_share,overlap,measured_at_rest_W,measured_relative,predicted_relative,predicted_relative_symmetric\n");
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.11e}"));
            for e in &report.finesse_dependence {
                let _ = writeln!(
                    out,
                    "{:.11e},{:.11e},{},{},{},{:.11e},{:.11e}",
                    e.finesse,
                    e.outcoupling_share,
                    opt(e.overlap),
                    opt(e.measured_at_rest),
                    opt(e.measured_relative),
                    e.predicted_relative,
                    e.predicted_relative_symmetric
                );
            }
            out
        }
    };
    Ok(Output { name: "enhance", body, ok: true })
}

fn purcell(s: &ScenarioConfig, format: Format) -> Result<Output> {
    let c = s.cavity_params()?;
    let ratio = purcell_ratio(c.finesse, c.wavelength, c.waist);
    let two_c = purcell_factor_2c(c.q_factor, c.wavelength, c.mode_volume);
    let mut rows = Rows::new();
    rows.push("finesse", c.finesse, "");
    rows.push("waist", c.waist * 1e6, "um");
    rows.push("q_factor", c.q_factor, "");
    rows.push("mode_volume", c.mode_volume, "m^3");
    rows.push("cavity_to_dipole_mode_ratio", ratio, "");
    rows.push("purcell_2c", two_c, "");
    rows.push("relative_difference", (ratio - two_c) / two_c, "");
    let body = rows.render(
        format,
        json!({
            "finesse": c.finesse,
            "waist": c.waist,
            "q_factor": c.q_factor,
            "mode_volume": c.mode_volume,
            "cavity_to_dipole_mode_ratio": ratio,
            "purcell_2c": two_c,
            "relative_difference": (ratio - two_c) / two_c,
        }),
    );
    Ok(Output { name: "purcell", body, ok: true })
}

fn forecast(s: &ScenarioConfig, format: Format) -> Result<Output> {
    let r = s.forecast_report(ModelScale::default())?;
    let mut rows = Rows::new();
    rows.push("anchor_photon_rate", r.anchor_photon_rate, "1/s");
    rows.push("anchor_rate_per_particle", r.anchor_rate_per_particle, "1/s");
    rows.push("molecules", r.molecules, "");
    rows.push("ensemble_cavity_rate", r.ensemble_cavity_rate, "1/s");
    rows.push("per_molecule_cavity_rate", r.per_molecule_cavity_rate, "1/s");
    rows.push("per_molecule_total_rate", r.per_molecule_total_rate, "1/s");
    rows.push("purcell_2c", r.purcell_2c, "");
    rows.push("cavity_to_free_space", r.cavity_to_free_space, "");
    let body = match format {
        Format::Table => r.to_table(),
        _ => rows.render(format, serde_json::to_value(&r)?),
    };
    Ok(Output { name: "forecast", body, ok: true })
}

fn validate(seed: u64, format: Format) -> Result<Output> {
    let report = run_validation(seed);
    let body = match format {
        Format::Table => report.to_table(),
        Format::Json => pretty(&serde_json::to_value(&report)?),
        Format::Csv => {
            let mut out = String::from("check,passed,detail\n");
            for c in &report.checks {
                let _ = writeln!(out, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
            }
            out
        }
    };
    Ok(Output {
        name: "validate",
        body,
        ok: report.all_passed(),
    })
}

fn load_scenario(cli: &Cli) -> Result<ScenarioConfig> {
    let db = match &cli.species_db {
        Some(path) => SpeciesDatabase::load(path)?,
        None => SpeciesDatabase::builtin(),
    };
    Ok(match &cli.config {
        Some(path) => ScenarioConfig::load(path, &db)?,
        None => ScenarioConfig::parse(cavray_core::config::REFERENCE_SCENARIO, "<reference>", &db)?,
    })
}

fn emit(output: &Output, out_dir: Option<&Path>, format: Format) -> Result<()> {
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{}.{}", output.name, format.extension()));
            fs::write(&path, &output.body).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", output.body),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let scenario = || load_scenario(cli);
    let output = match cli.command {
        Command::Cavity => cavity(&scenario()?, cli.format)?,
        Command::Scan => scan(&scenario()?, cli.format)?,
        Command::Overlap => overlap(&scenario()?, cli.format)?,
        Command::Enhance => enhance(&scenario()?, cli.format)?,
        Command::Purcell => purcell(&scenario()?, cli.format)?,
        Command::Forecast => forecast(&scenario()?, cli.format)?,
        Command::Validate => validate(cli.seed, cli.format)?,
    };
    emit(&output, cli.out.as_deref(), cli.format)?;
    Ok(output.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
