//! End-to-end scenario reproductions.
//!
//! The scattering amplitude `alpha` is never derived microscopically. Absolute
//! powers always come from a measured anchor, and the model only supplies ratios:
//! finesse scaling, outcoupling shares, Doppler acceptance, Purcell ratios. Every
//! function here routes those ratios through the field model with an arbitrary
//! [`ModelScale`], and the results do not depend on it.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::constants::{PLANCK, SPEED_OF_LIGHT};
use crate::error::{require_positive, Error, Result};
use crate::field::{cavity_powers, transmitted_power, Coupling};
use crate::optics::{number_density, MirrorSpec};
use crate::overlap::{dipole_mode_power, fabry_perot_purcell_factor};
use crate::spectra::{at_rest_power, spectral_overlap, species_ratio, SpectralProfile};

pub const ENHANCEMENT_SCHEMA: &str = "cavray.enhancement_report/1";
pub const FORECAST_SCHEMA: &str = "cavray.forecast_report/1";

/// Internal scattering amplitude and pump power used to evaluate model ratios.
/// Any positive choice yields the same reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelScale {
    pub amplitude: f64,
    pub pump_power: f64,
}

impl Default for ModelScale {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            pump_power: 1.0,
        }
    }
}

/// How scattered light leaves the resonator towards the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcoupling {
    Symmetric,
    /// Detector behind the right mirror with transmissions `t1` (left) and `t2` (right).
    Asymmetric { t1: f64, t2: f64 },
}

/// Detected power over free-space power in the same one-direction mode.
fn detection_enhancement(finesse: f64, outcoupling: Outcoupling, scale: ModelScale) -> Result<f64> {
    let budget = cavity_powers(scale.amplitude, scale.pump_power, finesse, Coupling::Averaged)?;
    let detected = match outcoupling {
        Outcoupling::Symmetric => budget.transmitted,
        Outcoupling::Asymmetric { t1, t2 } => transmitted_power(scale.amplitude, scale.pump_power, t1, t2, finesse)?,
    };
    Ok(detected / budget.free_space_one_direction)
}

/// Photon flux carried by `power` at `wavelength`, `P lambda / (h c)`, 1/s.
pub fn photon_rate(power: f64, wavelength: f64) -> Result<f64> {
    require_positive("photon rate", "wavelength", wavelength)?;
    if !(power >= 0.0) {
        return Err(Error::domain("photon rate", format!("power must be >= 0, got {power}")));
    }
    Ok(power * wavelength / (PLANCK * SPEED_OF_LIGHT))
}

/// Effective volume of a pump Gaussian crossing the cavity mode at right angles,
/// `pi^(3/2) w_cav^2 w_pump / 2`.
pub fn interaction_volume(pump_waist: f64, cavity_waist: f64) -> f64 {
    PI.powf(1.5) * cavity_waist * cavity_waist * pump_waist / 2.0
}

/// Particles that effectively scatter into the resonance, `n V_int overlap`.
pub fn contributing_particles(density: f64, pump_waist: f64, cavity_waist: f64, overlap: f64) -> Result<f64> {
    if !(density >= 0.0) {
        return Err(Error::domain("contributing particles", format!("density must be >= 0, got {density}")));
    }
    require_positive("contributing particles", "pump waist", pump_waist)?;
    require_positive("contributing particles", "cavity waist", cavity_waist)?;
    require_positive("contributing particles", "overlap", overlap)?;
    Ok(density * interaction_volume(pump_waist, cavity_waist) * overlap)
}

fn check_overlap(op: &'static str, overlap: f64) -> Result<()> {
    if overlap > 0.0 && overlap <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("spectral overlap must lie in (0, 1], got {overlap}")))
    }
}

/// Free-space power into the detected mode implied by a cavity measurement,
/// `measured / (enhancement * overlap)`; the symmetric enhancement is `2F/pi`.
pub fn free_space_backout(
    measured_cavity_power: f64,
    finesse: f64,
    overlap: f64,
    outcoupling: Outcoupling,
    scale: ModelScale,
) -> Result<f64> {
    require_positive("free-space back-out", "measured power", measured_cavity_power)?;
    require_positive("free-space back-out", "finesse", finesse)?;
    check_overlap("free-space back-out", overlap)?;
    Ok(measured_cavity_power / (detection_enhancement(finesse, outcoupling, scale)? * overlap))
}

/// Inverse of [`free_space_backout`]: detected cavity power for a free-space power.
pub fn predict_cavity_power(
    free_space_power: f64,
    finesse: f64,
    overlap: f64,
    outcoupling: Outcoupling,
    scale: ModelScale,
) -> Result<f64> {
    check_overlap("cavity power prediction", overlap)?;
    Ok(free_space_power * detection_enhancement(finesse, outcoupling, scale)? * overlap)
}

/// One resonator configuration in a finesse series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinessePoint {
    pub finesse: f64,
    pub left: MirrorSpec,
    pub right: MirrorSpec,
    /// Detected power, W.
    pub measured_power: Option<f64>,
    /// Doppler-cavity spectral overlap at this finesse.
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinesseDependenceEntry {
    pub finesse: f64,
    /// `T2 / (T1 + T2)`.
    pub outcoupling_share: f64,
    /// Prediction including the outcoupling share, relative to the highest finesse.
    pub predicted_relative: f64,
    /// Prediction assuming symmetric mirrors, `F / F_max`.
    pub predicted_relative_symmetric: f64,
    pub overlap: Option<f64>,
    /// `measured / overlap`, W.
    pub measured_at_rest: Option<f64>,
    pub measured_relative: Option<f64>,
}

/// Relative detected at-rest power versus finesse, normalized to the highest-finesse point.
pub fn finesse_dependence(points: &[FinessePoint], scale: ModelScale) -> Result<Vec<FinesseDependenceEntry>> {
    let top = points
        .iter()
        .max_by(|a, b| a.finesse.total_cmp(&b.finesse))
        .ok_or_else(|| Error::domain("finesse dependence", "no finesse points"))?;
    let detected = |p: &FinessePoint| {
        transmitted_power(
            scale.amplitude,
            scale.pump_power,
            p.left.transmission(),
            p.right.transmission(),
            p.finesse,
        )
    };
    let symmetric = |p: &FinessePoint| -> Result<f64> {
        Ok(cavity_powers(scale.amplitude, scale.pump_power, p.finesse, Coupling::Averaged)?.transmitted)
    };
    let top_detected = detected(top)?;
    let top_symmetric = symmetric(top)?;
    let at_rest = |p: &FinessePoint| -> Result<Option<f64>> {
        match (p.measured_power, p.overlap) {
            (Some(power), Some(overlap)) => Ok(Some(at_rest_power(power, overlap)?)),
            _ => Ok(None),
        }
    };
    let top_at_rest = at_rest(top)?;

    points
        .iter()
        .map(|p| {
            require_positive("finesse dependence", "finesse", p.finesse)?;
            let measured_at_rest = at_rest(p)?;
            Ok(FinesseDependenceEntry {
                finesse: p.finesse,
                outcoupling_share: p.right.transmission() / (p.left.transmission() + p.right.transmission()),
                predicted_relative: detected(p)? / top_detected,
                predicted_relative_symmetric: symmetric(p)? / top_symmetric,
                overlap: p.overlap,
                measured_at_rest,
                measured_relative: measured_at_rest.zip(top_at_rest).map(|(m, t)| m / t),
            })
        })
        .collect()
}

/// Assembled comparison of cavity and free-space scattering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancementReport {
    pub schema: String,
    pub finesse_dependence: Vec<FinesseDependenceEntry>,
    pub anchor_power: f64,
    pub anchor_finesse: f64,
    pub anchor_overlap: f64,
    /// Free-space power the model expects from the anchor, W.
    pub free_space_backout: f64,
    /// Model enhancement of the detected signal including Doppler acceptance.
    pub model_enhancement: f64,
    pub measured_free_space_power: Option<f64>,
    /// Anchor over measured free-space power.
    pub measured_enhancement: Option<f64>,
    /// Back-out over measured free-space power.
    pub model_to_measured_free_space: Option<f64>,
    pub species_ratios: Vec<(String, f64)>,
}

/// Inputs of the ultracold-molecule forecast taken from a thermal-gas measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastAnchor {
    /// Detected power behind one mirror, W.
    pub measured_power: f64,
    pub wavelength: f64,
    pub finesse: f64,
    pub overlap: f64,
    pub contributing_particles: f64,
    /// Cubic angstrom.
    pub polarizability: f64,
    pub mirror_separation: f64,
    pub cavity_waist: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastTarget {
    /// Cubic angstrom.
    pub polarizability: f64,
    pub molecules: f64,
    pub finesse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub schema: String,
    pub anchor_photon_rate: f64,
    pub anchor_rate_per_particle: f64,
    /// Scattering rate into the cavity, summed over the sample, 1/s.
    pub ensemble_cavity_rate: f64,
    /// Scattering rate into the cavity per molecule, 1/s.
    pub per_molecule_cavity_rate: f64,
    /// Total scattering rate per molecule, cavity plus free space, 1/s.
    pub per_molecule_total_rate: f64,
    pub purcell_2c: f64,
    /// `P_cav / P_fs` for the target finesse.
    pub cavity_to_free_space: f64,
    pub molecules: f64,
}

/// Projects a thermal-gas measurement onto a trapped ultracold sample.
///
/// The anchor's photon rate out of both mirrors, divided by the contributing
/// particles, is scaled by the polarizability ratio squared and the finesse ratio,
/// and the anchor's Doppler acceptance is removed. The cavity-to-free-space ratio
/// is the antinode cavity power over the dipole-mode power at the target finesse.
pub fn ultracold_forecast(anchor: &ForecastAnchor, target: &ForecastTarget, scale: ModelScale) -> Result<ForecastReport> {
    require_positive("forecast", "anchor power", anchor.measured_power)?;
    require_positive("forecast", "contributing particles", anchor.contributing_particles)?;
    require_positive("forecast", "anchor polarizability", anchor.polarizability)?;
    require_positive("forecast", "target finesse", target.finesse)?;
    check_overlap("forecast", anchor.overlap)?;
    if !(target.molecules >= 0.0) {
        return Err(Error::domain("forecast", "molecule number must be >= 0"));
    }

    let anchor_photon_rate = 2.0 * photon_rate(anchor.measured_power, anchor.wavelength)?;
    let anchor_rate_per_particle = anchor_photon_rate / anchor.contributing_particles;
    let polarizability_gain = (target.polarizability / anchor.polarizability).powi(2);
    let finesse_gain = cavity_powers(scale.amplitude, scale.pump_power, target.finesse, Coupling::Averaged)?.cavity
        / cavity_powers(scale.amplitude, scale.pump_power, anchor.finesse, Coupling::Averaged)?.cavity;
    let per_molecule_cavity_rate = anchor_rate_per_particle * polarizability_gain * finesse_gain / anchor.overlap;

    let cavity_to_free_space = cavity_powers(scale.amplitude, scale.pump_power, target.finesse, Coupling::Antinode)?.cavity
        / dipole_mode_power(scale.amplitude, scale.pump_power, anchor.wavelength, anchor.cavity_waist);

    Ok(ForecastReport {
        schema: FORECAST_SCHEMA.into(),
        anchor_photon_rate,
        anchor_rate_per_particle,
        ensemble_cavity_rate: per_molecule_cavity_rate * target.molecules,
        per_molecule_cavity_rate,
        per_molecule_total_rate: per_molecule_cavity_rate * (1.0 + 1.0 / cavity_to_free_space),
        purcell_2c: fabry_perot_purcell_factor(
            target.finesse,
            anchor.mirror_separation,
            anchor.wavelength,
            anchor.cavity_waist,
        ),
        cavity_to_free_space,
        molecules: target.molecules,
    })
}

impl ScenarioConfig {
    /// Spectral overlap of the scenario gas with a resonance of the given finesse.
    pub fn overlap_at(&self, finesse: f64) -> Result<f64> {
        let cavity = self.cavity_params()?.with_finesse(finesse)?;
        let profile = SpectralProfile::for_species(&self.gas, cavity.wavelength)?;
        spectral_overlap(&profile, cavity.linewidth)
    }

    fn require_anchor(&self) -> Result<&crate::config::AnchorMeasurement> {
        self.anchor
            .as_ref()
            .ok_or_else(|| Error::Config("scenario has no anchor measurement (anchor.power_fW)".into()))
    }

    fn anchor_overlap(&self) -> Result<f64> {
        let anchor = self.require_anchor()?;
        match anchor.overlap {
            Some(o) => Ok(o),
            None => self.overlap_at(anchor.finesse),
        }
    }

    /// Contributing particles for the anchor measurement.
    pub fn anchor_particles(&self) -> Result<f64> {
        let density = number_density(self.pressure, self.gas.temperature)?;
        contributing_particles(density, self.pump.waist, self.cavity_params()?.waist, self.anchor_overlap()?)
    }

    pub fn forecast_anchor(&self) -> Result<ForecastAnchor> {
        let anchor = self.require_anchor()?;
        let cavity = self.cavity_params()?;
        Ok(ForecastAnchor {
            measured_power: anchor.power,
            wavelength: self.pump.wavelength,
            finesse: anchor.finesse,
            overlap: self.anchor_overlap()?,
            contributing_particles: self.anchor_particles()?,
            polarizability: self.gas.polarizability,
            mirror_separation: cavity.mirror_separation,
            cavity_waist: cavity.waist,
        })
    }

    pub fn forecast_target(&self) -> ForecastTarget {
        ForecastTarget {
            polarizability: self.forecast.polarizability_factor * self.gas.polarizability,
            molecules: self.forecast.molecules,
            finesse: self.forecast.finesse,
        }
    }

    pub fn forecast_report(&self, scale: ModelScale) -> Result<ForecastReport> {
        ultracold_forecast(&self.forecast_anchor()?, &self.forecast_target(), scale)
    }

    pub fn enhancement_report(&self, scale: ModelScale) -> Result<EnhancementReport> {
        let anchor = self.require_anchor()?;
        let anchor_overlap = self.anchor_overlap()?;
        let points = self
            .measurements
            .iter()
            .map(|m| {
                Ok(FinessePoint {
                    overlap: Some(match m.overlap {
                        Some(o) => o,
                        None => self.overlap_at(m.finesse)?,
                    }),
                    ..*m
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let finesse_dependence = if points.is_empty() {
            Vec::new()
        } else {
            finesse_dependence(&points, scale)?
        };
        let backout = free_space_backout(anchor.power, anchor.finesse, anchor_overlap, Outcoupling::Symmetric, scale)?;
        let ratio_cavity = self.cavity_params()?.with_finesse(anchor.finesse)?;
        let ratios = if self.compare_species.is_empty() {
            Vec::new()
        } else {
            let values = species_ratio(&self.compare_species, &ratio_cavity)?;
            self.compare_species.iter().map(|s| s.name.clone()).zip(values).collect()
        };
        Ok(EnhancementReport {
            schema: ENHANCEMENT_SCHEMA.into(),
            finesse_dependence,
            anchor_power: anchor.power,
            anchor_finesse: anchor.finesse,
            anchor_overlap,
            free_space_backout: backout,
            model_enhancement: anchor.power / backout,
            measured_free_space_power: anchor.free_space_power,
            measured_enhancement: anchor.free_space_power.map(|fs| anchor.power / fs),
            model_to_measured_free_space: anchor.free_space_power.map(|fs| backout / fs),
            species_ratios: ratios,
        })
    }
}

fn fmt_opt(value: Option<f64>, scale: f64, precision: usize) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{:.*}", precision, v * scale))
}

impl EnhancementReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "finesse  T2/(T1+T2)  overlap  at-rest [fW]  measured rel  model rel  model rel (sym)");
        for e in &self.finesse_dependence {
            let _ = writeln!(
                out,
                "{:>7.0}  {:>10.3}  {:>7}  {:>12}  {:>12}  {:>9.3}  {:>15.3}",
                e.finesse,
                e.outcoupling_share,
                fmt_opt(e.overlap, 100.0, 1) + "%",
                fmt_opt(e.measured_at_rest, 1e15, 0),
                fmt_opt(e.measured_relative, 1.0, 3),
                e.predicted_relative,
                e.predicted_relative_symmetric,
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "anchor                      {:.1} fW at F = {:.0}, overlap {:.2}%",
            self.anchor_power * 1e15,
            self.anchor_finesse,
            self.anchor_overlap * 100.0
        );
        let _ = writeln!(out, "free-space back-out         {:.2} fW", self.free_space_backout * 1e15);
        let _ = writeln!(out, "model enhancement           {:.1}", self.model_enhancement);
        let _ = writeln!(out, "measured free-space power   {} fW", fmt_opt(self.measured_free_space_power, 1e15, 2));
        let _ = writeln!(out, "measured enhancement factor {}", fmt_opt(self.measured_enhancement, 1.0, 1));
        let _ = writeln!(out, "back-out / measured         {}", fmt_opt(self.model_to_measured_free_space, 1.0, 2));
        if !self.species_ratios.is_empty() {
            let names: Vec<&str> = self.species_ratios.iter().map(|(n, _)| n.as_str()).collect();
            let values: Vec<String> = self.species_ratios.iter().map(|(_, v)| format!("{v:.3}")).collect();
            let _ = writeln!(out, "species ratio ({})  ({})", names.join(":"), values.join(" : "));
        }
        out
    }
}

impl ForecastReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "anchor photon rate (both mirrors)  {:.4e} 1/s", self.anchor_photon_rate);
        let _ = writeln!(out, "anchor rate per particle           {:.4e} 1/s", self.anchor_rate_per_particle);
        let _ = writeln!(out, "molecules                          {:.4e}", self.molecules);
        let _ = writeln!(out, "ensemble rate into cavity          {:.4e} 1/s", self.ensemble_cavity_rate);
        let _ = writeln!(out, "per-molecule rate into cavity      {:.4} 1/s", self.per_molecule_cavity_rate);
        let _ = writeln!(out, "per-molecule total rate            {:.4} 1/s", self.per_molecule_total_rate);
        let _ = writeln!(out, "Purcell factor 2C                  {:.4}", self.purcell_2c);
        let _ = writeln!(out, "P_cav / P_fs                       {:.4}", self.cavity_to_free_space);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mirror(r: f64) -> MirrorSpec {
        MirrorSpec::from_reflectivity(r).unwrap()
    }

    fn measured_points() -> Vec<FinessePoint> {
        [(1000.0, 0.997, 52e-15, 0.042), (400.0, 0.989, 85e-15, 0.101), (100.0, 0.959, 90e-15, 0.334)]
            .iter()
            .map(|&(finesse, r, p, o)| FinessePoint {
                finesse,
                left: mirror(0.997),
                right: mirror(r),
                measured_power: Some(p),
                overlap: Some(o),
            })
            .collect()
    }

    #[test]
    fn finesse_dependence_examples() {
        let d = finesse_dependence(&measured_points(), ModelScale::default()).unwrap();
        let predicted: Vec<f64> = d.iter().map(|e| e.predicted_relative).collect();
        // F T2/(T1+T2) with shares 0.5, 0.786, 0.932
        assert_relative_eq!(predicted[0], 1.0);
        assert_relative_eq!(predicted[1], 400.0 * (0.011 / 0.014) / 500.0, max_relative = 1e-10);
        assert_relative_eq!(predicted[2], 100.0 * (0.041 / 0.044) / 500.0, max_relative = 1e-10);
        let measured: Vec<f64> = d.iter().map(|e| e.measured_relative.unwrap()).collect();
        assert_relative_eq!(measured[1], (85.0 / 0.101) / (52.0 / 0.042), max_relative = 1e-12);
        assert_relative_eq!(measured[2], (90.0 / 0.334) / (52.0 / 0.042), max_relative = 1e-12);
        for (m, p) in measured.iter().zip(&predicted) {
            assert!((m / p - 1.0).abs() < 0.25);
        }
        assert!(finesse_dependence(&[], ModelScale::default()).is_err());
    }

    #[test]
    fn symmetric_series_is_linear() {
        let points: Vec<FinessePoint> = [50.0, 300.0, 1200.0]
            .iter()
            .map(|&f| FinessePoint {
                finesse: f,
                left: mirror(0.99),
                right: mirror(0.99),
                measured_power: None,
                overlap: None,
            })
            .collect();
        for e in finesse_dependence(&points, ModelScale::default()).unwrap() {
            assert_relative_eq!(e.predicted_relative, e.finesse / 1200.0, max_relative = 1e-14);
            assert_eq!(e.measured_relative, None);
        }
    }

    #[test]
    fn backout_examples() {
        let s = ModelScale::default();
        assert_relative_eq!(
            free_space_backout(50e-15, 1000.0, 0.042, Outcoupling::Symmetric, s).unwrap(),
            1.87e-15,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            free_space_backout(3.3, PI / 2.0, 1.0, Outcoupling::Symmetric, s).unwrap(),
            3.3,
            max_relative = 1e-14
        );
        assert_relative_eq!(50.0f64 / 1.3, 38.46, max_relative = 1e-3);
        assert!(free_space_backout(50e-15, 1000.0, 0.0, Outcoupling::Symmetric, s).is_err());
        assert!(free_space_backout(50e-15, 0.0, 0.5, Outcoupling::Symmetric, s).is_err());
        // asymmetric outcoupling with equal mirrors equals the symmetric chain
        let asym = free_space_backout(50e-15, 1000.0, 0.042, Outcoupling::Asymmetric { t1: 0.003, t2: 0.003 }, s).unwrap();
        assert_relative_eq!(asym, 1.87e-15, max_relative = 1e-3);
    }

    #[test]
    fn particles_and_photons() {
        let n = number_density(1e4, 295.0).unwrap();
        assert_relative_eq!(contributing_particles(n, 50e-6, 45e-6, 0.042).unwrap(), 2.907e10, max_relative = 1e-3);
        assert_relative_eq!(contributing_particles(n, 50e-6, 45e-6, 1.0).unwrap(), 6.921e11, max_relative = 1e-3);
        assert_eq!(contributing_particles(0.0, 50e-6, 45e-6, 0.042).unwrap(), 0.0);
        assert_relative_eq!(photon_rate(50e-15, 532e-9).unwrap(), 1.3391e5, max_relative = 1e-4);
        assert_eq!(photon_rate(0.0, 532e-9).unwrap(), 0.0);
        assert_relative_eq!(1.0 / photon_rate(1.0, 532e-9).unwrap(), 3.734e-19, max_relative = 1e-3);
    }
}
