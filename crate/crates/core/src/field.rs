//! Intracavity field of a single classical scatterer.
//!
//! The scatterer sits a distance `dz` from the cavity centre and radiates a field
//! `alpha * E_p` into each direction. The right-travelling field at its position obeys
//!
//! ```text
//! E_c = a E_p + r1 exp(ik(d + 2 dz)) a E_p + r1 r2 exp(2ikd) E_c
//! ```
//!
//! whose steady state is [`intracavity_field`]. [`roundtrip_sum_oracle`] iterates the
//! recursion explicitly and serves as its independent check.
//!
//! Intensities are converted to powers with a single reference mode area. It
//! cancels in every ratio the crate reports and is fixed to 1 here, so an
//! "intensity" and a "power" share units.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference mode area for the intensity-to-power convention.
pub const MODE_AREA: f64 = 1.0;

/// One scatterer in the pump field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterConfig {
    /// Dimensionless scattering amplitude, `|alpha| << 1`.
    pub amplitude: f64,
    /// Pump field amplitude.
    pub pump_field: f64,
    /// rad/m.
    pub wavenumber: f64,
    /// Displacement from the cavity centre, m.
    pub displacement: f64,
}

/// Right-travelling intracavity field, in the units of the pump field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldState {
    pub field: Complex64,
}

impl FieldState {
    /// `|E_c|^2` in the mode-area convention.
    pub fn intensity(&self) -> f64 {
        self.field.norm_sqr()
    }
}

/// How the scatterer is placed in the standing wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Averaged over random positions (thermal gas).
    Averaged,
    /// Pinned to a field antinode.
    Antinode,
}

/// Power bookkeeping for a symmetric resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    /// Right-travelling intracavity intensity.
    pub intracavity_intensity: f64,
    /// Power leaving through one mirror.
    pub transmitted: f64,
    /// Total power scattered into the cavity mode (both mirrors).
    pub cavity: f64,
    /// Free-space power into the right-travelling cavity-defined mode.
    pub free_space_one_direction: f64,
    /// Free-space power into the cavity-defined mode, both directions.
    pub free_space_cavity_mode: f64,
}

fn check_gain(r1: f64, r2: f64) -> Result<()> {
    let gain = r1 * r2;
    if gain.abs() >= 1.0 || !gain.is_finite() {
        return Err(Error::Divergence { gain });
    }
    Ok(())
}

/// Steady-state right-travelling field,
/// `a E_p (1 + r1 e^{ikd} e^{2ik dz}) / (1 - r1 r2 e^{2ikd})`.
pub fn intracavity_field(cfg: &ScatterConfig, r1: f64, r2: f64, mirror_separation: f64) -> Result<FieldState> {
    check_gain(r1, r2)?;
    let k = cfg.wavenumber;
    let source = cfg.amplitude * cfg.pump_field;
    let one_pass = Complex64::from_polar(1.0, k * mirror_separation);
    let placement = Complex64::from_polar(1.0, 2.0 * k * cfg.displacement);
    let round_trip = Complex64::from_polar(1.0, 2.0 * k * mirror_separation);
    let field = source * (1.0 + r1 * one_pass * placement) / (1.0 - r1 * r2 * round_trip);
    Ok(FieldState { field })
}

/// Iterates the round-trip recursion `n_roundtrips` times starting from the
/// direct plus once-reflected field.
pub fn roundtrip_sum_oracle(
    cfg: &ScatterConfig,
    r1: f64,
    r2: f64,
    mirror_separation: f64,
    n_roundtrips: usize,
) -> FieldState {
    let k = cfg.wavenumber;
    let direct = Complex64::new(cfg.amplitude * cfg.pump_field, 0.0);
    let reflected = r1 * Complex64::from_polar(1.0, k * (mirror_separation + 2.0 * cfg.displacement)) * direct;
    let source = direct + reflected;
    let feedback = r1 * r2 * Complex64::from_polar(1.0, 2.0 * k * mirror_separation);
    let mut field = source;
    for _ in 0..n_roundtrips {
        field = source + feedback * field;
    }
    FieldState { field }
}

/// Position-averaged right-travelling intensity on resonance,
/// `a^2 I_p (1 + r1^2) / (1 - r1 r2)^2`.
///
/// Not symmetric in the mirrors: only the left mirror folds the backward-scattered
/// wave onto the forward one.
pub fn averaged_intensity(amplitude: f64, pump_intensity: f64, r1: f64, r2: f64) -> Result<f64> {
    check_gain(r1, r2)?;
    Ok(amplitude * amplitude * pump_intensity * (1.0 + r1 * r1) / (1.0 - r1 * r2).powi(2))
}

/// High-reflectivity limit of [`averaged_intensity`], `2 a^2 I_p (F / pi)^2`.
pub fn high_finesse_intensity(amplitude: f64, pump_intensity: f64, finesse: f64) -> f64 {
    2.0 * amplitude * amplitude * pump_intensity * (finesse / PI).powi(2)
}

/// Power leaving through the right mirror, `4 T2 / (T1 + T2) a^2 P_p F / pi`.
pub fn transmitted_power(
    amplitude: f64,
    pump_power: f64,
    t1: f64,
    t2: f64,
    finesse: f64,
) -> Result<f64> {
    if !(t1 >= 0.0 && t2 >= 0.0 && t1 + t2 > 0.0) {
        return Err(Error::domain(
            "transmitted power",
            format!("need T1, T2 >= 0 with T1 + T2 > 0, got T1 = {t1}, T2 = {t2}"),
        ));
    }
    Ok(4.0 * t2 / (t1 + t2) * amplitude * amplitude * pump_power * finesse / PI)
}

/// Full power budget of a symmetric resonator.
pub fn cavity_powers(amplitude: f64, pump_power: f64, finesse: f64, coupling: Coupling) -> Result<PowerBudget> {
    if !(finesse > 0.0) {
        return Err(Error::domain("cavity powers", format!("finesse must be positive, got {finesse}")));
    }
    let single = amplitude * amplitude * pump_power;
    let placement = match coupling {
        Coupling::Averaged => 1.0,
        Coupling::Antinode => 2.0,
    };
    let transmitted = placement * 2.0 * single * finesse / PI;
    Ok(PowerBudget {
        intracavity_intensity: placement * high_finesse_intensity(amplitude, pump_power / MODE_AREA, finesse),
        transmitted,
        cavity: 2.0 * transmitted,
        free_space_one_direction: single,
        free_space_cavity_mode: 2.0 * single,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 532e-9;

    fn cfg(displacement: f64) -> ScatterConfig {
        ScatterConfig {
            amplitude: 1e-3,
            pump_field: 2.0,
            wavenumber: 2.0 * PI / LAMBDA,
            displacement,
        }
    }

    // d a whole number of wavelengths: e^{ikd} = 1
    const D_RES: f64 = 11_278.0 * LAMBDA;

    #[test]
    fn free_space_limit() {
        let e = intracavity_field(&cfg(1e-7), 0.0, 0.0, D_RES).unwrap();
        assert_relative_eq!(e.field.re, 2e-3, max_relative = 1e-15);
        assert_eq!(e.field.im, 0.0);
    }

    #[test]
    fn resonant_constructive_and_destructive() {
        let r = 0.9985;
        let c = cfg(0.0);
        let source = c.amplitude * c.pump_field;
        let on = intracavity_field(&c, r, r, D_RES).unwrap().field / source;
        // (1 + r) / (1 - r^2)
        assert_relative_eq!(on.norm(), 666.666_666, max_relative = 1e-6);
        let off = intracavity_field(&cfg(LAMBDA / 4.0), r, r, D_RES).unwrap().field / source;
        assert_relative_eq!(off.norm(), 0.500_375, max_relative = 1e-5);
    }

    #[test]
    fn divergence_rejected() {
        assert!(matches!(
            intracavity_field(&cfg(0.0), 1.0, 1.0, D_RES),
            Err(Error::Divergence { .. })
        ));
        assert!(averaged_intensity(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn roundtrip_sum_converges() {
        let c = cfg(3.1e-8);
        let d = 6.0e-3 + 1.7e-8;
        let zeroth = roundtrip_sum_oracle(&c, 0.9, 0.8, d, 0).field;
        let source = c.amplitude * c.pump_field;
        let expected = source * (1.0 + 0.9 * Complex64::from_polar(1.0, c.wavenumber * (d + 2.0 * c.displacement)));
        assert_relative_eq!((zeroth - expected).norm(), 0.0, epsilon = 1e-18);

        let r = 0.5f64.sqrt();
        let closed = intracavity_field(&c, r, r, d).unwrap().field;
        let summed = roundtrip_sum_oracle(&c, r, r, d, 50).field;
        let rel = (closed - summed).norm() / closed.norm();
        // phases near 1e8 rad round differently in the two forms
        assert!(rel < 1e-10, "{rel}");

        let closed = intracavity_field(&cfg(0.0), 0.9985, 0.9985, D_RES).unwrap().field;
        let summed = roundtrip_sum_oracle(&cfg(0.0), 0.9985, 0.9985, D_RES, 10_000).field;
        assert!((closed - summed).norm() / closed.norm() < 1e-6);
    }

    #[test]
    fn averaged_intensity_examples() {
        assert_relative_eq!(averaged_intensity(0.1, 3.0, 0.0, 0.0).unwrap(), 0.03, max_relative = 1e-15);
        let r: f64 = 0.9985;
        let expected = (1.0 + r * r) / (1.0 - r * r).powi(2);
        assert_relative_eq!(averaged_intensity(1.0, 1.0, r, r).unwrap(), expected);
        assert_relative_eq!(expected, 2.2222e5, max_relative = 1e-4);
        assert_relative_eq!(averaged_intensity(1.0, 1.0, r, 0.0).unwrap(), 1.997_002_25, max_relative = 1e-12);
        // the left mirror is singled out
        let a = averaged_intensity(1.0, 1.0, 0.99, 0.5).unwrap();
        let b = averaged_intensity(1.0, 1.0, 0.5, 0.99).unwrap();
        assert_relative_eq!(a / b, (1.0 + 0.99 * 0.99) / 1.25, max_relative = 1e-14);
    }

    #[test]
    fn high_finesse_limit() {
        assert_relative_eq!(high_finesse_intensity(1.0, 1.0, PI), 2.0);
        let r = 0.997f64.sqrt();
        let f = PI * r / (1.0 - r * r);
        let exact = averaged_intensity(1.0, 1.0, r, r).unwrap();
        assert!((high_finesse_intensity(1.0, 1.0, f) / exact - 1.0).abs() < 5e-3);
    }

    #[test]
    fn transmitted_power_examples() {
        let sym = transmitted_power(1.0, 1.0, 0.003, 0.003, 1047.0).unwrap();
        assert_relative_eq!(sym, 2.0 * 1047.0 / PI);
        assert_eq!(transmitted_power(1.0, 1.0, 0.003, 0.0, 1000.0).unwrap(), 0.0);
        assert_relative_eq!(
            transmitted_power(1.0, 1.0, 0.003, 0.041, 142.0).unwrap(),
            168.46,
            max_relative = 1e-3
        );
        assert!(transmitted_power(1.0, 1.0, 0.0, 0.0, 100.0).is_err());
    }

    #[test]
    fn power_budget_identities() {
        let f = 873.0;
        let avg = cavity_powers(0.01, 2.0, f, Coupling::Averaged).unwrap();
        let anti = cavity_powers(0.01, 2.0, f, Coupling::Antinode).unwrap();
        for b in [avg, anti] {
            assert_eq!(b.cavity, 2.0 * b.transmitted);
            assert_eq!(b.free_space_cavity_mode, 2.0 * b.free_space_one_direction);
        }
        assert_relative_eq!(anti.cavity / anti.free_space_cavity_mode, 4.0 * f / PI, max_relative = 1e-14);
        assert_relative_eq!(avg.transmitted / avg.free_space_one_direction, 2.0 * f / PI, max_relative = 1e-14);
        let half = cavity_powers(1.0, 1.0, PI / 2.0, Coupling::Antinode).unwrap();
        assert_relative_eq!(half.cavity, 4.0, max_relative = 1e-15);
        assert_relative_eq!(half.cavity, 2.0 * half.free_space_cavity_mode, max_relative = 1e-15);
        assert!(cavity_powers(1.0, 1.0, 0.0, Coupling::Averaged).is_err());
    }
}
