//! Dipole and cavity mode functions, their far-field overlap, and the Purcell factor.
//!
//! The scalar dipole mode radiates `sqrt(3/8pi) cos(theta) / r` and the TEM00 cavity
//! mode is a unit-power Gaussian. Their overlap `eta` on a far-field plane tends to
//! `sqrt(3)/(2 pi) lambda/w0`; doubling `eta^2` for the two propagation directions gives
//! the fraction of dipole power that free space puts into the cavity-defined mode.
//! Dividing the antinode cavity power by the dipole-mode power reproduces the usual
//! Purcell factor `2C = 3/(4 pi^2) Q lambda^3 / V` once `Q = 2dF/lambda` and
//! `V = pi w0^2 d/4`; the mirror separation drops out.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};
use crate::quadrature::{integrate, QuadSpec};

/// Far-field scalar dipole mode with the dipole perpendicular to the cavity axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleMode {
    pub prefactor: f64,
}

impl Default for DipoleMode {
    fn default() -> Self {
        Self {
            prefactor: (3.0 / (8.0 * PI)).sqrt(),
        }
    }
}

impl DipoleMode {
    pub fn field(&self, theta: f64, r: f64) -> f64 {
        self.prefactor * theta.cos() / r
    }

    /// `int_0^{2pi} int_{theta_min}^{theta_max} E^2 r^2 cos(theta) dtheta dphi`.
    pub fn normalization_integral(&self, theta_min: f64, theta_max: f64, spec: &QuadSpec) -> Result<f64> {
        // r^2 from the area element cancels the 1/r^2 of the intensity
        let r = 1.0;
        let integrand = |theta: f64| {
            let e = self.field(theta, r);
            e * e * r * r * theta.cos()
        };
        Ok(2.0 * PI * integrate(integrand, theta_min, theta_max, spec, "dipole mode normalization")?.value)
    }
}

/// Normalization of the default dipole mode over the full hemisphere pair; 1 by construction.
pub fn dipole_normalization_check() -> Result<f64> {
    DipoleMode::default().normalization_integral(-PI / 2.0, PI / 2.0, &QuadSpec::with_rel_tol(1e-12))
}

/// Unit-power TEM00 mode travelling in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMode {
    pub waist: f64,
    pub wavelength: f64,
}

impl GaussianMode {
    pub fn new(waist: f64, wavelength: f64) -> Result<Self> {
        require_positive("gaussian mode", "waist", waist)?;
        require_positive("gaussian mode", "wavelength", wavelength)?;
        Ok(Self { waist, wavelength })
    }

    pub fn rayleigh_length(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    /// Beam radius `w(z) = w0 sqrt(1 + (z/z0)^2)`.
    pub fn width(&self, z: f64) -> f64 {
        self.waist * (1.0 + (z / self.rayleigh_length()).powi(2)).sqrt()
    }

    /// `N(z)` such that the transverse intensity integrates to 1: `w(z) sqrt(pi/2)`.
    pub fn normalization(&self, z: f64) -> f64 {
        self.width(z) * (PI / 2.0).sqrt()
    }

    pub fn field(&self, radius: f64, z: f64) -> f64 {
        let w = self.width(z);
        (-(radius * radius) / (w * w)).exp() / self.normalization(z)
    }

    /// `int_0^{2pi} int_0^{R_max} E^2 R dR dphi` with `R_max = truncation * w(z)`.
    pub fn normalization_integral(&self, z: f64, truncation: f64, spec: &QuadSpec) -> Result<f64> {
        let r_max = truncation * self.width(z);
        let integrand = |radius: f64| {
            let e = self.field(radius, z);
            e * e * radius
        };
        Ok(2.0 * PI * integrate(integrand, 0.0, r_max, spec, "gaussian mode normalization")?.value)
    }
}

/// How the dipole field is evaluated across the cavity mode's footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipoleWeighting {
    /// Dipole field frozen at its on-axis value `sqrt(3/8pi) / z`.
    OnAxis,
    /// Full `cos(theta) / r` dependence on the plane.
    Exact,
}

/// Quadrature settings for [`overlap_eta_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapQuadrature {
    /// Radial cutoff in units of `w(z)`.
    pub truncation: f64,
    pub weighting: DipoleWeighting,
    pub quad: QuadSpec,
}

impl Default for OverlapQuadrature {
    fn default() -> Self {
        Self {
            truncation: 8.0,
            weighting: DipoleWeighting::OnAxis,
            quad: QuadSpec::with_rel_tol(1e-12),
        }
    }
}

/// Far-field plane used when none is given: `100 z0`.
pub fn default_overlap_plane(wavelength: f64, waist: f64) -> f64 {
    100.0 * PI * waist * waist / wavelength
}

/// `eta = sqrt(3)/(2 pi) lambda / w0`, the far-field limit of the overlap integral.
pub fn overlap_eta_analytic(wavelength: f64, waist: f64) -> f64 {
    3f64.sqrt() / (2.0 * PI) * wavelength / waist
}

/// Overlap `int E_dip E_cav dA` evaluated on the plane at distance `z` from the scatterer.
pub fn overlap_eta_numeric(wavelength: f64, waist: f64, z: f64, settings: &OverlapQuadrature) -> Result<f64> {
    require_positive("overlap integral", "plane distance z", z)?;
    let mode = GaussianMode::new(waist, wavelength)?;
    let dipole = DipoleMode::default();
    let r_max = settings.truncation * mode.width(z);
    let integrand = |radius: f64| {
        let e_dip = match settings.weighting {
            DipoleWeighting::OnAxis => dipole.field(0.0, z),
            DipoleWeighting::Exact => {
                let r = radius.hypot(z);
                dipole.prefactor * (z / r) / r
            }
        };
        e_dip * mode.field(radius, z) * radius
    };
    Ok(2.0 * PI * integrate(integrand, 0.0, r_max, &settings.quad, "dipole-cavity overlap")?.value)
}

/// Fraction of dipole-mode power landing in the cavity-defined mode, `2 eta^2 = 3/(2 pi^2) (lambda/w0)^2`.
pub fn fraction_into_cavity_mode(wavelength: f64, waist: f64) -> f64 {
    1.5 / (PI * PI) * (wavelength / waist).powi(2)
}

/// Total free-space power into the dipole mode, `4 pi^2 w0^2 / (3 lambda^2) a^2 P_p`.
pub fn dipole_mode_power(amplitude: f64, pump_power: f64, wavelength: f64, waist: f64) -> f64 {
    4.0 * PI * PI * waist * waist / (3.0 * wavelength * wavelength) * amplitude * amplitude * pump_power
}

/// Antinode cavity power over dipole-mode power, `6/pi^2 (lambda/w0)^2 F/pi`.
pub fn purcell_ratio(finesse: f64, wavelength: f64, waist: f64) -> f64 {
    6.0 / (PI * PI) * (wavelength / waist).powi(2) * finesse / PI
}

/// Purcell factor `2C = 3/(4 pi^2) Q lambda^3 / V`.
pub fn purcell_factor_2c(q_factor: f64, wavelength: f64, mode_volume: f64) -> f64 {
    0.75 / (PI * PI) * q_factor * wavelength.powi(3) / mode_volume
}

/// `2C` for a Fabry-Perot resonator, substituting `Q = 2dF/lambda` and `V = pi w0^2 d/4`.
pub fn fabry_perot_purcell_factor(finesse: f64, mirror_separation: f64, wavelength: f64, waist: f64) -> f64 {
    let q = 2.0 * mirror_separation * finesse / wavelength;
    let v = PI * waist * waist * mirror_separation / 4.0;
    purcell_factor_2c(q, wavelength, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{cavity_powers, Coupling};
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 532e-9;
    const W0: f64 = 45e-6;

    #[test]
    fn dipole_normalization() {
        assert_relative_eq!(dipole_normalization_check().unwrap(), 1.0, epsilon = 1e-12);
        let doubled = DipoleMode {
            prefactor: 2.0 * DipoleMode::default().prefactor,
        };
        let spec = QuadSpec::default();
        assert_relative_eq!(doubled.normalization_integral(-PI / 2.0, PI / 2.0, &spec).unwrap(), 4.0, max_relative = 1e-10);
        // int cos^3 over [-a, a] = 2 (sin a - sin^3 a / 3); times 2 pi * 3/(8 pi)
        let a = PI / 4.0;
        let closed = 0.75 * 2.0 * (a.sin() - a.sin().powi(3) / 3.0);
        let partial = DipoleMode::default().normalization_integral(-a, a, &spec).unwrap();
        assert_relative_eq!(partial, closed, max_relative = 1e-10);
    }

    #[test]
    fn gaussian_normalization() {
        let mode = GaussianMode::new(W0, LAMBDA).unwrap();
        for z in [0.0, 0.3 * mode.rayleigh_length(), 100.0 * mode.rayleigh_length()] {
            let n = mode.normalization_integral(z, 8.0, &QuadSpec::with_rel_tol(1e-12)).unwrap();
            assert_relative_eq!(n, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn eta_analytic_examples() {
        assert_relative_eq!(overlap_eta_analytic(LAMBDA, W0), 3.2590e-3, max_relative = 1e-4);
        assert_relative_eq!(overlap_eta_analytic(W0 * 2.0 * PI / 3f64.sqrt(), W0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            overlap_eta_analytic(LAMBDA, 2.0 * W0),
            overlap_eta_analytic(LAMBDA, W0) / 2.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn eta_numeric_converges_to_far_field() {
        let analytic = overlap_eta_analytic(LAMBDA, W0);
        let z0 = PI * W0 * W0 / LAMBDA;
        let s = OverlapQuadrature::default();
        let near = overlap_eta_numeric(LAMBDA, W0, 100.0 * z0, &s).unwrap();
        assert!((near / analytic - 1.0).abs() < 1e-3);
        let far = overlap_eta_numeric(LAMBDA, W0, 1e4 * z0, &s).unwrap();
        assert!((far / analytic - 1.0).abs() < 1e-5);
        let wide = overlap_eta_numeric(LAMBDA, 2.0 * W0, 1e4 * 4.0 * z0, &s).unwrap();
        assert_relative_eq!(wide / far, 0.5, epsilon = 1e-3);
        assert!(overlap_eta_numeric(LAMBDA, W0, 0.0, &s).is_err());
    }

    #[test]
    fn exact_weighting_error_is_second_order() {
        let z0 = PI * W0 * W0 / LAMBDA;
        let z = 100.0 * z0;
        let on_axis = overlap_eta_numeric(LAMBDA, W0, z, &OverlapQuadrature::default()).unwrap();
        let exact = overlap_eta_numeric(
            LAMBDA,
            W0,
            z,
            &OverlapQuadrature {
                weighting: DipoleWeighting::Exact,
                ..OverlapQuadrature::default()
            },
        )
        .unwrap();
        let w = GaussianMode::new(W0, LAMBDA).unwrap().width(z);
        assert!(exact < on_axis);
        assert!((on_axis - exact) / on_axis < (w / z).powi(2));
    }

    #[test]
    fn power_fraction_chain() {
        assert_relative_eq!(fraction_into_cavity_mode(LAMBDA, W0), 2.1242e-5, max_relative = 1e-4);
        let eta = overlap_eta_analytic(LAMBDA, W0);
        assert_relative_eq!(fraction_into_cavity_mode(LAMBDA, W0), 2.0 * eta * eta, max_relative = 1e-14);
        assert!(fraction_into_cavity_mode(LAMBDA, 1e6) < 1e-20);

        let budget = cavity_powers(0.02, 3.0, 100.0, Coupling::Averaged).unwrap();
        let p_dip = dipole_mode_power(0.02, 3.0, LAMBDA, W0);
        assert_relative_eq!(budget.free_space_cavity_mode / p_dip, fraction_into_cavity_mode(LAMBDA, W0), max_relative = 1e-14);
        assert_relative_eq!(dipole_mode_power(1.0, 1.0, LAMBDA, W0), 9.4155e4, max_relative = 1e-4);
        let unit_waist = LAMBDA * 3f64.sqrt() / (2.0 * PI);
        assert_relative_eq!(dipole_mode_power(1.0, 1.0, LAMBDA, unit_waist), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn purcell_examples() {
        assert_relative_eq!(purcell_ratio(1000.0, LAMBDA, W0), 0.027046, max_relative = 1e-4);
        assert_relative_eq!(purcell_ratio(1e5, LAMBDA, W0), 2.7046, max_relative = 1e-4);
        let crossover = PI.powi(3) * W0 * W0 / (6.0 * LAMBDA * LAMBDA);
        assert_relative_eq!(purcell_ratio(crossover, LAMBDA, W0), 1.0, max_relative = 1e-14);
        let anti = cavity_powers(0.01, 1.0, 1000.0, Coupling::Antinode).unwrap();
        assert_relative_eq!(
            anti.cavity / dipole_mode_power(0.01, 1.0, LAMBDA, W0),
            purcell_ratio(1000.0, LAMBDA, W0),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            purcell_factor_2c(1e7, LAMBDA, 2.0e-12),
            purcell_factor_2c(1e7, LAMBDA, 1.0e-12) / 2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            fabry_perot_purcell_factor(1000.0, 6e-3, LAMBDA, W0),
            purcell_ratio(1000.0, LAMBDA, W0),
            max_relative = 1e-13
        );
    }
}
