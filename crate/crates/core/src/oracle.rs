//! Independent reference computations.
//!
//! Each function reaches a library result by a different route: ray-transfer
//! matrices instead of the closed-form resonator formulas, random velocity
//! samples instead of the Doppler formula, direct averaging over scatterer
//! position, and a uniform-grid sum instead of adaptive quadrature.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::{BOLTZMANN, SPEED_OF_LIGHT};
use crate::error::{require_positive, Error, Result};
use crate::field::{intracavity_field, ScatterConfig};
use crate::optics::GasSpecies;
use crate::quadrature::periodic_mean;
use crate::spectra::{cavity_lorentzian, SpectralProfile, FWHM_PER_SIGMA};

type Abcd = [[f64; 2]; 2];

fn mul(a: &Abcd, b: &Abcd) -> Abcd {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn free_space(length: f64) -> Abcd {
    [[1.0, length], [0.0, 1.0]]
}

fn curved_mirror(radius: f64) -> Abcd {
    [[1.0, 0.0], [-2.0 / radius, 1.0]]
}

/// Fundamental eigenmode of a two-mirror resonator found from its round-trip matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdEigenmode {
    /// 1/e^2 intensity radius at the focus, m.
    pub waist: f64,
    /// Distance from the first mirror to the focus, m.
    pub waist_position: f64,
    /// Round-trip Gouy phase, rad.
    pub roundtrip_gouy: f64,
    /// Frequency offset of the first transverse mode, Hz.
    pub transverse_mode_spacing: f64,
}

/// Solves the self-consistent `q` parameter for mirrors of radii `r1`, `r2` spaced by `d`.
pub fn abcd_eigenmode(d: f64, r1: f64, r2: f64, wavelength: f64) -> Result<AbcdEigenmode> {
    require_positive("abcd_eigenmode", "mirror separation", d)?;
    require_positive("abcd_eigenmode", "wavelength", wavelength)?;
    // reference plane just in front of mirror 1 on the returning beam
    let m = [curved_mirror(r1), free_space(d), curved_mirror(r2), free_space(d)]
        .iter()
        .fold([[1.0, 0.0], [0.0, 1.0]], |acc, x| mul(x, &acc));
    let [[a, b], [_, dd]] = m;
    let half_trace = 0.5 * (a + dd);
    if half_trace.abs() >= 1.0 {
        return Err(Error::domain("abcd_eigenmode", format!("no bound mode: |(A+D)/2| = {}", half_trace.abs())));
    }
    // 1/q = (D - A)/(2B) - i sqrt(1 - ((A+D)/2)^2)/|B|
    let sin_theta = (1.0 - half_trace * half_trace).sqrt();
    let inv_q = Complex64::new((dd - a) / (2.0 * b), -sin_theta / b.abs());
    let q = inv_q.inv();
    // q = z + i z0 with z measured from the focus, here past it
    let z0 = q.im;
    let waist = (wavelength * z0 / PI).sqrt();
    let gouy = half_trace.acos();
    Ok(AbcdEigenmode {
        waist,
        waist_position: q.re,
        roundtrip_gouy: gouy,
        transverse_mode_spacing: SPEED_OF_LIGHT / (2.0 * d) * gouy / (2.0 * PI),
    })
}

/// Doppler widths estimated from sampled Maxwell-Boltzmann velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloDoppler {
    pub samples: usize,
    /// FWHM of the single-beam shift `v_x / lambda`, Hz.
    pub fwhm_absorption: f64,
    /// FWHM of the shift `(k_in - k_out) . v / 2pi` with the pump along x and
    /// detection along y, Hz.
    pub fwhm_observed: f64,
}

/// Samples thermal velocities and measures both shift distributions. The pump runs
/// along x and the cavity along y, so the scattering wavevector difference has
/// magnitude `sqrt(2) k`; the widths come from the sample standard deviations.
pub fn monte_carlo_doppler(species: &GasSpecies, wavelength: f64, samples: usize, seed: u64) -> Result<MonteCarloDoppler> {
    require_positive("monte_carlo_doppler", "wavelength", wavelength)?;
    if samples < 2 {
        return Err(Error::domain("monte_carlo_doppler", "need at least two samples"));
    }
    let sigma_v = (BOLTZMANN * species.temperature / species.particle_mass()).sqrt();
    let normal = Normal::new(0.0, sigma_v).map_err(|e| Error::domain("monte_carlo_doppler", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 2.0 * PI / wavelength;
    let (mut sum_a, mut sq_a, mut sum_o, mut sq_o) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let vx: f64 = normal.sample(&mut rng);
        let vy: f64 = normal.sample(&mut rng);
        let _vz: f64 = normal.sample(&mut rng);
        let absorption = k * vx / (2.0 * PI);
        let observed = k * (vx - vy) / (2.0 * PI);
        sum_a += absorption;
        sq_a += absorption * absorption;
        sum_o += observed;
        sq_o += observed * observed;
    }
    let n = samples as f64;
    let std = |sum: f64, sq: f64| ((sq - sum * sum / n) / (n - 1.0)).sqrt();
    Ok(MonteCarloDoppler {
        samples,
        fwhm_absorption: FWHM_PER_SIGMA * std(sum_a, sq_a),
        fwhm_observed: FWHM_PER_SIGMA * std(sum_o, sq_o),
    })
}

/// Thermal FWHM `(1/lambda) sqrt(8 k T ln2 / m)` evaluated from the species record.
pub fn doppler_fwhm_reference(species: &GasSpecies, wavelength: f64) -> f64 {
    (8.0 * BOLTZMANN * species.temperature * LN_2 / species.particle_mass()).sqrt() / wavelength
}

/// `|E_c|^2` averaged over one standing-wave period of scatterer displacement.
pub fn position_averaged_intensity(
    amplitude: f64,
    pump_field: f64,
    wavenumber: f64,
    r1: f64,
    r2: f64,
    mirror_separation: f64,
    samples: usize,
) -> Result<f64> {
    let cfg = |displacement| ScatterConfig {
        amplitude,
        pump_field,
        wavenumber,
        displacement,
    };
    intracavity_field(&cfg(0.0), r1, r2, mirror_separation)?;
    Ok(periodic_mean(
        |dz| intracavity_field(&cfg(dz), r1, r2, mirror_separation).map_or(f64::NAN, |s| s.intensity()),
        0.0,
        PI / wavenumber,
        samples,
    ))
}

/// Spectral overlap by a midpoint sum on a uniform grid spanning `+-span_sigmas`
/// Doppler widths, with the step a fixed fraction of the cavity half-width.
pub fn spectral_overlap_grid(profile: &SpectralProfile, linewidth: f64, span_sigmas: f64, steps_per_hwhm: f64) -> Result<f64> {
    require_positive("spectral_overlap_grid", "linewidth", linewidth)?;
    let sigma = profile.observed_sigma();
    let half = span_sigmas * sigma;
    let step = 0.5 * linewidth / steps_per_hwhm;
    let n = (2.0 * half / step).ceil() as usize;
    let step = 2.0 * half / n as f64;
    Ok((0..n)
        .map(|i| {
            let x = -half + (i as f64 + 0.5) * step;
            profile.density(x) * cavity_lorentzian(x, linewidth)
        })
        .sum::<f64>()
        * step)
}

/// `2pi (3/8pi) int_{-a}^{a} cos^3` in closed form: `(3/2)(sin a - sin^3 a / 3)`.
pub fn dipole_partial_normalization(half_angle: f64) -> f64 {
    let s = half_angle.sin();
    1.5 * (s - s * s * s / 3.0)
}
