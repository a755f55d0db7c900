//! Doppler-broadened line shapes and their overlap with the cavity resonance.
//!
//! Light scattered at 90 degrees by a thermal gas carries the Doppler shift of the
//! wavevector difference `k_s - k_p`, whose length is `sqrt(2) k`. The observed width
//! is therefore `sqrt(2)` times the absorption Doppler width.
//!
//! The *spectral overlap* is the fraction of that spectrum a cavity resonance
//! accepts: the area-normalized Gaussian of the observed width integrated against the
//! peak-normalized Lorentzian of the cavity linewidth. Unlike the narrow-line
//! estimate `(pi/2) dnu g(0)` it saturates at 1 for wide resonances.
//!
//! Collisional broadening and Brillouin sidebands are not modeled, so traces are
//! only meaningful up to roughly 100 mbar.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::fmt::Write as _;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{AVOGADRO, BOLTZMANN, SPEED_OF_LIGHT};
use crate::error::{require_positive, Error, Result};
use crate::optics::{CavityParams, GasSpecies};
use crate::quadrature::{integrate_with_breakpoints, QuadSpec};

/// Schema tag written into serialized traces.
pub const TRACE_SCHEMA: &str = "cavray.spectrum_trace/1";

/// CSV header of a serialized trace.
pub const TRACE_CSV_HEADER: &str = "detuning_Hz,signal_normalized";

/// Gaussian FWHM over standard deviation, `2 sqrt(2 ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Gaussian half-widths covered by the overlap integral.
const GAUSSIAN_SPAN: f64 = 8.0;
/// Lorentzian half-widths added on top of the Gaussian span.
const LORENTZIAN_SPAN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    /// Absorption Doppler FWHM, Hz.
    pub doppler_fwhm_absorption: f64,
    /// FWHM seen in 90 degree scattering, Hz.
    pub doppler_fwhm_observed: f64,
    /// Hz.
    pub center_frequency: f64,
}

impl SpectralProfile {
    pub fn from_absorption_width(doppler_fwhm_absorption: f64, center_frequency: f64) -> Result<Self> {
        require_positive("spectral profile", "Doppler width", doppler_fwhm_absorption)?;
        require_positive("spectral profile", "centre frequency", center_frequency)?;
        Ok(Self {
            doppler_fwhm_absorption,
            doppler_fwhm_observed: SQRT_2 * doppler_fwhm_absorption,
            center_frequency,
        })
    }

    pub fn for_species(species: &GasSpecies, wavelength: f64) -> Result<Self> {
        let width = doppler_fwhm(wavelength, species.temperature, species.molar_mass)?;
        Self::from_absorption_width(width, SPEED_OF_LIGHT / wavelength)
    }

    /// Standard deviation of the observed Gaussian, Hz.
    pub fn observed_sigma(&self) -> f64 {
        self.doppler_fwhm_observed / FWHM_PER_SIGMA
    }

    /// Area-normalized observed line shape at `detuning` from the centre.
    pub fn density(&self, detuning: f64) -> f64 {
        let s = self.observed_sigma();
        (-0.5 * (detuning / s).powi(2)).exp() / (s * (2.0 * PI).sqrt())
    }
}

/// Absorption Doppler FWHM `(nu0/c) sqrt(8 k_B T ln2 / m)`, Hz. `molar_mass` in kg/mol.
pub fn doppler_fwhm(wavelength: f64, temperature: f64, molar_mass: f64) -> Result<f64> {
    require_positive("doppler width", "wavelength", wavelength)?;
    require_positive("doppler width", "temperature", temperature)?;
    require_positive("doppler width", "molar mass", molar_mass)?;
    let mass = molar_mass / AVOGADRO;
    Ok((8.0 * BOLTZMANN * temperature * LN_2 / mass).sqrt() / wavelength)
}

/// Peak-normalized cavity response at `detuning`, FWHM `linewidth`.
pub fn cavity_lorentzian(detuning: f64, linewidth: f64) -> f64 {
    let hwhm = 0.5 * linewidth;
    hwhm * hwhm / (detuning * detuning + hwhm * hwhm)
}

/// Accepted fraction of the observed line when the cavity sits `cavity_detuning`
/// away from line centre.
pub fn detuned_overlap(profile: &SpectralProfile, linewidth: f64, cavity_detuning: f64) -> Result<f64> {
    require_positive("spectral overlap", "cavity linewidth", linewidth)?;
    let sigma = profile.observed_sigma();
    let hwhm = 0.5 * linewidth;
    let half_span = GAUSSIAN_SPAN * sigma + LORENTZIAN_SPAN * hwhm;
    let mut points = vec![
        -half_span,
        -GAUSSIAN_SPAN * sigma,
        -sigma,
        0.0,
        sigma,
        GAUSSIAN_SPAN * sigma,
        half_span,
        cavity_detuning - 4.0 * hwhm,
        cavity_detuning - hwhm,
        cavity_detuning,
        cavity_detuning + hwhm,
        cavity_detuning + 4.0 * hwhm,
    ];
    points.retain(|p| p.abs() <= half_span);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let integral = integrate_with_breakpoints(
        |nu| profile.density(nu) * cavity_lorentzian(nu - cavity_detuning, linewidth),
        &points,
        &QuadSpec {
            abs_tol: 1e-15,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        },
        "doppler-cavity spectral overlap",
    )?;
    Ok(integral.value)
}

/// Fraction of the Doppler-broadened scattered spectrum accepted by a resonant cavity.
pub fn spectral_overlap(profile: &SpectralProfile, linewidth: f64) -> Result<f64> {
    detuned_overlap(profile, linewidth, 0.0)
}

/// Narrow-cavity asymptote `(pi/2) dnu g(0)` of [`spectral_overlap`].
pub fn narrow_line_overlap(profile: &SpectralProfile, linewidth: f64) -> f64 {
    0.5 * PI * linewidth * profile.density(0.0)
}

/// Approximate FWHM of a Gaussian-Lorentzian convolution (Olivero-Longbothum).
pub fn voigt_fwhm(gaussian_fwhm: f64, lorentzian_fwhm: f64) -> f64 {
    0.5346 * lorentzian_fwhm + (0.2166 * lorentzian_fwhm.powi(2) + gaussian_fwhm.powi(2)).sqrt()
}

/// Signal for pump polarization at `theta` to the cavity axis, `(1 - eps) sin^2 + eps`.
pub fn polarization_signal(theta: f64, extinction: f64) -> f64 {
    (1.0 - extinction) * theta.sin().powi(2) + extinction
}

/// A `sin^2` polarization response with a residual floor from imperfect polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationResponse {
    pub extinction: f64,
}

impl PolarizationResponse {
    pub fn new(extinction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&extinction) {
            return Err(Error::domain(
                "polarization response",
                format!("extinction must lie in [0, 1), got {extinction}"),
            ));
        }
        Ok(Self { extinction })
    }

    pub fn response(&self, theta: f64) -> f64 {
        polarization_signal(theta, self.extinction)
    }

    /// Samples the response over `angles`, returning `(theta, signal)` pairs.
    pub fn sample(&self, angles: &[f64]) -> Vec<(f64, f64)> {
        angles.iter().map(|&t| (t, self.response(t))).collect()
    }
}

/// Relative at-rest signals `(a_i/a_ref)^2 overlap_i/overlap_ref`; the first species
/// is the reference.
pub fn species_ratio(species: &[GasSpecies], cavity: &CavityParams) -> Result<Vec<f64>> {
    let reference = species
        .first()
        .ok_or_else(|| Error::domain("species ratio", "species list is empty"))?;
    if !(reference.polarizability > 0.0) {
        return Err(Error::domain("species ratio", "reference polarizability must be positive"));
    }
    let signal = |s: &GasSpecies| -> Result<f64> {
        let profile = SpectralProfile::for_species(s, cavity.wavelength)?;
        Ok(s.polarizability.powi(2) * spectral_overlap(&profile, cavity.linewidth)?)
    };
    let reference_signal = signal(reference)?;
    species.iter().map(|s| Ok(signal(s)? / reference_signal)).collect()
}

/// Power that particles at rest would scatter, `measured / overlap`.
pub fn at_rest_power(measured: f64, overlap: f64) -> Result<f64> {
    if !(overlap > 0.0 && overlap <= 1.0) {
        return Err(Error::domain("at-rest power", format!("overlap must lie in (0, 1], got {overlap}")));
    }
    Ok(measured / overlap)
}

/// One gas in a scan, with its density in arbitrary but common units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanComponent {
    pub species: GasSpecies,
    pub density: f64,
}

/// Cavity detuning window of a scan, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub start: f64,
    pub stop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceNormalization {
    /// Relative units: `density * polarizability^2 * accepted fraction`.
    Absolute,
    /// Highest sample set to 1.
    Peak,
    /// The named species' own resonant peak set to 1.
    Reference(String),
}

/// A simulated cavity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub schema: String,
    pub species: Vec<String>,
    pub cavity: Option<CavityParams>,
    pub detunings: Vec<f64>,
    pub signals: Vec<f64>,
}

impl SpectrumTrace {
    pub fn new(detunings: Vec<f64>, signals: Vec<f64>, species: Vec<String>, cavity: Option<CavityParams>) -> Result<Self> {
        if detunings.len() != signals.len() {
            return Err(Error::domain(
                "spectrum trace",
                format!("{} detunings but {} signals", detunings.len(), signals.len()),
            ));
        }
        if let Some(bad) = signals.iter().find(|s| !(**s >= 0.0)) {
            return Err(Error::domain("spectrum trace", format!("negative or NaN signal {bad}")));
        }
        Ok(Self {
            schema: TRACE_SCHEMA.to_string(),
            species,
            cavity,
            detunings,
            signals,
        })
    }

    /// Writes the two-column CSV, 12 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.detunings.len() + 1));
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for (d, s) in self.detunings.iter().zip(&self.signals) {
            let _ = writeln!(out, "{d:.11e},{s:.11e}");
        }
        out
    }

    /// Parses the two-column CSV written by [`Self::to_csv`].
    pub fn from_csv<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["detuning_Hz", "signal_normalized"] {
            return Err(err(1, format!("expected header '{TRACE_CSV_HEADER}'")));
        }
        let mut detunings = Vec::new();
        let mut signals = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let value = |i: usize| -> Result<f64> {
                let raw = record.get(i).unwrap_or("");
                raw.parse().map_err(|_| err(line, format!("invalid number '{raw}'")))
            };
            detunings.push(value(0)?);
            signals.push(value(1)?);
        }
        Self::new(detunings, signals, Vec::new(), None).map_err(|e| err(0, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let trace: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: "<json>".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if trace.schema != TRACE_SCHEMA {
            return Err(Error::Config(format!("unsupported trace schema '{}'", trace.schema)));
        }
        Self::new(trace.detunings, trace.signals, trace.species, trace.cavity)
    }

    /// Full width at half maximum of the peak nearest `near`, by linear interpolation.
    pub fn peak_fwhm(&self, near: f64) -> Option<f64> {
        let centre = self
            .detunings
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - near).abs().total_cmp(&(b.1 - near).abs()))?
            .0;
        // climb to the local maximum
        let mut peak = centre;
        while peak + 1 < self.signals.len() && self.signals[peak + 1] > self.signals[peak] {
            peak += 1;
        }
        while peak > 0 && self.signals[peak - 1] > self.signals[peak] {
            peak -= 1;
        }
        let half = 0.5 * self.signals[peak];
        let crossing = |range: &mut dyn Iterator<Item = usize>, step: isize| -> Option<f64> {
            for i in range {
                let j = (i as isize + step) as usize;
                if self.signals[j] < half {
                    let (x0, y0, x1, y1) = (self.detunings[i], self.signals[i], self.detunings[j], self.signals[j]);
                    return Some(x0 + (half - y0) * (x1 - x0) / (y1 - y0));
                }
            }
            None
        };
        let right = crossing(&mut (peak..self.signals.len() - 1), 1)?;
        let left = crossing(&mut (1..=peak).rev(), -1)?;
        Some(right - left)
    }
}

/// Simulates the cavity output while the resonance is scanned across `range`.
///
/// Every TEM00 order (spaced by the free spectral range) contributes a peak whose
/// shape is the species' observed Doppler profile convolved with the cavity
/// Lorentzian, weighted by `density * polarizability^2`.
pub fn scan_spectrum(
    cavity: &CavityParams,
    components: &[ScanComponent],
    range: ScanRange,
    resolution: f64,
    normalization: &TraceNormalization,
) -> Result<SpectrumTrace> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::domain("scan spectrum", format!("resolution must be positive, got {resolution}")));
    }
    if !(range.stop > range.start) {
        return Err(Error::domain("scan spectrum", "scan range must have stop > start"));
    }
    let profiles = components
        .iter()
        .map(|c| {
            if !(c.density >= 0.0) {
                return Err(Error::domain("scan spectrum", format!("negative density for {}", c.species.name)));
            }
            SpectralProfile::for_species(&c.species, cavity.wavelength)
        })
        .collect::<Result<Vec<_>>>()?;
    let narrowest = if profiles.is_empty() {
        cavity.linewidth
    } else {
        profiles
            .iter()
            .map(|p| voigt_fwhm(p.doppler_fwhm_observed, cavity.linewidth))
            .fold(f64::INFINITY, f64::min)
    };
    if resolution >= narrowest / 5.0 {
        return Err(Error::domain(
            "scan spectrum",
            format!("resolution {resolution:e} Hz does not resolve the narrowest feature ({narrowest:e} Hz) five times"),
        ));
    }

    let fsr = cavity.free_spectral_range;
    let first_order = (range.start / fsr).floor() as i64 - 1;
    let last_order = (range.stop / fsr).ceil() as i64 + 1;
    let n = ((range.stop - range.start) / resolution).floor() as usize + 1;
    let detunings: Vec<f64> = (0..n).map(|i| range.start + i as f64 * resolution).collect();
    let weights: Vec<f64> = components
        .iter()
        .map(|c| c.density * c.species.polarizability.powi(2))
        .collect();

    let signals = detunings
        .par_iter()
        .map(|&detuning| {
            let mut total = 0.0;
            for (profile, &weight) in profiles.iter().zip(&weights) {
                if weight == 0.0 {
                    continue;
                }
                for order in first_order..=last_order {
                    let offset = detuning - order as f64 * fsr;
                    total += weight * detuned_overlap(profile, cavity.linewidth, offset)?;
                }
            }
            Ok(total)
        })
        .collect::<Result<Vec<f64>>>()?;

    let scale = match normalization {
        TraceNormalization::Absolute => 1.0,
        TraceNormalization::Peak => signals.iter().copied().fold(0.0, f64::max),
        TraceNormalization::Reference(name) => {
            let index = components
                .iter()
                .position(|c| &c.species.name == name)
                .ok_or_else(|| Error::Config(format!("reference species '{name}' not in scan")))?;
            weights[index] * spectral_overlap(&profiles[index], cavity.linewidth)?
        }
    };
    let signals = if scale > 0.0 {
        signals.into_iter().map(|s| s / scale).collect()
    } else {
        signals
    };
    SpectrumTrace::new(
        detunings,
        signals,
        components.iter().map(|c| c.species.name.clone()).collect(),
        Some(*cavity),
    )
}
