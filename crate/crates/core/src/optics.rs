//! Resonator and gas parameter model.
//!
//! Converts raw mirror, geometry and gas specifications into the derived quantities
//! every other module consumes. Mirrors are lossless: `R + T = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{AVOGADRO, BOLTZMANN, ROOM_TEMPERATURE, SPEED_OF_LIGHT};
use crate::error::{require_positive, Error, Result};

/// A lossless mirror described by its intensity reflectivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    reflectivity: f64,
}

impl MirrorSpec {
    /// Builds a mirror from an intensity reflectivity in `[0, 1)`.
    pub fn from_reflectivity(reflectivity: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&reflectivity) {
            return Err(Error::domain(
                "mirror",
                format!("intensity reflectivity must lie in [0, 1), got {reflectivity}"),
            ));
        }
        Ok(Self { reflectivity })
    }

    /// Builds a mirror from an intensity transmission in `(0, 1]`.
    pub fn from_transmission(transmission: f64) -> Result<Self> {
        if !(transmission > 0.0 && transmission <= 1.0) {
            return Err(Error::domain(
                "mirror",
                format!("intensity transmission must lie in (0, 1], got {transmission}"),
            ));
        }
        Self::from_reflectivity(1.0 - transmission)
    }

    /// Intensity reflectivity `R`.
    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    /// Intensity transmission `T = 1 - R`.
    pub fn transmission(&self) -> f64 {
        1.0 - self.reflectivity
    }

    /// Amplitude reflection coefficient `r = sqrt(R)`.
    pub fn amplitude(&self) -> f64 {
        self.reflectivity.sqrt()
    }
}

/// Two mirrors of equal radius of curvature facing each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Mirror separation, m.
    pub mirror_separation: f64,
    /// Radius of curvature shared by both mirrors, m.
    pub radius_of_curvature: f64,
    pub left_mirror: MirrorSpec,
    pub right_mirror: MirrorSpec,
}

impl CavityGeometry {
    /// Validates stability (`0 < d < 2 Rc`) on construction.
    pub fn new(
        mirror_separation: f64,
        radius_of_curvature: f64,
        left_mirror: MirrorSpec,
        right_mirror: MirrorSpec,
    ) -> Result<Self> {
        check_stable("cavity geometry", mirror_separation, radius_of_curvature)?;
        Ok(Self {
            mirror_separation,
            radius_of_curvature,
            left_mirror,
            right_mirror,
        })
    }

    /// The resonator used in the measurements: 6 mm long, 45 mm mirrors, both R = 99.7 %.
    pub fn reference() -> Self {
        let hr = MirrorSpec::from_reflectivity(0.997).expect("valid reflectivity");
        Self::new(6.0e-3, 45.0e-3, hr, hr).expect("stable geometry")
    }
}

/// Every derived resonator quantity at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub mirror_separation: f64,
    pub wavelength: f64,
    pub finesse: f64,
    /// Hz.
    pub free_spectral_range: f64,
    /// Full width at half maximum of the cavity resonance, Hz.
    pub linewidth: f64,
    pub q_factor: f64,
    /// Waist radius of the TEM00 mode, m.
    pub waist: f64,
    /// m.
    pub rayleigh_length: f64,
    /// Hz.
    pub transverse_mode_spacing: f64,
    /// Effective mode volume `pi w0^2 d / 4`, m^3.
    pub mode_volume: f64,
}

impl CavityParams {
    /// Replaces the mirror-formula finesse with a measured one (e.g. from the
    /// transmission linewidth); linewidth and Q follow.
    pub fn with_finesse(mut self, finesse: f64) -> Result<Self> {
        require_positive("cavity parameters", "finesse", finesse)?;
        self.finesse = finesse;
        self.linewidth = self.free_spectral_range / finesse;
        self.q_factor = 2.0 * self.mirror_separation * finesse / self.wavelength;
        Ok(self)
    }

    /// Replaces the computed waist; Rayleigh length and mode volume follow.
    pub fn with_waist(mut self, waist: f64) -> Result<Self> {
        require_positive("cavity parameters", "waist", waist)?;
        self.waist = waist;
        self.rayleigh_length = PI * waist * waist / self.wavelength;
        self.mode_volume = PI * waist * waist * self.mirror_separation / 4.0;
        Ok(self)
    }
}

/// A gas species: label, molar mass and static polarizability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSpecies {
    pub name: String,
    /// kg/mol.
    pub molar_mass: f64,
    /// CGS volume polarizability, cubic angstrom.
    pub polarizability: f64,
    /// K.
    pub temperature: f64,
}

impl GasSpecies {
    /// `molar_mass_g_per_mol` in g/mol, `polarizability_a3` in cubic angstrom; room temperature.
    pub fn new(name: &str, molar_mass_g_per_mol: f64, polarizability_a3: f64) -> Result<Self> {
        require_positive("gas species", "molar mass", molar_mass_g_per_mol)?;
        require_positive("gas species", "polarizability", polarizability_a3)?;
        Ok(Self {
            name: name.to_string(),
            molar_mass: molar_mass_g_per_mol * 1e-3,
            polarizability: polarizability_a3,
            temperature: ROOM_TEMPERATURE,
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        require_positive("gas species", "temperature", temperature)?;
        self.temperature = temperature;
        Ok(self)
    }

    /// Mass of a single particle, kg.
    pub fn particle_mass(&self) -> f64 {
        self.molar_mass / AVOGADRO
    }
}

/// The driving laser beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpBeam {
    /// m.
    pub wavelength: f64,
    /// W.
    pub power: f64,
    /// m.
    pub waist: f64,
    /// Angle between polarization and cavity axis, rad.
    pub polarization_angle: f64,
}

impl PumpBeam {
    pub fn new(wavelength: f64, power: f64, waist: f64, polarization_angle: f64) -> Result<Self> {
        require_positive("pump beam", "wavelength", wavelength)?;
        require_positive("pump beam", "waist", waist)?;
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::domain("pump beam", format!("power must be >= 0, got {power}")));
        }
        Ok(Self {
            wavelength,
            power,
            waist,
            polarization_angle,
        })
    }

    /// Wavenumber `2 pi / lambda`, rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

fn check_stable(op: &'static str, d: f64, rc: f64) -> Result<()> {
    require_positive(op, "mirror separation", d)?;
    require_positive(op, "radius of curvature", rc)?;
    if d >= 2.0 * rc {
        return Err(Error::domain(
            op,
            format!("unstable resonator: separation {d} m >= 2 x radius of curvature {rc} m"),
        ));
    }
    Ok(())
}

/// Finesse `pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2))`, without the high-reflectivity approximation.
pub fn finesse(left: &MirrorSpec, right: &MirrorSpec) -> Result<f64> {
    let product = left.reflectivity() * right.reflectivity();
    if product >= 1.0 {
        return Err(Error::domain(
            "finesse",
            format!("R1*R2 = {product} >= 1 describes a lossless trap"),
        ));
    }
    let root = product.sqrt();
    Ok(PI * root.sqrt() / (1.0 - root))
}

/// Free spectral range `c / 2d`, Hz.
pub fn free_spectral_range(mirror_separation: f64) -> Result<f64> {
    require_positive("free spectral range", "mirror separation", mirror_separation)?;
    Ok(SPEED_OF_LIGHT / (2.0 * mirror_separation))
}

/// TEM00 waist of a symmetric two-mirror resonator: `w0^2 = (lambda / 2 pi) sqrt(d (2 Rc - d))`.
pub fn symmetric_waist(mirror_separation: f64, radius_of_curvature: f64, wavelength: f64) -> Result<f64> {
    check_stable("symmetric waist", mirror_separation, radius_of_curvature)?;
    require_positive("symmetric waist", "wavelength", wavelength)?;
    let d = mirror_separation;
    Ok((wavelength / (2.0 * PI) * (d * (2.0 * radius_of_curvature - d)).sqrt()).sqrt())
}

/// Frequency spacing of adjacent transverse modes, `FSR arccos(g) / pi` with `g = 1 - d/Rc`.
pub fn transverse_mode_spacing(mirror_separation: f64, radius_of_curvature: f64) -> Result<f64> {
    check_stable("transverse mode spacing", mirror_separation, radius_of_curvature)?;
    let g = 1.0 - mirror_separation / radius_of_curvature;
    // sqrt(g1 g2) = |g| for identical mirrors
    Ok(free_spectral_range(mirror_separation)? * g.abs().acos() / PI)
}

/// Populates [`CavityParams`] for `geom` at `wavelength`.
pub fn derive_cavity_params(geom: &CavityGeometry, wavelength: f64) -> Result<CavityParams> {
    require_positive("cavity parameters", "wavelength", wavelength)?;
    let d = geom.mirror_separation;
    let finesse = finesse(&geom.left_mirror, &geom.right_mirror)?;
    if finesse <= 0.0 {
        return Err(Error::domain(
            "cavity parameters",
            "finesse vanishes for zero-reflectivity mirrors",
        ));
    }
    let fsr = free_spectral_range(d)?;
    let waist = symmetric_waist(d, geom.radius_of_curvature, wavelength)?;
    Ok(CavityParams {
        mirror_separation: d,
        wavelength,
        finesse,
        free_spectral_range: fsr,
        linewidth: fsr / finesse,
        q_factor: 2.0 * d * finesse / wavelength,
        waist,
        rayleigh_length: PI * waist * waist / wavelength,
        transverse_mode_spacing: transverse_mode_spacing(d, geom.radius_of_curvature)?,
        mode_volume: PI * waist * waist * d / 4.0,
    })
}

/// Ideal-gas number density `p / (k_B T)`, m^-3.
pub fn number_density(pressure: f64, temperature: f64) -> Result<f64> {
    require_positive("number density", "temperature", temperature)?;
    if !(pressure >= 0.0 && pressure.is_finite()) {
        return Err(Error::domain(
            "number density",
            format!("pressure must be >= 0, got {pressure}"),
        ));
    }
    Ok(pressure / (BOLTZMANN * temperature))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mirror(r: f64) -> MirrorSpec {
        MirrorSpec::from_reflectivity(r).unwrap()
    }

    #[test]
    fn mirror_invariants() {
        let m = mirror(0.959);
        assert_relative_eq!(m.reflectivity() + m.transmission(), 1.0);
        assert_relative_eq!(m.amplitude() * m.amplitude(), 0.959, max_relative = 1e-15);
        assert!(MirrorSpec::from_reflectivity(1.0).is_err());
        assert!(MirrorSpec::from_reflectivity(-0.1).is_err());
        assert!(MirrorSpec::from_transmission(0.0).is_err());
        assert_relative_eq!(MirrorSpec::from_transmission(0.003).unwrap().reflectivity(), 0.997);
    }

    #[test]
    fn finesse_examples() {
        // exact formula; the often quoted pi/(1-R) = 1047 is its high-R approximation
        assert_relative_eq!(finesse(&mirror(0.997), &mirror(0.997)).unwrap(), 1045.6256, max_relative = 1e-6);
        assert_eq!(finesse(&mirror(0.0), &mirror(0.0)).unwrap(), 0.0);
        assert_relative_eq!(finesse(&mirror(0.997), &mirror(0.959)).unwrap(), 140.0320, max_relative = 1e-6);
    }

    #[test]
    fn free_spectral_range_examples() {
        assert_relative_eq!(free_spectral_range(6.0e-3).unwrap(), 24.982_704_833e9, max_relative = 1e-10);
        assert_relative_eq!(free_spectral_range(12.0e-3).unwrap(), 12.491_352_417e9, max_relative = 1e-10);
        assert_relative_eq!(free_spectral_range(6.02e-3).unwrap(), 24.90e9, max_relative = 1e-3);
        assert!(free_spectral_range(0.0).is_err());
        assert!(free_spectral_range(-1.0).is_err());
    }

    #[test]
    fn waist_examples() {
        assert_relative_eq!(symmetric_waist(6e-3, 45e-3, 532e-9).unwrap(), 43.5987e-6, max_relative = 1e-5);
        // confocal: w0 = sqrt(lambda Rc / 2 pi)
        let confocal = symmetric_waist(45e-3, 45e-3, 532e-9).unwrap();
        assert_relative_eq!(confocal, (532e-9 * 45e-3 / (2.0 * PI)).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(confocal, 61.7e-6, max_relative = 1e-3);
        assert!(symmetric_waist(1e-12, 45e-3, 532e-9).unwrap() < 2e-7);
        assert!(symmetric_waist(90e-3, 45e-3, 532e-9).is_err());
    }

    #[test]
    fn transverse_spacing_examples() {
        assert_relative_eq!(transverse_mode_spacing(6e-3, 45e-3).unwrap(), 4.153_573_8e9, max_relative = 1e-7);
        let fsr = free_spectral_range(45e-3).unwrap();
        assert_relative_eq!(transverse_mode_spacing(45e-3, 45e-3).unwrap(), fsr / 2.0, max_relative = 1e-14);
        let planar = transverse_mode_spacing(1e-9, 45e-3).unwrap();
        assert!(planar / free_spectral_range(1e-9).unwrap() < 1e-4);
        assert!(transverse_mode_spacing(0.1, 45e-3).is_err());
    }

    #[test]
    fn reference_cavity_parameters() {
        let p = derive_cavity_params(&CavityGeometry::reference(), 532e-9).unwrap();
        assert_relative_eq!(p.q_factor, 2.3586e7, max_relative = 1e-4);
        assert_relative_eq!(p.mode_volume, 8.9575e-12, max_relative = 1e-4);
        assert_relative_eq!(p.linewidth, 23.8926e6, max_relative = 1e-4);
        assert_relative_eq!(p.linewidth * p.finesse, p.free_spectral_range, max_relative = 1e-15);
        assert_relative_eq!(p.q_factor * p.wavelength, 2.0 * p.mirror_separation * p.finesse, max_relative = 1e-15);
        assert_relative_eq!(p.rayleigh_length, PI * p.waist * p.waist / 532e-9, max_relative = 1e-15);
    }

    #[test]
    fn overrides_keep_invariants() {
        let p = derive_cavity_params(&CavityGeometry::reference(), 532e-9)
            .unwrap()
            .with_finesse(400.0)
            .unwrap()
            .with_waist(45e-6)
            .unwrap();
        assert_relative_eq!(p.linewidth * 400.0, p.free_spectral_range, max_relative = 1e-15);
        assert_relative_eq!(p.q_factor * p.wavelength, 2.0 * p.mirror_separation * 400.0, max_relative = 1e-15);
        assert_relative_eq!(p.mode_volume, PI * 45e-6 * 45e-6 * 6e-3 / 4.0, max_relative = 1e-15);
        assert!(p.with_finesse(0.0).is_err());
    }

    #[test]
    fn number_density_examples() {
        assert_relative_eq!(number_density(1e4, 295.0).unwrap(), 2.4552e24, max_relative = 1e-4);
        assert_eq!(number_density(0.0, 295.0).unwrap(), 0.0);
        assert_relative_eq!(number_density(1e5, 295.0).unwrap(), 2.4552e25, max_relative = 1e-4);
        assert!(number_density(1e4, 0.0).is_err());
        assert!(number_density(-1.0, 295.0).is_err());
    }

    #[test]
    fn unstable_geometry_rejected() {
        let m = mirror(0.99);
        assert!(CavityGeometry::new(0.1, 0.045, m, m).is_err());
        assert!(CavityGeometry::new(0.0, 0.045, m, m).is_err());
    }

    #[test]
    fn wavenumber() {
        let p = PumpBeam::new(532e-9, 1.0, 50e-6, PI / 2.0).unwrap();
        assert_relative_eq!(p.wavenumber() * p.wavelength, 2.0 * PI);
        assert!(PumpBeam::new(532e-9, -1.0, 50e-6, 0.0).is_err());
    }
}
