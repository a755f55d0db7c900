//! Scenario files.
//!
//! Flat `section.key_unit = value` lines; `#` starts a comment. Every physical
//! quantity carries its unit in the key suffix, dimensionless keys have none, and
//! lists are comma separated:
//!
//! ```text
//! cavity.mirror_separation_mm = 6.0
//! pump.wavelength_nm = 532
//! measurement.finesse = 1000, 400, 100
//! ```
//!
//! Keys left out fall back to the reference apparatus (6 mm, 45 mm mirrors, 532 nm,
//! 100 mbar Xe). The `anchor.*` and `measurement.*` sections have no defaults.
//! Unknown keys, duplicates and malformed values are reported with their line.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::constants::ROOM_TEMPERATURE;
use crate::error::{Error, Result};
use crate::experiment::FinessePoint;
use crate::optics::{derive_cavity_params, CavityGeometry, CavityParams, GasSpecies, MirrorSpec, PumpBeam};
use crate::overlap::DipoleWeighting;
use crate::species::SpeciesDatabase;
use crate::spectra::{ScanComponent, ScanRange, TraceNormalization};

/// The measurement campaign this crate reproduces.
pub const REFERENCE_SCENARIO: &str = "\
# Reference apparatus: 6 mm cavity, 45 mm mirrors, 532 nm pump, 100 mbar Xe
cavity.mirror_separation_mm = 6.0
cavity.radius_of_curvature_mm = 45.0
cavity.left_reflectivity = 0.997
cavity.right_reflectivity = 0.997
cavity.finesse = 1000
cavity.waist_um = 45

pump.wavelength_nm = 532
pump.power_W = 1.0
pump.waist_um = 50
pump.polarization_deg = 90
pump.extinction = 0.015

gas.species = Xe
gas.pressure_mbar = 100
gas.temperature_K = 295

scan.species = Xe, CF3H, N2
scan.density = 1, 1, 1
scan.start_GHz = -6
scan.stop_GHz = 31
scan.resolution_MHz = 10
scan.normalize = Xe

# HR mirror fixed, outcoupler exchanged; finesse from the transmission linewidth
measurement.finesse = 1000, 400, 100
measurement.outcoupler_reflectivity = 0.997, 0.989, 0.959
measurement.power_fW = 52, 85, 90
measurement.overlap = 0.042, 0.101, 0.334
measurement.compare_species = Xe, CF3H, N2

anchor.power_fW = 50
anchor.finesse = 1000
anchor.overlap = 0.042
anchor.free_space_power_fW = 1.3

forecast.polarizability_factor = 10
forecast.molecules = 1e5
forecast.finesse = 1e5

overlap.z_over_z0 = 100
overlap.weighting = on_axis
";

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Number,
    Numbers,
    Text,
    Texts,
}

// key, kind, multiplier to SI (1 for dimensionless)
const SCHEMA: &[(&str, Kind, f64)] = &[
    ("cavity.mirror_separation_mm", Kind::Number, 1e-3),
    ("cavity.radius_of_curvature_mm", Kind::Number, 1e-3),
    ("cavity.left_reflectivity", Kind::Number, 1.0),
    ("cavity.right_reflectivity", Kind::Number, 1.0),
    ("cavity.finesse", Kind::Number, 1.0),
    ("cavity.waist_um", Kind::Number, 1e-6),
    ("pump.wavelength_nm", Kind::Number, 1e-9),
    ("pump.power_W", Kind::Number, 1.0),
    ("pump.waist_um", Kind::Number, 1e-6),
    ("pump.polarization_deg", Kind::Number, PI / 180.0),
    ("pump.extinction", Kind::Number, 1.0),
    ("gas.species", Kind::Text, 1.0),
    ("gas.pressure_mbar", Kind::Number, 100.0),
    ("gas.temperature_K", Kind::Number, 1.0),
    ("scan.species", Kind::Texts, 1.0),
    ("scan.density", Kind::Numbers, 1.0),
    ("scan.start_GHz", Kind::Number, 1e9),
    ("scan.stop_GHz", Kind::Number, 1e9),
    ("scan.resolution_MHz", Kind::Number, 1e6),
    ("scan.normalize", Kind::Text, 1.0),
    ("measurement.finesse", Kind::Numbers, 1.0),
    ("measurement.outcoupler_reflectivity", Kind::Numbers, 1.0),
    ("measurement.power_fW", Kind::Numbers, 1e-15),
    ("measurement.overlap", Kind::Numbers, 1.0),
    ("measurement.compare_species", Kind::Texts, 1.0),
    ("anchor.power_fW", Kind::Number, 1e-15),
    ("anchor.finesse", Kind::Number, 1.0),
    ("anchor.overlap", Kind::Number, 1.0),
    ("anchor.free_space_power_fW", Kind::Number, 1e-15),
    ("forecast.polarizability_factor", Kind::Number, 1.0),
    ("forecast.molecules", Kind::Number, 1.0),
    ("forecast.finesse", Kind::Number, 1.0),
    ("overlap.z_over_z0", Kind::Number, 1.0),
    ("overlap.weighting", Kind::Text, 1.0),
];

/// Raw `key = value` pairs with their line numbers.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    source_name: String,
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut kv = Self {
            source_name: source_name.to_string(),
            entries: BTreeMap::new(),
        };
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| kv.error(line, format!("expected 'key = value', found '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&(_, kind, _)) = SCHEMA.iter().find(|(k, _, _)| *k == key) else {
                return Err(kv.error(line, unknown_key_message(key)));
            };
            if value.is_empty() {
                return Err(kv.error(line, format!("'{key}' has no value")));
            }
            if let Some((_, first)) = kv.entries.get(key) {
                return Err(kv.error(line, format!("duplicate key '{key}' (first set on line {first})")));
            }
            if matches!(kind, Kind::Number | Kind::Numbers) {
                for item in value.split(',') {
                    let item = item.trim();
                    if !item.parse::<f64>().is_ok_and(f64::is_finite) {
                        return Err(kv.error(line, format!("'{key}': '{item}' is not a finite number")));
                    }
                }
                if kind == Kind::Number && value.contains(',') {
                    return Err(kv.error(line, format!("'{key}' takes a single number")));
                }
            }
            kv.entries.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(kv)
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Parse {
            source_name: self.source_name.clone(),
            line,
            message,
        }
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    fn scale(key: &str) -> f64 {
        SCHEMA.iter().find(|(k, _, _)| *k == key).map_or(1.0, |(_, _, s)| *s)
    }

    /// SI value of a numeric key.
    fn number(&self, key: &str) -> Option<f64> {
        self.entries
            .get(key)
            .map(|(v, _)| v.parse::<f64>().expect("validated on parse") * Self::scale(key))
    }

    fn numbers(&self, key: &str) -> Option<Vec<f64>> {
        self.entries.get(key).map(|(v, _)| {
            v.split(',')
                .map(|x| x.trim().parse::<f64>().expect("validated on parse") * Self::scale(key))
                .collect()
        })
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn texts(&self, key: &str) -> Option<Vec<String>> {
        self.text(key)
            .map(|v| v.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect())
    }

    /// Attaches the line of `key` to an error raised while interpreting it.
    fn at<T>(&self, key: &str, result: Result<T>) -> Result<T> {
        result.map_err(|e| match e {
            Error::Parse { .. } => e,
            other => self.error(self.line(key), format!("'{key}': {other}")),
        })
    }
}

fn unknown_key_message(key: &str) -> String {
    let stem = key.rsplit_once('_').map_or(key, |(s, _)| s);
    match SCHEMA.iter().find(|(k, _, _)| k.starts_with(stem) && *k != key) {
        Some((known, _, _)) => format!("unknown key '{key}' (did you mean '{known}'?)"),
        None => format!("unknown key '{key}'"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorMeasurement {
    /// Detected power at the anchor finesse, W.
    pub power: f64,
    pub finesse: f64,
    pub overlap: Option<f64>,
    /// Same mode measured without the cavity, W.
    pub free_space_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastSettings {
    pub polarizability_factor: f64,
    pub molecules: f64,
    pub finesse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub components: Vec<ScanComponent>,
    pub range: ScanRange,
    pub resolution: f64,
    pub normalization: TraceNormalization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSettings {
    pub z_over_z0: f64,
    pub weighting: DipoleWeighting,
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: CavityGeometry,
    /// Finesse measured from the transmission linewidth, when it differs from the mirror formula.
    pub measured_finesse: Option<f64>,
    pub waist_override: Option<f64>,
    pub pump: PumpBeam,
    pub extinction: f64,
    pub gas: GasSpecies,
    /// Pa.
    pub pressure: f64,
    pub scan: ScanSettings,
    pub measurements: Vec<FinessePoint>,
    pub compare_species: Vec<GasSpecies>,
    pub anchor: Option<AnchorMeasurement>,
    pub forecast: ForecastSettings,
    pub overlap: OverlapSettings,
}

impl ScenarioConfig {
    /// The reference measurement campaign with the built-in species table.
    pub fn reference() -> Self {
        Self::parse(REFERENCE_SCENARIO, "<reference>", &SpeciesDatabase::builtin()).expect("reference scenario parses")
    }

    pub fn load(path: &Path, db: &SpeciesDatabase) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string(), db)
    }

    /// Parses `text`; keys it omits take their reference values, except the
    /// `anchor.*` and `measurement.*` sections.
    pub fn parse(text: &str, source_name: &str, db: &SpeciesDatabase) -> Result<Self> {
        let user = KeyValues::parse(text, source_name)?;
        let defaults = KeyValues::parse(REFERENCE_SCENARIO, "<reference>")?;
        let optional_section = |key: &str| key.starts_with("anchor.") || key.starts_with("measurement.");
        let number = |key: &str| -> Option<f64> {
            user.number(key).or_else(|| if optional_section(key) { None } else { defaults.number(key) })
        };
        let numbers = |key: &str| -> Option<Vec<f64>> {
            user.numbers(key).or_else(|| if optional_section(key) { None } else { defaults.numbers(key) })
        };
        let texts = |key: &str| -> Option<Vec<String>> {
            user.texts(key).or_else(|| if optional_section(key) { None } else { defaults.texts(key) })
        };
        let text_of = |key: &str| -> String {
            user.text(key).or_else(|| defaults.text(key)).unwrap_or_default().to_string()
        };
        let req = |key: &str| number(key).expect("every non-optional key has a default");
        let mirror = |key: &str, r: f64| user.at(key, MirrorSpec::from_reflectivity(r));
        let species = |key: &str, name: &str, temperature: f64| -> Result<GasSpecies> {
            user.at(key, db.get(name).cloned().and_then(|s| s.with_temperature(temperature)))
        };

        let geometry = user.at(
            "cavity.mirror_separation_mm",
            CavityGeometry::new(
                req("cavity.mirror_separation_mm"),
                req("cavity.radius_of_curvature_mm"),
                mirror("cavity.left_reflectivity", req("cavity.left_reflectivity"))?,
                mirror("cavity.right_reflectivity", req("cavity.right_reflectivity"))?,
            ),
        )?;

        let pump = user.at(
            "pump.wavelength_nm",
            PumpBeam::new(
                req("pump.wavelength_nm"),
                req("pump.power_W"),
                req("pump.waist_um"),
                req("pump.polarization_deg"),
            ),
        )?;
        let extinction = req("pump.extinction");
        if !(0.0..1.0).contains(&extinction) {
            return Err(user.error(user.line("pump.extinction"), "'pump.extinction' must lie in [0, 1)".into()));
        }

        let temperature = number("gas.temperature_K").unwrap_or(ROOM_TEMPERATURE);
        let gas = species("gas.species", &text_of("gas.species"), temperature)?;
        let pressure = req("gas.pressure_mbar");
        if pressure < 0.0 {
            return Err(user.error(user.line("gas.pressure_mbar"), "pressure must be >= 0".into()));
        }

        let scan_names = texts("scan.species").unwrap_or_default();
        let scan_density = numbers("scan.density").unwrap_or_else(|| vec![1.0; scan_names.len()]);
        if scan_density.len() != scan_names.len() {
            return Err(user.error(
                user.line("scan.density").max(user.line("scan.species")),
                format!("{} scan species but {} densities", scan_names.len(), scan_density.len()),
            ));
        }
        let components = scan_names
            .iter()
            .zip(&scan_density)
            .map(|(name, &density)| {
                Ok(ScanComponent {
                    species: species("scan.species", name, temperature)?,
                    density,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let normalization = match text_of("scan.normalize").as_str() {
            "none" => TraceNormalization::Absolute,
            "peak" => TraceNormalization::Peak,
            name => TraceNormalization::Reference(name.to_string()),
        };
        let scan = ScanSettings {
            components,
            range: ScanRange {
                start: req("scan.start_GHz"),
                stop: req("scan.stop_GHz"),
            },
            resolution: req("scan.resolution_MHz"),
            normalization,
        };

        let measurements = match numbers("measurement.finesse") {
            None => Vec::new(),
            Some(finesse) => {
                let n = finesse.len();
                let list = |key: &str| -> Result<Option<Vec<f64>>> {
                    match numbers(key) {
                        Some(v) if v.len() != n => Err(user.error(
                            user.line(key),
                            format!("'{key}' has {} entries, measurement.finesse has {n}", v.len()),
                        )),
                        other => Ok(other),
                    }
                };
                let outcouplers = list("measurement.outcoupler_reflectivity")?
                    .unwrap_or_else(|| vec![geometry.right_mirror.reflectivity(); n]);
                let powers = list("measurement.power_fW")?;
                let overlaps = list("measurement.overlap")?;
                (0..n)
                    .map(|i| {
                        Ok(FinessePoint {
                            finesse: finesse[i],
                            left: geometry.left_mirror,
                            right: mirror("measurement.outcoupler_reflectivity", outcouplers[i])?,
                            measured_power: powers.as_ref().map(|p| p[i]),
                            overlap: overlaps.as_ref().map(|o| o[i]),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let compare_species = texts("measurement.compare_species")
            .unwrap_or_default()
            .iter()
            .map(|name| species("measurement.compare_species", name, temperature))
            .collect::<Result<Vec<_>>>()?;

        let anchor = match (number("anchor.power_fW"), number("anchor.finesse")) {
            (None, None) => None,
            (Some(power), finesse) => Some(AnchorMeasurement {
                power,
                finesse: finesse.or(number("cavity.finesse")).ok_or_else(|| {
                    user.error(user.line("anchor.power_fW"), "anchor needs 'anchor.finesse'".into())
                })?,
                overlap: number("anchor.overlap"),
                free_space_power: number("anchor.free_space_power_fW"),
            }),
            (None, Some(_)) => {
                return Err(user.error(user.line("anchor.finesse"), "anchor needs 'anchor.power_fW'".into()))
            }
        };

        let weighting = match text_of("overlap.weighting").as_str() {
            "on_axis" => DipoleWeighting::OnAxis,
            "exact" => DipoleWeighting::Exact,
            other => {
                return Err(user.error(
                    user.line("overlap.weighting"),
                    format!("'overlap.weighting' must be on_axis or exact, got '{other}'"),
                ))
            }
        };

        let scenario = Self {
            geometry,
            measured_finesse: user.number("cavity.finesse").or_else(|| {
                // reference finesse only applies when the reference mirrors are kept
                (user.number("cavity.left_reflectivity").is_none() && user.number("cavity.right_reflectivity").is_none())
                    .then(|| defaults.number("cavity.finesse"))
                    .flatten()
            }),
            waist_override: number("cavity.waist_um"),
            pump,
            extinction,
            gas,
            pressure,
            scan,
            measurements,
            compare_species,
            anchor,
            forecast: ForecastSettings {
                polarizability_factor: req("forecast.polarizability_factor"),
                molecules: req("forecast.molecules"),
                finesse: req("forecast.finesse"),
            },
            overlap: OverlapSettings {
                z_over_z0: req("overlap.z_over_z0"),
                weighting,
            },
        };
        user.at("cavity.finesse", scenario.cavity_params())?;
        Ok(scenario)
    }

    /// Cavity parameters at the pump wavelength, with measured finesse and stated
    /// waist applied when given.
    pub fn cavity_params(&self) -> Result<CavityParams> {
        let mut params = derive_cavity_params(&self.geometry, self.pump.wavelength)?;
        if let Some(f) = self.measured_finesse {
            params = params.with_finesse(f)?;
        }
        if let Some(w) = self.waist_override {
            params = params.with_waist(w)?;
        }
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, "test.cfg", &SpeciesDatabase::builtin())
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn reference_scenario() {
        let s = ScenarioConfig::reference();
        let p = s.cavity_params().unwrap();
        assert_eq!(p.finesse, 1000.0);
        assert_relative_eq!(p.waist, 45e-6);
        assert_relative_eq!(s.pressure, 1e4);
        assert_eq!(s.measurements.len(), 3);
        assert_relative_eq!(s.measurements[2].right.reflectivity(), 0.959);
        assert_relative_eq!(s.anchor.as_ref().unwrap().power, 50e-15, max_relative = 1e-12);
        assert_eq!(s.scan.components.len(), 3);
    }

    #[test]
    fn empty_file_uses_defaults_without_anchor() {
        let s = parse("").unwrap();
        assert!(s.anchor.is_none());
        assert!(s.measurements.is_empty());
        assert_eq!(s.cavity_params().unwrap().finesse, 1000.0);
    }

    #[test]
    fn changing_mirrors_drops_reference_finesse() {
        let s = parse("cavity.right_reflectivity = 0.959\n").unwrap();
        assert_relative_eq!(s.cavity_params().unwrap().finesse, 140.032, max_relative = 1e-5);
    }

    #[test]
    fn units_are_applied() {
        let s = parse("cavity.mirror_separation_mm = 12\npump.wavelength_nm = 1064\ngas.pressure_mbar = 1000\n").unwrap();
        assert_relative_eq!(s.geometry.mirror_separation, 0.012);
        assert_relative_eq!(s.pump.wavelength, 1.064e-6);
        assert_relative_eq!(s.pressure, 1e5);
    }

    #[test]
    fn line_anchored_diagnostics() {
        assert_eq!(line_of(parse("# c\n\npump.wavelength = 532\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("pump.wavelength_nm = green\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("pump.power_W = 1\npump.power_W = 2\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("\njust text\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("a\ncavity.mirror_separation_mm = 100\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("\ncavity.mirror_separation_mm = 100\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("\n\ngas.species = Ar\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("cavity.left_reflectivity = 1.2\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("pump.power_W = 1, 2\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("measurement.finesse = 1, 2\nmeasurement.power_fW = 3\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("anchor.finesse = 10\n").unwrap_err()), 1);
    }

    #[test]
    fn unknown_key_suggests_unit() {
        let e = parse("gas.pressure_Pa = 3\n").unwrap_err();
        assert!(e.to_string().contains("gas.pressure_mbar"), "{e}");
    }
}
