//! Gas-species database.
//!
//! A plain-text table, one record per species:
//!
//! ```text
//! # comments start with '#'
//! name,molar_mass_g_per_mol,polarizability_A3
//! Xe,131.29,4.04
//! ```
//!
//! The polarizability column may instead be headed `polarizability_au`, in which
//! case values are atomic units and are converted with 1 a.u. = 0.148 A^3.

use std::path::Path;

use crate::constants::ATOMIC_UNIT_POLARIZABILITY_A3;
use crate::error::{Error, Result};
use crate::optics::GasSpecies;

/// Environment variable naming a database file that replaces the built-in table.
pub const SPECIES_DB_ENV: &str = "CAVRAY_SPECIES_DB";

/// Built-in table. Xe is 27.3 a.u.; CF3H is fitted to the observed Doppler-corrected
/// Xe:CF3H signal ratio.
pub const BUILTIN_DATABASE: &str = "\
# name, molar mass (g/mol), static polarizability (cubic angstrom)
name,molar_mass_g_per_mol,polarizability_A3
Xe,131.29,4.04
N2,28.01,1.74
CF3H,70.01,2.8
";

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesDatabase {
    species: Vec<GasSpecies>,
}

enum PolarizabilityUnit {
    CubicAngstrom,
    AtomicUnit,
}

impl SpeciesDatabase {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_DATABASE, "<builtin>").expect("builtin species table parses")
    }

    /// Loads from `$CAVRAY_SPECIES_DB` if set, otherwise the built-in table.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(SPECIES_DB_ENV) {
            Some(path) => Self::load(Path::new(&path)),
            None => Ok(Self::builtin()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?
            .clone();
        let column = |name: &str| headers.iter().position(|h| h == name);
        let name_col = column("name").ok_or_else(|| err(1, "missing column 'name'".into()))?;
        let mass_col = column("molar_mass_g_per_mol")
            .ok_or_else(|| err(1, "missing column 'molar_mass_g_per_mol'".into()))?;
        let (pol_col, unit) = match (column("polarizability_A3"), column("polarizability_au")) {
            (Some(c), None) => (c, PolarizabilityUnit::CubicAngstrom),
            (None, Some(c)) => (c, PolarizabilityUnit::AtomicUnit),
            (Some(_), Some(_)) => {
                return Err(err(1, "give either polarizability_A3 or polarizability_au, not both".into()))
            }
            (None, None) => return Err(err(1, "missing column 'polarizability_A3'".into())),
        };

        let mut species: Vec<GasSpecies> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| record.get(i).unwrap_or("");
            let number = |i: usize, what: &str| -> Result<f64> {
                field(i)
                    .parse::<f64>()
                    .map_err(|_| err(line, format!("invalid {what} '{}'", field(i))))
            };
            let name = field(name_col);
            if name.is_empty() {
                return Err(err(line, "empty species name".into()));
            }
            if species.iter().any(|s| s.name == name) {
                return Err(err(line, format!("duplicate species '{name}'")));
            }
            let mass = number(mass_col, "molar mass")?;
            let raw = number(pol_col, "polarizability")?;
            let polarizability = match unit {
                PolarizabilityUnit::CubicAngstrom => raw,
                PolarizabilityUnit::AtomicUnit => raw * ATOMIC_UNIT_POLARIZABILITY_A3,
            };
            let entry = GasSpecies::new(name, mass, polarizability).map_err(|e| err(line, e.to_string()))?;
            species.push(entry);
        }
        if species.is_empty() {
            return Err(err(0, "database contains no species".into()));
        }
        Ok(Self { species })
    }

    pub fn get(&self, name: &str) -> Result<&GasSpecies> {
        self.species
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("unknown species '{name}'")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &GasSpecies> {
        self.species.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_table() {
        let db = SpeciesDatabase::builtin();
        let xe = db.get("Xe").unwrap();
        assert_relative_eq!(xe.polarizability, 27.3 * ATOMIC_UNIT_POLARIZABILITY_A3, max_relative = 1e-3);
        assert_relative_eq!(xe.molar_mass, 0.13129);
        assert_eq!(db.iter().count(), 3);
        assert!(db.get("Ar").is_err());
    }

    #[test]
    fn atomic_units_converted_on_load() {
        let db = SpeciesDatabase::parse("name,molar_mass_g_per_mol,polarizability_au\nKRb,126.4,502\n", "t").unwrap();
        assert_relative_eq!(db.get("KRb").unwrap().polarizability, 502.0 * 0.148);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let text = "# header comment\nname,molar_mass_g_per_mol,polarizability_A3\nXe,131.29,4.04\nN2,abc,1.74\n";
        match SpeciesDatabase::parse(text, "gas.csv").unwrap_err() {
            Error::Parse { source_name, line, message } => {
                assert_eq!(source_name, "gas.csv");
                assert_eq!(line, 4);
                assert!(message.contains("molar mass"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let dup = "name,molar_mass_g_per_mol,polarizability_A3\nXe,131.29,4.04\nXe,131.29,4.04\n";
        assert!(matches!(SpeciesDatabase::parse(dup, "d"), Err(Error::Parse { line: 3, .. })));
        let neg = "name,molar_mass_g_per_mol,polarizability_A3\nXe,-1,4.04\n";
        assert!(matches!(SpeciesDatabase::parse(neg, "d"), Err(Error::Parse { line: 2, .. })));
        assert!(SpeciesDatabase::parse("name,molar_mass_g_per_mol\nXe,1\n", "d").is_err());
        assert!(SpeciesDatabase::parse("name,molar_mass_g_per_mol,polarizability_A3\n", "d").is_err());
    }
}
