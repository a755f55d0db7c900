//! Physical constants (CODATA exact or 2018 recommended values).

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Avogadro constant, 1/mol.
pub const AVOGADRO: f64 = 6.022_140_76e23;

/// Atomic unit of polarizability expressed as a CGS volume, in cubic angstrom.
pub const ATOMIC_UNIT_POLARIZABILITY_A3: f64 = 0.148;

/// Default gas temperature for room-temperature samples, K.
pub const ROOM_TEMPERATURE: f64 = 295.0;
