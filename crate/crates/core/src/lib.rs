//! Classical wave-interference model of cavity-enhanced Rayleigh scattering.
//!
//! A polarizable particle driven far from any optical transition radiates like a
//! classical dipole. Placing it inside a Fabry-Perot resonator makes the light it
//! scatters into the cavity mode interfere with itself on every round trip, which
//! enhances the power in that mode by a factor proportional to the finesse. This
//! crate models that chain end to end:
//!
//! - [`optics`]: mirrors, resonator geometry and derived cavity parameters, gas species.
//! - [`field`]: intracavity field recursion, position averaging, power bookkeeping.
//! - [`overlap`]: dipole and Gaussian mode functions, the far-field overlap integral and
//!   the Purcell-factor equivalence.
//! - [`spectra`]: Doppler line shapes, spectral overlap with the cavity Lorentzian,
//!   simulated cavity scans, polarization response, species ratios.
//! - [`experiment`]: measurement reproductions and the ultracold-molecule forecast.
//! - [`oracle`] and [`validate`]: independent brute-force checks of the closed forms.
//!
//! Everything is a pure function over immutable values and can be called from any
//! number of threads.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod error;
pub mod experiment;
pub mod field;
pub mod optics;
pub mod oracle;
pub mod overlap;
pub mod quadrature;
pub mod species;
pub mod spectra;
pub mod validate;

pub use error::{Error, Result};
