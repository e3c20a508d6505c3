//! Physical constants (CODATA 2018) and unit helpers.
//!
//! Every frequency-like quantity in this crate is an angular frequency in
//! rad/s. Configuration files speak in ordinary frequencies (MHz), so the
//! conversion lives here and nowhere else.

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_8128e-12;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Offset between Celsius and Kelvin scales.
pub const CELSIUS_OFFSET: f64 = 273.15;

/// Nominal mass of the Rb-85 atom (kg), taken as 85 atomic mass units.
pub const RB85_MASS: f64 = 85.0 * ATOMIC_MASS_UNIT;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/s.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * 1.0e6 * f_mhz
}

/// Converts an angular frequency in rad/s to an ordinary frequency in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI * 1.0e6)
}

/// Angular wavenumber 2*pi/lambda for a wavelength in meters.
pub fn wavenumber(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI / lambda
}
