//! CODATA 2018 values in SI units.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Speed of light, m/s.
pub const LIGHT_SPEED: f64 = 299_792_458.0;
