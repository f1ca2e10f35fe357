//! CODATA 2018 constants in SI units.

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Atomic mass of 40Ca in u.
pub const CALCIUM_40_MASS_AMU: f64 = 39.962_590_863;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Converts a frequency in MHz to an angular frequency in rad/s.
pub fn mhz(value: f64) -> f64 {
    TWO_PI * value * 1e6
}
