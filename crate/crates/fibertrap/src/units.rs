//! Physical constants (SI) and the angular-frequency unit conventions used
//! throughout the crate. All rates and frequencies are stored as angular
//! quantities in rad/s; `two_pi_mhz` / `to_two_pi_mhz` convert to the
//! "2π × MHz" display form.

use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0; // m/s
pub const EPSILON_0: f64 = 8.854_187_8128e-12; // F/m
pub const BOLTZMANN: f64 = 1.380_649e-23; // J/K
pub const PLANCK: f64 = 6.626_070_15e-34; // J s

/// One atomic unit of polarizability in SI (C^2 m^2 / J).
pub const ATOMIC_UNIT_POLARIZABILITY: f64 = 1.648_777_274_36e-41;

/// Angular frequency of `f` megahertz: 2π × f × 1e6 rad/s.
pub fn two_pi_mhz(f: f64) -> f64 {
    2.0 * PI * f * 1.0e6
}

/// Inverse of [`two_pi_mhz`].
pub fn to_two_pi_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1.0e6)
}

/// Energy in J expressed in microkelvin.
pub fn joule_to_microkelvin(u: f64) -> f64 {
    u / BOLTZMANN * 1.0e6
}
