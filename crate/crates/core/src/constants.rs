//! SI physical constants (CODATA 2018) and unit conversions.

use crate::math;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability μ0, H/m.
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity ε0, F/m. Derived from μ0 and c0 so that
/// `c0 = 1/sqrt(ε0 μ0)` holds to rounding.
pub const VACUUM_PERMITTIVITY: f64 =
    1.0 / (VACUUM_PERMEABILITY * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
/// Reduced Planck constant ħ, J·s (exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C (exact). Also the eV → J factor.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// One electron-volt in joules.
pub const EV_TO_J: f64 = ELEMENTARY_CHARGE;
/// One debye in C·m (10⁻²¹/c).
pub const DEBYE_TO_CM: f64 = 1.0e-21 / SPEED_OF_LIGHT;
/// Vacuum wave impedance η0 = μ0·c0, Ω.
pub const VACUUM_IMPEDANCE: f64 = VACUUM_PERMEABILITY * SPEED_OF_LIGHT;

/// Angular frequency (rad/s) of a photon with the given energy in eV.
#[inline]
pub fn ev_to_angular_frequency(ev: f64) -> f64 {
    ev * EV_TO_J / HBAR
}

/// Photon energy in eV for an angular frequency in rad/s.
#[inline]
pub fn angular_frequency_to_ev(omega: f64) -> f64 {
    omega * HBAR / EV_TO_J
}

/// Bundle of the constants used by the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub vacuum_permittivity: f64,
    pub vacuum_permeability: f64,
    pub speed_of_light: f64,
    pub reduced_planck: f64,
    pub debye_to_cm: f64,
    pub ev_to_j: f64,
}

impl PhysicalConstants {
    pub const SI: Self = Self {
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        vacuum_permeability: VACUUM_PERMEABILITY,
        speed_of_light: SPEED_OF_LIGHT,
        reduced_planck: HBAR,
        debye_to_cm: DEBYE_TO_CM,
        ev_to_j: EV_TO_J,
    };

    /// Relative mismatch between `c0` and `1/sqrt(ε0 μ0)`.
    pub fn light_speed_consistency(&self) -> f64 {
        let derived = 1.0 / math::sqrt(self.vacuum_permittivity * self.vacuum_permeability);
        math::abs(derived - self.speed_of_light) / self.speed_of_light
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}
