//! Pinned physical constants (CODATA 2018 exact/recommended values).
//!
//! Every JSON report echoes [`ConstantsTable::current`] together with
//! [`CONSTANTS_VERSION`], so outputs stay bit-stable across releases.

use serde::Serialize;

pub const CONSTANTS_VERSION: &str = "lvsim-constants/1 (CODATA 2018)";

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s (exact).
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Nuclear magneton, J/T.
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Mass of a neutral Yb-171 atom, kg.
pub const YB171_MASS: f64 = 2.838e-25;

/// Sensitivity factor for the Yb⁺ clock transition, Hz per unit `C₀⁽²⁾`.
pub const YB_FREQ_FACTOR: f64 = 3.9e16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsTable {
    pub version: &'static str,
    pub hbar_j_s: f64,
    pub planck_h_j_s: f64,
    pub speed_of_light_m_s: f64,
    pub nuclear_magneton_j_t: f64,
    pub electron_mass_kg: f64,
    pub yb171_mass_kg: f64,
}

impl ConstantsTable {
    pub fn current() -> Self {
        Self {
            version: CONSTANTS_VERSION,
            hbar_j_s: HBAR,
            planck_h_j_s: PLANCK_H,
            speed_of_light_m_s: SPEED_OF_LIGHT,
            nuclear_magneton_j_t: NUCLEAR_MAGNETON,
            electron_mass_kg: ELECTRON_MASS,
            yb171_mass_kg: YB171_MASS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_matches_h_over_two_pi() {
        let rel = (PLANCK_H / (2.0 * std::f64::consts::PI) - HBAR).abs() / HBAR;
        assert!(rel < 1e-9, "{rel}");
    }
}
