//! Lorentz-violating electron-sector shift `-C₀⁽²⁾ T₀⁽²⁾ / 6` and its
//! fixed-`J` reduction to `κ J_z²`.

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, PLANCK_H};
use crate::error::{Error, Result};
use crate::spin_algebra::{ComplexMatrix, SpinOperators, SpinQuantumNumber};
use crate::units::{Hertz, Joules, Kilograms, Meters, RadPerSec};

/// SME coefficient plus the transition-specific sensitivity factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvParams {
    /// Dimensionless `C₀⁽²⁾`.
    pub c02: f64,
    /// Energy shift per unit `C₀⁽²⁾`, expressed as a frequency.
    pub freq_factor: Hertz,
    pub kappa: RadPerSec,
}

impl LvParams {
    pub fn new(c02: f64, freq_factor: Hertz, kappa: RadPerSec) -> Result<Self> {
        if !(c02.is_finite() && freq_factor.0.is_finite() && kappa.0.is_finite()) {
            return Err(Error::NonFinite("LV parameters"));
        }
        if freq_factor.0 <= 0.0 {
            return Err(Error::param("freq_factor must be positive"));
        }
        Ok(Self {
            c02,
            freq_factor,
            kappa,
        })
    }

    /// `h · C₀⁽²⁾ · freq_factor`.
    pub fn level_shift(&self) -> Joules {
        Joules(PLANCK_H * self.c02 * self.freq_factor.0)
    }
}

/// Minimum-uncertainty Gaussian used to evaluate momentum moments.
///
/// A spread of `+inf` is allowed and means a vanishing momentum variance
/// along that axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianWavepacket {
    pub sigma_x: Meters,
    pub sigma_y: Meters,
    pub sigma_z: Meters,
    pub mass: Kilograms,
}

impl GaussianWavepacket {
    pub fn new(sigma_x: Meters, sigma_y: Meters, sigma_z: Meters, mass: Kilograms) -> Result<Self> {
        let wp = Self {
            sigma_x,
            sigma_y,
            sigma_z,
            mass,
        };
        wp.validate()?;
        Ok(wp)
    }

    fn validate(&self) -> Result<()> {
        for s in [self.sigma_x.0, self.sigma_y.0, self.sigma_z.0] {
            if s.is_nan() || s <= 0.0 {
                return Err(Error::param("wavepacket spreads must be positive"));
            }
        }
        if !(self.mass.0.is_finite() && self.mass.0 > 0.0) {
            return Err(Error::param("wavepacket mass must be positive"));
        }
        Ok(())
    }

    /// `⟨p_i²⟩ = ħ² / (4 σ_i²)` for i = x, y, z.
    pub fn momentum_second_moments(&self) -> [f64; 3] {
        [self.sigma_x.0, self.sigma_y.0, self.sigma_z.0].map(|s| HBAR * HBAR / (4.0 * s * s))
    }
}

/// Diagonal Wigner-Eckart matrix element `⟨J,m|T₀⁽²⁾|J,m⟩` in units of the
/// reduced matrix element.
pub fn t20_diagonal(j: SpinQuantumNumber, m: f64, reduced: f64) -> Result<f64> {
    j.validate_projection(m)?;
    if j.twice() == 1 {
        return Err(Error::RankTwoVanishes);
    }
    let jv = j.value();
    let denom = ((2.0 * jv + 3.0) * (jv + 1.0) * (2.0 * jv + 1.0) * jv * (2.0 * jv - 1.0)).sqrt();
    Ok(reduced * (3.0 * m * m - jv * (jv + 1.0)) / denom)
}

/// `⟨δH⟩ = -C₀⁽²⁾ (⟨p²⟩ - 3⟨p_z²⟩) / (6 m)`.
pub fn delta_h_expectation(wp: &GaussianWavepacket, c02: f64) -> Result<Joules> {
    wp.validate()?;
    if !c02.is_finite() {
        return Err(Error::NonFinite("C02"));
    }
    let [px, py, pz] = wp.momentum_second_moments();
    // p² - 3p_z² = p_x² + p_y² - 2p_z²
    let anisotropy = px + py - 2.0 * pz;
    Ok(Joules(-c02 * anisotropy / (6.0 * wp.mass.0)))
}

/// `κ J_z²` in rad/s (ħ = 1).
pub fn effective_lv_hamiltonian(ops: &SpinOperators, kappa: f64) -> ComplexMatrix {
    (&ops.jz * &ops.jz).scale(kappa)
}

/// `m₁² - m₂²`.
pub fn delta_m_sq(j: SpinQuantumNumber, m1: f64, m2: f64) -> Result<f64> {
    j.validate_projection(m1)?;
    j.validate_projection(m2)?;
    Ok(m1 * m1 - m2 * m2)
}

/// `κ` such that `ħ κ Δ(m²)` equals the level shift `h C₀⁽²⁾ f`.
pub fn kappa_from_c02(lv: &LvParams, delta_m_sq: f64) -> Result<RadPerSec> {
    if delta_m_sq == 0.0 || !delta_m_sq.is_finite() {
        return Err(Error::param("delta_m_sq must be finite and non-zero"));
    }
    Ok(RadPerSec(lv.level_shift().0 / (HBAR * delta_m_sq)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ELECTRON_MASS, YB_FREQ_FACTOR};
    use crate::spin_algebra::{commutator, make_spin_ops, max_abs};

    fn spin(j: f64) -> SpinQuantumNumber {
        SpinQuantumNumber::new(j).unwrap()
    }

    #[test]
    fn seven_halves_values() {
        let top = t20_diagonal(spin(3.5), 3.5, 1.0).unwrap();
        let mid = t20_diagonal(spin(3.5), 0.5, 1.0).unwrap();
        assert!((top - 21.0 / 7560f64.sqrt()).abs() < 1e-15);
        assert!((top - 0.241523).abs() < 1e-6);
        assert!((mid + 15.0 / 7560f64.sqrt()).abs() < 1e-15);
        assert!((mid + 0.172516).abs() < 1e-6);
    }

    #[test]
    fn t20_is_traceless_and_even() {
        let j = spin(3.5);
        let sum: f64 = j.projections().map(|m| t20_diagonal(j, m, 1.0).unwrap()).sum();
        assert!(sum.abs() < 1e-12);
        for m in j.projections() {
            assert_eq!(t20_diagonal(j, m, 1.0).unwrap(), t20_diagonal(j, -m, 1.0).unwrap());
        }
    }

    #[test]
    fn t20_errors() {
        assert_eq!(t20_diagonal(spin(0.5), 0.5, 1.0), Err(Error::RankTwoVanishes));
        assert!(matches!(t20_diagonal(spin(1.0), 2.0, 1.0), Err(Error::InvalidProjection { .. })));
        assert!(t20_diagonal(spin(1.0), 0.5, 1.0).is_err());
    }

    /// `ħ² ∫ |ψ'(x)|² dx` for the 1-D Gaussian amplitude, by composite Simpson.
    fn p2_by_quadrature(sigma: f64) -> f64 {
        let psi_prime = |x: f64| {
            let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
            -x / (2.0 * sigma * sigma) * norm * (-x * x / (4.0 * sigma * sigma)).exp()
        };
        let (a, b, n) = (-16.0 * sigma, 16.0 * sigma, 4000usize);
        let h = (b - a) / n as f64;
        let mut acc = psi_prime(a).powi(2) + psi_prime(b).powi(2);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * psi_prime(a + k as f64 * h).powi(2);
        }
        HBAR * HBAR * acc * h / 3.0
    }

    #[test]
    fn delta_h_flat_in_z() {
        let s = Meters(1e-10);
        let wp = GaussianWavepacket::new(s, s, Meters(f64::INFINITY), Kilograms(ELECTRON_MASS)).unwrap();
        let got = delta_h_expectation(&wp, 1.0).unwrap().0;
        let closed = -(1.0 / (6.0 * ELECTRON_MASS)) * (2.0 * HBAR * HBAR / (4.0 * 1e-20));
        assert!((got - closed).abs() <= 1e-14 * closed.abs());
        let quad = -(2.0 * p2_by_quadrature(1e-10)) / (6.0 * ELECTRON_MASS);
        assert!((got - quad).abs() <= 1e-9 * closed.abs(), "{got} vs {quad}");
    }

    #[test]
    fn delta_h_isotropic_and_zero_coefficient() {
        let s = Meters(3e-11);
        let wp = GaussianWavepacket::new(s, s, s, Kilograms(ELECTRON_MASS)).unwrap();
        assert_eq!(delta_h_expectation(&wp, 1e-3).unwrap().0, 0.0);
        let wp = GaussianWavepacket::new(Meters(1e-10), s, s, Kilograms(ELECTRON_MASS)).unwrap();
        assert_eq!(delta_h_expectation(&wp, 0.0).unwrap().0, 0.0);
        assert!(GaussianWavepacket::new(Meters(0.0), s, s, Kilograms(1.0)).is_err());
        assert!(GaussianWavepacket::new(Meters(-1.0), s, s, Kilograms(1.0)).is_err());
    }

    #[test]
    fn lv_hamiltonian_examples() {
        let h = effective_lv_hamiltonian(&make_spin_ops(spin(0.5)), 2.0);
        assert_eq!(h[(0, 0)].re, 0.5);
        assert_eq!(h[(1, 1)].re, 0.5);
        assert_eq!(h[(0, 1)].norm(), 0.0);

        let ops = make_spin_ops(spin(3.5));
        let h = effective_lv_hamiltonian(&ops, 1.0);
        let diag: Vec<f64> = (0..8).map(|k| h[(k, k)].re).collect();
        let want = [49.0, 25.0, 9.0, 1.0, 1.0, 9.0, 25.0, 49.0].map(|x| x / 4.0);
        assert_eq!(diag, want.to_vec());
        assert_eq!(max_abs(&commutator(&h, &ops.jz)), 0.0);
        assert_eq!(max_abs(&effective_lv_hamiltonian(&ops, 0.0)), 0.0);
    }

    #[test]
    fn kappa_mapping() {
        let lv = LvParams::new(1e-23, Hertz(YB_FREQ_FACTOR), RadPerSec(0.0)).unwrap();
        let dm2 = delta_m_sq(spin(3.5), -3.5, -0.5).unwrap();
        assert_eq!(dm2, 12.0);
        let k = kappa_from_c02(&lv, dm2).unwrap().0;
        let want = PLANCK_H / HBAR * 1e-23 * 3.9e16 / 12.0;
        assert!((k - want).abs() < 1e-12 * want);
        let two_pi = 2.0 * std::f64::consts::PI * 1e-23 * 3.9e16 / 12.0;
        assert!((k - two_pi).abs() < 1e-9 * two_pi);
        assert!((k - 2.04e-7).abs() < 0.01e-7);
        let e = lv.level_shift().0;
        assert!(e > 2.5e-40 && e < 2.7e-40, "{e}");

        let zero = LvParams::new(0.0, Hertz(YB_FREQ_FACTOR), RadPerSec(0.0)).unwrap();
        assert_eq!(kappa_from_c02(&zero, 12.0).unwrap().0, 0.0);
        assert!(kappa_from_c02(&lv, 0.0).is_err());
        assert!(LvParams::new(1.0, Hertz(0.0), RadPerSec(0.0)).is_err());
    }
}
