//! Mass-energy test Hamiltonian for a harmonically trapped spin-1/2 atom and the
//! pipeline that turns a measured Lorentz-violating level shift into a bound on
//! the diagonal violation parameter `a′`.
//!
//! The test Hamiltonian for local Lorentz invariance, with the rest-mass term
//! and the gravitational terms dropped (they shift both spin levels equally), is
//!
//! ```text
//! H = P²/2m + μB·diag(½, −½) + P²/(2m²c²) · ξ,     ξ = [[a′, b′], [b′*, c′]]
//! ```
//!
//! Diagonal `ξ` only shifts levels (classical violation). A non-zero `b′`
//! drives spin flips (quantum violation).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{
    ConstantsTable, CONSTANTS_VERSION, HBAR, NUCLEAR_MAGNETON, PLANCK_H, SPEED_OF_LIGHT, YB171_MASS,
};
use crate::error::{Error, Result};
use crate::lv_model::{kappa_from_c02, LvParams};
use crate::spin_algebra::{expm_hermitian, ComplexMatrix};
use crate::units::{Joules, JoulesPerTesla, Kilograms, Momentum, RadPerSec, Tesla};

/// Default classifier tolerance.
pub const DEFAULT_CLASSIFY_TOL: Joules = Joules(1e-30);

/// Hermitian 2×2 violation matrix with energy-valued entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationMatrix {
    pub a_prime: Joules,
    /// Off-diagonal entry in J; the lower-left entry is its conjugate.
    pub b_prime: Complex64,
    pub c_prime: Joules,
}

impl ViolationMatrix {
    pub fn diagonal(a_prime: Joules, c_prime: Joules) -> Self {
        Self {
            a_prime,
            b_prime: Complex64::new(0.0, 0.0),
            c_prime,
        }
    }

    pub fn zero() -> Self {
        Self::diagonal(Joules(0.0), Joules(0.0))
    }

    /// Primed entries from dimensionless `(a, b, c)` in units of `μB`:
    /// `a′ = (a + ½)μB`, `b′ = bμB`, `c′ = (c − ½)μB`.
    pub fn from_unprimed(a: f64, b: Complex64, c: f64, mu: JoulesPerTesla, field: Tesla) -> Self {
        let mu_b = mu.0 * field.0;
        Self {
            a_prime: Joules((a + 0.5) * mu_b),
            b_prime: b * mu_b,
            c_prime: Joules((c - 0.5) * mu_b),
        }
    }

    /// Spin-1/2 representation of `κJ_z²`: `ħκ/4` on both diagonal entries.
    pub fn from_spin_half_lv(kappa: RadPerSec) -> Self {
        let e = Joules(HBAR * kappa.0 / 4.0);
        Self::diagonal(e, e)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(self.a_prime.0, 0.0),
                self.b_prime,
                self.b_prime.conj(),
                Complex64::new(self.c_prime.0, 0.0),
            ],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaUnit {
    RadS,
    Hz,
}

impl OmegaUnit {
    pub fn to_rad_s(self, value: f64) -> RadPerSec {
        match self {
            OmegaUnit::RadS => RadPerSec(value),
            OmegaUnit::Hz => RadPerSec(2.0 * std::f64::consts::PI * value),
        }
    }
}

impl std::str::FromStr for OmegaUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rad_s" => Ok(OmegaUnit::RadS),
            "hz" => Ok(OmegaUnit::Hz),
            _ => Err(Error::param(format!("unknown omega unit '{s}' (rad_s|hz)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub mass: Kilograms,
    pub omega0: RadPerSec,
    /// Oscillator level.
    pub n: u32,
    pub mu: JoulesPerTesla,
    pub b_field: Tesla,
}

impl Default for TrapParams {
    /// Yb-171 in a 10⁴ rad/s trap, level 2, μ = 0.429 μ_N, B = 1 T.
    fn default() -> Self {
        Self {
            mass: Kilograms(YB171_MASS),
            omega0: RadPerSec(1e4),
            n: 2,
            mu: JoulesPerTesla(0.429 * NUCLEAR_MAGNETON),
            b_field: Tesla(1.0),
        }
    }
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass.0.is_finite() && self.mass.0 > 0.0) {
            return Err(Error::param("trap mass must be positive"));
        }
        if !self.omega0.0.is_finite() || self.omega0.0 < 0.0 {
            return Err(Error::param("trap frequency must be non-negative"));
        }
        if !(self.mu.0.is_finite() && self.b_field.0.is_finite()) {
            return Err(Error::NonFinite("magnetic parameters"));
        }
        Ok(())
    }

    /// Zeeman energy `μB`.
    pub fn zeeman(&self) -> Joules {
        Joules(self.mu.0 * self.b_field.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationClass {
    None,
    Classical,
    Quantum,
}

impl fmt::Display for ViolationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationClass::None => "none",
            ViolationClass::Classical => "classical",
            ViolationClass::Quantum => "quantum",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinHalf {
    Up,
    Down,
}

impl SpinHalf {
    fn index(self) -> usize {
        match self {
            SpinHalf::Up => 0,
            SpinHalf::Down => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SpinHalf::Up => SpinHalf::Down,
            SpinHalf::Down => SpinHalf::Up,
        }
    }
}

/// The 2×2 block of the test Hamiltonian at momentum `p`, in J.
pub fn h_lli_block(trap: &TrapParams, xi: &ViolationMatrix, p: Momentum) -> Result<ComplexMatrix> {
    trap.validate()?;
    let m = trap.mass.0;
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let kinetic = p.0 * p.0 / (2.0 * m);
    let coupling = p.0 * p.0 / (2.0 * m * m * c2);
    let mu_b = trap.zeeman().0;
    let mut h = xi.to_matrix().scale(coupling);
    h[(0, 0)] += Complex64::new(kinetic + 0.5 * mu_b, 0.0);
    h[(1, 1)] += Complex64::new(kinetic - 0.5 * mu_b, 0.0);
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("test Hamiltonian"));
    }
    Ok(h)
}

/// One Hamiltonian block per momentum in `p_grid`.
pub fn build_h_lli(trap: &TrapParams, xi: &ViolationMatrix, p_grid: &[Momentum]) -> Result<Vec<ComplexMatrix>> {
    p_grid.iter().map(|&p| h_lli_block(trap, xi, p)).collect()
}

/// `⟨n|P²|n⟩ = m ħ ω₀ (2n+1) / 2` for an oscillator with explicit `ħ`.
pub fn oscillator_p2(n: u32, mass: f64, omega0: f64, hbar: f64) -> f64 {
    mass * hbar * omega0 * (2.0 * n as f64 + 1.0) / 2.0
}

/// `⟨n|P²|n⟩` in SI units, (kg·m/s)².
pub fn p2_expectation(n: u32, mass: Kilograms, omega0: RadPerSec) -> f64 {
    oscillator_p2(n, mass.0, omega0.0, HBAR)
}

/// `ħω₀(2n+1)/(mc²) · a′`, the first-order level shift.
pub fn energy_shift_lli(trap: &TrapParams, a_prime: Joules) -> Result<Joules> {
    trap.validate()?;
    Ok(Joules(shift_per_unit_a(trap) * a_prime.0))
}

fn shift_per_unit_a(trap: &TrapParams) -> f64 {
    HBAR * trap.omega0.0 * (2.0 * trap.n as f64 + 1.0) / (trap.mass.0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

pub fn classify_violation(xi: &ViolationMatrix, tol: Joules) -> Result<ViolationClass> {
    if !(tol.0.is_finite() && tol.0 > 0.0) {
        return Err(Error::param("classifier tolerance must be positive"));
    }
    Ok(if xi.b_prime.norm() > tol.0 {
        ViolationClass::Quantum
    } else if xi.a_prime.0.abs().max(xi.c_prime.0.abs()) > tol.0 {
        ViolationClass::Classical
    } else {
        ViolationClass::None
    })
}

/// Tolerance for classifying an LV-derived `ξ`: the default, tightened to a
/// part in 10¹² of the diagonal scale when that scale is below it. Physical
/// `ħκ/4` sits around 10⁻⁴¹ J, under [`DEFAULT_CLASSIFY_TOL`].
pub fn lv_classify_tol(xi: &ViolationMatrix) -> Joules {
    let scale = xi.a_prime.0.abs().max(xi.c_prime.0.abs());
    if scale > 0.0 {
        Joules(DEFAULT_CLASSIFY_TOL.0.min(1e-12 * scale))
    } else {
        DEFAULT_CLASSIFY_TOL
    }
}

/// `|⟨flipped| exp(−iHt/ħ) |initial⟩|²` for the block at momentum `p`.
pub fn transition_probability(
    trap: &TrapParams,
    xi: &ViolationMatrix,
    initial: SpinHalf,
    p: Momentum,
    t: f64,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let h = h_lli_block(trap, xi, p)?;
    // The identity part only contributes a global phase.
    let shift = (h[(0, 0)] + h[(1, 1)]) * 0.5;
    let mut traceless = h;
    traceless[(0, 0)] -= shift;
    traceless[(1, 1)] -= shift;
    let u = expm_hermitian(&traceless.unscale(HBAR), t)?;
    Ok(u[(initial.flipped().index(), initial.index())].norm_sqr().min(1.0))
}

/// `a′` implied by equating the measured LV shift `h·C₀⁽²⁾·f` with the
/// first-order trap shift.
pub fn constrain_a_prime(lv: &LvParams, trap: &TrapParams) -> Result<Joules> {
    trap.validate()?;
    if trap.omega0.0 == 0.0 {
        return Err(Error::param("trap frequency must be non-zero"));
    }
    Ok(Joules(lv.level_shift().0 / shift_per_unit_a(trap)))
}

/// Decade window used to compare a computed `a′` with an order-of-magnitude
/// quote: `a′` is inside when its decade lies between the decades of the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecadeWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for DecadeWindow {
    fn default() -> Self {
        Self { lo: 1e-19, hi: 1e-18 }
    }
}

impl DecadeWindow {
    pub fn contains(&self, x: f64) -> bool {
        if !(x > 0.0 && self.lo > 0.0 && self.hi > 0.0) {
            return false;
        }
        let dec = |v: f64| v.log10().floor();
        dec(self.lo) <= dec(x) && dec(x) <= dec(self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintInputs {
    pub c02: f64,
    pub freq_factor_hz: f64,
    pub n: u32,
    pub omega0_rad_s: f64,
    pub mass_kg: f64,
    pub mu_j_per_t: f64,
    pub b_field_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub constants_version: &'static str,
    pub constants: ConstantsTable,
    pub inputs: ConstraintInputs,
    pub delta_e_j: f64,
    pub a_prime_j: f64,
    /// Same pipeline applied to the lower diagonal entry.
    pub c_prime_j: f64,
    /// Shift per joule of `a′` (dimensionless), `ħω₀(2n+1)/(mc²)`.
    pub shift_per_unit_a_prime: f64,
    pub formula_chain: Vec<String>,
    pub unit_trace: Vec<String>,
    pub window: DecadeWindow,
    pub in_window: bool,
    /// `(a + ½)μB` at `a = 1` with the configured μ and B.
    pub a_prime_at_unit_a_j: f64,
    pub quoted_a_prime_at_unit_a_j: f64,
    /// Set when the two values above disagree by more than a decade.
    pub unit_a_discrepancy: bool,
    /// Present when a `Δ(m²)` was supplied.
    pub delta_m_sq: Option<f64>,
    pub kappa_rad_s: Option<f64>,
    pub classification_of_spin_half_lv: Option<ViolationClass>,
}

impl ConstraintReport {
    pub fn build(lv: &LvParams, trap: &TrapParams, delta_m_sq: Option<f64>, window: DecadeWindow) -> Result<Self> {
        let a_prime = constrain_a_prime(lv, trap)?;
        let delta_e = lv.level_shift();
        let per_a = shift_per_unit_a(trap);
        let kappa = delta_m_sq.map(|d| kappa_from_c02(lv, d)).transpose()?;
        let classification = kappa
            .map(|k| {
                let xi = ViolationMatrix::from_spin_half_lv(k);
                classify_violation(&xi, lv_classify_tol(&xi))
            })
            .transpose()?;
        let at_unit_a = 1.5 * trap.zeeman().0;
        let quoted = 1e-24;

        let unit_trace = vec![
            format!(
                "dE = h[J s] * C02[1] * f[Hz] = {:.6e} J s * {:.6e} * {:.6e} Hz = {:.6e} J",
                PLANCK_H, lv.c02, lv.freq_factor.0, delta_e.0
            ),
            format!(
                "k = hbar[J s] * w0[rad/s] * (2n+1)[1] / (m[kg] * c^2[m^2/s^2]) = {:.6e} J s * {:.6e} rad/s * {} / ({:.6e} kg * {:.6e} m^2/s^2) = {:.6e} [1]",
                HBAR,
                trap.omega0.0,
                2 * trap.n + 1,
                trap.mass.0,
                SPEED_OF_LIGHT * SPEED_OF_LIGHT,
                per_a
            ),
            format!("a' = dE[J] / k[1] = {:.6e} J / {:.6e} = {:.6e} J", delta_e.0, per_a, a_prime.0),
        ];

        Ok(Self {
            constants_version: CONSTANTS_VERSION,
            constants: ConstantsTable::current(),
            inputs: ConstraintInputs {
                c02: lv.c02,
                freq_factor_hz: lv.freq_factor.0,
                n: trap.n,
                omega0_rad_s: trap.omega0.0,
                mass_kg: trap.mass.0,
                mu_j_per_t: trap.mu.0,
                b_field_t: trap.b_field.0,
            },
            delta_e_j: delta_e.0,
            a_prime_j: a_prime.0,
            c_prime_j: a_prime.0,
            shift_per_unit_a_prime: per_a,
            formula_chain: vec![
                "dE_LV = h * C02 * freq_factor".into(),
                "dE_LLI = hbar * omega0 * (2n+1) / (m * c^2) * a'".into(),
                "a' = dE_LV * m * c^2 / (hbar * omega0 * (2n+1))".into(),
            ],
            unit_trace,
            window,
            in_window: window.contains(a_prime.0),
            a_prime_at_unit_a_j: at_unit_a,
            quoted_a_prime_at_unit_a_j: quoted,
            unit_a_discrepancy: (at_unit_a.log10() - quoted.log10()).abs() > 1.0,
            delta_m_sq,
            kappa_rad_s: kappa.map(|k| k.0),
            classification_of_spin_half_lv: classification,
        })
    }
}
