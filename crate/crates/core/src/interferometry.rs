//! Ramsey and dynamical-decoupling pulse sequences, and seeded fringe sampling.
//!
//! Free evolution over a segment of length `τ` applies
//! `exp(i·φ̇τ·J_z − i·κτ·J_z²)`: the detuning phase enters with the sign of the
//! standard Ramsey free rotation, the `κ J_z²` term as an ordinary Hamiltonian.
//! Both are diagonal, so they share one exponential.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::CONSTANTS_VERSION;
use crate::error::{Error, Result};
use crate::rng::{substream, RNG_ALGORITHM};
use crate::spin_algebra::{
    expm_hermitian, identity, max_abs_diff, rotation, Axis, ComplexMatrix, SpinOperators,
    SpinQuantumNumber, StateVector,
};

/// Norm drift allowed across a full sequence evolution.
pub const EVOLUTION_NORM_TOL: f64 = 1e-10;
/// Allowed deviation of per-point probabilities from summing to one.
pub const PROBABILITY_SUM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseElement {
    /// `exp(-i · angle · J_axis)`.
    Rotation { axis: Axis, angle: f64 },
    /// Duration in s; `phi_rate` and `kappa` in rad/s.
    FreeEvolution { duration: f64, phi_rate: f64, kappa: f64 },
}

impl PulseElement {
    pub fn rotation(axis: Axis, angle: f64) -> Self {
        PulseElement::Rotation { axis, angle }
    }

    pub fn free(duration: f64, phi_rate: f64, kappa: f64) -> Self {
        PulseElement::FreeEvolution {
            duration,
            phi_rate,
            kappa,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PulseElement::Rotation { angle, .. } if !angle.is_finite() => {
                Err(Error::NonFinite("rotation angle"))
            }
            PulseElement::FreeEvolution {
                duration,
                phi_rate,
                kappa,
            } => {
                if !(duration.is_finite() && phi_rate.is_finite() && kappa.is_finite()) {
                    Err(Error::NonFinite("free evolution"))
                } else if duration < 0.0 {
                    Err(Error::param("free-evolution duration must be non-negative"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn unitary(&self, ops: &SpinOperators) -> Result<ComplexMatrix> {
        self.validate()?;
        match *self {
            PulseElement::Rotation { axis, angle } => rotation(ops, axis, angle),
            PulseElement::FreeEvolution {
                duration,
                phi_rate,
                kappa,
            } => Ok(free_evolution_unitary(ops, phi_rate * duration, kappa * duration)),
        }
    }
}

/// Diagonal `exp(iφJ_z − iκt·J_z²)`.
pub fn free_evolution_unitary(ops: &SpinOperators, phi: f64, kappa_t: f64) -> ComplexMatrix {
    let d = ops.dim();
    let phases = free_evolution_phases(ops.j, phi, kappa_t);
    let mut u = ComplexMatrix::zeros(d, d);
    for (k, p) in phases.into_iter().enumerate() {
        u[(k, k)] = p;
    }
    u
}

fn free_evolution_phases(j: SpinQuantumNumber, phi: f64, kappa_t: f64) -> Vec<Complex64> {
    j.projections()
        .map(|m| Complex64::from_polar(1.0, phi * m - kappa_t * m * m))
        .collect()
}

impl std::fmt::Display for PulseElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PulseElement::Rotation { axis, angle } => write!(f, "R{axis}({angle})"),
            PulseElement::FreeEvolution {
                duration,
                phi_rate,
                kappa,
            } => write!(f, "F(t={duration},phi_rate={phi_rate},kappa={kappa})"),
        }
    }
}

/// Ordered, non-empty list of pulses; the first element acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    elements: Vec<PulseElement>,
}

impl PulseSequence {
    pub fn new(elements: Vec<PulseElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::param("pulse sequence must not be empty"));
        }
        for e in &elements {
            e.validate()?;
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[PulseElement] {
        &self.elements
    }

    /// Ramsey sequence: opening beamsplitter `exp(+iπJ_x/2)`, free evolution
    /// accumulating `φ` and `κt`, closing beamsplitter `exp(−iπJ_x/2)`.
    ///
    /// With `t = 0` the detuning phase is applied as a z rotation.
    pub fn ramsey(phi: f64, kappa: f64, t: f64) -> Result<Self> {
        let middle = if t > 0.0 {
            PulseElement::free(t, phi / t, kappa)
        } else if t == 0.0 {
            PulseElement::rotation(Axis::Z, -phi)
        } else {
            return Err(Error::param("Ramsey time must be non-negative"));
        };
        Self::new(vec![
            PulseElement::rotation(Axis::X, -FRAC_PI_2),
            middle,
            PulseElement::rotation(Axis::X, FRAC_PI_2),
        ])
    }

    /// Hahn echo: two free segments of length `tau` around a y π pulse.
    pub fn spin_echo(tau: f64, phi_rate: f64, kappa: f64) -> Result<Self> {
        Self::cpmg(1, tau, phi_rate, kappa)
    }

    /// CPMG-n: `π/2 – (τ – π_y – τ)^n – π/2`, total free time `2nτ`.
    pub fn cpmg(n: usize, tau: f64, phi_rate: f64, kappa: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("CPMG needs at least one refocusing pulse"));
        }
        let mut el = vec![PulseElement::rotation(Axis::X, -FRAC_PI_2)];
        for _ in 0..n {
            el.push(PulseElement::free(tau, phi_rate, kappa));
            el.push(PulseElement::rotation(Axis::Y, PI));
            el.push(PulseElement::free(tau, phi_rate, kappa));
        }
        el.push(PulseElement::rotation(Axis::X, FRAC_PI_2));
        Self::new(el)
    }

    pub fn total_free_time(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                PulseElement::FreeEvolution { duration, .. } => *duration,
                PulseElement::Rotation { .. } => 0.0,
            })
            .sum()
    }

    /// Product of element unitaries, last element leftmost.
    pub fn unitary(&self, ops: &SpinOperators) -> Result<ComplexMatrix> {
        let mut u = identity(ops.dim());
        for e in &self.elements {
            u = e.unitary(ops)? * u;
        }
        Ok(u)
    }

    pub fn describe(&self) -> String {
        self.elements
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `exp(−iπJ_x/2) · exp(iφJ_z) · exp(iπJ_x/2)`.
pub fn ramsey_unitary(ops: &SpinOperators, phi: f64) -> Result<ComplexMatrix> {
    ramsey_lv_unitary(ops, phi, 0.0, 0.0)
}

/// `exp(−iπJ_x/2) · exp(iφJ_z − iκt·J_z²) · exp(iπJ_x/2)`.
pub fn ramsey_lv_unitary(ops: &SpinOperators, phi: f64, kappa: f64, t: f64) -> Result<ComplexMatrix> {
    if t < 0.0 {
        return Err(Error::param("evolution time must be non-negative"));
    }
    if !(phi.is_finite() && kappa.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite("Ramsey parameters"));
    }
    let open = rotation(ops, Axis::X, -FRAC_PI_2)?;
    let close = rotation(ops, Axis::X, FRAC_PI_2)?;
    Ok(close * free_evolution_unitary(ops, phi, kappa * t) * open)
}

/// Closed form of the Ramsey operator, `exp(−iφJ_y − iκt·J_y²)`.
pub fn ramsey_lv_closed_form(ops: &SpinOperators, phi: f64, kappa: f64, t: f64) -> Result<ComplexMatrix> {
    let gen = ops.jy.scale(phi) + (&ops.jy * &ops.jy).scale(kappa * t);
    expm_hermitian(&gen, 1.0)
}

/// Applies the sequence to `initial`, checking norm preservation.
pub fn evolve_sequence(ops: &SpinOperators, seq: &PulseSequence, initial: &StateVector) -> Result<StateVector> {
    if initial.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.dim(),
            got: initial.dim(),
        });
    }
    let mut psi = initial.clone();
    for e in seq.elements() {
        psi = psi.apply(&e.unitary(ops)?)?;
    }
    let n = psi.norm();
    if (n - 1.0).abs() > EVOLUTION_NORM_TOL {
        return Err(Error::CheckFailed(format!("norm drifted to {n}")));
    }
    Ok(psi)
}

/// Phase `κt(m₁² − m₂²)` accumulated between `|J,m₁⟩` and `|J,m₂⟩` under `κJ_z²`.
pub fn relative_lv_phase(j: SpinQuantumNumber, m1: f64, m2: f64, kappa: f64, t: f64) -> Result<f64> {
    let dm2 = crate::lv_model::delta_m_sq(j, m1, m2)?;
    Ok(kappa * t * dm2)
}

/// Readout: a unitary applied before projective measurement in the `J_z`
/// eigenbasis. Outcome `k` corresponds to `m = j − k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    rotation: ComplexMatrix,
    label: String,
}

impl MeasurementBasis {
    pub fn jz(dim: usize) -> Self {
        Self {
            rotation: identity(dim),
            label: "Jz".into(),
        }
    }

    pub fn from_unitary(u: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        let defect = max_abs_diff(&(u.adjoint() * &u), &identity(u.nrows()));
        if defect > 1e-10 {
            return Err(Error::param(format!("readout rotation not unitary ({defect:.3e})")));
        }
        Ok(Self {
            rotation: u,
            label: label.into(),
        })
    }

    /// Spin rotation `exp(−i·angle·J_axis)` before `J_z` readout.
    pub fn rotated(ops: &SpinOperators, axis: Axis, angle: f64) -> Result<Self> {
        Self::from_unitary(rotation(ops, axis, angle)?, format!("R{axis}({angle})·Jz"))
    }

    /// Two-level beamsplitter on the pair `{|m₁⟩, |m₂⟩}`: outcome `m₁` projects
    /// onto `(|m₁⟩ + |m₂⟩)/√2`, outcome `m₂` onto `(|m₁⟩ − |m₂⟩)/√2`.
    pub fn pair_beamsplitter(j: SpinQuantumNumber, m1: f64, m2: f64) -> Result<Self> {
        let a = j.index_of(m1)?;
        let b = j.index_of(m2)?;
        if a == b {
            return Err(Error::param("pair readout needs two distinct projections"));
        }
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut u = identity(j.dim());
        u[(a, a)] = s;
        u[(a, b)] = s;
        u[(b, a)] = s;
        u[(b, b)] = -s;
        Self::from_unitary(u, format!("pair({m1},{m2})"))
    }

    pub fn dim(&self) -> usize {
        self.rotation.nrows()
    }

    pub fn rotation(&self) -> &ComplexMatrix {
        &self.rotation
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn probabilities(&self, psi: &StateVector) -> Result<Vec<f64>> {
        Ok(psi.apply(&self.rotation)?.populations())
    }
}

/// Produces the sequence run at one scan phase `φ`.
pub trait SequenceTemplate: Sync {
    fn sequence(&self, phi: f64) -> Result<PulseSequence>;
    fn kappa(&self) -> f64;
    /// Total interrogation time.
    fn duration(&self) -> f64;
    fn describe(&self) -> String;
}

/// [`PulseSequence::ramsey`] scanned over `φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyTemplate {
    pub kappa: f64,
    pub t: f64,
}

impl SequenceTemplate for RamseyTemplate {
    fn sequence(&self, phi: f64) -> Result<PulseSequence> {
        PulseSequence::ramsey(phi, self.kappa, self.t)
    }
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn duration(&self) -> f64 {
        self.t
    }
    fn describe(&self) -> String {
        format!("ramsey(kappa={},t={})", self.kappa, self.t)
    }
}

/// A fixed sequence followed by a readout phase `exp(iφJ_z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutPhaseTemplate {
    pub sequence: PulseSequence,
}

impl ReadoutPhaseTemplate {
    pub fn new(sequence: PulseSequence) -> Self {
        Self { sequence }
    }
}

impl SequenceTemplate for ReadoutPhaseTemplate {
    fn sequence(&self, phi: f64) -> Result<PulseSequence> {
        let mut el = self.sequence.elements().to_vec();
        el.push(PulseElement::rotation(Axis::Z, -phi));
        PulseSequence::new(el)
    }
    fn kappa(&self) -> f64 {
        // Sequences built from presets carry one κ; report the first found.
        self.sequence
            .elements()
            .iter()
            .find_map(|e| match e {
                PulseElement::FreeEvolution { kappa, .. } => Some(*kappa),
                _ => None,
            })
            .unwrap_or(0.0)
    }
    fn duration(&self) -> f64 {
        self.sequence.total_free_time()
    }
    fn describe(&self) -> String {
        format!("{} Rz(-phi)", self.sequence.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeMeta {
    pub j: SpinQuantumNumber,
    pub kappa: f64,
    pub t: f64,
    pub seed: u64,
    pub shots: u64,
    pub sequence: String,
    pub initial_state: String,
    pub readout: String,
    pub outcome_labels: Vec<String>,
    pub rng_algorithm: String,
}

/// Exact probabilities and optional sampled counts over a `φ` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeRecord {
    pub meta: FringeMeta,
    pub phi_grid: Vec<f64>,
    /// `probabilities[i][k]`: outcome `k` at grid point `i`.
    pub probabilities: Vec<Vec<f64>>,
    pub counts: Option<Vec<Vec<u64>>>,
}

/// Draws a multinomial sample by sequential conditional binomials.
pub fn sample_multinomial<R: rand::Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining;
            break;
        }
        let q = if mass_left > 0.0 {
            (p / mass_left).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q)
                .expect("binomial parameters are validated")
                .sample(rng)
        };
        counts[k] = n;
        remaining -= n;
        mass_left -= p;
    }
    counts
}

/// Human-readable label of a state's non-zero components, e.g. `0.7071|-7/2>+0.7071|-1/2>`.
pub fn describe_state(j: SpinQuantumNumber, psi: &StateVector) -> String {
    let mut s = String::new();
    for (k, z) in psi.amplitudes().iter().enumerate() {
        if z.norm() < 1e-12 {
            continue;
        }
        if !s.is_empty() {
            s.push('+');
        }
        let m = j.value() - k as f64;
        let _ = write!(s, "({:.6}{:+.6}i)|{}>", z.re, z.im, format_m(m));
    }
    s
}

fn format_m(m: f64) -> String {
    let twice = (2.0 * m).round() as i64;
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

/// Probabilities and optional counts at one grid point.
type FringeRow = (Vec<f64>, Option<Vec<u64>>);

/// Simulates the template at each scan phase and records Born-rule
/// probabilities; with `shots > 0` also multinomial counts drawn from the
/// ChaCha substream `(seed, grid index)`.
pub fn generate_fringe(
    ops: &SpinOperators,
    template: &dyn SequenceTemplate,
    phi_grid: &[f64],
    initial: &StateVector,
    basis: &MeasurementBasis,
    shots: u64,
    seed: u64,
) -> Result<FringeRecord> {
    let d = ops.dim();
    if basis.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: basis.dim(),
        });
    }
    if initial.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: initial.dim(),
        });
    }
    if phi_grid.is_empty() || phi_grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::param("phi grid must be non-empty and finite"));
    }

    let rows: Vec<Result<FringeRow>> = phi_grid
        .par_iter()
        .enumerate()
        .map(|(i, &phi)| {
            let seq = template.sequence(phi)?;
            let psi = evolve_sequence(ops, &seq, initial)?;
            let probs = basis.probabilities(&psi)?;
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
                return Err(Error::CheckFailed(format!(
                    "probabilities at phi={phi} sum to {total}"
                )));
            }
            let counts = (shots > 0).then(|| {
                let mut rng = substream(seed, i as u64);
                sample_multinomial(&probs, shots, &mut rng)
            });
            Ok((probs, counts))
        })
        .collect();

    let mut probabilities = Vec::with_capacity(phi_grid.len());
    let mut counts = Vec::with_capacity(phi_grid.len());
    for r in rows {
        let (p, c) = r?;
        probabilities.push(p);
        if let Some(c) = c {
            counts.push(c);
        }
    }

    Ok(FringeRecord {
        meta: FringeMeta {
            j: ops.j,
            kappa: template.kappa(),
            t: template.duration(),
            seed,
            shots,
            sequence: template.describe(),
            initial_state: describe_state(ops.j, initial),
            readout: basis.label().to_string(),
            outcome_labels: ops.j.projections().map(|m| format!("m={}", format_m(m))).collect(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
        },
        phi_grid: phi_grid.to_vec(),
        probabilities,
        counts: (shots > 0).then_some(counts),
    })
}

impl FringeRecord {
    pub fn num_outcomes(&self) -> usize {
        self.probabilities.first().map_or(0, Vec::len)
    }

    /// Probability of outcome `k` across the grid.
    pub fn outcome_series(&self, k: usize) -> Vec<f64> {
        self.probabilities.iter().map(|row| row[k]).collect()
    }

    /// Long-format CSV: `phi_rad,outcome_index,probability[,count]`.
    /// The count column is present only when shots were sampled.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("phi_rad,outcome_index,probability");
        if self.counts.is_some() {
            out.push_str(",count");
        }
        out.push('\n');
        for (i, (phi, row)) in self.phi_grid.iter().zip(&self.probabilities).enumerate() {
            for (k, p) in row.iter().enumerate() {
                let _ = write!(out, "{phi:e},{k},{p:e}");
                if let Some(c) = &self.counts {
                    let _ = write!(out, ",{}", c[i][k]);
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            constants_version: &'a str,
            #[serde(flatten)]
            record: &'a FringeRecord,
        }
        Ok(serde_json::to_string_pretty(&Doc {
            constants_version: CONSTANTS_VERSION,
            record: self,
        })?)
    }
}

/// Least-squares fit of `offset + amplitude·cos(harmonic·φ + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
}

pub fn fit_fringe(phi: &[f64], values: &[f64], harmonic: f64) -> Result<FringeFit> {
    if phi.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.len(),
            got: values.len(),
        });
    }
    if phi.len() < 3 {
        return Err(Error::param("fringe fit needs at least three points"));
    }
    let n = phi.len();
    let design = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => 1.0,
        1 => (harmonic * phi[r]).cos(),
        _ => (harmonic * phi[r]).sin(),
    });
    let y = DVector::from_column_slice(values);
    let svd = design.svd(true, true);
    let coef = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::CheckFailed(format!("fringe fit: {e}")))?;
    let (b, c) = (coef[1], coef[2]);
    // b cos x + c sin x = R cos(x + δ) with R cos δ = b, R sin δ = −c.
    Ok(FringeFit {
        offset: coef[0],
        amplitude: b.hypot(c),
        phase: (-c).atan2(b),
    })
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Prepares `(|m₁⟩ + |m₂⟩)/√2`, lets it evolve for `t` under `κJ_z²`, scans the
/// readout phase and fits the pair-beamsplitter fringe. Returns the fringe phase
/// shift relative to `κ = 0`, which equals `κt(m₁² − m₂²)` modulo 2π.
pub fn pair_fringe_phase_shift(
    ops: &SpinOperators,
    m1: f64,
    m2: f64,
    kappa: f64,
    t: f64,
    phi_grid: &[f64],
) -> Result<f64> {
    let j = ops.j;
    let a = j.index_of(m1)?;
    let b = j.index_of(m2)?;
    let mut amps = DVector::zeros(j.dim());
    amps[a] = Complex64::new(1.0, 0.0);
    amps[b] = Complex64::new(1.0, 0.0);
    let initial = StateVector::normalized(amps)?;
    let basis = MeasurementBasis::pair_beamsplitter(j, m1, m2)?;
    let phase_at = |kappa: f64| -> Result<f64> {
        let tpl = ReadoutPhaseTemplate::new(PulseSequence::new(vec![PulseElement::free(t, 0.0, kappa)])?);
        let rec = generate_fringe(ops, &tpl, phi_grid, &initial, &basis, 0, 0)?;
        Ok(fit_fringe(phi_grid, &rec.outcome_series(a), m1 - m2)?.phase)
    };
    Ok(wrap_phase(phase_at(0.0)? - phase_at(kappa)?))
}

/// Uniform grid of `n` points on `[start, stop)`.
pub fn uniform_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + (stop - start) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::make_spin_ops;

    fn spin(j: f64) -> SpinOperators {
        make_spin_ops(SpinQuantumNumber::new(j).unwrap())
    }

    #[test]
    fn ramsey_at_zero_phase_is_identity() {
        let ops = spin(3.5);
        assert!(max_abs_diff(&ramsey_unitary(&ops, 0.0).unwrap(), &identity(8)) < 1e-12);
    }

    #[test]
    fn spin_half_ramsey_survival() {
        let ops = spin(0.5);
        for k in 0..20 {
            let phi = -3.0 + 0.37 * k as f64;
            let u = ramsey_unitary(&ops, phi).unwrap();
            assert!((u[(0, 0)].norm_sqr() - (phi / 2.0).cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn kappa_zero_reduces_to_plain_ramsey() {
        let ops = spin(2.0);
        let a = ramsey_lv_unitary(&ops, 0.9, 0.0, 5.0).unwrap();
        let b = ramsey_unitary(&ops, 0.9).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn spin_half_lv_is_global_phase() {
        let ops = spin(0.5);
        let (kappa, t) = (0.7, 1.3);
        let a = ramsey_lv_unitary(&ops, 0.4, kappa, t).unwrap();
        let b = ramsey_unitary(&ops, 0.4).unwrap() * Complex64::from_polar(1.0, -kappa * t / 4.0);
        assert!(max_abs_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn zero_length_free_evolution_is_noop() {
        let ops = spin(1.5);
        let psi = StateVector::from_slice(&[
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.0, 0.4),
            Complex64::new(0.6, 0.0),
        ])
        .unwrap();
        let seq = PulseSequence::new(vec![PulseElement::free(0.0, 3.0, 2.0)]).unwrap();
        let out = evolve_sequence(&ops, &seq, &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn ramsey_pi_phase_transfers_population() {
        let ops = spin(0.5);
        let up = ops.basis_state(0.5).unwrap();
        let seq = PulseSequence::new(vec![
            PulseElement::rotation(Axis::X, -FRAC_PI_2),
            PulseElement::free(1.0, PI, 0.0),
            PulseElement::rotation(Axis::X, FRAC_PI_2),
        ])
        .unwrap();
        let out = evolve_sequence(&ops, &seq, &up).unwrap();
        assert!(out.populations()[0] < 1e-12);
    }

    #[test]
    fn same_sign_quarter_turns_at_pi_phase_restore() {
        // Two identical π/2 pulses around a π phase return the spin upward.
        let ops = spin(0.5);
        let up = ops.basis_state(0.5).unwrap();
        let seq = PulseSequence::new(vec![
            PulseElement::rotation(Axis::X, FRAC_PI_2),
            PulseElement::free(1.0, PI, 0.0),
            PulseElement::rotation(Axis::X, FRAC_PI_2),
        ])
        .unwrap();
        let out = evolve_sequence(&ops, &seq, &up).unwrap();
        assert!((out.populations()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn echo_cancels_detuning() {
        let ops = spin(0.5);
        let up = ops.basis_state(0.5).unwrap();
        for rate in [0.0, 0.3, 1.7, -4.0] {
            let seq = PulseSequence::spin_echo(0.8, rate, 0.0).unwrap();
            let out = evolve_sequence(&ops, &seq, &up).unwrap();
            assert!((out.populations()[0] - 1.0).abs() < 1e-10, "rate {rate}");
            // Matrix-product oracle, written out by hand.
            let u = rotation(&ops, Axis::X, FRAC_PI_2).unwrap()
                * free_evolution_unitary(&ops, rate * 0.8, 0.0)
                * rotation(&ops, Axis::Y, PI).unwrap()
                * free_evolution_unitary(&ops, rate * 0.8, 0.0)
                * rotation(&ops, Axis::X, -FRAC_PI_2).unwrap();
            assert!(max_abs_diff(&u, &seq.unitary(&ops).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn cpmg_keeps_lv_phase_and_drops_detuning() {
        let ops = spin(3.5);
        let (m1, m2) = (-3.5, -0.5);
        let a = ops.j.index_of(m1).unwrap();
        let b = ops.j.index_of(m2).unwrap();
        let mut amps = DVector::zeros(8);
        amps[a] = Complex64::new(1.0, 0.0);
        amps[b] = Complex64::new(1.0, 0.0);
        let psi = StateVector::normalized(amps).unwrap();
        let kappa = 0.01;
        let relphase = |rate: f64| {
            let el: Vec<PulseElement> = (0..4)
                .flat_map(|_| {
                    [
                        PulseElement::free(0.5, rate, kappa),
                        PulseElement::rotation(Axis::Y, PI),
                        PulseElement::free(0.5, rate, kappa),
                    ]
                })
                .collect();
            let out = evolve_sequence(&ops, &PulseSequence::new(el).unwrap(), &psi).unwrap();
            let amp = out.amplitudes();
            (amp[a] * amp[b].conj()).arg()
        };
        let p0 = relphase(0.0);
        for rate in [0.4, -2.3] {
            assert!((relphase(rate) - p0).abs() < 1e-10);
        }
        let want = -relative_lv_phase(ops.j, m1, m2, kappa, 4.0).unwrap();
        assert!((wrap_phase(p0 - want)).abs() < 1e-10, "{p0} vs {want}");
    }

    #[test]
    fn relative_phase_examples() {
        let j = SpinQuantumNumber::new(3.5).unwrap();
        assert_eq!(relative_lv_phase(j, -3.5, -0.5, 1.0, 1.0).unwrap(), 12.0);
        assert_eq!(relative_lv_phase(j, 2.5, -2.5, 3.0, 7.0).unwrap(), 0.0);
        let p = relative_lv_phase(j, -3.5, -0.5, 2.042e-7, 1.0).unwrap();
        assert!((p - 2.45e-6).abs() < 0.01e-6);
        assert!(relative_lv_phase(j, 4.5, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn exact_fringe_matches_cosine() {
        let ops = spin(0.5);
        let grid = uniform_grid(0.0, 2.0 * PI, 24);
        let rec = generate_fringe(
            &ops,
            &RamseyTemplate { kappa: 0.0, t: 1.0 },
            &grid,
            &ops.basis_state(0.5).unwrap(),
            &MeasurementBasis::jz(2),
            0,
            1,
        )
        .unwrap();
        assert!(rec.counts.is_none());
        for (phi, row) in grid.iter().zip(&rec.probabilities) {
            assert!((row[0] - (phi / 2.0).cos().powi(2)).abs() < 1e-14);
            assert!((row[1] - (phi / 2.0).sin().powi(2)).abs() < 1e-14);
        }
        assert!(!rec.to_csv().lines().next().unwrap().contains("count"));
    }

    #[test]
    fn sampled_fringe_is_deterministic_and_concentrates() {
        let ops = spin(1.0);
        let grid = uniform_grid(0.0, PI, 5);
        let run = |seed| {
            generate_fringe(
                &ops,
                &RamseyTemplate { kappa: 0.3, t: 1.0 },
                &grid,
                &ops.basis_state(1.0).unwrap(),
                &MeasurementBasis::jz(3),
                1_000_000,
                seed,
            )
            .unwrap()
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_ne!(a.counts, run(10).counts);
        let counts = a.counts.as_ref().unwrap();
        for (row, c) in a.probabilities.iter().zip(counts) {
            assert_eq!(c.iter().sum::<u64>(), 1_000_000);
            for (p, n) in row.iter().zip(c) {
                assert!((*n as f64 / 1e6 - p).abs() < 5e-3);
            }
        }
    }

    #[test]
    fn fringe_rejects_wrong_basis_dimension() {
        let ops = spin(1.0);
        let r = generate_fringe(
            &ops,
            &RamseyTemplate { kappa: 0.0, t: 1.0 },
            &[0.0],
            &ops.basis_state(1.0).unwrap(),
            &MeasurementBasis::jz(2),
            0,
            0,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn multinomial_edge_cases() {
        let mut rng = substream(1, 0);
        assert_eq!(sample_multinomial(&[1.0, 0.0, 0.0], 50, &mut rng), vec![50, 0, 0]);
        assert_eq!(sample_multinomial(&[0.0, 0.0, 1.0], 50, &mut rng), vec![0, 0, 50]);
        assert_eq!(sample_multinomial(&[0.5, 0.5], 0, &mut rng), vec![0, 0]);
    }

    #[test]
    fn fit_recovers_phase() {
        let grid = uniform_grid(0.0, 2.0 * PI, 16);
        let y: Vec<f64> = grid.iter().map(|p| 0.5 + 0.3 * (-3.0 * p + 0.7).cos()).collect();
        let f = fit_fringe(&grid, &y, -3.0).unwrap();
        assert!((f.offset - 0.5).abs() < 1e-14);
        assert!((f.amplitude - 0.3).abs() < 1e-14);
        assert!((f.phase - 0.7).abs() < 1e-13);
    }

    #[test]
    fn pair_phase_shift_is_twelve_kappa_t() {
        let ops = spin(3.5);
        let grid = uniform_grid(0.0, 2.0 * PI / 3.0, 12);
        for kt in [1e-3, 0.05, 0.2] {
            let got = pair_fringe_phase_shift(&ops, -3.5, -0.5, kt, 1.0, &grid).unwrap();
            assert!((got - 12.0 * kt).abs() <= 1e-9 * 12.0 * kt, "{got}");
        }
    }
}
