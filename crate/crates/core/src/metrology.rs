//! Fisher information, maximum-likelihood estimation of `κ`, standard-quantum-limit
//! scans over ensembles of independent atoms, and entanglement bookkeeping for
//! the locality argument.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometry::{sample_multinomial, uniform_grid, FringeRecord, MeasurementBasis};
use crate::rng::substream;
use crate::spin_algebra::{
    eigh, expm_hermitian, hermiticity_defect, identity, tensor_product, ComplexMatrix,
    SpinOperators, SpinQuantumNumber, StateVector, HERMITIAN_TOL, NORM_TOL,
};

/// Probabilities below this are left out of Fisher-information sums.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// `4(⟨G²⟩ − ⟨G⟩²)` for a pure state.
pub fn qfi_pure(state: &StateVector, generator: &ComplexMatrix) -> Result<f64> {
    let defect = hermiticity_defect(generator);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let g_psi = state.apply(generator)?;
    let mean = state.amplitudes().dotc(g_psi.amplitudes()).re;
    let second = g_psi.amplitudes().norm_squared();
    Ok((4.0 * (second - mean * mean)).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalFisher {
    pub value: f64,
    /// Outcome/grid cells skipped because `p < MIN_PROBABILITY`.
    pub excluded: usize,
}

/// Classical Fisher information about `κ` summed over a fringe grid, from exact
/// fringes at `κ` and `κ ± dκ` (central differences).
pub fn cfi_fringe(
    center: &FringeRecord,
    plus: &FringeRecord,
    minus: &FringeRecord,
    dkappa: f64,
) -> Result<ClassicalFisher> {
    if !(dkappa.is_finite() && dkappa > 0.0) {
        return Err(Error::param("dkappa must be positive"));
    }
    for r in [plus, minus] {
        if r.phi_grid != center.phi_grid || r.num_outcomes() != center.num_outcomes() {
            return Err(Error::param("fringes must share grid and outcome set"));
        }
    }
    let mut value = 0.0;
    let mut excluded = 0;
    for i in 0..center.phi_grid.len() {
        for k in 0..center.num_outcomes() {
            let p = center.probabilities[i][k];
            if p < MIN_PROBABILITY {
                excluded += 1;
                continue;
            }
            let dp = (plus.probabilities[i][k] - minus.probabilities[i][k]) / (2.0 * dkappa);
            value += dp * dp / p;
        }
    }
    Ok(ClassicalFisher { value, excluded })
}

/// Exact outcome model for a free-evolution interferometer:
/// amplitude `a_k(φ, κ) = Σ_m R_km · exp(iφm − iκt·m²) · ψ_m`,
/// where `ψ` is the state entering free evolution and `R` the full readout
/// unitary (closing pulses and basis rotation).
#[derive(Clone, Debug)]
pub struct FringeModel {
    prepared: DVector<Complex64>,
    readout: ComplexMatrix,
    ms: Vec<f64>,
    phi_grid: Vec<f64>,
    t: f64,
}

impl FringeModel {
    pub fn new(
        j: SpinQuantumNumber,
        prepared: &StateVector,
        readout: ComplexMatrix,
        phi_grid: Vec<f64>,
        t: f64,
    ) -> Result<Self> {
        let d = j.dim();
        if prepared.dim() != d || readout.nrows() != d || readout.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: prepared.dim(),
            });
        }
        if phi_grid.is_empty() {
            return Err(Error::param("phi grid must not be empty"));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::param("interrogation time must be positive"));
        }
        Ok(Self {
            prepared: prepared.amplitudes().clone(),
            readout,
            ms: j.projections().collect(),
            phi_grid,
            t,
        })
    }

    /// Superposition `(|m₁⟩ + |m₂⟩)/√2` read out through the pair beamsplitter.
    pub fn pair(j: SpinQuantumNumber, m1: f64, m2: f64, phi_grid: Vec<f64>, t: f64) -> Result<Self> {
        let mut amps = DVector::zeros(j.dim());
        amps[j.index_of(m1)?] = Complex64::new(1.0, 0.0);
        amps[j.index_of(m2)?] = Complex64::new(1.0, 0.0);
        let prepared = StateVector::normalized(amps)?;
        let basis = MeasurementBasis::pair_beamsplitter(j, m1, m2)?;
        Self::new(j, &prepared, basis.rotation().clone(), phi_grid, t)
    }

    /// Ramsey interferometer of `κJ_z²` with readout through `basis`.
    pub fn ramsey(ops: &SpinOperators, initial: &StateVector, basis: &MeasurementBasis, phi_grid: Vec<f64>, t: f64) -> Result<Self> {
        use crate::spin_algebra::{rotation, Axis};
        use std::f64::consts::FRAC_PI_2;
        let prepared = initial.apply(&rotation(ops, Axis::X, -FRAC_PI_2)?)?;
        let readout = basis.rotation() * rotation(ops, Axis::X, FRAC_PI_2)?;
        Self::new(ops.j, &prepared, readout, phi_grid, t)
    }

    pub fn phi_grid(&self) -> &[f64] {
        &self.phi_grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn num_outcomes(&self) -> usize {
        self.ms.len()
    }

    fn amplitudes(&self, phi: f64, kappa: f64) -> (DVector<Complex64>, DVector<Complex64>) {
        let kt = kappa * self.t;
        let evolved = DVector::from_iterator(
            self.ms.len(),
            self.ms
                .iter()
                .zip(self.prepared.iter())
                .map(|(&m, &c)| c * Complex64::from_polar(1.0, phi * m - kt * m * m)),
        );
        let dt = DVector::from_iterator(
            self.ms.len(),
            self.ms
                .iter()
                .zip(evolved.iter())
                .map(|(&m, &c)| c * Complex64::new(0.0, -self.t * m * m)),
        );
        (&self.readout * evolved, &self.readout * dt)
    }

    /// Outcome probabilities at every grid point.
    pub fn probabilities(&self, kappa: f64) -> Vec<Vec<f64>> {
        self.phi_grid
            .iter()
            .map(|&phi| self.amplitudes(phi, kappa).0.iter().map(|a| a.norm_sqr()).collect())
            .collect()
    }

    /// Probabilities and their exact `κ` derivatives.
    pub fn probabilities_with_derivative(&self, kappa: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.phi_grid
            .iter()
            .map(|&phi| {
                let (a, da) = self.amplitudes(phi, kappa);
                let p = a.iter().map(|z| z.norm_sqr()).collect();
                let dp = a.iter().zip(da.iter()).map(|(z, dz)| 2.0 * (z.conj() * dz).re).collect();
                (p, dp)
            })
            .collect()
    }

    /// Per-repetition classical Fisher information summed over the grid.
    pub fn fisher(&self, kappa: f64) -> f64 {
        self.probabilities_with_derivative(kappa)
            .iter()
            .flat_map(|(p, dp)| p.iter().zip(dp))
            .filter(|(p, _)| **p >= MIN_PROBABILITY)
            .map(|(p, dp)| dp * dp / p)
            .sum()
    }

    /// `Σ w_ik ln p_ik(κ)`; `-inf` when a weighted outcome has zero probability.
    pub fn log_likelihood(&self, weights: &[Vec<f64>], kappa: f64) -> f64 {
        let probs = self.probabilities(kappa);
        let mut ll = 0.0;
        for (w_row, p_row) in weights.iter().zip(&probs) {
            for (&w, &p) in w_row.iter().zip(p_row) {
                if w > 0.0 {
                    if p <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    ll += w * p.ln();
                }
            }
        }
        ll
    }

    /// `∂/∂κ` of [`Self::log_likelihood`].
    pub fn score(&self, weights: &[Vec<f64>], kappa: f64) -> f64 {
        let mut s = 0.0;
        for (w_row, (p, dp)) in weights.iter().zip(self.probabilities_with_derivative(kappa)) {
            for ((&w, p), dp) in w_row.iter().zip(p).zip(dp) {
                if w > 0.0 && p > 0.0 {
                    s += w * dp / p;
                }
            }
        }
        s
    }
}

/// Reference estimation protocol.
///
/// Each atom is prepared in `(|m₁⟩ + |m₂⟩)/√2`, evolves for `t`, acquires a
/// readout phase `φ` from the grid and is measured through the pair
/// beamsplitter followed by `J_z` readout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    pub j: SpinQuantumNumber,
    pub m1: f64,
    pub m2: f64,
    /// Readout phases; `shots_per_atom` shots are taken at every point.
    pub phi_grid: Vec<f64>,
    /// Points in the coarse likelihood scan over the unambiguous `κ` window.
    pub coarse_points: usize,
    /// Centre of the search window `κ_c ± π / (|m₁² − m₂²| t)`.
    pub prior_center: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            j: SpinQuantumNumber::from_twice(7).expect("7/2 is valid"),
            m1: -3.5,
            m2: -0.5,
            phi_grid: uniform_grid(0.0, 2.0 * PI / 3.0, 4),
            coarse_points: 64,
            prior_center: 0.0,
        }
    }
}

impl EstimationConfig {
    pub fn model(&self, t: f64) -> Result<FringeModel> {
        FringeModel::pair(self.j, self.m1, self.m2, self.phi_grid.clone(), t)
    }

    /// `κ` interval on which the likelihood is single-valued.
    pub fn search_window(&self, t: f64) -> Result<(f64, f64)> {
        let dm2 = crate::lv_model::delta_m_sq(self.j, self.m1, self.m2)?.abs();
        if dm2 == 0.0 {
            return Err(Error::param("state pair has equal |m|; κ is unobservable"));
        }
        let half = PI / (dm2 * t);
        Ok((self.prior_center - half, self.prior_center + half))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimationResult {
    pub kappa_hat: f64,
    /// Sample standard deviation of the per-trial estimates.
    pub sigma: f64,
    pub trials: usize,
    pub n_atoms: usize,
    pub seed: u64,
    /// Trials in which every pooled count landed in one outcome.
    pub degenerate_trials: usize,
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    (a, b)
}

/// Maximum-likelihood `κ` for pooled outcome weights.
///
/// Coarse scan over the search window, golden-section refinement inside a
/// bracket sized from the Fisher information, then bisection on the analytic
/// score to full precision.
pub fn fit_kappa(model: &FringeModel, weights: &[Vec<f64>], window: (f64, f64), coarse_points: usize) -> Result<f64> {
    let (lo, hi) = window;
    if lo.is_nan() || hi.is_nan() || lo >= hi || coarse_points < 3 {
        return Err(Error::param("invalid κ search window"));
    }
    let ll = |k: f64| model.log_likelihood(weights, k);
    let step = (hi - lo) / (coarse_points - 1) as f64;
    let (best_i, _) = (0..coarse_points)
        .map(|i| (i, ll(lo + step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let best = lo + step * best_i as f64;

    let total_weight: f64 = weights.iter().flatten().sum();
    let info = model.fisher(best) * total_weight;
    let cfi_width = if info > 0.0 { 3.0 / info.sqrt() } else { step };
    let half = step.max(cfi_width.min(hi - lo));
    let (a, b) = ((best - half).max(lo), (best + half).min(hi));
    let (a, b) = golden_section_max(&ll, a, b, 30);

    let score = |k: f64| model.score(weights, k);
    let (mut x0, mut x1) = (a, b);
    let (mut s0, s1) = (score(x0), score(x1));
    if s0 > 0.0 && s1 < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if mid <= x0 || mid >= x1 {
                break;
            }
            let sm = score(mid);
            if sm == 0.0 {
                return Ok(mid);
            }
            if (sm > 0.0) == (s0 > 0.0) {
                x0 = mid;
                s0 = sm;
            } else {
                x1 = mid;
            }
        }
    }
    Ok(0.5 * (x0 + x1))
}

fn is_degenerate(counts: &[Vec<f64>]) -> bool {
    let n_out = counts.first().map_or(0, Vec::len);
    let per_outcome: Vec<f64> = (0..n_out).map(|k| counts.iter().map(|r| r[k]).sum()).collect();
    per_outcome.iter().filter(|&&c| c > 0.0).count() <= 1
}

/// Monte-Carlo estimation of `κ` with `n_atoms` independent atoms per trial.
///
/// Each trial draws its counts from the ChaCha substream `(seed, trial)`,
/// atom by atom and grid point by grid point, pools them and fits `κ` by
/// maximum likelihood. With `shots_per_atom = 0` the exact probabilities are
/// used as weights (noiseless inversion).
pub fn estimate_kappa(
    true_kappa: f64,
    t: f64,
    n_atoms: usize,
    shots_per_atom: u64,
    trials: usize,
    seed: u64,
    config: &EstimationConfig,
) -> Result<EstimationResult> {
    if trials < 2 {
        return Err(Error::param("at least two trials are required"));
    }
    if n_atoms == 0 {
        return Err(Error::param("at least one atom is required"));
    }
    if !true_kappa.is_finite() {
        return Err(Error::NonFinite("true kappa"));
    }
    let model = config.model(t)?;
    let window = config.search_window(t)?;
    let probs = model.probabilities(true_kappa);

    let outcomes: Vec<Result<(f64, bool)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let weights: Vec<Vec<f64>> = if shots_per_atom == 0 {
                probs.clone()
            } else {
                let mut rng = substream(seed, trial as u64);
                let mut pooled = vec![vec![0u64; model.num_outcomes()]; probs.len()];
                for _atom in 0..n_atoms {
                    for (row, p) in pooled.iter_mut().zip(&probs) {
                        for (acc, c) in row.iter_mut().zip(sample_multinomial(p, shots_per_atom, &mut rng)) {
                            *acc += c;
                        }
                    }
                }
                pooled.into_iter().map(|r| r.into_iter().map(|c| c as f64).collect()).collect()
            };
            let degenerate = shots_per_atom > 0 && is_degenerate(&weights);
            Ok((fit_kappa(&model, &weights, window, config.coarse_points)?, degenerate))
        })
        .collect();

    let mut estimates = Vec::with_capacity(trials);
    let mut degenerate_trials = 0;
    for o in outcomes {
        let (k, deg) = o?;
        estimates.push(k);
        degenerate_trials += usize::from(deg);
    }
    let (mean, sigma) = mean_std(&estimates);
    Ok(EstimationResult {
        kappa_hat: mean,
        sigma,
        trials,
        n_atoms,
        seed,
        degenerate_trials,
        estimates,
    })
}

/// Mean and sample standard deviation (n − 1), summed in index order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqlScanConfig {
    pub true_kappa: f64,
    pub t: f64,
    pub shots_per_atom: u64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimation: EstimationConfig,
}

impl Default for SqlScanConfig {
    fn default() -> Self {
        Self {
            true_kappa: 0.1,
            t: 1.0,
            shots_per_atom: 200,
            trials: 500,
            seed: 20_180_312,
            estimation: EstimationConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SqlPoint {
    pub n: usize,
    pub sigma_kappa: f64,
    pub kappa_hat: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqlScanResult {
    pub points: Vec<SqlPoint>,
    pub fit: LineFit,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::param("line fit needs at least three paired points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("line fit needs distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        stderr,
    })
}

/// Runs [`estimate_kappa`] for every ensemble size and fits `ln σ` against `ln N`.
pub fn sql_scan(n_list: &[usize], config: &SqlScanConfig) -> Result<SqlScanResult> {
    let mut distinct = n_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::param("SQL scan needs at least four distinct N values"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let r = estimate_kappa(
            config.true_kappa,
            config.t,
            n,
            config.shots_per_atom,
            config.trials,
            config.seed,
            &config.estimation,
        )?;
        points.push(SqlPoint {
            n,
            sigma_kappa: r.sigma,
            kappa_hat: r.kappa_hat,
            trials: r.trials,
            seed: r.seed,
        });
    }
    let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.sigma_kappa.ln()).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::CheckFailed("zero spread in an SQL point; use shots > 0".into()));
    }
    Ok(SqlScanResult {
        fit: fit_line(&x, &y)?,
        points,
    })
}

impl SqlScanResult {
    /// `N,sigma_kappa,trials,seed`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,sigma_kappa,trials,seed\n");
        for p in &self.points {
            s.push_str(&format!("{},{:e},{},{}\n", p.n, p.sigma_kappa, p.trials, p.seed));
        }
        s
    }
}

/// Pure state of two subsystems, amplitudes ordered as `A ⊗ B`
/// (index `i·d₂ + k`).
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    dims: (usize, usize),
    amps: DVector<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl BipartiteState {
    pub fn new(dims: (usize, usize), amps: DVector<Complex64>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || amps.len() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                got: amps.len(),
            });
        }
        let n = amps.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { dims, amps })
    }

    pub fn normalized(dims: (usize, usize), amps: DVector<Complex64>) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::param("cannot normalise a zero vector"));
        }
        Self::new(dims, amps.unscale(n))
    }

    pub fn product(a: &StateVector, b: &StateVector) -> Self {
        Self {
            dims: (a.dim(), b.dim()),
            amps: a.amplitudes().kronecker(b.amplitudes()),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        let d = self.amps.len();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.nrows(),
            });
        }
        Ok(Self {
            dims: self.dims,
            amps: u * &self.amps,
        })
    }

    /// Partial trace over the other subsystem.
    pub fn reduced_density_matrix(&self, keep: Subsystem) -> ComplexMatrix {
        let (d1, d2) = self.dims;
        let a = |i: usize, k: usize| self.amps[i * d2 + k];
        match keep {
            Subsystem::First => ComplexMatrix::from_fn(d1, d1, |r, c| (0..d2).map(|k| a(r, k) * a(c, k).conj()).sum()),
            Subsystem::Second => ComplexMatrix::from_fn(d2, d2, |r, c| (0..d1).map(|i| a(i, r) * a(i, c).conj()).sum()),
        }
    }

    /// Ascending eigenvalues of the reduced state.
    pub fn reduced_spectrum(&self, keep: Subsystem) -> Result<Vec<f64>> {
        let (mut vals, _) = eigh(&self.reduced_density_matrix(keep))?;
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    pub fn entropy_of(&self, keep: Subsystem) -> Result<f64> {
        Ok(von_neumann_entropy(&self.reduced_spectrum(keep)?))
    }
}

/// `−Σ λ ln λ` with `0·ln 0 = 0`.
pub fn von_neumann_entropy(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Entanglement entropy (nats) of subsystem one.
pub fn entanglement_entropy(state: &BipartiteState) -> Result<f64> {
    state.entropy_of(Subsystem::First)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    pub s_before: f64,
    pub s_after_local: f64,
    /// Contrast only: evolution under `κ(J₁z + J₂z)²`, which couples the atoms.
    pub s_after_nonlocal_control: f64,
    pub spectrum_before: Vec<f64>,
    pub spectrum_after_local: Vec<f64>,
}

impl LocalityReport {
    pub fn max_spectrum_shift(&self) -> f64 {
        self.spectrum_before
            .iter()
            .zip(&self.spectrum_after_local)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `κt(J₁z² + J₂z²)` and the coupled control `κt(J₁z + J₂z)²`.
pub fn two_atom_generators(ops: &SpinOperators, kappa_t: f64) -> (ComplexMatrix, ComplexMatrix) {
    let id = identity(ops.dim());
    let jz2 = &ops.jz * &ops.jz;
    let local = tensor_product(&jz2, &id) + tensor_product(&id, &jz2);
    let total = tensor_product(&ops.jz, &id) + tensor_product(&id, &ops.jz);
    let nonlocal = &total * &total;
    (local.scale(kappa_t), nonlocal.scale(kappa_t))
}

/// Entropies before and after local LV evolution, plus the coupled control.
pub fn locality_check(state: &BipartiteState, ops: &SpinOperators, kappa: f64, t: f64) -> Result<LocalityReport> {
    let d = ops.dim();
    if state.dims() != (d, d) {
        return Err(Error::param(format!(
            "locality check needs two spin-{} subsystems, got dims {:?}",
            ops.j,
            state.dims()
        )));
    }
    let (local, nonlocal) = two_atom_generators(ops, kappa * t);
    let after_local = state.apply(&expm_hermitian(&local, 1.0)?)?;
    let after_nonlocal = state.apply(&expm_hermitian(&nonlocal, 1.0)?)?;
    let spectrum_before = state.reduced_spectrum(Subsystem::First)?;
    let spectrum_after_local = after_local.reduced_spectrum(Subsystem::First)?;
    Ok(LocalityReport {
        s_before: von_neumann_entropy(&spectrum_before),
        s_after_local: von_neumann_entropy(&spectrum_after_local),
        s_after_nonlocal_control: entanglement_entropy(&after_nonlocal)?,
        spectrum_before,
        spectrum_after_local,
    })
}
