//! Finite-dimensional angular-momentum algebra for arbitrary spin `j`.
//!
//! Basis ordering is fixed to `m = +j, j-1, …, -j` everywhere in the crate:
//! basis index `k` carries projection `m = j - k`. Matrices are dimensionless
//! (ħ = 1).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Maximum tolerated `max |H - H†|` for inputs that must be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum tolerated deviation of a state norm from one at construction.
pub const NORM_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Total angular momentum `j`, stored as the positive integer `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantumNumber {
    twice: u32,
}

impl SpinQuantumNumber {
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !j.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(j));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Self { twice: twice_j })
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// Hilbert-space dimension `2j + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// `true` for `j = 1/2, 3/2, …`.
    pub fn is_half_odd(self) -> bool {
        self.twice % 2 == 1
    }

    /// `j(j+1)`.
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }

    /// Projections in basis order, `+j` first.
    pub fn projections(self) -> impl Iterator<Item = f64> {
        let j = self.value();
        (0..self.dim()).map(move |k| j - k as f64)
    }

    /// Checks `|m| <= j` and `j - m` integer.
    pub fn validate_projection(self, m: f64) -> Result<()> {
        self.index_of(m).map(|_| ())
    }

    /// Basis index of projection `m`.
    pub fn index_of(self, m: f64) -> Result<usize> {
        let j = self.value();
        let k = j - m;
        if !m.is_finite() || m.abs() > j + 1e-9 || (k - k.round()).abs() > 1e-9 {
            return Err(Error::InvalidProjection { j, m });
        }
        Ok(k.round() as usize)
    }
}

impl fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for SpinQuantumNumber {
    type Err = Error;

    /// Accepts `"7/2"`, `"3.5"` or `"1"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num
                .trim()
                .parse()
                .map_err(|_| Error::param(format!("bad spin '{s}'")))?;
            match den.trim() {
                "2" => Self::from_twice(num),
                "1" => Self::from_twice(2 * num),
                _ => Err(Error::param(format!("bad spin '{s}'"))),
            }
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::param(format!("bad spin '{s}'")))?;
            Self::new(v)
        }
    }
}

impl Serialize for SpinQuantumNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpinQuantumNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Self::new(v),
            Repr::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// `J_x, J_y, J_z, J_±, J²` for one spin.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub j: SpinQuantumNumber,
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
    pub jplus: ComplexMatrix,
    pub jminus: ComplexMatrix,
    pub jsq: ComplexMatrix,
}

/// Builds the standard angular-momentum matrices in the `m = +j … -j` basis.
pub fn make_spin_ops(j: SpinQuantumNumber) -> SpinOperators {
    let d = j.dim();
    let jv = j.value();
    let ms: Vec<f64> = j.projections().collect();

    let jz = ComplexMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::new(ms[r], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // <m+1| J+ |m> sits at (k-1, k) since index k-1 carries m+1.
    let jplus = ComplexMatrix::from_fn(d, d, |r, c| {
        if c >= 1 && r == c - 1 {
            let m = ms[c];
            Complex64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus).scale(0.5);
    let jy = (&jplus - &jminus) / (I * 2.0);
    let jsq = &jx * &jx + &jy * &jy + &jz * &jz;

    SpinOperators {
        j,
        jx,
        jy,
        jz,
        jplus,
        jminus,
        jsq,
    }
}

impl SpinOperators {
    pub fn new(j: SpinQuantumNumber) -> Self {
        make_spin_ops(j)
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn component(&self, axis: Axis) -> &ComplexMatrix {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    /// The eigenstate `|j, m⟩`.
    pub fn basis_state(&self, m: f64) -> Result<StateVector> {
        let k = self.j.index_of(m)?;
        Ok(StateVector::basis(self.dim(), k))
    }
}

/// Unit-norm pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalised within [`NORM_TOL`].
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::param("empty state vector"));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        let n = amps.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { amps })
    }

    /// Normalises arbitrary non-zero amplitudes.
    pub fn normalized(amps: DVector<Complex64>) -> Result<Self> {
        let n = amps.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::param("cannot normalise a zero or non-finite vector"));
        }
        Self::new(amps.unscale(n))
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::normalized(DVector::from_column_slice(amps))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[k] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `U |ψ⟩` without renormalisation.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.ncols(),
            });
        }
        Ok(Self { amps: u * &self.amps })
    }

    /// `⟨ψ| A |ψ⟩`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<Complex64> {
        if a.ncols() != self.dim() || a.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.ncols(),
            });
        }
        Ok(self.amps.dotc(&(a * &self.amps)))
    }

    /// Born-rule populations in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// `max |A_ij|`.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - B|` over entries; `f64::INFINITY` on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    max_abs(&(a - b))
}

pub fn hermiticity_defect(h: &ComplexMatrix) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

fn check_square_finite(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(())
}

fn is_diagonal(h: &ComplexMatrix) -> bool {
    let d = h.nrows();
    (0..d).all(|r| (0..d).all(|c| r == c || h[(r, c)] == Complex64::new(0.0, 0.0)))
}

/// Real eigenvalues and unitary eigenvectors of a Hermitian matrix.
pub fn eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_square_finite(h)?;
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::Eigen)?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// `exp(-i H t)` for Hermitian `H`, by eigendecomposition.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFinite("evolution time"));
    }
    check_square_finite(h)?;
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    if is_diagonal(h) {
        let d = h.nrows();
        return Ok(ComplexMatrix::from_fn(d, d, |r, c| {
            if r == c {
                (-I * h[(r, r)].re * t).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
    }
    let (vals, vecs) = eigh(h)?;
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&e| (-I * e * t).exp()));
    let mut scaled = vecs.clone();
    for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *ph;
    }
    Ok(scaled * vecs.adjoint())
}

/// `exp(-i · angle · J_axis)`.
pub fn rotation(ops: &SpinOperators, axis: Axis, angle: f64) -> Result<ComplexMatrix> {
    if !angle.is_finite() {
        return Err(Error::NonFinite("rotation angle"));
    }
    expm_hermitian(ops.component(axis), angle)
}

/// Kronecker product `A ⊗ B`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}
