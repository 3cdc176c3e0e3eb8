//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use lvsim::{ComplexMatrix, Complex64, SpinQuantumNumber};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn spin(twice: u32) -> SpinQuantumNumber {
    SpinQuantumNumber::from_twice(twice).unwrap()
}

pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(A)` by Taylor series with scaling and squaring, for any square `A`.
pub fn expm_series(a: &ComplexMatrix) -> ComplexMatrix {
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scaled = a.unscale(2f64.powi(s));
    let n = a.nrows();
    let mut term = ComplexMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = (&term * &scaled).unscale(k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−i(φJ_y + κt J_y²))` from the series oracle.
pub fn ramsey_closed_form_oracle(jy: &ComplexMatrix, phi: f64, kappa_t: f64) -> ComplexMatrix {
    let g = jy.scale(phi) + (jy * jy).scale(kappa_t);
    expm_series(&g.map(|z| z * Complex64::new(0.0, -1.0)))
}

/// `⟨n|P²|n⟩` from a truncated Fock-space ladder operator, `P = i√(mħω/2)(a† − a)`.
pub fn p2_fock_oracle(n: usize, mass: f64, omega: f64, hbar: f64) -> f64 {
    let dim = 4 * n + 20;
    let mut a = ComplexMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = c((k as f64).sqrt());
    }
    let scale = (mass * hbar * omega / 2.0).sqrt();
    let p = (a.adjoint() - &a).map(|z| z * Complex64::new(0.0, scale));
    (&p * &p)[(n, n)].re
}

/// 2×2 Rabi problem `H = [[e0, b], [b*, e1]]` (J): peak flip probability and
/// the time at which it is reached.
pub fn rabi_peak(e0: f64, e1: f64, b: Complex64, hbar: f64) -> (f64, f64) {
    let delta = (e0 - e1) / 2.0;
    let b2 = b.norm_sqr();
    let omega = (b2 + delta * delta).sqrt() / hbar;
    (b2 / (b2 + delta * delta), std::f64::consts::PI / (2.0 * omega))
}

/// Test Hamiltonian block written out directly:
/// `p²/2m + μB diag(½, −½) + p²/(2m²c²) [[a′, b′], [b′*, c′]]`.
pub fn lli_block_oracle(mass: f64, mu_b: f64, p: f64, a: f64, b: Complex64, cp: f64) -> (f64, f64, Complex64) {
    let c2 = 299_792_458f64.powi(2);
    let k = p * p / (2.0 * mass);
    let g = p * p / (2.0 * mass * mass * c2);
    (k + 0.5 * mu_b + g * a, k - 0.5 * mu_b + g * cp, b * g)
}

/// Random Hermitian matrix from a flat list of uniform draws.
pub fn hermitian_from(dim: usize, xs: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    let mut it = xs.iter().cycle();
    for r in 0..dim {
        h[(r, r)] = c(*it.next().unwrap());
        for col in r + 1..dim {
            let z = Complex64::new(*it.next().unwrap(), *it.next().unwrap());
            h[(r, col)] = z;
            h[(col, r)] = z.conj();
        }
    }
    h
}
