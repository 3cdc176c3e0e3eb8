//! C ABI over `lvsim`.
//!
//! Every fallible function returns an [`LvsimStatus`] and writes results
//! through out-pointers. On failure the message is available from
//! [`lvsim_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their matching `_free` function. Strings returned
//! through `char **` are owned by the caller and released with
//! [`lvsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lvsim::eep_framework::{
    classify_violation, constrain_a_prime, energy_shift_lli, transition_probability, SpinHalf, TrapParams,
    ViolationClass, ViolationMatrix,
};
use lvsim::interferometry::{
    generate_fringe, ramsey_lv_closed_form, ramsey_lv_unitary, relative_lv_phase, uniform_grid, FringeRecord,
    MeasurementBasis, RamseyTemplate,
};
use lvsim::lv_model::{kappa_from_c02, t20_diagonal, LvParams};
use lvsim::metrology::{entanglement_entropy, estimate_kappa, qfi_pure, BipartiteState, EstimationConfig};
use lvsim::spin_algebra::{max_abs_diff, rotation, Axis};
use lvsim::units::{Hertz, Joules, JoulesPerTesla, Kilograms, Momentum, RadPerSec, Tesla};
use lvsim::{Complex64, Error, SpinOperators, SpinQuantumNumber, StateVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvsimAxis {
    X = 0,
    Y = 1,
    Z = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvsimGenerator {
    Jx = 0,
    Jy = 1,
    Jz = 2,
    JzSquared = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvsimViolationClass {
    None = 0,
    Classical = 1,
    Quantum = 2,
}

/// Trap and magnetic parameters in SI units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvsimTrap {
    pub mass_kg: f64,
    pub omega0_rad_s: f64,
    pub n: u32,
    pub mu_j_per_t: f64,
    pub b_field_t: f64,
}

/// Opaque spin-operator set.
pub struct LvsimSpinOps(SpinOperators);

/// Opaque fringe record.
pub struct LvsimFringe(FringeRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(LvsimStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Eigen | Error::NotNormalized(_) | Error::CheckFailed(_) => LvsimStatus::NumericalFailure,
            _ => LvsimStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LvsimStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: impl Into<String>) -> Fail {
    Fail(LvsimStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LvsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LvsimStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            LvsimStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn complex_slice(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Fail> {
    if re.is_null() || im.is_null() {
        return Err(null("amplitude array"));
    }
    let (re, im) = unsafe { (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len)) };
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

unsafe fn ops_ref<'a>(ops: *const LvsimSpinOps) -> Result<&'a SpinOperators, Fail> {
    unsafe { ops.as_ref() }.map(|o| &o.0).ok_or_else(|| null("spin operator handle"))
}

fn trap_from(t: &LvsimTrap) -> TrapParams {
    TrapParams {
        mass: Kilograms(t.mass_kg),
        omega0: RadPerSec(t.omega0_rad_s),
        n: t.n,
        mu: JoulesPerTesla(t.mu_j_per_t),
        b_field: Tesla(t.b_field_t),
    }
}

unsafe fn trap_ref(t: *const LvsimTrap) -> Result<TrapParams, Fail> {
    unsafe { t.as_ref() }.map(trap_from).ok_or_else(|| null("trap"))
}

fn string_out(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| bad("string contains NUL"))?;
    unsafe { write(out, c.into_raw()) }
}

fn spin(twice_j: u32) -> Result<SpinQuantumNumber, Fail> {
    Ok(SpinQuantumNumber::from_twice(twice_j)?)
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on this thread.
#[unsafe(no_mangle)]
pub extern "C" fn lvsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn lvsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Builds spin operators for `j = twice_j / 2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_spin_ops_new(twice_j: u32, out: *mut *mut LvsimSpinOps) -> LvsimStatus {
    guard(|| {
        let ops = SpinOperators::new(spin(twice_j)?);
        unsafe { write(out, Box::into_raw(Box::new(LvsimSpinOps(ops)))) }
    })
}

/// # Safety
/// `ops` must come from [`lvsim_spin_ops_new`] or be NULL.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_spin_ops_free(ops: *mut LvsimSpinOps) {
    if !ops.is_null() {
        drop(unsafe { Box::from_raw(ops) });
    }
}

/// Hilbert-space dimension, or 0 for NULL.
///
/// # Safety
/// `ops` must be a valid handle or NULL.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_spin_ops_dim(ops: *const LvsimSpinOps) -> usize {
    unsafe { ops.as_ref() }.map_or(0, |o| o.0.dim())
}

/// Writes `exp(-i angle J_axis)` row-major into `re`/`im`, each of `len >= d²`.
///
/// # Safety
/// `re` and `im` must hold `len` writable doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_rotation(
    ops: *const LvsimSpinOps,
    axis: LvsimAxis,
    angle: f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> LvsimStatus {
    guard(|| {
        let ops = unsafe { ops_ref(ops) }?;
        let d = ops.dim();
        if re.is_null() || im.is_null() {
            return Err(null("output array"));
        }
        if len < d * d {
            return Err(Fail(LvsimStatus::BufferTooSmall, format!("need {} entries, got {len}", d * d)));
        }
        let ax = match axis {
            LvsimAxis::X => Axis::X,
            LvsimAxis::Y => Axis::Y,
            LvsimAxis::Z => Axis::Z,
        };
        let u = rotation(ops, ax, angle)?;
        for r in 0..d {
            for c in 0..d {
                unsafe {
                    *re.add(r * d + c) = u[(r, c)].re;
                    *im.add(r * d + c) = u[(r, c)].im;
                }
            }
        }
        Ok(())
    })
}

/// Max-norm gap between the pulse-product LV Ramsey operator and its closed form.
///
/// # Safety
/// `ops` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_ramsey_identity_error(
    ops: *const LvsimSpinOps,
    phi: f64,
    kappa_t: f64,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| {
        let ops = unsafe { ops_ref(ops) }?;
        let a = ramsey_lv_unitary(ops, phi, kappa_t, 1.0)?;
        let b = ramsey_lv_closed_form(ops, phi, kappa_t, 1.0)?;
        unsafe { write(out, max_abs_diff(&a, &b)) }
    })
}

/// `⟨J,m|T₀⁽²⁾|J,m⟩` in units of `reduced`.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_t20_diagonal(twice_j: u32, m: f64, reduced: f64, out: *mut f64) -> LvsimStatus {
    guard(|| unsafe { write(out, t20_diagonal(spin(twice_j)?, m, reduced)?) })
}

/// `κ` in rad/s from `C₀⁽²⁾`, the frequency factor in Hz and `Δ(m²)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_kappa_from_c02(c02: f64, freq_hz: f64, delta_m_sq: f64, out: *mut f64) -> LvsimStatus {
    guard(|| {
        let lv = LvParams::new(c02, Hertz(freq_hz), RadPerSec(0.0))?;
        unsafe { write(out, kappa_from_c02(&lv, delta_m_sq)?.0) }
    })
}

/// `κ t (m₁² − m₂²)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_relative_lv_phase(
    twice_j: u32,
    m1: f64,
    m2: f64,
    kappa: f64,
    t: f64,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| unsafe { write(out, relative_lv_phase(spin(twice_j)?, m1, m2, kappa, t)?) })
}

/// Yb-171 example trap.
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_trap_default(out: *mut LvsimTrap) -> LvsimStatus {
    guard(|| {
        let t = TrapParams::default();
        unsafe {
            write(
                out,
                LvsimTrap {
                    mass_kg: t.mass.0,
                    omega0_rad_s: t.omega0.0,
                    n: t.n,
                    mu_j_per_t: t.mu.0,
                    b_field_t: t.b_field.0,
                },
            )
        }
    })
}

/// `a′` in J bounded by the level shift `h C₀⁽²⁾ f`.
///
/// # Safety
/// `trap` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_constrain_a_prime(
    c02: f64,
    freq_hz: f64,
    trap: *const LvsimTrap,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| {
        let trap = unsafe { trap_ref(trap) }?;
        let lv = LvParams::new(c02, Hertz(freq_hz), RadPerSec(0.0))?;
        unsafe { write(out, constrain_a_prime(&lv, &trap)?.0) }
    })
}

/// First-order trap energy shift in J for a given `a′`.
///
/// # Safety
/// `trap` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_energy_shift_lli(trap: *const LvsimTrap, a_prime: f64, out: *mut f64) -> LvsimStatus {
    guard(|| {
        let trap = unsafe { trap_ref(trap) }?;
        unsafe { write(out, energy_shift_lli(&trap, Joules(a_prime))?.0) }
    })
}

/// Classifies the violation matrix `[[a′, b′], [b′*, c′]]` (J) at tolerance `tol` (J).
///
/// # Safety
/// `out` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_classify_violation(
    a_prime: f64,
    b_re: f64,
    b_im: f64,
    c_prime: f64,
    tol: f64,
    out: *mut LvsimViolationClass,
) -> LvsimStatus {
    guard(|| {
        let xi = ViolationMatrix {
            a_prime: Joules(a_prime),
            b_prime: Complex64::new(b_re, b_im),
            c_prime: Joules(c_prime),
        };
        let class = match classify_violation(&xi, Joules(tol))? {
            ViolationClass::None => LvsimViolationClass::None,
            ViolationClass::Classical => LvsimViolationClass::Classical,
            ViolationClass::Quantum => LvsimViolationClass::Quantum,
        };
        unsafe { write(out, class) }
    })
}

/// Spin-flip probability after time `t` (s) at momentum `p` (kg m/s).
///
/// # Safety
/// `trap` and `out` must be valid pointers.
#[unsafe(no_mangle)]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lvsim_transition_probability(
    trap: *const LvsimTrap,
    a_prime: f64,
    b_re: f64,
    b_im: f64,
    c_prime: f64,
    initial_up: bool,
    p: f64,
    t: f64,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| {
        let trap = unsafe { trap_ref(trap) }?;
        let xi = ViolationMatrix {
            a_prime: Joules(a_prime),
            b_prime: Complex64::new(b_re, b_im),
            c_prime: Joules(c_prime),
        };
        let initial = if initial_up { SpinHalf::Up } else { SpinHalf::Down };
        unsafe { write(out, transition_probability(&trap, &xi, initial, Momentum(p), t)?) }
    })
}

/// Pure-state quantum Fisher information `4 Var(G)` for the chosen generator.
///
/// # Safety
/// `re`/`im` must hold `len` doubles; `ops` and `out` must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_qfi_pure(
    ops: *const LvsimSpinOps,
    generator: LvsimGenerator,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| {
        let ops = unsafe { ops_ref(ops) }?;
        let amps = unsafe { complex_slice(re, im, len) }?;
        if len != ops.dim() {
            return Err(bad(format!("state has {len} amplitudes, expected {}", ops.dim())));
        }
        let state = StateVector::from_slice(&amps)?;
        let jz2;
        let g = match generator {
            LvsimGenerator::Jx => &ops.jx,
            LvsimGenerator::Jy => &ops.jy,
            LvsimGenerator::Jz => &ops.jz,
            LvsimGenerator::JzSquared => {
                jz2 = &ops.jz * &ops.jz;
                &jz2
            }
        };
        unsafe { write(out, qfi_pure(&state, g)?) }
    })
}

/// Entanglement entropy (nats) of a normalised `dim_a × dim_b` pure state.
///
/// # Safety
/// `re`/`im` must hold `dim_a * dim_b` doubles; `out` must be valid.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_entanglement_entropy(
    dim_a: usize,
    dim_b: usize,
    re: *const f64,
    im: *const f64,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| {
        let n = dim_a.checked_mul(dim_b).ok_or_else(|| bad("dimension overflow"))?;
        let amps = unsafe { complex_slice(re, im, n) }?;
        let state = BipartiteState::new((dim_a, dim_b), lvsim::DVector::from_vec(amps))?;
        unsafe { write(out, entanglement_entropy(&state)?) }
    })
}

/// Monte-Carlo `κ` estimation with the default pair protocol; writes the
/// mean estimate and its standard deviation.
///
/// # Safety
/// `out_mean` and `out_sigma` must be valid pointers.
#[unsafe(no_mangle)]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lvsim_estimate_kappa(
    true_kappa: f64,
    t: f64,
    n_atoms: usize,
    shots_per_atom: u64,
    trials: usize,
    seed: u64,
    out_mean: *mut f64,
    out_sigma: *mut f64,
) -> LvsimStatus {
    guard(|| {
        if out_mean.is_null() || out_sigma.is_null() {
            return Err(null("output pointer"));
        }
        let r = estimate_kappa(true_kappa, t, n_atoms, shots_per_atom, trials, seed, &EstimationConfig::default())?;
        unsafe {
            write(out_mean, r.kappa_hat)?;
            write(out_sigma, r.sigma)
        }
    })
}

/// Ramsey fringe on `|j, +j⟩` with `J_z` readout over `n_points` phases in
/// `[phi_start, phi_stop)`.
///
/// # Safety
/// `ops` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lvsim_fringe_generate_ramsey(
    ops: *const LvsimSpinOps,
    kappa: f64,
    t: f64,
    phi_start: f64,
    phi_stop: f64,
    n_points: usize,
    shots: u64,
    seed: u64,
    out: *mut *mut LvsimFringe,
) -> LvsimStatus {
    guard(|| {
        let ops = unsafe { ops_ref(ops) }?;
        if n_points == 0 {
            return Err(bad("n_points must be positive"));
        }
        let grid = uniform_grid(phi_start, phi_stop, n_points);
        let initial = ops.basis_state(ops.j.value())?;
        let basis = MeasurementBasis::jz(ops.dim());
        let rec = generate_fringe(ops, &RamseyTemplate { kappa, t }, &grid, &initial, &basis, shots, seed)?;
        unsafe { write(out, Box::into_raw(Box::new(LvsimFringe(rec)))) }
    })
}

/// # Safety
/// `f` must come from this library or be NULL.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_fringe_free(f: *mut LvsimFringe) {
    if !f.is_null() {
        drop(unsafe { Box::from_raw(f) });
    }
}

/// Number of scan phases, or 0 for NULL.
///
/// # Safety
/// `f` must be a valid handle or NULL.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_fringe_len(f: *const LvsimFringe) -> usize {
    unsafe { f.as_ref() }.map_or(0, |f| f.0.phi_grid.len())
}

/// Number of readout outcomes, or 0 for NULL.
///
/// # Safety
/// `f` must be a valid handle or NULL.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_fringe_num_outcomes(f: *const LvsimFringe) -> usize {
    unsafe { f.as_ref() }.map_or(0, |f| f.0.num_outcomes())
}

/// Probability of outcome `k` at scan index `i`.
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_fringe_probability(
    f: *const LvsimFringe,
    i: usize,
    k: usize,
    out: *mut f64,
) -> LvsimStatus {
    guard(|| {
        let f = unsafe { f.as_ref() }.ok_or_else(|| null("fringe handle"))?;
        let p = f
            .0
            .probabilities
            .get(i)
            .and_then(|row| row.get(k))
            .ok_or_else(|| bad(format!("index ({i}, {k}) out of range")))?;
        unsafe { write(out, *p) }
    })
}

/// Fringe record as JSON; free with [`lvsim_string_free`].
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_fringe_to_json(f: *const LvsimFringe, out: *mut *mut c_char) -> LvsimStatus {
    guard(|| {
        let f = unsafe { f.as_ref() }.ok_or_else(|| null("fringe handle"))?;
        string_out(out, f.0.to_json()?)
    })
}

/// Fringe record as CSV; free with [`lvsim_string_free`].
///
/// # Safety
/// `f` and `out` must be valid pointers.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_fringe_to_csv(f: *const LvsimFringe, out: *mut *mut c_char) -> LvsimStatus {
    guard(|| {
        let f = unsafe { f.as_ref() }.ok_or_else(|| null("fringe handle"))?;
        string_out(out, f.0.to_csv())
    })
}

/// Parses a spin string such as `"7/2"` and writes `2j`.
///
/// # Safety
/// `s` must be a NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn lvsim_parse_spin(s: *const c_char, out: *mut u32) -> LvsimStatus {
    guard(|| {
        if s.is_null() {
            return Err(null("string"));
        }
        let text = unsafe { CStr::from_ptr(s) }.to_str().map_err(|_| bad("invalid UTF-8"))?;
        let j: SpinQuantumNumber = text.parse()?;
        unsafe { write(out, j.twice()) }
    })
}
