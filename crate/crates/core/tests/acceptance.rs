//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use lvsim::constants::{HBAR, NUCLEAR_MAGNETON, YB171_MASS, YB_FREQ_FACTOR};
use lvsim::eep_framework::{
    classify_violation, constrain_a_prime, energy_shift_lli, oscillator_p2, p2_expectation, transition_probability,
    SpinHalf, TrapParams, ViolationClass, ViolationMatrix, DEFAULT_CLASSIFY_TOL,
};
use lvsim::interferometry::{
    generate_fringe, pair_fringe_phase_shift, ramsey_lv_unitary, ramsey_unitary, uniform_grid, MeasurementBasis,
    RamseyTemplate,
};
use lvsim::lv_model::{t20_diagonal, LvParams};
use lvsim::metrology::{locality_check, sql_scan, BipartiteState, SqlScanConfig};
use lvsim::spin_algebra::identity;
use lvsim::units::{Hertz, Joules, JoulesPerTesla, Kilograms, Momentum, RadPerSec, Tesla};
use lvsim::{Complex64, DVector, SpinOperators};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn operator_algebra() -> Outcome {
    let start = Instant::now();
    let i = Complex64::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for tw in 1..=16 {
        let o = SpinOperators::new(spin(tw));
        for (a, b, c) in [(&o.jx, &o.jy, &o.jz), (&o.jy, &o.jz, &o.jx), (&o.jz, &o.jx, &o.jy)] {
            worst = worst.max(max_diff(&(a * b - b * a), &c.map(|z| z * i)));
        }
        worst = worst.max(max_diff(&o.jsq, &identity(o.dim()).scale(o.j.casimir())));
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-12 && elapsed < Duration::from_secs(5),
        format!("max defect {worst:.2e} (tol 1e-12), {:.3} s (limit 5 s)", elapsed.as_secs_f64()),
    )
}

fn ramsey_identity(kappa_ts: &[f64]) -> Outcome {
    let phis = uniform_grid(-PI, PI, 50);
    let mut worst = 0.0f64;
    for tw in 1..=7 {
        let o = SpinOperators::new(spin(tw));
        for &kt in kappa_ts {
            for &phi in &phis {
                let pulses = if kt == 0.0 {
                    ramsey_unitary(&o, phi).map_err(|e| e.to_string())?
                } else {
                    ramsey_lv_unitary(&o, phi, kt, 1.0).map_err(|e| e.to_string())?
                };
                worst = worst.max(max_diff(&pulses, &ramsey_closed_form_oracle(&o.jy, phi, kt)));
            }
        }
    }
    check(worst <= 1e-10, format!("max-norm discrepancy {worst:.2e} over 50 phi, j <= 7/2 (tol 1e-10)"))
}

fn wigner_eckart() -> Outcome {
    let j = spin(7);
    let top = t20_diagonal(j, 3.5, 1.0).unwrap();
    let mid = t20_diagonal(j, 0.5, 1.0).unwrap();
    let e1 = (top - 21.0 / 7560f64.sqrt()).abs();
    let e2 = (mid + 15.0 / 7560f64.sqrt()).abs();
    let mut worst_sum = 0.0f64;
    for tw in 2..=16 {
        let j = spin(tw);
        let s: f64 = j.projections().map(|m| t20_diagonal(j, m, 1.0).unwrap()).sum();
        worst_sum = worst_sum.max(s.abs());
    }
    check(
        e1 <= 1e-12 && e2 <= 1e-12 && worst_sum <= 1e-12,
        format!("value errors {e1:.1e}, {e2:.1e}; max |sum_m| {worst_sum:.1e} (tol 1e-12)"),
    )
}

fn lv_phase() -> Outcome {
    let o = SpinOperators::new(spin(7));
    let grid = uniform_grid(0.0, 2.0 * PI, 64);
    let mut worst = 0.0f64;
    for (kappa, t) in [(1e-3, 1.0), (0.01, 2.0), (0.05, 1.0), (0.02, 10.0)] {
        let got = pair_fringe_phase_shift(&o, -3.5, -0.5, kappa, t, &grid).map_err(|e| e.to_string())?;
        let want = 12.0 * kappa * t;
        worst = worst.max((got - want).abs() / want);
    }
    check(worst <= 1e-9, format!("max relative error vs 12*kappa*t {worst:.2e} (tol 1e-9)"))
}

fn spin_half_degeneracy() -> Outcome {
    let o = SpinOperators::new(spin(1));
    let grid = uniform_grid(0.0, 2.0 * PI, 100);
    let init = o.basis_state(0.5).unwrap();
    let basis = MeasurementBasis::jz(2);
    let fringe = |kappa: f64| {
        generate_fringe(&o, &RamseyTemplate { kappa, t: 1.5 }, &grid, &init, &basis, 0, 0).unwrap().probabilities
    };
    let base = fringe(0.0);
    let mut worst = 0.0f64;
    for kappa in [0.1, 1.0, 7.3, -4.0] {
        for (a, b) in fringe(kappa).iter().zip(&base) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("max |P_kappa - P_0| {worst:.2e} (tol 1e-12)"))
}

fn standard_quantum_limit() -> Outcome {
    let start = Instant::now();
    let cfg = SqlScanConfig::default();
    let r = sql_scan(&[1, 4, 16, 64, 256], &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let slope = r.fit.slope;
    let sigmas: Vec<String> = r.points.iter().map(|p| format!("N={}:{:.3e}", p.n, p.sigma_kappa)).collect();
    check(
        (-0.55..=-0.45).contains(&slope) && cfg.trials >= 500 && elapsed < Duration::from_secs(300),
        format!(
            "slope {slope:.4} +/- {:.4} (want -0.50 +/- 0.05), {} trials, seed {}, {:.1} s; {}",
            r.fit.stderr,
            cfg.trials,
            cfg.seed,
            elapsed.as_secs_f64(),
            sigmas.join(" ")
        ),
    )
}

fn locality() -> Outcome {
    let o = SpinOperators::new(spin(1));
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let amps = DVector::from_fn(4, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let state = BipartiteState::normalized((2, 2), amps).unwrap();
        let kappa = rng.random_range(-3.0..3.0);
        let r = locality_check(&state, &o, kappa, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max(r.max_spectrum_shift());
    }
    let h = Complex64::new(0.5, 0.0);
    let product = BipartiteState::new((2, 2), DVector::from_element(4, h)).unwrap();
    let r = locality_check(&product, &o, PI / 4.0, 1.0).map_err(|e| e.to_string())?;
    let gain = r.s_after_nonlocal_control - r.s_before;
    check(
        worst <= 1e-12 && gain > 0.01,
        format!("max spectrum shift {worst:.2e} on 50 states (tol 1e-12); control entropy gain {gain:.4} nats (> 0.01)"),
    )
}

fn perturbation_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for n in 0..=10u32 {
        for (mass, omega, hbar) in [(1.0, 1.0, 1.0), (YB171_MASS, 1e4, HBAR)] {
            let closed = if hbar == HBAR {
                p2_expectation(n, Kilograms(mass), RadPerSec(omega))
            } else {
                oscillator_p2(n, mass, omega, hbar)
            };
            let oracle = p2_fock_oracle(n as usize, mass, omega, hbar);
            worst = worst.max((closed - oracle).abs() / oracle);
        }
    }
    check(worst <= 1e-10, format!("max relative error {worst:.2e} for n <= 10 (tol 1e-10)"))
}

fn constraint_pipeline() -> Outcome {
    let lv = LvParams::new(1e-23, Hertz(YB_FREQ_FACTOR), RadPerSec(0.0)).unwrap();
    let trap = TrapParams::default();
    let de = lv.level_shift().0;
    let a = constrain_a_prime(&lv, &trap).map_err(|e| e.to_string())?.0;
    let back = energy_shift_lli(&trap, Joules(a)).map_err(|e| e.to_string())?.0;
    let rt = (back - de).abs() / de;
    check(
        (1e-40..=5e-40).contains(&de) && (1e-19..=2e-18).contains(&a) && rt <= 1e-12,
        format!("dE {de:.4e} J, a' {a:.4e} J, round-trip error {rt:.1e}"),
    )
}

fn classifier() -> Outcome {
    let trap = TrapParams {
        mass: Kilograms(YB171_MASS),
        omega0: RadPerSec(1e4),
        n: 2,
        mu: JoulesPerTesla(0.429 * NUCLEAR_MAGNETON),
        b_field: Tesla(5e-11),
    };
    let mu_b = trap.mu.0 * trap.b_field.0;

    let diag = ViolationMatrix::diagonal(Joules(1e-20), Joules(-3e-21));
    let class_diag = classify_violation(&diag, DEFAULT_CLASSIFY_TOL).unwrap();
    let mut worst_flip = 0.0f64;
    for p in [0.0, 1e-26, YB171_MASS, 10.0 * YB171_MASS] {
        for t in [1e-3, 1.0, 1e3, 1e5] {
            worst_flip = worst_flip.max(transition_probability(&trap, &diag, SpinHalf::Up, Momentum(p), t).unwrap());
        }
    }

    let mut worst_peak = 0.0f64;
    let (mut lo_peak, mut hi_peak) = (1.0f64, 0.0f64);
    let mut class_quantum = true;
    for (b, p) in [
        (Complex64::new(1e-20, 0.0), YB171_MASS),
        (Complex64::new(3e-21, -2e-21), 2.0 * YB171_MASS),
        (Complex64::new(0.0, 5e-20), 0.5 * YB171_MASS),
    ] {
        let xi = ViolationMatrix {
            a_prime: Joules(2e-21),
            b_prime: b,
            c_prime: Joules(-1e-21),
        };
        class_quantum &= classify_violation(&xi, DEFAULT_CLASSIFY_TOL).unwrap() == ViolationClass::Quantum;
        let (e0, e1, bt) = lli_block_oracle(trap.mass.0, mu_b, p, xi.a_prime.0, b, xi.c_prime.0);
        let (peak, t_peak) = rabi_peak(e0, e1, bt, HBAR);
        lo_peak = lo_peak.min(peak);
        hi_peak = hi_peak.max(peak);
        for initial in [SpinHalf::Up, SpinHalf::Down] {
            let got = transition_probability(&trap, &xi, initial, Momentum(p), t_peak).unwrap();
            worst_peak = worst_peak.max((got - peak).abs());
        }
    }
    check(
        class_diag == ViolationClass::Classical && worst_flip <= 1e-12 && class_quantum && worst_peak <= 1e-9 && lo_peak > 0.01,
        format!(
            "diagonal: {class_diag}, max flip {worst_flip:.1e} (tol 1e-12); off-diagonal quantum={class_quantum}, peaks {lo_peak:.3}..{hi_peak:.3}, error {worst_peak:.1e} (tol 1e-9)"
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_lvsim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
    }
    Ok(o.stdout)
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let cfg_dir = tempfile::tempdir().unwrap();
    let pair_cfg = cfg_dir.path().join("pair.toml");
    std::fs::write(&pair_cfg, "j = \"7/2\"\nprotocol = \"cpmg\"\nkappa = 0.03\nt = 2.0\nshots = 300\nphi_rate = 0.4\n")
        .unwrap();
    let pair_cfg = pair_cfg.to_str().unwrap().to_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["check-identities"],
        vec!["simulate-ramsey", "--shots", "1000", "--kappa", "0.3", "--seed", "11"],
        vec!["simulate-ramsey", "--config", &pair_cfg, "--seed", "12"],
        vec!["sql-scan", "--n", "1,2,4,8", "--trials", "30", "--seed", "13"],
        vec!["constrain-eep", "--delta-m-sq", "12"],
        vec!["locality-demo"],
    ];
    let mut compared = 0;
    for (k, cmd) in commands.iter().enumerate() {
        let mut stdouts = Vec::new();
        for d in &dirs {
            let sub = d.path().join(k.to_string());
            stdouts.push(run_cli(cmd, &sub)?);
        }
        if stdouts[0] != stdouts[1] {
            return Err(format!("stdout differs for {cmd:?}"));
        }
        let sub0 = dirs[0].path().join(k.to_string());
        let mut names: Vec<_> = std::fs::read_dir(&sub0).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let a = std::fs::read(sub0.join(&name)).unwrap();
            let b = std::fs::read(dirs[1].path().join(k.to_string()).join(&name)).unwrap();
            if a != b {
                return Err(format!("{name:?} differs for {cmd:?}"));
            }
            compared += 1;
        }
    }
    check(compared >= 7, format!("{} commands, {compared} artifacts byte-identical across reruns", commands.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("operator algebra", Box::new(operator_algebra)),
        ("beamsplitter identity", Box::new(|| ramsey_identity(&[0.0]))),
        ("LV Ramsey identity", Box::new(|| ramsey_identity(&[0.1, 1.0, 10.0]))),
        ("Wigner-Eckart values", Box::new(wigner_eckart)),
        ("LV phase 12*kappa*t", Box::new(lv_phase)),
        ("spin-1/2 degeneracy", Box::new(spin_half_degeneracy)),
        ("standard quantum limit", Box::new(standard_quantum_limit)),
        ("locality", Box::new(locality)),
        ("perturbation oracle", Box::new(perturbation_oracle)),
        ("constraint pipeline", Box::new(constraint_pipeline)),
        ("classifier", Box::new(classifier)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
