//! The validate command: every differential oracle in one pass/fail report.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::cli::config::ValidateLevel;
use crate::error::{Error, Result};
use crate::fock::{choose_cutoff, coherent_state, fock_state, moment, overlap, State};
use crate::model::{
    branch_state, default_cutoff, model_state, propagate_effective, Level, ModelParams,
    StateKind,
};
use crate::phase_space::{recommended_cutoff, wigner_parity_batch, wigner_series};
use crate::witness::{analytic_moment, mandel_q, photon_distribution, squeezing};

struct Check {
    name: &'static str,
    passed: bool,
    measured: f64,
    tolerance: f64,
    detail: String,
}

fn grid(level: ValidateLevel) -> (Vec<f64>, Vec<f64>) {
    match level {
        ValidateLevel::Quick => (vec![0.35, 1.0, 2.0], vec![0.5, 1.0, 2.0]),
        ValidateLevel::Full => (
            vec![0.35, 1.0, 2.0, 3.5],
            vec![0.2, 0.5, 1.0, 2.0, PI, 4.0, 2.0 * PI],
        ),
    }
}

fn reduced(lambda: f64, chit: f64) -> Result<ModelParams> {
    ModelParams::from_reduced(Complex64::from(lambda), chit, PI / 4.0, 0.0)
}

/// The cat state at μ=0 interferes destructively at χt = π; fall back to the
/// constructive quadrature there.
fn cat_kind_for(params: &ModelParams, n_c: usize) -> Result<(StateKind, State)> {
    match model_state(params, StateKind::Cat { mu: 0.0 }, n_c) {
        Ok(state) => Ok((StateKind::Cat { mu: 0.0 }, state)),
        Err(Error::DegenerateOutcome { .. }) => {
            let kind = StateKind::Cat { mu: PI };
            let state = model_state(params, kind, n_c)?;
            Ok((kind, state))
        }
        Err(e) => Err(e),
    }
}

fn check_moments(lambdas: &[f64], chits: &[f64]) -> Result<Check> {
    let tolerance = 1e-8;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &lambda in lambdas {
        for &chit in chits {
            let params = reduced(lambda, chit)?;
            let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-16);
            let mixed = model_state(&params, StateKind::Mixed, n_c)?;
            let (cat_kind, cat) = cat_kind_for(&params, n_c)?;
            for (kind, state) in [(StateKind::Mixed, &mixed), (cat_kind, &cat)] {
                for p in 0..=4u32 {
                    for q in 0..=4u32 {
                        let analytic = analytic_moment(&params, p, q, kind)?;
                        let numeric = moment(state, p, q)?;
                        let delta = (analytic - numeric).norm();
                        if delta > worst {
                            worst = delta;
                            detail = format!(
                                "worst at lambda={lambda} chit={chit} kind={kind:?} p={p} q={q}"
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(Check {
        name: "analytic-vs-numeric moments",
        passed: worst <= tolerance,
        measured: worst,
        tolerance,
        detail,
    })
}

fn check_propagator(lambdas: &[f64], chits: &[f64]) -> Result<Check> {
    let tolerance = 1e-8;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &lambda in lambdas {
        for &chit in chits {
            let params = reduced(lambda, chit)?;
            let n_c = default_cutoff(&params, 1e-12);
            for level in [Level::E, Level::F] {
                let analytic = branch_state(&params, level, n_c)?;
                let numeric = propagate_effective(&params, level, n_c)?;
                let deviation = (overlap(&analytic, &numeric)? - Complex64::ONE).norm();
                if deviation > worst {
                    worst = deviation;
                    detail = format!("worst at lambda={lambda} chit={chit} level={level:?}");
                }
            }
        }
    }
    Ok(Check {
        name: "effective-propagator overlap",
        passed: worst <= tolerance,
        measured: worst,
        tolerance,
        detail,
    })
}

fn check_wigner(level: ValidateLevel) -> Result<Check> {
    let tolerance = 1e-8;
    let points_per_axis = match level {
        ValidateLevel::Quick => 5,
        ValidateLevel::Full => 21,
    };
    let axis: Vec<f64> = (0..points_per_axis)
        .map(|i| -3.0 + 6.0 * i as f64 / (points_per_axis - 1) as f64)
        .collect();
    let betas: Vec<Complex64> = axis
        .iter()
        .flat_map(|im| axis.iter().map(move |re| Complex64::new(*re, *im)))
        .collect();

    let params = reduced(1.0, 1.0)?;
    let n_small = recommended_cutoff(2.0, 3.0 * std::f64::consts::SQRT_2, 1e-13);
    let n_coherent = recommended_cutoff(4.0, 3.0 * std::f64::consts::SQRT_2, 1e-13);
    let n_model = recommended_cutoff(
        params.branch_mean_photon(),
        3.0 * std::f64::consts::SQRT_2,
        1e-13,
    );
    let states: Vec<(&str, State)> = vec![
        ("vacuum", fock_state(0, n_small)?.into()),
        ("fock1", fock_state(1, n_small)?.into()),
        ("fock2", fock_state(2, n_small)?.into()),
        ("coherent2", coherent_state(Complex64::from(2.0), n_coherent)?.into()),
        ("mixed", model_state(&params, StateKind::Mixed, n_model)?),
        ("cat", model_state(&params, StateKind::Cat { mu: 0.0 }, n_model)?),
    ];

    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (name, state) in &states {
        let oracle = wigner_parity_batch(state, &betas);
        for (beta, oracle_value) in betas.iter().zip(oracle) {
            let series = wigner_series(state, *beta, state.cutoff() - 1)?;
            let delta = (series.value - oracle_value).abs();
            if delta > worst {
                worst = delta;
                detail = format!("worst for {name} at beta={beta}");
            }
        }
    }
    Ok(Check {
        name: "wigner series vs parity oracle",
        passed: worst <= tolerance,
        measured: worst,
        tolerance,
        detail,
    })
}

fn check_poisson(lambdas: &[f64], chits: &[f64]) -> Result<Check> {
    let tolerance = 1e-10;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &lambda in lambdas {
        for &chit in chits {
            let params = reduced(lambda, chit)?;
            let n_c = default_cutoff(&params, 1e-13);
            let state = model_state(&params, StateKind::Mixed, n_c)?;
            let pn = photon_distribution(&state, n_c - 1)?;
            let mean = params.branch_mean_photon();
            let mut expected = (-mean).exp();
            for (l, got) in pn.iter().enumerate() {
                if l > 0 {
                    expected *= mean / l as f64;
                }
                let delta = (got - expected).abs();
                if delta > worst {
                    worst = delta;
                    detail = format!("worst at lambda={lambda} chit={chit} l={l}");
                }
            }
        }
    }
    Ok(Check {
        name: "mixed-state P(l) Poisson identity",
        passed: worst <= tolerance,
        measured: worst,
        tolerance,
        detail,
    })
}

fn check_mixed_mandel(lambdas: &[f64], chits: &[f64]) -> Result<Check> {
    let tolerance = 1e-9;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for &lambda in lambdas {
        for &chit in chits {
            let params = reduced(lambda, chit)?;
            let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-15);
            let state = model_state(&params, StateKind::Mixed, n_c)?;
            if let Some(q) = mandel_q(&state) {
                if q.abs() > worst {
                    worst = q.abs();
                    detail = format!("worst at lambda={lambda} chit={chit}");
                }
            }
        }
    }
    Ok(Check {
        name: "mixed-state mandel_q vanishes",
        passed: worst <= tolerance,
        measured: worst,
        tolerance,
        detail,
    })
}

fn check_heisenberg(lambdas: &[f64], chits: &[f64]) -> Result<Check> {
    let tolerance = 1e-9;
    let mut worst_violation = 0.0f64;
    let mut detail = String::new();
    for &lambda in lambdas {
        for &chit in chits {
            let params = reduced(lambda, chit)?;
            let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-14);
            let mixed = model_state(&params, StateKind::Mixed, n_c)?;
            let (_, cat) = cat_kind_for(&params, n_c)?;
            for (name, state) in [("mixed", &mixed), ("cat", &cat)] {
                let (s_x, s_p) = squeezing(state);
                let violation = 1.0 - (s_x + 1.0) * (s_p + 1.0);
                if violation > worst_violation {
                    worst_violation = violation;
                    detail = format!("worst for {name} at lambda={lambda} chit={chit}");
                }
            }
        }
    }
    Ok(Check {
        name: "heisenberg uncertainty product",
        passed: worst_violation <= tolerance,
        measured: worst_violation,
        tolerance,
        detail,
    })
}

/// Run every differential check; returns the printable report and whether
/// all checks passed.
pub fn cmd_validate(level: ValidateLevel) -> Result<(String, bool)> {
    let (lambdas, chits) = grid(level);
    let started = std::time::Instant::now();
    let checks = vec![
        check_moments(&lambdas, &chits)?,
        check_propagator(&lambdas, &chits)?,
        check_wigner(level)?,
        check_poisson(&lambdas, &chits)?,
        check_mixed_mandel(&lambdas, &chits)?,
        check_heisenberg(&lambdas, &chits)?,
    ];
    let level_name = match level {
        ValidateLevel::Quick => "quick",
        ValidateLevel::Full => "full",
    };
    let mut report = format!("catlab validate (level {level_name})\n");
    let mut all_passed = true;
    for check in &checks {
        all_passed &= check.passed;
        report.push_str(&format!(
            "{} {:<34} measured {:.3e}  tol {:.1e}  {}\n",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.measured,
            check.tolerance,
            check.detail,
        ));
    }
    let passed_count = checks.iter().filter(|c| c.passed).count();
    report.push_str(&format!(
        "result: {} ({passed_count}/{} checks, {:.2}s)\n",
        if all_passed { "PASS" } else { "FAIL" },
        checks.len(),
        started.elapsed().as_secs_f64(),
    ));
    Ok((report, all_passed))
}
