//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figure next to its pinned tolerance.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::process::Command;
use std::time::Instant;

use catlab::fock::{choose_cutoff, coherent_state, fock_state, moment, overlap, State};
use catlab::model::{
    branch_state, default_cutoff, field_cat, joint_state, model_state, propagate_effective,
    propagate_rotating_frame, Level, ModelParams, StateKind, MAX_COUPLING_STEP,
};
use catlab::phase_space::{
    grid_eval, recommended_cutoff, wigner_min, wigner_parity_batch, wigner_series, Convention,
    GridKind, GridSpec,
};
use catlab::witness::{analytic_moment, antibunch_d1, g2_zero, mandel_q, photon_distribution,
    squeezing};

const LAMBDA_GRID: [f64; 4] = [0.35, 1.0, 2.0, 3.5];
const CHIT_GRID: [f64; 5] = [0.2, 1.0, 2.0, PI, 4.0];

fn reduced(lambda: f64, chit: f64) -> ModelParams {
    ModelParams::from_reduced(Complex64::from(lambda), chit, PI / 4.0, 0.0).unwrap()
}

/// Cat conditioning at μ=0, falling back to the constructive μ=π outcome at
/// parameter points where the μ=0 branch interferes destructively (χt = π).
fn cat_kind(params: &ModelParams, n_c: usize) -> (StateKind, State) {
    match model_state(params, StateKind::Cat { mu: 0.0 }, n_c) {
        Ok(state) => (StateKind::Cat { mu: 0.0 }, state),
        Err(_) => {
            let kind = StateKind::Cat { mu: PI };
            let state = model_state(params, kind, n_c).unwrap();
            (kind, state)
        }
    }
}

#[test]
fn criterion_01_analytic_numeric_moment_equivalence() {
    let started = Instant::now();
    let tolerance = 1e-8;
    let mut worst = 0.0f64;
    for lambda in LAMBDA_GRID {
        for chit in CHIT_GRID {
            let params = reduced(lambda, chit);
            let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-16);
            let mixed = model_state(&params, StateKind::Mixed, n_c).unwrap();
            let (kind_cat, cat) = cat_kind(&params, n_c);
            for (kind, state) in [(StateKind::Mixed, &mixed), (kind_cat, &cat)] {
                for p in 0..=4u32 {
                    for q in 0..=4u32 {
                        let analytic = analytic_moment(&params, p, q, kind).unwrap();
                        let numeric = moment(state, p, q).unwrap();
                        worst = worst.max((analytic - numeric).norm());
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(worst <= tolerance, "max moment deviation {worst:.3e}");
    assert!(elapsed <= 10.0, "runtime {elapsed:.2}s exceeds 10s");
    println!(
        "ACCEPTANCE 1 PASS — analytic/numeric moments: max |delta| {worst:.3e} \
         (tol {tolerance:.1e}), {elapsed:.2}s"
    );
}

#[test]
fn criterion_02_propagator_oracle() {
    let tolerance = 1e-8;
    let mut worst = 0.0f64;
    for lambda in LAMBDA_GRID {
        for chit in CHIT_GRID {
            let params = reduced(lambda, chit);
            let n_c = default_cutoff(&params, 1e-12);
            for level in [Level::E, Level::F] {
                let analytic = branch_state(&params, level, n_c).unwrap();
                let numeric = propagate_effective(&params, level, n_c).unwrap();
                let deviation = (overlap(&analytic, &numeric).unwrap() - Complex64::ONE).norm();
                worst = worst.max(deviation);
            }
        }
    }
    assert!(worst <= tolerance, "max overlap deviation {worst:.3e}");
    println!(
        "ACCEPTANCE 2 PASS — propagator complex overlap: max |1 - <branch|prop>| \
         {worst:.3e} (tol {tolerance:.1e})"
    );
}

#[test]
fn criterion_03_dispersive_limit_validation() {
    let ratios = [0.1, 0.05, 0.02];
    // regression floors frozen from the first oracle run (minimum step count)
    let frozen = [0.982396057970, 0.996370677139, 0.999322149551];
    let mut fidelities = Vec::new();
    for ratio in ratios {
        let g = 1.0;
        let delta = g / ratio;
        let chi = g * g / delta;
        let params = ModelParams::new(g, delta, Complex64::ONE, 1.0 / chi, PI / 4.0, 0.0).unwrap();
        let n_c = choose_cutoff(4.0, 1e-12);
        let steps = ((g * params.t) / MAX_COUPLING_STEP).ceil() as usize;
        let numeric = propagate_rotating_frame(&params, n_c, steps).unwrap();
        let analytic = joint_state(&params, n_c).unwrap();
        fidelities.push(numeric.fidelity(&analytic).unwrap());
    }
    assert!(
        fidelities[1] >= 0.99,
        "fidelity at g/delta = 0.05 is {}",
        fidelities[1]
    );
    assert!(
        fidelities[0] < fidelities[1] && fidelities[1] < fidelities[2],
        "fidelity not monotone in the dispersive parameter: {fidelities:?}"
    );
    for (f, frozen_f) in fidelities.iter().zip(frozen) {
        assert!(
            (f - frozen_f).abs() < 1e-6,
            "fidelity regression: {f} vs frozen {frozen_f}"
        );
    }
    println!(
        "ACCEPTANCE 3 PASS — dispersive limit: fidelities {:.6} < {:.6} < {:.6} \
         (floor 0.99 at ratio 0.05)",
        fidelities[0], fidelities[1], fidelities[2]
    );
}

#[test]
fn criterion_04_wigner_differential_test() {
    let started = Instant::now();
    let tolerance = 1e-8;
    let axis: Vec<f64> = (0..21).map(|i| -3.0 + 0.3 * i as f64).collect();
    let betas: Vec<Complex64> = axis
        .iter()
        .flat_map(|im| axis.iter().map(move |re| Complex64::new(*re, *im)))
        .collect();
    assert_eq!(betas.len(), 441);

    let params = reduced(1.0, 1.0);
    let reach = 3.0 * SQRT_2;
    let n_small = recommended_cutoff(2.0, reach, 1e-13);
    let n_coherent = recommended_cutoff(4.0, reach, 1e-13);
    let n_model = recommended_cutoff(params.branch_mean_photon(), reach, 1e-13);
    let states: Vec<(&str, State)> = vec![
        ("vacuum", fock_state(0, n_small).unwrap().into()),
        ("fock1", fock_state(1, n_small).unwrap().into()),
        ("fock2", fock_state(2, n_small).unwrap().into()),
        (
            "coherent2",
            coherent_state(Complex64::from(2.0), n_coherent).unwrap().into(),
        ),
        ("mixed", model_state(&params, StateKind::Mixed, n_model).unwrap()),
        (
            "cat",
            model_state(&params, StateKind::Cat { mu: 0.0 }, n_model).unwrap(),
        ),
    ];

    let mut worst = 0.0f64;
    let mut worst_state = "";
    for (name, state) in &states {
        let oracle = wigner_parity_batch(state, &betas);
        for (beta, oracle_value) in betas.iter().zip(oracle) {
            let series = wigner_series(state, *beta, state.cutoff() - 1).unwrap();
            let delta = (series.value - oracle_value).abs();
            if delta > worst {
                worst = delta;
                worst_state = name;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(worst <= tolerance, "series vs parity {worst:.3e} ({worst_state})");
    assert!(elapsed <= 60.0, "runtime {elapsed:.2}s exceeds 60s");
    println!(
        "ACCEPTANCE 4 PASS — wigner series vs parity oracle at 441 points x 6 states: \
         max |delta| {worst:.3e} (tol {tolerance:.1e}), {elapsed:.2}s"
    );
}

#[test]
fn criterion_05_known_closed_forms() {
    let n_c = 32;
    let vacuum: State = fock_state(0, n_c).unwrap().into();
    let one: State = fock_state(1, n_c).unwrap().into();
    let two: State = fock_state(2, n_c).unwrap().into();
    let coh: State = coherent_state(Complex64::from(1.5), choose_cutoff(2.25, 1e-14))
        .unwrap()
        .into();

    let w_vac = wigner_series(&vacuum, Complex64::ZERO, n_c - 1).unwrap().value;
    assert!((w_vac - FRAC_2_PI).abs() <= 1e-9);
    let w_one = wigner_series(&one, Complex64::ZERO, n_c - 1).unwrap().value;
    assert!((w_one + FRAC_2_PI).abs() <= 1e-9);

    let q = mandel_q(&coh).unwrap();
    assert!(q.abs() <= 1e-10, "coherent mandel_q {q:.3e}");
    let g2 = g2_zero(&coh).unwrap();
    assert!((g2 - 1.0).abs() <= 1e-10, "coherent g2 {g2}");
    let (s_x, s_p) = squeezing(&coh);
    assert!(s_x.abs() <= 1e-10 && s_p.abs() <= 1e-10, "coherent S ({s_x}, {s_p})");

    let g2_fock2 = g2_zero(&two).unwrap();
    assert!((g2_fock2 - 0.5).abs() <= 1e-12, "fock2 g2 {g2_fock2}");

    println!(
        "ACCEPTANCE 5 PASS — closed forms: W_vac(0)={w_vac:.12}, W_1(0)={w_one:.12}, \
         coherent (Q,g2,Sx,Sp)=({q:.2e},{g2:.12},{s_x:.2e},{s_p:.2e}), fock2 g2={g2_fock2}"
    );
}

#[test]
fn criterion_06_mixed_state_structure_theorems() {
    let mut worst_pl = 0.0f64;
    let mut worst_q = 0.0f64;
    for lambda in LAMBDA_GRID {
        for chit in CHIT_GRID {
            let params = reduced(lambda, chit);
            let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-15);
            let state = model_state(&params, StateKind::Mixed, n_c).unwrap();
            let pn = photon_distribution(&state, n_c - 1).unwrap();
            let mean = params.branch_mean_photon();
            let mut expected = (-mean).exp();
            for (l, got) in pn.iter().enumerate() {
                if l > 0 {
                    expected *= mean / l as f64;
                }
                worst_pl = worst_pl.max((got - expected).abs());
            }
            if let Some(q) = mandel_q(&state) {
                worst_q = worst_q.max(q.abs());
            }
        }
    }
    assert!(worst_pl <= 1e-10, "Poisson identity deviation {worst_pl:.3e}");
    assert!(worst_q <= 1e-9, "mixed mandel_q {worst_q:.3e}");

    let params = reduced(1.0, 1.0);
    let n_c = recommended_cutoff(params.branch_mean_photon(), 3.0 * SQRT_2, 1e-13);
    let state = model_state(&params, StateKind::Mixed, n_c).unwrap();
    let grid = grid_eval(
        &state,
        &GridSpec::square(3.0, 21),
        GridKind::Wigner,
        Convention::Normalized,
        1,
    )
    .unwrap();
    let min_w = grid.grid.min_value();
    assert!(min_w >= -1e-10, "mixed Wigner minimum {min_w:.3e}");

    println!(
        "ACCEPTANCE 6 PASS — mixed-state structure: P(l) Poisson within {worst_pl:.3e}, \
         Q_M within {worst_q:.3e}, Wigner min {min_w:.3e} >= -1e-10"
    );
    println!(
        "  note: the faithful partial trace yields a two-branch Poissonian mixture — \
         classical statistics (Q_M = 0, nonnegative Wigner); interference terms exist \
         only in the measurement-conditioned cat state"
    );
}

#[test]
fn criterion_07_cat_state_nonclassicality() {
    // Wigner negativity on the figure grid at lambda=1, chit=1
    let params = reduced(1.0, 1.0);
    let n_c = recommended_cutoff(params.branch_mean_photon(), 4.5 * SQRT_2, 1e-13);
    let cat = model_state(&params, StateKind::Cat { mu: 0.0 }, n_c).unwrap();
    let (beta_min, w_min) = wigner_min(&cat, &GridSpec::square(4.0, 81)).unwrap();
    assert!(w_min < -0.01, "cat Wigner minimum {w_min}");
    // frozen regression from the first oracle run
    assert!(
        (w_min - (-0.423954586802863)).abs() < 1e-8,
        "regression: {w_min}"
    );
    assert!(
        (beta_min - Complex64::new(-0.175, 0.0)).norm() < 1e-9,
        "regression location: {beta_min}"
    );

    // second frozen regression point at lambda=2, chit=1
    let params2 = reduced(2.0, 1.0);
    let n_c2 = recommended_cutoff(params2.branch_mean_photon(), 4.5 * SQRT_2, 1e-13);
    let cat2 = model_state(&params2, StateKind::Cat { mu: 0.0 }, n_c2).unwrap();
    let (_, w_min2) = wigner_min(&cat2, &GridSpec::square(4.0, 81)).unwrap();
    assert!(
        (w_min2 - (-0.579497596699227)).abs() < 1e-8,
        "regression: {w_min2}"
    );

    // S_x < 0 somewhere on the squeezing figure sweeps (lambda at chit=1,
    // chit at lambda=1)
    let mut min_sx = f64::INFINITY;
    for i in 0..=200 {
        let lambda = 4.0 * i as f64 / 200.0;
        let p = reduced(lambda, 1.0);
        if let Ok(state) = model_state(&p, StateKind::Cat { mu: 0.0 }, choose_cutoff(4.0 * lambda * lambda, 1e-13)) {
            min_sx = min_sx.min(squeezing(&state).0);
        }
    }
    for i in 0..=250 {
        let chit = 12.5 * i as f64 / 250.0;
        let p = reduced(1.0, chit);
        if let Ok(state) = model_state(&p, StateKind::Cat { mu: 0.0 }, choose_cutoff(4.0, 1e-13)) {
            min_sx = min_sx.min(squeezing(&state).0);
        }
    }
    assert!(min_sx < 0.0, "cat S_x never negative: min {min_sx}");

    // g2 < 1 and d1 < 0 somewhere on the correlation figure sweeps
    // (lambda at chit=1, chit at lambda=2)
    let mut min_g2 = f64::INFINITY;
    let mut min_d1 = f64::INFINITY;
    for i in 0..=200 {
        let lambda = 4.0 * i as f64 / 200.0;
        let p = reduced(lambda, 1.0);
        if let Ok(state) = model_state(&p, StateKind::Cat { mu: 0.0 }, choose_cutoff(4.0 * lambda * lambda, 1e-13)) {
            if let Some(g2) = g2_zero(&state) {
                min_g2 = min_g2.min(g2);
            }
            min_d1 = min_d1.min(antibunch_d1(&state));
        }
    }
    for i in 0..=250 {
        let chit = 12.5 * i as f64 / 250.0;
        let p = reduced(2.0, chit);
        if let Ok(state) = model_state(&p, StateKind::Cat { mu: 0.0 }, choose_cutoff(16.0, 1e-13)) {
            if let Some(g2) = g2_zero(&state) {
                min_g2 = min_g2.min(g2);
            }
            min_d1 = min_d1.min(antibunch_d1(&state));
        }
    }
    assert!(min_g2 < 1.0, "cat g2 never below 1: min {min_g2}");
    assert!(min_d1 < 0.0, "cat d1 never negative: min {min_d1}");

    // recorded (not asserted): the cat-state Q_M sign pattern over the
    // 1.8 < lambda < 3.5 window at chit = 0.2
    let mut pattern = String::new();
    let mut negatives = 0usize;
    for i in 0..=34 {
        let lambda = 1.8 + 1.7 * i as f64 / 34.0;
        let p = reduced(lambda, 0.2);
        let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-13);
        if let Ok(state) = model_state(&p, StateKind::Cat { mu: 0.0 }, n_c) {
            if let Some(q) = mandel_q(&state) {
                let negative = q < 0.0;
                negatives += negative as usize;
                pattern.push(if negative { '-' } else { '+' });
            }
        }
    }

    println!(
        "ACCEPTANCE 7 PASS — cat nonclassicality: min W {w_min:.9} at {beta_min} \
         (< -0.01), min S_x {min_sx:.6}, min g2 {min_g2:.6}, min d1 {min_d1:.6}"
    );
    println!(
        "  recorded: cat Q_M sign pattern over lambda in [1.8, 3.5] at chit=0.2: \
         {pattern} ({negatives}/35 negative)"
    );
}

#[test]
fn criterion_08_husimi_properties() {
    // nonnegativity across the acceptance states
    let params = reduced(1.0, 1.0);
    let n_model = default_cutoff(&params, 1e-13);
    let states: Vec<(&str, State, f64)> = vec![
        ("vacuum", fock_state(0, 24).unwrap().into(), 0.0),
        ("fock1", fock_state(1, 24).unwrap().into(), 0.0),
        ("fock2", fock_state(2, 24).unwrap().into(), 0.0),
        (
            "coherent2",
            coherent_state(Complex64::from(2.0), choose_cutoff(4.0, 1e-13))
                .unwrap()
                .into(),
            2.0,
        ),
        (
            "mixed",
            model_state(&params, StateKind::Mixed, n_model).unwrap(),
            params.branch_mean_photon().sqrt(),
        ),
        (
            "cat",
            model_state(&params, StateKind::Cat { mu: 0.0 }, n_model).unwrap(),
            params.branch_mean_photon().sqrt(),
        ),
    ];
    let mut worst_min = f64::INFINITY;
    let mut worst_integral_err = 0.0f64;
    for (name, state, alpha_max) in &states {
        let radius = alpha_max + 4.0;
        let n = (2.0 * radius / 0.1).ceil() as usize + 1;
        let grid = grid_eval(
            state,
            &GridSpec::square(radius, n),
            GridKind::Husimi,
            Convention::Normalized,
            1,
        )
        .unwrap();
        let min_q = grid.grid.min_value();
        assert!(min_q >= -1e-12, "{name}: Husimi min {min_q:.3e}");
        worst_min = worst_min.min(min_q);
        let integral = grid.grid.riemann_sum();
        assert!(
            (integral - 1.0).abs() <= 1e-3,
            "{name}: Husimi integral {integral}"
        );
        worst_integral_err = worst_integral_err.max((integral - 1.0).abs());
    }

    // near-zero report for the Husimi figure presets (Q_f vs lambda / alpha /
    // chit at the caption parameters, paper convention)
    let mut near_zeros = Vec::new();
    for i in 0..=200 {
        let lambda = 4.0 * i as f64 / 200.0;
        let p = reduced(lambda, 1.0);
        let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-13);
        if let Ok(state) = model_state(&p, StateKind::Cat { mu: 0.0 }, n_c) {
            let q = catlab::phase_space::husimi(&state, Complex64::ONE, Convention::Paper);
            near_zeros.push((lambda, q));
        }
    }
    let (at, min_q) = near_zeros
        .iter()
        .fold((0.0, f64::INFINITY), |acc, (x, q)| {
            if *q < acc.1 {
                (*x, *q)
            } else {
                acc
            }
        });
    println!(
        "ACCEPTANCE 8 PASS — Husimi: min over grids {worst_min:.3e} >= -1e-12, worst \
         |integral - 1| {worst_integral_err:.3e} <= 1e-3; near-zero Q_f(alpha=1) = \
         {min_q:.3e} at lambda = {at:.3} on the figure sweep"
    );
}

fn run_binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_catlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    for preset in ["fig3a", "fig5b", "fig6a"] {
        let command = match preset {
            "fig3a" => "witness",
            "fig5b" | "fig6a" => "phase-space",
            _ => unreachable!(),
        };
        let out1 = path(&format!("{preset}_run1.csv"));
        let out2 = path(&format!("{preset}_run2.csv"));
        let out4 = path(&format!("{preset}_par.csv"));
        for (out, threads) in [(&out1, "1"), (&out2, "1"), (&out4, "4")] {
            let output = run_binary(&[
                command, "--preset", preset, "--threads", threads, "--out", out,
            ]);
            assert!(output.status.success(), "{preset}: {output:?}");
        }
        let b1 = std::fs::read(&out1).unwrap();
        let b2 = std::fs::read(&out2).unwrap();
        let b4 = std::fs::read(&out4).unwrap();
        assert_eq!(b1, b2, "{preset}: two runs differ");
        assert_eq!(b1, b4, "{preset}: serial vs parallel differ");
    }
    println!(
        "ACCEPTANCE 9 PASS — determinism: repeated runs and serial-vs-parallel \
         outputs are byte-identical for fig3a, fig5b, fig6a"
    );
}

#[test]
fn criterion_10_validate_end_to_end() {
    let started = Instant::now();
    let quick = run_binary(&["validate", "--level", "quick"]);
    let quick_elapsed = started.elapsed().as_secs_f64();
    assert!(quick.status.success(), "quick validate failed: {quick:?}");
    assert!(quick_elapsed <= 60.0, "quick took {quick_elapsed:.1}s");

    let started_full = Instant::now();
    let full = run_binary(&["validate", "--level", "full"]);
    let full_elapsed = started_full.elapsed().as_secs_f64();
    assert!(full.status.success(), "full validate failed: {full:?}");
    assert!(full_elapsed <= 600.0, "full took {full_elapsed:.1}s");

    let stdout = String::from_utf8_lossy(&quick.stdout);
    assert!(stdout.contains("result: PASS (6/6 checks"));
    println!(
        "ACCEPTANCE 10 PASS — validate quick {quick_elapsed:.2}s (<= 60s), \
         full {full_elapsed:.2}s (<= 600s), exit 0"
    );
}

#[test]
fn cat_witness_report_regression() {
    // frozen golden values for field_cat(lambda=2, chit=1, theta=pi/4, mu=0)
    let params = reduced(2.0, 1.0);
    let n_c = choose_cutoff(16.0, 1e-15);
    let state = model_state(&params, StateKind::Cat { mu: 0.0 }, n_c).unwrap();
    let report = catlab::witness::witness_report(&state, 8).unwrap();
    let joint = joint_state(&params, n_c).unwrap();
    let conditional = field_cat(&joint, 0.0).unwrap();

    let cases = [
        ("mean_n", report.mean_n, 3.668357148506054),
        ("mandel_q", report.mandel_q.unwrap(), 0.031423747506997),
        ("s_x", report.s_x, 0.002815875502331),
        ("s_p", report.s_p, 11.332126014520782),
        ("g2", report.g2.unwrap(), 1.008566163608086),
        ("d1", report.d1, 0.115273528800140),
        ("probability", conditional.probability, 0.499869780739295),
        ("pn0", report.pn[0], 0.02837381076348873),
        ("pn2", report.pn[2], 0.007995749156180848),
        ("pn4", report.pn[4], 0.3221787491539372),
    ];
    for (name, got, frozen) in cases {
        assert!(
            (got - frozen).abs() < 1e-9,
            "{name}: {got:.15} vs frozen {frozen:.15}"
        );
    }
}
