//! Scalar nonclassicality witnesses.
//!
//! Photon number distribution P(l), Mandel Q_M, the quadrature squeezing
//! pair (S_x, S_p), the zero-delay correlation g²(0), and the lower-order
//! antibunching d₁ = ⟨a†²a²⟩ − ⟨a†a⟩², all driven by [`fock::moment`].
//! Witnesses that divide by the photon mean return an explicit undefined
//! flag below [`VACUUM_MEAN_THRESHOLD`] instead of a number.
//!
//! [`analytic_moment`] provides the independent closed-form route for the
//! model's states, assembled from coherent-state algebra; it must agree with
//! the Fock-space computation on the constructed states, which is the
//! library's central differential test.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{moment, State, MAX_MOMENT_ORDER};
use crate::model::{field_amplitudes, ModelParams, StateKind};

/// Below this photon mean the normalized witnesses (Q_M, g²) are undefined.
pub const VACUUM_MEAN_THRESHOLD: f64 = 1e-12;

/// Bundle of scalar witnesses plus the photon distribution for one state.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub mean_n: f64,
    pub mandel_q: Option<f64>,
    pub s_x: f64,
    pub s_p: f64,
    pub g2: Option<f64>,
    pub d1: f64,
    pub pn: Vec<f64>,
}

/// P(l) = ⟨l|ρ|l⟩ for l = 0..=l_max.
pub fn photon_distribution(state: &State, l_max: usize) -> Result<Vec<f64>> {
    if l_max >= state.cutoff() {
        return Err(Error::IndexOutOfRange {
            index: l_max,
            cutoff: state.cutoff(),
        });
    }
    Ok(match state {
        State::Pure(v) => (0..=l_max).map(|l| v.amplitude(l).norm_sqr()).collect(),
        State::Mixed(r) => (0..=l_max).map(|l| r.entry(l, l).re).collect(),
    })
}

fn mean_photon_moment(state: &State) -> f64 {
    moment(state, 1, 1).expect("order 2 is always supported").re
}

/// Q_M = ⟨a†²a²⟩/⟨a†a⟩ − ⟨a†a⟩; `None` for (numerical) vacuum.
pub fn mandel_q(state: &State) -> Option<f64> {
    let n_mean = mean_photon_moment(state);
    if n_mean < VACUUM_MEAN_THRESHOLD {
        return None;
    }
    let m22 = moment(state, 2, 2).expect("order 4 is always supported").re;
    Some(m22 / n_mean - n_mean)
}

/// Squeezing parameters
/// S_x = 2⟨a†a⟩ + ⟨a²⟩ + ⟨a†²⟩ − ⟨a⟩² − ⟨a†⟩² − 2⟨a⟩⟨a†⟩ and the S_p
/// counterpart with the signs of ⟨a²⟩-type terms flipped. Negative values
/// signal squeezing of the corresponding quadrature.
pub fn squeezing(state: &State) -> (f64, f64) {
    let n_mean = mean_photon_moment(state);
    let a = moment(state, 0, 1).expect("order 1 is always supported");
    let a2 = moment(state, 0, 2).expect("order 2 is always supported");
    let s_x = 2.0 * n_mean + 2.0 * a2.re - 2.0 * (a * a).re - 2.0 * a.norm_sqr();
    let s_p = 2.0 * n_mean - 2.0 * a2.re + 2.0 * (a * a).re - 2.0 * a.norm_sqr();
    (s_x, s_p)
}

/// g²(0) = ⟨a†²a²⟩ / ⟨a†a⟩²; `None` for (numerical) vacuum.
pub fn g2_zero(state: &State) -> Option<f64> {
    let n_mean = mean_photon_moment(state);
    if n_mean < VACUUM_MEAN_THRESHOLD {
        return None;
    }
    let m22 = moment(state, 2, 2).expect("order 4 is always supported").re;
    Some(m22 / (n_mean * n_mean))
}

/// d₁ = ⟨a†²a²⟩ − ⟨a†a⟩²; defined for every state (0 on vacuum), negative
/// iff sub-Poissonian.
pub fn antibunch_d1(state: &State) -> f64 {
    let n_mean = mean_photon_moment(state);
    let m22 = moment(state, 2, 2).expect("order 4 is always supported").re;
    m22 - n_mean * n_mean
}

/// ⟨α|α'⟩ = exp(−|α|²/2 − |α'|²/2 + ᾱα').
pub(crate) fn coherent_overlap(alpha: Complex64, alpha_prime: Complex64) -> Complex64 {
    (-Complex64::from(0.5 * alpha.norm_sqr()) - 0.5 * alpha_prime.norm_sqr()
        + alpha.conj() * alpha_prime)
        .exp()
}

/// Closed-form ⟨a†ᵖaᑫ⟩ for the model's field states, built from the branch
/// amplitudes, the tracked global phases, and coherent-state algebra:
/// ⟨α|a†ᵖaᑫ|α'⟩ = ᾱᵖ α'ᑫ ⟨α|α'⟩. The mixed state keeps only the two branch
/// diagonal terms; the cat state adds the two overlap-weighted cross terms
/// and divides by the detection probability.
pub fn analytic_moment(
    params: &ModelParams,
    p: u32,
    q: u32,
    kind: StateKind,
) -> Result<Complex64> {
    if p + q > MAX_MOMENT_ORDER {
        return Err(Error::UnsupportedOrder {
            p,
            q,
            max: MAX_MOMENT_ORDER,
        });
    }
    let amps = field_amplitudes(params);
    let w_e = Complex64::from(params.theta.sin());
    let w_f = Complex64::from_polar(params.theta.cos(), params.phi);
    let pow = |z: Complex64, k: u32| z.powu(k);
    match kind {
        StateKind::Mixed => Ok(w_e.norm_sqr() * pow(amps.alpha_e.conj(), p) * pow(amps.alpha_e, q)
            + w_f.norm_sqr() * pow(amps.alpha_f.conj(), p) * pow(amps.alpha_f, q)),
        StateKind::Cat { mu } => {
            let c_e = w_e * Complex64::from_polar(1.0, amps.phase_e);
            let c_f = w_f * Complex64::from_polar(1.0, amps.phase_f - mu);
            let ov_ef = coherent_overlap(amps.alpha_e, amps.alpha_f);
            let prob = 0.5
                * (c_e.norm_sqr()
                    + c_f.norm_sqr()
                    + 2.0 * (c_e.conj() * c_f * ov_ef).re);
            if prob < 1e-12 {
                return Err(Error::DegenerateOutcome {
                    lambda: params.lambda,
                    chit: params.chit,
                    theta: params.theta,
                    phi: params.phi,
                    mu,
                    prob,
                });
            }
            let diag = c_e.norm_sqr() * pow(amps.alpha_e.conj(), p) * pow(amps.alpha_e, q)
                + c_f.norm_sqr() * pow(amps.alpha_f.conj(), p) * pow(amps.alpha_f, q);
            let cross = c_e.conj() * c_f * pow(amps.alpha_e.conj(), p) * pow(amps.alpha_f, q)
                * ov_ef
                + c_f.conj() * c_e * pow(amps.alpha_f.conj(), p) * pow(amps.alpha_e, q)
                    * ov_ef.conj();
            Ok((diag + cross) / (2.0 * prob))
        }
    }
}

/// All scalar witnesses plus P(l) in one pass over shared moments.
/// Per-witness undefined flags are carried in the report; only a bad l_max
/// fails.
pub fn witness_report(state: &State, l_max: usize) -> Result<WitnessReport> {
    let pn = photon_distribution(state, l_max)?;
    let n_mean = mean_photon_moment(state);
    let m22 = moment(state, 2, 2).expect("order 4 is always supported").re;
    let (s_x, s_p) = squeezing(state);
    let defined = n_mean >= VACUUM_MEAN_THRESHOLD;
    Ok(WitnessReport {
        mean_n: n_mean,
        mandel_q: defined.then(|| m22 / n_mean - n_mean),
        s_x,
        s_p,
        g2: defined.then(|| m22 / (n_mean * n_mean)),
        d1: m22 - n_mean * n_mean,
        pn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{choose_cutoff, coherent_state, fock_state, mix, FockVector};
    use crate::model::{default_cutoff, model_state};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn reduced(lambda: f64, chit: f64) -> ModelParams {
        ModelParams::from_reduced(Complex64::from(lambda), chit, PI / 4.0, 0.0).unwrap()
    }

    fn coherent2() -> State {
        coherent_state(Complex64::from(2.0), choose_cutoff(4.0, 1e-14))
            .unwrap()
            .into()
    }

    #[test]
    fn photon_distribution_of_coherent_is_poisson() {
        let state = coherent2();
        let pn = photon_distribution(&state, 12).unwrap();
        let mean = 4.0f64;
        for (l, p) in pn.iter().enumerate() {
            let expected = (-mean).exp() * mean.powi(l as i32)
                / (1..=l).map(|k| k as f64).product::<f64>();
            assert!((p - expected).abs() < 1e-9, "l={l}");
        }
        // equal-height peak at l = 3, 4
        assert!((pn[3] - pn[4]).abs() < 1e-9);
        assert!(pn[3] > pn[2] && pn[4] > pn[5]);
    }

    #[test]
    fn photon_distribution_of_vacuum() {
        let state: State = fock_state(0, 16).unwrap().into();
        let pn = photon_distribution(&state, 5).unwrap();
        assert!((pn[0] - 1.0).abs() < 1e-15);
        assert!(pn[1..].iter().all(|p| *p == 0.0));
        assert!(matches!(
            photon_distribution(&state, 16),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn mixed_model_distribution_is_poisson_pointwise() {
        // the two branches share |α|², so the trace is exactly Poissonian —
        // P(2) lands at 0.2002, far from the often-quoted 0.83
        let p = reduced(1.0, 4.0);
        let n_c = default_cutoff(&p, 1e-13);
        let state = model_state(&p, StateKind::Mixed, n_c).unwrap();
        let pn = photon_distribution(&state, n_c - 1).unwrap();
        let mean = p.branch_mean_photon();
        let mut expected = (-mean).exp();
        for (l, got) in pn.iter().enumerate() {
            if l > 0 {
                expected *= mean / l as f64;
            }
            assert!((got - expected).abs() < 1e-10, "l={l}: {got} vs {expected}");
        }
        assert!((pn[2] - 0.200252172445063).abs() < 1e-10);
    }

    #[test]
    fn mandel_q_reference_points() {
        assert!(mandel_q(&coherent2()).unwrap().abs() < 1e-10);
        let f2: State = fock_state(2, 16).unwrap().into();
        assert!((mandel_q(&f2).unwrap() + 1.0).abs() < 1e-12);
        let vac: State = fock_state(0, 16).unwrap().into();
        assert!(mandel_q(&vac).is_none());
    }

    #[test]
    fn mixed_model_is_poissonian_everywhere() {
        for (lambda, chit) in [(0.35, 0.2), (1.0, 1.0), (2.0, 2.0), (3.5, 4.0)] {
            let p = reduced(lambda, chit);
            let state = model_state(&p, StateKind::Mixed, default_cutoff(&p, 1e-14)).unwrap();
            let q = mandel_q(&state).unwrap();
            assert!(q.abs() < 1e-9, "lambda={lambda} chit={chit}: Q={q}");
        }
    }

    #[test]
    fn squeezing_reference_points() {
        let (sx, sp) = squeezing(&coherent2());
        assert!(sx.abs() < 1e-10 && sp.abs() < 1e-10);
        let f1: State = fock_state(1, 16).unwrap().into();
        let (sx, sp) = squeezing(&f1);
        assert!((sx - 2.0).abs() < 1e-12 && (sp - 2.0).abs() < 1e-12);
    }

    #[test]
    fn squeezing_matches_quadrature_variance_route() {
        // S_x = 4⟨(Δx)²⟩ − 1 with x = (a+a†)/2, same for p
        let p = reduced(1.3, 0.9);
        let n_c = default_cutoff(&p, 1e-13);
        for kind in [StateKind::Mixed, StateKind::Cat { mu: 0.7 }] {
            let state = model_state(&p, kind, n_c).unwrap();
            let (s_x, s_p) = squeezing(&state);
            let a = moment(&state, 0, 1).unwrap();
            let a2 = moment(&state, 0, 2).unwrap();
            let n_mean = moment(&state, 1, 1).unwrap().re;
            let x_mean = a.re;
            let x2_mean = (2.0 * a2.re + 2.0 * n_mean + 1.0) / 4.0;
            let p_mean = a.im;
            let p2_mean = (-2.0 * a2.re + 2.0 * n_mean + 1.0) / 4.0;
            assert!((s_x - (4.0 * (x2_mean - x_mean * x_mean) - 1.0)).abs() < 1e-12);
            assert!((s_p - (4.0 * (p2_mean - p_mean * p_mean) - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn g2_reference_points() {
        assert!((g2_zero(&coherent2()).unwrap() - 1.0).abs() < 1e-10);
        let f2: State = fock_state(2, 16).unwrap().into();
        assert!((g2_zero(&f2).unwrap() - 0.5).abs() < 1e-12);
        let rho = mix(
            &[0.5, 0.5],
            &[fock_state(0, 16).unwrap(), fock_state(2, 16).unwrap()],
        )
        .unwrap();
        assert!((g2_zero(&rho.into()).unwrap() - 1.0).abs() < 1e-12);
        let vac: State = fock_state(0, 16).unwrap().into();
        assert!(g2_zero(&vac).is_none());
    }

    #[test]
    fn d1_reference_points() {
        assert!(antibunch_d1(&coherent2()).abs() < 1e-9);
        let f1: State = fock_state(1, 16).unwrap().into();
        assert!((antibunch_d1(&f1) + 1.0).abs() < 1e-12);
        let vac: State = fock_state(0, 16).unwrap().into();
        assert_eq!(antibunch_d1(&vac), 0.0);
    }

    #[test]
    fn d1_equals_mandel_times_mean() {
        for (lambda, chit) in [(1.0, 1.0), (2.0, 0.7), (0.35, 4.0)] {
            let p = reduced(lambda, chit);
            let n_c = default_cutoff(&p, 1e-13);
            for kind in [StateKind::Mixed, StateKind::Cat { mu: 0.0 }] {
                let state = model_state(&p, kind, n_c).unwrap();
                let report = witness_report(&state, 8).unwrap();
                if let Some(q) = report.mandel_q {
                    assert!((report.d1 - q * report.mean_n).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn analytic_moment_low_orders() {
        for (lambda, chit) in [(1.0, 1.0), (2.0, 2.0), (0.35, 0.2)] {
            let p = reduced(lambda, chit);
            let expected = p.branch_mean_photon();
            let m11 = analytic_moment(&p, 1, 1, StateKind::Mixed).unwrap();
            assert!((m11.re - expected).abs() < 1e-12 && m11.im.abs() < 1e-14);
            let m00 = analytic_moment(&p, 0, 0, StateKind::Mixed).unwrap();
            assert!((m00 - Complex64::ONE).norm() < 1e-14);
            let m00c = analytic_moment(&p, 0, 0, StateKind::Cat { mu: 0.9 }).unwrap();
            assert!((m00c - Complex64::ONE).norm() < 1e-12);
            let m22 = analytic_moment(&p, 2, 2, StateKind::Mixed).unwrap();
            assert!((m22.re - expected * expected).abs() < 1e-10);
        }
    }

    #[test]
    fn analytic_moment_matches_fock_computation() {
        for (lambda, chit) in [(1.0, 1.0), (2.0, 0.7), (0.35, 4.0)] {
            let p = reduced(lambda, chit);
            let n_c = choose_cutoff(4.0 * lambda * lambda, 1e-15);
            for kind in [StateKind::Mixed, StateKind::Cat { mu: 0.0 }, StateKind::Cat { mu: 1.7 }] {
                let state = model_state(&p, kind, n_c).unwrap();
                for pp in 0..=4u32 {
                    for qq in 0..=4u32 {
                        let analytic = analytic_moment(&p, pp, qq, kind).unwrap();
                        let numeric = moment(&state, pp, qq).unwrap();
                        assert!(
                            (analytic - numeric).norm() < 1e-8,
                            "lambda={lambda} chit={chit} kind={kind:?} p={pp} q={qq}: \
                             {analytic} vs {numeric}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn analytic_moment_rejects_degenerate_cat() {
        let p = reduced(1.0, PI);
        assert!(matches!(
            analytic_moment(&p, 1, 1, StateKind::Cat { mu: 0.0 }),
            Err(Error::DegenerateOutcome { .. })
        ));
    }

    #[test]
    fn report_for_vacuum_and_coherent() {
        let vac: State = fock_state(0, 16).unwrap().into();
        let r = witness_report(&vac, 4).unwrap();
        assert_eq!(r.mean_n, 0.0);
        assert!(r.mandel_q.is_none() && r.g2.is_none());
        assert_eq!(r.d1, 0.0);
        assert!(r.s_x.abs() < 1e-15 && r.s_p.abs() < 1e-15);
        assert!((r.pn[0] - 1.0).abs() < 1e-15);

        let coh: State = coherent_state(Complex64::ONE, 32).unwrap().into();
        let r = witness_report(&coh, 8).unwrap();
        assert!(r.mandel_q.unwrap().abs() < 1e-10);
        assert!((r.g2.unwrap() - 1.0).abs() < 1e-10);
        assert!(r.s_x.abs() < 1e-10 && r.s_p.abs() < 1e-10);
        let pn_sum: f64 = r.pn.iter().sum();
        assert!(pn_sum <= 1.0 + 1e-9);
    }

    #[test]
    fn witnesses_are_global_phase_invariant() {
        let p = reduced(1.5, 1.2);
        let n_c = default_cutoff(&p, 1e-13);
        let state = model_state(&p, StateKind::Cat { mu: 0.4 }, n_c).unwrap();
        let State::Pure(v) = &state else { unreachable!() };
        let rotated: State = v.scaled_by_phase(2.1).into();
        let a = witness_report(&state, 8).unwrap();
        let b = witness_report(&rotated, 8).unwrap();
        assert!((a.mean_n - b.mean_n).abs() < 1e-13);
        assert!((a.mandel_q.unwrap() - b.mandel_q.unwrap()).abs() < 1e-12);
        assert!((a.s_x - b.s_x).abs() < 1e-12);
        assert!((a.s_p - b.s_p).abs() < 1e-12);
        assert!((a.g2.unwrap() - b.g2.unwrap()).abs() < 1e-12);
        assert!((a.d1 - b.d1).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn witness_bounds_hold_for_random_states(
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..20)
        ) {
            let raw: Vec<Complex64> =
                amps.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
            prop_assume!(raw.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6);
            let state: State = FockVector::from_amplitudes(raw).unwrap().into();
            if let Some(q) = mandel_q(&state) {
                prop_assert!(q >= -1.0 - 1e-9);
            }
            let (s_x, s_p) = squeezing(&state);
            prop_assert!(s_x >= -1.0 - 1e-9);
            prop_assert!(s_p >= -1.0 - 1e-9);
            // Heisenberg: (S_x+1)(S_p+1) = 16⟨Δx²⟩⟨Δp²⟩ ≥ 1
            prop_assert!((s_x + 1.0) * (s_p + 1.0) >= 1.0 - 1e-9);
        }
    }
}
