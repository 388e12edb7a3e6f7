//! The driven dispersive atom–cavity model.
//!
//! A three-level atom crosses a cavity whose mode is resonant with an
//! external classical drive while both are far detuned from the atomic
//! transition. In that regime each atomic level imprints a state-dependent
//! displacement on the field: starting from vacuum, the |f⟩ branch evolves
//! into e^{i|λ|²sin(χt)} |−λ(1−e^{iχt})⟩ and the |e⟩ branch into
//! e^{−iχt} e^{−i|λ|²sin(χt)} |−λ(1−e^{−iχt})⟩, with λ = E/g and χ = g²/Δ.
//!
//! This module builds those branch states, the joint atom–field state, the
//! reduced (mixed) field state, and the measurement-conditioned (cat) field
//! state, plus two independent numerical propagators used as oracles: a
//! matrix-exponential evolution under the effective Hamiltonian and a
//! time-ordered integration of the full rotating-frame Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    self, choose_cutoff, coherent_state, fock_state, mix, poisson_tail, DensityMatrix,
    FockVector, State, TAIL_REJECT,
};

/// Dispersive-validity threshold on g/|Δ|; above it the effective picture
/// degrades and callers should surface a warning.
pub const DISPERSIVE_WARN_RATIO: f64 = 0.1;

/// Stability bound for the rotating-frame integrator: g·t/steps must not
/// exceed this.
pub const MAX_COUPLING_STEP: f64 = 1e-3;

/// Atomic level participating in the dispersive interaction. The third
/// level |g⟩ is far detuned and never enters the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// Upper level |e⟩.
    E,
    /// Intermediate level |f⟩.
    F,
}

/// Physical and derived parameters of the driven dispersive model.
///
/// Only Δ = ω₀ − ω_ex and the resonance condition ω_c = ω_ex enter any
/// formula; the bare frequencies ω₀, ω_c, ω_ex have no independent
/// computational role and are not stored.
#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    /// Atom–cavity coupling rate (rad/s), g > 0.
    pub g: f64,
    /// Detuning ω₀ − ω_ex (rad/s), nonzero.
    pub delta: f64,
    /// Classical drive amplitude E (rad/s).
    pub e_drive: Complex64,
    /// Interaction time (s).
    pub t: f64,
    /// Superposition angle θ of the injected atom sin θ|e⟩ + e^{iφ}cos θ|f⟩.
    pub theta: f64,
    /// Superposition phase φ.
    pub phi: f64,
    /// λ = E/g (dimensionless).
    pub lambda: Complex64,
    /// χ = g²/Δ (rad/s).
    pub chi: f64,
    /// χ·t (dimensionless).
    pub chit: f64,
}

impl ModelParams {
    pub fn new(
        g: f64,
        delta: f64,
        e_drive: Complex64,
        t: f64,
        theta: f64,
        phi: f64,
    ) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParams(format!("g must be positive (got {g})")));
        }
        if !(delta.is_finite() && delta != 0.0) {
            return Err(Error::InvalidParams(format!(
                "delta must be finite and nonzero (got {delta})"
            )));
        }
        for (name, v) in [("t", t), ("theta", theta), ("phi", phi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite (got {v})")));
            }
        }
        if !e_drive.re.is_finite() || !e_drive.im.is_finite() {
            return Err(Error::InvalidParams(format!(
                "e_drive must be finite (got {e_drive})"
            )));
        }
        let lambda = e_drive / g;
        let chi = g * g / delta;
        Ok(ModelParams {
            g,
            delta,
            e_drive,
            t,
            theta,
            phi,
            lambda,
            chi,
            chit: chi * t,
        })
    }

    /// Build from the dimensionless pair (λ, χt) that every figure sweeps,
    /// using a canonical dispersive embedding g = 1, Δ = 20 (ratio 0.05).
    pub fn from_reduced(lambda: Complex64, chit: f64, theta: f64, phi: f64) -> Result<Self> {
        let g = 1.0;
        let delta = 20.0;
        let chi = g * g / delta;
        ModelParams::new(g, delta, lambda * g, chit / chi, theta, phi)
    }

    /// g/|Δ|; the dispersive approximation needs this small.
    pub fn dispersive_ratio(&self) -> f64 {
        self.g / self.delta.abs()
    }

    pub fn dispersive_warning(&self) -> Option<String> {
        let r = self.dispersive_ratio();
        (r > DISPERSIVE_WARN_RATIO)
            .then(|| format!("dispersive ratio g/|delta| = {r:.4} exceeds {DISPERSIVE_WARN_RATIO}"))
    }

    /// Mean photon number |λ|²(2 − 2cos χt) shared by both branches.
    pub fn branch_mean_photon(&self) -> f64 {
        self.lambda.norm_sqr() * (2.0 - 2.0 * self.chit.cos())
    }

    /// Largest mean photon number reached anywhere along the evolution up to
    /// time t (the branch amplitude peaks at χt = π); cutoffs must cover the
    /// path, not just the endpoint.
    pub fn path_mean_photon(&self) -> f64 {
        if self.chit.abs() >= std::f64::consts::PI {
            4.0 * self.lambda.norm_sqr()
        } else {
            self.branch_mean_photon()
        }
    }
}

/// Coherent amplitudes and global phases of the two field branches.
#[derive(Clone, Copy, Debug)]
pub struct BranchAmplitudes {
    pub alpha_e: Complex64,
    pub phase_e: f64,
    pub alpha_f: Complex64,
    pub phase_f: f64,
}

/// Branch coherent amplitudes α = −λ(1 − e^{∓iχt}) and the global phases
/// ±|λ|²sin(χt) (the e branch also picks up −χt). The phases are returned
/// explicitly: they cancel inside each branch's density matrix but govern
/// the interference of the conditioned cat state.
pub fn field_amplitudes(params: &ModelParams) -> BranchAmplitudes {
    let lambda = params.lambda;
    let chit = params.chit;
    let rot = Complex64::from_polar(1.0, chit);
    let sin_term = lambda.norm_sqr() * chit.sin();
    BranchAmplitudes {
        alpha_e: -lambda * (Complex64::ONE - rot.conj()),
        phase_e: -chit - sin_term,
        alpha_f: -lambda * (Complex64::ONE - rot),
        phase_f: sin_term,
    }
}

/// Field state attached to one atomic level: e^{iφ_branch}|α_branch⟩.
pub fn branch_state(params: &ModelParams, level: Level, n_c: usize) -> Result<FockVector> {
    let amps = field_amplitudes(params);
    let (alpha, phase) = match level {
        Level::E => (amps.alpha_e, amps.phase_e),
        Level::F => (amps.alpha_f, amps.phase_f),
    };
    Ok(coherent_state(alpha, n_c)?.scaled_by_phase(phase))
}

/// Entangled atom–field state sin θ|ψ_e⟩|e⟩ + e^{iφ}cos θ|ψ_f⟩|f⟩, stored as
/// unit-norm field branches with complex weights.
#[derive(Clone, Debug)]
pub struct JointState {
    pub field_e: FockVector,
    pub field_f: FockVector,
    pub weight_e: Complex64,
    pub weight_f: Complex64,
    pub params: ModelParams,
}

impl JointState {
    pub fn cutoff(&self) -> usize {
        self.field_e.cutoff()
    }

    /// Σ over branches of |weight|² · ⟨branch|branch⟩.
    pub fn total_norm_sqr(&self) -> f64 {
        self.weight_e.norm_sqr() * self.field_e.norm().powi(2)
            + self.weight_f.norm_sqr() * self.field_f.norm().powi(2)
    }

    /// Full joint-space inner product ⟨self|other⟩; the atomic states are
    /// orthogonal so branches pair off.
    pub fn joint_overlap(&self, other: &JointState) -> Result<Complex64> {
        let ov_e = fock::overlap(&self.field_e, &other.field_e)?;
        let ov_f = fock::overlap(&self.field_f, &other.field_f)?;
        Ok(self.weight_e.conj() * other.weight_e * ov_e
            + self.weight_f.conj() * other.weight_f * ov_f)
    }

    pub fn fidelity(&self, other: &JointState) -> Result<f64> {
        Ok(self.joint_overlap(other)?.norm())
    }
}

/// Analytic joint state at time t for the injected superposition atom.
pub fn joint_state(params: &ModelParams, n_c: usize) -> Result<JointState> {
    Ok(JointState {
        field_e: branch_state(params, Level::E, n_c)?,
        field_f: branch_state(params, Level::F, n_c)?,
        weight_e: Complex64::from(params.theta.sin()),
        weight_f: Complex64::from_polar(params.theta.cos(), params.phi),
        params: *params,
    })
}

/// Field state after tracing out the atom: the atomic levels are orthogonal,
/// so the cross terms vanish and ρ = |w_e|²|ψ_e⟩⟨ψ_e| + |w_f|²|ψ_f⟩⟨ψ_f|.
pub fn field_mixed(joint: &JointState) -> Result<DensityMatrix> {
    mix(
        &[joint.weight_e.norm_sqr(), joint.weight_f.norm_sqr()],
        &[joint.field_e.clone(), joint.field_f.clone()],
    )
}

/// Conditioned field state together with its detection probability.
#[derive(Clone, Debug)]
pub struct ConditionalState {
    pub state: FockVector,
    pub probability: f64,
}

/// Field state conditioned on detecting the atom in (|e⟩ + e^{iμ}|f⟩)/√2:
/// the branches interfere, (w_e ψ_e + e^{−iμ} w_f ψ_f)/√2, producing the cat
/// superposition the mixed state cannot. Probabilities over μ and μ+π sum
/// to one.
pub fn field_cat(joint: &JointState, atom_phase: f64) -> Result<ConditionalState> {
    let mu = atom_phase;
    let n_c = joint.cutoff();
    let cf = Complex64::from_polar(1.0, -mu) * joint.weight_f;
    let ce = joint.weight_e;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = Vec::with_capacity(n_c);
    for n in 0..n_c {
        amps.push((ce * joint.field_e.amplitude(n) + cf * joint.field_f.amplitude(n)) * inv_sqrt2);
    }
    let probability: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if probability < 1e-12 {
        let p = joint.params;
        return Err(Error::DegenerateOutcome {
            lambda: p.lambda,
            chit: p.chit,
            theta: p.theta,
            phi: p.phi,
            mu,
            prob: probability,
        });
    }
    Ok(ConditionalState {
        state: FockVector::from_amplitudes(amps)?,
        probability,
    })
}

/// H_eff on one atomic branch as a dense N_c×N_c tridiagonal Hermitian
/// matrix (ħ = 1, entries in rad/s):
/// level e: χ[1 + a†a + λa† + λ*a + |λ|²], level f: −χ[a†a + λa† + λ*a + |λ|²].
pub fn effective_hamiltonian_matrix(
    params: &ModelParams,
    level: Level,
    n_c: usize,
) -> DMatrix<Complex64> {
    let chi = params.chi;
    let lambda = params.lambda;
    let sign = match level {
        Level::E => 1.0,
        Level::F => -1.0,
    };
    let offset = match level {
        Level::E => 1.0,
        Level::F => 0.0,
    };
    let mut h = DMatrix::<Complex64>::zeros(n_c, n_c);
    for n in 0..n_c {
        h[(n, n)] = Complex64::from(sign * chi * (n as f64 + lambda.norm_sqr()) + chi * offset);
        if n + 1 < n_c {
            let s = ((n + 1) as f64).sqrt();
            // λ a† sits below the diagonal, λ* a above it
            h[(n + 1, n)] = sign * chi * lambda * s;
            h[(n, n + 1)] = sign * chi * lambda.conj() * s;
        }
    }
    h
}

/// exp(−i H_eff t)|0⟩ by Hermitian eigendecomposition: the primary oracle for
/// [`branch_state`]. The cutoff must cover the evolution path, not just the
/// endpoint, so the tail check uses the path maximum of the photon mean.
pub fn propagate_effective(params: &ModelParams, level: Level, n_c: usize) -> Result<FockVector> {
    let mean = params.path_mean_photon();
    let tail = poisson_tail(mean, n_c);
    if tail > TAIL_REJECT {
        return Err(Error::CutoffTooSmall {
            cutoff: n_c,
            mean,
            tail,
            limit: TAIL_REJECT,
        });
    }
    let h = effective_hamiltonian_matrix(params, level, n_c);
    let eig = h.symmetric_eigen();
    // ψ(t) = V e^{−iΛt} V† |0⟩
    let mut coeffs: Vec<Complex64> = (0..n_c).map(|j| eig.eigenvectors[(0, j)].conj()).collect();
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c *= Complex64::from_polar(1.0, -eig.eigenvalues[j] * params.t);
    }
    let mut amps = vec![Complex64::ZERO; n_c];
    for j in 0..n_c {
        let cj = coeffs[j];
        if cj.norm_sqr() < 1e-300 {
            continue;
        }
        for (n, amp) in amps.iter_mut().enumerate() {
            *amp += eig.eigenvectors[(n, j)] * cj;
        }
    }
    FockVector::from_amplitudes(amps)
}

/// Time-ordered integration of the full rotating-frame dynamics acting on
/// |0⟩ ⊗ (sin θ|e⟩ + e^{iφ}cos θ|f⟩), with no dispersive approximation.
///
/// The rotating frame of the lab Hamiltonian at the drive frequency is
/// ½Δσ₃ + g(b σ₊ + b† σ₋) with b = a + λ; the ½Δσ₃ term is absorbed
/// exactly into the interaction picture, leaving the time-dependent
/// generator g(e^{iΔt} b σ₊ + e^{−iΔt} b† σ₋) that this integrator steps.
/// That is the frame in which the effective-Hamiltonian branch states live,
/// so the output is directly comparable with [`joint_state`].
///
/// Uses piecewise-constant midpoint stepping with a per-step matrix
/// exponential applied through a truncated Taylor series on the state
/// vector; second-order accurate in the step size. The step count must keep
/// g·t/steps ≤ [`MAX_COUPLING_STEP`].
pub fn propagate_rotating_frame(
    params: &ModelParams,
    n_c: usize,
    steps: usize,
) -> Result<JointState> {
    let g = params.g;
    let t = params.t;
    let required = ((g * t.abs()) / MAX_COUPLING_STEP).ceil().max(1.0) as usize;
    if steps < required {
        return Err(Error::StepsTooFew { steps, required });
    }
    let delta = params.delta;
    let lambda = params.lambda;
    let dt = t / steps as f64;

    let mut psi_e = vec![Complex64::ZERO; n_c];
    let mut psi_f = vec![Complex64::ZERO; n_c];
    psi_e[0] = Complex64::from(params.theta.sin());
    psi_f[0] = Complex64::from_polar(params.theta.cos(), params.phi);

    // H(t_mid)·ψ exploiting the two-block tridiagonal structure; O(N_c).
    let apply_h = |tm: f64,
                   pe: &[Complex64],
                   pf: &[Complex64],
                   oe: &mut [Complex64],
                   of: &mut [Complex64]| {
        let fwd = Complex64::from_polar(g, delta * tm);
        let bwd = fwd.conj();
        for n in 0..n_c {
            let mut bv = lambda * pf[n];
            if n + 1 < n_c {
                bv += pf[n + 1] * ((n + 1) as f64).sqrt();
            }
            oe[n] = fwd * bv;
            let mut bdv = lambda.conj() * pe[n];
            if n > 0 {
                bdv += pe[n - 1] * (n as f64).sqrt();
            }
            of[n] = bwd * bdv;
        }
    };

    let mut term_e = vec![Complex64::ZERO; n_c];
    let mut term_f = vec![Complex64::ZERO; n_c];
    let mut ht_e = vec![Complex64::ZERO; n_c];
    let mut ht_f = vec![Complex64::ZERO; n_c];
    const MAX_TAYLOR: usize = 48;

    for step in 0..steps {
        let tm = (step as f64 + 0.5) * dt;
        term_e.copy_from_slice(&psi_e);
        term_f.copy_from_slice(&psi_f);
        for j in 1..=MAX_TAYLOR {
            apply_h(tm, &term_e, &term_f, &mut ht_e, &mut ht_f);
            let factor = Complex64::new(0.0, -dt / j as f64);
            let mut term_norm = 0.0f64;
            for n in 0..n_c {
                term_e[n] = ht_e[n] * factor;
                term_f[n] = ht_f[n] * factor;
                psi_e[n] += term_e[n];
                psi_f[n] += term_f[n];
                term_norm += term_e[n].norm_sqr() + term_f[n].norm_sqr();
            }
            if term_norm < 1e-34 {
                break;
            }
        }
    }

    let norm_e = psi_e.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let norm_f = psi_f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let field_e = if norm_e > 1e-150 {
        FockVector::from_amplitudes(psi_e)?
    } else {
        fock_state(0, n_c)?
    };
    let field_f = if norm_f > 1e-150 {
        FockVector::from_amplitudes(psi_f)?
    } else {
        fock_state(0, n_c)?
    };
    Ok(JointState {
        field_e,
        field_f,
        weight_e: Complex64::from(if norm_e > 1e-150 { norm_e } else { 0.0 }),
        weight_f: Complex64::from(if norm_f > 1e-150 { norm_f } else { 0.0 }),
        params: *params,
    })
}

/// Default cutoff for a parameter point: Poisson tail bound at the path
/// maximum of the photon mean.
pub fn default_cutoff(params: &ModelParams, tail_tol: f64) -> usize {
    choose_cutoff(params.path_mean_photon(), tail_tol)
}

/// Which reduced field state to analyze: the faithful partial trace or the
/// measurement-conditioned superposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateKind {
    Mixed,
    Cat { mu: f64 },
}

/// Build the model's field state of the requested kind at one parameter
/// point.
pub fn model_state(params: &ModelParams, kind: StateKind, n_c: usize) -> Result<State> {
    let joint = joint_state(params, n_c)?;
    Ok(match kind {
        StateKind::Mixed => State::Mixed(field_mixed(&joint)?),
        StateKind::Cat { mu } => State::Pure(field_cat(&joint, mu)?.state),
    })
}
