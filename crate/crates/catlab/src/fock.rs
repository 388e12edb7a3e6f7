//! Truncated Fock-space states and operator algebra.
//!
//! Everything downstream works in the number basis {|0⟩, …, |N_c−1⟩} for a
//! finite cutoff N_c chosen by [`choose_cutoff`]. Pure states are
//! [`FockVector`]s, mixed states are [`DensityMatrix`]es, and [`State`] is
//! the sum of the two. All values are immutable after construction and all
//! operations are pure functions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Hard floor on every cutoff produced by the policy.
pub const MIN_CUTOFF: usize = 16;
/// Safety margin added on top of the Poisson-tail bound.
pub const CUTOFF_PADDING: usize = 10;
/// Largest supported moment order p + q.
pub const MAX_MOMENT_ORDER: u32 = 8;
/// Tail mass beyond which a state constructor rejects its cutoff.
pub const TAIL_REJECT: f64 = 1e-9;

const LN_FACT_TABLE_LEN: usize = 4096;

static LN_FACT: OnceLock<Vec<f64>> = OnceLock::new();

/// ln(n!) from a cumulative table; exact to ~1e-15 relative for any n a
/// truncated basis can reach.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    let table = LN_FACT.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE_LEN);
        t.push(0.0);
        for k in 1..LN_FACT_TABLE_LEN {
            t.push(t[k - 1] + (k as f64).ln());
        }
        t
    });
    if n < table.len() {
        table[n]
    } else {
        let mut acc = table[table.len() - 1];
        for k in table.len()..=n {
            acc += (k as f64).ln();
        }
        acc
    }
}

/// Poisson tail mass Σ_{n ≥ from} e^{−mean} meanⁿ/n!, summed directly
/// (never as 1 − CDF, which cancels catastrophically for small tails).
pub fn poisson_tail(mean: f64, from: usize) -> f64 {
    if mean <= 0.0 {
        return if from == 0 { 1.0 } else { 0.0 };
    }
    if from == 0 {
        return 1.0;
    }
    let ln_p = -mean + (from as f64) * mean.ln() - ln_factorial(from);
    let mut term = ln_p.exp();
    let mut total = term;
    let mut n = from;
    loop {
        n += 1;
        term *= mean / n as f64;
        total += term;
        if term < total * 1e-18 + 1e-320 && (n as f64) > mean {
            break;
        }
    }
    total.min(1.0)
}

/// Pick a Fock cutoff for states whose photon statistics are bounded by a
/// Poisson law of the given mean: the smallest N with tail mass below
/// `tail_tol`, padded by [`CUTOFF_PADDING`] levels and floored at
/// [`MIN_CUTOFF`]. Out-of-range inputs are clamped rather than rejected.
pub fn choose_cutoff(mean_photon: f64, tail_tol: f64) -> usize {
    let mean = if mean_photon.is_finite() && mean_photon > 0.0 {
        mean_photon
    } else {
        0.0
    };
    let tol = if tail_tol.is_finite() {
        tail_tol.clamp(1e-300, 0.999)
    } else {
        1e-300
    };
    let mut n = 1;
    while poisson_tail(mean, n) >= tol {
        n += 1;
    }
    (n + CUTOFF_PADDING).max(MIN_CUTOFF)
}

/// Compensated (Neumaier) summation for complex accumulators.
#[derive(Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum_re: f64,
    c_re: f64,
    sum_im: f64,
    c_im: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, z: Complex64) {
        let t = self.sum_re + z.re;
        if self.sum_re.abs() >= z.re.abs() {
            self.c_re += (self.sum_re - t) + z.re;
        } else {
            self.c_re += (z.re - t) + self.sum_re;
        }
        self.sum_re = t;
        let t = self.sum_im + z.im;
        if self.sum_im.abs() >= z.im.abs() {
            self.c_im += (self.sum_im - t) + z.im;
        } else {
            self.c_im += (z.im - t) + self.sum_im;
        }
        self.sum_im = t;
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.sum_re + self.c_re, self.sum_im + self.c_im)
    }
}

/// Pure cavity state as a finite amplitude sequence over |0⟩..|N_c−1⟩.
///
/// Invariants: unit norm within 1e-10 after any normalizing constructor, and
/// tail mass at the cutoff edge bounded by the policy that chose the cutoff.
#[derive(Clone, Debug)]
pub struct FockVector {
    amps: Vec<Complex64>,
    truncation_deficit: f64,
}

impl FockVector {
    /// Normalize raw amplitudes into a state. The squared-norm deficit
    /// |1 − Σ|cₙ|²| before normalization is kept for diagnostics.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParams("empty amplitude vector".into()));
        }
        let norm_sq: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if norm_sq < 1e-300 {
            return Err(Error::InvalidParams(
                "cannot normalize the zero vector".into(),
            ));
        }
        let scale = norm_sq.sqrt().recip();
        Ok(FockVector {
            amps: amps.into_iter().map(|c| c * scale).collect(),
            truncation_deficit: (1.0 - norm_sq).abs(),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.amps.get(n).copied().unwrap_or(Complex64::ZERO)
    }

    /// Squared-norm loss recorded at construction, before renormalization.
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Global phase factor e^{iφ}·|ψ⟩. Physically irrelevant on its own but
    /// load-bearing when branches interfere.
    pub fn scaled_by_phase(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        FockVector {
            amps: self.amps.iter().map(|c| c * factor).collect(),
            truncation_deficit: self.truncation_deficit,
        }
    }

    /// Embed into a larger cutoff by zero-padding the tail.
    pub fn padded(&self, n_c: usize) -> Result<Self> {
        if n_c < self.amps.len() {
            return Err(Error::DimensionMismatch {
                left: self.amps.len(),
                right: n_c,
            });
        }
        let mut amps = self.amps.clone();
        amps.resize(n_c, Complex64::ZERO);
        Ok(FockVector {
            amps,
            truncation_deficit: self.truncation_deficit,
        })
    }

    pub fn mean_photon(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    pub(crate) fn as_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amps)
    }
}

/// Cavity mixed state: Hermitian, unit-trace, positive-semidefinite matrix
/// in the number basis.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn cutoff(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// P(n) = ⟨n|ρ|n⟩ for every basis state.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        (0..self.cutoff()).map(|n| self.mat[(n, n)].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().iter().sum()
    }

    /// Tr ρ².  Equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.cutoff() {
            for j in 0..self.cutoff() {
                acc += (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        acc
    }

    /// max |ρ − ρ†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.cutoff() {
            for j in 0..self.cutoff() {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Real spectrum in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    pub fn padded(&self, n_c: usize) -> Result<Self> {
        let old = self.cutoff();
        if n_c < old {
            return Err(Error::DimensionMismatch {
                left: old,
                right: n_c,
            });
        }
        let mut mat = DMatrix::<Complex64>::zeros(n_c, n_c);
        mat.view_mut((0, 0), (old, old)).copy_from(&self.mat);
        Ok(DensityMatrix { mat })
    }
}

/// A quantum state of the cavity field, pure or mixed.
#[derive(Clone, Debug)]
pub enum State {
    Pure(FockVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn cutoff(&self) -> usize {
        match self {
            State::Pure(v) => v.cutoff(),
            State::Mixed(r) => r.cutoff(),
        }
    }

    pub fn mean_photon(&self) -> f64 {
        match self {
            State::Pure(v) => v.mean_photon(),
            State::Mixed(r) => r
                .diagonal_probabilities()
                .iter()
                .enumerate()
                .map(|(n, p)| n as f64 * p)
                .sum(),
        }
    }

    pub fn padded(&self, n_c: usize) -> Result<State> {
        Ok(match self {
            State::Pure(v) => State::Pure(v.padded(n_c)?),
            State::Mixed(r) => State::Mixed(r.padded(n_c)?),
        })
    }
}

impl From<FockVector> for State {
    fn from(v: FockVector) -> Self {
        State::Pure(v)
    }
}

impl From<DensityMatrix> for State {
    fn from(r: DensityMatrix) -> Self {
        State::Mixed(r)
    }
}

/// Raw coherent-state amplitudes e^{−|α|²/2} αⁿ/√n! without renormalization,
/// evaluated in log space so large |α| and n stay finite.
pub fn coherent_amplitudes(alpha: Complex64, n_c: usize) -> Vec<Complex64> {
    let mean = alpha.norm_sqr();
    if mean == 0.0 {
        let mut amps = vec![Complex64::ZERO; n_c.max(1)];
        amps[0] = Complex64::ONE;
        return amps;
    }
    let ln_r = alpha.norm().ln();
    let arg = alpha.arg();
    (0..n_c)
        .map(|n| {
            let magnitude = (-0.5 * mean + n as f64 * ln_r - 0.5 * ln_factorial(n)).exp();
            Complex64::from_polar(magnitude, n as f64 * arg)
        })
        .collect()
}

/// Coherent state |α⟩ truncated to N_c levels and renormalized.
///
/// Rejects cutoffs whose Poisson tail at mean |α|² exceeds [`TAIL_REJECT`].
pub fn coherent_state(alpha: Complex64, n_c: usize) -> Result<FockVector> {
    if n_c == 0 {
        return Err(Error::IndexOutOfRange {
            index: 0,
            cutoff: 0,
        });
    }
    let tail = poisson_tail(alpha.norm_sqr(), n_c);
    if tail > TAIL_REJECT {
        return Err(Error::CutoffTooSmall {
            cutoff: n_c,
            mean: alpha.norm_sqr(),
            tail,
            limit: TAIL_REJECT,
        });
    }
    FockVector::from_amplitudes(coherent_amplitudes(alpha, n_c))
}

/// Number state |n⟩.
pub fn fock_state(n: usize, n_c: usize) -> Result<FockVector> {
    if n >= n_c {
        return Err(Error::IndexOutOfRange {
            index: n,
            cutoff: n_c,
        });
    }
    let mut amps = vec![Complex64::ZERO; n_c];
    amps[n] = Complex64::ONE;
    Ok(FockVector {
        amps,
        truncation_deficit: 0.0,
    })
}

/// Associated Laguerre polynomial L_k^{(m)}(x) by the three-term recurrence
/// in the degree; negative integer upper indices m ≥ −k are reduced with the
/// reflection identity L_k^{(−j)}(x) = (−x)^j (k−j)!/k! · L_{k−j}^{(j)}(x).
pub fn laguerre_assoc(k: u32, m: i32, x: f64) -> f64 {
    assert!(
        m >= -(k as i32),
        "laguerre_assoc requires m >= -k (got k={k}, m={m})"
    );
    if m < 0 {
        let j = (-m) as u32;
        let mut ratio = 1.0; // (k−j)!/k!
        for i in (k - j + 1)..=k {
            ratio /= i as f64;
        }
        return (-x).powi(j as i32) * ratio * laguerre_assoc(k - j, j as i32, x);
    }
    let mf = m as f64;
    let mut prev = 1.0; // L_0
    if k == 0 {
        return prev;
    }
    let mut curr = 1.0 + mf - x; // L_1
    for i in 1..k {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0 + mf - x) * curr - (fi + mf) * prev) / (fi + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Raw displaced-number amplitudes ⟨n|D(β)|k⟩ for n = 0..N_c−1, assembled
/// from the closed form with associated Laguerre polynomials. No
/// renormalization and no tail check; this is the series building block.
pub fn displaced_number_amplitudes(beta: Complex64, k: usize, n_c: usize) -> Vec<Complex64> {
    let x = beta.norm_sqr();
    if x == 0.0 {
        let mut amps = vec![Complex64::ZERO; n_c];
        if k < n_c {
            amps[k] = Complex64::ONE;
        }
        return amps;
    }
    let prefactor = (-0.5 * x).exp();
    (0..n_c)
        .map(|n| {
            if n >= k {
                // ⟨n|D(β)|k⟩ = e^{−x/2} √(k!/n!) β^{n−k} L_k^{(n−k)}(x)
                let lag = laguerre_assoc(k as u32, (n - k) as i32, x);
                let scale =
                    (0.5 * (ln_factorial(k) - ln_factorial(n))).exp() * prefactor * lag;
                beta.powu((n - k) as u32) * scale
            } else {
                // ⟨n|D(β)|k⟩ = e^{−x/2} √(n!/k!) (−β*)^{k−n} L_n^{(k−n)}(x)
                let lag = laguerre_assoc(n as u32, (k - n) as i32, x);
                let scale =
                    (0.5 * (ln_factorial(n) - ln_factorial(k))).exp() * prefactor * lag;
                (-beta.conj()).powu((k - n) as u32) * scale
            }
        })
        .collect()
}

/// Displaced number state |β, k⟩ = D(β)|k⟩, truncated and renormalized.
pub fn displaced_number_state(beta: Complex64, k: usize, n_c: usize) -> Result<FockVector> {
    if k >= n_c {
        return Err(Error::IndexOutOfRange {
            index: k,
            cutoff: n_c,
        });
    }
    let mean = beta.norm_sqr() + k as f64;
    let tail = poisson_tail(mean, n_c);
    if tail > TAIL_REJECT {
        return Err(Error::CutoffTooSmall {
            cutoff: n_c,
            mean,
            tail,
            limit: TAIL_REJECT,
        });
    }
    FockVector::from_amplitudes(displaced_number_amplitudes(beta, k, n_c))
}

/// Reusable displacement-operator engine for one cutoff.
///
/// Diagonalizes the fixed Hermitian generator i(a† − a) once, after which
/// D(β) for any β follows from phase rotations: with β = r e^{iφ},
/// D(β) = R(φ) · exp(r(a† − a)) · R(−φ), R(φ) = diag(e^{inφ}).
/// Immutable after construction and safe to share across threads.
pub struct Displacer {
    dim: usize,
    evecs: DMatrix<Complex64>,
    evals: DVector<f64>,
}

impl Displacer {
    pub fn new(n_c: usize) -> Self {
        assert!(n_c >= 1, "displacement needs at least one level");
        // H = i(a† − a): H[n+1,n] = i√(n+1), H[n,n+1] = −i√(n+1)
        let mut h = DMatrix::<Complex64>::zeros(n_c, n_c);
        for n in 0..n_c.saturating_sub(1) {
            let s = ((n + 1) as f64).sqrt();
            h[(n + 1, n)] = Complex64::new(0.0, s);
            h[(n, n + 1)] = Complex64::new(0.0, -s);
        }
        let eig = h.symmetric_eigen();
        Displacer {
            dim: n_c,
            evecs: eig.eigenvectors,
            evals: eig.eigenvalues,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense D(β) as exp(βa† − β*a) on the truncated space.
    pub fn matrix(&self, beta: Complex64) -> DMatrix<Complex64> {
        let r = beta.norm();
        let phi = beta.arg();
        // exp(r(a†−a)) = V e^{−irΛ} V†
        let mut scaled = self.evecs.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let phase = Complex64::from_polar(1.0, -r * self.evals[j]);
            col *= phase;
        }
        let mut d = scaled * self.evecs.adjoint();
        // conjugate by R(φ)
        if phi != 0.0 {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    d[(i, j)] *= Complex64::from_polar(1.0, phi * (i as f64 - j as f64));
                }
            }
        }
        d
    }

    /// D(β)·v without materializing the matrix.
    pub fn apply(&self, beta: Complex64, v: &DVector<Complex64>) -> DVector<Complex64> {
        let r = beta.norm();
        let phi = beta.arg();
        let mut w = v.clone();
        if phi != 0.0 {
            for (n, x) in w.iter_mut().enumerate() {
                *x *= Complex64::from_polar(1.0, -phi * n as f64);
            }
        }
        let mut y = self.evecs.adjoint() * w;
        for (j, x) in y.iter_mut().enumerate() {
            *x *= Complex64::from_polar(1.0, -r * self.evals[j]);
        }
        let mut out = &self.evecs * y;
        if phi != 0.0 {
            for (n, x) in out.iter_mut().enumerate() {
                *x *= Complex64::from_polar(1.0, phi * n as f64);
            }
        }
        out
    }

    /// D(β)†·v = D(−β)·v.
    pub fn apply_adjoint(&self, beta: Complex64, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.apply(-beta, v)
    }
}

/// One-shot dense displacement operator; see [`Displacer`] for batch use.
pub fn displacement_matrix(beta: Complex64, n_c: usize) -> DMatrix<Complex64> {
    Displacer::new(n_c).matrix(beta)
}

/// ⟨a†ᵖ aᑫ⟩ by index shifting with factorial-ratio weights; O(N_c) and no
/// dense ladder matrices.
pub fn moment(state: &State, p: u32, q: u32) -> Result<Complex64> {
    if p + q > MAX_MOMENT_ORDER {
        return Err(Error::UnsupportedOrder {
            p,
            q,
            max: MAX_MOMENT_ORDER,
        });
    }
    let n_c = state.cutoff();
    let p = p as usize;
    let q = q as usize;
    let mut acc = CompensatedSum::default();
    // a†ᵖ aᑫ |n⟩ = w(n) |n − q + p⟩ with w(n) = √(n!/(n−q)!) √((n−q+p)!/(n−q)!)
    for n in q..n_c {
        let m = n - q + p;
        if m >= n_c {
            continue;
        }
        let mut w = 1.0f64;
        for j in (n - q + 1)..=n {
            w *= j as f64;
        }
        let mut w2 = 1.0f64;
        for j in (n - q + 1)..=m {
            w2 *= j as f64;
        }
        let weight = (w * w2).sqrt();
        match state {
            State::Pure(v) => {
                acc.add(v.amplitude(m).conj() * v.amplitude(n) * weight);
            }
            State::Mixed(r) => {
                // Tr(ρ a†ᵖaᑫ) picks the shifted diagonal ρ[m, n]
                acc.add(r.entry(m, n) * weight);
            }
        }
    }
    Ok(acc.value())
}

/// ρ = |ψ⟩⟨ψ|.
pub fn density_from_pure(state: &FockVector) -> DensityMatrix {
    let n = state.cutoff();
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = state.amplitude(i) * state.amplitude(j).conj();
        }
    }
    DensityMatrix { mat }
}

/// Convex combination Σ wᵢ |ψᵢ⟩⟨ψᵢ| of equal-cutoff pure states.
pub fn mix(weights: &[f64], states: &[FockVector]) -> Result<DensityMatrix> {
    if weights.len() != states.len() || states.is_empty() {
        return Err(Error::InvalidWeights {
            reason: format!(
                "need matching non-empty weights/states (got {}/{})",
                weights.len(),
                states.len()
            ),
        });
    }
    if let Some(w) = weights.iter().find(|w| **w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidWeights {
            reason: format!("negative or non-finite weight {w}"),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights {
            reason: format!("weights sum to {total}, expected 1 within 1e-12"),
        });
    }
    let n = states[0].cutoff();
    for s in states {
        if s.cutoff() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: s.cutoff(),
            });
        }
    }
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for (w, s) in weights.iter().zip(states) {
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] += s.amplitude(i) * s.amplitude(j).conj() * *w;
            }
        }
    }
    Ok(DensityMatrix { mat })
}

/// ⟨a|b⟩ with conjugation on the first argument.
pub fn overlap(a: &FockVector, b: &FockVector) -> Result<Complex64> {
    if a.cutoff() != b.cutoff() {
        return Err(Error::DimensionMismatch {
            left: a.cutoff(),
            right: b.cutoff(),
        });
    }
    let mut acc = CompensatedSum::default();
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        acc.add(x.conj() * y);
    }
    Ok(acc.value())
}
