//! Quasiprobability distributions over phase space.
//!
//! The Wigner function is evaluated two independent ways:
//! * [`wigner_series`] — the alternating displaced-number series
//!   W(β) = (2/π) Σ_k (−1)^k ⟨β,k|ρ|β,k⟩ with overlaps assembled from the
//!   associated-Laguerre closed form;
//! * [`wigner_parity_oracle`] — the displaced-parity expectation
//!   W(β) = (2/π) Tr[D(β)† ρ D(β) Π], Π = diag((−1)ⁿ), computed with dense
//!   matrix operations and no Laguerre evaluation anywhere on the path.
//!
//! Their pointwise agreement is the module's differential test. The Husimi
//! function Q_f(α) = ⟨α|ρ|α⟩ comes in the bare convention and a normalized
//! one dividing by π so the plane integral is 1.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, ln_factorial, CompensatedSum, Displacer, State};

/// Series terms below this are treated as converged once three in a row hit.
pub const SERIES_TERM_EPS: f64 = 1e-12;
/// Last-term magnitude above which a series value carries an accuracy
/// warning.
pub const SERIES_WARN_THRESHOLD: f64 = 1e-9;
/// Fraction of grid points cross-checked against the parity oracle.
const SPOT_CHECK_STRIDE: usize = 100;
/// Series-vs-oracle disagreement that triggers a grid warning.
const SPOT_CHECK_TOL: f64 = 1e-7;

/// Cutoff adequate for evaluating phase-space functions of a state with the
/// given photon mean at displacements up to |β| = beta_abs_max: the
/// displaced state reaches photon numbers around (√n̄ + |β|)², and both the
/// series and the parity oracle need that covered.
pub fn recommended_cutoff(mean_photon: f64, beta_abs_max: f64, tail_tol: f64) -> usize {
    let reach = (mean_photon.max(0.0).sqrt() + beta_abs_max.abs()).powi(2);
    crate::fock::choose_cutoff(reach, tail_tol)
}

/// A Wigner series value with its alternating-series error estimate.
#[derive(Clone, Copy, Debug)]
pub struct WignerEval {
    pub value: f64,
    /// Magnitude of the last retained term, on the same 2/π scale as the
    /// value; the alternating-series bound on the truncation error.
    pub last_term: f64,
    /// Number of series terms actually summed.
    pub k_used: usize,
}

impl WignerEval {
    pub fn is_converged(&self) -> bool {
        self.last_term <= SERIES_WARN_THRESHOLD
    }
}

/// L_deg^{(m)}(x) for all deg ≤ max_deg, 0 ≤ m ≤ max_m, built once per
/// evaluation point by the degree recurrence.
struct LaguerreTable {
    max_m: usize,
    data: Vec<f64>,
}

impl LaguerreTable {
    fn build(x: f64, max_deg: usize, max_m: usize) -> Self {
        let mut data = vec![0.0; (max_deg + 1) * (max_m + 1)];
        for m in 0..=max_m {
            let mf = m as f64;
            let mut prev = 1.0;
            data[m] = prev;
            if max_deg == 0 {
                continue;
            }
            let mut curr = 1.0 + mf - x;
            data[max_m + 1 + m] = curr;
            for deg in 1..max_deg {
                let df = deg as f64;
                let next = ((2.0 * df + 1.0 + mf - x) * curr - (df + mf) * prev) / (df + 1.0);
                prev = curr;
                curr = next;
                data[(deg + 1) * (max_m + 1) + m] = curr;
            }
        }
        LaguerreTable { max_m, data }
    }

    #[inline]
    fn get(&self, deg: usize, m: usize) -> f64 {
        self.data[deg * (self.max_m + 1) + m]
    }
}

/// Per-point workspace for displaced-number overlaps ⟨n|D(β)|k⟩ at fixed β,
/// sharing one Laguerre table across all k.
struct DisplacedOverlaps {
    n_c: usize,
    prefactor: f64,
    beta_pow: Vec<Complex64>,
    neg_beta_conj_pow: Vec<Complex64>,
    table: LaguerreTable,
}

impl DisplacedOverlaps {
    fn new(beta: Complex64, n_c: usize, k_max: usize) -> Self {
        let x = beta.norm_sqr();
        let max_pow = n_c.max(k_max + 1);
        let mut beta_pow = Vec::with_capacity(max_pow);
        let mut neg_pow = Vec::with_capacity(max_pow);
        beta_pow.push(Complex64::ONE);
        neg_pow.push(Complex64::ONE);
        for j in 1..max_pow {
            beta_pow.push(beta_pow[j - 1] * beta);
            neg_pow.push(neg_pow[j - 1] * (-beta.conj()));
        }
        DisplacedOverlaps {
            n_c,
            prefactor: (-0.5 * x).exp(),
            beta_pow,
            neg_beta_conj_pow: neg_pow,
            table: LaguerreTable::build(x, k_max.max(n_c), n_c.max(k_max)),
        }
    }

    /// Fill `out` with ⟨n|D(β)|k⟩ for n = 0..N_c−1.
    fn fill_row(&self, k: usize, out: &mut [Complex64]) {
        for (n, slot) in out.iter_mut().enumerate().take(self.n_c) {
            *slot = if n >= k {
                let scale = (0.5 * (ln_factorial(k) - ln_factorial(n))).exp()
                    * self.prefactor
                    * self.table.get(k, n - k);
                self.beta_pow[n - k] * scale
            } else {
                let scale = (0.5 * (ln_factorial(n) - ln_factorial(k))).exp()
                    * self.prefactor
                    * self.table.get(n, k - n);
                self.neg_beta_conj_pow[k - n] * scale
            };
        }
    }
}

fn series_term(state: &State, d: &[Complex64]) -> f64 {
    match state {
        State::Pure(v) => {
            // |⟨β,k|ψ⟩|²
            let mut acc = CompensatedSum::default();
            for (dn, an) in d.iter().zip(v.amplitudes()) {
                acc.add(dn.conj() * an);
            }
            acc.value().norm_sqr()
        }
        State::Mixed(r) => {
            // d† ρ d
            let n_c = r.cutoff();
            let mut acc = CompensatedSum::default();
            for n in 0..n_c {
                let mut row = Complex64::ZERO;
                for m in 0..n_c {
                    row += r.entry(n, m) * d[m];
                }
                acc.add(d[n].conj() * row);
            }
            acc.value().re
        }
    }
}

/// Partial sum of W(β) = (2/π) Σ_k (−1)^k ⟨β,k|ρ|β,k⟩ up to `k_max` < N_c.
///
/// Stops early once three consecutive terms fall below [`SERIES_TERM_EPS`]
/// (cat-like states have exact zeros in the displaced photon distribution,
/// so a single small term does not imply convergence). The last retained
/// term is returned as the truncation-error estimate; values whose estimate
/// exceeds [`SERIES_WARN_THRESHOLD`] must be flagged by callers, never
/// silently accepted.
pub fn wigner_series(state: &State, beta: Complex64, k_max: usize) -> Result<WignerEval> {
    let n_c = state.cutoff();
    if k_max >= n_c {
        return Err(Error::IndexOutOfRange {
            index: k_max,
            cutoff: n_c,
        });
    }
    let scale = 2.0 / std::f64::consts::PI;
    let overlaps = DisplacedOverlaps::new(beta, n_c, k_max);
    let mut row = vec![Complex64::ZERO; n_c];
    let mut acc = CompensatedSum::default();
    let mut last_term = 0.0;
    let mut k_used = 0;
    let mut tiny_run = 0;
    for k in 0..=k_max {
        overlaps.fill_row(k, &mut row);
        let t = scale * series_term(state, &row);
        let signed = if k % 2 == 0 { t } else { -t };
        acc.add(Complex64::from(signed));
        last_term = t.abs();
        k_used = k + 1;
        if last_term < SERIES_TERM_EPS {
            tiny_run += 1;
            if tiny_run >= 3 {
                break;
            }
        } else {
            tiny_run = 0;
        }
    }
    Ok(WignerEval {
        value: acc.value().re,
        last_term,
        k_used,
    })
}

/// Displaced-parity oracle W(β) = (2/π) Tr[D(β)† ρ D(β) Π] for a batch of
/// points sharing one displacement engine. Dense matrix route only.
pub fn wigner_parity_batch(state: &State, betas: &[Complex64]) -> Vec<f64> {
    let n_c = state.cutoff();
    let displacer = Displacer::new(n_c);
    let scale = 2.0 / std::f64::consts::PI;
    // Mixed states enter through their spectral decomposition: the Wigner
    // transform is linear in ρ, so W(ρ) = Σ_j p_j W(|φ_j⟩).
    let components: Vec<(f64, nalgebra::DVector<Complex64>)> = match state {
        State::Pure(v) => vec![(1.0, v.as_dvector())],
        State::Mixed(r) => {
            let eig = r.entries().clone().symmetric_eigen();
            (0..n_c)
                .filter(|j| eig.eigenvalues[*j].abs() > 1e-14)
                .map(|j| {
                    (
                        eig.eigenvalues[j],
                        nalgebra::DVector::from(eig.eigenvectors.column(j).clone_owned()),
                    )
                })
                .collect()
        }
    };
    betas
        .iter()
        .map(|beta| {
            let mut value = 0.0;
            for (weight, phi) in &components {
                let displaced = displacer.apply_adjoint(*beta, phi);
                let mut parity = 0.0;
                for (n, z) in displaced.iter().enumerate() {
                    let p = z.norm_sqr();
                    parity += if n % 2 == 0 { p } else { -p };
                }
                value += weight * parity;
            }
            scale * value
        })
        .collect()
}

/// Single-point displaced-parity oracle; see [`wigner_parity_batch`].
pub fn wigner_parity_oracle(state: &State, beta: Complex64) -> f64 {
    wigner_parity_batch(state, std::slice::from_ref(&beta))[0]
}

/// Output normalization of the Husimi function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// Bare ⟨α|ρ|α⟩.
    Paper,
    /// ⟨α|ρ|α⟩/π, integrating to 1 over the plane.
    Normalized,
}

/// Q_f(α) = ⟨α|ρ|α⟩, optionally divided by π.
pub fn husimi(state: &State, alpha: Complex64, convention: Convention) -> f64 {
    let n_c = state.cutoff();
    let coh = coherent_amplitudes(alpha, n_c);
    let bare = match state {
        State::Pure(v) => {
            let mut acc = CompensatedSum::default();
            for (cn, an) in coh.iter().zip(v.amplitudes()) {
                acc.add(cn.conj() * an);
            }
            acc.value().norm_sqr()
        }
        State::Mixed(r) => {
            let mut acc = CompensatedSum::default();
            for n in 0..n_c {
                let mut row = Complex64::ZERO;
                for m in 0..n_c {
                    row += r.entry(n, m) * coh[m];
                }
                acc.add(coh[n].conj() * row);
            }
            acc.value().re
        }
    };
    match convention {
        Convention::Paper => bare,
        Convention::Normalized => bare / std::f64::consts::PI,
    }
}

/// Which distribution a grid holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Wigner,
    Husimi,
}

/// Rectangular phase-space window with per-axis resolution (≥ 2 each).
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        GridSpec {
            re_min: -half_width,
            re_max: half_width,
            im_min: -half_width,
            im_max: half_width,
            n_re: n,
            n_im: n,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_re < 2 || self.n_im < 2 {
            return Err(Error::InvalidParams(format!(
                "grid resolution must be >= 2 per axis (got {}x{})",
                self.n_re, self.n_im
            )));
        }
        let vals = [self.re_min, self.re_max, self.im_min, self.im_max];
        if vals.iter().any(|v| !v.is_finite()) || self.re_min >= self.re_max
            || self.im_min >= self.im_max
        {
            return Err(Error::InvalidParams(format!(
                "grid window must be finite with min < max (got re [{}, {}], im [{}, {}])",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        Ok(())
    }

    fn re_axis(&self) -> Vec<f64> {
        linspace(self.re_min, self.re_max, self.n_re)
    }

    fn im_axis(&self) -> Vec<f64> {
        linspace(self.im_min, self.im_max, self.n_im)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

/// Evaluated distribution over a rectangular grid; `values[iy][ix]`
/// corresponds to β = re_axis[ix] + i·im_axis[iy].
#[derive(Clone, Debug)]
pub struct PhaseSpaceGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub kind: GridKind,
    pub convention: Convention,
}

impl PhaseSpaceGrid {
    /// Σ values·Δre·Δim, the plane-integral estimate of the grid.
    pub fn riemann_sum(&self) -> f64 {
        let d_re = (self.re_axis[self.re_axis.len() - 1] - self.re_axis[0])
            / (self.re_axis.len() - 1) as f64;
        let d_im = (self.im_axis[self.im_axis.len() - 1] - self.im_axis[0])
            / (self.im_axis.len() - 1) as f64;
        let total: f64 = self.values.iter().flatten().sum();
        total * d_re * d_im
    }

    pub fn min_value(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// An accuracy warning attached to one grid point.
#[derive(Clone, Debug)]
pub struct PointWarning {
    pub re: f64,
    pub im: f64,
    pub message: String,
}

/// Grid plus the warnings accumulated while filling it.
#[derive(Clone, Debug)]
pub struct GridResult {
    pub grid: PhaseSpaceGrid,
    pub warnings: Vec<PointWarning>,
}

/// Evaluate Wigner or Husimi over a grid. Points are independent; with
/// `threads > 1` they run on a local thread pool writing disjoint cells, and
/// serial and parallel runs produce bit-identical values. Wigner grids get
/// parity-oracle spot checks on every [`SPOT_CHECK_STRIDE`]-th point; any
/// non-converged series value or oracle mismatch lands in the warning list
/// with its coordinates.
pub fn grid_eval(
    state: &State,
    spec: &GridSpec,
    kind: GridKind,
    convention: Convention,
    threads: usize,
) -> Result<GridResult> {
    spec.validate()?;
    let re_axis = spec.re_axis();
    let im_axis = spec.im_axis();
    let n_c = state.cutoff();
    let cells: Vec<(usize, usize)> = (0..spec.n_im)
        .flat_map(|iy| (0..spec.n_re).map(move |ix| (iy, ix)))
        .collect();

    let eval_cell = |&(iy, ix): &(usize, usize)| -> Result<(f64, Option<String>)> {
        let beta = Complex64::new(re_axis[ix], im_axis[iy]);
        match kind {
            GridKind::Wigner => {
                let eval = wigner_series(state, beta, n_c - 1)?;
                let warn = (!eval.is_converged()).then(|| {
                    format!(
                        "wigner series not converged: last term {:.3e}",
                        eval.last_term
                    )
                });
                Ok((eval.value, warn))
            }
            GridKind::Husimi => Ok((husimi(state, beta, convention), None)),
        }
    };

    let results: Vec<Result<(f64, Option<String>)>> = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(eval_cell).collect())
    } else {
        cells.iter().map(eval_cell).collect()
    };

    let mut values = vec![vec![0.0; spec.n_re]; spec.n_im];
    let mut warnings = Vec::new();
    for ((iy, ix), res) in cells.iter().zip(results) {
        let (value, warn) = res?;
        values[*iy][*ix] = value;
        if let Some(message) = warn {
            warnings.push(PointWarning {
                re: re_axis[*ix],
                im: im_axis[*iy],
                message,
            });
        }
    }

    if kind == GridKind::Wigner {
        let spots: Vec<(usize, usize)> = cells
            .iter()
            .step_by(SPOT_CHECK_STRIDE)
            .copied()
            .collect();
        let betas: Vec<Complex64> = spots
            .iter()
            .map(|&(iy, ix)| Complex64::new(re_axis[ix], im_axis[iy]))
            .collect();
        let oracle = wigner_parity_batch(state, &betas);
        for (&(iy, ix), oracle_value) in spots.iter().zip(oracle) {
            let delta = (values[iy][ix] - oracle_value).abs();
            if delta > SPOT_CHECK_TOL {
                warnings.push(PointWarning {
                    re: re_axis[ix],
                    im: im_axis[iy],
                    message: format!(
                        "series/parity-oracle mismatch {delta:.3e} exceeds {SPOT_CHECK_TOL:.1e}"
                    ),
                });
            }
        }
    }

    Ok(GridResult {
        grid: PhaseSpaceGrid {
            re_axis,
            im_axis,
            values,
            kind,
            convention,
        },
        warnings,
    })
}

/// Deterministic minimum search: coarse scan of `region`, then three rounds
/// of local grid halving. Ties break toward the smallest |β|, then the
/// smallest real part, then the smallest imaginary part.
pub fn wigner_min(state: &State, region: &GridSpec) -> Result<(Complex64, f64)> {
    region.validate()?;
    let n_c = state.cutoff();
    let k_max = n_c - 1;
    let eval = |beta: Complex64| -> Result<f64> { Ok(wigner_series(state, beta, k_max)?.value) };

    let better = |cand: (Complex64, f64), best: (Complex64, f64)| -> bool {
        if cand.1 != best.1 {
            return cand.1 < best.1;
        }
        let (cn, bn) = (cand.0.norm_sqr(), best.0.norm_sqr());
        if cn != bn {
            return cn < bn;
        }
        if cand.0.re != best.0.re {
            return cand.0.re < best.0.re;
        }
        cand.0.im < best.0.im
    };

    let re_axis = region.re_axis();
    let im_axis = region.im_axis();
    let mut best: Option<(Complex64, f64)> = None;
    for &im in &im_axis {
        for &re in &re_axis {
            let beta = Complex64::new(re, im);
            let cand = (beta, eval(beta)?);
            if best.is_none() || better(cand, best.unwrap()) {
                best = Some(cand);
            }
        }
    }
    let mut best = best.expect("grid has at least 4 points");

    let mut h_re = (region.re_max - region.re_min) / (region.n_re - 1) as f64;
    let mut h_im = (region.im_max - region.im_min) / (region.n_im - 1) as f64;
    for _ in 0..3 {
        h_re /= 2.0;
        h_im /= 2.0;
        let center = best.0;
        for dy in -2i32..=2 {
            for dx in -2i32..=2 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let beta =
                    Complex64::new(center.re + dx as f64 * h_re, center.im + dy as f64 * h_im);
                let cand = (beta, eval(beta)?);
                if better(cand, best) {
                    best = cand;
                }
            }
        }
    }
    Ok(best)
}
