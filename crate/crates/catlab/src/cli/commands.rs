//! The witness, photon-dist, and phase-space commands: sweep evaluation,
//! summaries, and CSV/JSON rendering.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cli::config::{OutputFormat, RunConfig, StateKindSel, SweepParam};
use crate::cli::output::{csv_cell, format_float, Json};
use crate::cli::preset::Preset;
use crate::error::{Error, Result};
use crate::fock::State;
use crate::model::{model_state, StateKind};
use crate::phase_space::{
    grid_eval, husimi, wigner_series, Convention, GridKind, PointWarning,
};
use crate::witness;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How far a reproduced value may sit from a published claim.
const CLAIM_TOLERANCE: f64 = 0.02;

/// One table row: the swept value, which state kind it describes, the value
/// cells (None renders as an empty cell / JSON null), and a warning note.
struct SweepRow {
    swept: f64,
    kind: &'static str,
    cells: Vec<Option<f64>>,
    warning: String,
}

/// Assembled tabular output, rendered to CSV or JSON.
struct TableDoc {
    command: &'static str,
    metadata: Vec<(String, String)>,
    swept_name: String,
    columns: Vec<String>,
    rows: Vec<SweepRow>,
    summaries: Vec<String>,
    discrepancies: Vec<String>,
}

impl TableDoc {
    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# catlab {VERSION}\n"));
        out.push_str(&format!("# command: {}\n", self.command));
        for (key, value) in &self.metadata {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        for line in &self.discrepancies {
            out.push_str(&format!("# discrepancy: {line}\n"));
        }
        out.push_str(&self.swept_name);
        out.push_str(",state_kind");
        for col in &self.columns {
            out.push(',');
            out.push_str(col);
        }
        out.push_str(",warnings\n");
        for row in &self.rows {
            out.push_str(&format_float(row.swept));
            out.push(',');
            out.push_str(row.kind);
            for cell in &row.cells {
                out.push(',');
                out.push_str(&csv_cell(*cell));
            }
            out.push(',');
            out.push_str(&row.warning.replace(',', ";"));
            out.push('\n');
        }
        for line in &self.summaries {
            out.push_str(&format!("# summary: {line}\n"));
        }
        out
    }

    fn render_json(&self) -> String {
        let mut metadata = vec![
            ("version".to_string(), Json::str(VERSION)),
            ("command".to_string(), Json::str(self.command)),
        ];
        metadata.extend(
            self.metadata
                .iter()
                .map(|(k, v)| (k.clone(), Json::str(v.clone()))),
        );
        let axis: Vec<Json> = self.rows.iter().map(|r| Json::Num(r.swept)).collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = vec![
                    (self.swept_name.clone(), Json::Num(row.swept)),
                    ("state_kind".to_string(), Json::str(row.kind)),
                ];
                for (col, cell) in self.columns.iter().zip(&row.cells) {
                    obj.push((col.clone(), Json::opt_num(*cell)));
                }
                if !row.warning.is_empty() {
                    obj.push(("warning".to_string(), Json::str(row.warning.clone())));
                }
                Json::Obj(obj)
            })
            .collect();
        let warnings: Vec<Json> = self
            .rows
            .iter()
            .filter(|r| !r.warning.is_empty())
            .map(|r| {
                Json::Obj(vec![
                    (self.swept_name.clone(), Json::Num(r.swept)),
                    ("state_kind".to_string(), Json::str(r.kind)),
                    ("message".to_string(), Json::str(r.warning.clone())),
                ])
            })
            .collect();
        let doc = Json::Obj(vec![
            ("metadata".to_string(), Json::Obj(metadata)),
            (
                "axes".to_string(),
                Json::Obj(vec![(self.swept_name.clone(), Json::Arr(axis))]),
            ),
            ("rows".to_string(), Json::Arr(rows)),
            (
                "summary".to_string(),
                Json::Arr(
                    self.summaries
                        .iter()
                        .map(|s| Json::str(s.clone()))
                        .collect(),
                ),
            ),
            (
                "discrepancies".to_string(),
                Json::Arr(
                    self.discrepancies
                        .iter()
                        .map(|s| Json::str(s.clone()))
                        .collect(),
                ),
            ),
            ("warnings".to_string(), Json::Arr(warnings)),
        ]);
        let mut text = doc.render();
        text.push('\n');
        text
    }
}

fn state_kinds(cfg: &RunConfig) -> Vec<(&'static str, StateKind)> {
    match cfg.state_kind {
        StateKindSel::Mixed => vec![("mixed", StateKind::Mixed)],
        StateKindSel::Cat => vec![("cat", StateKind::Cat { mu: cfg.mu })],
        StateKindSel::Both => vec![
            ("mixed", StateKind::Mixed),
            ("cat", StateKind::Cat { mu: cfg.mu }),
        ],
    }
}

enum PointState {
    Ready(State),
    Degenerate,
}

fn state_or_degenerate(
    cfg: &RunConfig,
    swept: Option<f64>,
    kind: StateKind,
    n_c: usize,
) -> Result<PointState> {
    let params = cfg.params_at(swept)?;
    match model_state(&params, kind, n_c) {
        Ok(state) => Ok(PointState::Ready(state)),
        Err(Error::DegenerateOutcome { .. }) => Ok(PointState::Degenerate),
        Err(e) => Err(e),
    }
}

const DEGENERATE_NOTE: &str = "degenerate cat outcome (detection probability < 1e-12)";

fn run_indexed<T, F>(count: usize, threads: usize, eval: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| (0..count).into_par_iter().map(&eval).collect())
    } else {
        (0..count).map(eval).collect()
    }
}

fn shared_metadata(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut meta = Vec::new();
    if let Some(preset) = &cfg.preset {
        meta.push(("preset".to_string(), preset.clone()));
    }
    meta.push(("state_kind".to_string(), cfg.state_kind.label().to_string()));
    meta.push(("theta".to_string(), format_float(cfg.theta)));
    meta.push(("phi".to_string(), format_float(cfg.phi)));
    if cfg.state_kind != StateKindSel::Mixed {
        meta.push(("mu".to_string(), format_float(cfg.mu)));
    }
    if let Some(lambda) = cfg.lambda {
        meta.push(("lambda".to_string(), format_complex(lambda)));
    }
    if let Some(chit) = cfg.chit {
        meta.push(("chit".to_string(), format_float(chit)));
    }
    if let (Some(g), Some(delta), Some(e_drive), Some(t)) = (cfg.g, cfg.delta, cfg.e_drive, cfg.t)
    {
        meta.push(("g".to_string(), format_float(g)));
        meta.push(("delta".to_string(), format_float(delta)));
        meta.push(("e_drive".to_string(), format_complex(e_drive)));
        meta.push(("t".to_string(), format_float(t)));
        if let Ok(params) = cfg.params_at(None) {
            if let Some(warning) = params.dispersive_warning() {
                meta.push(("dispersive_warning".to_string(), warning));
            }
        }
    }
    if let Some(sweep) = &cfg.sweep {
        meta.push((
            "sweep".to_string(),
            format!(
                "{} from {} to {} count {}",
                sweep.param.name(),
                format_float(sweep.start),
                format_float(sweep.stop),
                sweep.count
            ),
        ));
    }
    meta.push(("tail_tol".to_string(), format!("{:e}", cfg.tail_tol)));
    meta
}

fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format_float(z.re)
    } else if z.im >= 0.0 {
        format!("{}+{}i", format_float(z.re), format_float(z.im))
    } else {
        format!("{}-{}i", format_float(z.re), format_float(-z.im))
    }
}

/// Minimum of defined cells in one column, with the swept value where it
/// occurs. Ties keep the earliest sweep point.
fn column_min(rows: &[&SweepRow], col: usize) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for row in rows {
        if let Some(v) = row.cells[col] {
            if best.map(|(bv, _)| v < bv).unwrap_or(true) {
                best = Some((v, row.swept));
            }
        }
    }
    best
}

fn sign_changes(rows: &[&SweepRow], col: usize) -> usize {
    // values below the noise floor carry no sign information
    const FLOOR: f64 = 1e-12;
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for row in rows {
        if let Some(v) = row.cells[col] {
            if v.abs() <= FLOOR {
                continue;
            }
            if let Some(p) = prev {
                if (p < 0.0) != (v < 0.0) {
                    changes += 1;
                }
            }
            prev = Some(v);
        }
    }
    changes
}

/// Witness sweep: mean_n, Q_M, S_x, S_p, g², d₁ per sweep point and state
/// kind.
pub fn cmd_witness(cfg: &RunConfig, preset: Option<&Preset>) -> Result<String> {
    cfg.validate_params()?;
    cfg.validate_sweep()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep_param", "the witness command needs a sweep"))?;
    if !matches!(sweep.param, SweepParam::Lambda | SweepParam::Chit) {
        return Err(Error::config(
            "sweep_param",
            "witness sweeps run over lambda or chit",
        ));
    }
    let kinds = state_kinds(cfg);
    let n_c = cfg.run_cutoff(0.0)?;
    let values = sweep.values();

    let rows_nested: Vec<Vec<SweepRow>> = run_indexed(values.len(), cfg.threads, |i| {
        let swept = values[i];
        let mut rows = Vec::with_capacity(kinds.len());
        for (label, kind) in &kinds {
            let row = match state_or_degenerate(cfg, Some(swept), *kind, n_c)? {
                PointState::Ready(state) => {
                    let report = witness::witness_report(&state, 0)?;
                    SweepRow {
                        swept,
                        kind: label,
                        cells: vec![
                            Some(report.mean_n),
                            report.mandel_q,
                            Some(report.s_x),
                            Some(report.s_p),
                            report.g2,
                            Some(report.d1),
                        ],
                        warning: String::new(),
                    }
                }
                PointState::Degenerate => SweepRow {
                    swept,
                    kind: label,
                    cells: vec![None; 6],
                    warning: DEGENERATE_NOTE.to_string(),
                },
            };
            rows.push(row);
        }
        Ok(rows)
    })?;
    let rows: Vec<SweepRow> = rows_nested.into_iter().flatten().collect();

    let columns = ["mean_n", "mandel_q", "s_x", "s_p", "g2", "d1"];
    let mut summaries = Vec::new();
    for (label, _) in &kinds {
        let kind_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.kind == *label).collect();
        if let Some((v, at)) = column_min(&kind_rows, 1) {
            summaries.push(format!(
                "{label} mandel_q: min {} at {}={}, sign changes {}",
                format_float(v),
                sweep.param.name(),
                format_float(at),
                sign_changes(&kind_rows, 1)
            ));
        }
        for (col, name) in [(2, "s_x"), (4, "g2"), (5, "d1")] {
            if let Some((v, at)) = column_min(&kind_rows, col) {
                summaries.push(format!(
                    "{label} {name}: min {} at {}={}",
                    format_float(v),
                    sweep.param.name(),
                    format_float(at)
                ));
            }
        }
    }

    let mut discrepancies = Vec::new();
    if kinds.iter().any(|(l, _)| *l == "mixed") {
        discrepancies.push(
            "mixed-state mandel_q is identically zero for this model (equal-mean \
             Poissonian mixture); sub-Poissonian behaviour appears only for the cat state"
                .to_string(),
        );
    }

    let mut metadata = shared_metadata(cfg);
    metadata.push(("cutoff".to_string(), n_c.to_string()));
    let _ = preset;

    Ok(TableDoc {
        command: "witness",
        metadata,
        swept_name: sweep.param.name().to_string(),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        rows,
        summaries,
        discrepancies,
    }
    .render(cfg.format))
}

/// Photon-distribution command: P(dist_l) along a sweep, or the full P(l)
/// table at a fixed parameter point.
pub fn cmd_photon_dist(cfg: &RunConfig, preset: Option<&Preset>) -> Result<String> {
    cfg.validate_params()?;
    cfg.validate_sweep()?;
    let kinds = state_kinds(cfg);
    let n_c = cfg.run_cutoff(0.0)?;

    if let Some(sweep) = &cfg.sweep {
        if !matches!(sweep.param, SweepParam::Lambda | SweepParam::Chit) {
            return Err(Error::config(
                "sweep_param",
                "photon-dist sweeps run over lambda or chit",
            ));
        }
        if cfg.dist_l >= n_c {
            return Err(Error::config(
                "dist_l",
                format!("{} is outside the cutoff {n_c}", cfg.dist_l),
            ));
        }
        let values = sweep.values();
        let rows_nested: Vec<Vec<SweepRow>> = run_indexed(values.len(), cfg.threads, |i| {
            let swept = values[i];
            let mut rows = Vec::with_capacity(kinds.len());
            for (label, kind) in &kinds {
                let row = match state_or_degenerate(cfg, Some(swept), *kind, n_c)? {
                    PointState::Ready(state) => {
                        let pn = witness::photon_distribution(&state, cfg.dist_l)?;
                        SweepRow {
                            swept,
                            kind: label,
                            cells: vec![Some(pn[cfg.dist_l])],
                            warning: String::new(),
                        }
                    }
                    PointState::Degenerate => SweepRow {
                        swept,
                        kind: label,
                        cells: vec![None],
                        warning: DEGENERATE_NOTE.to_string(),
                    },
                };
                rows.push(row);
            }
            Ok(rows)
        })?;
        let rows: Vec<SweepRow> = rows_nested.into_iter().flatten().collect();

        let mut summaries = Vec::new();
        let mut discrepancies = Vec::new();
        for (label, _) in &kinds {
            let kind_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.kind == *label).collect();
            let mut peak: Option<(f64, f64)> = None;
            for row in &kind_rows {
                if let Some(v) = row.cells[0] {
                    if peak.map(|(pv, _)| v > pv).unwrap_or(true) {
                        peak = Some((v, row.swept));
                    }
                }
            }
            if let Some((v, at)) = peak {
                summaries.push(format!(
                    "{label} p_l: peak {} at {}={}",
                    format_float(v),
                    sweep.param.name(),
                    format_float(at)
                ));
                if let Some(claim) = preset.and_then(|p| p.claim) {
                    let reproduced = (v - claim.value).abs() <= CLAIM_TOLERANCE;
                    let verdict = if reproduced { "reproduced" } else { "not-reproduced" };
                    summaries.push(format!(
                        "{label} claim check ({}): claimed {}, computed {} -> {verdict}",
                        claim.what,
                        format_float(claim.value),
                        format_float(v)
                    ));
                    if !reproduced {
                        discrepancies.push(format!(
                            "{label}: claimed {} = {}, computed {}",
                            claim.what,
                            format_float(claim.value),
                            format_float(v)
                        ));
                    }
                }
            }
        }

        let mut metadata = shared_metadata(cfg);
        metadata.push(("dist_l".to_string(), cfg.dist_l.to_string()));
        metadata.push(("cutoff".to_string(), n_c.to_string()));

        return Ok(TableDoc {
            command: "photon-dist",
            metadata,
            swept_name: sweep.param.name().to_string(),
            columns: vec!["p_l".to_string()],
            rows,
            summaries,
            discrepancies,
        }
        .render(cfg.format));
    }

    // distribution mode: P(l) vs l at a fixed point
    if cfg.l_max >= n_c {
        return Err(Error::config(
            "l_max",
            format!("{} is outside the cutoff {n_c} (raise tail_tol or lower l_max)", cfg.l_max),
        ));
    }
    let mut distributions: Vec<(&'static str, Option<Vec<f64>>)> = Vec::new();
    for (label, kind) in &kinds {
        match state_or_degenerate(cfg, None, *kind, n_c)? {
            PointState::Ready(state) => {
                distributions.push((label, Some(witness::photon_distribution(&state, cfg.l_max)?)));
            }
            PointState::Degenerate => distributions.push((label, None)),
        }
    }
    let rows: Vec<SweepRow> = (0..=cfg.l_max)
        .map(|l| SweepRow {
            swept: l as f64,
            kind: "-",
            cells: distributions
                .iter()
                .map(|(_, pn)| pn.as_ref().map(|pn| pn[l]))
                .collect(),
            warning: if distributions.iter().any(|(_, pn)| pn.is_none()) {
                DEGENERATE_NOTE.to_string()
            } else {
                String::new()
            },
        })
        .collect();

    let mut summaries = Vec::new();
    let mut discrepancies = Vec::new();
    for (idx, (label, pn)) in distributions.iter().enumerate() {
        let _ = idx;
        if let Some(pn) = pn {
            let (argmax, max) = pn
                .iter()
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
                    if *v > bv {
                        (i, *v)
                    } else {
                        (bi, bv)
                    }
                });
            summaries.push(format!(
                "{label} p_l: max {} at l={argmax}",
                format_float(max)
            ));
            if let Some(claim) = preset.and_then(|p| p.claim) {
                let reproduced = (max - claim.value).abs() <= CLAIM_TOLERANCE;
                let verdict = if reproduced { "reproduced" } else { "not-reproduced" };
                summaries.push(format!(
                    "{label} claim check ({}): claimed {}, computed {} -> {verdict}",
                    claim.what,
                    format_float(claim.value),
                    format_float(max)
                ));
                if !reproduced {
                    discrepancies.push(format!(
                        "{label}: claimed {} = {}, computed {} at l={argmax}",
                        claim.what,
                        format_float(claim.value),
                        format_float(max)
                    ));
                }
            }
        }
    }
    if kinds.iter().any(|(l, _)| *l == "mixed") {
        discrepancies.push(
            "mixed-state P(l) is exactly Poissonian with mean |lambda|^2(2-2cos(chit))"
                .to_string(),
        );
    }

    let mut metadata = shared_metadata(cfg);
    metadata.push(("l_max".to_string(), cfg.l_max.to_string()));
    metadata.push(("cutoff".to_string(), n_c.to_string()));

    Ok(TableDoc {
        command: "photon-dist",
        metadata,
        swept_name: "l".to_string(),
        columns: distributions
            .iter()
            .map(|(label, _)| format!("p_{label}"))
            .collect(),
        rows,
        summaries,
        discrepancies,
    }
    .render(cfg.format))
}

/// Phase-space command: 1D sweeps of W or Q_f, or a full 2D grid dump.
pub fn cmd_phase_space(cfg: &RunConfig, preset: Option<&Preset>) -> Result<String> {
    cfg.validate_params()?;
    cfg.validate_sweep()?;
    let _ = preset;
    match &cfg.sweep {
        Some(_) => phase_space_sweep(cfg),
        None => phase_space_grid(cfg),
    }
}

fn phase_space_sweep(cfg: &RunConfig) -> Result<String> {
    let sweep = cfg.sweep.as_ref().expect("checked by caller");
    let kinds = state_kinds(cfg);
    match (sweep.param, cfg.ps_kind) {
        (SweepParam::BetaRe, GridKind::Husimi) => {
            return Err(Error::config(
                "sweep_param",
                "beta_re sweeps apply to kind=wigner (use alpha_re for husimi)",
            ));
        }
        (SweepParam::AlphaRe, GridKind::Wigner) => {
            return Err(Error::config(
                "sweep_param",
                "alpha_re sweeps apply to kind=husimi (use beta_re for wigner)",
            ));
        }
        _ => {}
    }
    let value_name = match cfg.ps_kind {
        GridKind::Wigner => "w",
        GridKind::Husimi => "q_f",
    };
    let values = sweep.values();
    let point_sweep = matches!(sweep.param, SweepParam::BetaRe | SweepParam::AlphaRe);
    let max_reach = if point_sweep {
        values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        match cfg.ps_kind {
            GridKind::Wigner => cfg.beta.norm(),
            GridKind::Husimi => cfg.alpha.norm(),
        }
    };
    // Husimi needs no headroom beyond the state support; the Wigner series
    // must cover the displaced reach.
    let extra = match cfg.ps_kind {
        GridKind::Wigner => max_reach,
        GridKind::Husimi => 0.0,
    };
    let n_c = cfg.run_cutoff(extra)?;

    let rows_nested: Vec<Vec<SweepRow>> = run_indexed(values.len(), cfg.threads, |i| {
        let swept = values[i];
        let model_swept = (!point_sweep).then_some(swept);
        let mut rows = Vec::with_capacity(kinds.len());
        for (label, kind) in &kinds {
            let row = match state_or_degenerate(cfg, model_swept, *kind, n_c)? {
                PointState::Ready(state) => {
                    let (value, warning) = match cfg.ps_kind {
                        GridKind::Wigner => {
                            let beta = if point_sweep {
                                Complex64::from(swept)
                            } else {
                                cfg.beta
                            };
                            let eval = wigner_series(&state, beta, n_c - 1)?;
                            let warning = if eval.is_converged() {
                                String::new()
                            } else {
                                format!(
                                    "wigner series not converged: last term {:.3e}",
                                    eval.last_term
                                )
                            };
                            (eval.value, warning)
                        }
                        GridKind::Husimi => {
                            let alpha = if point_sweep {
                                Complex64::from(swept)
                            } else {
                                cfg.alpha
                            };
                            (husimi(&state, alpha, cfg.convention), String::new())
                        }
                    };
                    SweepRow {
                        swept,
                        kind: label,
                        cells: vec![Some(value)],
                        warning,
                    }
                }
                PointState::Degenerate => SweepRow {
                    swept,
                    kind: label,
                    cells: vec![None],
                    warning: DEGENERATE_NOTE.to_string(),
                },
            };
            rows.push(row);
        }
        Ok(rows)
    })?;
    let rows: Vec<SweepRow> = rows_nested.into_iter().flatten().collect();

    let mut summaries = Vec::new();
    for (label, _) in &kinds {
        let kind_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.kind == *label).collect();
        if let Some((v, at)) = column_min(&kind_rows, 0) {
            match cfg.ps_kind {
                GridKind::Wigner => {
                    let negatives = kind_rows
                        .iter()
                        .filter(|r| r.cells[0].map(|v| v < 0.0).unwrap_or(false))
                        .count();
                    summaries.push(format!(
                        "{label} w: min {} at {}={}, negative points {negatives}",
                        format_float(v),
                        sweep.param.name(),
                        format_float(at)
                    ));
                }
                GridKind::Husimi => {
                    summaries.push(format!(
                        "{label} q_f: min {} at {}={} (near-zero values witness nonclassicality)",
                        format_float(v),
                        sweep.param.name(),
                        format_float(at)
                    ));
                }
            }
        }
    }

    let mut metadata = shared_metadata(cfg);
    metadata.push((
        "kind".to_string(),
        match cfg.ps_kind {
            GridKind::Wigner => "wigner".to_string(),
            GridKind::Husimi => "husimi".to_string(),
        },
    ));
    metadata.push((
        "convention".to_string(),
        match cfg.convention {
            Convention::Paper => "paper".to_string(),
            Convention::Normalized => "normalized".to_string(),
        },
    ));
    if !point_sweep {
        match cfg.ps_kind {
            GridKind::Wigner => metadata.push(("beta".to_string(), format_complex(cfg.beta))),
            GridKind::Husimi => metadata.push(("alpha".to_string(), format_complex(cfg.alpha))),
        }
    }
    metadata.push(("cutoff".to_string(), n_c.to_string()));

    Ok(TableDoc {
        command: "phase-space",
        metadata,
        swept_name: sweep.param.name().to_string(),
        columns: vec![value_name.to_string()],
        rows,
        summaries,
        discrepancies: Vec::new(),
    }
    .render(cfg.format))
}

fn phase_space_grid(cfg: &RunConfig) -> Result<String> {
    let grid_spec = cfg.grid.ok_or_else(|| {
        Error::config(
            "re_min",
            "grid mode needs a window (re_min/re_max/im_min/im_max/resolution) or a sweep",
        )
    })?;
    let kind = match cfg.state_kind {
        StateKindSel::Mixed => StateKind::Mixed,
        StateKindSel::Cat => StateKind::Cat { mu: cfg.mu },
        StateKindSel::Both => {
            return Err(Error::config(
                "state_kind",
                "grid output holds one state: choose mixed or cat",
            ))
        }
    };
    let corner = grid_spec
        .re_min
        .abs()
        .max(grid_spec.re_max.abs())
        .hypot(grid_spec.im_min.abs().max(grid_spec.im_max.abs()));
    let extra = match cfg.ps_kind {
        GridKind::Wigner => corner,
        GridKind::Husimi => 0.0,
    };
    let n_c = cfg.run_cutoff(extra)?;
    let params = cfg.params_at(None)?;
    let state = model_state(&params, kind, n_c)?;
    let result = grid_eval(&state, &grid_spec, cfg.ps_kind, cfg.convention, cfg.threads)?;

    let mut metadata = shared_metadata(cfg);
    metadata.push((
        "kind".to_string(),
        match cfg.ps_kind {
            GridKind::Wigner => "wigner".to_string(),
            GridKind::Husimi => "husimi".to_string(),
        },
    ));
    metadata.push((
        "convention".to_string(),
        match cfg.convention {
            Convention::Paper => "paper".to_string(),
            Convention::Normalized => "normalized".to_string(),
        },
    ));
    metadata.push(("cutoff".to_string(), n_c.to_string()));
    metadata.push((
        "normalization_check".to_string(),
        format_float(result.grid.riemann_sum()),
    ));
    metadata.push(("min_value".to_string(), format_float(result.grid.min_value())));
    metadata.push(("max_value".to_string(), format_float(result.grid.max_value())));
    metadata.push((
        "accuracy_warnings".to_string(),
        result.warnings.len().to_string(),
    ));

    match cfg.format {
        OutputFormat::Csv => Ok(render_grid_csv(&metadata, &result.grid, &result.warnings)),
        OutputFormat::Json => Ok(render_grid_json(&metadata, &result.grid, &result.warnings)),
    }
}

fn render_grid_csv(
    metadata: &[(String, String)],
    grid: &crate::phase_space::PhaseSpaceGrid,
    warnings: &[PointWarning],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("# catlab {VERSION}\n"));
    out.push_str("# command: phase-space\n");
    for (key, value) in metadata {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    for warning in warnings {
        out.push_str(&format!(
            "# warning: at beta = ({}, {}): {}\n",
            format_float(warning.re),
            format_float(warning.im),
            warning.message
        ));
    }
    // matrix layout: first row is the re axis, first column the im axis
    for re in &grid.re_axis {
        out.push(',');
        out.push_str(&format_float(*re));
    }
    out.push('\n');
    for (iy, im) in grid.im_axis.iter().enumerate() {
        out.push_str(&format_float(*im));
        for value in &grid.values[iy] {
            out.push(',');
            out.push_str(&format_float(*value));
        }
        out.push('\n');
    }
    out
}

fn render_grid_json(
    metadata: &[(String, String)],
    grid: &crate::phase_space::PhaseSpaceGrid,
    warnings: &[PointWarning],
) -> String {
    let mut meta = vec![
        ("version".to_string(), Json::str(VERSION)),
        ("command".to_string(), Json::str("phase-space")),
    ];
    meta.extend(
        metadata
            .iter()
            .map(|(k, v)| (k.clone(), Json::str(v.clone()))),
    );
    let doc = Json::Obj(vec![
        ("metadata".to_string(), Json::Obj(meta)),
        (
            "axes".to_string(),
            Json::Obj(vec![
                (
                    "re".to_string(),
                    Json::Arr(grid.re_axis.iter().map(|v| Json::Num(*v)).collect()),
                ),
                (
                    "im".to_string(),
                    Json::Arr(grid.im_axis.iter().map(|v| Json::Num(*v)).collect()),
                ),
            ]),
        ),
        (
            "values".to_string(),
            Json::Arr(
                grid.values
                    .iter()
                    .map(|row| Json::Arr(row.iter().map(|v| Json::Num(*v)).collect()))
                    .collect(),
            ),
        ),
        ("discrepancies".to_string(), Json::Arr(Vec::new())),
        (
            "warnings".to_string(),
            Json::Arr(
                warnings
                    .iter()
                    .map(|w| {
                        Json::Obj(vec![
                            ("re".to_string(), Json::Num(w.re)),
                            ("im".to_string(), Json::Num(w.im)),
                            ("message".to_string(), Json::str(w.message.clone())),
                        ])
                    })
                    .collect(),
            ),
        ),
    ]);
    let mut text = doc.render();
    text.push('\n');
    text
}
