//! Run configuration: a flat key-value namespace shared by config files and
//! command-line flags.
//!
//! Grammar: one `key = value` per line, `#` starts a comment (full-line or
//! trailing), blank lines ignored. Every key is also accepted as a CLI flag
//! `--key value`; flags override file entries, which override preset
//! entries.

use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::choose_cutoff;
use crate::model::ModelParams;
use crate::phase_space::{Convention, GridKind, GridSpec};

/// Which of the model's reduced field states a run analyzes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKindSel {
    Mixed,
    Cat,
    /// Evaluate both, mixed first; tabular outputs carry a state_kind column.
    Both,
}

impl StateKindSel {
    pub fn label(self) -> &'static str {
        match self {
            StateKindSel::Mixed => "mixed",
            StateKindSel::Cat => "cat",
            StateKindSel::Both => "both",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Lambda,
    Chit,
    BetaRe,
    AlphaRe,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Chit => "chit",
            SweepParam::BetaRe => "beta_re",
            SweepParam::AlphaRe => "alpha_re",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidateLevel {
    Quick,
    Full,
}

/// Fully merged configuration for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub lambda: Option<Complex64>,
    pub chit: Option<f64>,
    pub g: Option<f64>,
    pub delta: Option<f64>,
    pub e_drive: Option<Complex64>,
    pub t: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub state_kind: StateKindSel,
    pub mu: f64,
    pub tail_tol: f64,
    pub sweep: Option<Sweep>,
    pub l_max: usize,
    pub dist_l: usize,
    pub ps_kind: GridKind,
    pub convention: Convention,
    pub beta: Complex64,
    pub alpha: Complex64,
    pub grid: Option<GridSpec>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub preset: Option<String>,
    pub level: ValidateLevel,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: None,
            chit: None,
            g: None,
            delta: None,
            e_drive: None,
            t: None,
            theta: std::f64::consts::FRAC_PI_4,
            phi: 0.0,
            state_kind: StateKindSel::Both,
            mu: 0.0,
            tail_tol: 1e-12,
            sweep: None,
            l_max: 20,
            dist_l: 2,
            ps_kind: GridKind::Wigner,
            convention: Convention::Normalized,
            beta: Complex64::ONE,
            alpha: Complex64::ONE,
            grid: None,
            format: OutputFormat::Csv,
            out: None,
            threads: 1,
            preset: None,
            level: ValidateLevel::Quick,
        }
    }
}

/// Parse "a", "a+bi", "a-bi", or "bi" into a complex number.
pub fn parse_complex(field: &str, text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::config(field, format!("cannot parse complex number from '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(im_part) = s.strip_suffix(['i', 'j']) {
        // split off the trailing imaginary term at the last +/- that is not
        // an exponent sign
        let bytes = im_part.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&im_part[..idx], &im_part[idx..]),
            None => ("0", im_part),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| bad())?,
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str.parse::<f64>().map_err(|_| bad())?
        };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::from(s.parse::<f64>().map_err(|_| bad())?))
    }
}

fn parse_f64(field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(field, format!("cannot parse number from '{text}'")))
}

fn parse_usize(field: &str, text: &str) -> Result<usize> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(field, format!("cannot parse integer from '{text}'")))
}

/// Split a config file into ordered (key, value) pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(idx) => &raw[..idx],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                "config",
                format!("line {}: expected 'key = value', got '{raw}'", lineno + 1),
            ));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl RunConfig {
    /// Apply one key-value pair; later applications override earlier ones.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lambda" => self.lambda = Some(parse_complex(key, value)?),
            "chit" => self.chit = Some(parse_f64(key, value)?),
            "g" => self.g = Some(parse_f64(key, value)?),
            "delta" => self.delta = Some(parse_f64(key, value)?),
            "e_drive" => self.e_drive = Some(parse_complex(key, value)?),
            "t" => self.t = Some(parse_f64(key, value)?),
            "theta" => self.theta = parse_f64(key, value)?,
            "phi" => self.phi = parse_f64(key, value)?,
            "mu" => self.mu = parse_f64(key, value)?,
            "tail_tol" => self.tail_tol = parse_f64(key, value)?,
            "state_kind" => {
                self.state_kind = match value {
                    "mixed" => StateKindSel::Mixed,
                    "cat" => StateKindSel::Cat,
                    "both" => StateKindSel::Both,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected mixed|cat|both, got '{other}'"),
                        ))
                    }
                }
            }
            "sweep_param" => {
                let param = match value {
                    "lambda" => SweepParam::Lambda,
                    "chit" => SweepParam::Chit,
                    "beta_re" => SweepParam::BetaRe,
                    "alpha_re" => SweepParam::AlphaRe,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected lambda|chit|beta_re|alpha_re, got '{other}'"),
                        ))
                    }
                };
                self.sweep = Some(Sweep {
                    param,
                    ..self.sweep.unwrap_or(Sweep {
                        param,
                        start: 0.0,
                        stop: 1.0,
                        count: 2,
                    })
                });
            }
            "sweep_start" | "sweep_stop" | "sweep_count" => {
                let mut sweep = self.sweep.ok_or_else(|| {
                    Error::config(key, "set sweep_param before the sweep range")
                })?;
                match key {
                    "sweep_start" => sweep.start = parse_f64(key, value)?,
                    "sweep_stop" => sweep.stop = parse_f64(key, value)?,
                    _ => sweep.count = parse_usize(key, value)?,
                }
                self.sweep = Some(sweep);
            }
            "l_max" => self.l_max = parse_usize(key, value)?,
            "dist_l" => self.dist_l = parse_usize(key, value)?,
            "kind" => {
                self.ps_kind = match value {
                    "wigner" => GridKind::Wigner,
                    "husimi" => GridKind::Husimi,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected wigner|husimi, got '{other}'"),
                        ))
                    }
                }
            }
            "convention" => {
                self.convention = match value {
                    "paper" => Convention::Paper,
                    "normalized" => Convention::Normalized,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected paper|normalized, got '{other}'"),
                        ))
                    }
                }
            }
            "beta" => self.beta = parse_complex(key, value)?,
            "alpha" => self.alpha = parse_complex(key, value)?,
            "re_min" | "re_max" | "im_min" | "im_max" | "resolution" => {
                let mut grid = self.grid.unwrap_or(GridSpec {
                    re_min: -4.0,
                    re_max: 4.0,
                    im_min: -4.0,
                    im_max: 4.0,
                    n_re: 81,
                    n_im: 81,
                });
                match key {
                    "re_min" => grid.re_min = parse_f64(key, value)?,
                    "re_max" => grid.re_max = parse_f64(key, value)?,
                    "im_min" => grid.im_min = parse_f64(key, value)?,
                    "im_max" => grid.im_max = parse_f64(key, value)?,
                    _ => {
                        let n = parse_usize(key, value)?;
                        grid.n_re = n;
                        grid.n_im = n;
                    }
                }
                self.grid = Some(grid);
            }
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected csv|json, got '{other}'"),
                        ))
                    }
                }
            }
            "out" => self.out = (value != "-").then(|| PathBuf::from(value)),
            "threads" => {
                self.threads = parse_usize(key, value)?;
                if self.threads == 0 {
                    return Err(Error::config(key, "threads must be >= 1"));
                }
            }
            "level" => {
                self.level = match value {
                    "quick" => ValidateLevel::Quick,
                    "full" => ValidateLevel::Full,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected quick|full, got '{other}'"),
                        ))
                    }
                }
            }
            other => {
                return Err(Error::config(other, "unknown key"));
            }
        }
        Ok(())
    }

    pub fn apply_pairs<'a>(
        &mut self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<()> {
        for (key, value) in pairs {
            self.apply(key, value)?;
        }
        Ok(())
    }

    fn reduced_given(&self, param: SweepParam) -> bool {
        let sweeps = |p| self.sweep.map(|s| s.param == p).unwrap_or(false);
        match param {
            SweepParam::Lambda => self.lambda.is_some() || sweeps(SweepParam::Lambda),
            SweepParam::Chit => self.chit.is_some() || sweeps(SweepParam::Chit),
            _ => false,
        }
    }

    /// Enforce the parameter-source rules: exactly one of the raw physical
    /// set {g, delta, e_drive, t} or the reduced pair (lambda, chit), with
    /// sweeps only over reduced parameters.
    pub fn validate_params(&self) -> Result<()> {
        let raw_keys = [
            ("g", self.g.is_some()),
            ("delta", self.delta.is_some()),
            ("e_drive", self.e_drive.is_some()),
            ("t", self.t.is_some()),
        ];
        let raw_count = raw_keys.iter().filter(|(_, given)| *given).count();
        let reduced = self.reduced_given(SweepParam::Lambda) || self.reduced_given(SweepParam::Chit);
        if raw_count > 0 && reduced {
            return Err(Error::config(
                "lambda",
                "give either raw physical parameters (g, delta, e_drive, t) or the \
                 reduced pair (lambda, chit), not both",
            ));
        }
        if raw_count > 0 {
            if raw_count < 4 {
                let missing = raw_keys
                    .iter()
                    .find(|(_, given)| !given)
                    .map(|(name, _)| *name)
                    .unwrap_or("g");
                return Err(Error::config(
                    missing,
                    "raw parameter set needs all of g, delta, e_drive, t",
                ));
            }
            if self.sweep.is_some() {
                return Err(Error::config(
                    "sweep_param",
                    "sweeps require the reduced (lambda, chit) parameterization",
                ));
            }
            return Ok(());
        }
        if !self.reduced_given(SweepParam::Lambda) || !self.reduced_given(SweepParam::Chit) {
            return Err(Error::config(
                "lambda",
                "no parameter point given: set (lambda, chit) or the raw set \
                 (g, delta, e_drive, t)",
            ));
        }
        if let Some(sweep) = &self.sweep {
            let clash = match sweep.param {
                SweepParam::Lambda => self.lambda.is_some(),
                SweepParam::Chit => self.chit.is_some(),
                _ => false,
            };
            if clash {
                return Err(Error::config(
                    sweep.param.name(),
                    "given both as a fixed value and as the sweep parameter",
                ));
            }
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<()> {
        if let Some(sweep) = &self.sweep {
            if sweep.count < 2 {
                return Err(Error::config("sweep_count", "must be >= 2"));
            }
            if !(sweep.start.is_finite() && sweep.stop.is_finite() && sweep.start < sweep.stop) {
                return Err(Error::config(
                    "sweep_start",
                    format!(
                        "need finite start < stop (got {} .. {})",
                        sweep.start, sweep.stop
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Model parameters at one point, substituting the swept value if the
    /// sweep runs over a model parameter.
    pub fn params_at(&self, swept: Option<f64>) -> Result<ModelParams> {
        if let (Some(g), Some(delta), Some(e_drive), Some(t)) =
            (self.g, self.delta, self.e_drive, self.t)
        {
            return ModelParams::new(g, delta, e_drive, t, self.theta, self.phi);
        }
        let mut lambda = self.lambda;
        let mut chit = self.chit;
        if let (Some(sweep), Some(value)) = (&self.sweep, swept) {
            match sweep.param {
                SweepParam::Lambda => lambda = Some(Complex64::from(value)),
                SweepParam::Chit => chit = Some(value),
                _ => {}
            }
        }
        let lambda = lambda.ok_or_else(|| Error::config("lambda", "missing"))?;
        let chit = chit.ok_or_else(|| Error::config("chit", "missing"))?;
        ModelParams::from_reduced(lambda, chit, self.theta, self.phi)
    }

    /// One shared cutoff for a whole run: the Poisson bound at the largest
    /// branch mean over the sweep (plus the current point when fixed).
    pub fn run_cutoff(&self, extra_reach: f64) -> Result<usize> {
        let mut max_mean = 0.0f64;
        match &self.sweep {
            Some(sweep) if matches!(sweep.param, SweepParam::Lambda | SweepParam::Chit) => {
                for value in sweep.values() {
                    let params = self.params_at(Some(value))?;
                    max_mean = max_mean.max(params.branch_mean_photon());
                }
            }
            _ => {
                let params = self.params_at(None)?;
                max_mean = params.branch_mean_photon();
            }
        }
        let reach = (max_mean.sqrt() + extra_reach).powi(2);
        Ok(choose_cutoff(reach, self.tail_tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing_forms() {
        assert_eq!(parse_complex("x", "2.5").unwrap(), Complex64::new(2.5, 0.0));
        assert_eq!(
            parse_complex("x", "1.5+0.5i").unwrap(),
            Complex64::new(1.5, 0.5)
        );
        assert_eq!(
            parse_complex("x", "1.5-0.5i").unwrap(),
            Complex64::new(1.5, -0.5)
        );
        assert_eq!(parse_complex("x", "2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("x", "-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(
            parse_complex("x", "1e-3+2e-4i").unwrap(),
            Complex64::new(1e-3, 2e-4)
        );
        assert!(parse_complex("x", "nonsense").is_err());
    }

    #[test]
    fn config_text_grammar() {
        let pairs = parse_config_text(
            "# header\nlambda = 1.5   # trailing comment\n\n  chit=0.2\n",
        )
        .unwrap();
        assert_eq!(
            pairs,
            vec![
                ("lambda".to_string(), "1.5".to_string()),
                ("chit".to_string(), "0.2".to_string())
            ]
        );
        assert!(parse_config_text("just words\n").is_err());
    }

    #[test]
    fn exactly_one_parameter_source() {
        let mut only_reduced = RunConfig::default();
        only_reduced
            .apply_pairs([("lambda", "1"), ("chit", "2")])
            .unwrap();
        only_reduced.validate_params().unwrap();

        let mut both = only_reduced.clone();
        both.apply_pairs([("g", "1"), ("delta", "20"), ("e_drive", "1"), ("t", "20")])
            .unwrap();
        assert!(both.validate_params().is_err());

        let neither = RunConfig::default();
        assert!(neither.validate_params().is_err());

        let mut partial_raw = RunConfig::default();
        partial_raw.apply_pairs([("g", "1"), ("delta", "20")]).unwrap();
        assert!(partial_raw.validate_params().is_err());
    }

    #[test]
    fn swept_parameter_must_not_be_fixed() {
        let mut cfg = RunConfig::default();
        cfg.apply_pairs([
            ("lambda", "1"),
            ("chit", "2"),
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "11"),
        ])
        .unwrap();
        assert!(cfg.validate_params().is_err());
        cfg.lambda = None;
        cfg.validate_params().unwrap();
        cfg.validate_sweep().unwrap();
    }

    #[test]
    fn sweep_bounds_checked() {
        let mut cfg = RunConfig::default();
        cfg.apply_pairs([
            ("chit", "1"),
            ("sweep_param", "lambda"),
            ("sweep_start", "3"),
            ("sweep_stop", "1"),
            ("sweep_count", "5"),
        ])
        .unwrap();
        assert!(cfg.validate_sweep().is_err());
        cfg.apply("sweep_stop", "4").unwrap();
        cfg.apply("sweep_count", "1").unwrap();
        assert!(cfg.validate_sweep().is_err());
    }

    #[test]
    fn params_at_substitutes_swept_value() {
        let mut cfg = RunConfig::default();
        cfg.apply_pairs([
            ("chit", "1"),
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "5"),
        ])
        .unwrap();
        let p = cfg.params_at(Some(3.0)).unwrap();
        assert_eq!(p.lambda, Complex64::from(3.0));
        assert!((p.chit - 1.0).abs() < 1e-15);
    }
}
