//! Command-line front end: subcommand dispatch, the flat key-value config
//! namespace, figure presets, and deterministic CSV/JSON emission.
//!
//! `catlab <witness|photon-dist|phase-space|validate> [--preset NAME]
//! [--config FILE] [--key value ...] [--out PATH] [--format csv|json]
//! [--threads N]`
//!
//! Exit codes: 0 success, 1 validation failure, 2 config error.

pub mod commands;
pub mod config;
pub mod output;
pub mod preset;
pub mod validate;

use std::fs;
use std::io::Write;

use crate::error::{Error, Result};
use config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Witness,
    PhotonDist,
    PhaseSpace,
    Validate,
}

impl Command {
    pub fn parse(name: &str) -> Option<Command> {
        match name {
            "witness" => Some(Command::Witness),
            "photon-dist" => Some(Command::PhotonDist),
            "phase-space" => Some(Command::PhaseSpace),
            "validate" => Some(Command::Validate),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Witness => "witness",
            Command::PhotonDist => "photon-dist",
            Command::PhaseSpace => "phase-space",
            Command::Validate => "validate",
        }
    }
}

const USAGE: &str = "\
catlab — driven dispersive atom-cavity field states and their
nonclassicality witnesses

USAGE:
    catlab <COMMAND> [--key value ...]

COMMANDS:
    witness       sweep scalar witnesses (mean_n, mandel_q, s_x, s_p, g2, d1)
    photon-dist   photon number distribution P(l), swept or at a fixed point
    phase-space   Wigner or Husimi values, 1D sweeps or 2D grids
    validate      run every differential oracle (--level quick|full)

COMMON FLAGS (every config key is also a flag):
    --preset NAME        figure preset (fig2a..fig7b); alone it fully
                         determines the output
    --config FILE        load `key = value` lines ('#' comments); CLI
                         flags override the file
    --lambda C --chit X  reduced model parameters (C complex: 1.5, 2+0.5i)
    --g --delta --e_drive --t
                         raw physical parameters (all four together,
                         exclusive with lambda/chit)
    --theta --phi --mu   superposition angles and cat detection phase
    --state_kind K       mixed | cat | both
    --sweep_param P --sweep_start A --sweep_stop B --sweep_count N
                         P in lambda | chit | beta_re | alpha_re
    --kind K             phase-space: wigner | husimi
    --convention C       phase-space: paper | normalized
    --beta C / --alpha C phase-space evaluation point for 1D model sweeps
    --re_min --re_max --im_min --im_max --resolution
                         phase-space grid window
    --l_max N --dist_l N photon-dist table depth / swept P(l) index
    --tail_tol X         Fock cutoff tail tolerance (default 1e-12)
    --format F           csv | json        --out PATH (default stdout)
    --threads N          worker threads (default $CATLAB_THREADS or 1)

EXIT CODES: 0 success, 1 validation failure, 2 config error
";

/// Entry point for the binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    match run_inner(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("catlab: {e}");
            2
        }
    }
}

fn run_inner(args: &[String]) -> Result<i32> {
    if args.is_empty()
        || args[0] == "-h"
        || args[0] == "--help"
        || args[0] == "help"
    {
        print!("{USAGE}");
        return Ok(0);
    }
    if args[0] == "--version" {
        println!("catlab {}", commands::VERSION);
        return Ok(0);
    }
    let command = Command::parse(&args[0]).ok_or_else(|| {
        Error::config(
            "command",
            format!(
                "unknown command '{}'; expected witness|photon-dist|phase-space|validate",
                args[0]
            ),
        )
    })?;

    let mut cli_pairs: Vec<(String, String)> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let key = arg.strip_prefix("--").ok_or_else(|| {
            Error::config("command", format!("expected --key value pairs, got '{arg}'"))
        })?;
        let value = args.get(i + 1).ok_or_else(|| {
            Error::config(key, "missing value after flag")
        })?;
        cli_pairs.push((key.to_string(), value.clone()));
        i += 2;
    }

    let file_pairs = match cli_pairs.iter().rev().find(|(k, _)| k == "config") {
        Some((_, path)) => config::parse_config_text(&fs::read_to_string(path).map_err(|e| {
            Error::config("config", format!("cannot read '{path}': {e}"))
        })?)?,
        None => Vec::new(),
    };

    // preset < config file < CLI flags
    let preset_name = cli_pairs
        .iter()
        .rev()
        .find(|(k, _)| k == "preset")
        .or_else(|| file_pairs.iter().rev().find(|(k, _)| k == "preset"))
        .map(|(_, v)| v.clone());
    let preset = match &preset_name {
        Some(name) => Some(preset::find(name).ok_or_else(|| {
            Error::config(
                "preset",
                format!(
                    "unknown preset '{name}'; available: {}",
                    preset::names().join(", ")
                ),
            )
        })?),
        None => None,
    };
    if let Some(p) = preset {
        if p.command != command {
            return Err(Error::config(
                "preset",
                format!(
                    "preset '{}' belongs to the {} command",
                    p.name,
                    p.command.name()
                ),
            ));
        }
    }

    let mut cfg = RunConfig::default();
    if let Ok(threads) = std::env::var("CATLAB_THREADS") {
        cfg.apply("threads", &threads)?;
    }
    if let Some(p) = preset {
        cfg.apply_pairs(p.pairs.iter().copied())?;
        cfg.preset = preset_name.clone();
    }
    for (key, value) in file_pairs
        .iter()
        .chain(cli_pairs.iter())
        .filter(|(k, _)| k != "preset" && k != "config")
    {
        cfg.apply(key, value)?;
    }

    match command {
        Command::Validate => {
            let (report, all_passed) = validate::cmd_validate(cfg.level)?;
            print!("{report}");
            Ok(if all_passed { 0 } else { 1 })
        }
        Command::Witness => {
            let text = commands::cmd_witness(&cfg, preset)?;
            write_output(&cfg, &text)?;
            Ok(0)
        }
        Command::PhotonDist => {
            let text = commands::cmd_photon_dist(&cfg, preset)?;
            write_output(&cfg, &text)?;
            Ok(0)
        }
        Command::PhaseSpace => {
            let text = commands::cmd_phase_space(&cfg, preset)?;
            write_output(&cfg, &text)?;
            Ok(0)
        }
    }
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, text.as_bytes())?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
