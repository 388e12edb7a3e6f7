//! Figure presets: named parameter bundles that reproduce the reference
//! figure panels. A preset is an ordinary config snippet bound to one
//! subcommand, so `--preset NAME` alone fully determines the output.

use crate::cli::Command;

/// Claimed headline value attached to a preset; runs report whether the
/// computed sweep reproduces it.
#[derive(Clone, Copy, Debug)]
pub struct Claim {
    pub what: &'static str,
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub pairs: &'static [(&'static str, &'static str)],
    pub claim: Option<Claim>,
}

pub const PRESETS: &[Preset] = &[
    // photon number distribution P(l)
    Preset {
        name: "fig2a",
        command: Command::PhotonDist,
        pairs: &[
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("chit", "2"),
            ("dist_l", "2"),
        ],
        claim: Some(Claim {
            what: "peak of P(2) over the lambda sweep",
            value: 0.5,
        }),
    },
    Preset {
        name: "fig2b",
        command: Command::PhotonDist,
        pairs: &[
            ("sweep_param", "chit"),
            ("sweep_start", "0"),
            ("sweep_stop", "12.5"),
            ("sweep_count", "251"),
            ("lambda", "2"),
            ("dist_l", "2"),
        ],
        claim: Some(Claim {
            what: "peak of P(2) over the chit sweep",
            value: 1.08,
        }),
    },
    Preset {
        name: "fig2c",
        command: Command::PhotonDist,
        pairs: &[("lambda", "1"), ("chit", "4"), ("l_max", "20")],
        claim: Some(Claim {
            what: "max of P(l) over l",
            value: 0.83,
        }),
    },
    // Mandel Q_M
    Preset {
        name: "fig3a",
        command: Command::Witness,
        pairs: &[
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("chit", "0.2"),
        ],
        claim: None,
    },
    Preset {
        name: "fig3b",
        command: Command::Witness,
        pairs: &[
            ("sweep_param", "chit"),
            ("sweep_start", "0"),
            ("sweep_stop", "12.5"),
            ("sweep_count", "251"),
            ("lambda", "0.35"),
        ],
        claim: None,
    },
    // squeezing S_x, S_p
    Preset {
        name: "fig4a",
        command: Command::Witness,
        pairs: &[
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("chit", "1"),
        ],
        claim: None,
    },
    Preset {
        name: "fig4b",
        command: Command::Witness,
        pairs: &[
            ("sweep_param", "chit"),
            ("sweep_start", "0"),
            ("sweep_stop", "12.5"),
            ("sweep_count", "251"),
            ("lambda", "1"),
        ],
        claim: None,
    },
    // Wigner function W
    Preset {
        name: "fig5a",
        command: Command::PhaseSpace,
        pairs: &[
            ("kind", "wigner"),
            ("convention", "paper"),
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("chit", "2"),
            ("beta", "1"),
        ],
        claim: None,
    },
    Preset {
        name: "fig5b",
        command: Command::PhaseSpace,
        pairs: &[
            ("kind", "wigner"),
            ("convention", "paper"),
            ("sweep_param", "beta_re"),
            ("sweep_start", "-4"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("lambda", "1"),
            ("chit", "1"),
        ],
        claim: None,
    },
    Preset {
        name: "fig5c",
        command: Command::PhaseSpace,
        pairs: &[
            ("kind", "wigner"),
            ("convention", "paper"),
            ("sweep_param", "chit"),
            ("sweep_start", "0"),
            ("sweep_stop", "12.5"),
            ("sweep_count", "251"),
            ("lambda", "1"),
            ("beta", "1"),
        ],
        claim: None,
    },
    // Husimi Q_f
    Preset {
        name: "fig6a",
        command: Command::PhaseSpace,
        pairs: &[
            ("kind", "husimi"),
            ("convention", "paper"),
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("chit", "1"),
            ("alpha", "1"),
        ],
        claim: None,
    },
    Preset {
        name: "fig6b",
        command: Command::PhaseSpace,
        pairs: &[
            ("kind", "husimi"),
            ("convention", "paper"),
            ("sweep_param", "alpha_re"),
            ("sweep_start", "-4"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("lambda", "1"),
            ("chit", "1"),
        ],
        claim: None,
    },
    Preset {
        name: "fig6c",
        command: Command::PhaseSpace,
        pairs: &[
            ("kind", "husimi"),
            ("convention", "paper"),
            ("sweep_param", "chit"),
            ("sweep_start", "0"),
            ("sweep_stop", "12.5"),
            ("sweep_count", "251"),
            ("lambda", "1"),
            ("alpha", "1"),
        ],
        claim: None,
    },
    // second-order correlation g²(0); the same sweeps carry the d₁ column
    Preset {
        name: "fig7a",
        command: Command::Witness,
        pairs: &[
            ("sweep_param", "lambda"),
            ("sweep_start", "0"),
            ("sweep_stop", "4"),
            ("sweep_count", "201"),
            ("chit", "1"),
        ],
        claim: None,
    },
    Preset {
        name: "fig7b",
        command: Command::Witness,
        pairs: &[
            ("sweep_param", "chit"),
            ("sweep_start", "0"),
            ("sweep_stop", "12.5"),
            ("sweep_count", "251"),
            ("lambda", "2"),
        ],
        claim: None,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}
