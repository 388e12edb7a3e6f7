//! End-to-end CLI behaviour: exit codes, config handling, output formats,
//! and the golden sweep regression.

use std::process::{Command, Output};

fn catlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn help_and_version() {
    let help = catlab(&["--help"]);
    assert!(help.status.success());
    assert!(stdout(&help).contains("witness"));
    let version = catlab(&["--version"]);
    assert!(stdout(&version).starts_with("catlab "));
}

#[test]
fn unknown_command_is_a_config_error() {
    let out = catlab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown command"));
}

#[test]
fn config_errors_name_the_field() {
    // no parameter point at all
    let out = catlab(&["witness", "--sweep_param", "lambda"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lambda"));

    // both parameter sources
    let out = catlab(&[
        "photon-dist", "--lambda", "1", "--chit", "1", "--g", "1", "--delta", "20",
        "--e_drive", "1", "--t", "20",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // bad sweep bounds
    let out = catlab(&[
        "witness", "--chit", "1", "--sweep_param", "lambda", "--sweep_start", "3",
        "--sweep_stop", "1", "--sweep_count", "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sweep_start"));

    // unknown key
    let out = catlab(&["witness", "--bogus_key", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus_key"));

    // unknown preset
    let out = catlab(&["witness", "--preset", "fig99z"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fig99z"));

    // preset bound to another command
    let out = catlab(&["witness", "--preset", "fig2a"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("photon-dist"));
}

#[test]
fn l_max_range_error_before_compute() {
    let out = catlab(&["photon-dist", "--lambda", "1", "--chit", "1", "--l_max", "4000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("l_max"));
}

#[test]
fn config_file_is_read_and_cli_overrides_it() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    std::fs::write(
        &config_path,
        "# sweep over the drive strength\n\
         chit = 1\n\
         sweep_param = lambda\n\
         sweep_start = 0\n\
         sweep_stop = 2\n\
         sweep_count = 5\n\
         state_kind = cat\n",
    )
    .unwrap();
    let cfg = config_path.to_string_lossy().into_owned();

    let from_file = catlab(&["witness", "--config", &cfg]);
    assert!(from_file.status.success(), "{from_file:?}");
    let text = stdout(&from_file);
    assert!(text.contains("# state_kind: cat"));
    assert!(text.contains("# sweep: lambda from 0 to 2.00000000000 count 5"));

    // the CLI flag wins over the file entry
    let overridden = catlab(&["witness", "--config", &cfg, "--state_kind", "both"]);
    assert!(overridden.status.success());
    assert!(stdout(&overridden).contains("# state_kind: both"));
}

#[test]
fn vacuum_sweep_leaves_undefined_cells_empty() {
    let out = catlab(&[
        "witness", "--lambda", "0", "--sweep_param", "chit", "--sweep_start", "0",
        "--sweep_stop", "2", "--sweep_count", "3", "--state_kind", "mixed",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    // vacuum rows: empty mandel_q and g2 cells, zero d1
    for line in text.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1], "mixed");
        assert_eq!(cells[3], "", "mandel_q cell: {line}");
        assert_eq!(cells[6], "", "g2 cell: {line}");
        assert_eq!(cells[7], "0", "d1 cell: {line}");
    }
}

#[test]
fn degenerate_cat_points_warn_instead_of_failing() {
    // chit = pi sits on the sweep: the mu=0 cat outcome there has zero
    // detection probability
    let out = catlab(&[
        "witness", "--lambda", "1", "--sweep_param", "chit", "--sweep_start", "0",
        "--sweep_stop", "6.283185307179586", "--sweep_count", "5", "--state_kind", "cat",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(
        text.contains("degenerate cat outcome"),
        "missing degeneracy warning:\n{text}"
    );
}

#[test]
fn json_output_is_well_formed() {
    let out = catlab(&[
        "witness", "--chit", "1", "--sweep_param", "lambda", "--sweep_start", "0",
        "--sweep_stop", "2", "--sweep_count", "3", "--format", "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with('{') && text.trim_end().ends_with('}'));
    for key in ["\"metadata\"", "\"axes\"", "\"rows\"", "\"discrepancies\"", "\"warnings\""] {
        assert!(text.contains(key), "missing {key}");
    }
    // undefined witnesses are JSON nulls on the vacuum row
    assert!(text.contains("\"mandel_q\":null"));
}

#[test]
fn grid_output_shapes() {
    let csv = catlab(&[
        "phase-space", "--lambda", "1", "--chit", "1", "--state_kind", "cat",
        "--re_min", "-2", "--re_max", "2", "--im_min", "-2", "--im_max", "2",
        "--resolution", "5",
    ]);
    assert!(csv.status.success());
    let text = stdout(&csv);
    let matrix_rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(matrix_rows.len(), 6); // axis row + 5 value rows
    assert!(matrix_rows[0].starts_with(','));
    assert_eq!(matrix_rows[1].split(',').count(), 6);
    assert!(text.contains("# normalization_check:"));

    let json = catlab(&[
        "phase-space", "--lambda", "1", "--chit", "1", "--state_kind", "cat",
        "--re_min", "-2", "--re_max", "2", "--im_min", "-2", "--im_max", "2",
        "--resolution", "5", "--format", "json",
    ]);
    assert!(json.status.success());
    assert!(stdout(&json).contains("\"values\""));

    let both_kinds = catlab(&[
        "phase-space", "--lambda", "1", "--chit", "1", "--re_min", "-2", "--re_max",
        "2", "--im_min", "-2", "--im_max", "2", "--resolution", "5",
    ]);
    assert_eq!(both_kinds.status.code(), Some(2), "state_kind=both must be rejected");
}

#[test]
fn golden_cat_sweep_is_stable() {
    let out = catlab(&[
        "witness", "--sweep_param", "lambda", "--sweep_start", "0", "--sweep_stop",
        "4", "--sweep_count", "9", "--chit", "1", "--state_kind", "cat",
    ]);
    assert!(out.status.success());
    let golden = include_str!("golden/witness_lambda_cat_chit1.csv");
    assert_eq!(stdout(&out), golden, "golden sweep output drifted");
}

#[test]
fn preset_alone_determines_output() {
    let a = catlab(&["photon-dist", "--preset", "fig2c"]);
    let b = catlab(&["photon-dist", "--preset", "fig2c"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("# preset: fig2c"));
}
