//! End-to-end tests of the binary: exit codes, printed values, and the
//! drill-down and report flows.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pubtrends"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn fit_prints_published_rounding() {
    let out = bin()
        .args(["fit", "--input"])
        .arg(data("pharmacology.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("-704.57"), "{text}");
    assert!(text.contains("104,802.14"), "{text}");
}

#[test]
fn fit_writes_full_json_records() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("fits.json");
    let out = bin()
        .args(["fit", "--input"])
        .arg(data("pharmacology.csv"))
        .args(["--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let fit = &parsed["fits"][0];
    assert_eq!(fit["series_id"], "S63");
    assert_eq!(fit["n"], 7);
    assert_eq!(fit["df"], 5);
    assert!((fit["b1"].as_f64().unwrap() - (-704.5714285714286)).abs() < 1e-9);
    assert_eq!(fit["robust"]["variant"], "hc1");
    assert!(fit["ci_b1"]["lower"].as_f64().unwrap() < fit["b1"].as_f64().unwrap());
    assert_eq!(fit["residuals"].as_array().unwrap().len(), 7);
}

#[test]
fn describe_rejects_malformed_csv_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.csv");
    std::fs::write(
        &path,
        "field_id,field_name,broad_section,year,count\nS63,P,BIO,2014,10\nS63,P,BIO,2014,11\n",
    )
    .unwrap();
    let out = bin()
        .args(["describe", "--input"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().args(["describe"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["fit", "--input"])
        .arg(data("pharmacology.csv"))
        .args(["--level", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("level"));
}

#[test]
fn help_and_version_exit_zero() {
    assert!(bin().arg("--help").output().unwrap().status.success());
    assert!(bin().arg("--version").output().unwrap().status.success());
}

#[test]
fn stdin_input_works() {
    use std::io::Write;
    let text = std::fs::read(data("pharmacology.csv")).unwrap();
    let mut child = bin()
        .args(["describe", "--input", "-", "--format", "csv"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(&text).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("2014,106329.00"));
}

#[test]
fn diffs_field_listing_matches_published_column() {
    let out = bin()
        .args(["diffs", "--input"])
        .arg(data("pharmacology.csv"))
        .args(["--field", "S63", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    for needle in ["2015,108973,2644", "2016,102513,-6460", "2020,110376,13924"] {
        assert!(text.contains(needle), "{text}");
    }
}

#[test]
fn drilldown_csv_contains_published_rows() {
    let out = bin()
        .args(["drilldown", "--input"])
        .arg(data("sections.csv"))
        .args(["--ct"])
        .arg(data("ct_electrochem.csv"))
        .args(["--field", "S52", "--year", "2020", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(
        text.contains("Lithium-Ion Secondary Batteries,13172,15.28"),
        "{text}"
    );
    assert!(text.contains("Total,86209,100.00"), "{text}");
}

#[test]
fn unknown_drilldown_field_is_a_data_error() {
    let out = bin()
        .args(["drilldown", "--input"])
        .arg(data("sections.csv"))
        .args(["--ct"])
        .arg(data("ct_optical.csv"))
        .args(["--field", "S99", "--year", "2020"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("S99"));
}

#[test]
fn sample_titles_is_deterministic_and_validates_k() {
    let args = |k: &str, seed: &str| {
        let mut c = bin();
        c.args(["sample-titles", "--titles"])
            .arg(data("titles.csv"))
            .args([
                "--field",
                "S73",
                "--ct",
                "Photoluminescence",
                "--year",
                "2020",
                "--k",
                k,
                "--seed",
                seed,
            ]);
        c
    };
    let a = args("3", "9").output().unwrap();
    let b = args("3", "9").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let too_many = args("13", "9").output().unwrap();
    assert_eq!(too_many.status.code(), Some(2));
    assert!(stderr_of(&too_many).contains("not enough records"));
}

#[test]
fn plot_writes_drilldown_spaghetti() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("terms.svg");
    let out = bin()
        .args(["plot", "--kind", "spaghetti", "--input"])
        .arg(data("sections.csv"))
        .args(["--ct"])
        .arg(data("ct_optical.csv"))
        .args(["--field", "S73", "--year", "2020", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let svg = std::fs::read_to_string(&path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 10);
    assert!(svg.starts_with("<?xml"));
}

#[test]
fn report_on_noise_free_panel_ranks_true_max_slope_last() {
    let tmp = tempfile::tempdir().unwrap();
    let counts = tmp.path().join("counts.csv");
    let status = bin()
        .args([
            "simulate",
            "--fields",
            "80",
            "--years",
            "7",
            "--intercepts",
            "500,110000",
            "--slopes",
            "-1700,5300",
            "--noise",
            "0",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&counts)
        .status()
        .unwrap();
    assert!(status.success());

    let report_dir = tmp.path().join("report");
    let status = bin()
        .args(["report", "--input"])
        .arg(&counts)
        .args(["--out"])
        .arg(&report_dir)
        .status()
        .unwrap();
    assert!(status.success());

    // Ground truth: the steepest generating slope.
    let spec = pubtrends_core::synth::SyntheticSpec {
        n_fields: 80,
        first_year: 2014,
        n_years: 7,
        intercept_range: (500.0, 110_000.0),
        slope_range: (-1700.0, 5300.0),
        noise_sd: 0.0,
        seed: 7,
    };
    let (_, truth) = pubtrends_core::synth::generate(&spec).unwrap();
    let best = truth
        .fields
        .iter()
        .max_by(|a, b| a.b1.total_cmp(&b.b1))
        .unwrap();

    let rank_csv = std::fs::read_to_string(report_dir.join("rank.csv")).unwrap();
    let last_row = rank_csv.lines().last().unwrap();
    assert!(
        last_row.contains(&best.field_id),
        "expected {} in {last_row}",
        best.field_id
    );

    let manifest = std::fs::read_to_string(report_dir.join("manifest.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert!(parsed["artifacts"].as_array().unwrap().len() >= 4);
}

#[test]
fn simulate_reports_coverage_when_asked() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "simulate",
            "--fields",
            "1",
            "--years",
            "7",
            "--intercepts",
            "20000,20000",
            "--slopes",
            "500,500",
            "--noise",
            "1500",
            "--seed",
            "11",
            "--coverage-trials",
            "400",
            "--out",
        ])
        .arg(tmp.path().join("c.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("empirical coverage: 0."), "{text}");
}
