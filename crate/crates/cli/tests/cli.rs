use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sentivol_cli::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sentivol"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, days: usize, seed: u64) -> PathBuf {
    fs::write(dir.join("synth.toml"), format!("[synth]\ndays = {days}\n")).unwrap();
    let o = run(
        &[
            "synth",
            "--config",
            "synth.toml",
            "--out",
            "data",
            "--seed",
            &seed.to_string(),
        ],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join("data/sentivol.toml")
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn print_config_round_trips() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["--print-config"], t.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# Moneyness axis"));
    assert_eq!(RunConfig::from_toml(&text).unwrap(), RunConfig::default());
}

#[test]
fn missing_input_is_a_config_error_and_writes_nothing() {
    let t = tempfile::tempdir().unwrap();
    fs::write(
        t.path().join("c.toml"),
        "[inputs]\nquotes = \"nope.csv\"\nrates = \"nope.csv\"\n",
    )
    .unwrap();
    let o = run(
        &["build-surface", "--config", "c.toml", "--out", "out"],
        t.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("config-error: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(!t.path().join("out").exists());

    let o = run(&["build-surface", "--out", "out"], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("inputs.quotes is not set"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("c.toml"), "[var]\nlagz = 2\n").unwrap();
    let o = run(&["var-fit", "--config", "c.toml"], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lagz"));
}

#[test]
fn malformed_quotes_are_a_data_error() {
    let t = tempfile::tempdir().unwrap();
    fs::write(
        t.path().join("q.csv"),
        "trade_date,strike\n2020-01-02,100\n",
    )
    .unwrap();
    fs::write(t.path().join("r.csv"), "date,rate\n2020-01-02,0.01\n").unwrap();
    let o = run(
        &[
            "build-surface",
            "--quotes",
            "q.csv",
            "--rates",
            "r.csv",
            "--out",
            "out",
        ],
        t.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("data-error: "));
    assert!(!t.path().join("out").exists());
}

#[test]
fn too_many_lags_is_a_numeric_failure() {
    let t = tempfile::tempdir().unwrap();
    let cfg = synth(t.path(), 70, 1);
    let o = run(
        &[
            "var-fit",
            "--config",
            cfg.to_str().unwrap(),
            "--lags",
            "8",
            "--out",
            "fit",
        ],
        t.path(),
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("numeric-failure: "));
    assert!(!t.path().join("fit").exists());
}

#[test]
fn runs_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let cfg = synth(t.path(), 320, 11);
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        for cmd in ["var-fit", "decompose"] {
            let o = run(
                &[cmd, "--config", cfg, "--out", &format!("{out}/{cmd}")],
                t.path(),
            );
            assert!(o.status.success(), "{}", stderr(&o));
        }
    }
    for cmd in ["var-fit", "decompose"] {
        let a = dir_files(&t.path().join("a").join(cmd));
        let b = dir_files(&t.path().join("b").join(cmd));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd}");
    }
    let again = tempfile::tempdir().unwrap();
    synth(again.path(), 320, 11);
    assert_eq!(
        dir_files(&t.path().join("data")),
        dir_files(&again.path().join("data"))
    );
}

#[test]
fn artifacts_carry_metadata() {
    let t = tempfile::tempdir().unwrap();
    let cfg = synth(t.path(), 320, 3);
    let o = run(
        &[
            "build-surface",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "s",
        ],
        t.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for (name, bytes) in dir_files(&t.path().join("s")) {
        let text = String::from_utf8(bytes).unwrap();
        for key in [
            "tool: sentivol",
            "command: build-surface",
            "config_hash: ",
            "seed: 3",
            "date_range: ",
        ] {
            assert!(text.contains(key), "{name} lacks {key}");
        }
    }
}

#[test]
fn evaluate_reports_one_column_per_variant() {
    let t = tempfile::tempdir().unwrap();
    let cfg = synth(t.path(), 420, 2);
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("random_walk = true", "random_walk = false");
    let text = text.replace(
        "variants = [\"none\", \"pca\", \"Planted=external\"]",
        "variants = [\"none\", \"pca\"]",
    );
    fs::write(&cfg, text).unwrap();
    let o = run(
        &[
            "evaluate",
            "--config",
            cfg.to_str().unwrap(),
            "--window",
            "300",
            "--out",
            "ev",
        ],
        t.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(t.path().join("ev/accuracy_mape.tsv")).unwrap();
    let header = table.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "\tNone\tPCA");
    let total = table.lines().find(|l| l.starts_with("Total")).unwrap();
    assert_eq!(total.split('\t').count(), 3);

    let forecasts = fs::read_to_string(t.path().join("ev/forecasts.csv")).unwrap();
    let methods: std::collections::BTreeSet<&str> = forecasts
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(methods.into_iter().collect::<Vec<_>>(), ["None", "PCA"]);
}

#[test]
fn robustness_defaults_to_halves() {
    let t = tempfile::tempdir().unwrap();
    let cfg = synth(t.path(), 300, 4);
    let o = run(
        &[
            "robustness",
            "--config",
            cfg.to_str().unwrap(),
            "--lags",
            "1",
            "--out",
            "rb",
        ],
        t.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(t.path().join("rb/robustness.csv")).unwrap();
    assert!(text.contains("# window_1: w1:"));
    assert!(text.contains("# window_2: w2:"));
    assert!(text.contains("# n_obs_1: 150"));
}

#[test]
fn bundled_data_evaluates_none_and_pca() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic");
    let t = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(data.join("sentivol.toml"))
        .unwrap()
        .replace(
            "variants = [\"none\", \"pca\", \"Planted=external\"]",
            "variants = [\"none\", \"pca\"]",
        );
    let cfg = t.path().join("c.toml");
    let text = text
        .replace("\"quotes.csv\"", &format!("{:?}", data.join("quotes.csv")))
        .replace("\"rates.csv\"", &format!("{:?}", data.join("rates.csv")))
        .replace(
            "\"proxies.csv\"",
            &format!("{:?}", data.join("proxies.csv")),
        )
        .replace(
            "\"sentiment.csv\"",
            &format!("{:?}", data.join("sentiment.csv")),
        );
    fs::write(&cfg, text).unwrap();
    let o = run(&["evaluate", "--config", "c.toml", "--out", "ev"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let acc = fs::read_to_string(t.path().join("ev/accuracy.csv")).unwrap();
    let mut rows = acc.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(rows.next(), Some("method,bucket,mape,mspe,n_days"));
    let methods: std::collections::BTreeSet<&str> =
        rows.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        methods.into_iter().collect::<Vec<_>>(),
        ["None", "PCA", "Random walk"]
    );
}
