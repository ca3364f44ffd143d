use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use autocopula_cli::config::{Config, EnsembleFormat};
use autocopula_cli::fixture::{generate, FixtureSpec};
use autocopula_cli::pipeline::{read_ensemble, run_pipeline};
use autocopula_cli::plots::{emit_plot_data, Figure};
use autocopula_core::copula::Autocopula;
use autocopula_core::{Conditioning, DeltaMode};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_autocopula"));
    c.env("RUST_LOG", "warn");
    c
}

/// Four years of fixture data and a small config in a fresh directory.
fn workspace() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let spec = FixtureSpec {
        years: 4,
        ..Default::default()
    };
    generate(&spec)
        .unwrap()
        .write_csv(&spec, &dir.path().join("data.csv"))
        .unwrap();
    let cfg = r#"
[data]
path = "data.csv"

[seasonal]
harmonics = 2
fan_paths = 500
fan_months = 24

[copula]
target_per_rect = 8

[simulate]
paths = 20
seed = 3
conditioning = "partial"
horizon_days = 400

[output]
dir = "out"
"#;
    let path = dir.path().join("config.toml");
    fs::write(&path, cfg).unwrap();
    (dir, path)
}

fn read_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap().to_string();
    let rows = lines
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (first, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn stage_commands_match_the_pipeline() {
    let (dir, cfg) = workspace();
    let staged = dir.path().join("staged");
    for stage in [
        "fit-marginal",
        "fit-seasonal",
        "build-copula",
        "simulate",
        "diagnose-tails",
    ] {
        let st = bin()
            .args([stage, "-c"])
            .arg(&cfg)
            .arg("--out")
            .arg(&staged)
            .status()
            .unwrap();
        assert!(st.success(), "{stage}");
    }
    let st = bin().args(["pipeline", "-c"]).arg(&cfg).status().unwrap();
    assert!(st.success());
    let whole = dir.path().join("out");
    for f in [
        "marginal.json",
        "monthly_delta.json",
        "nu_ar.json",
        "copula.json",
        "provenance.json",
        "ensemble.csv",
        "percentiles.csv",
        "tail_bands.csv",
        "tail_curves_data.csv",
        "delta_fan.csv",
    ] {
        assert_eq!(
            fs::read(staged.join(f)).unwrap(),
            fs::read(whole.join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(whole.join("report.json").exists());
}

#[test]
fn every_output_carries_provenance() {
    let (dir, cfg) = workspace();
    assert!(bin()
        .args(["pipeline", "-c"])
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["emit-plots", "-c"])
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    let out = dir.path().join("out");
    let mut csvs = 0;
    for entry in fs::read_dir(&out)
        .unwrap()
        .chain(fs::read_dir(out.join("plots")).unwrap())
    {
        let path = entry.unwrap().path();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let (head, _) = read_rows(&path);
                assert!(head.starts_with("# autocopula "), "{}", path.display());
                assert!(
                    head.contains("input_sha256=")
                        && head.contains("config_sha256=")
                        && head.contains("seed=3")
                );
                csvs += 1;
            }
            Some("json") => {
                let v: serde_json::Value =
                    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
                let p = if path.ends_with("provenance.json") {
                    &v
                } else {
                    &v["provenance"]
                };
                assert_eq!(
                    p["input_sha256"].as_str().unwrap().len(),
                    64,
                    "{}",
                    path.display()
                );
                assert_eq!(p["seed"], 3);
            }
            _ => {}
        }
    }
    assert!(csvs >= 14, "{csvs}");
}

#[test]
fn plot_data_properties() {
    let (dir, cfg_path) = workspace();
    let cfg = Config::load(&cfg_path).unwrap();
    run_pipeline(&cfg).unwrap();
    let plots = dir.path().join("plots");
    emit_plot_data(&cfg, Figure::All, &plots).unwrap();

    // Density is the owning rectangle's count / (total · area).
    let (_, rects) = read_rows(&plots.join("fig5a_rectangles.csv"));
    let rects: Vec<[f64; 5]> = rects
        .iter()
        .map(|r| [num(&r[0]), num(&r[1]), num(&r[2]), num(&r[3]), num(&r[5])])
        .collect();
    let (_, cells) = read_rows(&plots.join("fig5c_density.csv"));
    assert_eq!(cells.len(), 100 * 100);
    for c in &cells {
        let (x, y, d) = (num(&c[0]), num(&c[1]), num(&c[2]));
        let owners: Vec<_> = rects
            .iter()
            .filter(|r| r[0] <= x && x <= r[1] && r[2] <= y && y <= r[3])
            .collect();
        assert_eq!(owners.len(), 1, "({x},{y})");
        assert_eq!(owners[0][4], d, "({x},{y})");
    }

    let (_, tails) = read_rows(&plots.join("fig2_tail_curves.csv"));
    assert_eq!(tails.len(), 49);
    for r in &tails {
        assert!(r[1..]
            .iter()
            .map(|s| num(s))
            .all(|v| (0.0..=1.0).contains(&v)));
    }

    let (_, fan) = read_rows(&plots.join("fig4_delta_fan.csv"));
    let mut by_month: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in &fan {
        by_month
            .entry((r[0].clone(), r[1].clone()))
            .or_default()
            .push((num(&r[2]), num(&r[3])));
    }
    assert_eq!(by_month.len(), 24);
    for rows in by_month.values() {
        assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    }

    // Surface is the copula itself.
    let bundle = autocopula_cli::pipeline::load_bundle(&cfg.output.dir).unwrap();
    let (_, surf) = read_rows(&plots.join("fig5b_surface.csv"));
    assert_eq!(surf.len(), 51 * 51);
    for r in surf.iter().step_by(37) {
        assert_eq!(num(&r[2]), bundle.copula.cdf(num(&r[0]), num(&r[1])));
    }

    let (_, pct) = read_rows(&plots.join("fig6_percentiles.csv"));
    assert!(
        pct.iter().all(|r| !r[4].is_empty()),
        "simulation window lies inside the data"
    );
    let (_, bands) = read_rows(&plots.join("fig7_tail_bands.csv"));
    for r in &bands {
        let v: Vec<f64> = r.iter().map(|s| num(s)).collect();
        assert!(v[2] <= v[3] && v[5] <= v[6]);
    }
}

#[test]
fn fit_only_run_writes_no_ensemble() {
    let (dir, cfg) = workspace();
    let st = bin()
        .args(["pipeline", "--paths", "0", "-c"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(st.success());
    let out = dir.path().join("out");
    assert!(out.join("copula.json").exists());
    for f in [
        "ensemble.csv",
        "ensemble.bin",
        "ensemble_meta.json",
        "percentiles.csv",
        "tail_bands.csv",
    ] {
        assert!(!out.join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["simulated_paths"], 0);
}

#[test]
fn binary_ensemble_round_trips() {
    let (dir, cfg_path) = workspace();
    let mut cfg = Config::load(&cfg_path).unwrap();
    cfg.simulate.format = EnsembleFormat::Binary;
    cfg.simulate.delta_mode = DeltaMode::Simulated;
    let out = run_pipeline(&cfg).unwrap();
    let run = out.simulation.unwrap();
    assert!(dir.path().join("out/ensemble.bin").exists());
    assert!(!dir.path().join("out/ensemble.csv").exists());
    let back = read_ensemble(&out.bundle, &cfg.output.dir, &cfg.simulate.levels).unwrap();
    assert_eq!(back.ensemble, run.ensemble);
    assert_eq!(back.dates, run.dates);
}

#[test]
fn csv_ensemble_round_trips() {
    let (_dir, cfg_path) = workspace();
    let mut cfg = Config::load(&cfg_path).unwrap();
    cfg.simulate.conditioning = Conditioning::Cumulative;
    let out = run_pipeline(&cfg).unwrap();
    let back = read_ensemble(&out.bundle, &cfg.output.dir, &cfg.simulate.levels).unwrap();
    assert_eq!(back.ensemble, out.simulation.unwrap().ensemble);
}

#[test]
fn exit_codes() {
    let (dir, cfg) = workspace();
    let code = |c: &mut Command| c.output().unwrap().status.code().unwrap();

    assert_eq!(
        code(
            bin()
                .args(["pipeline", "-c"])
                .arg(dir.path().join("missing.toml"))
        ),
        2
    );
    let typo = dir.path().join("typo.toml");
    fs::write(&typo, "[simulate]\npath = 3\n").unwrap();
    assert_eq!(code(bin().args(["pipeline", "-c"]).arg(&typo)), 2);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,value\n2020-01-01,1\n2020-01-01,2\n").unwrap();
    let o = bin()
        .args(["fit-marginal", "-c"])
        .arg(&cfg)
        .arg("--data")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    // Stages that need an earlier stage's artifact.
    let empty = dir.path().join("empty");
    assert_eq!(
        code(
            bin()
                .args(["simulate", "-c"])
                .arg(&cfg)
                .arg("--out")
                .arg(&empty)
        ),
        3
    );
    assert_eq!(
        code(
            bin()
                .args(["emit-plots", "--figure", "fig3", "-c"])
                .arg(&cfg)
                .arg("--out")
                .arg(&empty)
        ),
        3
    );
    assert!(bin()
        .args(["pipeline", "--paths", "0", "-c"])
        .arg(&cfg)
        .status()
        .unwrap()
        .success());
    assert_eq!(
        code(
            bin()
                .args(["emit-plots", "--figure", "fig6", "-c"])
                .arg(&cfg)
        ),
        3
    );
    assert_eq!(
        code(
            bin()
                .args(["emit-plots", "--figure", "fig1", "-c"])
                .arg(&cfg)
        ),
        0
    );

    // Too few months for the seasonal model is a data problem.
    let short = dir.path().join("short.csv");
    let spec = FixtureSpec {
        years: 1,
        ..Default::default()
    };
    generate(&spec).unwrap().write_csv(&spec, &short).unwrap();
    let o = bin()
        .args(["pipeline", "-c"])
        .arg(&cfg)
        .arg("--data")
        .arg(&short)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("fit_nu_ar"));
}

#[test]
fn generated_fixture_matches_the_shipped_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    assert!(bin()
        .args(["generate-fixture", "--out"])
        .arg(&path)
        .status()
        .unwrap()
        .success());
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fixture.csv");
    assert_eq!(fs::read(path).unwrap(), fs::read(shipped).unwrap());
}
