use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adm_cli::formats::{read_events, read_sweep, read_trace, read_traces};
use adm_core::{
    detrended_rmse, encode, find_min_rmse, reconstruct, settling_samples, AdaptiveConfig,
    AdmConfig, ReconstructionConfig, SynthSpec,
};
use tempfile::TempDir;

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn adm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adm"))
        .args(args)
        .env_remove("ADM_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_SINE: &str = r#"
[source.synth]
kind = "sine"
amplitude = 1.0
frequency_hz = 10.0
duration_s = 0.2
sample_rate_hz = 10000.0

[adm]
v_thu = 0.05
v_thd = 0.05
"#;

#[test]
fn constant_signal_yields_header_only_event_file() {
    let dir = TempDir::new().unwrap();
    let mut trace = String::from("# sample_rate_hz=1000\ntime_s,value\n");
    for n in 0..500 {
        trace.push_str(&format!("{:.9},0.25\n", n as f64 / 1000.0));
    }
    write(dir.path(), "flat.csv", &trace);
    let cfg = write(
        dir.path(),
        "run.toml",
        "[source]\ntrace = \"flat.csv\"\n[adm]\nv_thu = 0.1\nv_thd = 0.1\n",
    );
    let out = dir.path().join("out");
    let o = adm(&["encode", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("0 events"));
    let text = fs::read_to_string(out.join("events.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
    assert_eq!(
        read_events(&out.join("events.csv"))
            .unwrap()
            .source_length(),
        500
    );
}

#[test]
fn amplified_sine_encodes_balanced_and_decodes_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let cfg = repo_config("amplified_sine.toml");
    let out = dir.path();
    assert!(adm(&["synth", "--config", s(&cfg), "--out", s(out)])
        .status
        .success());
    let o = adm(&["encode", "--config", s(&cfg), "--out", s(out)]);
    assert!(o.status.success());

    let events = read_events(&out.join("events.csv")).unwrap();
    let (up, dn) = (events.up_count() as f64, events.dn_count() as f64);
    assert!(up > 0.0 && ((up - dn) / (up + dn)).abs() <= 0.01);

    let o = adm(&[
        "decode",
        "--config",
        s(&cfg),
        "--out",
        s(out),
        "--events",
        s(&out.join("events.csv")),
        "--original",
        s(&out.join("signal.csv")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("rmse "))
        .unwrap()
        .parse()
        .unwrap();

    let spec = SynthSpec::amplified_sine();
    let signal = spec.generate().unwrap();
    let v = 3.9716e-5;
    let direct = encode(&signal, &AdmConfig::symmetric(v, 0.0).unwrap()).unwrap();
    assert_eq!(direct, events);
    let recon = reconstruct(
        &direct,
        &ReconstructionConfig::symmetric(v).with_cutoff(0.5),
    )
    .unwrap();
    let expected = detrended_rmse(&signal, &recon, 0.5).unwrap();
    assert_eq!(printed.to_bits(), expected.to_bits());

    let (_, written) = read_trace(&out.join("reconstruction.csv")).unwrap();
    assert_eq!(written, recon);
    let (_, original) = read_trace(&out.join("signal.csv")).unwrap();
    assert_eq!(original, signal);
}

#[test]
fn missing_trace_path_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "[source]\ntrace = \"nowhere.csv\"\n[adm]\nv_thu = 0.1\nv_thd = 0.1\n",
    );
    let o = adm(&["encode", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.csv"));
}

#[test]
fn out_of_order_event_file_names_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_SINE);
    let ev = write(
        dir.path(),
        "ev.csv",
        "# source_length=100\n# sample_rate_hz=1000\ntime_s,polarity\n0.001000000,UP\n0.005000000,DN\n0.003000000,UP\n",
    );
    let o = adm(&[
        "decode",
        "--config",
        s(&cfg),
        "--out",
        s(dir.path()),
        "--events",
        s(&ev),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 6"), "{}", stderr(&o));
}

#[test]
fn malformed_polarity_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_SINE);
    let ev = write(
        dir.path(),
        "ev.csv",
        "# source_length=100\n# sample_rate_hz=1000\ntime_s,polarity\n0.001000000,SIDEWAYS\n",
    );
    let o = adm(&[
        "decode",
        "--config",
        s(&cfg),
        "--out",
        s(dir.path()),
        "--events",
        s(&ev),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"));
}

#[test]
fn empty_event_file_decodes_to_flat_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_SINE);
    let ev = write(
        dir.path(),
        "ev.csv",
        "# source_length=1000\n# sample_rate_hz=1000\ntime_s,polarity\n",
    );
    let o = adm(&[
        "decode",
        "--config",
        s(&cfg),
        "--out",
        s(dir.path()),
        "--events",
        s(&ev),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, recon) = read_trace(&dir.path().join("reconstruction.csv")).unwrap();
    assert_eq!(recon.len(), 1000);
    assert!(recon.samples().iter().all(|v| *v == 0.0));
}

#[test]
fn sweep_outputs_full_grid_and_reloads() {
    let dir = TempDir::new().unwrap();
    let o = adm(&[
        "sweep",
        "--config",
        s(&repo_config("sweep.toml")),
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records = read_sweep(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(records.len(), 16 * 5);

    let best = find_min_rmse(&records).unwrap();
    let line = format!(
        "minimum rmse {} at v_th {} t_rfr_s {}",
        best.rmse, best.v_th, best.t_rfr_s
    );
    assert!(stdout(&o).contains(&line), "{}", stdout(&o));

    let svg = fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 5);

    // Where every refractory period binds, a longer period never scores better.
    let mut thresholds: Vec<f64> = records.iter().map(|r| r.v_th).collect();
    thresholds.dedup();
    let mut checked = 0;
    for v in thresholds {
        let mut row: Vec<_> = records.iter().filter(|r| r.v_th == v).collect();
        row.sort_by(|a, b| a.t_rfr_s.total_cmp(&b.t_rfr_s));
        let bound = row
            .iter()
            .filter(|r| r.t_rfr_s > 0.0)
            .all(|r| r.event_rate_hz >= 0.5 / r.t_rfr_s);
        if bound {
            checked += 1;
            for pair in row.windows(2) {
                assert!(pair[1].rmse >= pair[0].rmse, "{pair:?}");
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn sweep_on_trace_source_needs_thresholds() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let cfg = write(dir.path(), "s.toml", SMALL_SINE);
    assert!(adm(&["synth", "--config", s(&cfg), "--out", s(&out)])
        .status
        .success());
    let base = "[source]\ntrace = \"o/signal.csv\"\n[adm]\nv_thu = 0.1\nv_thd = 0.1\n";
    let bad = write(dir.path(), "bad.toml", base);
    assert_eq!(
        adm(&["sweep", "--config", s(&bad), "--out", s(&out)])
            .status
            .code(),
        Some(1)
    );
    let good = write(
        dir.path(),
        "good.toml",
        &format!("{base}[sweep]\nv_th_values = [0.02, 0.05]\nt_rfr_values = [0.0, 0.001]\n"),
    );
    let o = adm(&["sweep", "--config", s(&good), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_sweep(&out.join("sweep.csv")).unwrap().len(), 4);
}

#[test]
fn adaptive_bundle_surfaces_the_hold() {
    let dir = TempDir::new().unwrap();
    let o = adm(&[
        "adaptive",
        "--config",
        s(&repo_config("hfo.toml")),
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (names, fs_hz, cols) = read_traces(&dir.path().join("adaptive_traces.csv")).unwrap();
    assert_eq!(names, ["input", "envelope", "slow", "fast", "gate", "v_th"]);
    assert_eq!(fs_hz, 2000.0);
    let (gate, v_th) = (&cols[4], &cols[5]);
    assert!(gate.iter().all(|g| *g == 0.0 || *g == 1.0));
    for n in 1..gate.len() {
        if gate[n] == 1.0 {
            assert_eq!(v_th[n], v_th[n - 1], "sample {n}");
        }
    }
    let svg = fs::read_to_string(dir.path().join("adaptive.svg")).unwrap();
    assert_eq!(svg.matches("<rect x=").count(), 3);
    assert!(!read_events(&dir.path().join("events.csv"))
        .unwrap()
        .is_empty());
}

#[test]
fn background_only_scenario_stays_sparse() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "bg.toml",
        r#"
[source.synth]
kind = "band_noise"
amplitude = 1.0
duration_s = 20.0
sample_rate_hz = 2000.0
seed = 3

[adm]
v_thu = 1.0
v_thd = 1.0

[adaptive]
"#,
    );
    let o = adm(&["adaptive", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let events = read_events(&dir.path().join("events.csv")).unwrap();
    let settle = settling_samples(&AdaptiveConfig::default(), 2000.0);
    let span = (events.source_length() - settle) as f64 / 2000.0;
    let adaptive_rate = events.count_in(settle..events.source_length()) as f64 / span;

    let signal = SynthSpec::band_noise(1.0, (80.0, 250.0), 20.0, 2000.0, 3)
        .generate()
        .unwrap();
    let fixed = encode(&signal, &AdmConfig::symmetric(signal.rms(), 0.0).unwrap()).unwrap();
    let fixed_rate = fixed.count_in(settle..fixed.source_length()) as f64 / span;
    assert!(
        adaptive_rate < 0.1 * fixed_rate,
        "{adaptive_rate} vs {fixed_rate}"
    );
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(adm(&["encode"]).status.code(), Some(1));
    assert_eq!(adm(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(adm(&["--help"]).status.code(), Some(0));
    assert_eq!(
        adm(&["encode", "--config", s(&dir.path().join("absent.toml"))])
            .status
            .code(),
        Some(2)
    );

    let both = write(
        dir.path(),
        "both.toml",
        &format!("{SMALL_SINE}\n").replace(
            "[source.synth]",
            "[source]\ntrace = \"x.csv\"\n[source.synth]",
        ),
    );
    let o = adm(&["encode", "--config", s(&both), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exactly one"));

    let bad_gain = write(
        dir.path(),
        "g.toml",
        &format!("{SMALL_SINE}gain_code = 7\n"),
    );
    assert_eq!(
        adm(&["encode", "--config", s(&bad_gain), "--out", s(dir.path())])
            .status
            .code(),
        Some(1)
    );

    let no_adaptive = write(dir.path(), "n.toml", SMALL_SINE);
    assert_eq!(
        adm(&[
            "adaptive",
            "--config",
            s(&no_adaptive),
            "--out",
            s(dir.path())
        ])
        .status
        .code(),
        Some(1)
    );

    let blocker = write(dir.path(), "file", "");
    let o = adm(&[
        "encode",
        "--config",
        s(&no_adaptive),
        "--out",
        s(&blocker.join("sub")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_SINE);
    let env_dir = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_adm"))
        .args(["synth", "--config", s(&cfg), "--quiet"])
        .env("ADM_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(env_dir.join("signal.csv").exists());

    let with_out_dir = write(
        dir.path(),
        "o.toml",
        &format!("out_dir = \"cfg_out\"\n{SMALL_SINE}"),
    );
    let o = Command::new(env!("CARGO_BIN_EXE_adm"))
        .args(["synth", "--config", s(&with_out_dir)])
        .env("ADM_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("cfg_out/signal.csv").exists());

    let flag = dir.path().join("flag");
    assert!(
        adm(&["synth", "--config", s(&with_out_dir), "--out", s(&flag)])
            .status
            .success()
    );
    assert!(flag.join("signal.csv").exists());
}

#[test]
fn seed_override_changes_noise() {
    let dir = TempDir::new().unwrap();
    let cfg = repo_config("hfo.toml");
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    assert!(adm(&["synth", "--config", s(&cfg), "--out", s(&a)])
        .status
        .success());
    assert!(
        adm(&["synth", "--config", s(&cfg), "--out", s(&b), "--seed", "99"])
            .status
            .success()
    );
    assert!(
        adm(&["synth", "--config", s(&cfg), "--out", s(&c), "--seed", "7"])
            .status
            .success()
    );
    let read = |d: &Path| fs::read(d.join("signal.csv")).unwrap();
    assert_ne!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
}
