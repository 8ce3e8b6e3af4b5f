use std::path::Path;
use std::process::{Command, Output};

use wavemotion::config::RunConfig;
use wavemotion::data_io::{load_motion, save_motion};
use wavemotion::manifold::MotionSequence;
use wavemotion::wavelet::supported_bases;

const CONFIG: &str = "\
data.joints = 2
data.history = 6
data.future = 10
data.frames = 30
data.train_sequences = 4
data.test_sequences = 2
model.basis = haar
model.blocks = 1
model.latent_dim = 8
model.heads = 2
model.ff_dim = 8
model.epochs = 1
schedule.steps = 40
sample.ddim_steps = 4
sample.tabg_window = 3
sample.control_window = 3
sample.count = 2
eval.samples = 2
eval.windows = 2
out.dir = out
";

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavemotion"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cli(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), CONFIG).unwrap();
    dir
}

fn config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.apply_text(CONFIG).unwrap();
    cfg
}

fn join(a: &[&'static str], b: &[&'static str]) -> Vec<&'static str> {
    a.iter().chain(b).copied().collect()
}

fn write_clip(dir: &Path, frames: usize) {
    let corpus = wavemotion::commands::load_corpus(&config()).unwrap();
    let data = corpus.test[0].data.slice(ndarray::s![..frames, ..]).to_owned();
    save_motion(&dir.join("clip.wmot"), &MotionSequence::new(data, 50.0).unwrap()).unwrap();
}

#[test]
fn errors_print_a_code_and_exit_nonzero() {
    let dir = workspace();
    let p = dir.path();

    let out = cli(p, &["--set", "model.nonsense=1", "train"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[E_CONFIG]:"), "{err}");

    let out = cli(p, &["--set", "model.basis=db99", "encode", "a", "b"]);
    assert_eq!(out.status.code(), Some(1));

    let out = cli(p, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_USAGE]:"));

    let out = cli(p, &["--config", "run.cfg", "eval", "--checkpoint", "missing.wmck"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_IO]:"));

    let out = cli(p, &["--config", "run.cfg", "eval", "--baseline", "oracle"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[E_ARG]:"));
}

#[test]
fn dumped_config_reloads_to_the_same_settings() {
    let dir = workspace();
    let p = dir.path();
    let dumped = ok(p, &["--config", "run.cfg", "--set", "sample.w=0.25", "--dump-config"]);
    std::fs::write(p.join("dumped.cfg"), &dumped).unwrap();
    let again = ok(p, &["--config", "dumped.cfg", "--dump-config"]);
    assert_eq!(dumped, again);
    assert!(dumped.contains("sample.w = 0.25"), "{dumped}");
}

#[test]
fn zero_epoch_checkpoint_is_usable_and_prediction_is_deterministic() {
    let dir = workspace();
    let p = dir.path();
    let c = ["--config", "run.cfg", "--set", "model.epochs=0"];
    let with = |extra: &[&'static str]| join(&c, extra);
    ok(p, &with(&["train"]));
    assert!(p.join("out/model.wmck").exists());
    assert!(p.join("out/loss.csv").exists());

    write_clip(p, 16);
    ok(p, &with(&["--set", "out.dir=a", "--sequential", "predict", "--history", "clip.wmot", "--count", "1", "--checkpoint", "out/model.wmck"]));
    ok(p, &with(&["--set", "out.dir=b", "predict", "--history", "clip.wmot", "--count", "1", "--checkpoint", "out/model.wmck"]));
    let a = std::fs::read(p.join("a/pred_000.wmot")).unwrap();
    let b = std::fs::read(p.join("b/pred_000.wmot")).unwrap();
    assert_eq!(a, b);
    assert!(!p.join("a/pred_001.wmot").exists());

    let pred = load_motion(&p.join("a/pred_000.wmot")).unwrap();
    let clip = load_motion(&p.join("clip.wmot")).unwrap();
    assert_eq!(pred.frames(), 16);
    assert_eq!(pred.data.slice(ndarray::s![..6, ..]), clip.data.slice(ndarray::s![..6, ..]));
}

#[test]
fn masked_prediction_pins_the_requested_entries() {
    let dir = workspace();
    let p = dir.path();
    let c = ["--config", "run.cfg", "--set", "sample.control_window=4"];
    let with = |extra: &[&'static str]| join(&c, extra);
    ok(p, &with(&["train"]));
    write_clip(p, 16);
    ok(p, &with(&["predict", "--history", "clip.wmot", "--mask-joints", "0,1"]));
    let clip = load_motion(&p.join("clip.wmot")).unwrap();
    for i in 0..2 {
        let pred = load_motion(&p.join(format!("out/pred_{i:03}.wmot"))).unwrap();
        let err = (&pred.data - &clip.data).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        assert!(err < 1e-6, "sample {i}: {err}");
    }

    write_clip(p, 10);
    let out = cli(p, &with(&["predict", "--history", "clip.wmot", "--mask-frames", "7..9"]));
    assert_eq!(out.status.code(), Some(1));
    let out = cli(p, &with(&["predict", "--history", "clip.wmot", "--mask-frames", "9..7"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn metrics_csv_has_one_row_per_metric() {
    let dir = workspace();
    let p = dir.path();
    let text = ok(p, &["--config", "run.cfg", "eval", "--baseline", "zero_vel"]);
    let file = std::fs::read_to_string(p.join("out/metrics.csv")).unwrap();
    assert_eq!(text, file);
    let lines: Vec<&str> = file.lines().collect();
    assert_eq!(lines[0], "# apd_convention=unordered_pairs");
    assert_eq!(lines[1], "metric,value,S,num_histories,seed");
    let names: Vec<&str> = lines[2..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["apd", "ade", "fde", "mmade", "mmfde"]);
    for l in &lines[2..] {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert!(cols[1].parse::<f64>().unwrap().is_finite());
        assert_eq!(cols[2], "1");
    }
}

#[test]
fn basis_ablation_lists_every_basis_with_tiny_error() {
    let dir = workspace();
    let p = dir.path();
    ok(p, &["--config", "run.cfg", "ablate-bases"]);
    let file = std::fs::read_to_string(p.join("out/ablate_bases.csv")).unwrap();
    let mut lines = file.lines();
    assert_eq!(lines.next(), Some("basis,position_rmse,velocity_rmse,acceleration_rmse"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, supported_bases());
    for r in &rows {
        let pos: f64 = r[1].parse().unwrap();
        let vel: f64 = r[2].parse().unwrap();
        assert!(pos < 1e-9, "{}: {pos}", r[0]);
        assert!(vel <= 2.0 * std::f64::consts::SQRT_2 * pos + 1e-15, "{}: {vel}", r[0]);
    }
}

#[test]
fn manifold_csv_roundtrips_through_the_cli() {
    let dir = workspace();
    let p = dir.path();
    write_clip(p, 16);
    ok(p, &["encode", "clip.wmot", "m.csv", "--basis", "bior2.8"]);
    let text = std::fs::read_to_string(p.join("m.csv")).unwrap();
    assert!(text.starts_with("# basis=bior2.8 frames=16 channels=6"), "{text}");
    ok(p, &["decode", "m.csv", "back.csv"]);
    let back = wavemotion::data_io::load_motion_csv(&p.join("back.csv"), 50.0).unwrap();
    let clip = load_motion(&p.join("clip.wmot")).unwrap();
    let err = (&back.data - &clip.data).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
    assert!(err < 1e-9, "{err}");
}
