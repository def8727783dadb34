use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spiopt_cli::config::ExperimentConfig;
use spiopt_cli::nn_suite::NnConfig;
use spiopt_cli::race::{run_race, summary_rows};

fn spiopt(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiopt"))
        .env_remove("SPIOPT_OUT")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn every_bundled_config_validates() {
    for f in ["f1_race", "f2_race", "f3_race", "f4_race", "f5_race"] {
        let cfg = ExperimentConfig::from_path(Path::new(&config(&format!("{f}.toml")))).unwrap();
        assert_eq!(cfg.optimizers.len(), 9, "{f}");
        assert_eq!(cfg.max_steps, 100);
    }
    for f in ["nn_sweep", "nn_mnist"] {
        NnConfig::from_path(Path::new(&config(&format!("{f}.toml")))).unwrap();
    }
}

#[test]
fn summary_header_is_stable() {
    let cfg = ExperimentConfig::from_path(Path::new(&config("f1_race.toml"))).unwrap();
    let (header, rows) = summary_rows(&run_race(&cfg).unwrap(), cfg.metrics.hit_tol);
    assert_eq!(
        header.join(","),
        "optimizer,settling_time,max_overshoot_dim1,max_overshoot_dim2,first_hit_1e-5,diverged"
    );
    assert_eq!(rows.len(), 9);
}

#[test]
fn race_writes_parseable_svgs() {
    let dir = tempfile::tempdir().unwrap();
    let o = spiopt(dir.path(), &["race", &config("f2_race.toml")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let plots = dir.path().join("f2_race/plots");
    let mut n = 0;
    for entry in fs::read_dir(&plots).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        n += 1;
    }
    // one loss plot and one path plot per optimizer
    assert_eq!(n, 10);
}

#[test]
fn trajectory_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert!(spiopt(dir.path(), &["race", "--no-plots", &config("f1_race.toml")])
        .status
        .success());
    let text = fs::read_to_string(dir.path().join("f1_race/SPI.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,theta_1,theta_2,loss,loss_gap,residual_norm,state_delay,gate_mask"
    );
    assert_eq!(lines.count(), 101);
    assert!(!dir.path().join("f1_race/plots").exists());
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spiopt"))
        .env("SPIOPT_OUT", dir.path())
        .args(["race", "--no-plots", &config("f1_race.toml")])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("f1_race/summary.csv").exists());
}

#[test]
fn divergence_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("f1_race.toml"))
        .unwrap()
        .replace("r = 0.012", "r = 0.5")
        .replace("\"f1_race\"", "\"hot\"");
    let path = write(dir.path(), "hot.toml", &text);
    let o = spiopt(dir.path(), &["race", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("hot/summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",true")), "{summary}");
}

#[test]
fn invalid_inputs_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "config_version = 7\n");
    let o = spiopt(dir.path(), &["race", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml"), "{}", stderr(&o));

    let o = spiopt(dir.path(), &["race", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("missing.toml"));

    let o = spiopt(dir.path(), &["theorem", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = spiopt(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "");
    let o = spiopt(&blocker, &["race", "--no-plots", &config("f1_race.toml")]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("spiopt:"), "{}", stderr(&o));
}

#[test]
fn theorem_suite_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = spiopt(dir.path(), &["theorem", "--samples", "25", "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("theorem/summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mu,L,r,alpha,z,bound_holds,worst_margin");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.split(',').nth(5) == Some("true")));
}

#[test]
fn gradcheck_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = spiopt(dir.path(), &["gradcheck"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.matches("PASS").count(), 6, "{out}");
}

fn small_nn(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        r#"config_version = 1
name = "small"
optimizers = ["sgd", "mom", "spi"]
rates = [0.1, 1.6]
{extra}
[model]
hidden = 4
init_seed = 2

[training]
epochs = 4
batch_size = 16
shuffle_seed = 5
divergence_threshold = 100.0

[hyperparams]
alpha = 0.0
"#
    );
    write(dir, "small.toml", &text)
}

const GAUSSIANS: &str = "[dataset]\nkind = \"gaussians\"\nn_per_class = 40\ndim = 2\nseparation = 3.0\nseed = 1\n";

#[test]
fn nn_sweep_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_nn(dir.path(), GAUSSIANS);
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let o = spiopt(&dir.path().join(sub), &["nn", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let read = |f: &str| fs::read(dir.path().join(sub).join("small").join(f)).unwrap();
        outputs.push([
            read("robustness.csv"),
            read("sgd.csv"),
            read("mom.csv"),
            read("spi.csv"),
        ]);
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(text.starts_with("optimizer,r,diverged,diverged_epoch,final_loss,final_accuracy,peak_abs_param,rng,seed\n"));
    assert!(text.contains("ChaCha8Rng/seed_from_u64"));
    // with alpha = 0 momentum variants reproduce plain SGD
    let curves: Vec<&Vec<u8>> = outputs[0][1..].iter().collect();
    assert_eq!(curves[0], curves[1]);
    assert_eq!(curves[0], curves[2]);
}

#[test]
fn nn_missing_idx_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_nn(
        dir.path(),
        "[dataset]\nkind = \"idx\"\nimages = \"nope-images\"\nlabels = \"nope-labels\"\n",
    );
    let o = spiopt(dir.path(), &["nn", cfg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("nope-images"), "{}", stderr(&o));
}

#[test]
fn nn_reads_idx_files() {
    let dir = tempfile::tempdir().unwrap();
    let n = 60;
    let images: Vec<u8> = (0..n * 4 * 4).map(|i| ((i * 37) % 256) as u8).collect();
    let labels: Vec<u8> = (0..n).map(|i| (i % 3) as u8).collect();
    let (img, lab) = spiopt_core::nn::encode_idx(&images, 4, 4, &labels);
    fs::write(dir.path().join("img.idx"), img).unwrap();
    fs::write(dir.path().join("lab.idx"), lab).unwrap();
    let cfg = small_nn(
        dir.path(),
        "[dataset]\nkind = \"idx\"\nimages = \"img.idx\"\nlabels = \"lab.idx\"\nlimit = 48\n",
    );
    let o = spiopt(dir.path(), &["nn", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = fs::read_to_string(dir.path().join("small/robustness.csv")).unwrap();
    assert_eq!(rows.lines().count(), 7);
}
