//! End-to-end checks of the command-line interface: artifact layout,
//! manifests, determinism, input immutability, and exit-code categories.

use std::path::{Path, PathBuf};
use std::process::Command;

fn sos() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sos"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sos_cli_{}_{name}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap_or(-1)
}

fn write_run_config(dir: &Path) -> PathBuf {
    let config = serde_json::json!({
        "schema": "data/schema.json",
        "train_csv": "data/train.csv",
        "test_csv": "data/test.csv",
        "output_dir": "out",
        "seed": 9,
        "threads": 2,
        "sde": { "family": "SubVP", "beta_min": 0.01, "beta_max": 5.0 },
        "net": { "layer_type": "Concat", "hidden_dims": [16, 16], "activation": "SoftPlus" },
        "train": { "batch_size": 64, "epochs": 5, "learning_rate": 0.002, "seed": 0 },
        "finetune": { "xi_degrees": 90.0, "w": 0.95, "eps_t": 5e-4, "epochs": 1,
                      "learning_rate": 2e-6, "seed": 0 },
        "sampler": { "predictor": "EM", "corrector": "None", "snr": 0.16, "steps": 10,
                     "corrector_steps": 1, "t_end": 1.0, "seed": 0 },
        "option": "Regular",
        "eval": { "classifiers": ["LogisticRegression"], "seeds": [0, 1, 2],
                  "test_fraction": 0.2 }
    });
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn make_data(dir: &Path, seed: u64) {
    run_ok(
        sos()
            .args(["make-synth", "--kind", "two-gauss-imbalanced", "--seed", &seed.to_string()])
            .args(["--n-major", "240", "--n-minor", "40", "--delta", "2.0"])
            .arg("--out-dir")
            .arg(dir.join("data")),
    );
}

#[test]
fn full_pipeline_through_the_cli() {
    let dir = tmp("pipeline");
    make_data(&dir, 3);
    let config = write_run_config(&dir);
    let out = dir.join("out");

    run_ok(sos().args(["prep", "--config"]).arg(&config));
    assert!(out.join("encoder.json").exists());
    assert!(out.join("manifest_prep.json").exists());

    run_ok(sos().args(["train", "--config"]).arg(&config));
    assert!(out.join("models/modelset.json").exists());
    assert!(out.join("models/model_class_0.json").exists());
    assert!(out.join("models/model_class_1.json").exists());
    let loss_log = std::fs::read_to_string(out.join("loss_class_0.csv")).unwrap();
    assert!(loss_log.starts_with("epoch,mean_loss,wall_seconds\n"));
    assert_eq!(loss_log.lines().count(), 1 + 5, "one line per epoch");

    // finetune writes elsewhere and leaves its inputs untouched
    let before = std::fs::read_to_string(out.join("models/model_class_1.json")).unwrap();
    run_ok(sos().args(["finetune", "--config"]).arg(&config));
    assert!(out.join("models_finetuned/modelset.json").exists());
    let after = std::fs::read_to_string(out.join("models/model_class_1.json")).unwrap();
    assert_eq!(before, after, "finetune must not mutate its input models");

    run_ok(sos().args(["oversample", "--config"]).arg(&config));
    let augmented = std::fs::read_to_string(out.join("augmented.csv")).unwrap();
    let train_csv = std::fs::read_to_string(dir.join("data/train.csv")).unwrap();
    assert!(augmented.starts_with("f1,f2,cls\n"), "original header preserved");
    // per-class train counts are 192/32; balancing appends 160 minor rows
    assert_eq!(augmented.lines().count(), train_csv.lines().count() + 160);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest_oversample.json")).unwrap())
            .unwrap();
    assert!(manifest["details"]["models_used"].as_str().unwrap().contains("models_finetuned"));
    assert!(manifest["details"]["total_generation_seconds"].as_f64().unwrap() >= 0.0);

    let stdout = run_ok(
        sos().args(["eval", "--config"]).arg(&config).arg("--train").arg(out.join("augmented.csv")),
    );
    assert!(stdout.contains("weighted F1"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["overall"]["mean"].as_f64().unwrap() > 0.0);
    assert!(metrics["per_classifier"]["LogisticRegression"]["std"].as_f64().unwrap() >= 0.0);
    assert_eq!(metrics["runs"].as_array().unwrap().len(), 3);

    run_ok(sos().args(["histogram", "--config"]).arg(&config).args(["--column", "f1", "--bins", "8"]));
    let hist = std::fs::read_to_string(out.join("hist_f1.csv")).unwrap();
    assert!(hist.starts_with("low,high,count_real,count_fake\n"));
    let (mut real_sum, mut fake_sum) = (0usize, 0usize);
    for line in hist.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        real_sum += cells[2].parse::<usize>().unwrap();
        fake_sum += cells[3].parse::<usize>().unwrap();
    }
    assert_eq!(real_sum, train_csv.lines().count() - 1);
    assert_eq!(fake_sum, augmented.lines().count() - 1);

    run_ok(sos().args(["synth-full", "--config"]).arg(&config));
    let synthetic = std::fs::read_to_string(out.join("synthetic.csv")).unwrap();
    assert_eq!(synthetic.lines().count(), train_csv.lines().count());
}

#[test]
fn make_synth_is_byte_deterministic() {
    let a = tmp("det_a");
    let b = tmp("det_b");
    make_data(&a, 11);
    make_data(&b, 11);
    let ta = std::fs::read(a.join("data/train.csv")).unwrap();
    let tb = std::fs::read(b.join("data/train.csv")).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn exit_codes_by_category() {
    let dir = tmp("codes");
    // 2: config missing
    assert_eq!(exit_code(sos().args(["train", "--config", "/nonexistent/run.json"])), 2);

    make_data(&dir, 5);
    let config = write_run_config(&dir);

    // 4: oversample before train
    assert_eq!(exit_code(sos().args(["oversample", "--config"]).arg(&config)), 4);

    // 3: data error (non-numeric continuous cell), named column in the message
    let train = dir.join("data/train.csv");
    let text = std::fs::read_to_string(&train).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let bad = lines[1].replace(|c: char| c.is_ascii_digit(), "x");
    lines[1] = &bad;
    std::fs::write(&train, lines.join("\n")).unwrap();
    let out = sos().args(["prep", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f1"));

    // 2: unknown subcommand is a usage error
    assert_eq!(exit_code(sos().arg("frobnicate")), 2);
}

#[test]
fn tampered_model_version_is_an_artifact_error() {
    let dir = tmp("version");
    make_data(&dir, 7);
    let config = write_run_config(&dir);
    run_ok(sos().args(["train", "--config"]).arg(&config));
    let model = dir.join("out/models/model_class_0.json");
    let text = std::fs::read_to_string(&model).unwrap();
    std::fs::write(&model, text.replace("\"format_version\":1", "\"format_version\":2")).unwrap();
    assert_eq!(exit_code(sos().args(["oversample", "--config"]).arg(&config)), 4);
}

#[test]
fn config_can_come_from_the_environment() {
    let dir = tmp("env");
    make_data(&dir, 13);
    let config = write_run_config(&dir);
    run_ok(sos().arg("prep").env("SOS_CONFIG", &config));
    assert!(dir.join("out/encoder.json").exists());
}
