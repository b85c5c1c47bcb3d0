use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use imt_core::corpus_io::{load_sentences, LoadOptions};
use imt_core::pipeline::translate_all;
use imt_core::{DecoderConfig, Side, ToyScorerModel};
use imt_testkit::fixtures::toy_path;

fn imt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imt"))
        .args(args)
        .env_remove("IMT_MODEL_PATH")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_everywhere() {
    let top = imt(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    for (sub, flag) in [
        ("translate", "--input"),
        ("simulate", "--max-gap"),
        ("score", "--hyp"),
        ("tune-gap", "--max-gap-range"),
        ("serve", "--persist"),
    ] {
        assert!(stdout(&top).contains(sub));
        let out = imt(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(stdout(&out).contains(flag), "{sub}");
    }
    assert_eq!(imt(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let model = toy_path("toy.model");
    assert_eq!(imt(&[]).status.code(), Some(1));
    assert_eq!(imt(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        imt(&["translate", "--input", "x"]).status.code(),
        Some(1),
        "model is required"
    );
    let tsv = toy_path("toy.tsv");
    let inverted = imt(&[
        "tune-gap",
        "--dev-tsv",
        path(&tsv),
        "--model",
        path(&model),
        "--max-gap-range",
        "3..1",
    ]);
    assert_eq!(inverted.status.code(), Some(1));
    let bad_port = imt(&["serve", "--model", path(&model), "--port", "70000"]);
    assert_eq!(bad_port.status.code(), Some(1));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let model = toy_path("toy.model");
    let en = toy_path("toy.en");
    assert_eq!(
        imt(&[
            "translate",
            "--input",
            path(&empty),
            "--model",
            path(&model)
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        imt(&["score", "--hyp", path(&empty), "--ref", path(&en)])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.model");
    let out = imt(&["translate", "--input", path(&en), "--model", path(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    let short = dir.path().join("short.en");
    std::fs::write(&short, "the cat\n").unwrap();
    let es = toy_path("toy.es");
    let out = imt(&[
        "simulate",
        "--src",
        path(&es),
        "--tgt",
        path(&short),
        "--model",
        path(&model),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line count"));
}

#[test]
fn translate_matches_library_decoding() {
    let model_path = toy_path("toy.model");
    let es = toy_path("toy.es");
    let out = imt(&[
        "translate",
        "--input",
        path(&es),
        "--model",
        path(&model_path),
        "--max-gap",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let model = ToyScorerModel::load(&model_path).unwrap();
    let sources = load_sentences(&es, Side::Source, LoadOptions::default()).unwrap();
    let hyps = translate_all(&model, &sources, &DecoderConfig::with_max_gap(2)).unwrap();
    let expected: String = hyps
        .iter()
        .map(|h| format!("{}\n", h.tokens.detokenize()))
        .collect();
    assert_eq!(stdout(&out), expected);
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let model = toy_path("toy.model");
    let (es, en) = (toy_path("toy.es"), toy_path("toy.en"));
    let run = |tag: &str| {
        let report = dir.path().join(format!("report{tag}.json"));
        let log = dir.path().join(format!("log{tag}.jsonl"));
        let csv = dir.path().join(format!("report{tag}.csv"));
        let out = imt(&[
            "simulate",
            "--src",
            path(&es),
            "--tgt",
            path(&en),
            "--model",
            path(&model),
            "--out",
            path(&report),
            "--log",
            path(&log),
            "--csv",
            path(&csv),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        (
            std::fs::read(report).unwrap(),
            std::fs::read(log).unwrap(),
            std::fs::read(csv).unwrap(),
        )
    };
    let first = run("a");
    assert_eq!(run("b"), first);
    let report: serde_json::Value = serde_json::from_slice(&first.0).unwrap();
    for key in ["bleu", "ter", "wsr", "ksr", "mar"] {
        assert!(report[key].is_number(), "{key}");
    }
    assert_eq!(String::from_utf8(first.1).unwrap().lines().count(), 20);
    assert!(String::from_utf8(first.2)
        .unwrap()
        .starts_with("bleu,ter,wsr,ksr,mar,sentences\n"));
}

#[test]
fn score_identity() {
    let en = toy_path("toy.en");
    let out = imt(&["score", "--hyp", path(&en), "--ref", path(&en)]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bleu"], 100.0);
    assert_eq!(v["ter"], 0.0);
}

#[test]
fn tune_gap_agrees_with_separate_runs() {
    let model = toy_path("toy.model");
    let tsv = toy_path("toy.tsv");
    let out = imt(&[
        "tune-gap",
        "--dev-tsv",
        path(&tsv),
        "--model",
        path(&model),
        "--max-gap-range",
        "0..3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mut best = (f64::INFINITY, 0);
    for m in 0..=3u64 {
        let sim = imt(&[
            "simulate",
            "--tsv",
            path(&tsv),
            "--model",
            path(&model),
            "--max-gap",
            &m.to_string(),
        ]);
        let report: serde_json::Value = serde_json::from_str(&stdout(&sim)).unwrap();
        let ksr = report["ksr"].as_f64().unwrap();
        assert_eq!(v["scores"][m as usize]["ksr"].as_f64().unwrap(), ksr);
        if ksr < best.0 {
            best = (ksr, m);
        }
    }
    assert_eq!(v["best"].as_u64().unwrap(), best.1);

    let single = imt(&[
        "tune-gap",
        "--dev-tsv",
        path(&tsv),
        "--model",
        path(&model),
        "--max-gap-range",
        "0..0",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&single)).unwrap();
    assert_eq!(v["best"], 0);
}

#[test]
fn model_from_environment_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let model = toy_path("toy.model");
    let tsv = toy_path("toy.tsv");
    let reference = imt(&[
        "simulate",
        "--tsv",
        path(&tsv),
        "--model",
        path(&model),
        "--max-gap",
        "1",
    ]);

    let via_env = Command::new(env!("CARGO_BIN_EXE_imt"))
        .args(["simulate", "--tsv", path(&tsv), "--max-gap", "1"])
        .env("IMT_MODEL_PATH", &model)
        .output()
        .unwrap();
    assert_eq!(via_env.stdout, reference.stdout);

    let config = dir.path().join("imt.conf");
    std::fs::write(
        &config,
        format!("# defaults\nmodel={}\nmax-gap=1\n", path(&model)),
    )
    .unwrap();
    let via_config = imt(&["simulate", "--config", path(&config), "--tsv", path(&tsv)]);
    assert_eq!(via_config.stdout, reference.stdout);

    let overridden = imt(&[
        "simulate",
        "--config",
        path(&config),
        "--tsv",
        path(&tsv),
        "--max-gap",
        "0",
    ]);
    let at_zero = imt(&[
        "simulate",
        "--tsv",
        path(&tsv),
        "--model",
        path(&model),
        "--max-gap",
        "0",
    ]);
    assert_eq!(overridden.stdout, at_zero.stdout);

    std::fs::write(&config, "colour=blue\n").unwrap();
    assert_eq!(
        imt(&["simulate", "--config", path(&config), "--tsv", path(&tsv)])
            .status
            .code(),
        Some(1)
    );
}

fn http_get(port: u16, uri: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(
        stream,
        "GET {uri} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

#[test]
fn serve_answers_health_checks() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let model = toy_path("toy.model");
    let mut child = Command::new(env!("CARGO_BIN_EXE_imt"))
        .args([
            "serve",
            "--model",
            path(&model),
            "--port",
            &port.to_string(),
        ])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(10);
    let mut reply = None;
    while Instant::now() < deadline {
        if let Some(r) = http_get(port, "/api/health") {
            reply = Some(r);
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    let reply = reply.expect("server did not come up");
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("\"status\":\"ok\""));
}
