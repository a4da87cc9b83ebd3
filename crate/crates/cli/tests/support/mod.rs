//! Helpers that drive the `affectlag` binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affectlag"))
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn affectlag")
}

/// Runs a command and panics with its stderr unless it exits 0.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "affectlag {} exited {:?}: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// Desk config shrunk further so a whole pipeline runs in seconds.
pub fn write_small_config(dir: &Path) -> PathBuf {
    let path = dir.join("cfg.json");
    ok(dir, &["config", "init", "--desk", "cfg.json"]);
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    cfg["synth"]["n_users"] = 40.into();
    cfg["synth"]["days"] = 20.into();
    cfg["yun"]["epochs"] = 3.into();
    cfg["emotion"]["epochs"] = 2.into();
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

/// Synthetic corpus through to the rendered report, all inside `dir`.
pub fn full_pipeline(dir: &Path, seed: &str) {
    write_small_config(dir);
    let steps: &[&[&str]] = &[
        &["synth", "cfg.json", "data/corpus.jsonl", "data/manifest.json", "--seed", seed],
        &["graph", "build", "data/corpus.jsonl", "out/graph.json", "--config", "cfg.json"],
        &["embed", "nodes", "out/graph.json", "out/nodes.txt", "--config", "cfg.json", "--seed", seed],
        &["embed", "words", "data/corpus.jsonl", "out/words.txt", "--config", "cfg.json", "--seed", seed],
        &[
            "train", "user-model", "data/corpus.jsonl", "cfg.json", "out/yun.json", "--words", "out/words.txt",
            "--nodes", "out/nodes.txt", "--history", "out/yun_history.csv", "--seed", seed,
        ],
        &["classify", "users", "data/corpus.jsonl", "out/yun.json", "out/users.jsonl"],
        &[
            "train", "emotion", "data/corpus.jsonl", "cfg.json", "out/emo.json", "--words", "out/words.txt",
            "--history", "out/emo_history.csv", "--seed", seed,
        ],
        &["classify", "emotion", "data/corpus.jsonl", "out/emo.json", "out/emotions.jsonl"],
        &[
            "series", "build", "data/corpus.jsonl", "out/emotions.jsonl", "out/series", "--config", "cfg.json",
            "--user-types", "out/users.jsonl", "--keep-type", "practitioner",
        ],
        &["granger", "run", "out/series", "out/run", "--config", "cfg.json"],
        &["granger", "control", "data/corpus.jsonl", "out/emotions.jsonl", "out/control"],
        &["report", "out/run", "out/control", "out/report.json"],
        &["report", "out/run", "out/control", "out/report.txt"],
        &["plotdata", "out/series", "out/plot.csv", "--svg", "out/plot.svg"],
    ];
    for args in steps {
        ok(dir, args);
    }
}

/// Every regular file under `root`, as sorted relative paths.
pub fn files_under(root: &Path) -> Vec<PathBuf> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
