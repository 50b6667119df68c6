use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_ganseval");

fn ganseval(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("GANSEVAL_CACHE_DIR")
        .output()
        .unwrap()
}

fn small_synth(dir: &Path, regime: &str, extra: &[&str]) {
    let out = dir.to_str().unwrap();
    let mut args = vec![
        "synth", "--out", out, "--regime", regime, "--seed", "42", "--n-real", "12", "--m-gen", "10", "--iters", "4",
    ];
    args.extend_from_slice(extra);
    let o = ganseval(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

/// Keys read straight from the cache files.
fn cache_listing(cache: &Path) -> Vec<String> {
    let mut keys: Vec<String> = fs::read_dir(cache)
        .unwrap()
        .map(|e| {
            let v: serde_json::Value = serde_json::from_slice(&fs::read(e.unwrap().path()).unwrap()).unwrap();
            v["key"].as_str().unwrap().to_string()
        })
        .collect();
    keys.sort();
    keys
}

#[test]
fn validate_good_workspace() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "converging", &[]);
    let o = ganseval(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("real: 12 series x 30 time points"));
    assert!(stdout.contains("run converging: 4 iterations"));
}

#[test]
fn validate_reports_ragged_csv() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "converging", &[]);
    let snap = dir.path().join("runs/converging/iter_000050.csv");
    let mut text = fs::read_to_string(&snap).unwrap();
    text.push_str("1,2,3\n");
    fs::write(&snap, text).unwrap();
    let o = ganseval(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.contains("iter_000050.csv") && report.contains("line 11"), "{report}");
}

#[test]
fn validate_missing_real_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = ganseval(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_then_compute_fills_cache() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "collapse", &[]);
    let o = ganseval(&["compute", dir.path().to_str().unwrap(), "--metric", "ed"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let keys = cache_listing(&dir.path().join(".ganseval-cache"));
    assert!(keys.contains(&"iteration-view run=collapse metric=ed kind=innd".to_string()));
    assert!(keys.contains(&"iteration-view run=collapse metric=ed kind=onnd".to_string()));
    assert!(!keys.iter().any(|k| k.contains("metric=dtw")));
    assert!(keys.contains(&"real-stats".to_string()));

    // second pass is all cache hits
    let o = ganseval(&["compute", dir.path().to_str().unwrap(), "--metric", "ed"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(!stdout.lines().any(|l| l.starts_with("computed ")), "{stdout}");
    assert!(stdout.contains("0 computed"));
}

#[test]
fn cache_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cache = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "noise", &[]);
    let o = Command::new(BIN)
        .args(["compute", dir.path().to_str().unwrap(), "--metric", "ed"])
        .env("GANSEVAL_CACHE_DIR", cache.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(!dir.path().join(".ganseval-cache").exists());
    assert!(!cache_listing(cache.path()).is_empty());
}

#[test]
fn usage_errors() {
    assert_eq!(ganseval(&["--bogus"]).status.code(), Some(1));
    assert_eq!(ganseval(&["compute", "x", "--metric", "cosine"]).status.code(), Some(1));
    assert_eq!(ganseval(&[]).status.code(), Some(1));
    assert_eq!(ganseval(&["--version"]).status.code(), Some(0));
}

#[test]
fn synth_refuses_to_overwrite_different_real_data() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "collapse", &["--name", "model1"]);
    small_synth(dir.path(), "converging", &["--name", "model2"]);
    let o = ganseval(&["synth", "--out", dir.path().to_str().unwrap(), "--seed", "7", "--n-real", "12", "--m-gen", "10", "--iters", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ganseval(&["validate", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.contains("run model1") && report.contains("run model2"));
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "converging", &[]);
    let ws = dir.path().to_str().unwrap();

    let o = ganseval(&["export", ws, "--artifact", "iteration-view", "--run", "converging", "--kind", "onnd", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("iteration,row,sample_index,value"));
    assert_eq!(csv.lines().count(), 1 + 4 * 12);

    let o = ganseval(&["export", ws, "--artifact", "stats", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["median"].as_array().unwrap().len(), 30);

    let o = ganseval(&["export", ws, "--artifact", "histogram", "--run", "converging", "--iteration", "100", "--format", "csv", "--bins", "5"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 30 * 5);

    let o = ganseval(&["export", ws, "--artifact", "colorfield", "--run", "converging", "--iteration", "101"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ganseval(&["export", ws, "--artifact", "iteration-view", "--run", "converging"]);
    assert_eq!(o.status.code(), Some(1));

    // run export re-loads to the same values
    let out = tempfile::tempdir().unwrap();
    let o = ganseval(&["export", ws, "--artifact", "run", "--run", "converging", "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success());
    let a = ganseval_core::workspace::load_run(dir.path().join("runs/converging/run.json"), None).unwrap();
    let b = ganseval_core::workspace::load_run(out.path().join("run.json"), None).unwrap();
    assert_eq!(a, b);
}

fn http_get(port: u16, path: &str) -> (u16, String) {
    let mut s = TcpStream::connect(("127.0.0.1", port)).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).unwrap();
    let status = buf[9..12].parse().unwrap();
    let body = buf.split("\r\n\r\n").nth(1).unwrap_or("").to_string();
    (status, body)
}

#[test]
fn compute_then_serve_reads_only_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "collapse", &[]);
    let ws = dir.path().to_str().unwrap();
    assert!(ganseval(&["compute", ws, "--metric", "both"]).status.success());
    let cache = dir.path().join(".ganseval-cache");
    let before = cache_listing(&cache);

    let mut child = Command::new(BIN)
        .args(["serve", "--workspace", ws, "--port", "0"])
        .env_remove("GANSEVAL_CACHE_DIR")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let port: u16 = loop {
        let line = lines.next().expect("server exited").unwrap();
        if let Some(addr) = line.split("listening on ").nth(1) {
            break addr.rsplit(':').next().unwrap().trim().parse().unwrap();
        }
    };
    let (status, body) = http_get(port, "/api/health");
    assert_eq!((status, body.as_str()), (200, r#"{"status":"ok"}"#));
    for path in [
        "/api/runs/collapse/iteration-view?metric=dtw&kind=onnd",
        "/api/runs/collapse/iterations/150/detail",
        "/api/real/detail",
        "/api/real/stats",
        "/api/series/g_150_3?run=collapse",
        "/api/series/r_11",
    ] {
        assert_eq!(http_get(port, path).0, 200, "{path}");
    }
    assert_eq!(http_get(port, "/api/series/r_12").0, 404);
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(cache_listing(&cache), before);
}

#[test]
fn serve_bind_failure_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "noise", &[]);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let o = ganseval(&["serve", "--workspace", dir.path().to_str().unwrap(), "--port", &port]);
    assert_eq!(o.status.code(), Some(2));
}
