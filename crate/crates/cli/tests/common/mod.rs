#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use ganseval_core::workspace::{write_real, write_run, REAL_FILE, RUNS_DIR};
use ganseval_core::*;
use http_body_util::BodyExt;
use tower::ServiceExt;

/// Two runs over one real set: `model1` collapses, `model2` converges and
/// uses the iteration numbers 40 / 386 / 926.
pub fn fixture(root: &Path, n_real: usize) -> Arc<Workspace> {
    let base = SynthConfig {
        n_real,
        m_gen: 48,
        n_iters: 3,
        ..SynthConfig::default()
    };
    let real = generate_real(&base).unwrap();
    let collapse = generate_run(&SynthConfig { regime: Regime::Collapse, ..base.clone() }, &real).unwrap();
    let conv = generate_run(&SynthConfig { regime: Regime::Converging, ..base }, &real).unwrap();
    let model1 = GenerationRun::new("model1", collapse.snapshots().to_vec()).unwrap();
    let model2 = GenerationRun::new(
        "model2",
        conv.snapshots()
            .iter()
            .zip([40, 386, 926])
            .map(|(s, it)| Snapshot { iteration: it, series: s.series.clone() })
            .collect(),
    )
    .unwrap();
    write_real(root.join(REAL_FILE), &real).unwrap();
    write_run(root.join(RUNS_DIR).join("model1"), &model1).unwrap();
    write_run(root.join(RUNS_DIR).join("model2"), &model2).unwrap();
    Arc::new(Workspace::open(root).unwrap())
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    let req = Request::builder()
        .uri(uri)
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let content_type = headers
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, content_type, headers, body }
}

pub fn f64s(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}
