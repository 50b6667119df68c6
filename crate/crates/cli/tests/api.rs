mod common;

use axum::http::StatusCode;
use common::{f64s, fixture, get};
use ganseval::service::{router, JSON_CONTENT_TYPE};
use ganseval_core::*;

#[tokio::test]
async fn health_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(fixture(dir.path(), 20));
    let r = get(&app, "/api/health").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, br#"{"status":"ok"}"#);
    assert_eq!(r.content_type.as_deref(), Some(JSON_CONTENT_TYPE));
    assert_eq!(r.headers.get("access-control-allow-origin").unwrap(), "*");

    let runs = get(&app, "/api/runs").await.json();
    let names: Vec<&str> = runs["runs"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, vec!["model1", "model2"]);
    assert_eq!(runs["runs"][1]["iterations"], serde_json::json!([40, 386, 926]));
}

#[tokio::test]
async fn unknown_paths_use_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(fixture(dir.path(), 20));
    for uri in ["/api/nothing", "/", "/api/runs/model1/unknown"] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        let j = r.json();
        assert_eq!(j["status"], 404);
        assert_eq!(j["code"], "not_found");
        assert!(j["message"].is_string());
        assert_eq!(r.content_type.as_deref(), Some(JSON_CONTENT_TYPE));
    }
}

#[tokio::test]
async fn iteration_view_shapes_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let ws = fixture(dir.path(), 20);
    let app = router(ws.clone());

    let onnd = get(&app, "/api/runs/model2/iteration-view?metric=ed&kind=onnd").await.json();
    assert_eq!(onnd["rows"], serde_json::json!([20, 20, 20]));
    for col in onnd["cells"].as_array().unwrap() {
        assert_eq!(col.as_array().unwrap().len(), 20);
    }
    let innd = get(&app, "/api/runs/model2/iteration-view?metric=ed&kind=innd").await.json();
    assert_eq!(innd["rows"], serde_json::json!([48, 48, 48]));

    for body in [&onnd, &innd] {
        let all: Vec<f64> = body["cells"].as_array().unwrap().iter().flat_map(f64s).collect();
        let min = all.iter().copied().fold(f64::INFINITY, f64::min);
        let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(body["min"].as_f64().unwrap(), min);
        assert_eq!(body["max"].as_f64().unwrap(), max);
        assert_eq!(body["clip"], "none");
    }

    let clipped = get(&app, "/api/runs/model2/iteration-view?metric=ed&kind=innd&clip=p99").await.json();
    assert_eq!(clipped["clip"], "p99");
    assert!(clipped["max"].as_f64().unwrap() <= innd["max"].as_f64().unwrap());
    assert_eq!(clipped["cells"], innd["cells"]);
}

#[tokio::test]
async fn dtw_onnd_never_exceeds_ed_onnd() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(fixture(dir.path(), 20));
    let ed = get(&app, "/api/runs/model1/iteration-view?metric=ed&kind=onnd").await.json();
    let dtw = get(&app, "/api/runs/model1/iteration-view?metric=dtw&kind=onnd").await.json();
    assert_eq!(ed["row_order"], dtw["row_order"]);
    for (a, b) in ed["cells"].as_array().unwrap().iter().zip(dtw["cells"].as_array().unwrap()) {
        for (e, d) in f64s(a).iter().zip(f64s(b)) {
            assert!(d <= e + 1e-9, "{d} > {e}");
        }
    }
}

#[tokio::test]
async fn iteration_view_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(fixture(dir.path(), 20));
    let cases = [
        ("/api/runs/nope/iteration-view?metric=ed&kind=innd", 404, "not_found"),
        ("/api/runs/model1/iteration-view?metric=l1&kind=innd", 400, "bad_metric"),
        ("/api/runs/model1/iteration-view?metric=ed&kind=both", 400, "bad_kind"),
        ("/api/runs/model1/iteration-view?kind=innd", 400, "bad_metric"),
        ("/api/runs/model1/iteration-view?metric=ed&kind=innd&clip=p50", 400, "bad_clip"),
    ];
    for (uri, status, code) in cases {
        let r = get(&app, uri).await;
        assert_eq!(r.status.as_u16(), status, "{uri}");
        let j = r.json();
        assert_eq!(j["status"], status);
        assert_eq!(j["code"], code, "{uri}");
    }
}

#[tokio::test]
async fn detail_colorfield_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let ws = fixture(dir.path(), 20);
    let app = router(ws.clone());
    let d = get(&app, "/api/runs/model2/iterations/386/detail?bins=12").await.json();
    assert_eq!(d["source"], "generated");
    assert_eq!(d["iteration"], 386);
    let ids: Vec<u64> = d["colorfield"]["ids"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(ids, (0..48).collect::<Vec<_>>());
    assert_eq!(d["time_histogram"]["bin_edges"].as_array().unwrap().len(), 13);
    for col in d["time_histogram"]["counts"].as_array().unwrap() {
        let sum: u64 = col.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(sum, 48);
    }

    // rows equal the snapshot permuted by an independent score argsort
    let model = fit_pca(ws.real()).unwrap();
    let snap = &ws.run("model2").unwrap().snapshot(386).unwrap().series;
    let scores: Vec<f64> = snap
        .iter_rows()
        .map(|r| r.iter().zip(model.mean()).zip(model.pc1()).map(|((x, m), p)| (x - m) * p).sum())
        .collect();
    let mut order: Vec<usize> = (0..snap.rows()).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap().then(i.cmp(&j)));
    let rows = d["colorfield"]["rows"].as_array().unwrap();
    for (row, &i) in rows.iter().zip(&order) {
        assert_eq!(f64s(row), snap.row(i));
    }

    let real = get(&app, "/api/real/detail").await.json();
    assert_eq!(real["source"], "real");
    assert_eq!(real["bins"], 20);
    assert_eq!(real["colorfield"]["rows"].as_array().unwrap().len(), 20);

    assert_eq!(get(&app, "/api/runs/model2/iterations/387/detail").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/runs/zzz/iterations/386/detail").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/runs/model2/iterations/abc/detail").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/real/detail?bins=1").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/real/detail?bins=x").await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn series_selectors_use_display_labels() {
    let dir = tempfile::tempdir().unwrap();
    let ws = fixture(dir.path(), 305);
    let app = router(ws.clone());

    let r = get(&app, "/api/series/r_304").await.json();
    assert_eq!(r["label"], "r_304");
    assert_eq!(r["source"], "real");
    assert!(r["run"].is_null());

    let g = get(&app, "/api/series/g_926_47?run=model2").await.json();
    assert_eq!(g["label"], "g_926_47");
    assert_eq!(g["iteration"], 926);
    assert_eq!(g["id"], 47);
    let values = f64s(&g["values"]);
    let original = g["original_index"].as_u64().unwrap() as usize;
    assert_eq!(values, ws.run("model2").unwrap().snapshot(926).unwrap().series.row(original));
    let stats = real_stats(ws.real());
    assert_eq!(f64s(&g["diff_to_median"]), diff_to_median(&values, &stats).unwrap());
    let band = percentile_membership(&values, &stats).unwrap().map(|b| b.coverage());
    assert_eq!(g["percentile_membership"].as_f64(), band);

    let cases = [
        ("/api/series/x_1", 400, "bad_selector"),
        ("/api/series/g_926_47", 400, "missing_run"),
        ("/api/series/r_305", 404, "not_found"),
        ("/api/series/g_926_48?run=model2", 404, "not_found"),
        ("/api/series/g_925_0?run=model2", 404, "not_found"),
        ("/api/series/g_926_0?run=nope", 404, "not_found"),
    ];
    for (uri, status, code) in cases {
        let r = get(&app, uri).await;
        assert_eq!(r.status.as_u16(), status, "{uri}");
        assert_eq!(r.json()["code"], code, "{uri}");
    }
}

#[tokio::test]
async fn stats_endpoint_and_finite_arrays() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(fixture(dir.path(), 20));
    let s = get(&app, "/api/real/stats").await.json();
    assert_eq!(s["median"].as_array().unwrap().len(), 30);
    for key in ["band68", "band95", "band997"] {
        for pair in s[key].as_array().unwrap() {
            let p = f64s(pair);
            assert!(p[0] <= p[1] && p.iter().all(|v| v.is_finite()));
        }
    }
}

#[tokio::test]
async fn responses_are_byte_stable_and_read_only() {
    let dir = tempfile::tempdir().unwrap();
    let ws = fixture(dir.path(), 20);
    let real_before = std::fs::read(dir.path().join("real.csv")).unwrap();
    let app = router(ws.clone());
    let uris = [
        "/api/runs",
        "/api/real/stats",
        "/api/real/detail?bins=7",
        "/api/runs/model1/iteration-view?metric=dtw&kind=innd",
        "/api/runs/model2/iterations/40/detail",
        "/api/series/g_40_3?run=model2",
        "/api/series/r_0",
    ];
    for uri in uris {
        let a = get(&app, uri).await;
        let b = get(&app, uri).await;
        assert_eq!(a.status, StatusCode::OK, "{uri}");
        assert_eq!(a.body, b.body, "{uri}");
    }
    // a fresh server over a reopened workspace answers identically from cache
    let reopened = std::sync::Arc::new(Workspace::open(dir.path()).unwrap());
    let app2 = router(reopened.clone());
    for uri in uris {
        assert_eq!(get(&app, uri).await.body, get(&app2, uri).await.body, "{uri}");
    }
    assert_eq!(reopened.compute_count(), 0);
    assert_eq!(std::fs::read(dir.path().join("real.csv")).unwrap(), real_before);
}
