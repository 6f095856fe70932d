use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use skp_registry::{router, Registry};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

#[tokio::test]
async fn contract_lifecycle() {
    let app = router(Arc::new(Registry::default()));
    let (s, v) = call(&app, "POST", "/contracts", Some(json!({"name": "ca", "contract": "!c.a"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v, json!({"id": 1}));
    call(&app, "POST", "/contracts", Some(json!({"name": "b", "contract": "!b"}))).await;

    let (s, v) = call(&app, "GET", "/contracts", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 2);

    let (s, v) = call(&app, "GET", "/contracts/1", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["name"], "ca");
    assert_eq!(v["contract"], "!c.a");

    let (s, v) = call(&app, "POST", "/query", Some(json!({"client": "!a"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["matches"], json!([{"id": 1, "name": "ca"}]));

    let (_, v) = call(&app, "GET", "/preorder", None).await;
    assert!(v["edges"].as_array().unwrap().contains(&json!([1, 1])));

    let (s, _) = call(&app, "DELETE", "/contracts/1", None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, v) = call(&app, "GET", "/contracts/1", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn parse_errors_are_bad_requests() {
    let app = router(Arc::new(Registry::default()));
    let (s, v) = call(&app, "POST", "/contracts", Some(json!({"name": "x", "contract": "a.("}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("syntax"));
    let (s, v) = call(&app, "POST", "/query", Some(json!({"client": "!a (+) b"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn concurrent_readers_see_whole_registrations() {
    let reg = Arc::new(Registry::default());
    let writer = {
        let reg = reg.clone();
        std::thread::spawn(move || {
            for k in 0..20 {
                reg.register(&format!("s{k}"), &format!("!c{k}.a")).unwrap();
            }
        })
    };
    for _ in 0..200 {
        let snap = reg.snapshot();
        assert_eq!(snap.index().ids().len(), snap.len());
        let n = snap.len() as u64;
        assert!(snap.index().edges().iter().all(|&(i, j)| i <= n && j <= n));
    }
    writer.join().unwrap();
    assert_eq!(reg.snapshot().len(), 20);
}
