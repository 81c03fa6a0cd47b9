mod common;

use std::sync::{Arc, OnceLock};

use axum::http::StatusCode;
use common::{catalog, get};
use equate_core::payload::{to_body, Catalog, LanguagesQuery, StatsKind};
use equate_service::{router, AppState};

fn shared() -> Arc<AppState> {
    static STATE: OnceLock<Arc<AppState>> = OnceLock::new();
    STATE.get_or_init(|| Arc::new(AppState::new(Some(catalog(2024, 300))))).clone()
}

fn cat() -> Arc<Catalog> {
    shared().current().unwrap()
}

#[tokio::test]
async fn languages_page_contract() {
    let app = router(shared(), None);
    let r = get(&app, "/v1/languages?min_speakers=1000000&dimension=overall&limit=10").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.headers["content-type"], "application/json");
    let v = r.json();
    assert_eq!(v["build_id"], cat().build_id());
    assert_eq!(r.build_id.as_deref(), Some(cat().build_id()));
    let items = v["items"].as_array().unwrap();
    assert!(items.len() <= 10 && !items.is_empty());
    let scores: Vec<f64> = items.iter().map(|i| i["overall"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert!(items.iter().all(|i| i["n_speakers"].as_u64().unwrap() >= 1_000_000));
}

#[tokio::test]
async fn identical_requests_give_identical_bytes() {
    let app = router(shared(), None);
    let a = get(&app, "/v1/languages?dimension=ai&limit=50&offset=20").await;
    let b = get(&app, "/v1/languages?dimension=ai&limit=50&offset=20").await;
    assert_eq!(a.body, b.body);
    let q = LanguagesQuery::from_pairs([("dimension", "ai"), ("limit", "50"), ("offset", "20")]).unwrap();
    assert_eq!(a.body, to_body(&cat().languages(&q)));
}

#[tokio::test]
async fn offset_past_end() {
    let app = router(shared(), None);
    let v = get(&app, "/v1/languages?offset=100000").await.json();
    assert_eq!(v["items"].as_array().unwrap().len(), 0);
    assert_eq!(v["total"], 300);
}

#[tokio::test]
async fn malformed_parameters_are_400() {
    let app = router(shared(), None);
    for uri in [
        "/v1/languages?limit=x",
        "/v1/languages?dimension=nope",
        "/v1/languages?what=1",
        "/v1/map/clusters?zoom=13",
        "/v1/map/clusters?bbox=1,2,3",
        "/v1/map/clusters?bbox=10,0,0,10",
    ] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{uri}");
        let v = r.json();
        assert!(v["error"].is_string());
        assert_eq!(v["build_id"], cat().build_id());
    }
}

#[tokio::test]
async fn detail_and_unknown_code() {
    let app = router(shared(), None);
    let top = cat().summaries()[0].clone();
    let r = get(&app, &format!("/v1/languages/{}", top.glottocode)).await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["summary"], serde_json::to_value(&top).unwrap());
    assert_eq!(v["build_id"], cat().build_id());
    assert_eq!(get(&app, "/v1/languages/nope1234").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn clusters_and_stats() {
    let app = router(shared(), None);
    let v = get(&app, "/v1/map/clusters?bbox=-180,-90,180,90&zoom=0").await.json();
    let sum: u64 = v["clusters"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).sum();
    assert_eq!(sum, 300);
    for kind in StatsKind::ALL {
        let r = get(&app, &format!("/v1/stats/{}", kind.as_str())).await;
        assert_eq!(r.status, StatusCode::OK);
        assert_eq!(r.body, to_body(&cat().stats(kind).unwrap()));
    }
    assert_eq!(get(&app, "/v1/stats/gompertz").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn openapi_and_cors() {
    let app = router(shared(), None);
    let r = get(&app, "/v1/openapi").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert!(v["paths"]["/v1/map/clusters"].is_object());
    assert_eq!(r.headers["access-control-allow-origin"], "*");

    let only = router(shared(), Some(vec!["http://ui.example".parse().unwrap()]));
    let r = get(&only, "/v1/languages?limit=1").await;
    assert_eq!(r.headers["access-control-allow-origin"], "http://ui.example");
}

#[tokio::test]
async fn no_snapshot_is_503() {
    let app = router(Arc::new(AppState::new(None)), None);
    for uri in ["/v1/languages", "/v1/languages/abcd1234", "/v1/map/clusters", "/v1/stats/zipf"] {
        assert_eq!(get(&app, uri).await.status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
    }
    assert_eq!(get(&app, "/v1/openapi").await.status, StatusCode::OK);
}

#[tokio::test]
async fn unknown_route_is_404() {
    let app = router(shared(), None);
    assert_eq!(get(&app, "/v2/whatever").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn serves_over_tcp() {
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(equate_service::serve(listener, router(shared(), None), async {
        rx.await.ok();
    }));
    let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
    s.write_all(b"GET /v1/languages?limit=2 HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).await.unwrap();
    assert!(buf.starts_with("HTTP/1.1 200"), "{buf}");
    assert!(buf.contains(cat().build_id()));
    tx.send(()).unwrap();
    server.await.unwrap().unwrap();
}
