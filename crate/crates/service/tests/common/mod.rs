#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use equate_core::defaults::{bundled_config, bundled_features};
use equate_core::ingest::{build_bundle, inputs_from_files};
use equate_core::payload::Catalog;
use equate_core::snapshot::ApiSnapshot;
use equate_core::synth::{generate, SynthConfig};
use http_body_util::BodyExt;
use tower::ServiceExt;

pub fn catalog(seed: u64, n_languages: usize) -> Catalog {
    let cfg = SynthConfig {
        seed,
        n_languages,
        n_countries: 20,
        ..SynthConfig::default()
    };
    let files = generate(&cfg).unwrap();
    let inputs = inputs_from_files(&files.files, bundled_features(), false).unwrap();
    let bundle = build_bundle(inputs).unwrap();
    Catalog::new(ApiSnapshot::build(&bundle, &bundled_config(), "2025-01-01T00:00:00Z".into()).unwrap())
}

pub struct Reply {
    pub status: StatusCode,
    pub build_id: Option<String>,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).header("origin", "http://ui.example").body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let build_id = headers
        .get(equate_service::BUILD_ID_HEADER)
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        build_id,
        headers,
        body,
    }
}
