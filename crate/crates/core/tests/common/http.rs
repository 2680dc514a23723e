#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use sdatlas::catalog::{Catalog, CatalogDocument, Lexicon, SdgLabel};
use sdatlas::ingest::ingest_dir;
use sdatlas::service::{router, AppState};
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.bytes)))
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, bytes }
}

/// Every model in the golden corpus plus one metadata-only paper.
pub fn golden_catalog() -> Catalog {
    let (mut catalog, report) = ingest_dir(&crate::common::fixture_dir().join("corpus"), &Lexicon::default()).unwrap();
    assert_eq!(report.indexed(), report.files.len(), "{:#?}", report.files);
    let mut paper = CatalogDocument::new("paper-only", "Community health worker programmes");
    paper.abstract_text = "A qualitative review without an accompanying model.".into();
    paper.year = Some(2021);
    paper.sdg_labels = vec![SdgLabel { goal: 3, target: Some("3.8".into()), confidence: 1.0 }];
    catalog.index_document(paper).unwrap();
    catalog
}

pub fn population_id() -> String {
    sdatlas::catalog::content_id(&crate::common::corpus_file("population"))
}

pub fn app_with(state: AppState) -> Router {
    router(Arc::new(state), None)
}

pub fn golden_app() -> Router {
    app_with(AppState::new(golden_catalog()))
}
