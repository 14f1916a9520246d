#![allow(dead_code)]

use std::collections::BTreeSet;

use axum::body::{Body, Bytes};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use mle_core::game::PackRegistry;
use mle_core::pack::{default_covid_pack, ContentPack};
use mle_core::qr::encode_payload;
use mle_core::store::{BlobStore, EventStore};
use mle_server::{router, AppState};
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

pub const ADMIN: &str = "facilitator-secret";

pub struct Harness {
    pub app: Router,
    pub state: AppState,
    pub dir: TempDir,
}

pub fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let blobs = BlobStore::open(dir.path()).unwrap();
    let state = AppState::new(EventStore::in_memory(), blobs, PackRegistry::with_default(), Some(ADMIN));
    Harness { app: router(state.clone(), None), state, dir }
}

pub fn file_harness(dir: TempDir) -> Harness {
    let state = AppState::open(dir.path(), PackRegistry::with_default(), Some(ADMIN)).unwrap();
    Harness { app: router(state.clone(), None), state, dir }
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub bytes: Bytes,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or(Value::Null)
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_owned()
    }
}

pub async fn send(app: &Router, request: Request<Body>) -> Reply {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    Reply { status, headers, bytes }
}

pub async fn call(app: &Router, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
    let mut builder = Request::builder().method(method).uri(uri);
    if let Some(token) = token {
        builder = builder.header(header::AUTHORIZATION, format!("Bearer {token}"));
    }
    let body = match body {
        Some(v) => {
            builder = builder.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    send(app, builder.body(body).unwrap()).await
}

pub struct Client {
    pub id: String,
    pub token: String,
}

impl Client {
    pub fn url(&self, route: &str) -> String {
        format!("/api/v1/sessions/{}/{route}", self.id)
    }

    pub async fn get(&self, app: &Router, route: &str) -> Reply {
        call(app, Method::GET, &self.url(route), Some(&self.token), None).await
    }

    pub async fn post(&self, app: &Router, route: &str, body: Value) -> Reply {
        call(app, Method::POST, &self.url(route), Some(&self.token), Some(body)).await
    }

    pub async fn state(&self, app: &Router) -> Value {
        let reply = self.get(app, "state").await;
        assert_eq!(reply.status, StatusCode::OK);
        reply.json()
    }
}

pub async fn create(app: &Router, body: Value) -> Client {
    let reply = call(app, Method::POST, "/api/v1/sessions", None, Some(body)).await;
    assert_eq!(reply.status, StatusCode::CREATED, "{:?}", reply.json());
    let v = reply.json();
    Client { id: v["session_id"].as_str().unwrap().into(), token: v["token"].as_str().unwrap().into() }
}

pub fn pack() -> ContentPack {
    default_covid_pack()
}

pub fn payload(card: &str) -> String {
    let pack = pack();
    let card = pack.card(card).unwrap();
    encode_payload(card.deck.as_str(), card.id.as_str()).unwrap()
}

pub fn profile_body() -> Value {
    json!({
        "profile": {
            "nickname": "otter", "age": 24, "country": "Italy", "gender": "female",
            "ethnicity": "", "education_level": "bachelor", "student": true
        },
        "avatar": {"kind": "digital", "avatar_id": pack().avatars[0].id}
    })
}

/// Scans the first unplaced card of the deck each statement asks for.
pub async fn decorate(app: &Router, client: &Client, scans: usize) -> Value {
    let pack = pack();
    let mut last = Value::Null;
    for _ in 0..scans {
        let state = client.state(app).await;
        let deck = state["prompt"]["deck"].as_str().unwrap().to_owned();
        let placed: BTreeSet<&str> =
            state["slot_fills"].as_object().unwrap().values().map(|v| v.as_str().unwrap()).collect();
        let card = pack.deck(&deck).unwrap().cards.iter().find(|c| !placed.contains(c.id.as_str())).unwrap();
        let reply = client.post(app, "scan", json!({"payload": payload(card.id.as_str())})).await;
        assert_eq!(reply.status, StatusCode::OK, "{:?}", reply.json());
        last = reply.json();
    }
    last
}

/// Scans `card` and answers its question with the first option.
pub async fn uncover(app: &Router, client: &Client, card: &str) -> Value {
    let scanned = client.post(app, "scan", json!({"payload": payload(card)})).await;
    assert_eq!(scanned.status, StatusCode::OK, "{:?}", scanned.json());
    let prompt = &scanned.json()["prompt"];
    assert_eq!(prompt["kind"], "question");
    let answer = json!({"question_id": prompt["question_id"], "option_id": prompt["options"][0]["option_id"]});
    let answered = client.post(app, "answer", answer).await;
    assert_eq!(answered.status, StatusCode::OK, "{:?}", answered.json());
    answered.json()
}

pub async fn export(app: &Router, format: &str) -> Reply {
    call(app, Method::GET, &format!("/api/v1/admin/export?format={format}"), Some(ADMIN), None).await
}

pub fn questionnaire_body(value: u8) -> Value {
    let items: Vec<Value> = mle_core::analytics::InstrumentId::ALL
        .iter()
        .flat_map(|i| i.instrument().items.iter())
        .map(|item| json!({"item_id": item.id, "value": value}))
        .collect();
    json!({ "responses": items })
}
