mod common;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use common::*;
use serde_json::json;

const BOUNDARY: &str = "mle-test-boundary";

fn multipart(profile: &serde_json::Value, photo: &[u8], media_type: &str) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend(format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"profile\"\r\n\r\n").bytes());
    body.extend(profile.to_string().bytes());
    body.extend(
        format!("\r\n--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"photo\"; filename=\"me\"\r\nContent-Type: {media_type}\r\n\r\n")
            .bytes(),
    );
    body.extend_from_slice(photo);
    body.extend(format!("\r\n--{BOUNDARY}--\r\n").bytes());
    body
}

async fn upload(h: &Harness, client: &Client, body: Vec<u8>) -> Reply {
    let request = Request::builder()
        .method(Method::POST)
        .uri(client.url("avatar"))
        .header(header::AUTHORIZATION, format!("Bearer {}", client.token))
        .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap();
    send(&h.app, request).await
}

#[tokio::test]
async fn photo_avatar_upload() {
    let h = harness();
    let c = create(&h.app, json!({})).await;
    let profile = profile_body()["profile"].clone();

    let text = upload(&h, &c, multipart(&profile, b"hello", "text/plain")).await;
    assert_eq!(text.status, StatusCode::UNSUPPORTED_MEDIA_TYPE);
    let huge = vec![0u8; mle_server::MAX_AVATAR_BYTES + 1];
    let big = upload(&h, &c, multipart(&profile, &huge, "image/jpeg")).await;
    assert_eq!(big.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(big.code(), "PAYLOAD_TOO_LARGE");
    assert_eq!(h.state.store().len(), 1);
    assert_eq!(c.get(&h.app, "avatar").await.status, StatusCode::NOT_FOUND);

    let photo: Vec<u8> = (0..=255u8).cycle().take(4096).collect();
    let ok = upload(&h, &c, multipart(&profile, &photo, "image/png")).await;
    assert_eq!(ok.status, StatusCode::OK, "{:?}", ok.json());
    assert_eq!(ok.json()["phase"], "room_decoration");
    let fetched = c.get(&h.app, "avatar").await;
    assert_eq!(fetched.headers[header::CONTENT_TYPE], "image/png");
    assert_eq!(fetched.bytes.as_ref(), photo.as_slice());

    let again = upload(&h, &c, multipart(&profile, &photo, "image/png")).await;
    assert_eq!(again.status, StatusCode::CONFLICT);
    assert_eq!(again.code(), "PHASE_ERROR");
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let h = file_harness(tempfile::tempdir().unwrap());
    let c = create(&h.app, json!({"mode": "digital", "seed": 99})).await;
    c.post(&h.app, "profile", profile_body()).await;
    decorate(&h.app, &c, 8).await;
    let top = c.state(&h.app).await["pile_tops"][2].as_str().unwrap().to_owned();
    c.post(&h.app, "scan", json!({"payload": payload(&top), "pile_index": 2})).await;
    let before = c.get(&h.app, "state").await.bytes;
    let csv = export(&h.app, "csv").await.bytes;
    let Harness { dir, .. } = h;

    let h = file_harness(dir);
    assert_eq!(c.get(&h.app, "state").await.bytes, before);
    assert_eq!(export(&h.app, "csv").await.bytes, csv);
    let other = create(&h.app, json!({})).await;
    assert_eq!(call(&h.app, Method::GET, &c.url("state"), Some(&other.token), None).await.code(), "BAD_TOKEN");
    let prompt = c.state(&h.app).await["prompt"].clone();
    let answered = c
        .post(
            &h.app,
            "answer",
            json!({"question_id": prompt["question_id"], "option_id": prompt["options"][1]["option_id"]}),
        )
        .await;
    assert_eq!(answered.status, StatusCode::OK);
    assert_eq!(answered.json()["uncovered"].as_array().unwrap().len(), 1);
}
