use std::collections::BTreeSet;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mle_core::analytics::{find_item, randomize_questionnaire, InstrumentId};
use mle_core::game::{Avatar, EscapeRule, Phase, PlayMode, PlayerProfile};
use mle_core::store::{export_dataset, Command, EventPayload, ExportFormat, Outcome, QuestionnaireResponse};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use crate::error::ApiError;
use crate::state::{AppState, Entry};
use crate::view::{state_view, StateView};

/// Largest accepted avatar photo.
pub const MAX_AVATAR_BYTES: usize = 5 * 1024 * 1024;

type ApiResult<T> = Result<T, ApiError>;

/// Parses a JSON body. An empty body stands for `{}`.
fn json_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let body: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(e.to_string()))
}

fn view(entry: &Entry) -> StateView {
    state_view(&entry.session, entry.questionnaire_submitted)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    pack_id: Option<String>,
    pack_version: Option<String>,
    #[serde(default)]
    mode: PlayMode,
    #[serde(default)]
    escape_rule: EscapeRule,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct CreateResponse {
    session_id: String,
    token: String,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<CreateResponse>)> {
    let req: CreateRequest = json_body(&body)?;
    let (entry, token) = state
        .create_session(req.pack_id.as_deref(), req.pack_version.as_deref(), req.mode, req.escape_rule, req.seed)
        .await?;
    let response = CreateResponse { session_id: entry.session.id().to_string(), token };
    Ok((StatusCode::CREATED, Json(response)))
}

async fn get_state(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<StateView>> {
    Ok(Json(view(&*state.authorized(&id, &headers)?)))
}

async fn run(
    state: &AppState,
    id: &str,
    headers: &HeaderMap,
    commands: impl FnOnce(&Entry) -> Vec<Command>,
) -> ApiResult<Json<StateView>> {
    let entry = state.authorized(id, headers)?;
    let commands = commands(&entry);
    let (next, outcomes) = state.execute(&entry, &commands).await?;
    let mut body = view(&next);
    for outcome in outcomes {
        match outcome {
            Outcome::Fragment(text) => body.fragment = Some(text),
            Outcome::Answered(answer) => body.discovered = Some(answer.item),
            _ => {}
        }
    }
    Ok(Json(body))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRequest {
    profile: PlayerProfile,
    avatar: Avatar,
}

async fn submit_profile(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<StateView>> {
    let req: ProfileRequest = json_body(&body)?;
    if let Avatar::Physical { blob_id, .. } = &req.avatar {
        if !state.blobs().contains(blob_id) {
            return Err(ApiError::bad_request("VALIDATION_ERROR", format!("unknown avatar image {blob_id}")));
        }
    }
    run(&state, &id, &headers, |_| vec![Command::SubmitProfile { profile: req.profile, avatar: req.avatar }]).await
}

/// Multipart form with a `profile` JSON part and a `photo` image part.
async fn upload_avatar(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    mut form: Multipart,
) -> ApiResult<Json<StateView>> {
    state.authorized(&id, &headers)?;
    let mut profile: Option<PlayerProfile> = None;
    let mut photo: Option<(Bytes, String)> = None;
    let too_large = || {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "PAYLOAD_TOO_LARGE",
            format!("photo exceeds {MAX_AVATAR_BYTES} bytes"),
        )
    };
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::malformed(e.body_text()))? {
        match field.name() {
            Some("profile") => {
                let text = field.bytes().await.map_err(|e| ApiError::malformed(e.body_text()))?;
                profile = Some(json_body(&text)?);
            }
            Some("photo") => {
                let media_type = field.content_type().unwrap_or_default().to_owned();
                if !media_type.starts_with("image/") {
                    return Err(ApiError::new(
                        StatusCode::UNSUPPORTED_MEDIA_TYPE,
                        "UNSUPPORTED_MEDIA_TYPE",
                        format!("photo must be an image, got {media_type:?}"),
                    ));
                }
                let bytes = field.bytes().await.map_err(|e| {
                    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
                        too_large()
                    } else {
                        ApiError::malformed(e.body_text())
                    }
                })?;
                if bytes.len() > MAX_AVATAR_BYTES {
                    return Err(too_large());
                }
                photo = Some((bytes, media_type));
            }
            _ => {}
        }
    }
    let profile = profile.ok_or_else(|| ApiError::malformed("missing profile part"))?;
    let (bytes, media_type) = photo.ok_or_else(|| ApiError::malformed("missing photo part"))?;
    let blobs = state.blobs().clone();
    let blob_id = tokio::task::spawn_blocking(move || blobs.put(&bytes))
        .await
        .map_err(|e| ApiError::storage(e.to_string()))?
        .map_err(|e| ApiError::storage(e.to_string()))?;
    let avatar = Avatar::Physical { blob_id, media_type };
    run(&state, &id, &headers, |_| vec![Command::SubmitProfile { profile, avatar }]).await
}

async fn get_avatar(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let entry = state.authorized(&id, &headers)?;
    let Some(Avatar::Physical { blob_id, media_type }) = entry.session.avatar().cloned() else {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "NO_AVATAR_IMAGE", "the session has no uploaded avatar"));
    };
    let bytes = state
        .blobs()
        .get(&blob_id)
        .map_err(|e| ApiError::storage(e.to_string()))?
        .ok_or_else(|| ApiError::storage(format!("avatar image {blob_id} is missing")))?;
    Ok(([(header::CONTENT_TYPE, media_type)], bytes).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanRequest {
    payload: String,
    pile_index: Option<usize>,
}

/// Decoration scans during room decoration, pile scans afterwards. The
/// first pile scan also ends board setup.
async fn scan(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<StateView>> {
    let req: ScanRequest = json_body(&body)?;
    run(&state, &id, &headers, |entry| match entry.session.phase() {
        Phase::PlayerCreation | Phase::RoomDecoration => vec![Command::ScanDecoration { payload: req.payload }],
        Phase::EscapeSetup => {
            vec![Command::BeginEscapePhase, Command::ScanPileCard { payload: req.payload, pile_index: req.pile_index }]
        }
        _ => vec![Command::ScanPileCard { payload: req.payload, pile_index: req.pile_index }],
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    question_id: String,
    option_id: String,
}

async fn answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<StateView>> {
    let req: AnswerRequest = json_body(&body)?;
    run(&state, &id, &headers, |_| {
        vec![Command::AnswerQuestion { question_id: req.question_id.into(), option_id: req.option_id.into() }]
    })
    .await
}

async fn escape(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<StateView>> {
    run(&state, &id, &headers, |_| vec![Command::AttemptEscape]).await
}

#[derive(Serialize)]
struct QuestionnaireItem {
    item_id: &'static str,
    instrument: &'static str,
    text: &'static str,
}

/// Every item of every instrument, in an order fixed per session.
async fn get_questionnaire(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let entry = state.authorized(&id, &headers)?;
    let items: Vec<QuestionnaireItem> = randomize_questionnaire(&InstrumentId::ALL, entry.session.rng_seed())
        .into_iter()
        .map(|item| QuestionnaireItem {
            item_id: item.id,
            instrument: find_item(item.id).map_or("", |(i, _)| i.as_str()),
            text: item.text,
        })
        .collect();
    Ok(Json(json!({"scale": {"min": 1, "max": 5}, "items": items})).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionnaireRequest {
    responses: Vec<QuestionnaireResponse>,
}

async fn submit_questionnaire(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<StatusCode> {
    let req: QuestionnaireRequest = json_body(&body)?;
    let entry = state.authorized(&id, &headers)?;
    if req.responses.is_empty() {
        return Err(ApiError::bad_request("VALIDATION_ERROR", "no responses"));
    }
    let mut seen = BTreeSet::new();
    for r in &req.responses {
        if find_item(&r.item_id).is_none() {
            return Err(ApiError::bad_request("UNKNOWN_ITEM", format!("unknown questionnaire item {}", r.item_id))
                .with_details(json!({"item_id": r.item_id})));
        }
        if !(1..=5).contains(&r.value) {
            return Err(ApiError::bad_request("VALUE_OUT_OF_RANGE", format!("{} must be between 1 and 5", r.item_id))
                .with_details(json!({"item_id": r.item_id, "value": r.value})));
        }
        if !seen.insert(r.item_id.as_str()) {
            return Err(ApiError::bad_request("DUPLICATE_ITEM", format!("{} answered twice", r.item_id)));
        }
    }
    let phase = entry.session.phase();
    if !phase.is_finished() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "PHASE_ERROR",
            format!("questionnaire is not open in phase {}", phase.as_str()),
        )
        .with_details(json!({"phase": phase.as_str()})));
    }
    if entry.questionnaire_submitted {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "ALREADY_SUBMITTED",
            "the questionnaire was already submitted",
        ));
    }
    let payload = EventPayload::QuestionnaireSubmitted { responses: req.responses };
    state.commit(&entry, |e| Entry { questionnaire_submitted: true, ..e.clone() }, vec![payload]).await?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Serialize)]
struct PackSummary {
    pack_id: String,
    version: String,
    avatars: Vec<crate::view::AvatarView>,
}

async fn list_packs(State(state): State<AppState>) -> Json<Vec<PackSummary>> {
    Json(
        state
            .registry()
            .iter()
            .map(|p| PackSummary {
                pack_id: p.content().pack_id.clone(),
                version: p.content().version.clone(),
                avatars: p
                    .content()
                    .avatars
                    .iter()
                    .map(|a| crate::view::AvatarView { avatar_id: a.id.to_string(), name: a.name.clone() })
                    .collect(),
            })
            .collect(),
    )
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn admin_export(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(query): Query<ExportQuery>,
) -> ApiResult<Response> {
    state.check_admin(&headers)?;
    let format: ExportFormat = query
        .format
        .as_deref()
        .unwrap_or("csv")
        .parse()
        .map_err(|e: mle_core::store::StoreError| ApiError::bad_request("UNSUPPORTED_FORMAT", e.to_string()))?;
    let store_state = state.clone();
    let bytes = tokio::task::spawn_blocking(move || export_dataset(store_state.store(), format))
        .await
        .map_err(|e| ApiError::storage(e.to_string()))?;
    let disposition = format!("attachment; filename=\"{}\"", format.file_name());
    Ok(([(header::CONTENT_TYPE, format.content_type().to_owned()), (header::CONTENT_DISPOSITION, disposition)], bytes)
        .into_response())
}

#[derive(Serialize)]
struct SessionSummary {
    session_id: String,
    pack_id: String,
    mode: PlayMode,
    phase: &'static str,
    events: u64,
    uncovered: usize,
    questionnaire_submitted: bool,
}

async fn admin_sessions(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<Json<Vec<SessionSummary>>> {
    state.check_admin(&headers)?;
    Ok(Json(
        state
            .sessions()
            .iter()
            .map(|e| SessionSummary {
                session_id: e.session.id().to_string(),
                pack_id: e.session.pack().content().pack_id.clone(),
                mode: e.session.mode(),
                phase: e.session.phase().as_str(),
                events: e.seq,
                uncovered: e.session.uncovered().len(),
                questionnaire_submitted: e.questionnaire_submitted,
            })
            .collect(),
    ))
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such route")
}

/// The full service. Static UI assets are served from `static_dir` at `/`.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/packs", get(list_packs))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/profile", post(submit_profile))
        .route(
            "/sessions/{id}/avatar",
            post(upload_avatar).get(get_avatar).layer(DefaultBodyLimit::max(MAX_AVATAR_BYTES + 64 * 1024)),
        )
        .route("/sessions/{id}/scan", post(scan))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/escape", post(escape))
        .route("/sessions/{id}/questionnaire", get(get_questionnaire).post(submit_questionnaire))
        .route("/admin/export", get(admin_export))
        .route("/admin/sessions", get(admin_sessions))
        .fallback(api_not_found)
        .with_state(state);
    let app = Router::new().nest("/api/v1", api);
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    };
    app.layer(TraceLayer::new_for_http())
}
