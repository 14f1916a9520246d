use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::http::HeaderMap;
use chrono::Utc;
use mle_core::game::{EscapeRule, GameSession, PackRegistry, Phase, PlayMode};
use mle_core::store::{
    apply_command, replay_session, BlobStore, Command, EventPayload, EventStore, GameEvent, Outcome, StoreError,
};
use mle_core::SessionId;
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::error::ApiError;

/// The cached head of one session: its state after `seq` events.
#[derive(Debug, Clone)]
pub struct Entry {
    pub session: GameSession,
    pub seq: u64,
    pub token_digest: String,
    pub questionnaire_submitted: bool,
}

struct Shared {
    store: EventStore,
    blobs: BlobStore,
    registry: PackRegistry,
    sessions: RwLock<HashMap<SessionId, Arc<Entry>>>,
    admin_digest: Option<String>,
}

#[derive(Clone)]
pub struct AppState {
    shared: Arc<Shared>,
}

pub fn digest(secret: &str) -> String {
    hex::encode(Sha256::digest(secret.as_bytes()))
}

fn random_hex() -> String {
    let mut bytes = [0u8; 16];
    rand::rngs::OsRng.fill_bytes(&mut bytes);
    hex::encode(bytes)
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers.get(axum::http::header::AUTHORIZATION)?.to_str().ok()?.strip_prefix("Bearer ").map(str::trim)
}

impl AppState {
    /// Builds the state over an existing store, rebuilding every session
    /// the log holds. Sessions that cannot be replayed are left out.
    pub fn new(store: EventStore, blobs: BlobStore, registry: PackRegistry, admin_token: Option<&str>) -> Self {
        let mut sessions = HashMap::new();
        for id in store.session_ids() {
            let events = store.events_for(id.as_str());
            let token_digest = match events.first().map(|e| &e.payload) {
                Some(EventPayload::SessionCreated { token_digest: Some(d), .. }) => d.clone(),
                _ => String::new(),
            };
            match replay_session(&store, &id, &registry) {
                Ok(session) => {
                    let entry = Entry {
                        session,
                        seq: events.len() as u64,
                        token_digest,
                        questionnaire_submitted: events
                            .iter()
                            .any(|e| matches!(e.payload, EventPayload::QuestionnaireSubmitted { .. })),
                    };
                    sessions.insert(id, Arc::new(entry));
                }
                Err(e) => tracing::warn!(session = %id, error = %e, "session not restored"),
            }
        }
        AppState {
            shared: Arc::new(Shared {
                store,
                blobs,
                registry,
                sessions: RwLock::new(sessions),
                admin_digest: admin_token.filter(|t| !t.is_empty()).map(digest),
            }),
        }
    }

    /// Opens the event log and blob store under `data_dir`.
    pub fn open(data_dir: &Path, registry: PackRegistry, admin_token: Option<&str>) -> Result<Self, StoreError> {
        let store = EventStore::open(data_dir)?;
        let blobs = BlobStore::open(data_dir)?;
        Ok(Self::new(store, blobs, registry, admin_token))
    }

    pub fn store(&self) -> &EventStore {
        &self.shared.store
    }

    pub fn blobs(&self) -> &BlobStore {
        &self.shared.blobs
    }

    pub fn registry(&self) -> &PackRegistry {
        &self.shared.registry
    }

    pub fn sessions(&self) -> Vec<Arc<Entry>> {
        let mut all: Vec<_> = self.shared.sessions.read().expect("session cache poisoned").values().cloned().collect();
        all.sort_by(|a, b| a.session.id().cmp(b.session.id()));
        all
    }

    pub fn check_admin(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        match (&self.shared.admin_digest, bearer(headers)) {
            (Some(expected), Some(token)) if digest(token) == *expected => Ok(()),
            _ => Err(ApiError::bad_token()),
        }
    }

    /// Looks up a session and checks the caller's capability token.
    pub fn authorized(&self, id: &str, headers: &HeaderMap) -> Result<Arc<Entry>, ApiError> {
        let entry = self
            .shared
            .sessions
            .read()
            .expect("session cache poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))?;
        match bearer(headers) {
            Some(token) if !entry.token_digest.is_empty() && digest(token) == entry.token_digest => Ok(entry),
            _ => Err(ApiError::bad_token()),
        }
    }

    /// Creates and persists a new session and returns its id and token.
    pub async fn create_session(
        &self,
        pack_id: Option<&str>,
        pack_version: Option<&str>,
        mode: PlayMode,
        escape_rule: EscapeRule,
        seed: Option<u64>,
    ) -> Result<(Arc<Entry>, String), ApiError> {
        let registry = &self.shared.registry;
        let pack = match (pack_id, pack_version) {
            (Some(id), Some(version)) => registry.get(id, version),
            (Some(id), None) => registry.latest(id),
            (None, _) => registry.iter().next().cloned(),
        }
        .ok_or_else(|| {
            ApiError::new(
                axum::http::StatusCode::NOT_FOUND,
                "PACK_NOT_FOUND",
                format!("no pack {}", pack_id.unwrap_or("(default)")),
            )
        })?;
        let id = SessionId::from(random_hex());
        let token = random_hex();
        let seed = seed.unwrap_or_else(|| rand::rngs::OsRng.next_u64());
        let session = GameSession::new(id.clone(), pack.clone(), mode, escape_rule, seed);
        let token_digest = digest(&token);
        let created = EventPayload::SessionCreated {
            pack_id: pack.content().pack_id.clone(),
            pack_version: pack.content().version.clone(),
            mode,
            escape_rule,
            seed,
            token_digest: Some(token_digest.clone()),
        };
        let entry = Entry { session, seq: 0, token_digest, questionnaire_submitted: false };
        let entry = self.commit(&Arc::new(entry), |e| e.clone(), vec![created]).await?;
        Ok((entry, token))
    }

    /// Applies `commands` to a copy of the session and appends the resulting
    /// events in one batch. Nothing is written if any command fails, and a
    /// concurrent writer that got there first turns this into a conflict.
    /// Digital sessions have no physical board to set up, so their piles are
    /// dealt in the same batch as the last decoration scan.
    pub async fn execute(
        &self,
        entry: &Arc<Entry>,
        commands: &[Command],
    ) -> Result<(Arc<Entry>, Vec<Outcome>), ApiError> {
        let mut session = entry.session.clone();
        let mut outcomes = Vec::with_capacity(commands.len());
        let mut payloads = Vec::with_capacity(commands.len());
        for command in commands {
            let (outcome, payload) = apply_command(&mut session, command)?;
            outcomes.push(outcome);
            payloads.push(payload);
        }
        if session.mode() == PlayMode::Digital && session.phase() == Phase::EscapeSetup {
            let (outcome, payload) = apply_command(&mut session, &Command::BeginEscapePhase)?;
            outcomes.push(outcome);
            payloads.push(payload);
        }
        let next = self.commit(entry, move |e| Entry { session, ..e.clone() }, payloads).await?;
        Ok((next, outcomes))
    }

    /// Appends `payloads` after `entry.seq` and installs `next(entry)` as the
    /// new head.
    pub async fn commit(
        &self,
        entry: &Arc<Entry>,
        next: impl FnOnce(&Entry) -> Entry,
        payloads: Vec<EventPayload>,
    ) -> Result<Arc<Entry>, ApiError> {
        let id = entry.session.id().clone();
        let now = Utc::now();
        let count = payloads.len() as u64;
        let events: Vec<GameEvent> = payloads
            .into_iter()
            .enumerate()
            .map(|(i, p)| GameEvent::new(id.clone(), entry.seq + 1 + i as u64, now, p))
            .collect();
        let shared = self.shared.clone();
        tokio::task::spawn_blocking(move || shared.store.append_batch(events))
            .await
            .map_err(|e| ApiError::storage(e.to_string()))??;

        let mut head = next(entry);
        head.seq = entry.seq + count;
        let head = Arc::new(head);
        let mut sessions = self.shared.sessions.write().expect("session cache poisoned");
        let current = sessions.get(&id).map_or(0, |e| e.seq);
        if current < head.seq {
            sessions.insert(id, head.clone());
        }
        Ok(head)
    }
}
