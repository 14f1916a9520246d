use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use super::{EventPayload, GameEvent, StoreError};
use crate::SessionId;

pub const LOG_FILE: &str = "events.log";

/// Records larger than this are treated as corruption rather than allocated.
pub const MAX_RECORD_LEN: usize = 16 << 20;

pub fn encode_record(event: &GameEvent) -> Vec<u8> {
    let json = serde_json::to_vec(event).expect("events always serialize");
    let mut out = Vec::with_capacity(json.len() + 4);
    out.extend_from_slice(&(json.len() as u32).to_be_bytes());
    out.extend_from_slice(&json);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedLog {
    pub events: Vec<GameEvent>,
    /// Length of the longest prefix made of whole, parseable records.
    pub valid_len: usize,
    pub torn_tail: bool,
}

/// Splits a log image into events. An incomplete or unparseable final record
/// is reported as a torn tail; a bad record followed by more data is corruption.
pub fn decode_records(bytes: &[u8]) -> Result<DecodedLog, StoreError> {
    let mut events = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        if rest.len() < 4 {
            return Ok(DecodedLog { events, valid_len: offset, torn_tail: true });
        }
        let len = u32::from_be_bytes([rest[0], rest[1], rest[2], rest[3]]) as usize;
        if rest.len() - 4 < len {
            return Ok(DecodedLog { events, valid_len: offset, torn_tail: true });
        }
        if len > MAX_RECORD_LEN {
            return Err(StoreError::Corrupt {
                offset: offset as u64,
                message: format!("record length {len} exceeds limit"),
            });
        }
        let end = offset + 4 + len;
        match serde_json::from_slice::<GameEvent>(&bytes[offset + 4..end]) {
            Ok(event) => events.push(event),
            Err(_) if end == bytes.len() => {
                return Ok(DecodedLog { events, valid_len: offset, torn_tail: true });
            }
            Err(e) => return Err(StoreError::Corrupt { offset: offset as u64, message: e.to_string() }),
        }
        offset = end;
    }
    Ok(DecodedLog { events, valid_len: offset, torn_tail: false })
}

/// A write failure to inject into the next append.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectedFault {
    /// Bytes of the batch that reach the file before the failure.
    pub written: usize,
    /// Simulate the process dying: leave the torn bytes and refuse further use.
    pub crash: bool,
}

enum Backend {
    Memory,
    File { file: File, path: PathBuf, len: u64 },
}

struct Inner {
    backend: Backend,
    events: Vec<GameEvent>,
    by_session: HashMap<SessionId, Vec<usize>>,
    fault: Option<InjectedFault>,
    crashed: bool,
}

impl Inner {
    fn new(backend: Backend, events: Vec<GameEvent>) -> Self {
        let mut by_session: HashMap<SessionId, Vec<usize>> = HashMap::new();
        for (i, e) in events.iter().enumerate() {
            by_session.entry(e.session_id.clone()).or_default().push(i);
        }
        Inner { backend, events, by_session, fault: None, crashed: false }
    }

    fn last_seq(&self, session: &SessionId) -> u64 {
        self.by_session.get(session).and_then(|idx| idx.iter().map(|&i| self.events[i].seq).max()).unwrap_or(0)
    }

    fn write(&mut self, bytes: &[u8]) -> io::Result<()> {
        let fault = self.fault.take();
        let Backend::File { file, len, .. } = &mut self.backend else {
            return match fault {
                Some(_) => Err(io::Error::other("injected write failure")),
                None => Ok(()),
            };
        };
        let result = (|| {
            file.seek(SeekFrom::Start(*len))?;
            if let Some(f) = fault {
                file.write_all(&bytes[..f.written.min(bytes.len())])?;
                file.flush()?;
                if f.crash {
                    self.crashed = true;
                }
                return Err(io::Error::other("injected write failure"));
            }
            file.write_all(bytes)?;
            file.sync_data()
        })();
        match result {
            Ok(()) => {
                *len += bytes.len() as u64;
                Ok(())
            }
            Err(e) => {
                if !self.crashed {
                    // Roll back a partial write so the file stays a clean prefix.
                    let _ = file.set_len(*len);
                }
                Err(e)
            }
        }
    }
}

/// The append-only event log with an in-memory index.
///
/// Appends for a session must carry the next sequence number; a stale number
/// is rejected with [`StoreError::SequenceConflict`], which is how concurrent
/// writers to one session are serialized.
pub struct EventStore {
    inner: RwLock<Inner>,
}

impl std::fmt::Debug for EventStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let inner = self.read();
        let path = match &inner.backend {
            Backend::Memory => None,
            Backend::File { path, .. } => Some(path.clone()),
        };
        f.debug_struct("EventStore").field("path", &path).field("events", &inner.events.len()).finish()
    }
}

impl EventStore {
    pub fn in_memory() -> Self {
        EventStore { inner: RwLock::new(Inner::new(Backend::Memory, Vec::new())) }
    }

    /// Opens (or creates) `events.log` in `data_dir`, truncating a torn tail.
    pub fn open(data_dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = data_dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(&path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let decoded = decode_records(&bytes)?;
        if decoded.torn_tail {
            file.set_len(decoded.valid_len as u64)?;
            file.sync_data()?;
        }
        let backend = Backend::File { file, path, len: decoded.valid_len as u64 };
        Ok(EventStore { inner: RwLock::new(Inner::new(backend, decoded.events)) })
    }

    fn read(&self) -> RwLockReadGuard<'_, Inner> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Inner> {
        self.inner.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn append(&self, event: GameEvent) -> Result<u64, StoreError> {
        let seq = event.seq;
        self.append_batch(vec![event])?;
        Ok(seq)
    }

    /// Appends consecutive events of one session atomically: either all are
    /// durable or none are.
    pub fn append_batch(&self, events: Vec<GameEvent>) -> Result<(), StoreError> {
        let Some(first) = events.first() else {
            return Ok(());
        };
        let session = first.session_id.clone();
        let mut inner = self.write();
        if inner.crashed {
            return Err(StoreError::Storage(io::Error::other("store crashed; reopen it")));
        }
        let next = inner.last_seq(&session) + 1;
        for (expected, event) in (next..).zip(&events) {
            if event.session_id != session {
                return Err(StoreError::InvalidEvent("batch spans several sessions".into()));
            }
            if event.seq != expected {
                return Err(StoreError::SequenceConflict { session_id: session, expected, got: event.seq });
            }
            let creates = matches!(event.payload, EventPayload::SessionCreated { .. });
            if creates != (event.seq == 1) {
                return Err(StoreError::InvalidEvent(format!("{} cannot have seq {}", event.kind(), event.seq)));
            }
        }
        let bytes: Vec<u8> = events.iter().flat_map(encode_record).collect();
        inner.write(&bytes)?;
        for event in events {
            let i = inner.events.len();
            inner.by_session.entry(session.clone()).or_default().push(i);
            inner.events.push(event);
        }
        Ok(())
    }

    pub fn last_seq(&self, session: &SessionId) -> u64 {
        self.read().last_seq(session)
    }

    pub fn contains_session(&self, session: &str) -> bool {
        self.read().by_session.contains_key(session)
    }

    /// Events of one session in log order.
    pub fn events_for(&self, session: &str) -> Vec<GameEvent> {
        let inner = self.read();
        inner
            .by_session
            .get(session)
            .map(|idx| idx.iter().map(|&i| inner.events[i].clone()).collect())
            .unwrap_or_default()
    }

    /// Every event in log order.
    pub fn all_events(&self) -> Vec<GameEvent> {
        self.read().events.clone()
    }

    /// Session ids in order of first appearance.
    pub fn session_ids(&self) -> Vec<SessionId> {
        let inner = self.read();
        let mut ids: Vec<(usize, SessionId)> = inner.by_session.iter().map(|(id, idx)| (idx[0], id.clone())).collect();
        ids.sort();
        ids.into_iter().map(|(_, id)| id).collect()
    }

    pub fn len(&self) -> usize {
        self.read().events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[doc(hidden)]
    pub fn inject_fault(&self, fault: InjectedFault) {
        self.write().fault = Some(fault);
    }
}
