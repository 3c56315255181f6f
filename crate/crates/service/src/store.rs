use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use qdesk_core::circuit::ExecSession;
use qdesk_core::grover::GroverSpec;

pub const DEFAULT_TTL: Duration = Duration::from_secs(60 * 60);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionKind {
    Program,
    Grover(GroverSpec),
}

#[derive(Debug)]
pub struct SessionRecord {
    pub session: ExecSession,
    pub kind: SessionKind,
    pub created_at: Instant,
    last_used: Instant,
}

impl SessionRecord {
    pub fn new(session: ExecSession, kind: SessionKind) -> Self {
        let now = Instant::now();
        Self {
            session,
            kind,
            created_at: now,
            last_used: now,
        }
    }
}

pub type SharedRecord = Arc<Mutex<SessionRecord>>;

/// In-memory sessions keyed by random URL-safe tokens. A session expires
/// once it has gone unused for longer than the TTL.
#[derive(Debug)]
pub struct SessionStore {
    sessions: Mutex<HashMap<String, SharedRecord>>,
    ttl: Duration,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(DEFAULT_TTL)
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // a panicked handler leaves the record as it was before the mutation
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            sessions: Mutex::new(HashMap::new()),
            ttl,
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn insert(&self, record: SessionRecord) -> String {
        let mut sessions = lock(&self.sessions);
        loop {
            let id = URL_SAFE_NO_PAD.encode(rand::random::<[u8; 16]>());
            if !sessions.contains_key(&id) {
                sessions.insert(id.clone(), Arc::new(Mutex::new(record)));
                return id;
            }
        }
    }

    /// Runs `f` with the session locked, so mutations on one id are
    /// serialized. `None` when the id is unknown or expired.
    pub fn with<R>(&self, id: &str, f: impl FnOnce(&mut SessionRecord) -> R) -> Option<R> {
        let record = lock(&self.sessions).get(id).cloned()?;
        let mut guard = lock(&record);
        let now = Instant::now();
        if now.duration_since(guard.last_used) > self.ttl {
            drop(guard);
            self.remove(id);
            return None;
        }
        guard.last_used = now;
        Some(f(&mut guard))
    }

    pub fn remove(&self, id: &str) -> bool {
        lock(&self.sessions).remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        lock(&self.sessions).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops expired sessions; returns how many went. Sessions busy in a
    /// request are in use and therefore kept.
    pub fn evict_expired(&self) -> usize {
        let now = Instant::now();
        let mut sessions = lock(&self.sessions);
        let before = sessions.len();
        sessions.retain(|_, record| match record.try_lock() {
            Ok(r) => now.duration_since(r.last_used) <= self.ttl,
            Err(_) => true,
        });
        before - sessions.len()
    }
}
