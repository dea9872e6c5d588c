//! Live sessions: one lock per session, new events persisted after every
//! operation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use uuid::Uuid;

use crate::pipeline::{Engine, EngineError};
use crate::session::{Session, State};
use crate::store::{EventStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ManagerError {
    #[error("no session {0}")]
    NotFound(Uuid),
    #[error("session is {0:?}; request not allowed in this state")]
    Conflict(State),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<EngineError> for ManagerError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::WrongState(s) => ManagerError::Conflict(s),
            EngineError::Session(e) => ManagerError::Internal(e.to_string()),
        }
    }
}

pub struct SessionManager {
    engine: Arc<Engine>,
    store: Box<dyn EventStore>,
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<Session>>>>,
}

impl SessionManager {
    /// Loads every stored session.
    pub fn new(engine: Arc<Engine>, store: Box<dyn EventStore>) -> Result<SessionManager, StoreError> {
        let sessions = store
            .load_all()?
            .into_iter()
            .map(|s| (s.id, Arc::new(Mutex::new(s))))
            .collect();
        Ok(SessionManager {
            engine,
            store,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<Uuid> {
        self.sessions.read().expect("session map lock").keys().copied().collect()
    }

    fn handle(&self, id: Uuid) -> Result<Arc<Mutex<Session>>, ManagerError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(&id)
            .cloned()
            .ok_or(ManagerError::NotFound(id))
    }

    /// Snapshot of a session.
    pub fn get(&self, id: Uuid) -> Result<Session, ManagerError> {
        let h = self.handle(id)?;
        let s = h.lock().expect("session lock");
        Ok(s.clone())
    }

    /// Creates a session and runs it as far as it goes.
    pub fn create(&self, text: &str) -> Result<Session, ManagerError> {
        if text.trim().is_empty() {
            return Err(ManagerError::BadRequest("intent text is empty".into()));
        }
        let session = Session::new(Uuid::new_v4(), text);
        let id = session.id;
        self.store.append(id, &session.history)?;
        let handle = Arc::new(Mutex::new(session));
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, handle.clone());
        self.with(&handle, |engine, s| engine.submit(s))
    }

    pub fn clarify(&self, id: Uuid, text: &str) -> Result<Session, ManagerError> {
        if text.trim().is_empty() {
            return Err(ManagerError::BadRequest("clarification text is empty".into()));
        }
        let handle = self.handle(id)?;
        self.with(&handle, |engine, s| engine.clarify(s, text))
    }

    pub fn advance(&self, id: Uuid) -> Result<Session, ManagerError> {
        let handle = self.handle(id)?;
        self.with(&handle, |engine, s| engine.advance(s))
    }

    fn with(
        &self,
        handle: &Mutex<Session>,
        op: impl FnOnce(&Engine, &mut Session) -> Result<(), EngineError>,
    ) -> Result<Session, ManagerError> {
        let mut s = handle.lock().expect("session lock");
        let before = s.history.len();
        let result = op(&self.engine, &mut s);
        // events recorded before an error are real and must not be lost
        self.store.append(s.id, &s.history[before..])?;
        result?;
        Ok(s.clone())
    }
}
