//! Durable session logs: one JSON-lines file per session.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use uuid::Uuid;

use crate::session::{Event, Session, SessionError};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session store {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Replay { path: PathBuf, source: SessionError },
}

pub trait EventStore: Send + Sync {
    /// Appends events to a session's log. Callers pass each event once.
    fn append(&self, id: Uuid, events: &[Event]) -> Result<(), StoreError>;

    /// Every stored session, rebuilt by replay.
    fn load_all(&self) -> Result<Vec<Session>, StoreError>;
}

/// Keeps nothing; sessions live as long as the process.
#[derive(Debug, Default)]
pub struct MemoryStore;

impl EventStore for MemoryStore {
    fn append(&self, _id: Uuid, _events: &[Event]) -> Result<(), StoreError> {
        Ok(())
    }

    fn load_all(&self) -> Result<Vec<Session>, StoreError> {
        Ok(Vec::new())
    }
}

#[derive(Debug)]
pub struct JsonlStore {
    dir: PathBuf,
}

impl JsonlStore {
    /// Creates the directory if needed and checks that it is writable.
    pub fn open(dir: impl Into<PathBuf>) -> Result<JsonlStore, StoreError> {
        let dir = dir.into();
        let io = |source| StoreError::Io {
            path: dir.clone(),
            source,
        };
        std::fs::create_dir_all(&dir).map_err(io)?;
        let probe = dir.join(".write-probe");
        File::create(&probe).map_err(io)?;
        std::fs::remove_file(&probe).map_err(io)?;
        Ok(JsonlStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, id: Uuid) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub fn read_log(path: &Path) -> Result<Vec<Event>, StoreError> {
        let file = File::open(path).map_err(|source| StoreError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut events = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| StoreError::Io {
                path: path.to_owned(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                path: path.to_owned(),
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(event);
        }
        Ok(events)
    }
}

impl EventStore for JsonlStore {
    fn append(&self, id: Uuid, events: &[Event]) -> Result<(), StoreError> {
        if events.is_empty() {
            return Ok(());
        }
        let path = self.path_for(id);
        let io = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e).expect("events serialize");
            buf.push(b'\n');
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        file.write_all(&buf).map_err(io)?;
        file.sync_data().map_err(io)
    }

    fn load_all(&self) -> Result<Vec<Session>, StoreError> {
        let entries = std::fs::read_dir(&self.dir).map_err(|source| StoreError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let mut sessions = Vec::new();
        for entry in entries {
            let path = entry
                .map_err(|source| StoreError::Io {
                    path: self.dir.clone(),
                    source,
                })?
                .path();
            if path.extension().is_none_or(|e| e != "jsonl") {
                continue;
            }
            let Some(id) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| Uuid::parse_str(s).ok())
            else {
                continue;
            };
            let events = JsonlStore::read_log(&path)?;
            let session = Session::replay(id, events).map_err(|source| StoreError::Replay {
                path: path.clone(),
                source,
            })?;
            sessions.push(session);
        }
        sessions.sort_by_key(|s| s.created_at);
        Ok(sessions)
    }
}
