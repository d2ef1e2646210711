//! One canonical JSON file per session under a store directory.
//!
//! Writers take an exclusive `<id>.lock` file for the duration of a write or
//! read-modify-write cycle. A second writer does not wait: it gets
//! [`StoreError::Contention`].

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::canonical::to_canonical_string;

use super::Session;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("session not found: {0}")]
    NotFound(String),
    #[error("session already exists: {0}")]
    AlreadyExists(String),
    #[error("session {0} is being written by another writer")]
    Contention(String),
    #[error("invalid session id {0:?}")]
    InvalidId(String),
    #[error("session file {path} is unreadable: {message}")]
    Corrupt { path: PathBuf, message: String },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Io { .. } => "STORE_IO",
            StoreError::NotFound(_) => "NOT_FOUND",
            StoreError::AlreadyExists(_) => "ALREADY_EXISTS",
            StoreError::Contention(_) => "CONTENTION",
            StoreError::InvalidId(_) => "INVALID_ID",
            StoreError::Corrupt { .. } => "STORE_CORRUPT",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// The bank a session was created against differs from the active bank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionMismatch {
    pub session_version: String,
    pub bank_version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSession {
    pub session: Session,
    pub warning: Option<VersionMismatch>,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

/// Held while a session is being written; removes the lock file on drop.
#[derive(Debug)]
pub struct WriteLock {
    path: PathBuf,
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl SessionStore {
    /// Opens (creating if needed) a store rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn checked(&self, id: &str) -> Result<(), StoreError> {
        if valid_id(id) {
            Ok(())
        } else {
            Err(StoreError::InvalidId(id.to_string()))
        }
    }

    pub fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn lock_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.lock"))
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.path_of(id).is_file()
    }

    /// Takes the write lock for `id` or fails at once.
    pub fn lock(&self, id: &str) -> Result<WriteLock, StoreError> {
        self.checked(id)?;
        let path = self.lock_path(id);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(WriteLock { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                Err(StoreError::Contention(id.to_string()))
            }
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    fn write_locked(&self, session: &Session) -> Result<(), StoreError> {
        let path = self.path_of(&session.session_id);
        let tmp = self.dir.join(format!("{}.json.tmp", session.session_id));
        let text = to_canonical_string(session).expect("sessions always serialize");
        let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }

    /// Persists a new session; its id must not be taken.
    pub fn create(&self, session: &Session) -> Result<(), StoreError> {
        let _lock = self.lock(&session.session_id)?;
        if self.path_of(&session.session_id).exists() {
            return Err(StoreError::AlreadyExists(session.session_id.clone()));
        }
        self.write_locked(session)
    }

    pub fn save(&self, session: &Session) -> Result<(), StoreError> {
        let _lock = self.lock(&session.session_id)?;
        self.write_locked(session)
    }

    pub fn load(&self, id: &str) -> Result<Session, StoreError> {
        self.checked(id)?;
        let path = self.path_of(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(id.to_string()))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
            path,
            message: e.to_string(),
        })
    }

    /// Loads a session and flags a bank version different from `bank_version`.
    pub fn load_checked(&self, id: &str, bank_version: &str) -> Result<LoadedSession, StoreError> {
        let session = self.load(id)?;
        let warning = (session.bank_version != bank_version).then(|| VersionMismatch {
            session_version: session.bank_version.clone(),
            bank_version: bank_version.to_string(),
        });
        Ok(LoadedSession { session, warning })
    }

    /// Loads, modifies and saves a session under its write lock. Nothing is
    /// written when `f` fails.
    pub fn update<T, E>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, E>,
    ) -> Result<Result<T, E>, StoreError> {
        let _lock = self.lock(id)?;
        let mut session = self.load(id)?;
        match f(&mut session) {
            Ok(value) => {
                self.write_locked(&session)?;
                Ok(Ok(value))
            }
            Err(e) => Ok(Err(e)),
        }
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let entry = entry.map_err(io_err(&self.dir))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(".json") {
                if valid_id(id) {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::{create_session, SessionOptions};
    use crate::navigator::Profile;
    use crate::test_support::minimal_bank;
    use chrono::{TimeZone, Utc};

    fn session(id: &str) -> Session {
        let mut bank = minimal_bank();
        bank.profiles.push(Profile {
            id: "p".into(),
            name: "P".into(),
            description: String::new(),
            question_ids: vec![],
            evidence_required_override: None,
            threshold_default: None,
        });
        let now = Utc.with_ymd_and_hms(2026, 1, 2, 3, 4, 5).unwrap();
        create_session(&bank, "p", "demo", SessionOptions::default(), id.into(), now).unwrap()
    }

    #[test]
    fn save_load_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let s = session("abc");
        store.create(&s).unwrap();
        assert_eq!(store.load("abc").unwrap(), s);
        assert!(matches!(store.create(&s), Err(StoreError::AlreadyExists(_))));
        assert!(matches!(store.load("zzz"), Err(StoreError::NotFound(_))));
        assert!(matches!(store.load("../etc"), Err(StoreError::InvalidId(_))));
        assert_eq!(store.list().unwrap(), vec!["abc"]);
        let text = fs::read_to_string(store.path_of("abc")).unwrap();
        assert_eq!(text, to_canonical_string(&s).unwrap());
    }

    #[test]
    fn contention_fails_fast() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let s = session("abc");
        store.create(&s).unwrap();
        let held = store.lock("abc").unwrap();
        assert!(matches!(store.save(&s), Err(StoreError::Contention(_))));
        let r = store.update("abc", |_| Ok::<_, ()>(()));
        assert!(matches!(r, Err(StoreError::Contention(_))));
        drop(held);
        store.save(&s).unwrap();
    }

    #[test]
    fn version_mismatch_is_a_warning() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        store.create(&session("abc")).unwrap();
        let same = store.load_checked("abc", "test").unwrap();
        assert!(same.warning.is_none());
        let other = store.load_checked("abc", "v2").unwrap();
        assert_eq!(
            other.warning,
            Some(VersionMismatch {
                session_version: "test".into(),
                bank_version: "v2".into()
            })
        );
    }
}
