use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, TryLockError};

use semiotics_core::persistence::{export_lexicon, HistoryRecord, LexiconDocument};
use semiotics_core::{
    ActionSpace, EngineError, PersistenceError, SelectorRegistry, SelectorSpec, Session, Utterance,
};
use thiserror::Error;

use crate::wire::{
    CreateSession, HistoryResponse, ImportSession, PostUtterance, SessionCreated, StateResponse,
    StepResponse,
};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("invalid utterance request: {0}")]
    InvalidRequest(String),
    #[error("invalid lexicon document: {0}")]
    InvalidDocument(#[from] PersistenceError),
    #[error("session `{0}` is busy with another step")]
    Busy(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::InvalidConfig(_) => "invalid_config",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::InvalidDocument(_) => "invalid_document",
            ServiceError::Busy(_) => "busy",
            ServiceError::Engine(_) => "engine_error",
        }
    }
}

struct Slot {
    session: Session,
    selector: SelectorSpec,
}

/// In-memory registry of independent training sessions.
///
/// Steps on one session are serialized: a step that finds the session
/// already stepping fails with [`ServiceError::Busy`] instead of waiting.
/// Reads wait for the current step to finish.
pub struct SessionService {
    registry: SelectorRegistry,
    sessions: Mutex<HashMap<String, Arc<Mutex<Slot>>>>,
    next_id: AtomicU64,
}

impl Default for SessionService {
    fn default() -> Self {
        Self::new(SelectorRegistry::with_builtins())
    }
}

impl SessionService {
    pub fn new(registry: SelectorRegistry) -> Self {
        Self {
            registry,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn create(&self, req: CreateSession) -> Result<SessionCreated, ServiceError> {
        let space = ActionSpace::new(&req.states).map_err(|e| ServiceError::InvalidConfig(e.to_string()))?;
        self.open(space, &req.initial, &req.selector, None)
    }

    /// New session that starts from a pre-trained lexicon.
    pub fn import(&self, req: ImportSession) -> Result<SessionCreated, ServiceError> {
        let (lexicon, space) = req.lexicon.to_lexicon()?;
        self.open(space, &req.initial, &req.selector, Some(lexicon))
    }

    fn open(
        &self,
        space: ActionSpace,
        initial: &str,
        selector: &str,
        lexicon: Option<semiotics_core::Lexicon>,
    ) -> Result<SessionCreated, ServiceError> {
        let config = |e: &dyn std::fmt::Display| ServiceError::InvalidConfig(e.to_string());
        let initial = space.state(initial).map_err(|e| config(&e))?;
        let spec: SelectorSpec = selector.parse().map_err(|e| config(&e))?;
        let sel = self.registry.build(&spec, &space).map_err(|e| config(&e))?;
        let session = Session::with_lexicon(space, initial, sel, lexicon.unwrap_or_default())
            .map_err(|e| config(&e))?;

        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let created = SessionCreated {
            session: id.clone(),
            state: session.space().label(session.current()).to_string(),
            states: session.space().labels().to_vec(),
            selector: spec.to_string(),
        };
        let slot = Slot {
            session,
            selector: spec,
        };
        self.sessions
            .lock()
            .expect("session table poisoned")
            .insert(id, Arc::new(Mutex::new(slot)));
        Ok(created)
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ServiceError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn read<T>(&self, id: &str, f: impl FnOnce(&Slot) -> T) -> Result<T, ServiceError> {
        let slot = self.slot(id)?;
        let guard = slot.lock().expect("session poisoned");
        Ok(f(&guard))
    }

    pub fn post_utterance(&self, id: &str, req: PostUtterance) -> Result<StepResponse, ServiceError> {
        let utterance = match (req.silence, req.text.as_deref().map(str::trim)) {
            (true, None | Some("")) => Utterance::silence(),
            (true, Some(_)) => {
                return Err(ServiceError::InvalidRequest(
                    "`silence: true` cannot carry text".into(),
                ))
            }
            (false, None | Some("")) => {
                return Err(ServiceError::InvalidRequest(
                    "empty text; send `silence: true` for silence".into(),
                ))
            }
            (false, Some(text)) => Utterance::new(text)
                .map_err(|e| ServiceError::InvalidRequest(e.to_string()))?,
        };
        let slot = self.slot(id)?;
        let mut guard = match slot.try_lock() {
            Ok(g) => g,
            Err(TryLockError::WouldBlock) => return Err(ServiceError::Busy(id.to_string())),
            Err(TryLockError::Poisoned(_)) => panic!("session poisoned"),
        };
        let report = guard.session.step(utterance)?;
        Ok(StepResponse::from_report(id, &report, guard.session.space()))
    }

    pub fn state(&self, id: &str) -> Result<StateResponse, ServiceError> {
        self.read(id, |slot| {
            let s = &slot.session;
            StateResponse {
                session: id.to_string(),
                state: s.space().label(s.current()).to_string(),
                states: s.space().labels().to_vec(),
                selector: slot.selector.to_string(),
                k: s.iteration(),
                t: s.history().len(),
            }
        })
    }

    pub fn lexicon(&self, id: &str) -> Result<LexiconDocument, ServiceError> {
        self.read(id, |slot| {
            LexiconDocument::from_lexicon(slot.session.lexicon(), slot.session.space())
        })
    }

    /// The persistence-format document, byte-for-byte.
    pub fn export_lexicon(&self, id: &str) -> Result<String, ServiceError> {
        self.read(id, |slot| export_lexicon(slot.session.lexicon(), slot.session.space()))
    }

    pub fn history(&self, id: &str) -> Result<HistoryResponse, ServiceError> {
        self.read(id, |slot| {
            let space = slot.session.space();
            HistoryResponse {
                session: id.to_string(),
                entries: slot
                    .session
                    .history()
                    .entries()
                    .iter()
                    .map(|e| HistoryRecord::from_entry(e, space))
                    .collect(),
            }
        })
    }

    pub fn delete(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
