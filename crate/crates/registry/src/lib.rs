//! A repository of server contracts. Subbehaviour edges between stored
//! contracts are computed at registration, and a client query is answered
//! by checking the client against as few stored contracts as the edges allow.

mod http;
mod index;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use skp_core::compliance::check_skp_graph;
use skp_core::syntax::{render, SessionBehaviour};
use skp_core::{behaviour, Limits};
use thiserror::Error;

pub use http::router;
pub use index::PreorderIndex;
pub use store::{load, parse_log, LogEntry, Store};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error(transparent)]
    Contract(#[from] skp_core::Error),
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("store line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("no contract with id {0}")]
    NotFound(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractRecord {
    pub id: u64,
    pub name: String,
    pub contract: SessionBehaviour,
    /// Seconds since the Unix epoch.
    pub registered_at: u64,
}

impl ContractRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "contract": render(&self.contract),
            "registered_at": self.registered_at,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    /// Matching records, by id.
    pub matches: Vec<ContractRecord>,
    /// Compliance checks actually run.
    pub checks: usize,
}

impl QueryOutcome {
    pub fn ids(&self) -> Vec<u64> {
        self.matches.iter().map(|r| r.id).collect()
    }
}

/// Records plus their index. Cheap to clone relative to the checks it caches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    records: BTreeMap<u64, ContractRecord>,
    index: PreorderIndex,
    next_id: u64,
    limits: Limits,
}

impl Default for State {
    fn default() -> Self {
        State::new(Limits::default())
    }
}

impl State {
    pub fn new(limits: Limits) -> Self {
        State { records: BTreeMap::new(), index: PreorderIndex::default(), next_id: 1, limits }
    }

    /// Rebuilds a state by applying `entries` in order.
    pub fn replay(entries: &[LogEntry], limits: Limits) -> Result<Self, RegistryError> {
        let mut state = State::new(limits);
        for (k, entry) in entries.iter().enumerate() {
            state.apply(entry).map_err(|e| match e {
                RegistryError::Io(_) => e,
                other => RegistryError::Corrupt { line: k + 1, message: other.to_string() },
            })?;
        }
        Ok(state)
    }

    pub fn apply(&mut self, entry: &LogEntry) -> Result<(), RegistryError> {
        match entry {
            LogEntry::Add { id, name, contract, registered_at } => {
                let record = ContractRecord {
                    id: *id,
                    name: name.clone(),
                    contract: behaviour(contract)?,
                    registered_at: *registered_at,
                };
                self.insert(record)
            }
            LogEntry::Del { id } => self.remove(*id).map(|_| ()),
        }
    }

    /// Prepares the log entry for registering `contract` under `name`.
    pub fn prepare(&self, name: &str, contract: &str) -> Result<LogEntry, RegistryError> {
        let parsed = behaviour(contract)?;
        let registered_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(LogEntry::Add { id: self.next_id, name: name.to_string(), contract: render(&parsed), registered_at })
    }

    fn insert(&mut self, record: ContractRecord) -> Result<(), RegistryError> {
        let others = self.records.values().map(|r| (r.id, &r.contract));
        self.index.insert(record.id, &record.contract, others, self.limits)?;
        self.next_id = self.next_id.max(record.id + 1);
        self.records.insert(record.id, record);
        Ok(())
    }

    fn remove(&mut self, id: u64) -> Result<ContractRecord, RegistryError> {
        let record = self.records.remove(&id).ok_or(RegistryError::NotFound(id))?;
        self.index.remove(id);
        Ok(record)
    }

    pub fn get(&self, id: u64) -> Option<&ContractRecord> {
        self.records.get(&id)
    }

    pub fn records(&self) -> impl Iterator<Item = &ContractRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn index(&self) -> &PreorderIndex {
        &self.index
    }

    fn complies(&self, client: &SessionBehaviour, id: u64) -> Result<bool, RegistryError> {
        Ok(check_skp_graph(client, &self.records[&id].contract, self.limits)?.is_compliant())
    }

    fn outcome(&self, ids: BTreeSet<u64>, checks: usize) -> QueryOutcome {
        QueryOutcome { matches: ids.iter().map(|id| self.records[id].clone()).collect(), checks }
    }

    /// Stored contracts `client` complies with, found through the index.
    ///
    /// Classes are visited from the bottom of the preorder up. A class with a
    /// matching record below it matches without a check, since every client of
    /// a contract is a client of the contracts above it. Any other class is
    /// checked once, on its smallest id.
    pub fn query(&self, client: &SessionBehaviour) -> Result<QueryOutcome, RegistryError> {
        let classes = self.index.classes();
        let mut matched = BTreeSet::new();
        let mut checks = 0;
        for class in &classes {
            let inherited = self
                .index
                .edges()
                .iter()
                .any(|&(i, j)| matched.contains(&i) && class.contains(&j));
            let hit = inherited || {
                checks += 1;
                self.complies(client, class[0])?
            };
            if hit {
                matched.extend(class.iter().copied());
            }
        }
        Ok(self.outcome(matched, checks))
    }

    /// Stored contracts `client` complies with, checking each one.
    pub fn scan(&self, client: &SessionBehaviour) -> Result<QueryOutcome, RegistryError> {
        let mut matched = BTreeSet::new();
        for &id in self.records.keys() {
            if self.complies(client, id)? {
                matched.insert(id);
            }
        }
        Ok(self.outcome(matched, self.records.len()))
    }
}

/// A registry shared between threads. Writers are serialised; readers take
/// a snapshot and never observe a half-applied registration.
#[derive(Debug)]
pub struct Registry {
    writer: Mutex<Option<Store>>,
    snapshot: RwLock<Arc<State>>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::in_memory(Limits::default())
    }
}

impl Registry {
    pub fn in_memory(limits: Limits) -> Self {
        Registry { writer: Mutex::new(None), snapshot: RwLock::new(Arc::new(State::new(limits))) }
    }

    /// Replays the log at `path`, creating it if needed, and appends to it
    /// from then on.
    pub fn open(path: &Path, limits: Limits) -> Result<Self, RegistryError> {
        let state = State::replay(&load(path)?, limits)?;
        let store = Store::open(path)?;
        Ok(Registry { writer: Mutex::new(Some(store)), snapshot: RwLock::new(Arc::new(state)) })
    }

    pub fn snapshot(&self) -> Arc<State> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    fn commit(&self, build: impl FnOnce(&State) -> Result<LogEntry, RegistryError>) -> Result<Arc<State>, RegistryError> {
        let mut writer = self.writer.lock().expect("writer lock");
        let current = self.snapshot();
        let entry = build(&current)?;
        let mut next = (*current).clone();
        next.apply(&entry)?;
        if let Some(store) = writer.as_mut() {
            store.append(&entry)?;
        }
        let next = Arc::new(next);
        *self.snapshot.write().expect("snapshot lock") = next.clone();
        Ok(next)
    }

    /// Registers a contract. Returns once the index is updated and the log
    /// entry is on disk.
    pub fn register(&self, name: &str, contract: &str) -> Result<ContractRecord, RegistryError> {
        let mut id = 0;
        let state = self.commit(|s| {
            let entry = s.prepare(name, contract)?;
            if let LogEntry::Add { id: new, .. } = &entry {
                id = *new;
            }
            Ok(entry)
        })?;
        Ok(state.get(id).expect("just inserted").clone())
    }

    pub fn remove(&self, id: u64) -> Result<ContractRecord, RegistryError> {
        let before = self.snapshot();
        let record = before.get(id).cloned().ok_or(RegistryError::NotFound(id))?;
        self.commit(|s| match s.get(id) {
            Some(_) => Ok(LogEntry::Del { id }),
            None => Err(RegistryError::NotFound(id)),
        })?;
        Ok(record)
    }

    pub fn query(&self, client: &str) -> Result<QueryOutcome, RegistryError> {
        self.snapshot().query(&behaviour(client)?)
    }
}
