use std::io::Write;

use skp_core::Limits;
use skp_registry::{load, LogEntry, Registry, RegistryError, State};

#[test]
fn empty_file_is_an_empty_store() {
    let f = tempfile::NamedTempFile::new().unwrap();
    let r = Registry::open(f.path(), Limits::default()).unwrap();
    assert!(r.snapshot().is_empty());
}

#[test]
fn missing_file_is_created() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let r = Registry::open(&path, Limits::default()).unwrap();
    r.register("a", "!a").unwrap();
    assert_eq!(load(&path).unwrap().len(), 1);
}

#[test]
fn replay_matches_live_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let live = Registry::open(&path, Limits::default()).unwrap();
    live.register("a", "a").unwrap();
    live.register("ca", "!c.a").unwrap();
    live.register("b", "!b (+) !a").unwrap();
    let replayed = Registry::open(&path, Limits::default()).unwrap();
    assert_eq!(*live.snapshot(), *replayed.snapshot());
    assert_eq!(
        live.snapshot().index().to_json().to_string(),
        replayed.snapshot().index().to_json().to_string()
    );
}

#[test]
fn deletions_are_tombstones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let live = Registry::open(&path, Limits::default()).unwrap();
    live.register("a", "a").unwrap();
    live.register("b", "!b").unwrap();
    live.remove(1).unwrap();
    let entries = load(&path).unwrap();
    assert_eq!(entries.last(), Some(&LogEntry::Del { id: 1 }));
    let replayed = Registry::open(&path, Limits::default()).unwrap();
    assert!(replayed.snapshot().get(1).is_none());
    assert_eq!(replayed.register("c", "!c").unwrap().id, 3);
}

#[test]
fn truncated_last_line_fails_at_that_line() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, r#"{{"op":"add","id":1,"name":"a","contract":"!a","registered_at":0}}"#).unwrap();
    writeln!(f, r#"{{"op":"add","id":2,"name":"b","contract":"!b","registered_at":0}}"#).unwrap();
    write!(f, r#"{{"op":"add","id":3,"na"#).unwrap();
    match Registry::open(f.path(), Limits::default()) {
        Err(RegistryError::Corrupt { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_contract_in_log_is_located() {
    let entries = vec![
        LogEntry::Add { id: 1, name: "a".into(), contract: "!a".into(), registered_at: 0 },
        LogEntry::Add { id: 2, name: "b".into(), contract: "a.(".into(), registered_at: 0 },
    ];
    match State::replay(&entries, Limits::default()) {
        Err(RegistryError::Corrupt { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
