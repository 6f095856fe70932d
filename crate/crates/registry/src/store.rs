//! Append-only JSON-lines log of registrations and deletions.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::RegistryError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum LogEntry {
    Add {
        id: u64,
        name: String,
        contract: String,
        registered_at: u64,
    },
    Del {
        id: u64,
    },
}

/// Reads every entry of the log at `path`. A missing file is an empty log.
pub fn load(path: &Path) -> Result<Vec<LogEntry>, RegistryError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    parse_log(&text)
}

pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, RegistryError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(line)
            .map_err(|e| RegistryError::Corrupt { line: i + 1, message: e.to_string() })?;
        out.push(entry);
    }
    Ok(out)
}

/// Open handle for appending; every append is flushed to disk before it returns.
#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    file: File,
}

impl Store {
    pub fn open(path: &Path) -> Result<Self, RegistryError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Store { path: path.to_path_buf(), file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, entry: &LogEntry) -> Result<(), RegistryError> {
        let mut line = serde_json::to_string(entry).expect("log entries serialize");
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_format() {
        let add = LogEntry::Add { id: 1, name: "n".into(), contract: "!a".into(), registered_at: 7 };
        assert_eq!(
            serde_json::to_string(&add).unwrap(),
            r#"{"op":"add","id":1,"name":"n","contract":"!a","registered_at":7}"#
        );
        assert_eq!(serde_json::to_string(&LogEntry::Del { id: 3 }).unwrap(), r#"{"op":"del","id":3}"#);
    }

    #[test]
    fn corrupt_line_is_located() {
        let text = "{\"op\":\"del\",\"id\":1}\n\n{\"op\":\"add\",\"id\":2,\"na";
        match parse_log(text) {
            Err(RegistryError::Corrupt { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_log("").unwrap().is_empty());
    }
}
