//! Append-only on-disk key/value store for completions and embeddings.
//!
//! Each store is a JSONL file; a line is
//! `{"key": .., "value": .., "request": ..}`. The first entry written for a
//! key wins, both in memory and on reload.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CompletionRequest;

pub const COMPLETIONS_FILE: &str = "completions.jsonl";
pub const EMBEDDINGS_FILE: &str = "embeddings.jsonl";

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    key: String,
    value: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    request: Option<Value>,
}

pub struct DiskCache {
    entries: RwLock<HashMap<String, Value>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl DiskCache {
    /// A cache that lives only as long as the process.
    pub fn in_memory() -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            file: None,
            path: None,
        }
    }

    /// Opens (creating if needed) the completion store under `dir`.
    pub fn open_completions(dir: &Path) -> std::io::Result<Self> {
        Self::open(&dir.join(COMPLETIONS_FILE))
    }

    pub fn open_embeddings(dir: &Path) -> std::io::Result<Self> {
        Self::open(&dir.join(EMBEDDINGS_FILE))
    }

    pub fn open(path: &Path) -> std::io::Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // A torn final line from an interrupted write is skipped.
                let Ok(entry) = serde_json::from_str::<Entry>(&line) else {
                    log::warn!("skipping unreadable cache line in {}", path.display());
                    continue;
                };
                entries.entry(entry.key).or_insert(entry.value);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            file: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    pub fn get_text(&self, key: &str) -> Option<String> {
        self.get(key).and_then(|v| v.as_str().map(str::to_string))
    }

    /// Inserts unless the key is already present; returns the stored value.
    pub fn put(&self, key: &str, value: Value, request: Option<Value>) -> std::io::Result<Value> {
        let mut entries = self.entries.write().expect("cache lock");
        if let Some(existing) = entries.get(key) {
            return Ok(existing.clone());
        }
        if let Some(file) = &self.file {
            let entry = Entry {
                key: key.to_string(),
                value: value.clone(),
                request,
            };
            let mut line = serde_json::to_vec(&entry)?;
            line.push(b'\n');
            let mut file = file.lock().expect("cache file lock");
            file.write_all(&line)?;
            file.flush()?;
        }
        entries.insert(key.to_string(), value.clone());
        Ok(value)
    }

    pub(crate) fn put_completion(&self, key: &str, request: &CompletionRequest, text: &str) -> std::io::Result<String> {
        let meta = serde_json::to_value(request)?;
        let stored = self.put(key, Value::String(text.to_string()), Some(meta))?;
        Ok(stored.as_str().unwrap_or(text).to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CacheSummary {
    pub directory: String,
    pub completion_entries: usize,
    pub embedding_entries: usize,
    pub bytes: u64,
}

impl CacheSummary {
    pub fn inspect(dir: &Path) -> std::io::Result<Self> {
        let mut bytes = 0;
        let mut count = |name: &str| -> std::io::Result<usize> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(0);
            }
            bytes += std::fs::metadata(&path)?.len();
            Ok(DiskCache::open(&path)?.len())
        };
        let completion_entries = count(COMPLETIONS_FILE)?;
        let embedding_entries = count(EMBEDDINGS_FILE)?;
        Ok(Self {
            directory: dir.display().to_string(),
            completion_entries,
            embedding_entries,
            bytes,
        })
    }

    /// Removes both store files; returns how many were deleted.
    pub fn clear(dir: &Path) -> std::io::Result<usize> {
        let mut removed = 0;
        for name in [COMPLETIONS_FILE, EMBEDDINGS_FILE] {
            let path = dir.join(name);
            if path.exists() {
                std::fs::remove_file(path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let c = DiskCache::open_completions(dir.path()).unwrap();
            c.put("k", json!("v"), None).unwrap();
            c.put("k", json!("other"), None).unwrap();
        }
        let c = DiskCache::open_completions(dir.path()).unwrap();
        assert_eq!(c.get_text("k").as_deref(), Some("v"));
        assert_eq!(c.len(), 1);
        let raw = std::fs::read_to_string(dir.path().join(COMPLETIONS_FILE)).unwrap();
        assert_eq!(raw.lines().count(), 1);
    }

    #[test]
    fn torn_line_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(COMPLETIONS_FILE);
        std::fs::write(&path, "{\"key\":\"a\",\"value\":\"x\"}\n{\"key\":\"b\",\"val").unwrap();
        let c = DiskCache::open(&path).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn inspect_and_clear() {
        let dir = tempfile::tempdir().unwrap();
        DiskCache::open_completions(dir.path()).unwrap().put("a", json!("x"), None).unwrap();
        DiskCache::open_embeddings(dir.path()).unwrap().put("e", json!([1.0]), None).unwrap();
        let s = CacheSummary::inspect(dir.path()).unwrap();
        assert_eq!((s.completion_entries, s.embedding_entries), (1, 1));
        assert!(s.bytes > 0);
        assert_eq!(CacheSummary::clear(dir.path()).unwrap(), 2);
        assert_eq!(CacheSummary::inspect(dir.path()).unwrap().completion_entries, 0);
    }
}
