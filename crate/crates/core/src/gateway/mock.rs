//! Scripted backend for fixtures and offline runs.
//!
//! A script is JSONL with one `{"match": "exact"|"pattern", "key": .., "response": ..}`
//! per line. Exact keys are compared with the request's user text and with
//! its cache key. Pattern keys are regular expressions searched in the user
//! text; entries sharing the same pattern form an ordered queue whose last
//! response repeats once exhausted. Exact entries are tried before patterns,
//! patterns in script order.
//!
//! Answers are memoized per request, so repeating a request always returns
//! the first answer it received.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{cache_key, CompletionBackend, CompletionRequest, GatewayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Pattern,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockEntry {
    #[serde(rename = "match")]
    pub kind: MatchKind,
    pub key: String,
    pub response: String,
}

impl MockEntry {
    pub fn exact(key: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            kind: MatchKind::Exact,
            key: key.into(),
            response: response.into(),
        }
    }

    pub fn pattern(key: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            kind: MatchKind::Pattern,
            key: key.into(),
            response: response.into(),
        }
    }
}

struct PatternQueue {
    regex: Regex,
    responses: Vec<String>,
    cursor: AtomicUsize,
}

pub struct MockBackend {
    exact: HashMap<String, String>,
    patterns: Vec<PatternQueue>,
    memo: Mutex<HashMap<String, String>>,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn from_entries(entries: Vec<MockEntry>) -> Result<Self, GatewayError> {
        let mut exact = HashMap::new();
        let mut patterns: Vec<PatternQueue> = Vec::new();
        for e in entries {
            match e.kind {
                MatchKind::Exact => {
                    exact.entry(e.key).or_insert(e.response);
                }
                MatchKind::Pattern => {
                    if let Some(q) = patterns.iter_mut().find(|q| q.regex.as_str() == e.key) {
                        q.responses.push(e.response);
                    } else {
                        let regex = Regex::new(&e.key)
                            .map_err(|err| GatewayError::Script(format!("bad pattern {:?}: {err}", e.key)))?;
                        patterns.push(PatternQueue {
                            regex,
                            responses: vec![e.response],
                            cursor: AtomicUsize::new(0),
                        });
                    }
                }
            }
        }
        Ok(Self {
            exact,
            patterns,
            memo: Mutex::new(HashMap::new()),
            calls: AtomicUsize::new(0),
        })
    }

    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, GatewayError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: MockEntry = serde_json::from_str(&line)
                .map_err(|e| GatewayError::Script(format!("line {}: {e}", i + 1)))?;
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let file = std::fs::File::open(path)
            .map_err(|e| GatewayError::Script(format!("cannot open {}: {e}", path.display())))?;
        Self::from_jsonl(std::io::BufReader::new(file))
    }

    /// Number of `complete` calls received, including memoized repeats.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn lookup(&self, request: &CompletionRequest, key: &str) -> Option<String> {
        if let Some(r) = self.exact.get(&request.user_text).or_else(|| self.exact.get(key)) {
            return Some(r.clone());
        }
        let queue = self.patterns.iter().find(|q| q.regex.is_match(&request.user_text))?;
        let i = queue.cursor.fetch_add(1, Ordering::Relaxed);
        Some(queue.responses[i.min(queue.responses.len() - 1)].clone())
    }
}

impl CompletionBackend for MockBackend {
    fn backend_id(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let key = cache_key(request);
        let mut memo = self.memo.lock().expect("mock memo lock");
        if let Some(text) = memo.get(&key) {
            return Ok(text.clone());
        }
        let text = self.lookup(request, &key).ok_or(GatewayError::MockMiss { key: key.clone() })?;
        memo.insert(key, text.clone());
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(user: &str) -> CompletionRequest {
        CompletionRequest {
            system_text: String::new(),
            user_text: user.into(),
            temperature: 0.0,
            max_output_chars: 10,
            model_id: "m".into(),
        }
    }

    #[test]
    fn exact_by_text_or_cache_key() {
        let r = req("question");
        let mock = MockBackend::from_entries(vec![
            MockEntry::exact("K", "hello"),
            MockEntry::exact(cache_key(&r), "by key"),
        ])
        .unwrap();
        assert_eq!(mock.complete(&req("K")).unwrap(), "hello");
        assert_eq!(mock.complete(&r).unwrap(), "by key");
        assert!(matches!(mock.complete(&req("nope")), Err(GatewayError::MockMiss { .. })));
    }

    #[test]
    fn pattern_queue_advances_then_repeats_last() {
        let mock = MockBackend::from_entries(vec![
            MockEntry::pattern("^ask", "one"),
            MockEntry::pattern("^ask", "two"),
        ])
        .unwrap();
        assert_eq!(mock.complete(&req("ask a")).unwrap(), "one");
        assert_eq!(mock.complete(&req("ask b")).unwrap(), "two");
        assert_eq!(mock.complete(&req("ask c")).unwrap(), "two");
        // memoized
        assert_eq!(mock.complete(&req("ask a")).unwrap(), "one");
        assert_eq!(mock.call_count(), 4);
    }

    #[test]
    fn exact_beats_pattern() {
        let mock = MockBackend::from_entries(vec![
            MockEntry::pattern(".*", "pattern"),
            MockEntry::exact("x", "exact"),
        ])
        .unwrap();
        assert_eq!(mock.complete(&req("x")).unwrap(), "exact");
        assert_eq!(mock.complete(&req("y")).unwrap(), "pattern");
    }

    #[test]
    fn parses_script_lines() {
        let script = "{\"match\":\"exact\",\"key\":\"K\",\"response\":\"hello\"}\n\n{\"match\":\"pattern\",\"key\":\"甲\",\"response\":\"[]\"}\n";
        let mock = MockBackend::from_jsonl(script.as_bytes()).unwrap();
        assert_eq!(mock.complete(&req("K")).unwrap(), "hello");
        assert_eq!(mock.complete(&req("甲醇")).unwrap(), "[]");
        assert!(MockBackend::from_jsonl("{\"match\":\"fuzzy\"}".as_bytes()).is_err());
        assert!(MockBackend::from_entries(vec![MockEntry::pattern("(", "x")]).is_err());
    }
}
