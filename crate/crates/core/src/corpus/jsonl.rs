//! Canonical JSONL corpus format: one object per line,
//! `{"id": .., "text": .., "gold": [{"surface", "type", "start", "end"}]}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError};
use crate::model::{EntityMention, EntityType, Sentence};
use crate::text::normalize_text;

#[derive(Debug, Serialize, Deserialize)]
struct MentionRecord {
    surface: String,
    #[serde(rename = "type")]
    etype: EntityType,
    start: usize,
    end: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SentenceRecord {
    id: String,
    text: String,
    #[serde(default)]
    gold: Vec<MentionRecord>,
}

/// Reads canonical JSONL. With `schema = None` the schema is the set of
/// mention types encountered, in first-seen order.
pub fn read_jsonl<R: BufRead>(
    reader: R,
    profile_name: &str,
    schema: Option<Vec<EntityType>>,
) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut seen_types: Vec<EntityType> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SentenceRecord =
            serde_json::from_str(&line).map_err(|source| CorpusError::Json { line: line_no, source })?;
        if normalize_text(&record.text) != record.text {
            return Err(CorpusError::Format {
                line: line_no,
                message: format!("sentence {:?} text is not normalized", record.id),
            });
        }
        let mut gold = Vec::with_capacity(record.gold.len());
        for m in record.gold {
            if let Some(schema) = &schema {
                if !schema.contains(&m.etype) {
                    return Err(CorpusError::UnknownType {
                        line: line_no,
                        label: m.etype.to_string(),
                    });
                }
            } else if !seen_types.contains(&m.etype) {
                seen_types.push(m.etype.clone());
            }
            let mention = EntityMention {
                sentence_id: record.id.clone(),
                start: m.start,
                end: m.end,
                etype: m.etype,
                surface: m.surface,
            };
            gold.push(mention);
        }
        sentences.push(Sentence::new(record.id, record.text, gold));
    }
    Corpus::new(profile_name, schema.unwrap_or(seen_types), sentences)
}

pub fn write_jsonl<W: Write>(corpus: &Corpus, writer: W) -> Result<(), CorpusError> {
    write_sentences(&corpus.sentences, writer)
}

pub(crate) fn write_sentences<W: Write>(sentences: &[Sentence], mut writer: W) -> Result<(), CorpusError> {
    for s in sentences {
        let record = SentenceRecord {
            id: s.id.clone(),
            text: s.text.clone(),
            gold: s
                .gold
                .iter()
                .map(|m| MentionRecord {
                    surface: m.surface.clone(),
                    etype: m.etype.clone(),
                    start: m.start,
                    end: m.end,
                })
                .collect(),
        };
        serde_json::to_writer(&mut writer, &record).map_err(|e| CorpusError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_infers_schema() {
        let input = r#"{"id":"a","text":"神华集团生产甲醇","gold":[{"surface":"神华集团","type":"ORG","start":0,"end":4},{"surface":"甲醇","type":"PRO","start":6,"end":8}]}
{"id":"b","text":"无","gold":[]}
"#;
        let c = read_jsonl(input.as_bytes(), "x", None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.schema.iter().map(|t| t.as_str()).collect::<Vec<_>>(), vec!["ORG", "PRO"]);
        let mut out = Vec::new();
        write_jsonl(&c, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), input);
    }

    #[test]
    fn rejects_surface_mismatch() {
        let input = r#"{"id":"a","text":"神华集团","gold":[{"surface":"神华","type":"ORG","start":0,"end":4}]}"#;
        assert!(matches!(
            read_jsonl(input.as_bytes(), "x", None),
            Err(CorpusError::InvalidMention { .. })
        ));
    }

    #[test]
    fn rejects_duplicate_ids_and_bad_json() {
        let dup = "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n";
        assert!(matches!(read_jsonl(dup.as_bytes(), "x", None), Err(CorpusError::DuplicateId(_))));
        assert!(matches!(
            read_jsonl("{\"id\":".as_bytes(), "x", None),
            Err(CorpusError::Json { line: 1, .. })
        ));
    }

    #[test]
    fn schema_enforced_when_given() {
        let input = r#"{"id":"a","text":"甲醇","gold":[{"surface":"甲醇","type":"PRO","start":0,"end":2}]}"#;
        let schema = vec![EntityType::new("ORG").unwrap()];
        assert!(matches!(
            read_jsonl(input.as_bytes(), "x", Some(schema)),
            Err(CorpusError::UnknownType { line: 1, .. })
        ));
    }
}
