//! YEDDA inline markup: `[@entity text#TYPE*]` embedded in plain text.

use std::io::{Read, Write};

use unicode_normalization::UnicodeNormalization;

use super::{lookup_type, Corpus, CorpusError};
use crate::model::{EntityMention, EntityType, Sentence};
use crate::text::collapse_whitespace_with_offsets;

const OPEN: [char; 2] = ['[', '@'];
const CLOSE: [char; 2] = ['*', ']'];

struct RawMention {
    etype: EntityType,
    start: usize,
    end: usize,
}

fn line_of(chars: &[char], offset: usize) -> usize {
    1 + chars[..offset].iter().filter(|&&c| c == '\n').count()
}

fn find_pair(chars: &[char], from: usize, pair: [char; 2]) -> Option<usize> {
    (from..chars.len().saturating_sub(1)).find(|&i| chars[i] == pair[0] && chars[i + 1] == pair[1])
}

/// Strips markup from the whole document, returning plain characters and
/// mentions in plain-text character offsets.
fn strip_markup(doc: &[char], schema: &[EntityType]) -> Result<(Vec<char>, Vec<RawMention>), CorpusError> {
    let mut plain = Vec::with_capacity(doc.len());
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < doc.len() {
        if i + 1 < doc.len() && doc[i] == OPEN[0] && doc[i + 1] == OPEN[1] {
            let close = find_pair(doc, i + 2, CLOSE).ok_or_else(|| CorpusError::UnbalancedMarkup {
                offset: i,
                message: "`[@` without a closing `*]`".into(),
            })?;
            if let Some(nested) = find_pair(&doc[..close], i + 2, OPEN) {
                return Err(CorpusError::UnbalancedMarkup {
                    offset: nested,
                    message: "nested `[@` inside an annotation".into(),
                });
            }
            let inner = &doc[i + 2..close];
            let hash = inner.iter().rposition(|&c| c == '#').ok_or_else(|| CorpusError::UnbalancedMarkup {
                offset: i,
                message: "annotation has no `#TYPE` part".into(),
            })?;
            let label: String = inner[hash + 1..].iter().collect();
            let etype = lookup_type(schema, label.trim(), line_of(doc, i))?;
            let start = plain.len();
            plain.extend_from_slice(&inner[..hash]);
            if plain.len() > start {
                mentions.push(RawMention {
                    etype,
                    start,
                    end: plain.len(),
                });
            }
            i = close + 2;
        } else {
            plain.push(doc[i]);
            i += 1;
        }
    }
    Ok((plain, mentions))
}

/// Imports one YEDDA document. Sentences end after `。` or at a newline;
/// mention offsets refer to the stripped, normalized sentence text.
pub fn import_yedda<R: Read>(mut source: R, profile_name: &str, schema: &[EntityType]) -> Result<Corpus, CorpusError> {
    let mut raw = String::new();
    source.read_to_string(&mut raw)?;
    let doc: Vec<char> = raw.nfc().collect();
    let (plain, mentions) = strip_markup(&doc, schema)?;

    // Sentence pieces as [start, end) ranges over `plain`, newlines excluded.
    let mut pieces = Vec::new();
    let mut start = 0;
    for (i, &c) in plain.iter().enumerate() {
        if c == '\n' {
            pieces.push((start, i));
            start = i + 1;
        } else if c == '。' {
            pieces.push((start, i + 1));
            start = i + 1;
        }
    }
    pieces.push((start, plain.len()));

    let mut sentences = Vec::new();
    let mut remaining = mentions.iter().peekable();
    for (p_start, p_end) in pieces {
        let piece: String = plain[p_start..p_end].iter().collect();
        let (text, bounds) = collapse_whitespace_with_offsets(&piece);
        let mut inside = Vec::new();
        while let Some(m) = remaining.peek() {
            if m.start >= p_end {
                break;
            }
            if m.end > p_end || m.start < p_start {
                return Err(CorpusError::UnbalancedMarkup {
                    offset: m.start,
                    message: "annotation crosses a sentence boundary".into(),
                });
            }
            inside.push(remaining.next().unwrap());
        }
        if text.is_empty() {
            continue;
        }
        let id = format!("s{}", sentences.len());
        let chars: Vec<char> = text.chars().collect();
        let mut gold = Vec::new();
        for m in inside {
            let mut s = bounds[m.start - p_start];
            let mut e = bounds[m.end - p_start];
            while s < e && chars[s] == ' ' {
                s += 1;
            }
            while e > s && chars[e - 1] == ' ' {
                e -= 1;
            }
            if s == e {
                continue;
            }
            let mention = EntityMention::from_span(&id, &text, s, e, m.etype.clone())
                .map_err(|source| CorpusError::InvalidMention { sentence_id: id.clone(), source })?;
            gold.push(mention);
        }
        sentences.push(Sentence::new(id, text, gold));
    }
    Corpus::new(profile_name, schema.to_vec(), sentences)
}

/// Re-inserts markup at each mention's offsets, one sentence per line.
pub fn write_yedda<W: Write>(corpus: &Corpus, mut writer: W) -> Result<(), CorpusError> {
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            writer.write_all(b"\n")?;
        }
        writer.write_all(annotate(sentence)?.as_bytes())?;
    }
    Ok(())
}

pub(crate) fn annotate(sentence: &Sentence) -> Result<String, CorpusError> {
    let chars: Vec<char> = sentence.text.chars().collect();
    let mut out = String::new();
    let mut pos = 0;
    for m in &sentence.gold {
        if m.start < pos {
            return Err(CorpusError::Format {
                line: 0,
                message: format!("sentence {:?}: overlapping mentions cannot be marked up", sentence.id),
            });
        }
        out.extend(&chars[pos..m.start]);
        out.push_str("[@");
        out.extend(&chars[m.start..m.end]);
        out.push('#');
        out.push_str(m.etype.as_str());
        out.push_str("*]");
        pos = m.end;
    }
    out.extend(&chars[pos..]);
    Ok(out)
}
