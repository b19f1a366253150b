//! Two-column token/tag corpora (`token<TAB or space>tag`, blank line between
//! sentences).

use std::io::{BufRead, Write};

use super::{lookup_type, Corpus, CorpusError};
use crate::model::{EntityMention, EntityType, Sentence};
use crate::text::{char_len, normalize_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TagScheme {
    /// `B-X`, `I-X`, `O`.
    #[default]
    Bio,
    /// `B-X`, `M-X` (or `I-X`), `E-X`, `S-X`, `O`.
    Bmes,
}

#[derive(Debug, Clone)]
pub struct ConllOptions {
    /// Reject `I-X` without a preceding `B-X`/`I-X` of the same type. When
    /// off, such tags are repaired to `B-X`.
    pub strict: bool,
    /// Inserted between tokens when rebuilding sentence text. Empty for
    /// character-tokenized Chinese.
    pub joiner: String,
    pub scheme: TagScheme,
    pub id_prefix: String,
}

impl Default for ConllOptions {
    fn default() -> Self {
        Self {
            strict: true,
            joiner: String::new(),
            scheme: TagScheme::Bio,
            id_prefix: "s".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Prefix {
    Begin,
    Inside,
    End,
    Single,
}

struct OpenEntity {
    etype: EntityType,
    start: usize,
    end: usize,
}

struct SentenceBuilder {
    text: String,
    len: usize,
    mentions: Vec<(EntityType, usize, usize)>,
    open: Option<OpenEntity>,
}

impl SentenceBuilder {
    fn new() -> Self {
        Self {
            text: String::new(),
            len: 0,
            mentions: Vec::new(),
            open: None,
        }
    }

    fn is_empty(&self) -> bool {
        self.len == 0 && self.text.is_empty()
    }

    fn push_token(&mut self, token: &str, joiner: &str) -> (usize, usize) {
        if !self.text.is_empty() {
            self.text.push_str(joiner);
            self.len += char_len(joiner);
        }
        let start = self.len;
        self.text.push_str(token);
        self.len += char_len(token);
        (start, self.len)
    }

    fn close(&mut self) {
        if let Some(open) = self.open.take() {
            self.mentions.push((open.etype, open.start, open.end));
        }
    }

    fn continues(&self, etype: &EntityType) -> bool {
        self.open.as_ref().is_some_and(|o| &o.etype == etype)
    }
}

fn parse_tag(tag: &str, scheme: TagScheme, line: usize) -> Result<Option<(Prefix, &str)>, CorpusError> {
    if tag == "O" {
        return Ok(None);
    }
    let (prefix, label) = tag.split_once('-').ok_or_else(|| CorpusError::Format {
        line,
        message: format!("malformed tag {tag:?}"),
    })?;
    let prefix = match (prefix, scheme) {
        ("B", _) => Prefix::Begin,
        ("I", _) => Prefix::Inside,
        ("M", TagScheme::Bmes) => Prefix::Inside,
        ("E", TagScheme::Bmes) => Prefix::End,
        ("S", TagScheme::Bmes) => Prefix::Single,
        _ => {
            return Err(CorpusError::Format {
                line,
                message: format!("tag prefix {prefix:?} is not valid for {scheme:?}"),
            })
        }
    };
    Ok(Some((prefix, label)))
}

/// Reads a column corpus. Entity runs become character spans over the
/// sentence text, which is the tokens joined by `options.joiner`.
pub fn read_conll<R: BufRead>(
    reader: R,
    profile_name: &str,
    schema: &[EntityType],
    options: &ConllOptions,
) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut current = SentenceBuilder::new();

    let finish = |builder: &mut SentenceBuilder, sentences: &mut Vec<Sentence>| -> Result<(), CorpusError> {
        builder.close();
        let b = std::mem::replace(builder, SentenceBuilder::new());
        let id = format!("{}{}", options.id_prefix, sentences.len());
        let mut gold = Vec::with_capacity(b.mentions.len());
        for (etype, start, end) in b.mentions {
            let m = EntityMention::from_span(&id, &b.text, start, end, etype)
                .map_err(|source| CorpusError::InvalidMention { sentence_id: id.clone(), source })?;
            gold.push(m);
        }
        sentences.push(Sentence::new(id, b.text, gold));
        Ok(())
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if !current.is_empty() {
                finish(&mut current, &mut sentences)?;
            }
            continue;
        }
        if trimmed.starts_with("-DOCSTART-") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(CorpusError::Format {
                line: line_no,
                message: format!("expected `token tag`, found {trimmed:?}"),
            });
        }
        let token = normalize_text(fields[0]);
        let tag = fields[fields.len() - 1];
        let parsed = parse_tag(tag, options.scheme, line_no)?;
        let (tok_start, tok_end) = current.push_token(&token, &options.joiner);

        let Some((prefix, label)) = parsed else {
            current.close();
            continue;
        };
        let etype = lookup_type(schema, label, line_no)?;
        let open_new = |current: &mut SentenceBuilder, etype: EntityType| {
            current.close();
            current.open = Some(OpenEntity {
                etype,
                start: tok_start,
                end: tok_end,
            });
        };
        match prefix {
            Prefix::Begin => open_new(&mut current, etype),
            Prefix::Single => {
                open_new(&mut current, etype);
                current.close();
            }
            Prefix::Inside | Prefix::End => {
                if current.continues(&etype) {
                    if let Some(open) = current.open.as_mut() {
                        open.end = tok_end;
                    }
                } else if options.strict {
                    return Err(CorpusError::MalformedTag {
                        line: line_no,
                        tag: tag.to_string(),
                    });
                } else {
                    open_new(&mut current, etype);
                }
                if prefix == Prefix::End {
                    current.close();
                }
            }
        }
    }
    if !current.is_empty() {
        finish(&mut current, &mut sentences)?;
    }
    Corpus::new(profile_name, schema.to_vec(), sentences)
}

/// Writes `corpus` back out as `token\ttag` lines. Tokens are characters when
/// the joiner is empty, otherwise the text split on the joiner. Mentions must
/// align with token boundaries and must not overlap.
pub fn write_conll<W: Write>(corpus: &Corpus, mut writer: W, options: &ConllOptions) -> Result<(), CorpusError> {
    for sentence in &corpus.sentences {
        let tokens: Vec<String> = if options.joiner.is_empty() {
            sentence.text.chars().map(String::from).collect()
        } else {
            sentence.text.split(options.joiner.as_str()).map(str::to_string).collect()
        };
        let joiner_len = char_len(&options.joiner);
        let mut bounds = Vec::with_capacity(tokens.len());
        let mut pos = 0usize;
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                pos += joiner_len;
            }
            let start = pos;
            pos += char_len(t);
            bounds.push((start, pos));
        }
        let mut tags: Vec<String> = vec!["O".to_string(); tokens.len()];
        for m in &sentence.gold {
            let first = bounds.iter().position(|&(s, _)| s == m.start);
            let last = bounds.iter().position(|&(_, e)| e == m.end);
            let (Some(first), Some(last)) = (first, last) else {
                return Err(CorpusError::Format {
                    line: 0,
                    message: format!(
                        "sentence {:?}: mention {}..{} does not align with token boundaries",
                        sentence.id, m.start, m.end
                    ),
                });
            };
            if tags[first..=last].iter().any(|t| t != "O") {
                return Err(CorpusError::Format {
                    line: 0,
                    message: format!("sentence {:?}: overlapping mentions cannot be tagged", sentence.id),
                });
            }
            let label = m.etype.as_str();
            for (i, tag) in tags[first..=last].iter_mut().enumerate() {
                let idx = first + i;
                *tag = match options.scheme {
                    TagScheme::Bio if idx == first => format!("B-{label}"),
                    TagScheme::Bio => format!("I-{label}"),
                    TagScheme::Bmes if first == last => format!("S-{label}"),
                    TagScheme::Bmes if idx == first => format!("B-{label}"),
                    TagScheme::Bmes if idx == last => format!("E-{label}"),
                    TagScheme::Bmes => format!("M-{label}"),
                };
            }
        }
        for (token, tag) in tokens.iter().zip(&tags) {
            writeln!(writer, "{token}\t{tag}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<EntityType> {
        ["NAME", "ORG", "LOC", "PRO"].iter().map(|s| EntityType::new(s).unwrap()).collect()
    }

    fn read(input: &str, opts: &ConllOptions) -> Result<Corpus, CorpusError> {
        read_conll(input.as_bytes(), "test", &schema(), opts)
    }

    #[test]
    fn decodes_single_run() {
        let c = read("张 B-NAME\n三 I-NAME\n在 O\n", &ConllOptions::default()).unwrap();
        assert_eq!(c.sentences.len(), 1);
        let s = &c.sentences[0];
        assert_eq!(s.text, "张三在");
        assert_eq!(s.gold.len(), 1);
        assert_eq!((s.gold[0].surface.as_str(), s.gold[0].start, s.gold[0].end), ("张三", 0, 2));
        assert_eq!(s.gold[0].etype.as_str(), "NAME");
    }

    #[test]
    fn all_outside_sentence_has_empty_gold() {
        let c = read("今 O\n天 O\n\n", &ConllOptions::default()).unwrap();
        assert_eq!(c.sentences.len(), 1);
        assert!(c.sentences[0].gold.is_empty());
    }

    #[test]
    fn strict_rejects_orphan_inside() {
        let err = read("a O\nb I-ORG\n", &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedTag { line: 2, .. }));
        let err = read("a B-NAME\nb I-ORG\n", &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedTag { line: 2, .. }));
    }

    #[test]
    fn lenient_repairs_orphan_inside() {
        let opts = ConllOptions {
            strict: false,
            ..Default::default()
        };
        let c = read("a O\nb I-ORG\nc I-ORG\n", &opts).unwrap();
        assert_eq!(c.sentences[0].gold[0].surface, "bc");
        assert_eq!((c.sentences[0].gold[0].start, c.sentences[0].gold[0].end), (1, 3));
    }

    #[test]
    fn unknown_type_reports_line() {
        let err = read("a O\n\nb B-FOO\n", &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownType { line: 3, ref label } if label == "FOO"));
    }

    #[test]
    fn joiner_shifts_offsets() {
        let opts = ConllOptions {
            joiner: " ".into(),
            ..Default::default()
        };
        let c = read("John B-NAME\nSmith I-NAME\nat O\nACME B-ORG\n", &opts).unwrap();
        let s = &c.sentences[0];
        assert_eq!(s.text, "John Smith at ACME");
        assert_eq!((s.gold[0].start, s.gold[0].end), (0, 10));
        assert_eq!((s.gold[1].start, s.gold[1].end), (14, 18));
    }

    #[test]
    fn bmes_scheme() {
        let opts = ConllOptions {
            scheme: TagScheme::Bmes,
            ..Default::default()
        };
        let c = read("北 B-LOC\n京 E-LOC\n人 O\n张 S-NAME\n", &opts).unwrap();
        let g = &c.sentences[0].gold;
        assert_eq!(g.len(), 2);
        assert_eq!((g[0].surface.as_str(), g[1].surface.as_str()), ("北京", "张"));
        assert!(read("a E-LOC\n", &ConllOptions::default()).is_err());
    }

    // Ten sentences with adjacent runs sharing a type ("B-X I-X B-X") where
    // a naive decoder would merge them. Expected spans decoded by hand.
    const TEN: &str = "\
神 B-ORG\n华 I-ORG\n产 O\n甲 B-PRO\n醇 I-PRO\n\n\
甲 B-PRO\n醇 I-PRO\n乙 B-PRO\n醇 I-PRO\n\n\
北 B-LOC\n京 I-LOC\n\n\
无 O\n实 O\n体 O\n\n\
张 B-NAME\n三 I-NAME\n李 B-NAME\n四 I-NAME\n王 B-NAME\n\n\
煤 B-PRO\n\n\
中 B-ORG\n石 I-ORG\n化 I-ORG\n在 O\n上 B-LOC\n海 I-LOC\n\n\
a O\nb O\n\n\
焦 B-PRO\n炭 I-PRO\n和 O\n焦 B-PRO\n油 I-PRO\n\n\
公 B-ORG\n司 I-ORG\n";

    #[test]
    fn ten_sentence_fixture_decodes_to_hand_spans() {
        let c = read(TEN, &ConllOptions::default()).unwrap();
        let got: Vec<Vec<(&str, &str, usize, usize)>> = c
            .sentences
            .iter()
            .map(|s| s.gold.iter().map(|m| (m.surface.as_str(), m.etype.as_str(), m.start, m.end)).collect())
            .collect();
        let expected: Vec<Vec<(&str, &str, usize, usize)>> = vec![
            vec![("神华", "ORG", 0, 2), ("甲醇", "PRO", 3, 5)],
            vec![("甲醇", "PRO", 0, 2), ("乙醇", "PRO", 2, 4)],
            vec![("北京", "LOC", 0, 2)],
            vec![],
            vec![("张三", "NAME", 0, 2), ("李四", "NAME", 2, 4), ("王", "NAME", 4, 5)],
            vec![("煤", "PRO", 0, 1)],
            vec![("中石化", "ORG", 0, 3), ("上海", "LOC", 4, 6)],
            vec![],
            vec![("焦炭", "PRO", 0, 2), ("焦油", "PRO", 3, 5)],
            vec![("公司", "ORG", 0, 2)],
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn bio_round_trip_reproduces_tags() {
        let c = read(TEN, &ConllOptions::default()).unwrap();
        let mut out = Vec::new();
        write_conll(&c, &mut out, &ConllOptions::default()).unwrap();
        let original: Vec<String> = TEN.lines().map(|l| l.replace(' ', "\t")).collect();
        let written: Vec<String> = String::from_utf8(out).unwrap().lines().map(str::to_string).collect();
        // Writer terminates every sentence with a blank line.
        assert_eq!(&written[..original.len()], &original[..]);
        assert_eq!(written.len(), original.len() + 1);
    }
}
