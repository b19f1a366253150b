//! Canonical text normalization and character-offset helpers.
//!
//! All offsets in this crate count Unicode scalar values, never bytes.

use unicode_normalization::UnicodeNormalization;

/// NFC-composes `raw`, trims it, and collapses internal whitespace runs to a
/// single ASCII space. Idempotent.
pub fn normalize_text(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    let mut pending_space = false;
    for ch in composed.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slice `s` by character offsets `[start, end)`. Returns `None` when the
/// range is empty, reversed, or out of bounds.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start >= end {
        return None;
    }
    let mut indices = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let byte_start = indices.nth(start)?;
    let byte_end = indices.nth(end - start - 1)?;
    Some(&s[byte_start..byte_end])
}

/// Leftmost exact occurrence of `needle` in `haystack`, as a character span.
pub fn find_char_span(haystack: &str, needle: &str) -> Option<(usize, usize)> {
    if needle.is_empty() {
        return None;
    }
    let byte_pos = haystack.find(needle)?;
    let start = haystack[..byte_pos].chars().count();
    Some((start, start + char_len(needle)))
}

/// Whitespace normalization that also reports where every input character
/// boundary lands in the output.
///
/// `boundaries[i]` is the output character offset corresponding to input
/// boundary `i` (so `boundaries.len() == char_len(raw) + 1`). The input is
/// expected to be NFC already; composition would break the mapping.
pub(crate) fn collapse_whitespace_with_offsets(raw: &str) -> (String, Vec<usize>) {
    let mut out = String::with_capacity(raw.len());
    let mut out_len = 0usize;
    let mut boundaries = Vec::with_capacity(raw.len() + 1);
    let mut pending_space = false;
    for ch in raw.chars() {
        if ch.is_whitespace() {
            boundaries.push(out_len + usize::from(pending_space));
            pending_space = out_len > 0;
        } else {
            if pending_space {
                out.push(' ');
                out_len += 1;
                pending_space = false;
            }
            boundaries.push(out_len);
            out.push(ch);
            out_len += 1;
        }
    }
    boundaries.push(out_len);
    for b in boundaries.iter_mut() {
        *b = (*b).min(out_len);
    }
    (out, boundaries)
}
