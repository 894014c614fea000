//! Case-sensitive, word-boundary delimited surface matching.
//!
//! A match must not extend a word: if the needle starts (ends) with a word
//! character, the haystack character before (after) the match must not be a
//! word character. Needles that start or end with punctuation impose no
//! constraint on that side.

use std::ops::Range;

/// Letters, digits and `_`.
pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// A match of needle number `needle` at byte range `span`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub needle: usize,
    pub span: Range<usize>,
}

fn boundary_ok(hay: &str, start: usize, needle: &str) -> bool {
    let end = start + needle.len();
    let first = needle.chars().next();
    let last = needle.chars().next_back();
    let left_ok = match (first, hay[..start].chars().next_back()) {
        (Some(f), Some(prev)) if is_word_char(f) => !is_word_char(prev),
        _ => true,
    };
    let right_ok = match (last, hay[end..].chars().next()) {
        (Some(l), Some(next)) if is_word_char(l) => !is_word_char(next),
        _ => true,
    };
    left_ok && right_ok
}

/// All non-overlapping matches of any of `needles` in `hay`.
///
/// Scans left to right; at each position the longest matching needle wins.
/// Empty needles never match.
pub fn find_all(hay: &str, needles: &[&str]) -> Vec<Match> {
    let mut order: Vec<usize> = (0..needles.len()).filter(|&i| !needles[i].is_empty()).collect();
    order.sort_by(|&a, &b| needles[b].len().cmp(&needles[a].len()).then(a.cmp(&b)));
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < hay.len() {
        let rest = &hay[pos..];
        let hit = order
            .iter()
            .copied()
            .find(|&i| rest.starts_with(needles[i]) && boundary_ok(hay, pos, needles[i]));
        match hit {
            Some(i) => {
                out.push(Match { needle: i, span: pos..pos + needles[i].len() });
                pos += needles[i].len();
            }
            None => pos += rest.chars().next().map_or(1, char::len_utf8),
        }
    }
    out
}

/// True if `needle` occurs in `hay` at a word boundary.
pub fn contains_word(hay: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(off) = hay[from..].find(needle) {
        let start = from + off;
        if boundary_ok(hay, start, needle) {
            return true;
        }
        from = start + hay[start..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// Replaces every match of `needles[i]` with `replacements[i]`, using the
/// same longest-first, left-to-right scan as [`find_all`].
pub fn replace_all(hay: &str, needles: &[&str], replacements: &[&str]) -> String {
    debug_assert_eq!(needles.len(), replacements.len());
    let mut out = String::with_capacity(hay.len());
    let mut last = 0;
    for m in find_all(hay, needles) {
        out.push_str(&hay[last..m.span.start]);
        out.push_str(replacements[m.needle]);
        last = m.span.end;
    }
    out.push_str(&hay[last..]);
    out
}

/// Unicode-whitespace tokens.
pub fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split_whitespace()
}

/// Index of the whitespace token containing byte offset `at`, given the
/// start offsets of every token in ascending order.
pub fn token_index_at(token_starts: &[usize], at: usize) -> usize {
    token_starts.partition_point(|&s| s <= at).saturating_sub(1)
}

/// Start byte offsets of all whitespace tokens in `s`.
pub fn token_starts(s: &str) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut in_token = false;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            in_token = false;
        } else if !in_token {
            starts.push(i);
            in_token = true;
        }
    }
    starts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_word_boundaries() {
        assert!(!contains_word("the", "he"));
        assert!(contains_word("he said", "he"));
        assert!(contains_word("'Frank's always late.'", "Frank"));
        assert!(!contains_word("Franky", "Frank"));
        assert!(!contains_word("anything", ""));
    }

    #[test]
    fn punctuation_edges_do_not_need_boundaries() {
        assert!(contains_word("ask Dr.Green", "Dr."));
        assert_eq!(find_all("x[S1]y", &["[S1]"]).len(), 1);
    }

    #[test]
    fn longest_match_wins() {
        let hay = "Speaker 1 met Speaker 12 and Speaker";
        let m = find_all(hay, &["Speaker", "Speaker 12", "Speaker 1"]);
        let got: Vec<&str> = m.iter().map(|m| &hay[m.span.clone()]).collect();
        assert_eq!(got, vec!["Speaker 1", "Speaker 12", "Speaker"]);
        assert_eq!(m[1].needle, 1);
    }

    #[test]
    fn replace_is_single_pass() {
        let out = replace_all("Rachel and Ross", &["Rachel", "Ross"], &["Ross", "Speaker 2"]);
        assert_eq!(out, "Ross and Speaker 2");
    }

    #[test]
    fn token_offsets() {
        let s = "a  bb\tc";
        let starts = token_starts(s);
        assert_eq!(starts, vec![0, 3, 6]);
        assert_eq!(token_index_at(&starts, 4), 1);
        assert_eq!(token_index_at(&starts, 6), 2);
        assert_eq!(tokens(s).count(), 3);
    }

    #[test]
    fn multibyte_text() {
        let hay = "café Zoë, Zoë!";
        let m = find_all(hay, &["Zoë"]);
        assert_eq!(m.len(), 2);
        assert_eq!(&hay[m[1].span.clone()], "Zoë");
    }
}
