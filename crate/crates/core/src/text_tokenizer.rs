//! Plain-text word tokens.
//!
//! A word is a maximal run of letters, apostrophes and hyphens with the
//! leading and trailing apostrophes/hyphens removed, lowercased. Digits,
//! whitespace, dashes other than the ASCII hyphen, and all other punctuation
//! separate words. The typographic apostrophe U+2019 is read as `'`.

use std::fmt;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct WordToken(String);

impl WordToken {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WordToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

fn push_word(out: &mut Vec<WordToken>, raw: &str) {
    let trimmed = raw.trim_matches(is_joiner);
    if trimmed.is_empty() {
        return;
    }
    let word: String = trimmed
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect();
    out.push(WordToken(word));
}

pub fn tokenize_text(text: &str) -> Vec<WordToken> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        let inside = c.is_alphabetic() || is_joiner(c);
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push_word(&mut out, &text[s..i]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_word(&mut out, &text[s..]);
    }
    out
}

/// Decodes UTF-8 and tokenizes.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<WordToken>> {
    Ok(tokenize_text(std::str::from_utf8(bytes)?))
}
