//! Tokenization and first-hand activity detection.

mod postag;
mod tokenize;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PostRecord;

pub use postag::heuristic_pos_tag;
pub use tokenize::{is_emoji_token, is_punct_token, tokenize};

/// First-person singular and plural forms that mark a post as the author's
/// own experience.
pub const FIRST_PERSON_WORDS: [&str; 19] = [
    "i", "im", "i'm", "i've", "i'd", "i'll", "my", "me", "mine", "myself", "we", "we're", "we'd",
    "we'll", "we've", "our", "ours", "us", "ourselves",
];

/// Tags whose presence anywhere in a post rules out implicit first-hand
/// experience.
pub const EXCLUDED_TAGS: [&str; 6] = ["VBZ", "NNP", "NNS", "NNPS", "PRP", "PRP$"];

pub const DEFAULT_ACTIVITY_KEYWORDS: [&str; 14] = [
    "yoga",
    "yogi",
    "yogalife",
    "yogalove",
    "yogainspiration",
    "yogachallenge",
    "yogaeverywhere",
    "yogaeveryday",
    "yogadaily",
    "yogaeverydamnday",
    "yogapractice",
    "yogapose",
    "yogalover",
    "yogajourney",
];

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("{tokens} tokens but {tags} POS tags")]
    TagLengthMismatch { tokens: usize, tags: usize },
    #[error("invalid keyword set: {0}")]
    InvalidKeywords(String),
}

/// Activity vocabulary. A token matches the activity when it contains the
/// core keyword or one of its aliases as a substring, or equals one of the
/// activity keywords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeywordSet {
    pub activity_keywords: BTreeSet<String>,
    pub core_keyword: String,
    pub core_aliases: Vec<String>,
}

impl Default for KeywordSet {
    fn default() -> Self {
        Self {
            activity_keywords: DEFAULT_ACTIVITY_KEYWORDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            core_keyword: "yoga".to_string(),
            core_aliases: vec!["yogi".to_string()],
        }
    }
}

impl KeywordSet {
    pub fn validate(&self) -> Result<(), TextError> {
        if self.core_keyword.is_empty() {
            return Err(TextError::InvalidKeywords("core_keyword is empty".into()));
        }
        let all = std::iter::once(&self.core_keyword)
            .chain(&self.core_aliases)
            .chain(&self.activity_keywords);
        for k in all {
            if k.is_empty() || k.to_lowercase() != *k {
                return Err(TextError::InvalidKeywords(format!(
                    "keyword {k:?} must be non-empty and lowercase"
                )));
            }
        }
        Ok(())
    }

    pub fn matches_token(&self, token: &str) -> bool {
        token.contains(self.core_keyword.as_str())
            || self.core_aliases.iter().any(|a| token.contains(a.as_str()))
            || self.activity_keywords.contains(token)
    }

    pub fn matches_any<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        tokens.iter().any(|t| self.matches_token(t.as_ref()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityMode {
    /// Any post mentioning the activity.
    AnyYoga,
    /// Only posts showing first-hand experience (explicit or implicit).
    FirstHandOnly,
}

impl ActivityMode {
    /// Short feature label used in reports.
    pub fn feature_label(self) -> &'static str {
        match self {
            ActivityMode::AnyYoga => "y + h",
            ActivityMode::FirstHandOnly => "y + 1st + h",
        }
    }
}

/// Per-post analysis result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizedPost {
    pub tokens: Vec<String>,
    pub is_yoga: bool,
    pub first_person_explicit: bool,
    /// Only evaluated when the explicit rule fails.
    pub first_person_implicit: bool,
    /// True when tags came from [`heuristic_pos_tag`].
    pub heuristic_tags: bool,
}

impl TokenizedPost {
    pub fn first_hand(&self) -> bool {
        self.first_person_explicit || self.first_person_implicit
    }
}

/// True iff the tokens contain a first-person word and an activity token.
pub fn detect_first_person_explicit<S: AsRef<str>>(tokens: &[S], ks: &KeywordSet) -> bool {
    ks.matches_any(tokens)
        && tokens
            .iter()
            .any(|t| FIRST_PERSON_WORDS.contains(&t.as_ref()))
}

/// True iff an activity token is present and no token carries one of
/// [`EXCLUDED_TAGS`].
pub fn detect_first_person_implicit<S: AsRef<str>, T: AsRef<str>>(
    tokens: &[S],
    tags: &[T],
    ks: &KeywordSet,
) -> Result<bool, TextError> {
    if tokens.len() != tags.len() {
        return Err(TextError::TagLengthMismatch {
            tokens: tokens.len(),
            tags: tags.len(),
        });
    }
    Ok(ks.matches_any(tokens) && !tags.iter().any(|t| EXCLUDED_TAGS.contains(&t.as_ref())))
}

/// Tokenizes and runs both first-hand rules on a post. Stored tags are used
/// when present (their length is validated at corpus load), otherwise the
/// heuristic tagger fills in.
pub fn analyze_post(post: &PostRecord, ks: &KeywordSet) -> TokenizedPost {
    let tokens = tokenize(&post.text);
    let is_yoga = ks.matches_any(&tokens);
    let explicit = is_yoga && detect_first_person_explicit(&tokens, ks);
    let mut heuristic_tags = false;
    let implicit = if is_yoga && !explicit {
        let tags = match &post.pos_tags {
            Some(tags) if tags.len() == tokens.len() => tags.clone(),
            _ => {
                heuristic_tags = true;
                heuristic_pos_tag(&tokens)
            }
        };
        detect_first_person_implicit(&tokens, &tags, ks).unwrap_or(false)
    } else {
        false
    };
    TokenizedPost {
        tokens,
        is_yoga,
        first_person_explicit: explicit,
        first_person_implicit: implicit,
        heuristic_tags,
    }
}

pub fn classify_activity(post: &PostRecord, ks: &KeywordSet, mode: ActivityMode) -> bool {
    let analysis = analyze_post(post, ks);
    match mode {
        ActivityMode::AnyYoga => analysis.is_yoga,
        ActivityMode::FirstHandOnly => analysis.first_hand(),
    }
}
