//! Deterministic lexicon + suffix part-of-speech tagger producing Penn
//! Treebank tags. Used only when a post arrives without tags.

use std::collections::HashMap;
use std::sync::LazyLock;

use super::tokenize::{is_emoji_token, is_punct_token};

static LEXICON: LazyLock<HashMap<&'static str, &'static str>> = LazyLock::new(|| {
    let groups: &[(&str, &[&str])] = &[
        (
            "PRP",
            &[
                "i", "me", "you", "he", "she", "it", "we", "they", "us", "him", "them", "myself",
                "yourself", "himself", "herself", "itself", "ourselves", "yourselves",
                "themselves", "mine", "yours", "hers", "ours", "theirs", "im", "i'm", "i've",
                "i'd", "i'll", "you're", "you've", "you'd", "you'll", "he's", "he'd", "he'll",
                "she's", "she'd", "she'll", "it's", "it'll", "we're", "we've", "we'd", "we'll",
                "they're", "they've", "they'd", "they'll", "u",
            ],
        ),
        ("PRP$", &["my", "your", "his", "her", "its", "our", "their", "ur"]),
        (
            "DT",
            &[
                "the", "a", "an", "this", "that", "these", "those", "some", "any", "every",
                "each", "all", "no", "another", "both", "either", "neither",
            ],
        ),
        (
            "IN",
            &[
                "in", "on", "at", "after", "before", "with", "for", "from", "of", "by", "about",
                "during", "into", "through", "over", "under", "since", "until", "without",
                "while", "because", "if", "than", "as", "like", "near", "around", "between",
                "across", "against", "per",
            ],
        ),
        ("CC", &["and", "but", "or", "nor", "yet", "&"]),
        ("TO", &["to"]),
        (
            "MD",
            &["can", "could", "will", "would", "shall", "should", "may", "might", "must", "gonna", "wanna"],
        ),
        ("VBZ", &["is", "has", "does", "says", "goes", "gets", "makes", "takes", "isn't", "doesn't", "hasn't"]),
        ("VBP", &["am", "are", "have", "do", "don't", "aren't", "haven't"]),
        (
            "VBD",
            &[
                "was", "were", "had", "did", "went", "said", "got", "made", "took", "felt", "came",
                "saw", "began", "ran", "left", "wasn't", "weren't", "didn't",
            ],
        ),
        ("VB", &["be", "go", "get", "make", "take", "let's", "try", "join", "book", "come", "see"]),
        ("VBN", &["been", "done", "gone", "taken", "seen", "given"]),
        (
            "RB",
            &[
                "not", "very", "really", "just", "so", "too", "also", "now", "then", "here",
                "there", "today", "tomorrow", "yesterday", "always", "never", "again", "still",
                "already", "soon", "often", "ever", "once", "tonight", "n't", "finally",
            ],
        ),
        (
            "JJ",
            &[
                "great", "good", "new", "best", "better", "happy", "sad", "calm", "free", "big",
                "small", "little", "first", "last", "next", "early", "late", "old", "long",
                "full", "daily", "weekly", "open", "fresh", "strong", "angry", "scared",
                "afraid", "amazing", "awesome", "tired", "excited", "nice", "hot", "warm",
                "other", "own", "more", "most", "many", "much", "few",
            ],
        ),
        ("UH", &["wow", "oh", "lol", "omg", "yay", "yes", "hey", "hi", "ugh", "please", "thanks"]),
        ("WP", &["what", "who", "whom"]),
        ("WRB", &["how", "when", "where", "why"]),
        (
            "NN",
            &[
                "yoga", "morning", "evening", "nothing", "something", "everything", "anything",
                "thing", "spring", "king", "ring", "string", "ceiling", "building", "wedding",
                "class", "stress", "focus", "bus", "yogi", "news", "mindfulness", "fitness",
                "wellness", "happiness", "sadness", "peace", "time", "day", "life", "mat",
                "session", "practice", "flow", "studio", "retreat", "pose",
            ],
        ),
        (
            "NNP",
            &[
                "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
                "january", "february", "march", "april", "june", "july", "august", "september",
                "october", "november", "december", "london", "paris", "india", "mumbai", "nyc",
                "california", "texas", "instagram", "twitter", "facebook", "youtube", "usa",
                "uk", "bali", "delhi", "sydney", "toronto", "berlin",
            ],
        ),
    ];
    let mut map = HashMap::new();
    for (tag, words) in groups {
        for w in *words {
            map.insert(*w, *tag);
        }
    }
    map
});

const ADJ_SUFFIXES: &[&str] = &["ful", "ous", "ive", "less", "able", "ible", "ish", "ic", "al"];

fn punct_tag(token: &str) -> &'static str {
    match token {
        "," => ",",
        "#" => "#",
        "$" => "$",
        "(" | "[" | "{" => "(",
        ")" | "]" | "}" => ")",
        "\"" | "'" | "''" => "''",
        _ if token.chars().all(|c| matches!(c, '.' | '!' | '?')) => ".",
        _ => ":",
    }
}

fn is_number(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '%'))
}

fn tag_one(token: &str) -> &'static str {
    if let Some(tag) = LEXICON.get(token) {
        return tag;
    }
    if is_emoji_token(token) {
        return "SYM";
    }
    if is_punct_token(token) {
        return punct_tag(token);
    }
    if token.starts_with('@') {
        return "NNP";
    }
    if is_number(token) {
        return "CD";
    }
    let n = token.chars().count();
    if token.ends_with("'s") {
        return "NN";
    }
    if n > 4 && token.ends_with("ing") {
        return "VBG";
    }
    if n > 3 && token.ends_with("ed") {
        return "VBD";
    }
    if n > 3 && token.ends_with("ly") {
        return "RB";
    }
    if n > 4 && ADJ_SUFFIXES.iter().any(|s| token.ends_with(s)) {
        return "JJ";
    }
    if n > 3
        && token.ends_with('s')
        && !token.ends_with("ss")
        && !token.ends_with("us")
        && !token.ends_with("is")
    {
        return "NNS";
    }
    "NN"
}

/// Tags lowercased tokens. Capitalization is unavailable, so `NNP` comes
/// only from the proper-noun lexicon and from `@mentions`.
pub fn heuristic_pos_tag<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens
        .iter()
        .map(|t| tag_one(t.as_ref()).to_string())
        .collect()
}
