use std::sync::LazyLock;

use regex::Regex;

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:https?://|www\.)\S+").expect("url regex"));

// Alternation order matters: emoji before punctuation, mentions before `@`.
static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)
          [\x{1F1E6}-\x{1F1FF}]{2}
        | \p{Extended_Pictographic}[\x{FE0F}\x{1F3FB}-\x{1F3FF}]*
          (?:\x{200D}\p{Extended_Pictographic}[\x{FE0F}\x{1F3FB}-\x{1F3FF}]*)*
        | @[\p{L}\p{N}\p{M}_]+
        | [\p{L}\p{N}\p{M}_]+(?:'[\p{L}\p{N}\p{M}_]+)*
        | [\#@]
        | [^\s\p{L}\p{N}\p{M}_\#@\p{Extended_Pictographic}\x{1F1E6}-\x{1F1FF}\x{200D}\x{FE0F}\x{1F3FB}-\x{1F3FF}]+
        ",
    )
    .expect("token regex")
});

/// Tweet-oriented tokenizer.
///
/// Lowercases, drops URLs, keeps emoji (including ZWJ and skin-tone
/// sequences) as standalone tokens, keeps contractions such as `i'm` whole,
/// splits hashtags into `#` plus the word, and groups runs of punctuation.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase().replace('\u{2019}', "'");
    let stripped = URL.replace_all(&lowered, " ");
    TOKEN
        .find_iter(&stripped)
        .map(|m| m.as_str().to_string())
        .collect()
}

static EMOJI_START: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:\p{Extended_Pictographic}|[\x{1F1E6}-\x{1F1FF}])").expect("emoji regex")
});

pub fn is_emoji_token(token: &str) -> bool {
    EMOJI_START.is_match(token)
}

pub fn is_punct_token(token: &str) -> bool {
    !token.is_empty()
        && !is_emoji_token(token)
        && token
            .chars()
            .all(|c| !c.is_alphanumeric() && !c.is_whitespace() && c != '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn lowercases_and_drops_urls() {
        assert_eq!(toks("Loving YOGA http://t.co/x"), vec!["loving", "yoga"]);
        assert_eq!(toks("see www.example.com/a now"), vec!["see", "now"]);
        assert!(toks("").is_empty());
    }

    #[test]
    fn contractions_digits_and_emoji() {
        assert_eq!(toks("I'm at 532Yoga 🧘"), vec!["i'm", "at", "532yoga", "🧘"]);
        assert_eq!(toks("I’ve done it"), vec!["i've", "done", "it"]);
    }

    #[test]
    fn hashtags_mentions_punctuation() {
        assert_eq!(
            toks("#Yoga time with @Anna_B!!"),
            vec!["#", "yoga", "time", "with", "@anna_b", "!!"]
        );
        assert_eq!(toks("great yoga retreat deals!!"), vec!["great", "yoga", "retreat", "deals", "!!"]);
    }

    #[test]
    fn emoji_sequences_stay_whole() {
        // woman in lotus position, medium skin tone, ZWJ sequence
        let s = "calm 🧘🏽\u{200D}♀\u{FE0F}🙏🙏 🇮🇳";
        assert_eq!(
            toks(s),
            vec!["calm", "🧘🏽\u{200D}♀\u{FE0F}", "🙏", "🙏", "🇮🇳"]
        );
        assert!(is_emoji_token("🙏"));
        assert!(!is_emoji_token("yoga"));
        assert!(is_punct_token("!!"));
        assert!(!is_punct_token("🙏"));
    }
}
