//! Adapter from Twitter v1.1 tweet exports to the corpus model.

use std::collections::HashMap;
use std::io::Read;

use chrono::DateTime;
use serde::Deserialize;

use super::{Corpus, CorpusError, PostRecord, Result, UserRecord};

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    /// Skip tweets carrying a `retweeted_status` object.
    pub drop_retweets: bool,
}

#[derive(Deserialize)]
struct Tweet {
    id_str: Option<String>,
    id: Option<u64>,
    full_text: Option<String>,
    text: Option<String>,
    created_at: String,
    user: TweetUser,
    #[serde(default)]
    entities: Entities,
    #[serde(default)]
    retweeted_status: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct TweetUser {
    id_str: Option<String>,
    id: Option<u64>,
    #[serde(default)]
    screen_name: String,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    location: Option<String>,
}

#[derive(Deserialize, Default)]
struct Entities {
    #[serde(default)]
    user_mentions: Vec<Mention>,
}

#[derive(Deserialize)]
struct Mention {
    id_str: Option<String>,
    id: Option<u64>,
}

fn pick_id(s: Option<String>, n: Option<u64>) -> Option<String> {
    s.or_else(|| n.map(|n| n.to_string()))
}

/// Parses `Wed Oct 10 20:19:24 +0000 2018`, falling back to RFC 2822.
pub(crate) fn parse_created_at(s: &str) -> Option<i64> {
    DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y")
        .or_else(|_| DateTime::parse_from_rfc2822(s))
        .ok()
        .map(|dt| dt.timestamp())
}

/// Reads either a JSON array of tweets or one tweet per line. Users appear
/// in order of first tweet; each user's posts are sorted by time then id.
pub fn ingest_twitter_export<R: Read>(
    mut reader: R,
    opts: IngestOptions,
    provenance: impl Into<String>,
) -> Result<Corpus> {
    let mut raw = String::new();
    reader.read_to_string(&mut raw).map_err(|e| CorpusError::Malformed {
        line: 0,
        message: e.to_string(),
    })?;
    let records: Vec<(usize, serde_json::Value)> = if raw.trim_start().starts_with('[') {
        let values: Vec<serde_json::Value> =
            serde_json::from_str(&raw).map_err(|e| CorpusError::Malformed {
                line: e.line(),
                message: e.to_string(),
            })?;
        values.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect()
    } else {
        let mut out = Vec::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
            out.push((i + 1, v));
        }
        out
    };

    let mut users: Vec<UserRecord> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, value) in records {
        let schema = |field: &str, message: String| CorpusError::Schema {
            line,
            field: field.to_string(),
            message,
        };
        let tweet: Tweet = serde_path_to_error::deserialize(value)
            .map_err(|e| schema(&e.path().to_string(), e.into_inner().to_string()))?;
        if opts.drop_retweets && tweet.retweeted_status.is_some() {
            continue;
        }
        let post_id = pick_id(tweet.id_str, tweet.id)
            .ok_or_else(|| schema("id_str", "missing tweet id".into()))?;
        let user_id = pick_id(tweet.user.id_str, tweet.user.id)
            .ok_or_else(|| schema("user.id_str", "missing user id".into()))?;
        let text = tweet
            .full_text
            .or(tweet.text)
            .ok_or_else(|| schema("full_text", "missing tweet text".into()))?;
        let timestamp = parse_created_at(&tweet.created_at)
            .ok_or_else(|| schema("created_at", format!("unparseable date {:?}", tweet.created_at)))?;
        if text.trim().is_empty() {
            continue;
        }
        let slot = *index.entry(user_id.clone()).or_insert_with(|| {
            let mut u = UserRecord::new(user_id.clone());
            u.handle = tweet.user.screen_name.clone();
            u.description = tweet.user.description.clone().unwrap_or_default();
            u.location = tweet.user.location.clone().unwrap_or_default();
            users.push(u);
            users.len() - 1
        });
        let mut post = PostRecord::new(post_id, user_id, timestamp, text);
        post.mentions = tweet
            .entities
            .user_mentions
            .into_iter()
            .filter_map(|m| pick_id(m.id_str, m.id))
            .collect();
        users[slot].posts.push(post);
    }
    for u in &mut users {
        u.posts
            .sort_by(|a, b| (a.timestamp, &a.post_id).cmp(&(b.timestamp, &b.post_id)));
        u.posts.dedup_by(|a, b| a.post_id == b.post_id);
    }
    Corpus::new(users, provenance)
}
