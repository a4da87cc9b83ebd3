//! User/post data model, JSONL persistence and splitting.

mod ingest;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::tokenize;

pub use ingest::{ingest_twitter_export, IngestOptions};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: malformed JSON: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },
    #[error("line {line}: duplicate user_id {user_id:?} (first seen on line {first_line})")]
    DuplicateUser {
        user_id: String,
        line: usize,
        first_line: usize,
    },
    #[error("user {user_id:?}: {message}")]
    Invalid { user_id: String, message: String },
    #[error("invalid split: {0}")]
    Split(String),
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// Emotion classes in their fixed label order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Joy,
    Love,
    Sadness,
    Anger,
    Fear,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 6] = [
        Emotion::Joy,
        Emotion::Love,
        Emotion::Sadness,
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Surprise,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Love => "love",
            Emotion::Sadness => "sadness",
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Surprise => "surprise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }

    /// Joy and love count toward happiness.
    pub fn is_positive(self) -> bool {
        matches!(self, Emotion::Joy | Emotion::Love)
    }

    pub fn label_names() -> Vec<String> {
        Self::ALL.iter().map(|e| e.as_str().to_string()).collect()
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// User type, serialized as its integer code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum UserType {
    Practitioner = 0,
    Promotional = 1,
    Other = 2,
}

impl UserType {
    pub const ALL: [UserType; 3] = [UserType::Practitioner, UserType::Promotional, UserType::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UserType::Practitioner => "practitioner",
            UserType::Promotional => "promotional",
            UserType::Other => "other",
        }
    }

    pub fn label_names() -> Vec<String> {
        Self::ALL.iter().map(|t| t.as_str().to_string()).collect()
    }
}

impl TryFrom<u8> for UserType {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        Self::from_index(v as usize).ok_or_else(|| format!("user type code {v} not in 0..=2"))
    }
}

impl From<UserType> for u8 {
    fn from(t: UserType) -> u8 {
        t as u8
    }
}

impl fmt::Display for UserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    /// Filled from the owning user on load; not part of the serialized post.
    #[serde(default, skip_serializing)]
    pub user_id: String,
    /// UTC epoch seconds.
    pub timestamp: i64,
    pub text: String,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub pos_tags: Option<Vec<String>>,
    #[serde(default)]
    pub emotion_label: Option<Emotion>,
}

impl PostRecord {
    pub fn new(
        post_id: impl Into<String>,
        user_id: impl Into<String>,
        timestamp: i64,
        text: impl Into<String>,
    ) -> Self {
        Self {
            post_id: post_id.into(),
            user_id: user_id.into(),
            timestamp,
            text: text.into(),
            mentions: Vec::new(),
            pos_tags: None,
            emotion_label: None,
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.timestamp <= 0 {
            return Err(format!("post {:?}: timestamp must be > 0", self.post_id));
        }
        if self.text.trim().is_empty() {
            return Err(format!("post {:?}: text is empty", self.post_id));
        }
        if let Some(tags) = &self.pos_tags {
            let n = tokenize(&self.text).len();
            if tags.len() != n {
                return Err(format!(
                    "post {:?}: {} pos_tags for {} tokens",
                    self.post_id,
                    tags.len(),
                    n
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    #[serde(default)]
    pub handle: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub location: String,
    #[serde(default)]
    pub user_type_label: Option<UserType>,
    #[serde(default)]
    pub posts: Vec<PostRecord>,
}

impl UserRecord {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            handle: String::new(),
            description: String::new(),
            location: String::new(),
            user_type_label: None,
            posts: Vec::new(),
        }
    }

    /// Fills empty post owner ids and checks every post.
    fn normalize(&mut self) -> std::result::Result<(), String> {
        if self.user_id.is_empty() {
            return Err("user_id is empty".into());
        }
        let mut seen = HashSet::new();
        for post in &mut self.posts {
            if post.user_id.is_empty() {
                post.user_id = self.user_id.clone();
            } else if post.user_id != self.user_id {
                return Err(format!(
                    "post {:?} belongs to {:?}",
                    post.post_id, post.user_id
                ));
            }
            if !seen.insert(post.post_id.as_str()) {
                return Err(format!("duplicate post_id {:?}", post.post_id));
            }
            post.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub users: Vec<UserRecord>,
    pub provenance: String,
}

/// Equality is over users only; provenance is descriptive.
impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users
    }
}

impl Corpus {
    /// Validates and normalizes users into a corpus.
    pub fn new(users: Vec<UserRecord>, provenance: impl Into<String>) -> Result<Self> {
        let mut users = users;
        let mut seen = HashSet::new();
        for user in &mut users {
            user.normalize().map_err(|message| CorpusError::Invalid {
                user_id: user.user_id.clone(),
                message,
            })?;
            if !seen.insert(user.user_id.clone()) {
                return Err(CorpusError::Invalid {
                    user_id: user.user_id.clone(),
                    message: "duplicate user_id".into(),
                });
            }
        }
        Ok(Self {
            users,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn n_posts(&self) -> usize {
        self.users.iter().map(|u| u.posts.len()).sum()
    }

    pub fn user(&self, user_id: &str) -> Option<&UserRecord> {
        self.users.iter().find(|u| u.user_id == user_id)
    }

    pub fn posts(&self) -> impl Iterator<Item = &PostRecord> {
        self.users.iter().flat_map(|u| u.posts.iter())
    }

    pub fn from_reader<R: BufRead>(reader: R, provenance: impl Into<String>) -> Result<Self> {
        let mut users = Vec::new();
        let mut first_line: HashMap<String, usize> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| CorpusError::Malformed {
                line: lineno,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut user = parse_user_line(&line, lineno)?;
            if let Some(&first) = first_line.get(&user.user_id) {
                return Err(CorpusError::DuplicateUser {
                    user_id: user.user_id,
                    line: lineno,
                    first_line: first,
                });
            }
            user.normalize().map_err(|message| CorpusError::Schema {
                line: lineno,
                field: "posts".into(),
                message,
            })?;
            first_line.insert(user.user_id.clone(), lineno);
            users.push(user);
        }
        Ok(Self {
            users,
            provenance: provenance.into(),
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for user in &self.users {
            serde_json::to_writer(&mut w, user)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    /// Drops posts for which `keep` is false.
    pub fn filter_posts(&mut self, mut keep: impl FnMut(&PostRecord) -> bool) {
        for user in &mut self.users {
            user.posts.retain(&mut keep);
        }
    }
}

fn parse_user_line(line: &str, lineno: usize) -> Result<UserRecord> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: lineno,
            message: e.to_string(),
        })?;
    if !value.is_object() {
        return Err(CorpusError::Schema {
            line: lineno,
            field: ".".into(),
            message: "expected a JSON object".into(),
        });
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        let message = e.into_inner().to_string();
        // A missing key is reported at its parent; name it instead.
        let field = match message.strip_prefix("missing field `") {
            Some(rest) => {
                let name = rest.trim_end_matches('`');
                if field == "." {
                    name.to_string()
                } else {
                    format!("{field}.{name}")
                }
            }
            None => field,
        };
        CorpusError::Schema {
            line: lineno,
            field,
            message,
        }
    })
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    Corpus::from_reader(BufReader::new(file), path.display().to_string())
}

pub fn save_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    corpus
        .write_to(BufWriter::new(file))
        .map_err(|e| CorpusError::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.6,
            valid_frac: 0.2,
            test_frac: 0.2,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.valid_frac, self.test_frac];
        if fracs.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(CorpusError::Split(format!(
                "fractions must be positive, got {fracs:?}"
            )));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::Split(format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// (train, valid, test) sizes: valid and test are floored, train takes
    /// the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let floor = |f: f64| ((n as f64) * f + 1e-9).floor() as usize;
        let valid = floor(self.valid_frac);
        let test = floor(self.test_frac).min(n - valid);
        (n - valid - test, valid, test)
    }
}

/// Shuffled index partition shared by every split in the pipeline.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (train, valid, _) = spec.sizes(n);
    let test = idx.split_off(train + valid);
    let valid = idx.split_off(train);
    Ok((idx, valid, test))
}

pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus, Corpus)> {
    if corpus.is_empty() {
        return Err(CorpusError::Split("corpus is empty".into()));
    }
    let (train, valid, test) = split_indices(corpus.len(), spec)?;
    let take = |ids: Vec<usize>, name: &str| Corpus {
        users: ids.into_iter().map(|i| corpus.users[i].clone()).collect(),
        provenance: format!("{} [{name}]", corpus.provenance),
    };
    Ok((take(train, "train"), take(valid, "valid"), take(test, "test")))
}
