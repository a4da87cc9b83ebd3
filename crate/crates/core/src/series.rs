//! Per-user activity and happiness count series over uniform UTC bins.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Emotion, PostRecord, UserRecord};
use crate::textproc::{classify_activity, ActivityMode, KeywordSet};

pub const SERIES_FILE: &str = "series.jsonl";
pub const CSV_DIR: &str = "csv";

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("user {0:?} has no posts")]
    NoPosts(String),
    #[error("post {post_id:?}: timestamp {timestamp} out of range")]
    Timestamp { post_id: String, timestamp: i64 },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bin {
    #[default]
    Day,
    /// Weeks start on Monday.
    Week,
    Month,
}

impl Bin {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "day" => Some(Bin::Day),
            "week" => Some(Bin::Week),
            "month" => Some(Bin::Month),
            _ => None,
        }
    }

    fn index(self, date: NaiveDate) -> i64 {
        match self {
            Bin::Day => date.num_days_from_ce() as i64,
            Bin::Week => {
                (date.num_days_from_ce() as i64 - date.weekday().num_days_from_monday() as i64)
                    .div_euclid(7)
            }
            Bin::Month => date.year() as i64 * 12 + date.month0() as i64,
        }
    }

    /// First date of the bin containing `date`.
    pub fn start_of(self, date: NaiveDate) -> NaiveDate {
        match self {
            Bin::Day => date,
            Bin::Week => date - Days::new(date.weekday().num_days_from_monday() as u64),
            Bin::Month => date.with_day(1).expect("day 1 exists"),
        }
    }

    pub fn advance(self, date: NaiveDate, n: u64) -> NaiveDate {
        match self {
            Bin::Day => date + Days::new(n),
            Bin::Week => date + Days::new(7 * n),
            Bin::Month => date + Months::new(n as u32),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesOptions {
    pub bin: Bin,
    /// Divide both series by the bin's total post count.
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPair {
    pub user_id: String,
    pub bin: Bin,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    /// Number of posts counted as activity, before any normalization.
    pub activity_posts: u64,
    pub normalized: bool,
}

impl SeriesPair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len() as u64).map(|i| self.bin.advance(self.start, i)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "date,a,p")?;
        for (d, (a, p)) in self.dates().iter().zip(self.a.iter().zip(&self.p)) {
            writeln!(w, "{},{a},{p}", d.format("%Y-%m-%d"))?;
        }
        w.flush()
    }
}

/// Per-post emotion labels keyed by post id. Posts without an entry carry
/// no emotion.
pub type EmotionMap = HashMap<String, Emotion>;

pub fn gold_emotions(corpus: &Corpus) -> EmotionMap {
    corpus
        .posts()
        .filter_map(|p| p.emotion_label.map(|e| (p.post_id.clone(), e)))
        .collect()
}

fn post_date(post: &PostRecord) -> Result<NaiveDate, SeriesError> {
    DateTime::from_timestamp(post.timestamp, 0)
        .map(|dt| dt.date_naive())
        .ok_or_else(|| SeriesError::Timestamp {
            post_id: post.post_id.clone(),
            timestamp: post.timestamp,
        })
}

fn build_with(
    user: &UserRecord,
    emotions: &EmotionMap,
    opts: SeriesOptions,
    is_activity: impl Fn(&PostRecord) -> bool,
) -> Result<SeriesPair, SeriesError> {
    if user.posts.is_empty() {
        return Err(SeriesError::NoPosts(user.user_id.clone()));
    }
    let mut binned = Vec::with_capacity(user.posts.len());
    for post in &user.posts {
        let date = post_date(post)?;
        binned.push((opts.bin.index(date), date, post));
    }
    let (lo, lo_date) = binned.iter().map(|b| (b.0, b.1)).min().expect("non-empty");
    let hi = binned.iter().map(|b| b.0).max().expect("non-empty");
    let n = (hi - lo + 1) as usize;
    let (mut a, mut p, mut total) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut activity_posts = 0;
    for (idx, _, post) in binned {
        let t = (idx - lo) as usize;
        total[t] += 1.0;
        if is_activity(post) {
            a[t] += 1.0;
            activity_posts += 1;
        }
        if emotions.get(&post.post_id).is_some_and(|e| e.is_positive()) {
            p[t] += 1.0;
        }
    }
    if opts.normalize {
        for t in 0..n {
            if total[t] > 0.0 {
                a[t] /= total[t];
                p[t] /= total[t];
            }
        }
    }
    let start = opts.bin.start_of(lo_date);
    Ok(SeriesPair {
        user_id: user.user_id.clone(),
        bin: opts.bin,
        start,
        end: opts.bin.advance(start, n as u64 - 1),
        a,
        p,
        activity_posts,
        normalized: opts.normalize,
    })
}

/// Activity counts (posts passing `classify_activity`) against happiness
/// counts (posts labelled joy or love).
pub fn build_series(
    user: &UserRecord,
    emotions: &EmotionMap,
    mode: ActivityMode,
    ks: &KeywordSet,
    opts: SeriesOptions,
) -> Result<SeriesPair, SeriesError> {
    build_with(user, emotions, opts, |post| classify_activity(post, ks, mode))
}

/// Total post volume against happiness counts.
pub fn build_volume_series(
    user: &UserRecord,
    emotions: &EmotionMap,
    opts: SeriesOptions,
) -> Result<SeriesPair, SeriesError> {
    build_with(user, emotions, opts, |_| true)
}

fn sanitize_file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes `series.jsonl` and one `csv/<user>.csv` per pair.
pub fn write_series_dir(dir: &Path, pairs: &[SeriesPair]) -> Result<(), SeriesError> {
    fs::create_dir_all(dir.join(CSV_DIR))?;
    let mut w = BufWriter::new(File::create(dir.join(SERIES_FILE))?);
    for pair in pairs {
        serde_json::to_writer(&mut w, pair).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        let csv = dir.join(CSV_DIR).join(format!("{}.csv", sanitize_file_stem(&pair.user_id)));
        pair.write_csv(BufWriter::new(File::create(csv)?))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a series file, or `series.jsonl` inside a directory.
pub fn read_series(path: &Path) -> Result<Vec<SeriesPair>, SeriesError> {
    let file = if path.is_dir() { path.join(SERIES_FILE) } else { path.to_path_buf() };
    let reader = BufReader::new(File::open(&file)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: SeriesPair = serde_json::from_str(&line).map_err(|e| SeriesError::Parse {
            path: file.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if pair.a.len() != pair.p.len() {
            return Err(SeriesError::Parse {
                path: file.display().to_string(),
                line: i + 1,
                message: "a and p lengths differ".into(),
            });
        }
        out.push(pair);
    }
    Ok(out)
}

/// Sums of `a` and `p` across users per bin start date, for trend plots.
pub fn aggregate(pairs: &[SeriesPair]) -> Vec<(NaiveDate, f64, f64)> {
    let mut acc: BTreeMap<NaiveDate, (f64, f64)> = BTreeMap::new();
    for pair in pairs {
        for (d, (a, p)) in pair.dates().into_iter().zip(pair.a.iter().zip(&pair.p)) {
            let e = acc.entry(d).or_default();
            e.0 += a;
            e.1 += p;
        }
    }
    acc.into_iter().map(|(d, (a, p))| (d, a, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAY: i64 = 86_400;
    // 2021-03-01 00:00:00 UTC, a Monday.
    const T0: i64 = 1_614_556_800;

    fn user(posts: &[(i64, &str, Option<Emotion>)]) -> (UserRecord, EmotionMap) {
        let mut u = UserRecord::new("u");
        let mut em = EmotionMap::new();
        for (k, (ts, text, e)) in posts.iter().enumerate() {
            let id = format!("p{k}");
            if let Some(e) = e {
                em.insert(id.clone(), *e);
            }
            u.posts.push(PostRecord::new(id, "u", *ts, *text));
        }
        (u, em)
    }

    fn build(u: &UserRecord, em: &EmotionMap, bin: Bin) -> SeriesPair {
        let opts = SeriesOptions { bin, normalize: false };
        build_series(u, em, ActivityMode::FirstHandOnly, &KeywordSet::default(), opts).unwrap()
    }

    #[test]
    fn same_day_joy_and_yoga() {
        let (u, em) = user(&[(T0 + 10, "so happy", Some(Emotion::Joy)), (T0 + 20, "i did yoga", None)]);
        let s = build(&u, &em, Bin::Day);
        assert_eq!((s.a, s.p), (vec![1.0], vec![1.0]));
    }

    #[test]
    fn gaps_are_zero_filled() {
        let (u, em) = user(&[(T0, "my yoga", None), (T0 + 2 * DAY, "love it", Some(Emotion::Love))]);
        let s = build(&u, &em, Bin::Day);
        assert_eq!(s.a, vec![1.0, 0.0, 0.0]);
        assert_eq!(s.p, vec![0.0, 0.0, 1.0]);
        assert_eq!(s.start, NaiveDate::from_ymd_opt(2021, 3, 1).unwrap());
        assert_eq!(s.end, NaiveDate::from_ymd_opt(2021, 3, 3).unwrap());
    }

    #[test]
    fn week_and_month_bins() {
        let (u, em) = user(&[(T0 + 6 * DAY, "my yoga", None), (T0 + 7 * DAY, "my yoga", None)]);
        let s = build(&u, &em, Bin::Week);
        assert_eq!(s.a, vec![1.0, 1.0]);
        assert_eq!(s.start, NaiveDate::from_ymd_opt(2021, 3, 1).unwrap());
        let (u, em) = user(&[(T0 - DAY, "my yoga", None), (T0 + 40 * DAY, "my yoga", None)]);
        let s = build(&u, &em, Bin::Month);
        assert_eq!(s.a, vec![1.0, 0.0, 1.0]);
        assert_eq!(s.start, NaiveDate::from_ymd_opt(2021, 2, 1).unwrap());
        assert_eq!(s.end, NaiveDate::from_ymd_opt(2021, 4, 1).unwrap());
    }

    #[test]
    fn volume_and_normalize() {
        let posts: Vec<_> = (0..6)
            .map(|k| (T0 + (k / 2) * DAY, if k % 2 == 0 { "my yoga" } else { "coffee" }, Some(Emotion::Joy)))
            .collect();
        let (u, em) = user(&posts);
        let opts = SeriesOptions::default();
        let v = build_volume_series(&u, &em, opts).unwrap();
        assert_eq!(v.a, vec![2.0; 3]);
        assert_eq!(v.p, build(&u, &em, Bin::Day).p);
        let opts = SeriesOptions { normalize: true, ..opts };
        let n = build_series(&u, &em, ActivityMode::AnyYoga, &KeywordSet::default(), opts).unwrap();
        assert_eq!(n.a, vec![0.5; 3]);
        assert_eq!(n.p, vec![1.0; 3]);
        assert_eq!(n.activity_posts, 3);
    }

    #[test]
    fn no_posts_is_error() {
        let (u, em) = user(&[]);
        assert!(build_volume_series(&u, &em, SeriesOptions::default()).is_err());
    }

    #[test]
    fn csv_and_dir_round_trip() {
        let (u, em) = user(&[(T0, "my yoga", None), (T0 + DAY, "yay", Some(Emotion::Joy))]);
        let s = build(&u, &em, Bin::Day);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "date,a,p\n2021-03-01,1,0\n2021-03-02,0,1\n");
        let dir = tempfile::tempdir().unwrap();
        write_series_dir(dir.path(), std::slice::from_ref(&s)).unwrap();
        assert_eq!(read_series(dir.path()).unwrap(), vec![s]);
        assert!(dir.path().join("csv/u.csv").exists());
    }
}
