use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GrangerResult, Verdict};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Users whose null was rejected, kept, or not calculable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub rn: usize,
    pub kn: usize,
    pub nc: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.rn + self.kn + self.nc
    }

    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Reject => self.rn += 1,
            Verdict::Keep => self.kn += 1,
            Verdict::NotCalculable => self.nc += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub feature: String,
    pub headline_lag: usize,
    pub all: Counts,
    pub top_decile: Counts,
    pub n_users: usize,
    pub n_top: usize,
}

/// Top 10% of users by activity (at least one when any exist), ranked by
/// descending activity with ties broken by user id.
pub fn top_decile<'a>(users: &[&'a str], activity: &HashMap<String, u64>) -> Vec<&'a str> {
    let mut ranked = users.to_vec();
    ranked.sort_by(|a, b| {
        let (x, y) = (activity.get(*a).copied().unwrap_or(0), activity.get(*b).copied().unwrap_or(0));
        y.cmp(&x).then(a.cmp(b))
    });
    let n = if ranked.is_empty() { 0 } else { (ranked.len() / 10).max(1) };
    ranked.truncate(n);
    ranked
}

/// Counts verdicts at `headline_lag`, over all users and over the top
/// decile by activity.
pub fn summarize(
    results: &[GrangerResult],
    headline_lag: usize,
    activity: &HashMap<String, u64>,
    feature: &str,
) -> Summary {
    let at_lag: Vec<&GrangerResult> = results.iter().filter(|r| r.lag == headline_lag).collect();
    let mut all = Counts::default();
    for r in &at_lag {
        all.add(r.verdict);
    }
    let users: Vec<&str> = at_lag.iter().map(|r| r.user_id.as_str()).collect();
    let top = top_decile(&users, activity);
    let verdicts: HashMap<&str, Verdict> = at_lag.iter().map(|r| (r.user_id.as_str(), r.verdict)).collect();
    let mut top_decile = Counts::default();
    for u in &top {
        top_decile.add(verdicts[u]);
    }
    Summary {
        feature: feature.to_string(),
        headline_lag,
        all,
        top_decile,
        n_users: at_lag.len(),
        n_top: top.len(),
    }
}

/// Aligned text table with one row per (user group, feature).
pub fn render_table(summaries: &[Summary]) -> String {
    let mut rows: Vec<[String; 5]> = vec![["Users", "Feature", "rn", "kn", "nc"].map(String::from)];
    for (group, pick) in [("All", false), ("Top 10%", true)] {
        for s in summaries {
            let c = if pick { s.top_decile } else { s.all };
            rows.push([
                group.to_string(),
                s.feature.clone(),
                c.rn.to_string(),
                c.kn.to_string(),
                c.nc.to_string(),
            ]);
        }
    }
    let width = |i: usize| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0);
    let w: Vec<usize> = (0..5).map(width).collect();
    let mut out = String::new();
    let lags: Vec<String> = summaries.iter().map(|s| s.headline_lag.to_string()).collect();
    let mut lags_unique = lags.clone();
    lags_unique.dedup();
    out.push_str(&format!("Granger causality, lag = {}\n", lags_unique.join(", ")));
    for r in &rows {
        out.push_str(&format!(
            "{:<w0$}  {:<w1$}  {:>w2$} {:>w3$} {:>w4$}",
            r[0],
            r[1],
            r[2],
            r[3],
            r[4],
            w0 = w[0],
            w1 = w[1],
            w2 = w[2],
            w3 = w[3],
            w4 = w[4]
        ));
        out.push('\n');
    }
    out.push_str("rn: null rejected, kn: null kept, nc: not calculable\n");
    out
}

pub fn write_results_csv<W: Write>(w: W, results: &[GrangerResult]) -> Result<(), ReportError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "lag", "f_stat", "p_value", "verdict", "reason"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in results {
        wtr.write_record([
            r.user_id.clone(),
            r.lag.to_string(),
            opt(r.f_stat),
            opt(r.p_value),
            r.verdict.as_str().to_string(),
            r.reason.clone().unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(r: R) -> Result<Vec<GrangerResult>, ReportError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |message: String| ReportError::Row { row, message };
        if rec.len() != 6 {
            return Err(bad(format!("expected 6 columns, got {}", rec.len())));
        }
        let opt = |s: &str| -> Result<Option<f64>, ReportError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| bad(format!("bad number {s:?}: {e}")))
            }
        };
        out.push(GrangerResult {
            user_id: rec[0].to_string(),
            lag: rec[1].parse().map_err(|e| bad(format!("bad lag {:?}: {e}", &rec[1])))?,
            f_stat: opt(&rec[2])?,
            p_value: opt(&rec[3])?,
            verdict: Verdict::parse(&rec[4]).ok_or_else(|| bad(format!("bad verdict {:?}", &rec[4])))?,
            reason: (!rec[5].is_empty()).then(|| rec[5].to_string()),
        });
    }
    Ok(out)
}

/// `user_id,activity` rows, sorted by user id.
pub fn write_activity_csv<W: Write>(w: W, activity: &HashMap<String, u64>) -> Result<(), ReportError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "activity"])?;
    let mut rows: Vec<_> = activity.iter().collect();
    rows.sort();
    for (u, n) in rows {
        wtr.write_record([u.as_str(), &n.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_activity_csv<R: Read>(r: R) -> Result<HashMap<String, u64>, ReportError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let n = rec.get(1).unwrap_or("").parse().map_err(|e| ReportError::Row {
            row: i + 2,
            message: format!("bad activity count: {e}"),
        })?;
        out.insert(rec.get(0).unwrap_or("").to_string(), n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(user: &str, lag: usize, verdict: Verdict) -> GrangerResult {
        GrangerResult {
            user_id: user.into(),
            lag,
            f_stat: (verdict != Verdict::NotCalculable).then_some(1.5),
            p_value: (verdict != Verdict::NotCalculable).then_some(0.25),
            verdict,
            reason: (verdict == Verdict::NotCalculable).then(|| "constant series".into()),
        }
    }

    #[test]
    fn counts_at_headline_lag_only() {
        let rs = vec![
            result("a", 5, Verdict::Reject),
            result("a", 1, Verdict::Keep),
            result("b", 5, Verdict::NotCalculable),
            result("c", 5, Verdict::Keep),
        ];
        let s = summarize(&rs, 5, &HashMap::new(), "y + h");
        assert_eq!(s.all, Counts { rn: 1, kn: 1, nc: 1 });
        assert_eq!(s.n_top, 1);
        // Equal activity: tie broken toward the smallest id.
        assert_eq!(s.top_decile, Counts { rn: 1, kn: 0, nc: 0 });
    }

    #[test]
    fn top_decile_ranks_by_activity() {
        let users: Vec<String> = (0..25).map(|i| format!("u{i:02}")).collect();
        let refs: Vec<&str> = users.iter().map(String::as_str).collect();
        let activity: HashMap<String, u64> = users.iter().enumerate().map(|(i, u)| (u.clone(), (i % 7) as u64)).collect();
        assert_eq!(top_decile(&refs, &activity), vec!["u06", "u13"]);
        assert!(top_decile(&[], &activity).is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let rs = vec![result("x,1", 2, Verdict::Keep), result("y", 3, Verdict::NotCalculable)];
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &rs).unwrap();
        assert!(buf.starts_with(b"user_id,lag,f_stat,p_value,verdict,reason\n"));
        assert_eq!(read_results_csv(&buf[..]).unwrap(), rs);
        assert!(read_results_csv(&b"user_id,lag,f_stat,p_value,verdict,reason\nu,1,,,maybe,\n"[..]).is_err());
    }

    #[test]
    fn all_not_calculable() {
        let rs: Vec<_> = (0..4).map(|i| result(&format!("u{i}"), 5, Verdict::NotCalculable)).collect();
        let s = summarize(&rs, 5, &HashMap::new(), "f");
        assert_eq!((s.all.rn, s.all.kn, s.all.nc), (0, 0, 4));
    }
}
