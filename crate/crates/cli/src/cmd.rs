use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use affectlag_core::config::PipelineConfig;
use affectlag_core::corpus::{
    ingest_twitter_export, load_jsonl, save_jsonl, split, split_indices, Corpus, Emotion, IngestOptions, UserType,
};
use affectlag_core::embed::{embed_graph, EmbeddingTable};
use affectlag_core::graph::{build_mention_graph, MentionGraph};
use affectlag_core::granger::{
    batch_test, read_activity_csv, read_results_csv, render_table, summarize, write_activity_csv,
    write_results_csv, GrangerOptions, Summary, TestKind, Verdict,
};
use affectlag_core::models::{
    self, argmax, classify_users as classify_all_users, emotion_examples, read_emotion_predictions,
    train_word_table, transfer_classify_emotion, write_emotion_predictions, EmotionModel, EmotionPrediction,
    GruModel, History, UserPrediction, YunModel, NO_EMOTION,
};
use affectlag_core::series::{
    aggregate, build_series, build_volume_series, gold_emotions, read_series, write_series_dir, Bin, EmotionMap,
    SeriesError, SeriesOptions, SeriesPair,
};
use affectlag_core::synth::generate;
use affectlag_core::textproc::ActivityMode;
use affectlag_neural::Checkpoint;
use serde::{Deserialize, Serialize};

use crate::{svg, BinArg, Context, EmotionArch, Failure, ModeArg, Result, TestArg, TestArgs, TypeArg};

pub const RESULTS_CSV: &str = "results.csv";
pub const ACTIVITY_CSV: &str = "activity.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TXT: &str = "summary.txt";
/// Written next to the series by `series build`.
pub const SERIES_META: &str = "meta.json";

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig> {
    let cfg = match path {
        Some(p) => PipelineConfig::load(p).data("config")?,
        None => PipelineConfig::default(),
    };
    Ok(match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    load_jsonl(path).data(path.display())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).data(dir.display())?;
    }
    Ok(BufWriter::new(File::create(path).data(path.display())?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).data(path.display())?;
    w.write_all(b"\n").data(path.display())?;
    w.flush().data(path.display())
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for r in rows {
        serde_json::to_writer(&mut w, r).data(path.display())?;
        w.write_all(b"\n").data(path.display())?;
    }
    w.flush().data(path.display())
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path).data(path.display())
}

fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).data(dir.display())?;
    }
    ckpt.save(path).data(path.display())
}

fn write_history(h: &History, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        h.write_csv(create(p)?).data(p.display())?;
    }
    let b = h.best();
    println!(
        "epochs {}, best epoch {}: valid loss {:.4}, valid acc {:.4}, valid macro-F1 {:.4}, max train acc {:.4}",
        h.epochs.len() - 1,
        h.best_epoch,
        b.valid_loss,
        b.valid_acc,
        b.valid_macro_f1,
        h.max_train_acc()
    );
    Ok(())
}

/// `gold` reads the corpus labels; anything else is a predictions file.
fn load_emotions(spec: &str, corpus: &Corpus) -> Result<EmotionMap> {
    if spec == "gold" {
        return Ok(gold_emotions(corpus));
    }
    let f = File::open(spec).data(spec)?;
    read_emotion_predictions(BufReader::new(f)).data(spec)
}

pub fn config_init(out: &Path, desk: bool) -> Result<()> {
    let cfg = if desk { PipelineConfig::desk() } else { PipelineConfig::default() };
    write_json(out, &cfg)
}

pub fn ingest(input: &Path, out: &Path, drop_retweets: bool) -> Result<()> {
    let f = File::open(input).data(input.display())?;
    let corpus = ingest_twitter_export(BufReader::new(f), IngestOptions { drop_retweets }, input.display().to_string())
        .data(input.display())?;
    save_jsonl(&corpus, out).data(out.display())?;
    println!("{} users, {} posts", corpus.len(), corpus.n_posts());
    Ok(())
}

pub fn validate(path: &Path) -> Result<()> {
    let c = load_corpus(path)?;
    let typed = c.users.iter().filter(|u| u.user_type_label.is_some()).count();
    let emo = c.posts().filter(|p| p.emotion_label.is_some()).count();
    println!(
        "ok: {} users ({typed} with user type), {} posts ({emo} with emotion)",
        c.len(),
        c.n_posts()
    );
    Ok(())
}

pub fn synth(config: &Path, out_corpus: &Path, out_manifest: &Path, seed: Option<u64>) -> Result<()> {
    let cfg = load_config(Some(config), seed)?;
    let (corpus, manifest) = generate(&cfg.synth).data("synth")?;
    if let Some(dir) = out_corpus.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).data(dir.display())?;
    }
    save_jsonl(&corpus, out_corpus).data(out_corpus.display())?;
    write_json(out_manifest, &manifest)?;
    let causal = manifest.values().filter(|m| m.causal).count();
    println!("{} users, {} posts, {causal} planted links", corpus.len(), corpus.n_posts());
    Ok(())
}

pub fn graph_build(
    corpus: &Path,
    out: &Path,
    config: Option<&Path>,
    all_posts: bool,
    edge_list: Option<&Path>,
) -> Result<()> {
    let cfg = load_config(config, None)?;
    let c = load_corpus(corpus)?;
    let restrict = cfg.graph.restrict_to_activity_posts && !all_posts;
    let g = build_mention_graph(&c, restrict, &cfg.keywords);
    g.check_invariants().map_err(|e| Failure::Internal(e.to_string()))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).data(dir.display())?;
    }
    g.save_json(out).data(out.display())?;
    if let Some(p) = edge_list {
        let mut w = create(p)?;
        g.write_edge_list(&mut w).data(p.display())?;
        w.flush().data(p.display())?;
    }
    println!("{} nodes, {} edges", g.n_nodes, g.n_edges);
    Ok(())
}

fn save_table(table: &EmbeddingTable, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).data(dir.display())?;
    }
    table.save(out).data(out.display())?;
    println!("{} vectors of dim {}", table.len(), table.dim());
    Ok(())
}

pub fn embed_nodes(graph: &Path, out: &Path, config: Option<&Path>, seed: Option<u64>) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let g = MentionGraph::load_json(graph).data(graph.display())?;
    let sg = embed_graph(&g, &cfg.node_embedding).data("node embedding")?;
    save_table(&sg.table, out)
}

pub fn embed_words(corpus: &Path, out: &Path, config: Option<&Path>, seed: Option<u64>) -> Result<()> {
    let cfg = load_config(config, seed)?;
    let c = load_corpus(corpus)?;
    let table = train_word_table(&c, &cfg.word_embedding).data("word embedding")?;
    save_table(&table, out)
}

fn load_table(path: &Path) -> Result<EmbeddingTable> {
    EmbeddingTable::load(path).data(path.display())
}

pub fn train_user_model(
    corpus: &Path,
    config: &Path,
    ckpt: &Path,
    words: &Path,
    nodes: Option<&Path>,
    history: Option<&Path>,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = load_config(Some(config), seed)?;
    let c = load_corpus(corpus)?;
    let (train, valid, test) = split(&c, &cfg.split).data("split")?;
    let words = load_table(words)?;
    let nodes = nodes.map(load_table).transpose()?;
    let (model, h) =
        models::train_yun(&train, &valid, words, nodes, cfg.keywords.clone(), &cfg.yun).data("train user model")?;
    write_history(&h, history)?;
    if !test.is_empty() {
        let preds = classify_all_users(&test, &model).data("test split")?;
        let (mut pred, mut gold) = (Vec::new(), Vec::new());
        for (u, p) in test.users.iter().zip(&preds) {
            if let Some(t) = u.user_type_label {
                gold.push(t.index());
                pred.push(p.label.index());
            }
        }
        if !gold.is_empty() {
            println!(
                "test acc {:.4}, test macro-F1 {:.4} on {} users",
                models::accuracy(&pred, &gold),
                models::macro_f1(&pred, &gold, 3),
                gold.len()
            );
        }
    }
    save_checkpoint(&model.to_checkpoint(), ckpt)
}

pub fn train_emotion(
    source: &Path,
    config: &Path,
    ckpt: &Path,
    words: Option<&Path>,
    arch: EmotionArch,
    history: Option<&Path>,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = load_config(Some(config), seed)?;
    let c = load_corpus(source)?;
    let examples = emotion_examples(&c);
    let (tr, va, _) = split_indices(examples.len(), &cfg.split).data("split")?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| examples[i].clone()).collect::<Vec<_>>();
    let (train, valid) = (pick(&tr), pick(&va));
    let checkpoint = match arch {
        EmotionArch::Bilstm => {
            let words = words.ok_or_else(|| Failure::Data("--words is required for --model bilstm".into()))?;
            let (model, h) =
                models::train_emotion(&train, &valid, load_table(words)?, &cfg.emotion).data("train emotion")?;
            write_history(&h, history)?;
            model.to_checkpoint()
        }
        EmotionArch::Gru => {
            let (model, h) = models::train_gru_baseline(&train, &valid, &cfg.gru).data("train gru")?;
            write_history(&h, history)?;
            model.to_checkpoint()
        }
    };
    save_checkpoint(&checkpoint, ckpt)
}

pub fn classify_users(corpus: &Path, ckpt: &Path, out: &Path) -> Result<()> {
    let c = load_corpus(corpus)?;
    let model = YunModel::from_checkpoint(&load_checkpoint(ckpt)?).data(ckpt.display())?;
    let preds = classify_all_users(&c, &model).data("classify users")?;
    write_jsonl(out, &preds)?;
    for t in UserType::ALL {
        let n = preds.iter().filter(|p| p.label == t).count();
        println!("{}: {n}", t.as_str());
    }
    Ok(())
}

fn gru_classify(corpus: &Corpus, model: &GruModel, threshold: f64) -> Result<Vec<EmotionPrediction>> {
    corpus
        .posts()
        .map(|p| {
            let probs = model.predict(&p.text).data(&p.post_id)?;
            let k = argmax(&probs);
            let label = if probs[k] < threshold { NO_EMOTION.to_string() } else { Emotion::ALL[k].as_str().to_string() };
            Ok(EmotionPrediction { post_id: p.post_id.clone(), user_id: p.user_id.clone(), label, probs })
        })
        .collect()
}

pub fn classify_emotion(corpus: &Path, ckpt: &Path, out: &Path, ne_threshold: Option<f64>) -> Result<()> {
    if let Some(t) = ne_threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(Failure::Data(format!("--ne-threshold {t} not in [0, 1]")));
        }
    }
    let c = load_corpus(corpus)?;
    let ck = load_checkpoint(ckpt)?;
    let preds = match ck.kind.as_str() {
        models::emotion::KIND => {
            let model = EmotionModel::from_checkpoint(&ck).data(ckpt.display())?;
            let t = ne_threshold.unwrap_or(model.cfg.ne_threshold);
            transfer_classify_emotion(&c, &model, t).data("classify emotion")?
        }
        models::gru::KIND => {
            let model = GruModel::from_checkpoint(&ck).data(ckpt.display())?;
            gru_classify(&c, &model, ne_threshold.unwrap_or(0.0))?
        }
        other => return Err(Failure::Data(format!("{}: not an emotion checkpoint (kind {other:?})", ckpt.display()))),
    };
    let mut w = create(out)?;
    write_emotion_predictions(&mut w, &preds).data(out.display())?;
    let none = preds.iter().filter(|p| p.label == NO_EMOTION).count();
    println!("{} posts, {none} without emotion", preds.len());
    Ok(())
}

pub struct SeriesFlags {
    pub mode: Option<ModeArg>,
    pub bin: Option<BinArg>,
    pub normalize: bool,
}

#[derive(Serialize, Deserialize)]
pub struct SeriesMeta {
    pub mode: ActivityMode,
    pub feature: String,
    pub bin: Bin,
    pub normalize: bool,
    pub n_users: usize,
}

fn read_user_types(path: &Path, keep: UserType) -> Result<HashSet<String>> {
    let f = File::open(path).data(path.display())?;
    let mut out = HashSet::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.data(path.display())?;
        if line.trim().is_empty() {
            continue;
        }
        let p: UserPrediction = serde_json::from_str(&line).data(format!("{} line {}", path.display(), i + 1))?;
        if p.label == keep {
            out.insert(p.user_id);
        }
    }
    Ok(out)
}

/// Series for every user with at least one post. Users without posts are
/// skipped and counted.
fn per_user(
    corpus: &Corpus,
    keep: Option<&HashSet<String>>,
    build: impl Fn(&affectlag_core::corpus::UserRecord) -> std::result::Result<SeriesPair, SeriesError>,
) -> Result<Vec<SeriesPair>> {
    let mut pairs = Vec::new();
    let mut empty = 0;
    for u in &corpus.users {
        if keep.is_some_and(|k| !k.contains(&u.user_id)) {
            continue;
        }
        if u.posts.is_empty() {
            empty += 1;
            continue;
        }
        pairs.push(build(u).data(&u.user_id)?);
    }
    if empty > 0 {
        eprintln!("note: skipped {empty} users without posts");
    }
    Ok(pairs)
}

pub fn series_build(
    corpus: &Path,
    emotions: &str,
    out_dir: &Path,
    config: Option<&Path>,
    flags: SeriesFlags,
    filter: Option<(&Path, TypeArg)>,
) -> Result<()> {
    let cfg = load_config(config, None)?;
    let c = load_corpus(corpus)?;
    let em = load_emotions(emotions, &c)?;
    let mode = match flags.mode {
        Some(ModeArg::Any) => ActivityMode::AnyYoga,
        Some(ModeArg::Firsthand) => ActivityMode::FirstHandOnly,
        None => cfg.series.mode,
    };
    let bin = match flags.bin {
        Some(BinArg::Day) => Bin::Day,
        Some(BinArg::Week) => Bin::Week,
        Some(BinArg::Month) => Bin::Month,
        None => cfg.series.bin,
    };
    let opts = SeriesOptions { bin, normalize: flags.normalize || cfg.series.normalize };
    let keep = match filter {
        Some((path, t)) => {
            let t = match t {
                TypeArg::Practitioner => UserType::Practitioner,
                TypeArg::Promotional => UserType::Promotional,
                TypeArg::Other => UserType::Other,
            };
            Some(read_user_types(path, t)?)
        }
        None => None,
    };
    let pairs = per_user(&c, keep.as_ref(), |u| build_series(u, &em, mode, &cfg.keywords, opts))?;
    write_series_dir(out_dir, &pairs).data(out_dir.display())?;
    let meta = SeriesMeta {
        mode,
        feature: mode.feature_label().to_string(),
        bin,
        normalize: opts.normalize,
        n_users: pairs.len(),
    };
    write_json(&out_dir.join(SERIES_META), &meta)?;
    println!("{} series", pairs.len());
    Ok(())
}

/// `1..5` (inclusive), `1,3,5` or a single lag.
pub fn parse_lags(s: &str) -> Result<Vec<usize>> {
    let bad = || Failure::Data(format!("--lags {s:?}: expected e.g. 1..5 or 1,2,5"));
    let lags: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if lags.is_empty() || lags.contains(&0) {
        return Err(bad());
    }
    Ok(lags)
}

struct TestPlan {
    lags: Vec<usize>,
    headline_lag: usize,
    opts: GrangerOptions,
}

fn test_plan(args: &TestArgs) -> Result<TestPlan> {
    let cfg = load_config(args.config.config.as_deref(), None)?;
    let g = cfg.granger;
    let lags = match &args.lags {
        Some(s) => parse_lags(s)?,
        None => g.lags,
    };
    let headline_lag = args.headline_lag.unwrap_or(g.headline_lag);
    if !lags.contains(&headline_lag) {
        return Err(Failure::Data(format!("headline lag {headline_lag} is not among the lags {lags:?}")));
    }
    let alpha = args.alpha.unwrap_or(g.alpha);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Failure::Data(format!("--alpha {alpha} not in (0, 1)")));
    }
    let test = match args.test {
        Some(TestArg::F) => TestKind::F,
        Some(TestArg::Chi2) => TestKind::Chi2,
        None => g.test,
    };
    Ok(TestPlan {
        lags,
        headline_lag,
        opts: GrangerOptions { alpha, test, bonferroni: args.bonferroni || g.bonferroni },
    })
}

fn write_run(out_dir: &Path, pairs: &[SeriesPair], plan: &TestPlan, feature: &str) -> Result<Summary> {
    fs::create_dir_all(out_dir).data(out_dir.display())?;
    let results = batch_test(pairs, &plan.lags, &plan.opts);
    let activity: HashMap<String, u64> = pairs.iter().map(|p| (p.user_id.clone(), p.activity_posts)).collect();
    let p = out_dir.join(RESULTS_CSV);
    write_results_csv(create(&p)?, &results).data(p.display())?;
    let p = out_dir.join(ACTIVITY_CSV);
    write_activity_csv(create(&p)?, &activity).data(p.display())?;
    let summary = summarize(&results, plan.headline_lag, &activity, feature);
    write_json(&out_dir.join(SUMMARY_JSON), &summary)?;
    let table = render_table(std::slice::from_ref(&summary));
    let p = out_dir.join(SUMMARY_TXT);
    fs::write(&p, &table).data(p.display())?;
    print!("{table}");
    let rejected = results.iter().filter(|r| r.verdict == Verdict::Reject).count();
    println!(
        "rejected {rejected} of {} tests across lags {:?} (alpha {})",
        results.len(),
        plan.lags,
        plan.opts.alpha
    );
    Ok(summary)
}

pub fn granger_run(series_dir: &Path, out_dir: &Path, args: &TestArgs, feature: Option<&str>) -> Result<()> {
    let plan = test_plan(args)?;
    let pairs = read_series(series_dir).data(series_dir.display())?;
    if pairs.is_empty() {
        return Err(Failure::Data(format!("{}: no series", series_dir.display())));
    }
    let feature = match feature {
        Some(f) => f.to_string(),
        None => {
            let meta = series_dir.join(SERIES_META);
            match fs::read_to_string(&meta) {
                Ok(text) => serde_json::from_str::<SeriesMeta>(&text).data(meta.display())?.feature,
                Err(_) => ActivityMode::FirstHandOnly.feature_label().to_string(),
            }
        }
    };
    write_run(out_dir, &pairs, &plan, &feature).map(|_| ())
}

pub fn granger_control(corpus: &Path, emotions: &str, out_dir: &Path, args: &TestArgs) -> Result<()> {
    let plan = test_plan(args)?;
    let c = load_corpus(corpus)?;
    let em = load_emotions(emotions, &c)?;
    let pairs = per_user(&c, None, |u| build_volume_series(u, &em, SeriesOptions::default()))?;
    if pairs.is_empty() {
        return Err(Failure::Data(format!("{}: no users with posts", corpus.display())));
    }
    write_run(out_dir, &pairs, &plan, "volume + h").map(|_| ())
}

/// Recounts every run from its results and activity files; the stored
/// summary supplies only the feature label and headline lag.
pub fn report(runs: &[std::path::PathBuf], out: &Path) -> Result<()> {
    let mut summaries = Vec::new();
    for dir in runs {
        let sp = dir.join(SUMMARY_JSON);
        let text = fs::read_to_string(&sp).data(sp.display())?;
        let stored: Summary = serde_json::from_str(&text).data(sp.display())?;
        let rp = dir.join(RESULTS_CSV);
        let results = read_results_csv(File::open(&rp).data(rp.display())?).data(rp.display())?;
        let ap = dir.join(ACTIVITY_CSV);
        let activity = read_activity_csv(File::open(&ap).data(ap.display())?).data(ap.display())?;
        let s = summarize(&results, stored.headline_lag, &activity, &stored.feature);
        if s.n_users == 0 {
            return Err(Failure::Data(format!("{}: no results at lag {}", rp.display(), stored.headline_lag)));
        }
        summaries.push(s);
    }
    let table = render_table(&summaries);
    if out.extension().is_some_and(|e| e == "json") {
        write_json(out, &summaries)?;
    } else {
        let mut w = create(out)?;
        w.write_all(table.as_bytes()).data(out.display())?;
        w.flush().data(out.display())?;
    }
    print!("{table}");
    Ok(())
}

pub fn plotdata(series: &Path, out: &Path, svg_out: Option<&Path>) -> Result<()> {
    let pairs = read_series(series).data(series.display())?;
    let rows = aggregate(&pairs);
    if rows.is_empty() {
        return Err(Failure::Data(format!("{}: no series", series.display())));
    }
    let mut w = create(out)?;
    let mut body = String::from("date,activity,happiness\n");
    for (d, a, p) in &rows {
        body.push_str(&format!("{},{a},{p}\n", d.format("%Y-%m-%d")));
    }
    w.write_all(body.as_bytes()).data(out.display())?;
    w.flush().data(out.display())?;
    if let Some(path) = svg_out {
        let a: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let p: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let first = rows[0].0.format("%Y-%m-%d").to_string();
        let last = rows[rows.len() - 1].0.format("%Y-%m-%d").to_string();
        let chart = svg::line_chart(&[("activity", &a, "#1f77b4"), ("happiness", &p, "#d62728")], &first, &last);
        fs::write(path, chart).data(path.display())?;
    }
    println!("{} bins over {} users", rows.len(), pairs.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_specs() {
        assert_eq!(parse_lags("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_lags("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_lags("1, 3,5").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_lags("5").unwrap(), vec![5]);
        for bad in ["", "0", "0..2", "3..1", "a..b", "1,,2"] {
            assert!(parse_lags(bad).is_err(), "{bad}");
        }
    }
}
