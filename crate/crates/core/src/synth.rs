//! Synthetic corpora with planted user types, emotions and lagged
//! activity → happiness links.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Emotion, PostRecord, UserRecord, UserType};

const DAY: i64 = 86_400;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible config: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Corpus(#[from] crate::corpus::CorpusError),
}

/// Poisson means per user per day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaseRates {
    /// Activity posts (type-coded yoga posts).
    pub activity: f64,
    /// Joy/love posts, before any planted coupling.
    pub happiness: f64,
    /// Posts with other emotions or none.
    pub background: f64,
}

impl Default for BaseRates {
    fn default() -> Self {
        Self { activity: 1.0, happiness: 1.0, background: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_users: usize,
    pub frac_practitioner: f64,
    pub frac_promotional: f64,
    pub frac_other: f64,
    /// Fraction of practitioners whose happiness depends on past activity.
    pub frac_causal: f64,
    pub causal_lag: usize,
    pub causal_beta: f64,
    pub days: usize,
    pub base_rates: BaseRates,
    /// Probability that an activity post mentions a same-type user.
    pub mention_prob: f64,
    /// Share of background posts that carry no emotion label.
    pub neutral_frac: f64,
    /// UTC epoch seconds of day 0.
    pub start_timestamp: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 200,
            frac_practitioner: 0.6,
            frac_promotional: 0.2,
            frac_other: 0.2,
            frac_causal: 0.6,
            causal_lag: 2,
            causal_beta: 0.8,
            days: 365,
            base_rates: BaseRates::default(),
            mention_prob: 0.2,
            neutral_frac: 0.5,
            // 2019-01-01T00:00:00Z
            start_timestamp: 1_546_300_800,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Infeasible(m));
        let fracs = [
            ("frac_practitioner", self.frac_practitioner),
            ("frac_promotional", self.frac_promotional),
            ("frac_other", self.frac_other),
            ("frac_causal", self.frac_causal),
            ("mention_prob", self.mention_prob),
            ("neutral_frac", self.neutral_frac),
        ];
        for (name, f) in fracs {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("{name} = {f} not in [0, 1]"));
            }
        }
        let sum = self.frac_practitioner + self.frac_promotional + self.frac_other;
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("type fractions sum to {sum}, not 1"));
        }
        if self.causal_lag == 0 {
            return bad("causal_lag must be >= 1".into());
        }
        if self.days == 0 {
            return bad("days must be >= 1".into());
        }
        if self.start_timestamp <= 0 {
            return bad("start_timestamp must be > 0".into());
        }
        let r = &self.base_rates;
        for (name, v) in [
            ("causal_beta", self.causal_beta),
            ("base_rates.activity", r.activity),
            ("base_rates.happiness", r.happiness),
            ("base_rates.background", r.background),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// (practitioners, promotional, other, causal practitioners).
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let n = self.n_users as f64;
        let prac = (n * self.frac_practitioner).round() as usize;
        let promo = ((n * self.frac_promotional).round() as usize).min(self.n_users - prac);
        let other = self.n_users - prac - promo;
        let causal = (prac as f64 * self.frac_causal).round() as usize;
        (prac, promo, other, causal)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(rename = "type")]
    pub user_type: UserType,
    pub causal: bool,
    pub lag: Option<usize>,
    pub beta: Option<f64>,
}

pub type Manifest = BTreeMap<String, ManifestEntry>;

const YOGA_WORDS: &[&str] = &["yoga", "#yoga", "#yogalife", "#yogapractice", "#yogaeveryday", "yoga flow"];
const PRACTICE_TEMPLATES: &[&str] = &[
    "i did {y} this morning",
    "my {y} session before work",
    "we finished {y} at the park",
    "i'm on the mat for {y} again",
    "just rolled out my mat for {y}",
    "our {y} class ran long tonight",
    "i practiced {y} for an hour",
    "me and my {y} routine",
];
const PROMO_TEMPLATES: &[&str] = &[
    "new {y} classes open for booking",
    "{y} retreat deals this weekend",
    "studio offers discounts on {y} mats",
    "limited spots for {y} workshops",
    "memberships include unlimited {y} sessions",
    "book {y} teacher trainings today",
];
const OTHER_TEMPLATES: &[&str] = &[
    "she says {y} helps her sleep",
    "he thinks {y} is overrated",
    "the article says {y} is popular",
    "his sister does {y} every week",
    "people say {y} is trendy",
    "this study says {y} lowers stress",
];
const EMOTION_BANKS: [&[&str]; 6] = [
    &[
        "feeling so happy today",
        "what a wonderful sunny day",
        "so glad and cheerful right now",
        "great news made me smile",
        "delighted with how today went",
    ],
    &[
        "love my family so much",
        "grateful for my sweet partner",
        "adore these lovely friends",
        "my heart is full of love",
        "cherish every moment with you",
    ],
    &[
        "feeling sad and lonely tonight",
        "miss them so much it hurts",
        "such a gloomy depressing week",
        "heartbroken about the news",
    ],
    &[
        "so angry about this traffic",
        "furious with the landlord again",
        "this delay makes me mad",
        "annoyed and irritated all day",
    ],
    &[
        "scared about the exam tomorrow",
        "nervous and afraid of the dark",
        "terrified of the storm outside",
        "worried sick about the results",
    ],
    &[
        "wow did not expect that",
        "shocked by the surprise party",
        "unexpected twist today",
        "cannot believe what just happened",
    ],
];
const NEUTRAL_TEMPLATES: &[&str] = &[
    "bus schedule changed again",
    "reading the news at lunch",
    "meeting moved to thursday",
    "new phone arrives next week",
    "weather report says cloudy",
];
const DESCRIPTIONS: [&[&str]; 3] = [
    &[
        "i practice yoga daily and love running",
        "yogi, mom and coffee fan",
        "on the mat every morning",
        "",
    ],
    &[
        "studio offering classes retreats and workshops",
        "book your yoga teacher training with us",
        "official account of a wellness brand",
    ],
    &[
        "news and lifestyle writer",
        "tech reviewer and gamer",
        "sports fan and dad",
        "",
    ],
];
const LOCATIONS: &[&str] = &["london", "paris", "mumbai", "toronto", "sydney", "berlin", "bali", ""];

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    template.replace("{y}", YOGA_WORDS.choose(rng).expect("non-empty"))
}

fn poisson(lambda: f64, rng: &mut ChaCha8Rng) -> u64 {
    if lambda <= 0.0 {
        0
    } else {
        Poisson::new(lambda).expect("positive rate").sample(rng) as u64
    }
}

/// Generates a corpus and its ground-truth manifest. The output is a pure
/// function of the config.
pub fn generate(cfg: &SynthConfig) -> Result<(Corpus, Manifest), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (prac, promo, _, causal) = cfg.counts();
    let mut types: Vec<UserType> = (0..cfg.n_users)
        .map(|i| {
            if i < prac {
                UserType::Practitioner
            } else if i < prac + promo {
                UserType::Promotional
            } else {
                UserType::Other
            }
        })
        .collect();
    types.shuffle(&mut rng);
    let width = cfg.n_users.max(1).to_string().len();
    let ids: Vec<String> = (0..cfg.n_users).map(|i| format!("u{i:0width$}")).collect();
    let practitioners: Vec<usize> = (0..cfg.n_users).filter(|&i| types[i] == UserType::Practitioner).collect();
    let mut causal_set = practitioners.clone();
    causal_set.shuffle(&mut rng);
    causal_set.truncate(causal);
    let mut is_causal = vec![false; cfg.n_users];
    for &i in &causal_set {
        is_causal[i] = true;
    }
    let by_type: BTreeMap<UserType, Vec<usize>> = UserType::ALL
        .iter()
        .map(|&t| (t, (0..cfg.n_users).filter(|&i| types[i] == t).collect()))
        .collect();

    let mut users = Vec::with_capacity(cfg.n_users);
    let mut manifest = Manifest::new();
    for i in 0..cfg.n_users {
        let t = types[i];
        let mut user = UserRecord::new(ids[i].clone());
        user.handle = format!("handle_{}", ids[i]);
        user.description = DESCRIPTIONS[t.index()].choose(&mut rng).unwrap().to_string();
        user.location = LOCATIONS.choose(&mut rng).unwrap().to_string();
        user.user_type_label = Some(t);
        let templates = match t {
            UserType::Practitioner => PRACTICE_TEMPLATES,
            UserType::Promotional => PROMO_TEMPLATES,
            UserType::Other => OTHER_TEMPLATES,
        };
        let peers: Vec<usize> = by_type[&t].iter().copied().filter(|&j| j != i).collect();

        let activity: Vec<u64> = (0..cfg.days).map(|_| poisson(cfg.base_rates.activity, &mut rng)).collect();
        let mut posts: Vec<(i64, String, Option<Emotion>, Vec<String>)> = Vec::new();
        for day in 0..cfg.days {
            let day_start = cfg.start_timestamp + day as i64 * DAY;
            let stamp = |rng: &mut ChaCha8Rng| day_start + rng.random_range(0..DAY);
            for _ in 0..activity[day] {
                let text = fill(templates.choose(&mut rng).unwrap(), &mut rng);
                let mentions = if !peers.is_empty() && rng.random::<f64>() < cfg.mention_prob {
                    vec![ids[*peers.choose(&mut rng).unwrap()].clone()]
                } else {
                    Vec::new()
                };
                posts.push((stamp(&mut rng), text, None, mentions));
            }
            let mut lambda_p = cfg.base_rates.happiness;
            if is_causal[i] && day >= cfg.causal_lag {
                lambda_p += cfg.causal_beta * activity[day - cfg.causal_lag] as f64;
            }
            for _ in 0..poisson(lambda_p, &mut rng) {
                let e = if rng.random::<bool>() { Emotion::Joy } else { Emotion::Love };
                let text = EMOTION_BANKS[e.index()].choose(&mut rng).unwrap().to_string();
                posts.push((stamp(&mut rng), text, Some(e), Vec::new()));
            }
            for _ in 0..poisson(cfg.base_rates.background, &mut rng) {
                if rng.random::<f64>() < cfg.neutral_frac {
                    let text = NEUTRAL_TEMPLATES.choose(&mut rng).unwrap().to_string();
                    posts.push((stamp(&mut rng), text, None, Vec::new()));
                } else {
                    let e = Emotion::ALL[rng.random_range(2..6)];
                    let text = EMOTION_BANKS[e.index()].choose(&mut rng).unwrap().to_string();
                    posts.push((stamp(&mut rng), text, Some(e), Vec::new()));
                }
            }
        }
        posts.sort_by_key(|p| p.0);
        for (k, (ts, text, emotion, mentions)) in posts.into_iter().enumerate() {
            let mut post = PostRecord::new(format!("{}-{k:05}", ids[i]), ids[i].clone(), ts, text);
            post.emotion_label = emotion;
            post.mentions = mentions;
            user.posts.push(post);
        }
        manifest.insert(
            ids[i].clone(),
            ManifestEntry {
                user_type: t,
                causal: is_causal[i],
                lag: is_causal[i].then_some(cfg.causal_lag),
                beta: is_causal[i].then_some(cfg.causal_beta),
            },
        );
        users.push(user);
    }
    let corpus = Corpus::new(users, format!("synth seed={}", cfg.seed))?;
    Ok((corpus, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{
        analyze_post, classify_activity, detect_first_person_explicit, tokenize, ActivityMode,
        KeywordSet,
    };

    fn small() -> SynthConfig {
        SynthConfig { n_users: 20, days: 30, seed: 3, ..Default::default() }
    }

    #[test]
    fn counts_and_manifest_agree() {
        let (c, m) = generate(&small()).unwrap();
        assert_eq!(c.len(), 20);
        assert_eq!(m.len(), 20);
        let n_type = |t| m.values().filter(|e| e.user_type == t).count();
        assert_eq!((n_type(UserType::Practitioner), n_type(UserType::Promotional), n_type(UserType::Other)), (12, 4, 4));
        assert_eq!(m.values().filter(|e| e.causal).count(), 7);
        assert!(m.values().filter(|e| e.causal).all(|e| e.user_type == UserType::Practitioner));
        for u in &c.users {
            assert_eq!(u.user_type_label, Some(m[&u.user_id].user_type));
        }
    }

    #[test]
    fn zero_causal_fraction() {
        let cfg = SynthConfig { frac_causal: 0.0, ..small() };
        let (_, m) = generate(&cfg).unwrap();
        assert!(m.values().all(|e| !e.causal && e.lag.is_none()));
    }

    #[test]
    fn deterministic() {
        let (a, ma) = generate(&small()).unwrap();
        let (b, mb) = generate(&small()).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_to(&mut x).unwrap();
        b.write_to(&mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(ma, mb);
    }

    #[test]
    fn templates_have_intended_rule_outcomes() {
        let ks = KeywordSet::default();
        let (c, _) = generate(&small()).unwrap();
        for u in &c.users {
            for p in &u.posts {
                let a = analyze_post(p, &ks);
                match (u.user_type_label.unwrap(), a.is_yoga) {
                    (UserType::Practitioner, true) => {
                        assert!(detect_first_person_explicit(&tokenize(&p.text), &ks), "{}", p.text)
                    }
                    (_, true) => {
                        assert!(!classify_activity(p, &ks, ActivityMode::FirstHandOnly), "{}", p.text)
                    }
                    (_, false) => assert!(p.mentions.is_empty()),
                }
                assert_eq!(a.is_yoga, p.emotion_label.is_none() && !NEUTRAL_TEMPLATES.contains(&p.text.as_str()));
            }
        }
    }

    #[test]
    fn infeasible_configs() {
        assert!(generate(&SynthConfig { frac_other: 0.5, ..small() }).is_err());
        assert!(generate(&SynthConfig { causal_lag: 0, ..small() }).is_err());
        assert!(generate(&SynthConfig { frac_causal: 1.5, ..small() }).is_err());
    }
}
