//! Joint user-type classifier over description, location, activity posts
//! and a mention-graph node vector.

use affectlag_neural::{
    Attention, BiLstm, Checkpoint, Init, Linear, Lstm, NeuralError, NodeId, OptimizerConfig, Params, Tape,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{lookup, table_from_value, table_to_value};
use super::{argmax, fit, Classifier, History, LoopConfig, ModelError, Result};
use crate::corpus::{Corpus, UserRecord, UserType};
use crate::embed::EmbeddingTable;
use crate::textproc::{classify_activity, tokenize, ActivityMode, KeywordSet};

pub const KIND: &str = "yun";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YunConfig {
    /// Hidden units per LSTM direction (D).
    pub lstm_unit: usize,
    pub attn_dim: usize,
    /// Width of the user layer (h).
    pub hidden: usize,
    pub classes: usize,
    /// Dimension of the shared word/emoji table.
    pub word_dim: usize,
    /// Dimension of the node vectors.
    pub node_dim: usize,
    /// Width of the network block.
    pub net_width: usize,
    /// Token cap for each text field.
    pub max_tokens: usize,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for YunConfig {
    fn default() -> Self {
        Self {
            lstm_unit: 150,
            attn_dim: 300,
            hidden: 200,
            classes: 3,
            word_dim: 300,
            node_dim: 32,
            net_width: 150,
            max_tokens: 512,
            optimizer: OptimizerConfig::adadelta(0.01, 1e-4),
            batch_size: 16,
            epochs: 30,
            patience: 3,
            seed: 0,
        }
    }
}

impl YunConfig {
    /// Small widths that train in seconds on a few hundred users.
    pub fn desk() -> Self {
        Self {
            lstm_unit: 16,
            attn_dim: 16,
            hidden: 32,
            word_dim: 16,
            node_dim: 16,
            net_width: 16,
            max_tokens: 48,
            optimizer: OptimizerConfig::adadelta(1.0, 1e-4),
            batch_size: 8,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes != UserType::ALL.len() {
            return Err(ModelError::Config(format!("classes must be {}", UserType::ALL.len())));
        }
        for (name, v) in [
            ("lstm_unit", self.lstm_unit),
            ("attn_dim", self.attn_dim),
            ("hidden", self.hidden),
            ("word_dim", self.word_dim),
            ("node_dim", self.node_dim),
            ("net_width", self.net_width),
            ("max_tokens", self.max_tokens),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(ModelError::Config(format!("{name} must be >= 1")));
            }
        }
        self.optimizer.validate()?;
        Ok(())
    }

    fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            optimizer: self.optimizer.clone(),
            batch_size: self.batch_size,
            epochs: self.epochs,
            patience: self.patience,
            seed: self.seed,
        }
    }
}

/// Per-block user vectors; blocks without input are zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UserRepresentation {
    pub r_des: Vec<f64>,
    pub r_loc: Vec<f64>,
    pub r_tweets: Vec<f64>,
    pub r_network: Vec<f64>,
}

impl UserRepresentation {
    pub fn r_user(&self) -> Vec<f64> {
        [&self.r_des, &self.r_loc, &self.r_tweets, &self.r_network]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }
}

/// Token vectors and node vector for one user.
#[derive(Clone, Debug)]
pub struct YunInput {
    pub des: Vec<Vec<f64>>,
    pub loc: Vec<Vec<f64>>,
    pub tweets: Vec<Vec<f64>>,
    pub node: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct YunModel {
    pub cfg: YunConfig,
    pub keywords: KeywordSet,
    words: EmbeddingTable,
    nodes: Option<EmbeddingTable>,
    params: Params,
    des_rnn: BiLstm,
    des_attn: Attention,
    loc_rnn: Lstm,
    tweet_rnn: BiLstm,
    tweet_attn: Attention,
    net: Linear,
    user: Linear,
    out: Linear,
}

struct Blocks {
    des: NodeId,
    loc: NodeId,
    tweets: NodeId,
    network: NodeId,
}

impl YunModel {
    pub fn new(
        cfg: YunConfig,
        words: EmbeddingTable,
        nodes: Option<EmbeddingTable>,
        keywords: KeywordSet,
    ) -> Result<Self> {
        cfg.validate()?;
        if words.dim() != cfg.word_dim {
            return Err(ModelError::Config(format!(
                "word table has dim {}, config word_dim is {}",
                words.dim(),
                cfg.word_dim
            )));
        }
        if let Some(n) = &nodes {
            if n.dim() != cfg.node_dim {
                return Err(ModelError::Config(format!(
                    "node table has dim {}, config node_dim is {}",
                    n.dim(),
                    cfg.node_dim
                )));
            }
        }
        keywords.validate().map_err(|e| ModelError::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut params = Params::new();
        let (d, w) = (cfg.lstm_unit, cfg.word_dim);
        let des_rnn = BiLstm::new(&mut params, "des.rnn", w, d, &mut rng);
        let des_attn = Attention::new(&mut params, "des.attn", 2 * d, cfg.attn_dim, &mut rng);
        let loc_rnn = Lstm::new(&mut params, "loc.rnn", w, d, &mut rng);
        let tweet_rnn = BiLstm::new(&mut params, "tweets.rnn", w, d, &mut rng);
        let tweet_attn = Attention::new(&mut params, "tweets.attn", 2 * d, cfg.attn_dim, &mut rng);
        let net = Linear::new(&mut params, "net", cfg.node_dim, cfg.net_width, Init::Uniform(0.1), &mut rng);
        let user_dim = 5 * d + cfg.net_width;
        let user = Linear::new(&mut params, "user", user_dim, cfg.hidden, Init::Uniform(0.1), &mut rng);
        let out = Linear::new(&mut params, "out", cfg.hidden, cfg.classes, Init::Zeros, &mut rng);
        Ok(Self {
            cfg,
            keywords,
            words,
            nodes,
            params,
            des_rnn,
            des_attn,
            loc_rnn,
            tweet_rnn,
            tweet_attn,
            net,
            user,
            out,
        })
    }

    /// Length of `r_user`.
    pub fn user_dim(&self) -> usize {
        5 * self.cfg.lstm_unit + self.cfg.net_width
    }

    pub fn words(&self) -> &EmbeddingTable {
        &self.words
    }

    pub fn nodes(&self) -> Option<&EmbeddingTable> {
        self.nodes.as_ref()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Activity posts in timestamp order, concatenated and truncated.
    pub fn tweet_tokens(&self, user: &UserRecord) -> Vec<String> {
        let mut posts: Vec<_> = user
            .posts
            .iter()
            .filter(|p| classify_activity(p, &self.keywords, ActivityMode::AnyYoga))
            .collect();
        posts.sort_by(|a, b| (a.timestamp, &a.post_id).cmp(&(b.timestamp, &b.post_id)));
        let mut toks = Vec::new();
        for p in posts {
            toks.extend(tokenize(&p.text));
            if toks.len() >= self.cfg.max_tokens {
                break;
            }
        }
        toks.truncate(self.cfg.max_tokens);
        toks
    }

    pub fn prepare(&self, user: &UserRecord) -> YunInput {
        let field = |text: &str| {
            let mut t = tokenize(text);
            t.truncate(self.cfg.max_tokens);
            lookup(&self.words, &t)
        };
        YunInput {
            des: field(&user.description),
            loc: field(&user.location),
            tweets: lookup(&self.words, &self.tweet_tokens(user)),
            node: self
                .nodes
                .as_ref()
                .and_then(|n| n.get(&user.user_id))
                .map(<[f64]>::to_vec),
        }
    }

    fn blocks(&self, tape: &mut Tape, x: &YunInput) -> Result<Blocks, NeuralError> {
        let p = &self.params;
        let d = self.cfg.lstm_unit;
        let attend = |tape: &mut Tape, rnn: &BiLstm, attn: &Attention, seq: &[Vec<f64>]| {
            if seq.is_empty() {
                return Ok(tape.zeros(2 * d));
            }
            let xs: Vec<NodeId> = seq.iter().map(|v| tape.input(v.clone())).collect();
            let hs = rnn.forward(tape, p, &xs)?;
            Ok::<_, NeuralError>(attn.forward(tape, p, &hs)?.pooled)
        };
        let des = attend(tape, &self.des_rnn, &self.des_attn, &x.des)?;
        let loc = if x.loc.is_empty() {
            tape.zeros(d)
        } else {
            let xs: Vec<NodeId> = x.loc.iter().map(|v| tape.input(v.clone())).collect();
            *self.loc_rnn.forward(tape, p, &xs)?.last().expect("non-empty")
        };
        let tweets = attend(tape, &self.tweet_rnn, &self.tweet_attn, &x.tweets)?;
        let network = match &x.node {
            Some(v) => {
                let n = tape.input(v.clone());
                let z = self.net.forward(tape, p, n);
                tape.relu(z)
            }
            None => tape.zeros(self.cfg.net_width),
        };
        Ok(Blocks { des, loc, tweets, network })
    }

    pub fn represent(&self, user: &UserRecord) -> Result<UserRepresentation> {
        let mut tape = Tape::new();
        let b = self.blocks(&mut tape, &self.prepare(user))?;
        Ok(UserRepresentation {
            r_des: tape.value(b.des).to_vec(),
            r_loc: tape.value(b.loc).to_vec(),
            r_tweets: tape.value(b.tweets).to_vec(),
            r_network: tape.value(b.network).to_vec(),
        })
    }

    /// Class probabilities in [`UserType::ALL`] order.
    pub fn forward_user(&self, user: &UserRecord) -> Result<Vec<f64>> {
        Ok(self.probs(&self.prepare(user))?)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let cfg = serde_json::to_value(&self.cfg).expect("config serializes");
        let mut ckpt = Checkpoint::new(KIND, cfg, UserType::label_names(), &self.params);
        ckpt.extras.insert("words".into(), table_to_value(&self.words));
        if let Some(n) = &self.nodes {
            ckpt.extras.insert("nodes".into(), table_to_value(n));
        }
        ckpt.extras.insert(
            "keywords".into(),
            serde_json::to_value(&self.keywords).expect("keywords serialize"),
        );
        ckpt
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind(KIND)?;
        let expected = UserType::label_names();
        if ckpt.labels != expected {
            return Err(ModelError::LabelMismatch { expected, found: ckpt.labels.clone() });
        }
        let cfg: YunConfig =
            serde_json::from_value(ckpt.config.clone()).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        let words = table_from_value(
            ckpt.extras.get("words").ok_or_else(|| ModelError::Checkpoint("missing words table".into()))?,
        )?;
        let nodes = ckpt.extras.get("nodes").map(table_from_value).transpose()?;
        let keywords: KeywordSet = match ckpt.extras.get("keywords") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| ModelError::Checkpoint(e.to_string()))?,
            None => KeywordSet::default(),
        };
        let mut model = Self::new(cfg, words, nodes, keywords)?;
        ckpt.restore_into(&mut model.params)?;
        Ok(model)
    }
}

impl Classifier for YunModel {
    type Input = YunInput;

    fn classes(&self) -> usize {
        self.cfg.classes
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward(&self, tape: &mut Tape, x: &YunInput) -> Result<NodeId, NeuralError> {
        let b = self.blocks(tape, x)?;
        let r_user = tape.concat(&[b.des, b.loc, b.tweets, b.network]);
        let h = self.user.forward(tape, &self.params, r_user);
        let h = tape.relu(h);
        let z = self.out.forward(tape, &self.params, h);
        Ok(tape.softmax(z))
    }
}

fn labelled(model: &YunModel, corpus: &Corpus) -> Result<Vec<(YunInput, usize)>> {
    corpus
        .users
        .par_iter()
        .map(|u| {
            let y = u.user_type_label.ok_or_else(|| ModelError::MissingLabel(u.user_id.clone()))?;
            Ok((model.prepare(u), y.index()))
        })
        .collect()
}

/// Trains from scratch and returns the best-validation model.
pub fn train_yun(
    train: &Corpus,
    valid: &Corpus,
    words: EmbeddingTable,
    nodes: Option<EmbeddingTable>,
    keywords: KeywordSet,
    cfg: &YunConfig,
) -> Result<(YunModel, History)> {
    let mut model = YunModel::new(cfg.clone(), words, nodes, keywords)?;
    let tr = labelled(&model, train)?;
    let va = labelled(&model, valid)?;
    let history = fit(&mut model, &tr, &va, &cfg.loop_config())?;
    Ok((model, history))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserPrediction {
    pub user_id: String,
    pub label: UserType,
    pub probs: Vec<f64>,
}

/// Argmax user type for every user, in corpus order.
pub fn classify_users(corpus: &Corpus, model: &YunModel) -> Result<Vec<UserPrediction>> {
    corpus
        .users
        .par_iter()
        .map(|u| {
            let probs = model.forward_user(u)?;
            let label = UserType::from_index(argmax(&probs)).expect("class index in range");
            Ok(UserPrediction { user_id: u.user_id.clone(), label, probs })
        })
        .collect()
}
