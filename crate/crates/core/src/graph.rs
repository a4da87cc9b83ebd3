//! Undirected, unweighted mention graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::textproc::{classify_activity, ActivityMode, KeywordSet};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("node id {0} out of range")]
    NodeOutOfRange(usize),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// Dense ids are assigned in sorted user-id order, so the graph does not
/// depend on corpus or post order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionGraph {
    pub node_index: BTreeMap<String, usize>,
    pub node_names: Vec<String>,
    pub adjacency: Vec<Vec<usize>>,
    pub n_nodes: usize,
    pub n_edges: usize,
}

impl MentionGraph {
    /// Builds a graph from named edges plus extra isolated nodes. Self-loops
    /// and duplicate edges are dropped.
    pub fn from_edges<I, S>(nodes: I, edges: &[(String, String)]) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: BTreeSet<String> = nodes.into_iter().map(Into::into).collect();
        for (a, b) in edges {
            names.insert(a.clone());
            names.insert(b.clone());
        }
        let node_names: Vec<String> = names.into_iter().collect();
        let node_index: BTreeMap<String, usize> = node_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut sets = vec![BTreeSet::new(); node_names.len()];
        for (a, b) in edges {
            let (i, j) = (node_index[a], node_index[b]);
            if i != j {
                sets[i].insert(j);
                sets[j].insert(i);
            }
        }
        let adjacency: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let n_edges = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Self {
            n_nodes: node_names.len(),
            node_index,
            node_names,
            adjacency,
            n_edges,
        }
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.node_index.get(name).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: &str) -> Result<usize, GraphError> {
        self.node_id(node)
            .map(|i| self.adjacency[i].len())
            .ok_or_else(|| GraphError::UnknownNode(node.to_string()))
    }

    pub fn degree_of(&self, node: usize) -> Result<usize, GraphError> {
        self.adjacency
            .get(node)
            .map(Vec::len)
            .ok_or(GraphError::NodeOutOfRange(node))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|n| n.binary_search(&b).is_ok())
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges);
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Named edges, ids ordered within each pair, pairs sorted.
    pub fn named_edges(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .edges()
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = (&self.node_names[i], &self.node_names[j]);
                if a <= b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                }
            })
            .collect();
        out.sort();
        out
    }

    /// Checks density, symmetry, sortedness and the absence of self-loops.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let bad = |m: String| Err(GraphError::Invalid(m));
        if self.adjacency.len() != self.n_nodes
            || self.node_names.len() != self.n_nodes
            || self.node_index.len() != self.n_nodes
        {
            return bad("node count mismatch".into());
        }
        for (name, &i) in &self.node_index {
            if self.node_names.get(i) != Some(name) {
                return bad(format!("node index for {name:?} is inconsistent"));
            }
        }
        let mut degree_sum = 0;
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("adjacency of {i} not strictly sorted"));
            }
            for &j in nbrs {
                if j == i {
                    return bad(format!("self-loop at {i}"));
                }
                if j >= self.n_nodes || !self.has_edge(j, i) {
                    return bad(format!("edge {i}-{j} not symmetric"));
                }
            }
            degree_sum += nbrs.len();
        }
        if degree_sum != 2 * self.n_edges {
            return bad(format!("degree sum {degree_sum} != 2 x {}", self.n_edges));
        }
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<(), GraphError> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, GraphError> {
        let g: Self = serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?;
        g.check_invariants()?;
        Ok(g)
    }

    /// One `id1<TAB>id2` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (a, b) in self.named_edges() {
            writeln!(w, "{a}\t{b}")?;
        }
        w.flush()
    }
}

/// Mention graph over all users plus every user they mention. With
/// `restrict_to_activity_posts`, only mentions from activity posts count.
pub fn build_mention_graph(
    corpus: &Corpus,
    restrict_to_activity_posts: bool,
    ks: &KeywordSet,
) -> MentionGraph {
    let mut edges = Vec::new();
    for user in &corpus.users {
        for post in &user.posts {
            if post.mentions.is_empty() {
                continue;
            }
            if restrict_to_activity_posts && !classify_activity(post, ks, ActivityMode::AnyYoga) {
                continue;
            }
            for m in &post.mentions {
                edges.push((user.user_id.clone(), m.clone()));
            }
        }
    }
    MentionGraph::from_edges(corpus.users.iter().map(|u| u.user_id.clone()), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PostRecord, UserRecord};

    fn user(id: &str, posts: &[(&str, &[&str])]) -> UserRecord {
        let mut u = UserRecord::new(id);
        for (k, (text, mentions)) in posts.iter().enumerate() {
            let mut p = PostRecord::new(format!("{id}-{k}"), id, 1 + k as i64, *text);
            p.mentions = mentions.iter().map(|s| s.to_string()).collect();
            u.posts.push(p);
        }
        u
    }

    fn corpus(users: Vec<UserRecord>) -> Corpus {
        Corpus::new(users, "t").unwrap()
    }

    #[test]
    fn repeated_mentions_collapse() {
        let c = corpus(vec![
            user("a", &[("yoga", &["b"]), ("yoga again", &["b"])]),
            user("b", &[("yoga", &["a"])]),
        ]);
        let g = build_mention_graph(&c, true, &KeywordSet::default());
        assert_eq!((g.n_nodes, g.n_edges), (2, 1));
        g.check_invariants().unwrap();
    }

    #[test]
    fn self_mentions_dropped() {
        let c = corpus(vec![user("a", &[("yoga", &["a"])])]);
        let g = build_mention_graph(&c, true, &KeywordSet::default());
        assert_eq!((g.n_nodes, g.n_edges), (1, 0));
    }

    #[test]
    fn no_mentions() {
        let c = corpus((0..5).map(|i| user(&format!("u{i}"), &[("hi", &[])])).collect());
        let g = build_mention_graph(&c, true, &KeywordSet::default());
        assert_eq!((g.n_nodes, g.n_edges), (5, 0));
    }

    #[test]
    fn activity_restriction_and_external_nodes() {
        let c = corpus(vec![user("a", &[("coffee", &["x"]), ("yoga", &["y"])])]);
        let g = build_mention_graph(&c, true, &KeywordSet::default());
        assert_eq!(g.node_names, vec!["a", "y"]);
        let g = build_mention_graph(&c, false, &KeywordSet::default());
        assert_eq!(g.node_names, vec!["a", "x", "y"]);
        assert_eq!(g.degree("a").unwrap(), 2);
        assert_eq!(g.degree("x").unwrap(), 1);
        assert!(g.degree("z").is_err());
    }

    #[test]
    fn path_degrees_and_edge_list() {
        let e = |a: &str, b: &str| (a.to_string(), b.to_string());
        let g = MentionGraph::from_edges(["d"], &[e("b", "a"), e("c", "b")]);
        let deg: Vec<_> = ["a", "b", "c", "d"].iter().map(|n| g.degree(n).unwrap()).collect();
        assert_eq!(deg, vec![1, 2, 1, 0]);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\tb\nb\tc\n");
    }
}
