use std::collections::{HashMap, HashSet};
use std::fmt;

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use super::Owner;
use crate::num::Value;

const FLOAT_SUM_TOL: f64 = 1e-12;

/// The game file model. Unvalidated; see [`validate_game`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDraft {
    pub players: usize,
    pub root: String,
    pub nodes: Vec<NodeDraft>,
    #[serde(default)]
    pub infosets: Vec<InfosetDraft>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDraft {
    pub id: String,
    pub owner: Owner,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chance_probs: Vec<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub utils: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfosetDraft {
    /// One-based player number.
    pub player: usize,
    pub id: String,
    pub nodes: Vec<String>,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("game must have at least one player")]
    NoPlayers,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("root `{0}` is not a node")]
    UnknownRoot(String),
    #[error("node `{node}` has unknown child `{child}`")]
    DanglingChild { node: String, child: String },
    #[error("node `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("root `{0}` has a parent")]
    RootHasParent(String),
    #[error("node `{0}` is not reachable from the root")]
    Unreachable(String),
    #[error("node `{node}` has {actions} actions but {children} children")]
    ChildCount { node: String, actions: usize, children: usize },
    #[error("node `{node}` repeats action label `{label}`")]
    DuplicateAction { node: String, label: String },
    #[error("terminal node `{0}` has children")]
    TerminalWithChildren(String),
    #[error("non-terminal node `{0}` has no children")]
    NoChildren(String),
    #[error("node `{node}` is owned by unknown player P{player}")]
    UnknownOwner { node: String, player: usize },
    #[error("chance node `{node}` has {probs} probabilities for {actions} actions")]
    ChanceLength { node: String, probs: usize, actions: usize },
    #[error("chance node `{node}` has negative probability {value}")]
    NegativeProbability { node: String, value: String },
    #[error("chance distribution sums to {sum} at node `{node}`")]
    ChanceSum { node: String, sum: String },
    #[error("non-chance node `{0}` carries chance probabilities")]
    StrayProbabilities(String),
    #[error("terminal node `{node}` has {utils} utilities for {players} players")]
    UtilityLength { node: String, utils: usize, players: usize },
    #[error("terminal node `{node}` has negative utility {value}")]
    NegativeUtility { node: String, value: String },
    #[error("non-terminal node `{0}` carries utilities")]
    StrayUtilities(String),
    #[error("duplicate infoset id `{0}`")]
    DuplicateInfoset(String),
    #[error("infoset `{infoset}` belongs to unknown player {player}")]
    InfosetPlayer { infoset: String, player: usize },
    #[error("infoset `{0}` is empty")]
    EmptyInfoset(String),
    #[error("infoset `{infoset}` lists unknown node `{node}`")]
    InfosetUnknownNode { infoset: String, node: String },
    #[error("infoset `{infoset}` contains node `{node}` owned by {owner}")]
    InfosetOwner { infoset: String, node: String, owner: String },
    #[error("infoset `{infoset}`: node `{node}` has actions {found:?}, expected {expected:?}")]
    InfosetActions {
        infoset: String,
        node: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("node `{0}` is in more than one infoset")]
    NodeInTwoInfosets(String),
    #[error("decision node `{0}` is in no infoset")]
    NodeWithoutInfoset(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn value_sum(values: &[Value]) -> Value {
    if values.iter().all(Value::is_exact) {
        let s = values
            .iter()
            .filter_map(Value::as_exact)
            .fold(BigRational::zero(), |acc, v| acc + v);
        Value::Exact(s)
    } else {
        Value::Float(values.iter().map(Value::to_f64).sum())
    }
}

fn sums_to_one(sum: &Value) -> bool {
    match sum {
        Value::Exact(r) => r == &BigRational::from_integer(1.into()),
        Value::Float(f) => (f - 1.0).abs() <= FLOAT_SUM_TOL,
    }
}

fn fmt_sum(sum: &Value) -> String {
    match sum {
        Value::Exact(_) => sum.to_string(),
        // Float sums are shown rounded so that 0.5 + 0.6 reads as 1.1.
        Value::Float(f) => format!("{}", (f * 1e9).round() / 1e9),
    }
}

/// Checks every structural invariant and returns all violations found.
pub fn validate_game(g: &GameDraft) -> ValidationReport {
    let mut out = Vec::new();
    if g.players == 0 {
        out.push(Violation::NoPlayers);
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (k, n) in g.nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), k).is_some() {
            out.push(Violation::DuplicateNode(n.id.clone()));
        }
    }

    for n in &g.nodes {
        check_node(g, n, &index, &mut out);
    }

    check_tree(g, &index, &mut out);
    check_infosets(g, &index, &mut out);
    ValidationReport { violations: out }
}

fn check_node(g: &GameDraft, n: &NodeDraft, index: &HashMap<&str, usize>, out: &mut Vec<Violation>) {
    for c in &n.children {
        if !index.contains_key(c.as_str()) {
            out.push(Violation::DanglingChild {
                node: n.id.clone(),
                child: c.clone(),
            });
        }
    }
    let mut labels = HashSet::new();
    for a in &n.actions {
        if !labels.insert(a) {
            out.push(Violation::DuplicateAction {
                node: n.id.clone(),
                label: a.clone(),
            });
        }
    }

    if n.owner == Owner::Terminal {
        if !n.children.is_empty() || !n.actions.is_empty() {
            out.push(Violation::TerminalWithChildren(n.id.clone()));
        }
        if n.utils.len() != g.players {
            out.push(Violation::UtilityLength {
                node: n.id.clone(),
                utils: n.utils.len(),
                players: g.players,
            });
        }
        for u in &n.utils {
            if u.is_negative() {
                out.push(Violation::NegativeUtility {
                    node: n.id.clone(),
                    value: u.to_string(),
                });
            }
        }
    } else {
        if n.children.is_empty() {
            out.push(Violation::NoChildren(n.id.clone()));
        } else if n.children.len() != n.actions.len() {
            out.push(Violation::ChildCount {
                node: n.id.clone(),
                actions: n.actions.len(),
                children: n.children.len(),
            });
        }
        if !n.utils.is_empty() {
            out.push(Violation::StrayUtilities(n.id.clone()));
        }
    }

    if let Owner::Player(p) = n.owner {
        if p >= g.players {
            out.push(Violation::UnknownOwner {
                node: n.id.clone(),
                player: p + 1,
            });
        }
    }

    if n.owner == Owner::Chance {
        if n.chance_probs.len() != n.actions.len() {
            out.push(Violation::ChanceLength {
                node: n.id.clone(),
                probs: n.chance_probs.len(),
                actions: n.actions.len(),
            });
        }
        for p in &n.chance_probs {
            if p.is_negative() {
                out.push(Violation::NegativeProbability {
                    node: n.id.clone(),
                    value: p.to_string(),
                });
            }
        }
        let sum = value_sum(&n.chance_probs);
        if !sums_to_one(&sum) {
            out.push(Violation::ChanceSum {
                node: n.id.clone(),
                sum: fmt_sum(&sum),
            });
        }
    } else if !n.chance_probs.is_empty() {
        out.push(Violation::StrayProbabilities(n.id.clone()));
    }
}

fn check_tree(g: &GameDraft, index: &HashMap<&str, usize>, out: &mut Vec<Violation>) {
    let mut parents = vec![0usize; g.nodes.len()];
    for n in &g.nodes {
        for c in &n.children {
            if let Some(&k) = index.get(c.as_str()) {
                parents[k] += 1;
            }
        }
    }
    for (k, n) in g.nodes.iter().enumerate() {
        if parents[k] > 1 {
            out.push(Violation::MultipleParents(n.id.clone()));
        }
    }

    let Some(&root) = index.get(g.root.as_str()) else {
        out.push(Violation::UnknownRoot(g.root.clone()));
        return;
    };
    if parents[root] > 0 {
        out.push(Violation::RootHasParent(g.root.clone()));
    }

    let mut seen = vec![false; g.nodes.len()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(k) = stack.pop() {
        for c in &g.nodes[k].children {
            if let Some(&j) = index.get(c.as_str()) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    for (k, n) in g.nodes.iter().enumerate() {
        if !seen[k] {
            out.push(Violation::Unreachable(n.id.clone()));
        }
    }
}

fn check_infosets(g: &GameDraft, index: &HashMap<&str, usize>, out: &mut Vec<Violation>) {
    let mut ids = HashSet::new();
    let mut membership = vec![0usize; g.nodes.len()];
    for set in &g.infosets {
        if !ids.insert(set.id.as_str()) {
            out.push(Violation::DuplicateInfoset(set.id.clone()));
        }
        if set.player == 0 || set.player > g.players {
            out.push(Violation::InfosetPlayer {
                infoset: set.id.clone(),
                player: set.player,
            });
        }
        if set.nodes.is_empty() {
            out.push(Violation::EmptyInfoset(set.id.clone()));
        }
        for name in &set.nodes {
            let Some(&k) = index.get(name.as_str()) else {
                out.push(Violation::InfosetUnknownNode {
                    infoset: set.id.clone(),
                    node: name.clone(),
                });
                continue;
            };
            membership[k] += 1;
            let node = &g.nodes[k];
            if node.owner != Owner::Player(set.player.wrapping_sub(1)) {
                out.push(Violation::InfosetOwner {
                    infoset: set.id.clone(),
                    node: name.clone(),
                    owner: node.owner.to_string(),
                });
            }
            if node.actions != set.actions {
                out.push(Violation::InfosetActions {
                    infoset: set.id.clone(),
                    node: name.clone(),
                    expected: set.actions.clone(),
                    found: node.actions.clone(),
                });
            }
        }
    }
    for (k, n) in g.nodes.iter().enumerate() {
        if membership[k] > 1 {
            out.push(Violation::NodeInTwoInfosets(n.id.clone()));
        }
        if matches!(n.owner, Owner::Player(_)) && membership[k] == 0 {
            out.push(Violation::NodeWithoutInfoset(n.id.clone()));
        }
    }
}
