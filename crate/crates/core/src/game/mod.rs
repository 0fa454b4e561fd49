//! Immutable extensive-form games with an infoset partition per player.
//!
//! A [`Game`] is always valid: it can only be obtained from a [`GameDraft`]
//! that passes [`validate_game`]. Node and infoset handles are dense indices;
//! the string identifiers of the draft are kept for I/O and for comparing
//! games that share a tree.

mod builder;
mod draft;
mod obs;

use std::collections::HashMap;
use std::fmt;

use num::{BigRational, One};
use serde::{Deserialize, Serialize};

pub use builder::GameBuilder;
pub use draft::{validate_game, GameDraft, InfosetDraft, NodeDraft, ValidationReport, Violation};
pub use obs::{Actor, InfosetKey, Observation, ObservationSequence};

use crate::error::{Error, Result};
use crate::num::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfosetId(pub usize);

/// Who moves at a node. Players are zero-based internally and written `P1`,
/// `P2`, ... in files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Player(usize),
    Chance,
    Terminal,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Player(i) => write!(f, "P{}", i + 1),
            Owner::Chance => f.write_str("chance"),
            Owner::Terminal => f.write_str("terminal"),
        }
    }
}

impl Serialize for Owner {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Owner {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "chance" => Ok(Owner::Chance),
            "terminal" => Ok(Owner::Terminal),
            other => other
                .strip_prefix('P')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| Owner::Player(k - 1))
                .ok_or_else(|| {
                    serde::de::Error::custom(format!(
                        "owner must be \"P<k>\", \"chance\" or \"terminal\", got `{other}`"
                    ))
                }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub name: String,
    pub owner: Owner,
    pub actions: Vec<String>,
    pub children: Vec<NodeId>,
    pub chance_probs: Vec<Value>,
    pub utils: Vec<Value>,
    /// Parent node and the index of the action leading here.
    pub parent: Option<(NodeId, usize)>,
    pub infoset: Option<InfosetId>,
    pub depth: usize,
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        self.owner == Owner::Terminal
    }

    pub fn is_chance(&self) -> bool {
        self.owner == Owner::Chance
    }

    pub fn player(&self) -> Option<usize> {
        match self.owner {
            Owner::Player(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Infoset {
    pub name: String,
    pub player: usize,
    pub nodes: Vec<NodeId>,
    pub actions: Vec<String>,
    /// Position among the owning player's infosets; strategies are indexed by it.
    pub local_index: usize,
}

#[derive(Clone, Debug)]
pub struct Game {
    players: usize,
    nodes: Vec<Node>,
    root: NodeId,
    infosets: Vec<Infoset>,
    player_infosets: Vec<Vec<InfosetId>>,
    node_index: HashMap<String, NodeId>,
    leaves: Vec<NodeId>,
}

impl Game {
    pub fn from_draft(draft: &GameDraft) -> Result<Game> {
        let report = validate_game(draft);
        if !report.is_valid() {
            return Err(Error::InvalidGame(report));
        }
        Ok(Self::build(draft))
    }

    fn build(draft: &GameDraft) -> Game {
        let node_index: HashMap<String, NodeId> = draft
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.id.clone(), NodeId(k)))
            .collect();
        let mut nodes: Vec<Node> = draft
            .nodes
            .iter()
            .map(|n| Node {
                name: n.id.clone(),
                owner: n.owner,
                actions: n.actions.clone(),
                children: n.children.iter().map(|c| node_index[c]).collect(),
                chance_probs: n.chance_probs.clone(),
                utils: n.utils.clone(),
                parent: None,
                infoset: None,
                depth: 0,
            })
            .collect();
        let root = node_index[&draft.root];
        let mut stack = vec![root];
        while let Some(h) = stack.pop() {
            let children = nodes[h.0].children.clone();
            let depth = nodes[h.0].depth;
            for (a, c) in children.into_iter().enumerate() {
                nodes[c.0].parent = Some((h, a));
                nodes[c.0].depth = depth + 1;
                stack.push(c);
            }
        }

        let mut infosets = Vec::with_capacity(draft.infosets.len());
        let mut player_infosets = vec![Vec::new(); draft.players];
        for (k, d) in draft.infosets.iter().enumerate() {
            let player = d.player - 1;
            let id = InfosetId(k);
            let members: Vec<NodeId> = d.nodes.iter().map(|n| node_index[n]).collect();
            for &h in &members {
                nodes[h.0].infoset = Some(id);
            }
            infosets.push(Infoset {
                name: d.id.clone(),
                player,
                nodes: members,
                actions: d.actions.clone(),
                local_index: player_infosets[player].len(),
            });
            player_infosets[player].push(id);
        }
        let leaves = (0..nodes.len())
            .map(NodeId)
            .filter(|h| nodes[h.0].is_terminal())
            .collect();
        Game {
            players: draft.players,
            nodes,
            root,
            infosets,
            player_infosets,
            node_index,
            leaves,
        }
    }

    pub fn to_draft(&self) -> GameDraft {
        let name = |h: NodeId| self.nodes[h.0].name.clone();
        GameDraft {
            players: self.players,
            root: name(self.root),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDraft {
                    id: n.name.clone(),
                    owner: n.owner,
                    actions: n.actions.clone(),
                    children: n.children.iter().map(|&c| name(c)).collect(),
                    chance_probs: n.chance_probs.clone(),
                    utils: n.utils.clone(),
                })
                .collect(),
            infosets: self
                .infosets
                .iter()
                .map(|i| InfosetDraft {
                    player: i.player + 1,
                    id: i.name.clone(),
                    nodes: i.nodes.iter().map(|&h| name(h)).collect(),
                    actions: i.actions.clone(),
                })
                .collect(),
        }
    }

    /// Re-runs validation; always empty for a constructed game.
    pub fn validate(&self) -> ValidationReport {
        validate_game(&self.to_draft())
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, h: NodeId) -> &Node {
        &self.nodes[h.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn node_by_name(&self, name: &str) -> Result<NodeId> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn infosets(&self) -> &[Infoset] {
        &self.infosets
    }

    pub fn infoset(&self, id: InfosetId) -> &Infoset {
        &self.infosets[id.0]
    }

    pub fn infoset_by_name(&self, name: &str) -> Result<InfosetId> {
        self.infosets
            .iter()
            .position(|i| i.name == name)
            .map(InfosetId)
            .ok_or_else(|| Error::UnknownInfoset(name.to_string()))
    }

    pub fn player_infosets(&self, player: usize) -> &[InfosetId] {
        &self.player_infosets[player]
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.players {
            Ok(())
        } else {
            Err(Error::UnknownPlayer(player + 1))
        }
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn chance_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(|&h| self.node(h).is_chance())
    }

    pub fn num_actions(&self, id: InfosetId) -> usize {
        self.infosets[id.0].actions.len()
    }

    /// True when every chance probability and utility is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.chance_probs.iter().chain(&n.utils).all(Value::is_exact))
    }

    pub fn utility(&self, leaf: NodeId, player: usize) -> &Value {
        &self.nodes[leaf.0].utils[player]
    }

    /// Nodes from the root to `h`, excluding `h`.
    pub fn seq(&self, h: NodeId) -> Vec<NodeId> {
        self.path(h).into_iter().map(|(n, _)| n).collect()
    }

    /// Ancestors of `h` from the root, each with the action taken there.
    pub fn path(&self, h: NodeId) -> Vec<(NodeId, usize)> {
        let mut out = Vec::with_capacity(self.nodes[h.0].depth);
        let mut cur = h;
        while let Some((p, a)) = self.nodes[cur.0].parent {
            out.push((p, a));
            cur = p;
        }
        out.reverse();
        out
    }

    /// True when `anc` is a proper ancestor of `h`.
    pub fn is_ancestor(&self, anc: NodeId, h: NodeId) -> bool {
        let mut cur = h;
        while let Some((p, _)) = self.nodes[cur.0].parent {
            if p == anc {
                return true;
            }
            cur = p;
        }
        false
    }

    /// Nodes of the subtree rooted at `h`, including `h`, in preorder.
    pub fn subtree(&self, h: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![h];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n.0].children.iter().rev());
        }
        out
    }

    /// Product of chance probabilities on the path to `h` (one when none).
    pub fn chance_product(&self, h: NodeId) -> Value {
        self.path(h)
            .into_iter()
            .filter(|(n, _)| self.node(*n).is_chance())
            .fold(Value::one(), |acc, (n, a)| &acc * &self.node(n).chance_probs[a])
    }

    /// Maximum utility of `player` over all leaves.
    pub fn max_utility(&self, player: usize) -> Value {
        self.leaves
            .iter()
            .map(|&z| self.utility(z, player).clone())
            .fold(None, |best: Option<Value>, u| match best {
                Some(b) if b >= u => Some(b),
                _ => Some(u),
            })
            .unwrap_or_else(Value::zero)
    }

    /// Same nodes, actions, chance and utilities; infosets may differ.
    pub fn same_tree(&self, other: &Game) -> std::result::Result<(), String> {
        if self.players != other.players {
            return Err("player counts differ".into());
        }
        if self.nodes.len() != other.nodes.len() {
            return Err("node counts differ".into());
        }
        if self.nodes[self.root.0].name != other.nodes[other.root.0].name {
            return Err("roots differ".into());
        }
        for n in &self.nodes {
            let Some(&m) = other.node_index.get(&n.name) else {
                return Err(format!("node `{}` missing", n.name));
            };
            let m = &other.nodes[m.0];
            let child_names =
                |g: &Game, node: &Node| node.children.iter().map(|c| g.nodes[c.0].name.clone()).collect::<Vec<_>>();
            if n.owner != m.owner
                || n.actions != m.actions
                || child_names(self, n) != child_names(other, m)
                || n.chance_probs != m.chance_probs
                || n.utils != m.utils
            {
                return Err(format!("node `{}` differs", n.name));
            }
        }
        Ok(())
    }

    /// Returns a copy with player `player`'s infosets replaced.
    ///
    /// Each part is a list of node ids with a name; actions are taken from the
    /// nodes themselves. The parts must partition the player's decision nodes.
    pub fn with_player_partition(&self, player: usize, parts: Vec<(String, Vec<NodeId>)>) -> Result<Game> {
        let mut draft = self.to_draft();
        let mut new_sets = Vec::with_capacity(draft.infosets.len());
        let mut inserted = false;
        for d in draft.infosets.drain(..) {
            if d.player == player + 1 {
                if !inserted {
                    for (name, nodes) in &parts {
                        let first = nodes.first().ok_or_else(|| Error::InvalidSplit("empty infoset".into()))?;
                        new_sets.push(InfosetDraft {
                            player: player + 1,
                            id: name.clone(),
                            nodes: nodes.iter().map(|&h| self.node(h).name.clone()).collect(),
                            actions: self.node(*first).actions.clone(),
                        });
                    }
                    inserted = true;
                }
            } else {
                new_sets.push(d);
            }
        }
        if !inserted {
            for (name, nodes) in &parts {
                let first = nodes.first().ok_or_else(|| Error::InvalidSplit("empty infoset".into()))?;
                new_sets.push(InfosetDraft {
                    player: player + 1,
                    id: name.clone(),
                    nodes: nodes.iter().map(|&h| self.node(h).name.clone()).collect(),
                    actions: self.node(*first).actions.clone(),
                });
            }
        }
        draft.infosets = new_sets;
        Game::from_draft(&draft)
    }

    /// The infoset partition of `player` as sorted node-index lists, sorted.
    pub fn canonical_partition(&self, player: usize) -> Vec<Vec<usize>> {
        let mut parts: Vec<Vec<usize>> = self.player_infosets[player]
            .iter()
            .map(|&i| {
                let mut v: Vec<usize> = self.infosets[i.0].nodes.iter().map(|h| h.0).collect();
                v.sort_unstable();
                v
            })
            .collect();
        parts.sort();
        parts
    }

    /// Exact product of chance probabilities, when the game is exact.
    pub fn chance_product_exact(&self, h: NodeId) -> Option<BigRational> {
        self.path(h)
            .into_iter()
            .filter(|(n, _)| self.node(*n).is_chance())
            .try_fold(BigRational::one(), |acc, (n, a)| {
                self.node(n).chance_probs[a].as_exact().map(|p| acc * p)
            })
    }

    pub fn has_chance(&self) -> bool {
        self.nodes.iter().any(Node::is_chance)
    }

}
