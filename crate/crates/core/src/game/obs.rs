use std::fmt::Write as _;

use super::{Game, InfosetId, NodeId, Owner};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Actor {
    Player(usize),
    Chance,
}

/// Chance nodes get a reserved per-node key instead of an infoset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfosetKey {
    Player(InfosetId),
    Chance(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation {
    pub actor: Actor,
    pub infoset: InfosetKey,
    pub action: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObservationSequence {
    pub steps: Vec<Observation>,
}

impl ObservationSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Stable text form using file-level names, e.g. `P1/I/L;chance/root/a`.
    pub fn canonical(&self, g: &Game) -> String {
        let mut s = String::new();
        for (k, o) in self.steps.iter().enumerate() {
            if k > 0 {
                s.push(';');
            }
            match o.infoset {
                InfosetKey::Player(id) => {
                    let set = g.infoset(id);
                    let _ = write!(s, "P{}/{}/{}", set.player + 1, set.name, set.actions[o.action]);
                }
                InfosetKey::Chance(h) => {
                    let node = g.node(h);
                    let _ = write!(s, "chance/{}/{}", node.name, node.actions[o.action]);
                }
            }
        }
        s
    }
}

impl Game {
    fn observation(&self, h: NodeId, action: usize) -> Observation {
        let node = self.node(h);
        match node.owner {
            Owner::Player(i) => Observation {
                actor: Actor::Player(i),
                infoset: InfosetKey::Player(node.infoset.expect("decision node without infoset")),
                action,
            },
            _ => Observation {
                actor: Actor::Chance,
                infoset: InfosetKey::Chance(h),
                action,
            },
        }
    }

    pub fn obs(&self, h: NodeId) -> ObservationSequence {
        ObservationSequence {
            steps: self.path(h).into_iter().map(|(n, a)| self.observation(n, a)).collect(),
        }
    }

    pub fn obs_i(&self, h: NodeId, player: usize) -> Result<ObservationSequence> {
        self.check_player(player)?;
        Ok(ObservationSequence {
            steps: self
                .path(h)
                .into_iter()
                .filter(|(n, _)| self.node(*n).owner == Owner::Player(player))
                .map(|(n, a)| self.observation(n, a))
                .collect(),
        })
    }

    /// True when some infoset of `player` occurs at a node and at one of its ancestors.
    pub fn has_absentmindedness(&self, player: usize) -> Result<bool> {
        self.check_player(player)?;
        Ok(self
            .player_infosets(player)
            .iter()
            .any(|&i| self.first_visit_nodes(i).len() < self.infoset(i).nodes.len()))
    }

    pub fn any_absentmindedness(&self) -> bool {
        (0..self.players()).any(|i| self.has_absentmindedness(i).unwrap_or(false))
    }

    /// Nodes of `id` with no ancestor in the same infoset.
    pub fn first_visit_nodes(&self, id: InfosetId) -> Vec<NodeId> {
        self.infoset(id)
            .nodes
            .iter()
            .copied()
            .filter(|&h| !self.path(h).iter().any(|(n, _)| self.node(*n).infoset == Some(id)))
            .collect()
    }

    pub fn is_first_visit(&self, h: NodeId) -> bool {
        match self.node(h).infoset {
            Some(id) => !self.path(h).iter().any(|(n, _)| self.node(*n).infoset == Some(id)),
            None => true,
        }
    }
}
