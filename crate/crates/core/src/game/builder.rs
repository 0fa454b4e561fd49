use super::{Game, GameDraft, InfosetDraft, NodeDraft, Owner};
use crate::error::Result;
use crate::num::Value;

/// Incremental construction of a [`GameDraft`]. Players are zero-based.
#[derive(Clone, Debug)]
pub struct GameBuilder {
    draft: GameDraft,
}

impl GameBuilder {
    pub fn new(players: usize, root: &str) -> Self {
        GameBuilder {
            draft: GameDraft {
                players,
                root: root.to_string(),
                nodes: Vec::new(),
                infosets: Vec::new(),
            },
        }
    }

    fn push(&mut self, id: &str, owner: Owner, actions: &[&str], children: &[&str]) -> &mut NodeDraft {
        self.draft.nodes.push(NodeDraft {
            id: id.to_string(),
            owner,
            actions: actions.iter().map(|s| s.to_string()).collect(),
            children: children.iter().map(|s| s.to_string()).collect(),
            chance_probs: Vec::new(),
            utils: Vec::new(),
        });
        self.draft.nodes.last_mut().expect("just pushed")
    }

    pub fn decision(&mut self, id: &str, player: usize, actions: &[&str], children: &[&str]) -> &mut Self {
        self.push(id, Owner::Player(player), actions, children);
        self
    }

    pub fn chance(&mut self, id: &str, actions: &[&str], children: &[&str], probs: Vec<Value>) -> &mut Self {
        self.push(id, Owner::Chance, actions, children).chance_probs = probs;
        self
    }

    pub fn leaf(&mut self, id: &str, utils: Vec<Value>) -> &mut Self {
        self.push(id, Owner::Terminal, &[], &[]).utils = utils;
        self
    }

    /// Actions are copied from the first listed node, which must already exist.
    pub fn infoset(&mut self, player: usize, id: &str, nodes: &[&str]) -> &mut Self {
        let actions = nodes
            .first()
            .and_then(|first| self.draft.nodes.iter().find(|n| n.id == *first))
            .map(|n| n.actions.clone())
            .unwrap_or_default();
        self.draft.infosets.push(InfosetDraft {
            player: player + 1,
            id: id.to_string(),
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            actions,
        });
        self
    }

    pub fn draft(&self) -> &GameDraft {
        &self.draft
    }

    pub fn into_draft(self) -> GameDraft {
        self.draft
    }

    pub fn build(&self) -> Result<Game> {
        Game::from_draft(&self.draft)
    }
}
