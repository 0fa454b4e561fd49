//! Seeded random games.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::num::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub players: usize,
    /// Maximum depth of a leaf.
    pub depth: usize,
    /// Maximum number of actions per node (at least 2 when above 1).
    pub branching: usize,
    /// Probability of trying to merge a decision node into an existing infoset.
    pub merge_rate: f64,
    /// Probability that a non-root internal node belongs to chance.
    pub chance_rate: f64,
    /// Probability that a non-root node above maximum depth is a leaf.
    pub leaf_rate: f64,
    /// Allow merging a node with an infoset containing an ancestor.
    pub absentminded: bool,
    pub max_utility: i64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            players: 1,
            depth: 4,
            branching: 2,
            merge_rate: 0.5,
            chance_rate: 0.2,
            leaf_rate: 0.2,
            absentminded: false,
            max_utility: 10,
        }
    }
}

impl RandomParams {
    fn check(&self) -> Result<()> {
        let rate = |x: f64| (0.0..=1.0).contains(&x);
        if self.players == 0 || self.depth == 0 || self.branching == 0 {
            return Err(Error::InvalidParameters("players, depth and branching must be positive".into()));
        }
        if !rate(self.merge_rate) || !rate(self.chance_rate) || !rate(self.leaf_rate) {
            return Err(Error::InvalidParameters("rates must lie in [0, 1]".into()));
        }
        if self.max_utility < 0 {
            return Err(Error::InvalidParameters("utilities are nonnegative".into()));
        }
        Ok(())
    }
}

struct Proto {
    player: Option<usize>,
    arity: usize,
    children: Vec<usize>,
    parent: Option<usize>,
    probs: Vec<Value>,
    utils: Vec<Value>,
}

pub fn random_game(params: &RandomParams, seed: u64) -> Result<Game> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Proto> = Vec::new();
    // Breadth-first so that merges only look at earlier (shallower) nodes.
    let mut queue = std::collections::VecDeque::new();
    nodes.push(Proto {
        player: None,
        arity: 0,
        children: Vec::new(),
        parent: None,
        probs: Vec::new(),
        utils: Vec::new(),
    });
    queue.push_back((0usize, 0usize));
    while let Some((k, depth)) = queue.pop_front() {
        let leaf = depth == params.depth || (depth > 0 && rng.gen_bool(params.leaf_rate));
        if leaf {
            nodes[k].utils = (0..params.players)
                .map(|_| Value::int(rng.gen_range(0..=params.max_utility)))
                .collect();
            continue;
        }
        let arity = if params.branching == 1 { 1 } else { rng.gen_range(2..=params.branching) };
        let chance = depth > 0 && rng.gen_bool(params.chance_rate);
        nodes[k].arity = arity;
        if chance {
            let weights: Vec<i64> = (0..arity).map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            nodes[k].probs = weights.iter().map(|&w| Value::ratio(w, total)).collect();
        } else {
            nodes[k].player = Some(rng.gen_range(0..params.players));
        }
        for _ in 0..arity {
            let c = nodes.len();
            nodes.push(Proto {
                player: None,
                arity: 0,
                children: Vec::new(),
                parent: Some(k),
                probs: Vec::new(),
                utils: Vec::new(),
            });
            nodes[k].children.push(c);
            queue.push_back((c, depth + 1));
        }
    }

    let is_ancestor = |nodes: &[Proto], a: usize, mut h: usize| {
        while let Some(p) = nodes[h].parent {
            if p == a {
                return true;
            }
            h = p;
        }
        false
    };
    let mut infosets: Vec<(usize, Vec<usize>)> = Vec::new();
    for k in 0..nodes.len() {
        let Some(player) = nodes[k].player else { continue };
        let mut target = None;
        if !infosets.is_empty() && rng.gen_bool(params.merge_rate) {
            let candidates: Vec<usize> = (0..infosets.len())
                .filter(|&s| {
                    let (p, members) = &infosets[s];
                    *p == player
                        && nodes[members[0]].arity == nodes[k].arity
                        && (params.absentminded || members.iter().all(|&m| !is_ancestor(&nodes, m, k)))
                })
                .collect();
            target = candidates.choose(&mut rng).copied();
        }
        match target {
            Some(s) => infosets[s].1.push(k),
            None => infosets.push((player, vec![k])),
        }
    }

    let name = |k: usize| format!("n{k}");
    let labels = |arity: usize| (0..arity).map(|a| format!("a{a}")).collect::<Vec<_>>();
    let mut b = GameBuilder::new(params.players, "n0");
    for (k, n) in nodes.iter().enumerate() {
        let kids: Vec<String> = n.children.iter().map(|&c| name(c)).collect();
        let kid_refs: Vec<&str> = kids.iter().map(String::as_str).collect();
        let acts = labels(n.arity);
        let act_refs: Vec<&str> = acts.iter().map(String::as_str).collect();
        if n.children.is_empty() {
            b.leaf(&name(k), n.utils.clone());
        } else if let Some(p) = n.player {
            b.decision(&name(k), p, &act_refs, &kid_refs);
        } else {
            b.chance(&name(k), &act_refs, &kid_refs, n.probs.clone());
        }
    }
    for (s, (player, members)) in infosets.iter().enumerate() {
        let names: Vec<String> = members.iter().map(|&m| name(m)).collect();
        b.infoset(*player, &format!("I{s}"), &names.iter().map(String::as_str).collect::<Vec<_>>());
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = RandomParams::default();
        assert_eq!(random_game(&p, 7).unwrap().to_draft(), random_game(&p, 7).unwrap().to_draft());
    }

    #[test]
    fn toggle_controls_absentmindedness() {
        let p = RandomParams {
            merge_rate: 0.9,
            ..RandomParams::default()
        };
        for seed in 0..100 {
            let g = random_game(&p, seed).unwrap();
            assert!(!g.has_absentmindedness(0).unwrap());
        }
    }

    #[test]
    fn no_merges_gives_singletons() {
        let p = RandomParams {
            merge_rate: 0.0,
            players: 2,
            ..RandomParams::default()
        };
        let g = random_game(&p, 3).unwrap();
        assert!(g.infosets().iter().all(|i| i.nodes.len() == 1));
    }
}
