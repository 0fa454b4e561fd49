//! Refinement order on infoset partitions and the coarsest perfect-recall
//! refinement.

use std::collections::HashMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{Game, GameDraft, InfosetDraft, InfosetId, NodeDraft, NodeId, Owner};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanEntry {
    pub coarse: String,
    pub fine: Vec<String>,
}

/// For each coarse infoset of `player`, the fine infosets partitioning it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefinementPlan {
    pub player: usize,
    pub mapping: Vec<PlanEntry>,
}

impl RefinementPlan {
    pub fn is_identity(&self) -> bool {
        self.mapping.iter().all(|e| e.fine.len() == 1 && e.fine[0] == e.coarse)
    }

    /// Number of single-infoset splits needed to go from coarse to fine.
    pub fn split_count(&self) -> usize {
        self.mapping.iter().map(|e| e.fine.len() - 1).sum()
    }
}

fn comparable(fine: &Game, coarse: &Game) -> Result<()> {
    fine.same_tree(coarse).map_err(Error::NotComparable)
}

/// The plan witnessing `fine ⪰_player coarse`, or `None` when it does not hold.
pub fn refines(fine: &Game, coarse: &Game, player: usize) -> Result<Option<RefinementPlan>> {
    comparable(fine, coarse)?;
    coarse.check_player(player)?;
    let mut mapping = Vec::new();
    for &ci in coarse.player_infosets(player) {
        let cset = coarse.infoset(ci);
        let mut fine_ids: Vec<InfosetId> = Vec::new();
        for h in &cset.nodes {
            let fh = fine.node_by_name(&coarse.node(*h).name)?;
            let fi = fine.node(fh).infoset.expect("decision node without infoset");
            if !fine_ids.contains(&fi) {
                fine_ids.push(fi);
            }
        }
        for &fi in &fine_ids {
            let inside = fine.infoset(fi).nodes.iter().all(|&fh| {
                let ch = coarse.node_by_name(&fine.node(fh).name).expect("same tree");
                coarse.node(ch).infoset == Some(ci)
            });
            if !inside {
                return Ok(None);
            }
        }
        mapping.push(PlanEntry {
            coarse: cset.name.clone(),
            fine: fine_ids.iter().map(|&f| fine.infoset(f).name.clone()).collect(),
        });
    }
    Ok(Some(RefinementPlan { player, mapping }))
}

pub fn has_perfect_recall(g: &Game, player: usize) -> Result<bool> {
    g.check_player(player)?;
    for &i in g.player_infosets(player) {
        let nodes = &g.infoset(i).nodes;
        let first = g.obs_i(nodes[0], player)?;
        for &h in &nodes[1..] {
            if g.obs_i(h, player)? != first {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..4].iter().map(|b| format!("{b:02x}")).collect()
}

/// Partition of one infoset by equal `obs_i`, in order of first appearance.
fn obs_classes(g: &Game, id: InfosetId, player: usize) -> Vec<(String, Vec<NodeId>)> {
    let mut order: Vec<(String, Vec<NodeId>)> = Vec::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    for &h in &g.infoset(id).nodes {
        let key = g.obs_i(h, player).expect("checked player").canonical(g);
        match pos.get(&key) {
            Some(&k) => order[k].1.push(h),
            None => {
                pos.insert(key.clone(), order.len());
                order.push((key, vec![h]));
            }
        }
    }
    order
}

fn refine_player(g: &Game, player: usize, draft: &mut GameDraft) {
    let mut out = Vec::with_capacity(draft.infosets.len());
    for (k, d) in draft.infosets.drain(..).enumerate() {
        let id = InfosetId(k);
        if d.player != player + 1 {
            out.push(d);
            continue;
        }
        let classes = obs_classes(g, id, player);
        if classes.len() == 1 {
            out.push(d);
            continue;
        }
        for (key, nodes) in classes {
            out.push(InfosetDraft {
                player: d.player,
                id: format!("{}~{}", d.id, short_hash(&key)),
                nodes: nodes.iter().map(|&h| g.node(h).name.clone()).collect(),
                actions: d.actions.clone(),
            });
        }
    }
    draft.infosets = out;
}

/// `pr_i(g)`: every infoset of `player` split by equality of `obs_i`.
pub fn perfect_recall_refinement(g: &Game, player: usize) -> Result<(Game, RefinementPlan)> {
    g.check_player(player)?;
    let mut draft = g.to_draft();
    refine_player(g, player, &mut draft);
    let fine = Game::from_draft(&draft)?;
    let plan = refines(&fine, g, player)?.expect("pr_i refines its source");
    Ok((fine, plan))
}

/// `pr(g)`: the refinement applied to every player at once.
pub fn perfect_recall_refinement_all(g: &Game) -> Result<Game> {
    let mut draft = g.to_draft();
    // Each player's split only reads that player's infosets, which earlier
    // passes leave in place, so the passes can share one draft.
    for i in 0..g.players() {
        let current = Game::from_draft(&draft)?;
        refine_player(&current, i, &mut draft);
    }
    Game::from_draft(&draft)
}

/// True iff `candidate ⪰_player pr_player(g)`.
///
/// Requires `candidate ⪰_player g` and perfect recall for `player` in
/// `candidate`; both are checked and reported as errors.
pub fn check_coarsest(g: &Game, player: usize, candidate: &Game) -> Result<bool> {
    if refines(candidate, g, player)?.is_none() {
        return Err(Error::Precondition("candidate does not refine the game".into()));
    }
    if !has_perfect_recall(candidate, player)? {
        return Err(Error::Precondition("candidate lacks perfect recall".into()));
    }
    let (pr, _) = perfect_recall_refinement(g, player)?;
    Ok(refines(candidate, &pr, player)?.is_some())
}

pub const DUMMY_ACTION: &str = "dummy";

/// Inserts a single-action singleton-infoset node above every decision node
/// of `player`, so that `pr_player` of the result gives that player singleton
/// infosets everywhere.
pub fn dummy_node_transform(g: &Game, player: usize) -> Result<Game> {
    g.check_player(player)?;
    let mut draft = g.to_draft();
    let targets: Vec<NodeId> = g
        .node_ids()
        .filter(|&h| g.node(h).owner == Owner::Player(player))
        .collect();
    if targets.is_empty() {
        return Ok(g.clone());
    }
    let mut renamed: HashMap<String, String> = HashMap::new();
    for &h in &targets {
        let name = &g.node(h).name;
        let dummy = format!("{name}~dummy");
        if g.node_by_name(&dummy).is_ok() {
            return Err(Error::Precondition(format!("node id `{dummy}` already in use")));
        }
        renamed.insert(name.clone(), dummy.clone());
        draft.nodes.push(NodeDraft {
            id: dummy.clone(),
            owner: Owner::Player(player),
            actions: vec![DUMMY_ACTION.to_string()],
            children: vec![name.clone()],
            chance_probs: Vec::new(),
            utils: Vec::new(),
        });
        draft.infosets.push(InfosetDraft {
            player: player + 1,
            id: dummy,
            nodes: vec![draft.nodes.last().expect("just pushed").id.clone()],
            actions: vec![DUMMY_ACTION.to_string()],
        });
    }
    let original = g.nodes().len();
    for n in draft.nodes[..original].iter_mut() {
        for c in n.children.iter_mut() {
            if let Some(d) = renamed.get(c) {
                *c = d.clone();
            }
        }
    }
    if let Some(d) = renamed.get(&draft.root) {
        draft.root = d.clone();
    }
    Game::from_draft(&draft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::num::Value;

    #[test]
    fn fig2_splits_two_plus_one() {
        let g = figures::fig2();
        let (pr, plan) = perfect_recall_refinement(&g, 0).unwrap();
        assert_eq!(plan.mapping.len(), 1);
        let sizes: Vec<usize> = plan.mapping[0]
            .fine
            .iter()
            .map(|f| pr.infoset(pr.infoset_by_name(f).unwrap()).nodes.len())
            .collect();
        assert_eq!(sizes, vec![2, 1]);
        assert!(has_perfect_recall(&pr, 0).unwrap());
        assert!(!has_perfect_recall(&g, 0).unwrap());
        assert!(refines(&g, &pr, 0).unwrap().is_none());
    }

    #[test]
    fn refinement_ids_are_stable() {
        let g = figures::fig2();
        let a = perfect_recall_refinement(&g, 0).unwrap().0.to_draft();
        let b = perfect_recall_refinement(&g, 0).unwrap().0.to_draft();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_plan_on_self() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let plan = refines(&g, &g, 0).unwrap().unwrap();
        assert!(plan.is_identity());
    }

    #[test]
    fn dummy_transform_gives_singletons() {
        let g = figures::fig2();
        let d = dummy_node_transform(&g, 0).unwrap();
        assert_eq!(d.nodes().len(), g.nodes().len() + 3);
        let (pr, _) = perfect_recall_refinement(&d, 0).unwrap();
        assert!(pr.infosets().iter().all(|i| i.nodes.len() == 1));
    }

    #[test]
    fn trees_must_match() {
        let a = figures::fig2();
        let b = figures::fig3(&Value::ratio(1, 10)).unwrap();
        assert!(matches!(refines(&a, &b, 0), Err(Error::NotComparable(_))));
    }
}
