//! Partial-recall refinements: single-infoset splits bounded above by
//! `pr_i`, enumeration of k-split refinements, and the exhaustive k-best
//! search.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, NodeId};
use crate::num::Value;
use crate::recall::{perfect_recall_refinement, refines};
use crate::solvers::{edt_nash_check, enumerate_equilibria, optimal_strategy, Concept, ConceptKind, Selector, SolverConfig};
use crate::strategies::StrategyProfile;

/// Splits one infoset of `player` into two nonempty node sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStep {
    pub player: usize,
    pub infoset: String,
    pub part1: Vec<String>,
    pub part2: Vec<String>,
}

/// Infoset partition of one player as sorted node-index blocks, sorted.
pub type Partition = Vec<Vec<usize>>;

/// True iff `pr_i(g) ⪰_i g_mid ⪰_i g`.
pub fn is_partial_refinement(g_mid: &Game, g: &Game, player: usize) -> Result<bool> {
    if refines(g_mid, g, player)?.is_none() {
        return Ok(false);
    }
    let (pr, _) = perfect_recall_refinement(g, player)?;
    Ok(refines(&pr, g_mid, player)?.is_some())
}

/// The `pr_i` class of every decision node of `player`, by node index.
fn recall_classes(g: &Game, player: usize) -> Result<BTreeMap<usize, usize>> {
    let (pr, _) = perfect_recall_refinement(g, player)?;
    let mut out = BTreeMap::new();
    for &i in pr.player_infosets(player) {
        for h in &pr.infoset(i).nodes {
            let name = &pr.node(*h).name;
            out.insert(g.node_by_name(name)?.0, i.0);
        }
    }
    Ok(out)
}

fn resolve(g: &Game, names: &[String]) -> Result<BTreeSet<usize>> {
    names.iter().map(|n| g.node_by_name(n).map(|h| h.0)).collect()
}

/// Builds the game whose `player` partition is `partition`. Blocks keep the
/// name of the infoset they came from, suffixed `/1`, `/2`, ... when that
/// infoset was divided.
pub fn with_partition(g: &Game, player: usize, partition: &[Vec<usize>]) -> Result<Game> {
    let origin = |b: &Vec<usize>| g.node(NodeId(b[0])).infoset.expect("decision node");
    let mut per_origin: BTreeMap<usize, usize> = BTreeMap::new();
    for b in partition {
        if b.is_empty() {
            return Err(Error::InvalidSplit("empty block".into()));
        }
        *per_origin.entry(origin(b).0).or_default() += 1;
    }
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let parts = partition
        .iter()
        .map(|b| {
            let o = origin(b);
            let name = &g.infoset(o).name;
            let label = if per_origin[&o.0] == 1 {
                name.clone()
            } else {
                let k = seen.entry(o.0).or_default();
                *k += 1;
                format!("{name}/{k}")
            };
            (label, b.iter().map(|&h| NodeId(h)).collect())
        })
        .collect();
    g.with_player_partition(player, parts)
}

/// Performs one split. The parts must partition the infoset and may not
/// separate nodes that `pr_i` keeps together.
pub fn apply_split(g: &Game, step: &SplitStep) -> Result<Game> {
    g.check_player(step.player)?;
    let id = g.infoset_by_name(&step.infoset)?;
    let set = g.infoset(id);
    if set.player != step.player {
        return Err(Error::InvalidSplit(format!(
            "infoset `{}` belongs to P{}, not P{}",
            set.name,
            set.player + 1,
            step.player + 1
        )));
    }
    let a = resolve(g, &step.part1)?;
    let b = resolve(g, &step.part2)?;
    let all: BTreeSet<usize> = set.nodes.iter().map(|h| h.0).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidSplit("both parts must be nonempty".into()));
    }
    if !a.is_disjoint(&b) || a.union(&b).copied().collect::<BTreeSet<_>>() != all || a.len() + b.len() != all.len() {
        return Err(Error::InvalidSplit(format!("parts do not partition infoset `{}`", set.name)));
    }
    let classes = recall_classes(g, step.player)?;
    let class_of = |s: &BTreeSet<usize>| s.iter().map(|h| classes[h]).collect::<BTreeSet<_>>();
    if let Some(c) = class_of(&a).intersection(&class_of(&b)).next() {
        let members: Vec<&str> = all
            .iter()
            .filter(|h| classes[h] == *c)
            .map(|&h| g.node(NodeId(h)).name.as_str())
            .collect();
        return Err(Error::NotRecallConsistent(format!(
            "nodes {members:?} share an observation history and must stay together"
        )));
    }
    let mut partition: Partition = g
        .canonical_partition(step.player)
        .into_iter()
        .filter(|blk| blk.first().is_none_or(|h| !all.contains(h)))
        .collect();
    partition.push(a.into_iter().collect());
    partition.push(b.into_iter().collect());
    partition.sort();
    with_partition(g, step.player, &partition)
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub game: Game,
    pub partition: Partition,
    /// Splits needed to reach it from the source game.
    pub splits: usize,
}

/// All partitions reachable with at most `k` recall-consistent splits,
/// in order of split count, then partition.
pub fn enumerate_k_partitions(g: &Game, player: usize, k: usize, cap: usize) -> Result<Vec<(Partition, usize)>> {
    g.check_player(player)?;
    let classes = recall_classes(g, player)?;
    let start = g.canonical_partition(player);
    let mut out = vec![(start.clone(), 0)];
    let mut seen: BTreeSet<Partition> = BTreeSet::from([start.clone()]);
    let mut frontier = vec![start];
    for level in 1..=k {
        let mut next = BTreeSet::new();
        for part in &frontier {
            for (bi, block) in part.iter().enumerate() {
                let mut atoms: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &h in block {
                    atoms.entry(classes[&h]).or_default().push(h);
                }
                let atoms: Vec<Vec<usize>> = atoms.into_values().collect();
                let m = atoms.len();
                if m < 2 {
                    continue;
                }
                if m > 40 {
                    return Err(Error::CapExceeded(format!("block with {m} recall classes")));
                }
                // The first atom always stays in the first part.
                for mask in 1u64..(1u64 << (m - 1)) {
                    let (mut x, mut y) = (atoms[0].clone(), Vec::new());
                    for (j, atom) in atoms.iter().enumerate().skip(1) {
                        if mask & (1 << (j - 1)) != 0 {
                            y.extend(atom);
                        } else {
                            x.extend(atom);
                        }
                    }
                    x.sort_unstable();
                    y.sort_unstable();
                    let mut p: Partition = part
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != bi)
                        .map(|(_, b)| b.clone())
                        .collect();
                    p.push(x);
                    p.push(y);
                    p.sort();
                    if !seen.contains(&p) {
                        if seen.len() >= cap {
                            return Err(Error::CapExceeded(format!("more than {cap} refinements")));
                        }
                        seen.insert(p.clone());
                        next.insert(p);
                    }
                }
            }
        }
        out.extend(next.iter().map(|p| (p.clone(), level)));
        frontier = next.into_iter().collect();
        if frontier.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Every game reachable from `g` by at most `k` recall-consistent splits of
/// `player`'s infosets, deduplicated by partition; `k = 0` gives `g` alone.
pub fn enumerate_k_refinements(g: &Game, player: usize, k: usize, cap: usize) -> Result<Vec<Refinement>> {
    enumerate_k_partitions(g, player, k, cap)?
        .into_iter()
        .map(|(partition, splits)| {
            let game = with_partition(g, player, &partition)?;
            Ok(Refinement {
                game,
                partition,
                splits,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Scored {
    pub partition: Partition,
    pub splits: usize,
    pub utility: Value,
}

#[derive(Clone, Debug)]
pub struct KBest {
    pub game: Game,
    pub utility: Value,
    pub splits: usize,
    /// Every candidate with its optimal utility, in enumeration order.
    pub table: Vec<Scored>,
}

fn strictly_better(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x > y,
        _ => a.to_f64() > b.to_f64() + 1e-12 * b.to_f64().abs().max(1.0),
    }
}

/// Scores every k-split refinement of Player 1 by its optimal utility and
/// returns the best; ties go to fewer splits, then the smaller partition.
pub fn k_best_partial(g: &Game, k: usize, cfg: &SolverConfig) -> Result<KBest> {
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    let mut table = Vec::new();
    let mut best: Option<(Game, Value, usize)> = None;
    for r in enumerate_k_refinements(g, 0, k, cfg.max_refinements)? {
        let u = optimal_strategy(&r.game, cfg)?.utilities[0].clone();
        table.push(Scored {
            partition: r.partition,
            splits: r.splits,
            utility: u.clone(),
        });
        if best.as_ref().is_none_or(|(_, b, _)| strictly_better(&u, b)) {
            best = Some((r.game, u, r.splits));
        }
    }
    let (game, utility, splits) = best.expect("k = 0 always yields the game itself");
    Ok(KBest {
        game,
        utility,
        splits,
        table,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialRegression {
    /// Player 1's utility at each EDT-Nash class of the coarse game.
    pub coarse_classes: Vec<f64>,
    /// The coarse classes all play L at the root.
    pub coarse_plays_left: bool,
    pub fine_rr_passes: bool,
    pub fine_rr_utility: f64,
    pub fine_ll_passes: bool,
    pub fine_ll_utility: f64,
}

impl PartialRegression {
    /// The coarse game has a single class worth 2 and the refined game
    /// admits the worse R/R equilibrium.
    pub fn holds(&self) -> bool {
        self.coarse_classes.len() == 1
            && (self.coarse_classes[0] - 2.0).abs() <= 1e-6
            && self.coarse_plays_left
            && self.fine_rr_passes
            && (self.fine_rr_utility - 1.0).abs() <= 1e-9
            && self.fine_ll_passes
    }
}

/// The partial-recall regression: `coarse` has one EDT-Nash class, and its
/// one-split refinement `fine` admits a worse one at R/R.
pub fn edt_nash_partial_regression(coarse: &Game, fine: &Game, cfg: &SolverConfig) -> Result<PartialRegression> {
    let classes = enumerate_equilibria(coarse, Concept::new(ConceptKind::EdtNash, Selector::Any), cfg)?;
    let root_set = coarse.node(coarse.root()).infoset.expect("root decision");
    let coarse_plays_left = classes.iter().all(|r| r.profile.row(coarse, root_set)[0] > 1.0 - 1e-6);
    let pure = |choice: usize| -> Result<(bool, f64)> {
        let pi = StrategyProfile::<f64>::pure(fine, &vec![choice; fine.infosets().len()])?;
        let passed = edt_nash_check(fine, &pi, cfg)?.passed;
        let u = crate::strategies::expected_utility(fine, &pi, 0, fine.root());
        Ok((passed, u))
    };
    let (fine_rr_passes, fine_rr_utility) = pure(1)?;
    let (fine_ll_passes, fine_ll_utility) = pure(0)?;
    Ok(PartialRegression {
        coarse_classes: classes.iter().map(|r| r.p1()).collect(),
        coarse_plays_left,
        fine_rr_passes,
        fine_rr_utility,
        fine_ll_passes,
        fine_ll_utility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{figures, x3c_game};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn fig5_split_off_root() {
        let a = figures::fig5a();
        let step = SplitStep {
            player: 0,
            infoset: "I".into(),
            part1: names(&["root"]),
            part2: names(&["a", "b"]),
        };
        let b = apply_split(&a, &step).unwrap();
        assert_eq!(b.canonical_partition(0), figures::fig5b().canonical_partition(0));
        assert!(is_partial_refinement(&b, &a, 0).unwrap());
        assert!(is_partial_refinement(&a, &a, 0).unwrap());
        let (pr, _) = perfect_recall_refinement(&a, 0).unwrap();
        assert!(is_partial_refinement(&pr, &a, 0).unwrap());
    }

    #[test]
    fn invalid_splits() {
        let a = figures::fig5a();
        let mut step = SplitStep {
            player: 0,
            infoset: "I".into(),
            part1: names(&["root"]),
            part2: names(&["a"]),
        };
        assert!(matches!(apply_split(&a, &step), Err(Error::InvalidSplit(_))));
        step.part2 = vec![];
        assert!(matches!(apply_split(&a, &step), Err(Error::InvalidSplit(_))));
        let b = figures::fig5b();
        let single = SplitStep {
            player: 0,
            infoset: "I0".into(),
            part1: names(&["root"]),
            part2: vec![],
        };
        assert!(apply_split(&b, &single).is_err());
    }

    #[test]
    fn fig2_split_across_history_is_rejected() {
        // a and c share the empty own history; b follows a.
        let g = figures::fig2();
        let step = SplitStep {
            player: 0,
            infoset: "I".into(),
            part1: names(&["a"]),
            part2: names(&["b", "c"]),
        };
        assert!(matches!(apply_split(&g, &step), Err(Error::NotRecallConsistent(_))));
        let ok = SplitStep {
            player: 0,
            infoset: "I".into(),
            part1: names(&["a", "c"]),
            part2: names(&["b"]),
        };
        let fine = apply_split(&g, &ok).unwrap();
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        assert_eq!(fine.canonical_partition(0), pr.canonical_partition(0));
    }

    #[test]
    fn fig5_enumeration() {
        let a = figures::fig5a();
        let zero = enumerate_k_refinements(&a, 0, 0, 100).unwrap();
        assert_eq!(zero.len(), 1);
        let one = enumerate_k_refinements(&a, 0, 1, 100).unwrap();
        // Atoms: {root}, {a}, {b}; three ways to split them in two.
        assert_eq!(one.len(), 4);
        let target = figures::fig5b().canonical_partition(0);
        assert!(one.iter().any(|r| r.partition == target));
        for r in &one {
            assert!(is_partial_refinement(&r.game, &a, 0).unwrap());
        }
        assert!(enumerate_k_refinements(&a, 0, 2, 2).is_err());
    }

    #[test]
    fn x3c_yes_instance() {
        let (g, k) = x3c_game(6, &[[1, 2, 3], [4, 5, 6], [1, 2, 4]]).unwrap();
        let cfg = SolverConfig::default();
        let best = k_best_partial(&g, k, &cfg).unwrap();
        assert_eq!(best.utility, Value::one());
        assert_eq!(best.splits, 1);
        let base = k_best_partial(&g, 0, &cfg).unwrap();
        assert_eq!(base.utility, Value::ratio(1, 2));
    }

    #[test]
    fn fig5_regression() {
        let r = edt_nash_partial_regression(&figures::fig5a(), &figures::fig5b(), &SolverConfig::default()).unwrap();
        assert!(r.holds(), "{r:?}");
    }
}
