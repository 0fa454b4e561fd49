use super::{check_row, node_reach, BehavioralStrategy, StrategyProfile};
use crate::error::{Error, Result};
use crate::game::{Game, InfosetDraft, InfosetId, Owner};
use crate::num::{Scalar, Value};
use crate::recall::{refines, RefinementPlan};

/// `π^{I→σ}`: the profile with the row of `id` replaced by `sigma`.
pub fn deviate<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, id: InfosetId, sigma: &[S]) -> Result<StrategyProfile<S>> {
    check_row(sigma, g.num_actions(id), &|| "deviation".to_string())?;
    let mut out = pi.clone();
    *out.row_mut(g, id) = sigma.to_vec();
    Ok(out)
}

/// Copies each coarse row to every fine infoset inside it. `plan` must be the
/// refinement witness for `fine ⪰ coarse`; other players' rows are carried
/// over node by node.
pub fn lift_strategy<S: Scalar>(
    coarse: &Game,
    fine: &Game,
    plan: &RefinementPlan,
    pi: &StrategyProfile<S>,
) -> Result<StrategyProfile<S>> {
    match refines(fine, coarse, plan.player)? {
        Some(actual) if actual == *plan => {}
        Some(_) => return Err(Error::PlanMismatch("plan differs from the refinement witness".into())),
        None => return Err(Error::PlanMismatch("fine game does not refine the coarse game".into())),
    }
    pi.validate(coarse)?;
    let mut flat = Vec::with_capacity(fine.infosets().len());
    for set in fine.infosets() {
        let mut source = None;
        for &h in &set.nodes {
            let ch = coarse.node_by_name(&fine.node(h).name)?;
            let ci = coarse.node(ch).infoset.expect("decision node");
            match source {
                None => source = Some(ci),
                Some(s) if s == ci => {}
                Some(_) => {
                    return Err(Error::PlanMismatch(format!(
                        "infoset `{}` straddles two coarse infosets",
                        set.name
                    )))
                }
            }
        }
        let ci = source.ok_or_else(|| Error::PlanMismatch(format!("infoset `{}` is empty", set.name)))?;
        flat.push(pi.row(coarse, ci).to_vec());
    }
    Ok(StrategyProfile::from_flat(fine, flat))
}

/// True when every node is reached with probabilities within `tol`.
pub fn realization_equivalent<S: Scalar>(g: &Game, a: &StrategyProfile<S>, b: &StrategyProfile<S>, tol: f64) -> bool {
    let ra = node_reach(g, &a.to_f64());
    let rb = node_reach(g, &b.to_f64());
    ra.iter().zip(&rb).all(|(x, y)| (x - y).abs() <= tol)
}

fn normalized_values<S: Scalar>(row: &[S]) -> Vec<Value> {
    if S::EXACT {
        return row.iter().map(Scalar::to_value).collect();
    }
    let sum: f64 = row.iter().map(Scalar::to_float).sum();
    row.iter().map(|p| Value::Float(p.to_float().max(0.0) / sum)).collect()
}

/// The single-player game seen by `player` when everyone else follows `pi`:
/// opponents' nodes become chance nodes. The result's only player is the
/// former `player`, with its infosets, utilities and node ids unchanged.
pub fn fix_opponents<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, player: usize) -> Result<Game> {
    g.check_player(player)?;
    if g.players() == 1 {
        return Ok(g.clone());
    }
    for s in &pi.strategies {
        if s.player != player {
            s.validate(g)?;
        }
    }
    let mut draft = g.to_draft();
    draft.players = 1;
    for (k, n) in draft.nodes.iter_mut().enumerate() {
        let h = crate::game::NodeId(k);
        match n.owner {
            Owner::Player(j) if j == player => n.owner = Owner::Player(0),
            Owner::Player(_) => {
                let id = g.node(h).infoset.expect("decision node");
                n.owner = Owner::Chance;
                n.chance_probs = normalized_values(pi.row(g, id));
            }
            Owner::Terminal => n.utils = vec![n.utils[player].clone()],
            Owner::Chance => {}
        }
    }
    draft.infosets = draft
        .infosets
        .into_iter()
        .filter(|d| d.player == player + 1)
        .map(|d| InfosetDraft { player: 1, ..d })
        .collect();
    Game::from_draft(&draft)
}

impl<S: Scalar> StrategyProfile<S> {
    /// Player `player`'s strategy re-labelled as the sole player of a
    /// [`fix_opponents`] game.
    pub fn single(&self, player: usize) -> StrategyProfile<S> {
        let s = &self.strategies[player];
        StrategyProfile::new(vec![BehavioralStrategy {
            player: 0,
            table: s.table.clone(),
        }])
    }

    /// Replaces `player`'s strategy with the sole strategy of `single`.
    pub fn with_player(&self, player: usize, single: &StrategyProfile<S>) -> StrategyProfile<S> {
        let mut out = self.clone();
        out.strategies[player] = BehavioralStrategy {
            player,
            table: single.strategies[0].table.clone(),
        };
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::recall::perfect_recall_refinement;
    use crate::strategies::expected_utility;
    use num::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn lift_preserves_fig2_utility() {
        let g = figures::fig2();
        let (pr, plan) = perfect_recall_refinement(&g, 0).unwrap();
        let pi = StrategyProfile::new(vec![BehavioralStrategy {
            player: 0,
            table: vec![vec![q(1, 3), q(2, 3)]],
        }]);
        let lifted = lift_strategy(&g, &pr, &plan, &pi).unwrap();
        assert_eq!(expected_utility(&pr, &lifted, 0, pr.root()), q(2, 3));
        assert_eq!(lifted.strategies[0].table.len(), 2);
    }

    #[test]
    fn fig1_opponent_fixed_to_t() {
        let g = figures::fig1(&Value::ratio(1, 100)).unwrap();
        let pi: StrategyProfile<BigRational> = StrategyProfile::pure(&g, &[0, 0]).unwrap();
        let single = fix_opponents(&g, &pi, 0).unwrap();
        assert_eq!(single.players(), 1);
        assert_eq!(single.chance_nodes().count(), 1);
        let u = expected_utility(&single, &pi.single(0), 0, single.root());
        assert_eq!(u, expected_utility(&g, &pi, 0, g.root()));
    }

    #[test]
    fn deviation_replaces_one_row() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let pi: StrategyProfile<BigRational> = StrategyProfile::pure(&g, &[0, 0]).unwrap();
        assert_eq!(expected_utility(&g, &pi, 0, g.root()), q(1, 1));
        let i1 = g.infoset_by_name("I1").unwrap();
        let dev = deviate(&g, &pi, i1, &[q(0, 1), q(1, 1)]).unwrap();
        assert_eq!(expected_utility(&g, &dev, 0, g.root()), q(1, 10));
        assert!(deviate(&g, &pi, i1, &[q(1, 1)]).is_err());
    }

    #[test]
    fn unreached_differences_are_invisible() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let a: StrategyProfile = StrategyProfile::pure(&g, &[0, 0]).unwrap();
        let b: StrategyProfile = StrategyProfile::pure(&g, &[0, 1]).unwrap();
        assert!(!realization_equivalent(&g, &a, &b, 1e-9));
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        // In pr_1 the b-side infoset is unreached after L.
        let c: StrategyProfile = StrategyProfile::pure(&pr, &[0, 0, 0]).unwrap();
        let d: StrategyProfile = StrategyProfile::pure(&pr, &[0, 0, 1]).unwrap();
        assert!(realization_equivalent(&pr, &c, &d, 1e-9));
    }
}
