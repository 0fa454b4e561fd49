//! Behavioral strategies and their evaluation.

mod eval;
mod transform;

pub use eval::{
    expected_utility, infoset_frequency, infoset_reach, node_reach, reach_probability, utility_gradient,
    utility_gradients, LeafMonomials, LeafTerm,
};
pub use transform::{deviate, fix_opponents, lift_strategy, realization_equivalent};

use num::BigRational;

use crate::error::{Error, Result};
use crate::game::{Game, InfosetId, NodeId, Owner};
use crate::num::{approximate, Scalar};

/// Tolerance on row sums of float strategies.
pub const SUM_TOL: f64 = 1e-9;

/// One probability row per infoset of `player`, indexed by the infoset's
/// local index.
#[derive(Clone, Debug, PartialEq)]
pub struct BehavioralStrategy<S = f64> {
    pub player: usize,
    pub table: Vec<Vec<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile<S = f64> {
    pub strategies: Vec<BehavioralStrategy<S>>,
}

/// Rows of every infoset of the game, indexed by global infoset id.
pub type FlatProfile<S = f64> = Vec<Vec<S>>;

fn uniform_row<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::from_ratio(1, n as i64); n]
}

fn unit_row<S: Scalar>(n: usize, a: usize) -> Vec<S> {
    (0..n).map(|k| if k == a { S::one() } else { S::zero() }).collect()
}

pub(crate) fn check_row<S: Scalar>(row: &[S], expected: usize, what: &dyn Fn() -> String) -> Result<()> {
    if row.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} has {} entries for {} actions",
            what(),
            row.len(),
            expected
        )));
    }
    if row.iter().any(|p| *p < S::zero()) {
        return Err(Error::InvalidStrategy(format!("{} has a negative entry", what())));
    }
    let sum = row.iter().cloned().fold(S::zero(), |a, b| a + b);
    let ok = if S::EXACT {
        sum == S::one()
    } else {
        (sum.to_float() - 1.0).abs() <= SUM_TOL
    };
    if !ok {
        return Err(Error::InvalidStrategy(format!("{} sums to {}", what(), sum.to_float())));
    }
    Ok(())
}

impl<S: Scalar> BehavioralStrategy<S> {
    pub fn uniform(g: &Game, player: usize) -> Self {
        BehavioralStrategy {
            player,
            table: g
                .player_infosets(player)
                .iter()
                .map(|&i| uniform_row(g.num_actions(i)))
                .collect(),
        }
    }

    /// One action index per infoset of `player`.
    pub fn pure(g: &Game, player: usize, choices: &[usize]) -> Result<Self> {
        let ids = g.player_infosets(player);
        if choices.len() != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} choices for {} infosets",
                choices.len(),
                ids.len()
            )));
        }
        let mut table = Vec::with_capacity(ids.len());
        for (&i, &a) in ids.iter().zip(choices) {
            let n = g.num_actions(i);
            if a >= n {
                return Err(Error::UnknownAction {
                    infoset: g.infoset(i).name.clone(),
                    action: a,
                });
            }
            table.push(unit_row(n, a));
        }
        Ok(BehavioralStrategy { player, table })
    }

    pub fn validate(&self, g: &Game) -> Result<()> {
        g.check_player(self.player)?;
        let ids = g.player_infosets(self.player);
        if self.table.len() != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "strategy of P{} has {} rows for {} infosets",
                self.player + 1,
                self.table.len(),
                ids.len()
            )));
        }
        for (row, &i) in self.table.iter().zip(ids) {
            check_row(row, g.num_actions(i), &|| format!("row of infoset `{}`", g.infoset(i).name))?;
        }
        Ok(())
    }

    pub fn row(&self, g: &Game, id: InfosetId) -> &[S] {
        &self.table[g.infoset(id).local_index]
    }

    pub fn is_pure(&self) -> bool {
        self.table
            .iter()
            .all(|row| row.iter().all(|p| *p == S::zero() || *p == S::one()))
    }

    /// The chosen action per infoset when the strategy is pure.
    pub fn pure_choices(&self) -> Option<Vec<usize>> {
        self.table
            .iter()
            .map(|row| {
                if row.iter().all(|p| *p == S::zero() || *p == S::one()) {
                    row.iter().position(|p| *p == S::one())
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn to_f64(&self) -> BehavioralStrategy<f64> {
        BehavioralStrategy {
            player: self.player,
            table: self
                .table
                .iter()
                .map(|row| row.iter().map(Scalar::to_float).collect())
                .collect(),
        }
    }
}

impl BehavioralStrategy<f64> {
    /// Rational approximation of every entry, renormalized to sum exactly to one.
    pub fn to_exact(&self, max_den: u64) -> Option<BehavioralStrategy<BigRational>> {
        let table = self
            .table
            .iter()
            .map(|row| snap_row(row, max_den))
            .collect::<Option<Vec<_>>>()?;
        Some(BehavioralStrategy {
            player: self.player,
            table,
        })
    }
}

pub(crate) fn snap_row(row: &[f64], max_den: u64) -> Option<Vec<BigRational>> {
    let mut out: Vec<BigRational> = row
        .iter()
        .map(|&p| approximate(p.max(0.0), max_den))
        .collect::<Option<_>>()?;
    let sum = out.iter().fold(BigRational::from_integer(0.into()), |a, b| a + b);
    if sum == BigRational::from_integer(0.into()) {
        return None;
    }
    if sum != BigRational::from_integer(1.into()) {
        for p in &mut out {
            *p = &*p / &sum;
        }
    }
    Some(out)
}

impl<S: Scalar> StrategyProfile<S> {
    pub fn new(strategies: Vec<BehavioralStrategy<S>>) -> Self {
        StrategyProfile { strategies }
    }

    pub fn uniform(g: &Game) -> Self {
        StrategyProfile {
            strategies: (0..g.players()).map(|i| BehavioralStrategy::uniform(g, i)).collect(),
        }
    }

    /// One action per infoset, by global infoset id.
    pub fn pure(g: &Game, choices: &[usize]) -> Result<Self> {
        if choices.len() != g.infosets().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} choices for {} infosets",
                choices.len(),
                g.infosets().len()
            )));
        }
        let flat = g
            .infosets()
            .iter()
            .zip(choices)
            .map(|(set, &a)| {
                if a < set.actions.len() {
                    Ok(unit_row(set.actions.len(), a))
                } else {
                    Err(Error::UnknownAction {
                        infoset: set.name.clone(),
                        action: a,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_flat(g, flat))
    }

    pub fn validate(&self, g: &Game) -> Result<()> {
        if self.strategies.len() != g.players() {
            return Err(Error::DimensionMismatch(format!(
                "profile has {} strategies for {} players",
                self.strategies.len(),
                g.players()
            )));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if s.player != i {
                return Err(Error::InvalidStrategy(format!(
                    "strategy {} is labelled for P{}",
                    i + 1,
                    s.player + 1
                )));
            }
            s.validate(g)?;
        }
        Ok(())
    }

    pub fn row(&self, g: &Game, id: InfosetId) -> &[S] {
        let set = g.infoset(id);
        &self.strategies[set.player].table[set.local_index]
    }

    pub fn row_mut(&mut self, g: &Game, id: InfosetId) -> &mut Vec<S> {
        let set = g.infoset(id);
        &mut self.strategies[set.player].table[set.local_index]
    }

    /// Probability of taking action `a` at node `h` (chance or decision).
    pub fn action_prob(&self, g: &Game, h: NodeId, a: usize) -> S {
        let node = g.node(h);
        match node.owner {
            Owner::Chance => S::from_value(&node.chance_probs[a]),
            Owner::Player(_) => self.row(g, node.infoset.expect("decision node"))[a].clone(),
            Owner::Terminal => S::zero(),
        }
    }

    pub fn flat(&self, g: &Game) -> FlatProfile<S> {
        g.infosets()
            .iter()
            .map(|set| self.strategies[set.player].table[set.local_index].clone())
            .collect()
    }

    pub fn from_flat(g: &Game, flat: FlatProfile<S>) -> Self {
        let mut strategies: Vec<BehavioralStrategy<S>> = (0..g.players())
            .map(|player| BehavioralStrategy {
                player,
                table: Vec::new(),
            })
            .collect();
        for (set, row) in g.infosets().iter().zip(flat) {
            strategies[set.player].table.push(row);
        }
        StrategyProfile { strategies }
    }

    pub fn is_pure(&self) -> bool {
        self.strategies.iter().all(BehavioralStrategy::is_pure)
    }

    pub fn to_f64(&self) -> StrategyProfile<f64> {
        StrategyProfile {
            strategies: self.strategies.iter().map(BehavioralStrategy::to_f64).collect(),
        }
    }
}

impl StrategyProfile<f64> {
    pub fn to_exact(&self, max_den: u64) -> Option<StrategyProfile<BigRational>> {
        Some(StrategyProfile {
            strategies: self
                .strategies
                .iter()
                .map(|s| s.to_exact(max_den))
                .collect::<Option<_>>()?,
        })
    }
}

/// Flat uniform rows for every infoset.
pub fn uniform_flat<S: Scalar>(g: &Game) -> FlatProfile<S> {
    g.infosets().iter().map(|s| uniform_row(s.actions.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;

    #[test]
    fn pure_and_uniform_validate() {
        let g = figures::fig2();
        let u: StrategyProfile<BigRational> = StrategyProfile::uniform(&g);
        u.validate(&g).unwrap();
        let p: StrategyProfile = StrategyProfile::pure(&g, &[1]).unwrap();
        assert!(p.is_pure());
        assert!(StrategyProfile::<f64>::pure(&g, &[2]).is_err());
    }

    #[test]
    fn bad_rows_are_rejected() {
        let g = figures::fig2();
        let s = BehavioralStrategy {
            player: 0,
            table: vec![vec![0.7, 0.4]],
        };
        assert!(matches!(s.validate(&g), Err(Error::InvalidStrategy(_))));
        let s = BehavioralStrategy {
            player: 0,
            table: vec![vec![1.0]],
        };
        assert!(matches!(s.validate(&g), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn snapping_sums_to_one() {
        let row = snap_row(&[1.0 / 3.0, 2.0 / 3.0 + 1e-13], 1000).unwrap();
        let sum = row.iter().fold(BigRational::from_integer(0.into()), |a, b| a + b);
        assert_eq!(sum, BigRational::from_integer(1.into()));
        assert_eq!(row[0], BigRational::new(1.into(), 3.into()));
    }
}
