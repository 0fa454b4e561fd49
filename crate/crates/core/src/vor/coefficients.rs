use std::collections::BTreeMap;

use num::{BigRational, One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, InfosetId, NodeId};
use crate::num::Value;
use crate::strategies::{expected_utility, node_reach, BehavioralStrategy, StrategyProfile};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafCoefficients {
    pub leaf: String,
    pub am: Value,
    pub chance: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChanceBranching {
    pub node: String,
    pub beta: u64,
}

/// Per-leaf `am` and `χ`, per-chance-node `β`. Independent of utilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub leaves: Vec<LeafCoefficients>,
    pub branching: Vec<ChanceBranching>,
}

fn check_terminal(g: &Game, z: NodeId) -> Result<()> {
    if z.0 >= g.nodes().len() {
        return Err(Error::UnknownNode(format!("#{}", z.0)));
    }
    if !g.node(z).is_terminal() {
        return Err(Error::NotTerminal(g.node(z).name.clone()));
    }
    Ok(())
}

/// Visits per infoset and per (infoset, action) on the path to `z`.
fn occurrences(g: &Game, z: NodeId) -> BTreeMap<InfosetId, (u32, BTreeMap<usize, u32>)> {
    let mut out: BTreeMap<InfosetId, (u32, BTreeMap<usize, u32>)> = BTreeMap::new();
    for (h, a) in g.path(z) {
        if let Some(i) = g.node(h).infoset {
            let e = out.entry(i).or_default();
            e.0 += 1;
            *e.1.entry(a).or_default() += 1;
        }
    }
    out
}

fn ratio(n: u32, d: u32) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `am(z)`: product over revisited infosets of `(n(a)/n(I))^{n(a)}`.
pub fn am_coefficient(g: &Game, z: NodeId) -> Result<BigRational> {
    check_terminal(g, z)?;
    let mut am = BigRational::one();
    for (n_i, actions) in occurrences(g, z).values() {
        if *n_i < 2 {
            continue;
        }
        for &n_a in actions.values() {
            let p = ratio(n_a, *n_i);
            for _ in 0..n_a {
                am *= &p;
            }
        }
    }
    Ok(am)
}

/// The strategy playing empirical path frequencies on the infosets of `z`'s
/// path and uniformly elsewhere; it reaches `z` with probability `am(z)`.
pub fn am_witness(g: &Game, z: NodeId) -> Result<BehavioralStrategy<BigRational>> {
    check_terminal(g, z)?;
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    if g.has_chance() {
        return Err(Error::Precondition("am witness needs a game without chance nodes".into()));
    }
    let occ = occurrences(g, z);
    let mut s = BehavioralStrategy::<BigRational>::uniform(g, 0);
    for (&i, (n_i, actions)) in &occ {
        let row = &mut s.table[g.infoset(i).local_index];
        for (a, p) in row.iter_mut().enumerate() {
            *p = ratio(actions.get(&a).copied().unwrap_or(0), *n_i);
        }
    }
    Ok(s)
}

/// `χ(z)`: product of chance probabilities on the path to `z`.
pub fn chance_coefficient(g: &Game, z: NodeId) -> Result<Value> {
    check_terminal(g, z)?;
    Ok(g.chance_product(z))
}

/// β for every chance node, indexed by node; `None` elsewhere.
fn all_branching(g: &Game) -> Vec<Option<u64>> {
    let mut beta = vec![None; g.nodes().len()];
    // Largest β among chance nodes in each subtree.
    let mut below: Vec<Option<u64>> = vec![None; g.nodes().len()];
    for h in g.subtree(g.root()).into_iter().rev() {
        let node = g.node(h);
        let mut best = node.children.iter().filter_map(|c| below[c.0]).max();
        if node.is_chance() {
            let b: u64 = node
                .children
                .iter()
                .map(|c| below[c.0].unwrap_or(1))
                .fold(0u64, u64::saturating_add);
            beta[h.0] = Some(b);
            best = Some(best.map_or(b, |x| x.max(b)));
        }
        below[h.0] = best;
    }
    beta
}

/// `β(h) = Σ_a b_h(a)`, with `b_h(a)` the largest β below `(h, a)` or 1
/// when there is no chance node below.
pub fn branching_factor(g: &Game, h: NodeId) -> Result<u64> {
    if h.0 >= g.nodes().len() {
        return Err(Error::UnknownNode(format!("#{}", h.0)));
    }
    all_branching(g)[h.0].ok_or_else(|| Error::NotChance(g.node(h).name.clone()))
}

/// Largest β over the chance nodes, or 1 without chance.
pub fn max_branching(g: &Game) -> u64 {
    all_branching(g).into_iter().flatten().max().unwrap_or(1)
}

pub fn coefficient_table(g: &Game) -> CoefficientTable {
    let leaves = g
        .leaves()
        .iter()
        .map(|&z| LeafCoefficients {
            leaf: g.node(z).name.clone(),
            am: Value::Exact(am_coefficient(g, z).expect("leaf")),
            chance: g.chance_product(z),
        })
        .collect();
    let branching = all_branching(g)
        .into_iter()
        .enumerate()
        .filter_map(|(k, b)| {
            b.map(|beta| ChanceBranching {
                node: g.node(NodeId(k)).name.clone(),
                beta,
            })
        })
        .collect();
    CoefficientTable { leaves, branching }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureChanceIdentity {
    /// Leaves reached with positive probability.
    pub leaves: Vec<NodeId>,
    pub chance_sum: Value,
    /// `|Σχ − 1|`.
    pub checksum: f64,
    /// `|U(π) − Σ χ(z) u(z)|` for Player 1.
    pub utility_gap: f64,
}

fn require_pure(g: &Game, pi: &StrategyProfile<f64>) -> Result<StrategyProfile<BigRational>> {
    pi.validate(g)?;
    if !pi.is_pure() {
        return Err(Error::InvalidStrategy("expected a pure strategy".into()));
    }
    Ok(pi.to_exact(1).expect("pure rows are exact"))
}

/// Under a pure strategy the reached leaves carry the whole chance mass and
/// the utility is their χ-weighted sum.
pub fn pure_chance_identity(g: &Game, pi: &StrategyProfile<f64>) -> Result<PureChanceIdentity> {
    let exact = require_pure(g, pi)?;
    let reach = node_reach(g, &exact);
    let leaves: Vec<NodeId> = g.leaves().iter().copied().filter(|z| !reach[z.0].is_zero()).collect();
    let mut chance_sum = Value::zero();
    let mut weighted = Value::zero();
    for &z in &leaves {
        let chi = g.chance_product(z);
        weighted = &weighted + &(&chi * g.utility(z, 0));
        chance_sum = &chance_sum + &chi;
    }
    let checksum = (&chance_sum - &Value::one()).to_f64().abs();
    let utility_gap = if g.is_exact() {
        let u = expected_utility(g, &exact, 0, g.root());
        (&Value::Exact(u) - &weighted).to_f64().abs()
    } else {
        (expected_utility(g, pi, 0, g.root()) - weighted.to_f64()).abs()
    };
    Ok(PureChanceIdentity {
        leaves,
        chance_sum,
        checksum,
        utility_gap,
    })
}

/// A pure strategy reaches at most `β(h)` leaves below a reached chance node `h`.
pub fn beta_leaf_bound(g: &Game, pi: &StrategyProfile<f64>, h: NodeId) -> Result<bool> {
    let exact = require_pure(g, pi)?;
    let beta = branching_factor(g, h)?;
    let reach = node_reach(g, &exact);
    if reach[h.0].is_zero() {
        return Err(Error::Precondition(format!("chance node `{}` is not reached", g.node(h).name)));
    }
    let count = g
        .subtree(h)
        .into_iter()
        .filter(|n| g.node(*n).is_terminal() && !reach[n.0].is_zero())
        .count() as u64;
    Ok(count <= beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::game::GameBuilder;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn leaf_with_utility(g: &Game, u: i64) -> NodeId {
        *g.leaves().iter().find(|&&z| *g.utility(z, 0) == Value::int(u)).unwrap()
    }

    #[test]
    fn lenny_winning_leaf() {
        let g = figures::lenny(4).unwrap();
        let z = g.node_by_name(&figures::lenny_leaf_name(4)).unwrap();
        assert_eq!(am_coefficient(&g, z).unwrap(), q(1, 16));
        let w = am_witness(&g, z).unwrap();
        assert!(w.table.iter().flatten().all(|p| *p == q(1, 2)));
        let pi = StrategyProfile::new(vec![w]);
        assert_eq!(node_reach(&g, &pi)[z.0], q(1, 16));
    }

    #[test]
    fn fig2_coefficients() {
        let g = figures::fig2();
        assert_eq!(am_coefficient(&g, leaf_with_utility(&g, 3)).unwrap(), q(1, 4));
        assert_eq!(chance_coefficient(&g, leaf_with_utility(&g, 1)).unwrap(), Value::ratio(1, 2));
        assert!(am_witness(&g, leaf_with_utility(&g, 3)).is_err());
        assert!(am_coefficient(&g, g.root()).is_err());
    }

    #[test]
    fn dory_branching() {
        let g = figures::dory(3).unwrap();
        assert_eq!(branching_factor(&g, g.root()).unwrap(), 3);
        for &z in g.leaves() {
            assert_eq!(am_coefficient(&g, z).unwrap(), q(1, 1));
        }
        let d2 = figures::dory(2).unwrap();
        for &z in d2.leaves() {
            assert_eq!(chance_coefficient(&d2, z).unwrap(), Value::ratio(1, 2));
        }
    }

    #[test]
    fn nested_chance_branching() {
        let mut b = GameBuilder::new(1, "c");
        let half = || vec![Value::ratio(1, 2); 2];
        b.chance("c", &["l", "r"], &["c1", "c2"], half());
        b.chance("c1", &["l", "r"], &["z1", "z2"], half());
        b.chance("c2", &["l", "r"], &["z3", "z4"], half());
        for z in ["z1", "z2", "z3", "z4"] {
            b.leaf(z, vec![Value::one()]);
        }
        let g = b.build().unwrap();
        assert_eq!(branching_factor(&g, g.root()).unwrap(), 4);
        assert_eq!(branching_factor(&g, g.node_by_name("c1").unwrap()).unwrap(), 2);
        assert!(branching_factor(&g, g.node_by_name("z1").unwrap()).is_err());
    }

    #[test]
    fn dory_pure_identity() {
        let g = figures::dory(2).unwrap();
        let pi = StrategyProfile::pure(&g, &vec![0; g.infosets().len()]).unwrap();
        let id = pure_chance_identity(&g, &pi).unwrap();
        assert_eq!(id.leaves.len(), 2);
        assert_eq!(id.chance_sum, Value::one());
        assert_eq!(id.checksum, 0.0);
        assert_eq!(id.utility_gap, 0.0);
        assert!(beta_leaf_bound(&g, &pi, g.root()).unwrap());
        let mixed = StrategyProfile::uniform(&g);
        assert!(pure_chance_identity(&g, &mixed).is_err());
    }
}
