use super::{FlatProfile, StrategyProfile};
use crate::error::{Error, Result};
use crate::game::{Game, InfosetId, NodeId, Owner};
use crate::num::Scalar;

/// Reach probability of every node from the root, indexed by node.
pub fn node_reach<S: Scalar>(g: &Game, pi: &StrategyProfile<S>) -> Vec<S> {
    let mut reach = vec![S::zero(); g.nodes().len()];
    reach[g.root().0] = S::one();
    for h in g.subtree(g.root()) {
        let node = g.node(h);
        for (a, &c) in node.children.iter().enumerate() {
            reach[c.0] = reach[h.0].clone() * pi.action_prob(g, h, a);
        }
    }
    reach
}

/// Probability of reaching `to` when play starts at `from`; zero unless
/// `from` lies on the path to `to`.
pub fn reach_probability<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, from: NodeId, to: NodeId) -> S {
    if from == to {
        return S::one();
    }
    if !g.is_ancestor(from, to) {
        return S::zero();
    }
    let mut p = S::one();
    let mut started = false;
    for (n, a) in g.path(to) {
        started |= n == from;
        if started {
            p = p * pi.action_prob(g, n, a);
        }
    }
    p
}

/// Sum of reach over the first-visit nodes of `id`.
pub fn infoset_reach<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, id: InfosetId) -> S {
    let reach = node_reach(g, pi);
    g.first_visit_nodes(id)
        .into_iter()
        .fold(S::zero(), |acc, h| acc + reach[h.0].clone())
}

/// Sum of reach over all nodes of `id`; may exceed one under absentmindedness.
pub fn infoset_frequency<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, id: InfosetId) -> S {
    let reach = node_reach(g, pi);
    g.infoset(id)
        .nodes
        .iter()
        .fold(S::zero(), |acc, h| acc + reach[h.0].clone())
}

/// Expected utility of `player` when play starts at `h`.
pub fn expected_utility<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, player: usize, h: NodeId) -> S {
    let mut total = S::zero();
    let mut stack = vec![(h, S::one())];
    while let Some((n, p)) = stack.pop() {
        let node = g.node(n);
        if node.is_terminal() {
            total = total + p * S::from_value(&node.utils[player]);
            continue;
        }
        for (a, &c) in node.children.iter().enumerate() {
            let q = pi.action_prob(g, n, a);
            if q != S::zero() {
                stack.push((c, p.clone() * q));
            }
        }
    }
    total
}

/// A leaf's reach as a monomial: `chance · Π π(a_k | I_k)` over the decision
/// steps on its path.
#[derive(Clone, Debug)]
pub struct LeafTerm<S> {
    pub leaf: NodeId,
    pub chance: S,
    pub utils: Vec<S>,
    pub steps: Vec<(InfosetId, usize)>,
}

#[derive(Clone, Debug)]
pub struct LeafMonomials<S> {
    pub terms: Vec<LeafTerm<S>>,
    pub dims: Vec<usize>,
}

impl<S: Scalar> LeafMonomials<S> {
    pub fn new(g: &Game) -> Self {
        let terms = g
            .leaves()
            .iter()
            .map(|&z| {
                let mut chance = S::one();
                let mut steps = Vec::new();
                for (n, a) in g.path(z) {
                    let node = g.node(n);
                    match node.owner {
                        Owner::Chance => chance = chance * S::from_value(&node.chance_probs[a]),
                        Owner::Player(_) => steps.push((node.infoset.expect("decision node"), a)),
                        Owner::Terminal => unreachable!("terminal ancestor"),
                    }
                }
                LeafTerm {
                    leaf: z,
                    chance,
                    utils: g.node(z).utils.iter().map(S::from_value).collect(),
                    steps,
                }
            })
            .collect();
        LeafMonomials {
            terms,
            dims: g.infosets().iter().map(|s| s.actions.len()).collect(),
        }
    }

    pub fn term_reach(&self, term: &LeafTerm<S>, flat: &FlatProfile<S>) -> S {
        term.steps
            .iter()
            .fold(term.chance.clone(), |acc, &(i, a)| acc * flat[i.0][a].clone())
    }

    pub fn value(&self, flat: &FlatProfile<S>, player: usize) -> S {
        let zero = S::zero();
        self.terms
            .iter()
            .filter(|t| t.utils[player] != zero)
            .fold(S::zero(), |acc, t| acc + self.term_reach(t, flat) * t.utils[player].clone())
    }

    pub fn values(&self, flat: &FlatProfile<S>) -> Vec<S> {
        let players = self.terms.first().map_or(0, |t| t.utils.len());
        let mut out = vec![S::zero(); players];
        for t in &self.terms {
            let r = self.term_reach(t, flat);
            for (o, u) in out.iter_mut().zip(&t.utils) {
                *o = o.clone() + r.clone() * u.clone();
            }
        }
        out
    }

    /// Partial derivatives of `player`'s utility with respect to every
    /// `π(a | I)`, by global infoset id.
    pub fn gradient(&self, flat: &FlatProfile<S>, player: usize) -> FlatProfile<S> {
        let mut grad: FlatProfile<S> = self.dims.iter().map(|&n| vec![S::zero(); n]).collect();
        let zero = S::zero();
        let mut prefix: Vec<S> = Vec::new();
        for t in &self.terms {
            if t.utils[player] == zero || t.chance == zero {
                continue;
            }
            let w = t.chance.clone() * t.utils[player].clone();
            prefix.clear();
            prefix.push(w);
            for &(i, a) in &t.steps {
                let last = prefix.last().expect("nonempty").clone();
                prefix.push(last * flat[i.0][a].clone());
            }
            let mut suffix = S::one();
            for (k, &(i, a)) in t.steps.iter().enumerate().rev() {
                grad[i.0][a] = grad[i.0][a].clone() + prefix[k].clone() * suffix.clone();
                suffix = suffix * flat[i.0][a].clone();
            }
        }
        grad
    }

    pub fn partial(&self, flat: &FlatProfile<S>, player: usize, id: InfosetId, action: usize) -> S {
        let zero = S::zero();
        let mut total = S::zero();
        for t in &self.terms {
            if t.utils[player] == zero {
                continue;
            }
            for (k, &(i, a)) in t.steps.iter().enumerate() {
                if i != id || a != action {
                    continue;
                }
                let rest = t
                    .steps
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .fold(t.chance.clone(), |acc, (_, &(i2, a2))| acc * flat[i2.0][a2].clone());
                total = total + rest * t.utils[player].clone();
            }
        }
        total
    }
}

/// Exact partial derivative of `player`'s utility with respect to `π(action | id)`.
pub fn utility_gradient<S: Scalar>(
    g: &Game,
    pi: &StrategyProfile<S>,
    player: usize,
    id: InfosetId,
    action: usize,
) -> Result<S> {
    g.check_player(player)?;
    if id.0 >= g.infosets().len() {
        return Err(Error::UnknownInfoset(format!("#{}", id.0)));
    }
    if action >= g.num_actions(id) {
        return Err(Error::UnknownAction {
            infoset: g.infoset(id).name.clone(),
            action,
        });
    }
    Ok(LeafMonomials::new(g).partial(&pi.flat(g), player, id, action))
}

/// Gradient rows for every infoset of `player`, by local index.
pub fn utility_gradients<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, player: usize) -> Result<Vec<Vec<S>>> {
    g.check_player(player)?;
    let grad = LeafMonomials::new(g).gradient(&pi.flat(g), player);
    Ok(g.player_infosets(player).iter().map(|i| grad[i.0].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::strategies::BehavioralStrategy;
    use num::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn fig2_at(p: BigRational) -> (Game, StrategyProfile<BigRational>) {
        let g = figures::fig2();
        let one = q(1, 1);
        let pi = StrategyProfile::new(vec![BehavioralStrategy {
            player: 0,
            table: vec![vec![p.clone(), one - p]],
        }]);
        (g, pi)
    }

    #[test]
    fn fig2_reach_and_utility() {
        let (g, pi) = fig2_at(q(1, 3));
        let z = g.node_by_name("b.R").unwrap();
        assert_eq!(reach_probability(&g, &pi, g.root(), z), q(1, 9));
        assert_eq!(expected_utility(&g, &pi, 0, g.root()), q(2, 3));
        let i = g.infoset_by_name("I").unwrap();
        // Stationary along the simplex: both partials agree.
        let l = utility_gradient(&g, &pi, 0, i, 0).unwrap();
        let r = utility_gradient(&g, &pi, 0, i, 1).unwrap();
        assert_eq!(l - r, q(0, 1));
    }

    #[test]
    fn gradient_matches_closed_form() {
        // U(p) = 3/2 p(1-p) + (1-p)/2 as a polynomial in π(L), π(R) separately:
        // ∂U/∂π(L) = 1/2·π(R)·3 at b plus nothing else.
        let (g, pi) = fig2_at(q(1, 4));
        let rows = utility_gradients(&g, &pi, 0).unwrap();
        assert_eq!(rows[0][0], q(3, 2) * q(3, 4));
        // ∂U/∂π(R) = 1/2·π(L)·3 + 1/2·1.
        assert_eq!(rows[0][1], q(3, 2) * q(1, 4) + q(1, 2));
    }

    #[test]
    fn lenny_reach_versus_frequency() {
        let g = figures::lenny(2).unwrap();
        let pi: StrategyProfile<BigRational> = StrategyProfile::uniform(&g);
        let i = g.infoset_by_name("I").unwrap();
        assert_eq!(infoset_reach(&g, &pi, i), q(1, 1));
        assert_eq!(infoset_frequency(&g, &pi, i), q(3, 2));
    }

    #[test]
    fn leaf_reach_sums_to_one() {
        let g = figures::dory(3).unwrap();
        let pi: StrategyProfile<BigRational> = StrategyProfile::uniform(&g);
        let reach = node_reach(&g, &pi);
        let total = g.leaves().iter().fold(q(0, 1), |a, z| a + reach[z.0].clone());
        assert_eq!(total, q(1, 1));
    }
}
