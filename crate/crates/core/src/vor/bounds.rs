use num::{BigRational, One};

use super::coefficients::{am_coefficient, max_branching};
use crate::error::{Error, Result};
use crate::game::{Game, NodeId};
use crate::num::Value;
use crate::recall::perfect_recall_refinement;
use crate::solvers::{optimal_strategy, SolverConfig};

fn single_player(g: &Game) -> Result<()> {
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    Ok(())
}

/// First leaf maximizing `key`; leaves are in node order.
fn argmax_leaf(g: &Game, key: impl Fn(NodeId) -> Value) -> (NodeId, Value) {
    let mut best: Option<(NodeId, Value)> = None;
    for &z in g.leaves() {
        let v = key(z);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((z, v));
        }
    }
    best.expect("a game has at least one leaf")
}

fn positive(v: &Value, what: &str) -> Result<()> {
    if *v > Value::zero() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} must be positive")))
    }
}

/// Bounds on `VoR^OPT` from absentmindedness coefficients, for games without
/// chance: `max u / max am·u` and `1/am(z*)` at the first utility maximizer.
pub fn bound_am(g: &Game) -> Result<(Value, Value)> {
    single_player(g)?;
    if g.has_chance() {
        return Err(Error::Precondition("bound needs a game without chance nodes".into()));
    }
    let am = |z: NodeId| Value::Exact(am_coefficient(g, z).expect("leaf"));
    let (z_star, max_u) = argmax_leaf(g, |z| g.utility(z, 0).clone());
    let (_, max_amu) = argmax_leaf(g, |z| &am(z) * g.utility(z, 0));
    positive(&max_amu, "the largest am(z)·u(z)")?;
    let bound1 = &max_u / &max_amu;
    let bound2 = &Value::one() / &am(z_star);
    Ok((bound1, bound2))
}

/// `Π min(n(I), |A_I|)^{n(I)}` over infosets visited more than once on the
/// path to `z`; dominates `1/am(z)`.
pub fn bound_am_entropy(g: &Game, z: NodeId) -> Result<BigRational> {
    if !g.node(z).is_terminal() {
        return Err(Error::NotTerminal(g.node(z).name.clone()));
    }
    let mut visits = vec![0u32; g.infosets().len()];
    for (h, _) in g.path(z) {
        if let Some(i) = g.node(h).infoset {
            visits[i.0] += 1;
        }
    }
    let mut out = BigRational::one();
    for (k, &n) in visits.iter().enumerate() {
        if n < 2 {
            continue;
        }
        let base = (n as usize).min(g.infosets()[k].actions.len());
        out *= BigRational::from_integer(num::BigInt::from(base).pow(n));
    }
    Ok(out)
}

/// Bounds on `VoR^OPT` from chance, for games without absentmindedness:
/// `OPT(pr_1) / max χ·u` and the largest branching factor.
pub fn bound_chance(g: &Game, cfg: &SolverConfig) -> Result<(Value, Value)> {
    single_player(g)?;
    if g.any_absentmindedness() {
        return Err(Error::Precondition("bound needs a game without absentmindedness".into()));
    }
    let (pr, _) = perfect_recall_refinement(g, 0)?;
    let opt = optimal_strategy(&pr, cfg)?.utilities[0].clone();
    let (_, max_chi_u) = argmax_leaf(g, |z| &g.chance_product(z) * g.utility(z, 0));
    positive(&max_chi_u, "the largest χ(z)·u(z)")?;
    Ok((&opt / &max_chi_u, Value::int(max_branching(g) as i64)))
}

/// `max_{z,h} β(h)/am(z)`, with 1 for an empty factor. Holds for every
/// utility assignment on `g`'s tree and infosets.
pub fn bound_composed(g: &Game) -> Result<Value> {
    single_player(g)?;
    let inv_am = g
        .leaves()
        .iter()
        .map(|&z| am_coefficient(g, z).expect("leaf").recip())
        .max()
        .unwrap_or_else(BigRational::one);
    Ok(Value::Exact(inv_am * BigRational::from_integer(max_branching(g).into())))
}
