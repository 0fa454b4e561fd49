use num::BigRational;

use super::model::Model;
use super::{optimal_strategy, Certification, SolverConfig};
use crate::error::{Error, Result};
use crate::game::{Game, InfosetId};
use crate::num::Scalar;
use crate::strategies::{check_row, fix_opponents, FlatProfile, StrategyProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub passed: bool,
    pub residual: f64,
    /// The residual was computed in exact arithmetic.
    pub exact: bool,
}

impl CheckResult {
    fn new(residual: f64, exact: bool, tol: f64) -> Self {
        CheckResult {
            passed: residual <= tol,
            residual,
            exact,
        }
    }
}

fn check_infoset(g: &Game, id: InfosetId) -> Result<()> {
    if id.0 >= g.infosets().len() {
        return Err(Error::UnknownInfoset(format!("#{}", id.0)));
    }
    Ok(())
}

/// Gain of `player` from replacing the row of `id` by the best σ, applied
/// at every node of the infoset.
pub fn edt_incentive<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, player: usize, id: InfosetId) -> Result<S> {
    pi.validate(g)?;
    g.check_player(player)?;
    check_infoset(g, id)?;
    let model = Model::<S>::new(g);
    Ok(model.incentive(&pi.flat(g), id, player, 10_000).0)
}

/// Largest single-infoset incentive over the infosets of `players` (all
/// players when `None`), each judged by its owner.
pub(crate) fn edt_residual<S: Scalar>(
    model: &Model<S>,
    flat: &FlatProfile<S>,
    player: Option<usize>,
    max_iters: usize,
) -> (f64, bool) {
    let mut worst = 0.0f64;
    let mut exact = true;
    for (k, set) in model.game.infosets().iter().enumerate() {
        if set.actions.len() < 2 || player.is_some_and(|p| p != set.player) {
            continue;
        }
        let (gain, ex) = model.incentive(flat, InfosetId(k), set.player, max_iters);
        exact &= ex;
        worst = worst.max(gain.to_float());
        if S::EXACT && ex && gain > S::zero() && gain.to_float() == 0.0 {
            worst = worst.max(f64::MIN_POSITIVE);
        }
    }
    (worst, exact)
}

/// Every profile is checked for all players at once.
pub fn edt_check<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, cfg: &SolverConfig) -> Result<CheckResult> {
    pi.validate(g)?;
    let model = Model::<S>::new(g);
    let (r, exact) = edt_residual(&model, &pi.flat(g), None, cfg.max_iters);
    Ok(CheckResult::new(r, exact, cfg.eq_tol))
}

/// First-order estimate of the deviation `π → π^{I→σ}`.
pub fn cdt_utility<S: Scalar>(
    g: &Game,
    pi: &StrategyProfile<S>,
    player: usize,
    id: InfosetId,
    sigma: &[S],
) -> Result<S> {
    pi.validate(g)?;
    g.check_player(player)?;
    check_infoset(g, id)?;
    check_row(sigma, g.num_actions(id), &|| "deviation".to_string())?;
    let model = Model::<S>::new(g);
    let flat = pi.flat(g);
    let grad = model.gradient(&flat, player);
    let u = model.utility(&flat, player);
    Ok(sigma
        .iter()
        .zip(&flat[id.0])
        .zip(&grad[id.0])
        .fold(u, |acc, ((s, p), v)| acc + (s.clone() - p.clone()) * v.clone()))
}

fn kkt_gap<S: Scalar>(row: &[S], grad: &[S], support_tol: f64) -> S {
    let max = grad.iter().cloned().reduce(|a, b| if b > a { b } else { a });
    let min_supp = grad
        .iter()
        .zip(row)
        .filter(|(_, p)| p.to_float() > support_tol)
        .map(|(v, _)| v.clone())
        .reduce(|a, b| if b < a { b } else { a });
    match (max, min_supp) {
        (Some(m), Some(s)) if m > s => m - s,
        _ => S::zero(),
    }
}

pub(crate) fn kkt_residual<S: Scalar>(
    model: &Model<S>,
    flat: &FlatProfile<S>,
    player: Option<usize>,
    support_tol: f64,
) -> f64 {
    let g = model.game;
    let players: Vec<usize> = match player {
        Some(p) => vec![p],
        None => (0..g.players()).collect(),
    };
    let mut worst = 0.0f64;
    for p in players {
        let grad = model.gradient(flat, p);
        for &id in g.player_infosets(p) {
            let gap = kkt_gap(&flat[id.0], &grad[id.0], support_tol);
            worst = worst.max(gap.to_float());
            if gap > S::zero() && gap.to_float() == 0.0 {
                worst = worst.max(f64::MIN_POSITIVE);
            }
        }
    }
    worst
}

/// KKT conditions of `player`'s utility over the product of its simplices.
pub fn kkt_check<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, player: usize, cfg: &SolverConfig) -> Result<CheckResult> {
    pi.validate(g)?;
    g.check_player(player)?;
    let model = Model::<S>::new(g);
    let r = kkt_residual(&model, &pi.flat(g), Some(player), cfg.support_tol);
    Ok(CheckResult::new(r, S::EXACT, cfg.eq_tol))
}

/// KKT conditions for every player at once.
pub fn cdt_check<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, cfg: &SolverConfig) -> Result<CheckResult> {
    pi.validate(g)?;
    let model = Model::<S>::new(g);
    let r = kkt_residual(&model, &pi.flat(g), None, cfg.support_tol);
    Ok(CheckResult::new(r, S::EXACT, cfg.eq_tol))
}

/// Residual is the largest gain any player obtains from a best response,
/// found by the optimal-strategy solver on the game with the others fixed
/// and by single-infoset deviations.
pub fn nash_check<S: Scalar>(g: &Game, pi: &StrategyProfile<S>, cfg: &SolverConfig) -> Result<CheckResult> {
    pi.validate(g)?;
    let model = Model::<S>::new(g);
    let flat = pi.flat(g);
    let (dev, mut exact) = edt_residual(&model, &flat, None, cfg.max_iters);
    let mut worst = dev;
    let utils = model.utilities(&flat);
    for (i, u) in utils.iter().enumerate() {
        let fixed = fix_opponents(g, pi, i)?;
        let best = optimal_strategy(&fixed, cfg)?;
        exact &= best.certified == Certification::Exact && S::EXACT && best.utilities[0].is_exact();
        let gain = if exact {
            let b = best.utilities[0].as_exact().cloned().expect("exact utility");
            let u = u.to_value().as_exact().cloned().unwrap_or_else(|| BigRational::from_float(u.to_float()).unwrap_or_default());
            let d = b - u;
            let f = d.to_float();
            if d > BigRational::from_integer(0.into()) && f == 0.0 {
                f64::MIN_POSITIVE
            } else {
                f
            }
        } else {
            best.utilities[0].to_f64() - u.to_float()
        };
        worst = worst.max(gain);
    }
    Ok(CheckResult::new(worst.max(0.0), exact, cfg.eq_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::num::Value;
    use crate::recall::perfect_recall_refinement;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pure(g: &Game, c: &[usize]) -> StrategyProfile<BigRational> {
        StrategyProfile::pure(g, c).unwrap()
    }

    #[test]
    fn fig3a_always_left_has_no_incentive() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let pi = pure(&g, &[0, 0]);
        for k in 0..2 {
            assert_eq!(edt_incentive(&g, &pi, 0, InfosetId(k)).unwrap(), q(0, 1));
        }
        let r = edt_check(&g, &pure(&g, &[1, 1]), &SolverConfig::default()).unwrap();
        // Only the switch at I2 pays on its own: ε.
        assert!(!r.passed);
        assert_eq!(r.residual, 0.1);
        let i2 = g.infoset_by_name("I2").unwrap();
        assert_eq!(edt_incentive(&g, &pure(&g, &[1, 1]), 0, i2).unwrap(), q(1, 10));
    }

    #[test]
    fn fig3b_second_equilibrium() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        let pi = pure(&pr, &[1, 1, 0]);
        for k in 0..3 {
            assert_eq!(edt_incentive(&pr, &pi, 0, InfosetId(k)).unwrap(), q(0, 1));
        }
        let r = edt_check(&pr, &pi, &SolverConfig::default()).unwrap();
        assert!(r.passed && r.exact && r.residual == 0.0);
    }

    #[test]
    fn fig2_stationary_point() {
        let g = figures::fig2();
        let pi = StrategyProfile::from_flat(&g, vec![vec![q(1, 3), q(2, 3)]]);
        let cfg = SolverConfig::default();
        let k = kkt_check(&g, &pi, 0, &cfg).unwrap();
        assert!(k.passed && k.residual == 0.0);
        let cu = cdt_utility(&g, &pi, 0, InfosetId(0), &[q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(cu, q(2, 3));
        assert!(edt_check(&g, &pi, &cfg).unwrap().passed);
        // Pure L: the gradient favours R.
        let l = pure(&g, &[0]);
        assert!(!kkt_check(&g, &l, 0, &cfg).unwrap().passed);
    }

    #[test]
    fn fig1_ct_is_an_equilibrium() {
        let g = figures::fig1(&Value::ratio(1, 100)).unwrap();
        // Infoset order: J (P2) then I (P1), or as built.
        let mut choices = vec![0; g.infosets().len()];
        for (k, s) in g.infosets().iter().enumerate() {
            choices[k] = s.actions.iter().position(|a| a == "c" || a == "t").unwrap();
        }
        let pi = pure(&g, &choices);
        let cfg = SolverConfig::default();
        assert!(edt_check(&g, &pi, &cfg).unwrap().passed);
        assert!(cdt_check(&g, &pi, &cfg).unwrap().passed);
        let n = nash_check(&g, &pi.to_f64(), &cfg).unwrap();
        assert!(n.passed, "{n:?}");
    }

    #[test]
    fn fig1_refined_wait_profile_is_nash() {
        let g = figures::fig1(&Value::ratio(1, 100)).unwrap();
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        let mut choices = vec![0; pr.infosets().len()];
        for (k, s) in pr.infosets().iter().enumerate() {
            let want = if s.player == 1 { "w" } else if s.nodes.contains(&pr.node_by_name("x").unwrap()) { "c" } else { "d" };
            choices[k] = s.actions.iter().position(|a| a == want).unwrap();
        }
        let pi = pure(&pr, &choices);
        let n = nash_check(&pr, &pi, &SolverConfig::default()).unwrap();
        assert!(n.passed, "{n:?}");
    }
}
