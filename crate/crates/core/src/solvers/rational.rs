use super::checks::{edt_residual, kkt_residual, CheckResult};
use super::model::Model;
use super::simplex::Odometer;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::game::{Game, InfosetId};
use crate::strategies::{fix_opponents, FlatProfile, StrategyProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct RationalityVerdict {
    pub accepted: bool,
    /// Normalized incentive at each schedule point.
    pub eps: Vec<f64>,
    /// Fitted decay constant.
    pub constant: f64,
}

fn perturb(flat: &FlatProfile<f64>, delta: f64) -> FlatProfile<f64> {
    flat.iter()
        .map(|row| {
            let u = delta / row.len() as f64;
            row.iter().map(|p| (1.0 - delta) * p + u).collect()
        })
        .collect()
}

fn normalized_incentive(model: &Model, flat: &FlatProfile<f64>, cdt: bool, max_iters: usize) -> f64 {
    let reach = model.node_reach(flat);
    let grad = if cdt { Some(model.gradient(flat, 0)) } else { None };
    let mut worst = 0.0f64;
    for (k, set) in model.game.infosets().iter().enumerate() {
        if set.actions.len() < 2 {
            continue;
        }
        let id = InfosetId(k);
        let weight = if cdt {
            model.frequency(&reach, id)
        } else {
            model.first_visit_reach(&reach, id)
        };
        if weight <= 0.0 {
            continue;
        }
        let gain = match &grad {
            Some(gr) => {
                let v = &gr[k];
                let here: f64 = v.iter().zip(&flat[k]).map(|(a, b)| a * b).sum();
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - here
            }
            None => model.incentive(flat, id, 0, max_iters).0,
        };
        worst = worst.max(gain.max(0.0) / weight);
    }
    worst
}

fn schedule_verdict(model: &Model, flat: &FlatProfile<f64>, cfg: &SolverConfig, cdt: bool) -> RationalityVerdict {
    let eps: Vec<f64> = cfg
        .schedule
        .iter()
        .map(|&d| normalized_incentive(model, &perturb(flat, d), cdt, cfg.max_iters))
        .collect();
    let constant = eps
        .iter()
        .zip(&cfg.schedule)
        .take(cfg.fit_points)
        .map(|(e, d)| e / d)
        .fold(0.0, f64::max);
    // The fitted constant carries a factor-two margin for curvature in ε_k.
    let accepted = eps
        .iter()
        .zip(&cfg.schedule)
        .all(|(e, d)| *e <= cfg.eq_tol.max(2.0 * constant * d));
    RationalityVerdict {
        accepted,
        eps,
        constant,
    }
}

fn single_player_flat(g: &Game, pi: &StrategyProfile<f64>) -> Result<FlatProfile<f64>> {
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    pi.validate(g)?;
    Ok(pi.flat(g))
}

/// Schedule-based test of EDT-rationality: mix toward uniform at each rate
/// of the schedule and require the normalized incentive to shrink with it.
pub fn edt_rational_check(g: &Game, pi: &StrategyProfile<f64>, cfg: &SolverConfig) -> Result<RationalityVerdict> {
    cfg.validate()?;
    let flat = single_player_flat(g, pi)?;
    Ok(schedule_verdict(&Model::new(g), &flat, cfg, false))
}

/// As [`edt_rational_check`], normalizing by frequency and using the
/// first-order deviation utility.
pub fn cdt_rational_check(g: &Game, pi: &StrategyProfile<f64>, cfg: &SolverConfig) -> Result<RationalityVerdict> {
    cfg.validate()?;
    let flat = single_player_flat(g, pi)?;
    Ok(schedule_verdict(&Model::new(g), &flat, cfg, true))
}

/// Candidate witnesses: `flat` itself, then completions that play uniformly
/// or purely on every unreached infoset.
fn witnesses(model: &Model, flat: &FlatProfile<f64>, cap: usize) -> Vec<FlatProfile<f64>> {
    let g = model.game;
    let reach = model.node_reach(flat);
    let unreached: Vec<usize> = g
        .infosets()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.actions.len() > 1 && s.nodes.iter().all(|h| reach[h.0] <= 1e-12))
        .map(|(k, _)| k)
        .collect();
    let mut out = vec![flat.clone()];
    if unreached.is_empty() {
        return out;
    }
    let option = |k: usize, o: usize| -> Vec<f64> {
        let n = flat[k].len();
        if o == 0 {
            vec![1.0 / n as f64; n]
        } else {
            (0..n).map(|a| if a + 1 == o { 1.0 } else { 0.0 }).collect()
        }
    };
    let radices: Vec<usize> = unreached.iter().map(|&k| flat[k].len() + 1).collect();
    if Odometer::total(&radices) <= cap as u128 {
        for digits in Odometer::new(radices) {
            let mut w = flat.clone();
            for (&k, &o) in unreached.iter().zip(&digits) {
                w[k] = option(k, o);
            }
            out.push(w);
        }
    } else {
        let widest = radices.iter().copied().max().unwrap_or(1);
        for o in 0..widest {
            let mut w = flat.clone();
            for &k in &unreached {
                w[k] = option(k, o.min(flat[k].len()));
            }
            out.push(w);
        }
    }
    out
}

fn refined_check(g: &Game, pi: &StrategyProfile<f64>, cfg: &SolverConfig, cdt: bool) -> Result<CheckResult> {
    cfg.validate()?;
    pi.validate(g)?;
    let model: Model = Model::new(g);
    let flat = pi.flat(g);
    let residual = if cdt {
        kkt_residual(&model, &flat, None, cfg.support_tol)
    } else {
        edt_residual(&model, &flat, None, cfg.max_iters).0
    };
    let mut result = CheckResult {
        passed: residual <= cfg.eq_tol,
        residual,
        exact: false,
    };
    if !result.passed {
        return Ok(result);
    }
    for i in 0..g.players() {
        let (fixed, single) = if g.players() == 1 {
            (g.clone(), pi.clone())
        } else {
            (fix_opponents(g, pi, i)?, pi.single(i))
        };
        let fm: Model = Model::new(&fixed);
        let sf = single.flat(&fixed);
        let ok = witnesses(&fm, &sf, cfg.max_candidates)
            .iter()
            .any(|w| schedule_verdict(&fm, w, cfg, cdt).accepted);
        if !ok {
            result.passed = false;
            return Ok(result);
        }
    }
    Ok(result)
}

/// EDT equilibrium whose every player's strategy is realization-equivalent,
/// in the game with the others fixed, to an EDT-rational one. The witness
/// search covers the strategy itself and its pure or uniform completions on
/// unreached infosets.
pub fn edt_nash_check(g: &Game, pi: &StrategyProfile<f64>, cfg: &SolverConfig) -> Result<CheckResult> {
    refined_check(g, pi, cfg, false)
}

/// CDT counterpart of [`edt_nash_check`].
pub fn cdt_nash_check(g: &Game, pi: &StrategyProfile<f64>, cfg: &SolverConfig) -> Result<CheckResult> {
    refined_check(g, pi, cfg, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::num::Value;
    use crate::recall::perfect_recall_refinement;

    fn pure(g: &Game, c: &[usize]) -> StrategyProfile<f64> {
        StrategyProfile::pure(g, c).unwrap()
    }

    #[test]
    fn fig3b_second_equilibrium_is_not_rational() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        let cfg = SolverConfig::default();
        let rrl = pure(&pr, &[1, 1, 0]);
        assert!(!edt_rational_check(&pr, &rrl, &cfg).unwrap().accepted);
        assert!(!cdt_rational_check(&pr, &rrl, &cfg).unwrap().accepted);
        assert!(!edt_nash_check(&pr, &rrl, &cfg).unwrap().passed);
        let lll = pure(&pr, &[0, 0, 0]);
        assert!(edt_rational_check(&pr, &lll, &cfg).unwrap().accepted);
        // Unreached b-side playing R is rescued by a completion.
        let llr = pure(&pr, &[0, 0, 1]);
        assert!(edt_nash_check(&pr, &llr, &cfg).unwrap().passed);
    }

    #[test]
    fn fig5_rationality() {
        let cfg = SolverConfig::default();
        let a = figures::fig5a();
        assert!(edt_rational_check(&a, &pure(&a, &[0]), &cfg).unwrap().accepted);
        assert!(!edt_rational_check(&a, &pure(&a, &[1]), &cfg).unwrap().accepted);
        let b = figures::fig5b();
        assert!(edt_rational_check(&b, &pure(&b, &[1, 1]), &cfg).unwrap().accepted);
        assert!(edt_nash_check(&b, &pure(&b, &[1, 1]), &cfg).unwrap().passed);
        assert!(edt_nash_check(&b, &pure(&b, &[0, 0]), &cfg).unwrap().passed);
    }

    #[test]
    fn fig2_optimum_is_cdt_rational() {
        let g = figures::fig2();
        let pi = StrategyProfile::from_flat(&g, vec![vec![1.0 / 3.0, 2.0 / 3.0]]);
        assert!(cdt_rational_check(&g, &pi, &SolverConfig::default()).unwrap().accepted);
    }
}
