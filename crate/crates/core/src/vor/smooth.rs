use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::Game;
use crate::solvers::simplex::{random_point, Odometer};
use crate::solvers::{enumerate_equilibria, optimal_strategy, Concept, ConceptKind, Model, Selector, SolverConfig};
use crate::strategies::{FlatProfile, StrategyProfile};

#[derive(Clone, Debug, PartialEq)]
pub enum SmoothnessVerdict {
    /// `π` violates the inequality.
    Falsified {
        profile: StrategyProfile<f64>,
        lhs: f64,
        rhs: f64,
    },
    /// Every pure profile satisfies the inequality. Without absentmindedness
    /// both sides are affine in each row, so this covers all profiles.
    PureVerified,
    /// Pure profiles and samples pass, but absentmindedness makes the left
    /// side nonlinear, so the pure check is not conclusive.
    SampledOk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub verdict: SmoothnessVerdict,
    pub opt: f64,
    pub pure_checked: usize,
    pub samples_checked: usize,
    /// Smallest `lhs − rhs` seen.
    pub min_margin: f64,
}

fn check_params(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) || !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameters(format!("need λ > 0 and μ ≥ 0, got λ={lambda}, μ={mu}")));
    }
    Ok(())
}

/// Average over Player 1's infosets of the utility after substituting the
/// row of `star` at that infoset. With no infosets nothing is substituted.
fn substituted_average(model: &Model, g: &Game, flat: &FlatProfile<f64>, star: &FlatProfile<f64>) -> f64 {
    let ids = g.player_infosets(0);
    if ids.is_empty() {
        return model.utility(flat, 0);
    }
    let mut work = flat.clone();
    let mut total = 0.0;
    for &i in ids {
        work[i.0] = star[i.0].clone();
        total += model.utility(&work, 0);
        work[i.0] = flat[i.0].clone();
    }
    total / ids.len() as f64
}

/// Tests `(1/|I_1|) Σ_I U(π*_I, π_{−I}) ≥ λ·OPT − μ·U(π)` on every pure `π`
/// and on `cfg.samples` random mixed ones.
pub fn smoothness_check(
    g: &Game,
    star: &StrategyProfile<f64>,
    lambda: f64,
    mu: f64,
    cfg: &SolverConfig,
) -> Result<SmoothnessReport> {
    check_params(lambda, mu)?;
    cfg.validate()?;
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    star.validate(g)?;
    if g.infosets().len() > cfg.max_infosets {
        return Err(Error::CapExceeded(format!("{} infosets", g.infosets().len())));
    }
    let radices: Vec<usize> = g.infosets().iter().map(|s| s.actions.len()).collect();
    let total = Odometer::total(&radices);
    if total > cfg.max_pure as u128 {
        return Err(Error::CapExceeded(format!("{total} pure profiles")));
    }
    let opt = optimal_strategy(g, cfg)?.p1();
    let model: Model = Model::new(g);
    let star_flat = star.flat(g);
    let mut min_margin = f64::INFINITY;
    let mut test = |flat: FlatProfile<f64>| -> Option<SmoothnessVerdict> {
        let lhs = substituted_average(&model, g, &flat, &star_flat);
        let rhs = lambda * opt - mu * model.utility(&flat, 0);
        min_margin = min_margin.min(lhs - rhs);
        if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
            Some(SmoothnessVerdict::Falsified {
                profile: StrategyProfile::from_flat(g, flat),
                lhs,
                rhs,
            })
        } else {
            None
        }
    };
    let mut pure_checked = 0;
    for digits in Odometer::new(radices.clone()) {
        pure_checked += 1;
        let flat = digits
            .iter()
            .zip(&radices)
            .map(|(&a, &n)| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect();
        if let Some(v) = test(flat) {
            return Ok(SmoothnessReport {
                verdict: v,
                opt,
                pure_checked,
                samples_checked: 0,
                min_margin,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for s in 0..cfg.samples {
        let flat = radices.iter().map(|&n| random_point(n, &mut rng)).collect();
        if let Some(v) = test(flat) {
            return Ok(SmoothnessReport {
                verdict: v,
                opt,
                pure_checked,
                samples_checked: s + 1,
                min_margin,
            });
        }
    }
    let verdict = if g.any_absentmindedness() {
        SmoothnessVerdict::SampledOk
    } else {
        SmoothnessVerdict::PureVerified
    };
    Ok(SmoothnessReport {
        verdict,
        opt,
        pure_checked,
        samples_checked: cfg.samples,
        min_margin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothBounds {
    /// Robust price of anarchy `λ/(1+μ)`.
    pub rho: f64,
    /// `((1+μ)/λ)` times the composed bound.
    pub vor_bound: f64,
    /// `ρ·OPT`, the utility every EDT equilibrium is guaranteed.
    pub guarantee: f64,
}

pub fn smooth_bounds(lambda: f64, mu: f64, opt_utility: f64, composed_bound: f64) -> Result<SmoothBounds> {
    check_params(lambda, mu)?;
    let rho = lambda / (1.0 + mu);
    Ok(SmoothBounds {
        rho,
        vor_bound: composed_bound / rho,
        guarantee: rho * opt_utility,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothEquilibria {
    pub bounds: SmoothBounds,
    pub opt: f64,
    /// Player 1's utility at each EDT equilibrium class found.
    pub utilities: Vec<f64>,
    pub holds: bool,
}

/// Enumerates EDT equilibria and compares each against `ρ·OPT`.
pub fn smooth_equilibrium_check(g: &Game, lambda: f64, mu: f64, cfg: &SolverConfig) -> Result<SmoothEquilibria> {
    check_params(lambda, mu)?;
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    let opt = optimal_strategy(g, cfg)?.p1();
    let composed = super::bound_composed(g)?.to_f64();
    let bounds = smooth_bounds(lambda, mu, opt, composed)?;
    let utilities: Vec<f64> = enumerate_equilibria(g, Concept::new(ConceptKind::Edt, Selector::Any), cfg)?
        .iter()
        .map(|r| r.p1())
        .collect();
    let holds = utilities.iter().all(|&u| u >= bounds.guarantee - cfg.eq_tol);
    Ok(SmoothEquilibria {
        bounds,
        opt,
        utilities,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameBuilder;
    use crate::generators::{valid_utility_game, ValidUtilityInstance};
    use crate::num::Value;

    fn cfg() -> SolverConfig {
        SolverConfig {
            samples: 500,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn valid_utility_is_one_one_smooth() {
        let g = valid_utility_game(&ValidUtilityInstance::default_instance()).unwrap();
        let star = optimal_strategy(&g, &cfg()).unwrap().profile;
        let r = smoothness_check(&g, &star, 1.0, 1.0, &cfg()).unwrap();
        assert_eq!(r.verdict, SmoothnessVerdict::PureVerified);
        assert_eq!(r.pure_checked, 9);
        let bad = smoothness_check(&g, &star, 10.0, 0.0, &cfg()).unwrap();
        assert!(matches!(bad.verdict, SmoothnessVerdict::Falsified { .. }));
    }

    #[test]
    fn one_leaf_game_is_pure_verified() {
        let mut b = GameBuilder::new(1, "z");
        b.leaf("z", vec![Value::int(2)]);
        let g = b.build().unwrap();
        let star = StrategyProfile::uniform(&g);
        let r = smoothness_check(&g, &star, 1.0, 0.0, &cfg()).unwrap();
        assert_eq!(r.verdict, SmoothnessVerdict::PureVerified);
    }

    #[test]
    fn bounds_arithmetic() {
        let b = smooth_bounds(1.0, 1.0, 8.0, 3.0).unwrap();
        assert_eq!(b.rho, 0.5);
        assert_eq!(b.vor_bound, 6.0);
        assert_eq!(b.guarantee, 4.0);
        assert_eq!(smooth_bounds(1.0, 0.0, 1.0, 1.0).unwrap().rho, 1.0);
        assert!(smooth_bounds(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn valid_utility_equilibria_meet_half_opt() {
        let g = valid_utility_game(&ValidUtilityInstance::default_instance()).unwrap();
        let r = smooth_equilibrium_check(&g, 1.0, 1.0, &SolverConfig::default()).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(!r.utilities.is_empty());
    }
}
