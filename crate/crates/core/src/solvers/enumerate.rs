use std::collections::HashSet;

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::checks::{edt_residual, kkt_residual, nash_check};
use super::model::{ascend, Model};
use super::optimal::{package, snap_flat};
use super::rational::{cdt_nash_check, edt_nash_check};
use super::simplex::{fit_resolution, lattice_points, project_simplex, random_point, Odometer};
use super::{optimal_strategy, Certification, Concept, ConceptKind, Selector, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::num::Scalar;
use crate::strategies::{FlatProfile, StrategyProfile};

struct Candidate {
    flat: FlatProfile<f64>,
    exact: Option<FlatProfile<BigRational>>,
    residual: f64,
    exact_zero: bool,
}

/// Residual of the necessary first-stage condition of `kind`.
fn base_residual<S: Scalar>(model: &Model<S>, flat: &FlatProfile<S>, kind: ConceptKind, cfg: &SolverConfig) -> (f64, bool) {
    match kind {
        ConceptKind::Cdt | ConceptKind::CdtNash => (kkt_residual(model, flat, None, cfg.support_tol), S::EXACT),
        _ => edt_residual(model, flat, None, cfg.max_iters),
    }
}

/// Single-player ascent, or simultaneous projected gradient play.
fn polish(model: &Model, flat: &mut FlatProfile<f64>, movable: &[bool], cfg: &SolverConfig) {
    let g = model.game;
    if g.players() == 1 {
        ascend(flat, movable, |x| model.utility(x, 0), |x| model.gradient(x, 0), cfg.max_iters);
        return;
    }
    let step = 0.05;
    for it in 0..cfg.max_iters {
        let grads: Vec<FlatProfile<f64>> = (0..g.players()).map(|p| model.gradient(flat, p)).collect();
        for (k, set) in g.infosets().iter().enumerate() {
            if !movable[k] {
                continue;
            }
            for (v, d) in flat[k].iter_mut().zip(&grads[set.player][k]) {
                *v += step * d;
            }
            project_simplex(&mut flat[k]);
        }
        if it % 32 == 31 && kkt_residual(model, flat, None, cfg.support_tol) < cfg.eq_tol * 1e-3 {
            break;
        }
    }
}

fn clean(flat: &mut FlatProfile<f64>, tol: f64) {
    for row in flat.iter_mut() {
        row.iter_mut().for_each(|p| {
            if *p < tol {
                *p = 0.0
            }
        });
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
    }
}

fn flat_key(flat: &FlatProfile<f64>) -> Vec<u64> {
    flat.iter().flatten().map(|p| p.to_bits()).collect()
}

/// All equilibria of `concept.kind` found from pure, grid and random seeds,
/// one per realization-equivalence class, sorted by Player 1's utility.
pub fn enumerate_equilibria(g: &Game, concept: Concept, cfg: &SolverConfig) -> Result<Vec<SolveReport>> {
    cfg.validate()?;
    let kind = concept.kind;
    if kind == ConceptKind::Opt {
        return Ok(vec![optimal_strategy(g, cfg)?]);
    }
    let dims: Vec<usize> = g.infosets().iter().map(|s| s.actions.len()).collect();
    let movable: Vec<bool> = dims.iter().map(|&n| n > 1).collect();
    let free: Vec<usize> = (0..dims.len()).filter(|&k| movable[k]).collect();
    if free.len() > cfg.max_infosets {
        return Err(Error::CapExceeded(format!(
            "{} decision infosets (cap {})",
            free.len(),
            cfg.max_infosets
        )));
    }
    let free_dims: Vec<usize> = free.iter().map(|&k| dims[k]).collect();
    let model: Model = Model::new(g);
    let exact_model = g.is_exact().then(|| Model::<BigRational>::new(g));
    let base: FlatProfile<f64> = dims.iter().map(|&n| vec![1.0 / n as f64; n]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut notes = Vec::new();

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut found: Vec<(f64, FlatProfile<f64>)> = Vec::new();
    // Non-equilibrium seeds ranked by residual for later polishing.
    let mut pool: Vec<(f64, FlatProfile<f64>)> = Vec::new();
    let mut consider = |x: &FlatProfile<f64>,
                        found: &mut Vec<(f64, FlatProfile<f64>)>,
                        pool: &mut Vec<(f64, FlatProfile<f64>)>| {
        if !seen.insert(flat_key(x)) {
            return;
        }
        let (r, _) = base_residual(&model, x, kind, cfg);
        if r <= cfg.eq_tol {
            found.push((r, x.clone()));
        } else if pool.len() < cfg.max_polish || r < pool[pool.len() - 1].0 {
            let pos = pool.partition_point(|(w, _)| *w <= r);
            pool.insert(pos, (r, x.clone()));
            pool.truncate(cfg.max_polish);
        }
    };

    let radices = free_dims.clone();
    let mut x = base.clone();
    if Odometer::total(&radices) <= cfg.max_pure as u128 {
        for digits in Odometer::new(radices) {
            for (j, &a) in digits.iter().enumerate() {
                let k = free[j];
                x[k] = (0..dims[k]).map(|b| if a == b { 1.0 } else { 0.0 }).collect();
            }
            consider(&x, &mut found, &mut pool);
        }
    } else {
        notes.push(format!("pure profiles sampled ({} draws)", cfg.pure_samples));
        for _ in 0..cfg.pure_samples {
            for &k in &free {
                let a = rng.gen_range(0..dims[k]);
                x[k] = (0..dims[k]).map(|b| if a == b { 1.0 } else { 0.0 }).collect();
            }
            consider(&x, &mut found, &mut pool);
        }
    }
    let grid = fit_resolution(&free_dims, cfg.grid_steps(), cfg.max_grid_points as u128);
    match grid {
        Some((m, _)) => {
            if m != cfg.grid_steps() {
                notes.push(format!("grid coarsened to δ = 1/{m}"));
            }
            let lists: Vec<Vec<Vec<f64>>> = free_dims.iter().map(|&n| lattice_points(n, m)).collect();
            for digits in Odometer::new(lists.iter().map(Vec::len).collect()) {
                for (j, &d) in digits.iter().enumerate() {
                    x[free[j]].clone_from(&lists[j][d]);
                }
                consider(&x, &mut found, &mut pool);
            }
        }
        None => notes.push("mixed grid skipped: too many infosets".to_string()),
    }
    let mut starts: Vec<FlatProfile<f64>> = pool.into_iter().map(|(_, x)| x).collect();
    starts.push(base.clone());
    for _ in 0..cfg.multistart {
        let mut y = base.clone();
        for (j, &k) in free.iter().enumerate() {
            y[k] = random_point(free_dims[j], &mut rng);
        }
        starts.push(y);
    }
    for mut y in starts {
        polish(&model, &mut y, &movable, cfg);
        clean(&mut y, cfg.support_tol);
        let (r, _) = base_residual(&model, &y, kind, cfg);
        if r <= cfg.eq_tol && seen.insert(flat_key(&y)) {
            found.push((r, y));
        }
    }

    // Snap to rationals where that keeps the residual within tolerance.
    let mut candidates: Vec<Candidate> = Vec::new();
    for (r, flat) in found {
        let mut cand = Candidate {
            flat,
            exact: None,
            residual: r,
            exact_zero: false,
        };
        if let (Some(em), Some(q)) = (&exact_model, snap_flat(&cand.flat, cfg.snap_denominator())) {
            let (er, ex) = base_residual(em, &q, kind, cfg);
            if er <= cfg.eq_tol {
                cand.flat = q.iter().map(|row| row.iter().map(Scalar::to_float).collect()).collect();
                cand.residual = er;
                cand.exact_zero = ex && er == 0.0;
                cand.exact = Some(q);
            }
        }
        candidates.push(cand);
    }

    // Second-stage checks of the refined concepts.
    let mut kept: Vec<Candidate> = Vec::new();
    for mut c in candidates {
        let pi = StrategyProfile::from_flat(g, c.flat.clone());
        match kind {
            ConceptKind::Nash => {
                let res = match &c.exact {
                    Some(q) => nash_check(g, &StrategyProfile::from_flat(g, q.clone()), cfg)?,
                    None => nash_check(g, &pi, cfg)?,
                };
                c.residual = res.residual;
                c.exact_zero = res.exact && res.residual == 0.0;
                if !res.passed {
                    continue;
                }
            }
            ConceptKind::EdtNash | ConceptKind::CdtNash => {
                let res = if kind == ConceptKind::EdtNash {
                    edt_nash_check(g, &pi, cfg)?
                } else {
                    cdt_nash_check(g, &pi, cfg)?
                };
                c.exact_zero = false;
                if !res.passed {
                    continue;
                }
            }
            _ => {}
        }
        kept.push(c);
    }

    // Realization-equivalence classes; the representative is the first in
    // (utility, residual, profile) order.
    let mut scored: Vec<(f64, Vec<f64>, Candidate)> = kept
        .into_iter()
        .map(|c| (model.utility(&c.flat, 0), model.node_reach(&c.flat), c))
        .collect();
    scored.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(b.2.exact_zero.cmp(&a.2.exact_zero))
            .then(a.2.residual.total_cmp(&b.2.residual))
            .then_with(|| {
                a.2.flat
                    .iter()
                    .flatten()
                    .zip(b.2.flat.iter().flatten())
                    .map(|(x, y)| y.total_cmp(x))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let mut reps: Vec<(f64, Vec<f64>, Candidate)> = Vec::new();
    for (u, reach, c) in scored {
        let dup = reps
            .iter()
            .rev()
            .take_while(|(v, _, _)| u - v <= cfg.dedup_tol)
            .any(|(_, r, _)| r.iter().zip(&reach).all(|(a, b)| (a - b).abs() <= cfg.dedup_tol));
        if !dup {
            reps.push((u, reach, c));
        }
    }

    let delta = grid.map_or(cfg.delta, |(m, _)| 1.0 / m as f64);
    let refined = matches!(kind, ConceptKind::EdtNash | ConceptKind::CdtNash);
    let out = reps
        .into_iter()
        .map(|(_, _, c)| {
            let p = package(&model, &c.flat, exact_model.as_ref(), cfg.snap_denominator());
            let certified = if c.exact_zero && !refined {
                Certification::Exact
            } else if grid.is_some() {
                Certification::GridCertified { delta, gap: None }
            } else {
                Certification::Heuristic
            };
            SolveReport {
                concept: Concept::new(kind, Selector::Any),
                profile: p.profile,
                exact_profile: p.exact,
                utilities: p.utilities,
                residual: if c.exact_zero { 0.0 } else { c.residual },
                certified,
                notes: notes.clone(),
            }
        })
        .collect();
    Ok(out)
}

/// The equilibrium of `kind` with the highest (`Best`) or lowest (`Worst`)
/// utility for Player 1.
pub fn best_worst(g: &Game, kind: ConceptKind, which: Selector, cfg: &SolverConfig) -> Result<SolveReport> {
    if kind == ConceptKind::Opt {
        return optimal_strategy(g, cfg);
    }
    let mut all = enumerate_equilibria(g, Concept::new(kind, Selector::Any), cfg)?;
    if all.is_empty() {
        return Err(Error::NoEquilibrium {
            delta: cfg.delta,
        });
    }
    let mut r = match which {
        Selector::Worst => all.swap_remove(0),
        _ => all.pop().expect("nonempty"),
    };
    r.concept = Concept::new(kind, if which == Selector::Any { Selector::Best } else { which });
    Ok(r)
}

/// Solves `concept`: the optimum for OPT, otherwise the selected equilibrium
/// (`Any` picks the best).
pub fn solve(g: &Game, concept: Concept, cfg: &SolverConfig) -> Result<SolveReport> {
    best_worst(g, concept.kind, concept.selector, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::num::Value;
    use crate::recall::perfect_recall_refinement;

    fn any(kind: ConceptKind) -> Concept {
        Concept::new(kind, Selector::Any)
    }

    #[test]
    fn fig3_equilibrium_classes() {
        let cfg = SolverConfig::default();
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let a = enumerate_equilibria(&g, any(ConceptKind::Edt), &cfg).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].utilities[0], Value::int(1));
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        let b = enumerate_equilibria(&pr, any(ConceptKind::Edt), &cfg).unwrap();
        let us: Vec<Value> = b.iter().map(|r| r.utilities[0].clone()).collect();
        assert_eq!(us, vec![Value::ratio(1, 10), Value::int(1)]);
        assert!(b.iter().all(|r| r.certified == Certification::Exact));
    }

    #[test]
    fn fig1_unique_cdt_class() {
        let cfg = SolverConfig::default();
        let g = figures::fig1(&Value::ratio(1, 100)).unwrap();
        let all = enumerate_equilibria(&g, any(ConceptKind::Cdt), &cfg).unwrap();
        assert_eq!(all.len(), 1, "{:?}", all.iter().map(|r| r.profile.clone()).collect::<Vec<_>>());
        assert_eq!(all[0].utilities, vec![Value::int(2), Value::int(1)]);
    }

    #[test]
    fn single_player_best_edt_is_optimal() {
        let cfg = SolverConfig::default();
        let g = figures::fig2();
        let b = best_worst(&g, ConceptKind::Edt, Selector::Best, &cfg).unwrap();
        assert_eq!(b.utilities[0], Value::ratio(2, 3));
    }

    #[test]
    fn fig5a_only_left_is_edt_nash() {
        let cfg = SolverConfig::default();
        let g = figures::fig5a();
        let all = enumerate_equilibria(&g, any(ConceptKind::EdtNash), &cfg).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].utilities[0], Value::int(2));
    }
}
