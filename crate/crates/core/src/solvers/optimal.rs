use num::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{ascend, Model};
use super::simplex::{fit_resolution, lattice_points, random_point, Odometer};
use super::{checks, Certification, Concept, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::game::{Game, InfosetId, NodeId, Owner};
use crate::num::Scalar;
use crate::strategies::{snap_row, FlatProfile, StrategyProfile};

struct Search<'a> {
    g: &'a Game,
    utils: Vec<f64>,
    chance: Vec<Vec<f64>>,
    choice: Vec<Option<usize>>,
    best: f64,
    best_choice: Option<Vec<Option<usize>>>,
    visited: usize,
    budget: usize,
    aborted: bool,
}

impl Search<'_> {
    /// Optimistic value: unassigned decision nodes pick their best child.
    /// Also reports the first unassigned infoset reachable through assigned
    /// and chance edges only.
    fn bound(&self, h: NodeId, first: &mut Option<InfosetId>) -> f64 {
        let node = self.g.node(h);
        match node.owner {
            Owner::Terminal => self.utils[h.0],
            Owner::Chance => node
                .children
                .iter()
                .zip(&self.chance[h.0])
                .filter(|(_, &p)| p > 0.0)
                .map(|(&c, &p)| p * self.bound(c, first))
                .sum(),
            Owner::Player(_) => {
                let id = node.infoset.expect("decision node");
                match self.choice[id.0] {
                    Some(a) => self.bound(node.children[a], first),
                    None => {
                        if first.is_none() {
                            *first = Some(id);
                        }
                        let mut sink = Some(id);
                        node.children
                            .iter()
                            .map(|&c| self.bound(c, &mut sink))
                            .fold(f64::NEG_INFINITY, f64::max)
                    }
                }
            }
        }
    }

    fn run(&mut self) {
        if self.aborted {
            return;
        }
        self.visited += 1;
        if self.visited > self.budget {
            self.aborted = true;
            return;
        }
        let mut first = None;
        let b = self.bound(self.g.root(), &mut first);
        let slack = 1e-12 * b.abs().max(1.0);
        if self.best_choice.is_some() && b <= self.best + slack {
            return;
        }
        let Some(id) = first else {
            self.best = b;
            self.best_choice = Some(self.choice.clone());
            return;
        };
        let n = self.g.num_actions(id);
        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|a| {
                self.choice[id.0] = Some(a);
                let mut f = None;
                (self.bound(self.g.root(), &mut f), a)
            })
            .collect();
        order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for (_, a) in order {
            self.choice[id.0] = Some(a);
            self.run();
        }
        self.choice[id.0] = None;
    }
}

/// Best pure strategy by branch and bound, or `None` when the node budget
/// runs out. Valid only without absentmindedness.
fn pure_search(g: &Game, budget: usize) -> Option<Vec<usize>> {
    let mut s = Search {
        g,
        utils: g
            .nodes()
            .iter()
            .map(|n| n.utils.first().map_or(0.0, |u| u.to_f64()))
            .collect(),
        chance: g
            .nodes()
            .iter()
            .map(|n| n.chance_probs.iter().map(|p| p.to_f64()).collect())
            .collect(),
        choice: vec![None; g.infosets().len()],
        best: f64::NEG_INFINITY,
        best_choice: None,
        visited: 0,
        budget,
        aborted: false,
    };
    s.run();
    if s.aborted {
        return None;
    }
    s.best_choice.map(|c| c.into_iter().map(|a| a.unwrap_or(0)).collect())
}

/// Float profile with its snapped rational form (when close enough) and the
/// utilities, exact whenever both the game and the snapped profile are.
pub(crate) struct Packaged {
    pub profile: StrategyProfile<f64>,
    pub exact: Option<StrategyProfile<BigRational>>,
    pub utilities: Vec<crate::num::Value>,
}

pub(crate) fn snap_flat(flat: &FlatProfile<f64>, max_den: u64) -> Option<FlatProfile<BigRational>> {
    let snapped: FlatProfile<BigRational> = flat
        .iter()
        .map(|row| snap_row(row, max_den))
        .collect::<Option<_>>()?;
    let close = snapped
        .iter()
        .flatten()
        .zip(flat.iter().flatten())
        .all(|(q, &x)| (q.to_float() - x).abs() <= 1e-6);
    close.then_some(snapped)
}

pub(crate) fn package(
    model: &Model,
    flat: &FlatProfile<f64>,
    exact_model: Option<&Model<BigRational>>,
    max_den: u64,
) -> Packaged {
    let g = model.game;
    if let Some(em) = exact_model {
        if let Some(q) = snap_flat(flat, max_den) {
            let utilities = em.utilities(&q).into_iter().map(|u| u.to_value()).collect();
            let f: FlatProfile<f64> = q.iter().map(|r| r.iter().map(Scalar::to_float).collect()).collect();
            return Packaged {
                profile: StrategyProfile::from_flat(g, f),
                exact: Some(StrategyProfile::from_flat(g, q)),
                utilities,
            };
        }
    }
    Packaged {
        profile: StrategyProfile::from_flat(g, flat.clone()),
        exact: None,
        utilities: model.utilities(flat).into_iter().map(|u| u.to_value()).collect(),
    }
}

/// Utility-maximizing strategy of a single-player game.
pub fn optimal_strategy(g: &Game, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    let mut notes = Vec::new();
    let exact_model = g.is_exact().then(|| Model::<BigRational>::new(g));
    if !g.any_absentmindedness() {
        match pure_search(g, cfg.max_search_nodes) {
            Some(choices) => {
                let pi: StrategyProfile<f64> = StrategyProfile::pure(g, &choices)?;
                let flat = pi.flat(g);
                let p = package(&Model::new(g), &flat, exact_model.as_ref(), cfg.snap_denominator());
                return Ok(SolveReport {
                    concept: Concept::OPT,
                    profile: p.profile,
                    exact_profile: p.exact,
                    utilities: p.utilities,
                    residual: 0.0,
                    certified: Certification::Exact,
                    notes,
                });
            }
            None => notes.push(format!(
                "pure search exceeded {} nodes; falling back to local ascent",
                cfg.max_search_nodes
            )),
        }
    }
    let model: Model = Model::new(g);
    let (flat, value, grid) = continuous_max(&model, cfg);
    let mut certified = match grid {
        Some(m) => Certification::GridCertified {
            delta: 1.0 / m as f64,
            gap: Some(lipschitz(&model) / m as f64),
        },
        None => Certification::Heuristic,
    };
    if !notes.is_empty() {
        certified = Certification::Heuristic;
    }
    let mut p = package(&model, &flat, exact_model.as_ref(), cfg.snap_denominator());
    if p.utilities[0].to_f64() < value - 1e-9 {
        p = package(&model, &flat, None, cfg.snap_denominator());
    }
    let pf = p.profile.flat(g);
    let residual = checks::kkt_residual(&model, &pf, Some(0), cfg.support_tol);
    Ok(SolveReport {
        concept: Concept::OPT,
        profile: p.profile,
        exact_profile: p.exact,
        utilities: p.utilities,
        residual,
        certified,
        notes,
    })
}

/// Σ_z |χ(z)·u(z)|·(decision steps of z): bounds the utility change when every
/// probability moves by at most one unit.
fn lipschitz(model: &Model) -> f64 {
    model
        .mono
        .terms
        .iter()
        .map(|t| (t.chance * t.utils[0]).abs() * t.steps.len() as f64)
        .sum()
}

/// Grid scan over the movable rows followed by multistart ascent. Returns the
/// best profile, its value and the grid resolution when the full grid was
/// scanned.
pub(crate) fn continuous_max(model: &Model, cfg: &SolverConfig) -> (FlatProfile<f64>, f64, Option<usize>) {
    let g = model.game;
    let dims: Vec<usize> = g.infosets().iter().map(|s| s.actions.len()).collect();
    let movable: Vec<bool> = dims.iter().map(|&n| n > 1).collect();
    let free: Vec<usize> = (0..dims.len()).filter(|&k| movable[k]).collect();
    let free_dims: Vec<usize> = free.iter().map(|&k| dims[k]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base: FlatProfile<f64> = dims.iter().map(|&n| vec![1.0 / n as f64; n]).collect();
    let f = |x: &FlatProfile<f64>| model.utility(x, 0);
    let grad = |x: &FlatProfile<f64>| model.gradient(x, 0);

    let keep = cfg.multistart.max(1);
    let mut top: Vec<(f64, FlatProfile<f64>)> = Vec::new();
    let push = |v: f64, x: &FlatProfile<f64>, top: &mut Vec<(f64, FlatProfile<f64>)>| {
        if top.len() < keep || v > top[top.len() - 1].0 {
            let pos = top.partition_point(|(w, _)| *w >= v);
            top.insert(pos, (v, x.clone()));
            top.truncate(keep);
        }
    };
    let grid = fit_resolution(&free_dims, cfg.grid_steps(), cfg.max_grid_points as u128);
    match grid {
        Some((m, _)) => {
            let lists: Vec<Vec<Vec<f64>>> = free_dims.iter().map(|&n| lattice_points(n, m)).collect();
            let mut x = base.clone();
            for digits in Odometer::new(lists.iter().map(Vec::len).collect()) {
                for (j, &d) in digits.iter().enumerate() {
                    x[free[j]].clone_from(&lists[j][d]);
                }
                push(f(&x), &x, &mut top);
            }
        }
        None => {
            let mut x = base.clone();
            for _ in 0..cfg.max_grid_points {
                for (j, &k) in free.iter().enumerate() {
                    x[k] = random_point(free_dims[j], &mut rng);
                }
                push(f(&x), &x, &mut top);
            }
        }
    }
    let mut starts: Vec<FlatProfile<f64>> = top.into_iter().map(|(_, x)| x).collect();
    starts.push(base.clone());
    for _ in 0..cfg.multistart {
        let mut x = base.clone();
        for (j, &k) in free.iter().enumerate() {
            x[k] = random_point(free_dims[j], &mut rng);
        }
        starts.push(x);
    }
    let mut best: Option<(f64, FlatProfile<f64>)> = None;
    for mut x in starts {
        let v = ascend(&mut x, &movable, f, grad, cfg.max_iters);
        if best.as_ref().is_none_or(|(b, _)| v > *b + 1e-15) {
            best = Some((v, x));
        }
    }
    let (v, x) = best.expect("at least one start");
    (x, v, grid.map(|(m, _)| m))
}
