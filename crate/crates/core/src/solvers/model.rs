//! Cached polynomial view of a game used by every solver.

use std::collections::HashMap;

use super::simplex::{fit_resolution, lattice_points, project_simplex};
use crate::game::{Game, InfosetId, NodeId, Owner};
use crate::num::{Scalar, Value};
use crate::strategies::{FlatProfile, LeafMonomials};

/// Utility as a polynomial in one infoset's row, all other rows fixed.
#[derive(Clone, Debug)]
pub struct Restricted<S = f64> {
    pub arity: usize,
    /// Occurrence counts of each action and the merged coefficient.
    pub terms: Vec<(Vec<u32>, S)>,
    pub linear: bool,
}

fn powi<S: Scalar>(x: &S, k: u32) -> S {
    (0..k).fold(S::one(), |acc, _| acc * x.clone())
}

impl<S: Scalar> Restricted<S> {
    pub fn value(&self, sigma: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |acc, (counts, c)| {
            let m = counts
                .iter()
                .zip(sigma)
                .fold(c.clone(), |m, (&k, s)| if k == 0 { m } else { m * powi(s, k) });
            acc + m
        })
    }

    pub fn value_f64(&self, sigma: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(counts, c)| {
                counts
                    .iter()
                    .zip(sigma)
                    .fold(c.to_float(), |m, (&k, s)| if k == 0 { m } else { m * s.powi(k as i32) })
            })
            .sum()
    }

    pub fn gradient_f64(&self, sigma: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.arity];
        for (counts, c) in &self.terms {
            let c = c.to_float();
            for a in 0..self.arity {
                if counts[a] == 0 {
                    continue;
                }
                let mut m = c * counts[a] as f64 * sigma[a].powi(counts[a] as i32 - 1);
                for (b, &k) in counts.iter().enumerate() {
                    if b != a && k > 0 {
                        m *= sigma[b].powi(k as i32);
                    }
                }
                g[a] += m;
            }
        }
        g
    }

    /// Values at the pure rows; exact when the polynomial is linear.
    pub fn vertex_values(&self) -> Vec<S> {
        (0..self.arity)
            .map(|a| {
                let e: Vec<S> = (0..self.arity).map(|b| if a == b { S::one() } else { S::zero() }).collect();
                self.value(&e)
            })
            .collect()
    }

    /// Approximate maximum over the simplex: vertices, a lattice scan and
    /// local ascent from the best few points and from `start`.
    pub fn maximize_f64(&self, start: &[f64], max_iters: usize) -> (Vec<f64>, f64) {
        let mut points: Vec<(f64, Vec<f64>)> = Vec::new();
        let m = fit_resolution(&[self.arity], 64, 5000).map_or(1, |(m, _)| m);
        for p in lattice_points(self.arity, m) {
            points.push((self.value_f64(&p), p));
        }
        points.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut starts: Vec<Vec<f64>> = points.iter().take(3).map(|p| p.1.clone()).collect();
        starts.push(start.to_vec());
        let mut best = points.first().map_or((start.to_vec(), self.value_f64(start)), |p| (p.1.clone(), p.0));
        for s in starts {
            let mut x = vec![s];
            let v = ascend(
                &mut x,
                &[true],
                |y| self.value_f64(&y[0]),
                |y| vec![self.gradient_f64(&y[0])],
                max_iters,
            );
            if v > best.1 {
                best = (x.pop().expect("one row"), v);
            }
        }
        best
    }
}

/// Projected gradient ascent with Armijo backtracking on the rows flagged
/// in `movable`. Returns the final objective value.
pub fn ascend(
    x: &mut FlatProfile<f64>,
    movable: &[bool],
    f: impl Fn(&FlatProfile<f64>) -> f64,
    grad: impl Fn(&FlatProfile<f64>) -> FlatProfile<f64>,
    max_iters: usize,
) -> f64 {
    let mut fx = f(x);
    let mut t = 1.0;
    for _ in 0..max_iters {
        let g = grad(x);
        let mut improved = false;
        while t > 1e-14 {
            let mut y = x.clone();
            let mut slope = 0.0;
            let mut step = 0.0f64;
            for (k, row) in y.iter_mut().enumerate() {
                if !movable[k] {
                    continue;
                }
                for (v, d) in row.iter_mut().zip(&g[k]) {
                    *v += t * d;
                }
                project_simplex(row);
                for ((v, old), d) in row.iter().zip(&x[k]).zip(&g[k]) {
                    slope += d * (v - old);
                    step = step.max((v - old).abs());
                }
            }
            if step < 1e-15 {
                return fx;
            }
            let fy = f(&y);
            if fy >= fx + 1e-4 * slope {
                let gain = fy - fx;
                *x = y;
                fx = fy;
                improved = gain > 1e-16 * fx.abs().max(1.0) || step > 1e-12;
                t *= 2.0;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    fx
}

/// A game with its leaf monomials, chance probabilities and absentmindedness
/// flags precomputed.
#[derive(Clone, Debug)]
pub struct Model<'g, S = f64> {
    pub game: &'g Game,
    pub mono: LeafMonomials<S>,
    /// Infosets visited more than once on some root-to-leaf path.
    pub repeated: Vec<bool>,
    order: Vec<NodeId>,
    chance: Vec<Vec<S>>,
}

impl<'g, S: Scalar> Model<'g, S> {
    pub fn new(game: &'g Game) -> Self {
        let mono = LeafMonomials::<S>::new(game);
        let mut repeated = vec![false; game.infosets().len()];
        for t in &mono.terms {
            let mut seen: HashMap<InfosetId, ()> = HashMap::new();
            for &(i, _) in &t.steps {
                if seen.insert(i, ()).is_some() {
                    repeated[i.0] = true;
                }
            }
        }
        let chance = game
            .nodes()
            .iter()
            .map(|n| n.chance_probs.iter().map(S::from_value).collect())
            .collect();
        Model {
            game,
            mono,
            repeated,
            order: game.subtree(game.root()),
            chance,
        }
    }

    pub fn owner(&self, id: InfosetId) -> usize {
        self.game.infoset(id).player
    }

    pub fn utility(&self, flat: &FlatProfile<S>, player: usize) -> S {
        self.mono.value(flat, player)
    }

    pub fn utilities(&self, flat: &FlatProfile<S>) -> Vec<S> {
        self.mono.values(flat)
    }

    pub fn gradient(&self, flat: &FlatProfile<S>, player: usize) -> FlatProfile<S> {
        self.mono.gradient(flat, player)
    }

    pub fn node_reach(&self, flat: &FlatProfile<S>) -> Vec<S> {
        let g = self.game;
        let mut reach = vec![S::zero(); g.nodes().len()];
        reach[g.root().0] = S::one();
        for &h in &self.order {
            let node = g.node(h);
            for (a, &c) in node.children.iter().enumerate() {
                let p = match node.owner {
                    Owner::Chance => self.chance[h.0][a].clone(),
                    _ => flat[node.infoset.expect("decision node").0][a].clone(),
                };
                reach[c.0] = reach[h.0].clone() * p;
            }
        }
        reach
    }

    /// Reach of `id` counted at first visits only.
    pub fn first_visit_reach(&self, reach: &[S], id: InfosetId) -> S {
        self.game
            .infoset(id)
            .nodes
            .iter()
            .filter(|&&h| self.game.is_first_visit(h))
            .fold(S::zero(), |acc, h| acc + reach[h.0].clone())
    }

    pub fn frequency(&self, reach: &[S], id: InfosetId) -> S {
        self.game
            .infoset(id)
            .nodes
            .iter()
            .fold(S::zero(), |acc, h| acc + reach[h.0].clone())
    }

    pub fn restricted(&self, flat: &FlatProfile<S>, id: InfosetId, player: usize) -> Restricted<S> {
        let arity = flat[id.0].len();
        let zero = S::zero();
        let mut merged: HashMap<Vec<u32>, S> = HashMap::new();
        let mut order: Vec<Vec<u32>> = Vec::new();
        for t in &self.mono.terms {
            if t.utils[player] == zero {
                continue;
            }
            let mut counts = vec![0u32; arity];
            let mut c = t.chance.clone() * t.utils[player].clone();
            for &(i, a) in &t.steps {
                if i == id {
                    counts[a] += 1;
                } else {
                    c = c * flat[i.0][a].clone();
                }
            }
            if c == zero {
                continue;
            }
            match merged.get_mut(&counts) {
                Some(v) => *v = v.clone() + c,
                None => {
                    order.push(counts.clone());
                    merged.insert(counts, c);
                }
            }
        }
        let terms: Vec<(Vec<u32>, S)> = order
            .into_iter()
            .map(|k| {
                let c = merged.remove(&k).expect("present");
                (k, c)
            })
            .collect();
        let linear = terms.iter().all(|(k, _)| k.iter().sum::<u32>() <= 1);
        Restricted { arity, terms, linear }
    }

    /// Gain of `player` from the best replacement row of `id`, and whether
    /// the value is exact.
    pub fn incentive(&self, flat: &FlatProfile<S>, id: InfosetId, player: usize, max_iters: usize) -> (S, bool) {
        let r = self.restricted(flat, id, player);
        let here = r.value(&flat[id.0]);
        if r.linear {
            let best = r
                .vertex_values()
                .into_iter()
                .fold(here.clone(), |m, v| if v > m { v } else { m });
            return (best - here, S::EXACT);
        }
        let start: Vec<f64> = flat[id.0].iter().map(Scalar::to_float).collect();
        let (_, best) = r.maximize_f64(&start, max_iters);
        let gain = (best - here.to_float()).max(0.0);
        (S::from_value(&Value::Float(gain)), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::strategies::uniform_flat;

    #[test]
    fn fig2_restricted_is_quadratic() {
        let g = figures::fig2();
        let m: Model = Model::new(&g);
        let flat = uniform_flat::<f64>(&g);
        let r = m.restricted(&flat, InfosetId(0), 0);
        assert!(!r.linear);
        assert!(m.repeated[0]);
        let (p, v) = r.maximize_f64(&[0.5, 0.5], 10_000);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-6);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ascent_finds_interior_optimum() {
        let f = |x: &FlatProfile<f64>| -(x[0][0] - 0.3).powi(2);
        let g = |x: &FlatProfile<f64>| vec![vec![-2.0 * (x[0][0] - 0.3), 0.0]];
        let mut x = vec![vec![1.0, 0.0]];
        let v = ascend(&mut x, &[true], f, g, 10_000);
        assert!(v > -1e-12);
        assert!((x[0][0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn reach_matches_strategies_module() {
        let g = figures::dory(3).unwrap();
        let m: Model = Model::new(&g);
        let flat = uniform_flat::<f64>(&g);
        let pi = crate::strategies::StrategyProfile::from_flat(&g, flat.clone());
        let a = m.node_reach(&flat);
        let b = crate::strategies::node_reach(&g, &pi);
        assert_eq!(a, b);
    }
}
