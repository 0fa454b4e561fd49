//! Single-player games where each infoset picks a subset of a ground set and
//! the payoff is a submodular value of the union of all picks.

use num::{BigRational, Zero};

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::num::Value;

/// Largest ground set on which submodularity is checked exhaustively.
pub const MAX_CHECKED_GROUND: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum SetFunction {
    /// `V(X) = Σ_{e ∈ X} w_e`.
    Weighted(Vec<Value>),
    /// `V` given on every subset, indexed by bitmask over the ground set.
    Table(Vec<Value>),
}

impl SetFunction {
    pub fn eval(&self, mask: u32) -> Value {
        match self {
            SetFunction::Weighted(w) => w
                .iter()
                .enumerate()
                .filter(|(e, _)| mask & (1 << e) != 0)
                .fold(Value::zero(), |acc, (_, x)| &acc + x),
            SetFunction::Table(t) => t[mask as usize].clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidUtilityInstance {
    pub ground: usize,
    pub value: SetFunction,
    /// Per infoset, the selectable subsets as one-based element lists.
    pub menus: Vec<Vec<Vec<usize>>>,
}

impl ValidUtilityInstance {
    /// E = {1,2,3,4} with weights (3,2,2,1) and two infosets of three options.
    pub fn default_instance() -> Self {
        ValidUtilityInstance {
            ground: 4,
            value: SetFunction::Weighted([3, 2, 2, 1].into_iter().map(Value::int).collect()),
            menus: vec![
                vec![vec![1, 2], vec![1, 3], vec![2, 4]],
                vec![vec![3, 4], vec![1, 4], vec![2, 3]],
            ],
        }
    }

    pub fn mask(&self, subset: &[usize]) -> u32 {
        subset.iter().fold(0, |m, &e| m | (1 << (e - 1)))
    }

    /// `V(U(a))` for one option index per infoset; `None` entries pick ∅.
    pub fn value_of(&self, choice: &[Option<usize>]) -> Value {
        let mask = choice
            .iter()
            .zip(&self.menus)
            .filter_map(|(c, menu)| c.map(|k| self.mask(&menu[k])))
            .fold(0, |m, x| m | x);
        self.value.eval(mask)
    }

    pub fn check(&self) -> Result<()> {
        if self.ground == 0 || self.ground > 31 {
            return Err(Error::InvalidParameters("ground set size must be in 1..=31".into()));
        }
        if self.menus.is_empty() || self.menus.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameters("every infoset needs a nonempty menu".into()));
        }
        for menu in &self.menus {
            for s in menu {
                if s.iter().any(|&e| e == 0 || e > self.ground) {
                    return Err(Error::InvalidParameters(format!("menu entry {s:?} leaves the ground set")));
                }
            }
        }
        match &self.value {
            SetFunction::Weighted(w) if w.len() != self.ground => {
                return Err(Error::InvalidParameters("one weight per ground element expected".into()))
            }
            SetFunction::Table(t) if t.len() != 1 << self.ground => {
                return Err(Error::InvalidParameters("value table needs 2^|E| entries".into()))
            }
            _ => {}
        }
        if self.ground <= MAX_CHECKED_GROUND {
            check_submodular(&self.value, self.ground)?;
        } else if matches!(self.value, SetFunction::Table(_)) {
            return Err(Error::CapExceeded(format!("submodularity check on |E| = {}", self.ground)));
        }
        Ok(())
    }
}

/// Exhaustive check of nonnegativity, monotonicity and diminishing returns.
pub fn check_submodular(v: &SetFunction, ground: usize) -> Result<()> {
    let full = 1u32 << ground;
    let val: Vec<BigRational> = (0..full)
        .map(|m| match v.eval(m) {
            Value::Exact(r) => r,
            Value::Float(f) => BigRational::from_float(f).unwrap_or_else(BigRational::zero),
        })
        .collect();
    for m in 0..full {
        if val[m as usize] < BigRational::zero() {
            return Err(Error::InvalidParameters(format!("V is negative on mask {m:#b}")));
        }
        for e in 0..ground {
            let bit = 1 << e;
            if m & bit != 0 {
                continue;
            }
            let gain = &val[(m | bit) as usize] - &val[m as usize];
            if gain < BigRational::zero() {
                return Err(Error::InvalidParameters(format!("V decreases when adding element {}", e + 1)));
            }
            // Diminishing returns against every one-element superset suffices.
            for f in 0..ground {
                let fb = 1 << f;
                if f == e || m & fb != 0 {
                    continue;
                }
                let later = &val[(m | fb | bit) as usize] - &val[(m | fb) as usize];
                if later > gain {
                    return Err(Error::InvalidParameters(format!("V is not submodular at mask {m:#b}")));
                }
            }
        }
    }
    Ok(())
}

fn subset_label(s: &[usize]) -> String {
    let inner: Vec<String> = s.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

/// A chain of infosets, one per menu; every node at depth k is in infoset
/// `I{k+1}`, so earlier picks are forgotten. Leaves pay V of the union.
pub fn valid_utility_game(inst: &ValidUtilityInstance) -> Result<Game> {
    inst.check()?;
    let mut b = GameBuilder::new(1, "v");
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let name = |path: &[usize]| {
        let parts: Vec<String> = path.iter().map(usize::to_string).collect();
        format!("v{}", if parts.is_empty() { String::new() } else { format!(".{}", parts.join(".")) })
    };
    let mut infoset_nodes: Vec<Vec<String>> = Vec::new();
    for menu in &inst.menus {
        let labels: Vec<String> = menu.iter().map(|s| subset_label(s)).collect();
        let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let mut next = Vec::new();
        let mut names = Vec::new();
        for path in &level {
            let kids: Vec<Vec<usize>> = (0..menu.len())
                .map(|k| {
                    let mut p = path.clone();
                    p.push(k);
                    p
                })
                .collect();
            let kid_names: Vec<String> = kids.iter().map(|p| name(p)).collect();
            b.decision(&name(path), 0, &label_refs, &kid_names.iter().map(String::as_str).collect::<Vec<_>>());
            names.push(name(path));
            next.extend(kids);
        }
        infoset_nodes.push(names);
        level = next;
    }
    for path in &level {
        let choice: Vec<Option<usize>> = path.iter().map(|&k| Some(k)).collect();
        b.leaf(&name(path), vec![inst.value_of(&choice)]);
    }
    for (k, names) in infoset_nodes.iter().enumerate() {
        b.infoset(0, &format!("I{}", k + 1), &names.iter().map(String::as_str).collect::<Vec<_>>());
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_instance_builds() {
        let inst = ValidUtilityInstance::default_instance();
        let g = valid_utility_game(&inst).unwrap();
        assert_eq!(g.leaves().len(), 9);
        assert_eq!(g.infosets().len(), 2);
        // {1,2} ∪ {3,4} covers everything.
        assert_eq!(inst.value_of(&[Some(0), Some(0)]), Value::int(8));
    }

    #[test]
    fn rejects_supermodular_table() {
        // V(∅)=0, V({1})=V({2})=1, V({1,2})=3.
        let v = SetFunction::Table(vec![0, 1, 1, 3].into_iter().map(Value::int).collect());
        assert!(check_submodular(&v, 2).is_err());
        let ok = SetFunction::Table(vec![0, 1, 1, 1].into_iter().map(Value::int).collect());
        assert!(check_submodular(&ok, 2).is_ok());
    }
}
