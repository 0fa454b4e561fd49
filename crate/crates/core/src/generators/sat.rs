//! Game built from a 3-CNF formula: a wrong assignment is what pays.

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::num::Value;

/// A clause of three literals; `+v` is x_v and `-v` is ¬x_v, variables one-based.
pub type Clause = [i32; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct SatParams {
    pub eta: Value,
    pub m: Value,
}

impl Default for SatParams {
    fn default() -> Self {
        SatParams {
            eta: Value::one(),
            m: Value::one(),
        }
    }
}

pub fn variable_count(clauses: &[Clause]) -> usize {
    clauses
        .iter()
        .flat_map(|c| c.iter())
        .map(|l| l.unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

fn check_clauses(clauses: &[Clause]) -> Result<()> {
    if clauses.is_empty() {
        return Err(Error::InvalidParameters("formula has no clauses".into()));
    }
    for (k, c) in clauses.iter().enumerate() {
        if c.contains(&0) {
            return Err(Error::InvalidParameters(format!("clause {} has a zero literal", k + 1)));
        }
        let vars: Vec<u32> = c.iter().map(|l| l.unsigned_abs()).collect();
        if vars[0] == vars[1] || vars[0] == vars[2] || vars[1] == vars[2] {
            return Err(Error::InvalidParameters(format!(
                "clause {} does not have three distinct variables",
                k + 1
            )));
        }
    }
    Ok(())
}

fn bits_name(clause: usize, bits: &[bool]) -> String {
    let tail: String = bits.iter().map(|&b| if b { 'T' } else { 'F' }).collect();
    format!("c{clause}:{tail}")
}

/// Root Y/N (N pays η); Y leads to uniform chance over clauses. Each clause
/// subtree starts with a one-action node in its own infoset, followed by a
/// depth-3 binary tree over the clause's variables in literal order. Leaves
/// satisfying the clause pay η, the others M′ + η with M′ = 8·M·η·n.
pub fn sat_game(clauses: &[Clause], params: &SatParams) -> Result<Game> {
    check_clauses(clauses)?;
    if params.eta <= Value::zero() {
        return Err(Error::InvalidParameters("η must be positive".into()));
    }
    if params.m < Value::one() {
        return Err(Error::InvalidParameters("M must be at least 1".into()));
    }
    let n = clauses.len();
    let eta = params.eta.clone();
    let m_prime = &(&(&Value::int(8) * &params.m) * &eta) * &Value::int(n as i64);
    let bad = &m_prime + &eta;

    let mut b = GameBuilder::new(1, "root");
    b.decision("root", 0, &["Y", "N"], &["chance", "N"])
        .leaf("N", vec![eta.clone()]);
    let labels: Vec<String> = (1..=n).map(|k| format!("k{k}")).collect();
    let dummies: Vec<String> = (1..=n).map(|k| format!("c{k}")).collect();
    b.chance(
        "chance",
        &labels.iter().map(String::as_str).collect::<Vec<_>>(),
        &dummies.iter().map(String::as_str).collect::<Vec<_>>(),
        vec![Value::ratio(1, n as i64); n],
    );

    let vars = variable_count(clauses);
    let mut var_nodes: Vec<Vec<String>> = vec![Vec::new(); vars + 1];
    for (k, clause) in clauses.iter().enumerate() {
        let k = k + 1;
        b.decision(&dummies[k - 1], 0, &["go"], &[&bits_name(k, &[])]);
        let mut frontier: Vec<Vec<bool>> = vec![Vec::new()];
        for (depth, &lit) in clause.iter().enumerate() {
            let mut next = Vec::new();
            for bits in &frontier {
                let name = bits_name(k, bits);
                let mut t = bits.clone();
                t.push(true);
                let mut f = bits.clone();
                f.push(false);
                b.decision(&name, 0, &["T", "F"], &[&bits_name(k, &t), &bits_name(k, &f)]);
                var_nodes[lit.unsigned_abs() as usize].push(name);
                next.push(t);
                next.push(f);
            }
            frontier = next;
            if depth == 2 {
                for bits in &frontier {
                    let satisfied = clause.iter().zip(bits).any(|(&l, &val)| (l > 0) == val);
                    let u = if satisfied { eta.clone() } else { bad.clone() };
                    b.leaf(&bits_name(k, bits), vec![u]);
                }
            }
        }
    }
    b.infoset(0, "root", &["root"]);
    for d in &dummies {
        b.infoset(0, d, &[d.as_str()]);
    }
    for (v, nodes) in var_nodes.iter().enumerate().skip(1) {
        if !nodes.is_empty() {
            b.infoset(0, &format!("x{v}"), &nodes.iter().map(String::as_str).collect::<Vec<_>>());
        }
    }
    b.build()
}

/// Parses clauses like `1 2 3, -1 2 3`.
pub fn parse_cnf(text: &str) -> Result<Vec<Clause>> {
    text.split([',', ';'])
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let lits: Vec<i32> = part
                .split_whitespace()
                .map(|t| t.parse::<i32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidParameters(format!("bad literal in `{part}`: {e}")))?;
            <[i32; 3]>::try_from(lits)
                .map_err(|_| Error::InvalidParameters(format!("clause `{}` needs 3 literals", part.trim())))
        })
        .collect()
}

/// All eight sign patterns over x1, x2, x3.
pub fn all_eight_clauses() -> Vec<Clause> {
    (0..8)
        .map(|mask| {
            let s = |bit: i32, v: i32| if mask & bit != 0 { -v } else { v };
            [s(1, 1), s(2, 2), s(4, 3)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_is_three_plus_sixteen_per_clause() {
        let phi = all_eight_clauses();
        let g = sat_game(&phi, &SatParams::default()).unwrap();
        assert_eq!(g.nodes().len(), 3 + 16 * 8);
        assert!(g.nodes().len() <= 2 + 8 * (1 + 16));
    }

    #[test]
    fn rejects_repeated_variable() {
        assert!(sat_game(&[[1, -1, 2]], &SatParams::default()).is_err());
        assert!(parse_cnf("1 2").is_err());
        assert_eq!(parse_cnf("1 2 3, -1 2 3").unwrap(), vec![[1, 2, 3], [-1, 2, 3]]);
    }
}
