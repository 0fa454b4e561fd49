//! The small worked examples: Figs 1, 2, 3 and 5, Lenny and Dory.

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::num::Value;

fn v(n: i64) -> Value {
    Value::int(n)
}

fn check_open_unit(eps: &Value) -> Result<()> {
    if eps <= &Value::zero() || eps >= &Value::one() {
        return Err(Error::InvalidParameters(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Two players. P2 moves first (t/w); P1 then faces an absentminded pair of
/// c/d nodes. Leaves: (2,1), (3,0), (0,2ε) and (0,ε).
pub fn fig1(eps: &Value) -> Result<Game> {
    check_open_unit(eps)?;
    let two_eps = &Value::int(2) * eps;
    let mut b = GameBuilder::new(2, "root");
    b.decision("root", 1, &["t", "w"], &["x", "w"])
        .decision("x", 0, &["c", "d"], &["y", "x.d"])
        .decision("y", 0, &["c", "d"], &["y.c", "y.d"])
        .leaf("y.c", vec![v(2), v(1)])
        .leaf("y.d", vec![v(3), v(0)])
        .leaf("x.d", vec![v(0), two_eps])
        .leaf("w", vec![v(0), eps.clone()])
        .infoset(1, "J", &["root"])
        .infoset(0, "I", &["x", "y"]);
    b.build()
}

fn fig2_builder() -> GameBuilder {
    let half = Value::ratio(1, 2);
    let mut b = GameBuilder::new(1, "root");
    b.chance("root", &["l", "r"], &["a", "c"], vec![half.clone(), half])
        .decision("a", 0, &["L", "R"], &["b", "a.R"])
        .decision("b", 0, &["L", "R"], &["b.L", "b.R"])
        .decision("c", 0, &["L", "R"], &["c.L", "c.R"])
        .leaf("a.R", vec![v(0)])
        .leaf("b.L", vec![v(0)])
        .leaf("b.R", vec![v(3)])
        .leaf("c.L", vec![v(0)])
        .leaf("c.R", vec![v(1)]);
    b
}

/// Chance picks `a` or `c`; `a` leads on to `b`; all three share infoset `I`.
pub fn fig2() -> Game {
    let mut b = fig2_builder();
    b.infoset(0, "I", &["a", "b", "c"]);
    b.build().expect("fig2 is valid")
}

/// The `fig2` tree with every decision node in its own infoset.
pub fn fig2_perfect_information() -> Game {
    let mut b = fig2_builder();
    b.infoset(0, "a", &["a"]).infoset(0, "b", &["b"]).infoset(0, "c", &["c"]);
    b.build().expect("fig2 is valid")
}

/// Root infoset `I1` (L/R), then the two successors share `I2`.
pub fn fig3(eps: &Value) -> Result<Game> {
    check_open_unit(eps)?;
    let mut b = GameBuilder::new(1, "root");
    b.decision("root", 0, &["L", "R"], &["a", "b"])
        .decision("a", 0, &["L", "R"], &["a.L", "a.R"])
        .decision("b", 0, &["L", "R"], &["b.L", "b.R"])
        .leaf("a.L", vec![v(1)])
        .leaf("a.R", vec![v(0)])
        .leaf("b.L", vec![eps.clone()])
        .leaf("b.R", vec![v(0)])
        .infoset(0, "I1", &["root"])
        .infoset(0, "I2", &["a", "b"]);
    b.build()
}

fn fig5_builder() -> GameBuilder {
    let mut b = GameBuilder::new(1, "root");
    b.decision("root", 0, &["L", "R"], &["a", "b"])
        .decision("a", 0, &["L", "R"], &["a.L", "a.R"])
        .decision("b", 0, &["L", "R"], &["b.L", "b.R"])
        .leaf("a.L", vec![v(2)])
        .leaf("a.R", vec![v(0)])
        .leaf("b.L", vec![v(0)])
        .leaf("b.R", vec![v(1)]);
    b
}

/// All three decision nodes in one infoset.
pub fn fig5a() -> Game {
    let mut b = fig5_builder();
    b.infoset(0, "I", &["root", "a", "b"]);
    b.build().expect("fig5a is valid")
}

/// `fig5a` with the root split off into its own infoset.
pub fn fig5b() -> Game {
    let mut b = fig5_builder();
    b.infoset(0, "I0", &["root"]).infoset(0, "I", &["a", "b"]);
    b.build().expect("fig5b is valid")
}

pub fn lenny_leaf_name(n: usize) -> String {
    format!("d{}.R", n - 1)
}

/// A chain of `n` nodes in one infoset; only L^(n/2) R^(n/2) pays 1.
pub fn lenny(n: usize) -> Result<Game> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidParameters(format!("lenny needs an even n ≥ 2, got {n}")));
    }
    let names: Vec<String> = (0..n).map(|k| format!("d{k}")).collect();
    let mut b = GameBuilder::new(1, &names[0]);
    for k in 0..n {
        let next = if k + 1 < n { names[k + 1].clone() } else { lenny_leaf_name(n) };
        let (l, r) = if k < n / 2 {
            (next, format!("d{k}.R"))
        } else {
            (format!("d{k}.L"), next)
        };
        b.decision(&names[k], 0, &["L", "R"], &[&l, &r]);
        let dead = if k < n / 2 { r } else { l };
        b.leaf(&dead, vec![v(0)]);
    }
    b.leaf(&lenny_leaf_name(n), vec![v(1)]);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    b.infoset(0, "I", &refs);
    b.build()
}

/// Uniform n-ary chance, then two P1 moves; only copying chance twice pays.
/// The first move is observed, the second layer is one infoset.
pub fn dory(n: usize) -> Result<Game> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("dory needs n ≥ 2, got {n}")));
    }
    let chance_actions: Vec<String> = (1..=n).map(|k| format!("c{k}")).collect();
    let actions: Vec<String> = (1..=n).map(|k| format!("a{k}")).collect();
    let act: Vec<&str> = actions.iter().map(String::as_str).collect();
    let first: Vec<String> = (1..=n).map(|j| format!("f{j}")).collect();
    let mut b = GameBuilder::new(1, "root");
    b.chance(
        "root",
        &chance_actions.iter().map(String::as_str).collect::<Vec<_>>(),
        &first.iter().map(String::as_str).collect::<Vec<_>>(),
        vec![Value::ratio(1, n as i64); n],
    );
    let mut second = Vec::new();
    for j in 1..=n {
        let kids: Vec<String> = (1..=n).map(|k| format!("s{j}.{k}")).collect();
        b.decision(&first[j - 1], 0, &act, &kids.iter().map(String::as_str).collect::<Vec<_>>());
        for k in 1..=n {
            let s = format!("s{j}.{k}");
            let leaves: Vec<String> = (1..=n).map(|l| format!("z{j}.{k}.{l}")).collect();
            b.decision(&s, 0, &act, &leaves.iter().map(String::as_str).collect::<Vec<_>>());
            for l in 1..=n {
                let u = if j == k && k == l { 1 } else { 0 };
                b.leaf(&leaves[l - 1], vec![v(u)]);
            }
            second.push(s);
        }
    }
    for j in 1..=n {
        let name = format!("F{j}");
        b.infoset(0, &name, &[first[j - 1].as_str()]);
    }
    b.infoset(0, "S", &second.iter().map(String::as_str).collect::<Vec<_>>());
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figures_are_valid() {
        let eps = Value::ratio(1, 10);
        for g in [
            fig1(&eps).unwrap(),
            fig2(),
            fig2_perfect_information(),
            fig3(&eps).unwrap(),
            fig5a(),
            fig5b(),
            lenny(4).unwrap(),
            dory(3).unwrap(),
        ] {
            assert!(g.validate().is_valid());
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(lenny(3).is_err());
        assert!(dory(1).is_err());
        assert!(fig1(&Value::int(1)).is_err());
        assert!(fig3(&Value::zero()).is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(lenny(4).unwrap().leaves().len(), 5);
        let d = dory(2).unwrap();
        assert_eq!(d.leaves().len(), 8);
        assert_eq!(d.infosets().len(), 3);
    }
}
