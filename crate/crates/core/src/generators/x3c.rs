//! Exact cover by 3-sets as a single-player game.

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::num::Value;

/// Chance draws an element of {1..n} uniformly. The player first observes it
/// through a one-action node in its own infoset, then forgets it and names a
/// set of the family; the payoff is 1 when the set contains the element.
///
/// Returns the game and the split budget k = n/3 − 1.
pub fn x3c_game(n: usize, family: &[[usize; 3]]) -> Result<(Game, usize)> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(Error::InvalidParameters(format!("universe size must be a positive multiple of 3, got {n}")));
    }
    if family.is_empty() {
        return Err(Error::InvalidParameters("family is empty".into()));
    }
    for (j, f) in family.iter().enumerate() {
        if f.iter().any(|&u| u == 0 || u > n) {
            return Err(Error::InvalidParameters(format!("set F{} has an element outside 1..={n}", j + 1)));
        }
        if f[0] == f[1] || f[0] == f[2] || f[1] == f[2] {
            return Err(Error::InvalidParameters(format!("set F{} has repeated elements", j + 1)));
        }
    }
    let m = n / 3;
    let labels: Vec<String> = (1..=n).map(|u| format!("u{u}")).collect();
    let observe: Vec<String> = (1..=n).map(|u| format!("h{u}")).collect();
    let choose: Vec<String> = (1..=n).map(|u| format!("g{u}")).collect();
    let sets: Vec<String> = (1..=family.len()).map(|j| format!("F{j}")).collect();
    let set_refs: Vec<&str> = sets.iter().map(String::as_str).collect();

    let mut b = GameBuilder::new(1, "root");
    b.chance(
        "root",
        &labels.iter().map(String::as_str).collect::<Vec<_>>(),
        &observe.iter().map(String::as_str).collect::<Vec<_>>(),
        vec![Value::ratio(1, n as i64); n],
    );
    for u in 1..=n {
        b.decision(&observe[u - 1], 0, &["observe"], &[&choose[u - 1]]);
        let leaves: Vec<String> = (1..=family.len()).map(|j| format!("z{u}.{j}")).collect();
        b.decision(&choose[u - 1], 0, &set_refs, &leaves.iter().map(String::as_str).collect::<Vec<_>>());
        for (j, f) in family.iter().enumerate() {
            let hit = f.contains(&u);
            b.leaf(&leaves[j], vec![Value::int(hit as i64)]);
        }
    }
    for u in 1..=n {
        b.infoset(0, &format!("H{u}"), &[observe[u - 1].as_str()]);
    }
    b.infoset(0, "G", &choose.iter().map(String::as_str).collect::<Vec<_>>());
    Ok((b.build()?, m - 1))
}

/// Brute-force exact-cover test, for cross-checking the game.
pub fn has_exact_cover(n: usize, family: &[[usize; 3]]) -> bool {
    fn go(covered: u64, full: u64, family: &[[usize; 3]], start: usize) -> bool {
        if covered == full {
            return true;
        }
        (start..family.len()).any(|j| {
            let mask = family[j].iter().fold(0u64, |m, &u| m | (1 << (u - 1)));
            covered & mask == 0 && go(covered | mask, full, family, j + 1)
        })
    }
    n < 64 && go(0, (1u64 << n) - 1, family, 0)
}
