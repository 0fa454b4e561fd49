//! Deterministic constructors for the worked examples, the two reduction
//! families, valid-utility games and random games.

pub mod figures;
pub mod random;
pub mod sat;
pub mod valid_utility;
pub mod x3c;

pub use figures::{dory, fig1, fig2, fig2_perfect_information, fig3, fig5a, fig5b, lenny};
pub use random::{random_game, RandomParams};
pub use sat::{sat_game, Clause, SatParams};
pub use valid_utility::{valid_utility_game, SetFunction, ValidUtilityInstance};
pub use x3c::x3c_game;

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::num::Value;

/// Uniform chance over `n` branches, each holding a Lenny chain of length
/// `m`; every chain node shares one infoset.
pub fn lenny_under_dory(n: usize, m: usize) -> Result<Game> {
    if n < 2 || m < 2 || m % 2 == 1 {
        return Err(Error::InvalidParameters(format!("need n ≥ 2 and even m ≥ 2, got n={n}, m={m}")));
    }
    let labels: Vec<String> = (1..=n).map(|j| format!("c{j}")).collect();
    let heads: Vec<String> = (1..=n).map(|j| format!("b{j}.d0")).collect();
    let mut b = GameBuilder::new(1, "root");
    b.chance(
        "root",
        &labels.iter().map(String::as_str).collect::<Vec<_>>(),
        &heads.iter().map(String::as_str).collect::<Vec<_>>(),
        vec![Value::ratio(1, n as i64); n],
    );
    let mut members = Vec::new();
    for j in 1..=n {
        for k in 0..m {
            let here = format!("b{j}.d{k}");
            let next = if k + 1 < m { format!("b{j}.d{}", k + 1) } else { format!("b{j}.win") };
            let dead = format!("b{j}.d{k}.x");
            let (l, r) = if k < m / 2 { (next, dead.clone()) } else { (dead.clone(), next) };
            b.decision(&here, 0, &["L", "R"], &[&l, &r]);
            b.leaf(&dead, vec![Value::zero()]);
            members.push(here);
        }
        b.leaf(&format!("b{j}.win"), vec![Value::one()]);
    }
    b.infoset(0, "I", &members.iter().map(String::as_str).collect::<Vec<_>>());
    b.build()
}
