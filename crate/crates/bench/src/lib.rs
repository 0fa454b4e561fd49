//! Shared fixtures for the benchmarks.

use vor_core::generators::{dory, fig2, fig3, lenny, random_game, x3c_game, RandomParams};
use vor_core::solvers::SolverConfig;
use vor_core::{Game, Value};

pub fn config() -> SolverConfig {
    SolverConfig { samples: 1000, ..SolverConfig::default() }
}

pub fn lenny_game(n: usize) -> Game {
    lenny(n).expect("lenny")
}

pub fn dory_game(n: usize) -> Game {
    dory(n).expect("dory")
}

pub fn fig2_game() -> Game {
    fig2()
}

pub fn fig3_game() -> Game {
    fig3(&Value::ratio(1, 10)).expect("fig3")
}

pub fn x3c_yes() -> Game {
    x3c_game(6, &[[1, 2, 3], [4, 5, 6], [1, 2, 4]]).expect("x3c").0
}

/// Single-player absentminded games with chance, seeds 0..count.
pub fn random_games(depth: usize, count: u64) -> Vec<Game> {
    let p = RandomParams { depth, absentminded: true, chance_rate: 0.3, ..RandomParams::default() };
    (0..count).map(|s| random_game(&p, s).expect("random game")).collect()
}
