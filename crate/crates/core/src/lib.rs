pub mod error;
pub mod game;
pub mod io;
pub mod generators;
pub mod num;
pub mod partial;
pub mod recall;
pub mod solvers;
pub mod strategies;
pub mod vor;

pub use error::{Error, Result};
pub use game::{Game, GameBuilder, GameDraft, InfosetId, NodeId, Owner};
pub use num::Value;
