//! Game and strategy files, report serialization and DOT export.

use std::fmt::Write as _;
use std::path::Path;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, GameDraft, InfosetId, Owner};
use crate::num::{fmt_sig, Scalar, Value};
use crate::solvers::{Certification, SolveReport};
use crate::strategies::{BehavioralStrategy, StrategyProfile};

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses a game file without validating it.
pub fn parse_draft(text: &str) -> Result<GameDraft> {
    serde_json::from_str(text).map_err(parse_error)
}

/// Parses and validates a game file.
pub fn parse_game(text: &str) -> Result<Game> {
    Game::from_draft(&parse_draft(text)?)
}

pub fn read_game(path: impl AsRef<Path>) -> Result<Game> {
    parse_game(&std::fs::read_to_string(path)?)
}

pub fn game_to_string(g: &Game) -> String {
    let mut s = serde_json::to_string_pretty(&g.to_draft()).expect("drafts serialize");
    s.push('\n');
    s
}

pub fn write_game(g: &Game, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, game_to_string(g))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub infoset: String,
    pub probs: Vec<Value>,
}

/// One player's strategy as written to disk; `player` is one-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyFile {
    pub player: usize,
    pub entries: Vec<StrategyEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StrategyDoc {
    One(StrategyFile),
    Many(Vec<StrategyFile>),
}

pub fn strategy_file<S: Scalar>(g: &Game, s: &BehavioralStrategy<S>) -> StrategyFile {
    StrategyFile {
        player: s.player + 1,
        entries: g
            .player_infosets(s.player)
            .iter()
            .zip(&s.table)
            .map(|(&i, row)| StrategyEntry {
                infoset: g.infoset(i).name.clone(),
                probs: row.iter().map(Scalar::to_value).collect(),
            })
            .collect(),
    }
}

pub fn profile_files<S: Scalar>(g: &Game, pi: &StrategyProfile<S>) -> Vec<StrategyFile> {
    pi.strategies.iter().map(|s| strategy_file(g, s)).collect()
}

pub fn profile_to_string<S: Scalar>(g: &Game, pi: &StrategyProfile<S>) -> String {
    let mut s = serde_json::to_string_pretty(&profile_files(g, pi)).expect("profiles serialize");
    s.push('\n');
    s
}

/// A profile read from disk, with its exact view when every entry is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedProfile {
    pub profile: StrategyProfile<f64>,
    pub exact: Option<StrategyProfile<BigRational>>,
}

/// Reads a profile: a list of strategies, or a single strategy for a
/// one-player game. Infosets missing from the entries play uniformly.
pub fn parse_profile(g: &Game, text: &str) -> Result<ParsedProfile> {
    let files = match serde_json::from_str::<StrategyDoc>(text).map_err(parse_error)? {
        StrategyDoc::One(f) => vec![f],
        StrategyDoc::Many(v) => v,
    };
    let mut tables: Vec<Vec<Vec<Value>>> = (0..g.players())
        .map(|i| {
            g.player_infosets(i)
                .iter()
                .map(|&id| {
                    let n = g.num_actions(id);
                    vec![Value::ratio(1, n as i64); n]
                })
                .collect()
        })
        .collect();
    for f in files {
        if f.player == 0 || f.player > g.players() {
            return Err(Error::UnknownPlayer(f.player));
        }
        let i = f.player - 1;
        for e in f.entries {
            let id: InfosetId = g.infoset_by_name(&e.infoset)?;
            let set = g.infoset(id);
            if set.player != i {
                return Err(Error::InvalidStrategy(format!(
                    "infoset `{}` belongs to P{}, listed under P{}",
                    set.name,
                    set.player + 1,
                    f.player
                )));
            }
            tables[i][set.local_index] = e.probs;
        }
    }
    let exact = tables
        .iter()
        .enumerate()
        .map(|(player, t)| {
            let table = t
                .iter()
                .map(|row| row.iter().map(|v| v.as_exact().cloned()).collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()?;
            Some(BehavioralStrategy { player, table })
        })
        .collect::<Option<Vec<_>>>()
        .map(StrategyProfile::new);
    let profile = StrategyProfile::new(
        tables
            .iter()
            .enumerate()
            .map(|(player, t)| BehavioralStrategy {
                player,
                table: t.iter().map(|row| row.iter().map(Value::to_f64).collect()).collect(),
            })
            .collect(),
    );
    match &exact {
        Some(e) => e.validate(g)?,
        None => profile.validate(g)?,
    }
    Ok(ParsedProfile { profile, exact })
}

pub fn read_profile(g: &Game, path: impl AsRef<Path>) -> Result<ParsedProfile> {
    parse_profile(g, &std::fs::read_to_string(path)?)
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    concept: String,
    utilities: &'a [Value],
    utilities_approx: Vec<String>,
    residual: String,
    certified: &'a Certification,
    profile: Vec<StrategyFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_profile: Option<Vec<StrategyFile>>,
    notes: &'a [String],
}

/// A solve report as structured text.
pub fn report_to_string(g: &Game, r: &SolveReport) -> String {
    let doc = ReportDoc {
        concept: r.concept.to_string(),
        utilities: &r.utilities,
        utilities_approx: r.utilities.iter().map(|u| fmt_sig(u.to_f64())).collect(),
        residual: fmt_sig(r.residual),
        certified: &r.certified,
        profile: profile_files(g, &r.profile),
        exact_profile: r.exact_profile.as_ref().map(|p| profile_files(g, p)),
        notes: &r.notes,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Graphviz text: chance nodes as boxes, leaves as plain payoff labels and
/// infosets as dashed undirected links between consecutive members.
pub fn export_dot(g: &Game, pi: Option<&StrategyProfile<f64>>) -> String {
    let mut out = String::from("digraph game {\n  node [shape=circle];\n");
    for n in g.nodes() {
        let attrs = match n.owner {
            Owner::Chance => format!("shape=box, label={}", quote(&n.name)),
            Owner::Terminal => {
                let utils: Vec<String> = n.utils.iter().map(Value::to_string).collect();
                format!("shape=plaintext, label={}", quote(&format!("({})", utils.join(", "))))
            }
            Owner::Player(i) => format!("label={}", quote(&format!("{}\\nP{}", n.name, i + 1))),
        };
        let _ = writeln!(out, "  {} [{attrs}];", quote(&n.name));
    }
    for (k, n) in g.nodes().iter().enumerate() {
        for (a, c) in n.children.iter().enumerate() {
            let mut label = n.actions[a].clone();
            match n.owner {
                Owner::Chance => {
                    let _ = write!(label, " {}", n.chance_probs[a]);
                }
                Owner::Player(_) => {
                    if let Some(p) = pi {
                        let _ = write!(label, " ({})", fmt_sig(p.action_prob(g, crate::game::NodeId(k), a)));
                    }
                }
                Owner::Terminal => {}
            }
            let _ = writeln!(out, "  {} -> {} [label={}];", quote(&n.name), quote(&g.node(*c).name), quote(&label));
        }
    }
    for set in g.infosets() {
        for w in set.nodes.windows(2) {
            let _ = writeln!(
                out,
                "  {} -> {} [style=dashed, dir=none, constraint=false, label={}];",
                quote(&g.node(w[0]).name),
                quote(&g.node(w[1]).name),
                quote(&set.name)
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;

    #[test]
    fn game_round_trip() {
        let g = figures::fig2();
        let back = parse_game(&game_to_string(&g)).unwrap();
        assert_eq!(back.to_draft(), g.to_draft());
        let f1 = figures::fig1(&Value::ratio(1, 100)).unwrap();
        assert_eq!(parse_game(&game_to_string(&f1)).unwrap().to_draft(), f1.to_draft());
    }

    #[test]
    fn zero_denominator_is_a_parse_error() {
        let text = game_to_string(&figures::fig2()).replacen("\"1/2\"", "\"1/0\"", 1);
        match parse_game(&text) {
            Err(Error::Parse { line, column, .. }) => assert!(line > 1 && column > 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_child_is_named() {
        let text = game_to_string(&figures::fig2()).replacen("\"b.L\",", "\"ghost\",", 1);
        let err = parse_game(&text).unwrap_err().to_string();
        assert!(err.contains("ghost"), "{err}");
    }

    #[test]
    fn profile_round_trip() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let pi = StrategyProfile::<BigRational>::pure(&g, &[1, 0]).unwrap();
        let text = profile_to_string(&g, &pi);
        let back = parse_profile(&g, &text).unwrap();
        assert_eq!(back.exact.unwrap(), pi);
        let single = r#"{"player": 1, "entries": [{"infoset": "I2", "probs": ["1/3", "2/3"]}]}"#;
        let p = parse_profile(&g, single).unwrap().profile;
        assert_eq!(p.strategies[0].table[0], vec![0.5, 0.5]);
        assert!(parse_profile(&g, r#"{"player": 1, "entries": [{"infoset": "I2", "probs": [1, 1]}]}"#).is_err());
    }

    #[test]
    fn dot_styles() {
        let g = figures::fig2();
        let dot = export_dot(&g, None);
        assert_eq!(dot.matches("shape=box").count(), 1);
        assert_eq!(dot.matches("style=dashed").count(), 2);
        assert!(!dot.contains(" ("));
        assert_eq!(dot, export_dot(&g, None));
        let pi = StrategyProfile::uniform(&g);
        assert!(export_dot(&g, Some(&pi)).contains("L (0.500000000000)"));
    }
}
