//! Optimal strategies, equilibrium checks and equilibrium enumeration for
//! small games.

mod checks;
mod enumerate;
mod model;
mod optimal;
mod rational;
pub mod simplex;

pub use checks::{cdt_check, cdt_utility, edt_check, edt_incentive, kkt_check, nash_check, CheckResult};
pub use enumerate::{best_worst, enumerate_equilibria, solve};
pub use model::{ascend, Model, Restricted};
pub use optimal::optimal_strategy;
pub use rational::{cdt_nash_check, cdt_rational_check, edt_nash_check, edt_rational_check, RationalityVerdict};

use std::fmt;
use std::str::FromStr;

use num::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Value;
use crate::strategies::StrategyProfile;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Grid resolution for mixed-profile scans.
    pub delta: f64,
    pub multistart: usize,
    pub max_iters: usize,
    pub eq_tol: f64,
    pub support_tol: f64,
    /// Perturbation rates for the rationality checks, strictly decreasing.
    pub schedule: Vec<f64>,
    /// Leading schedule points used to fit the decay constant.
    pub fit_points: usize,
    /// Pure profiles enumerated as seeds before switching to sampling.
    pub max_pure: usize,
    pub pure_samples: usize,
    /// Branch-and-bound node budget for pure optimal strategies.
    pub max_search_nodes: usize,
    pub max_grid_points: usize,
    pub max_infosets: usize,
    /// Non-equilibrium seeds refined by local ascent.
    pub max_polish: usize,
    /// Witness completions tried per player in the Nash-refinement checks.
    pub max_candidates: usize,
    pub dedup_tol: f64,
    pub max_denominator: u64,
    /// Random mixed profiles in the smoothness check.
    pub samples: usize,
    /// Partial-refinement enumeration cap.
    pub max_refinements: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 1.0 / 64.0,
            multistart: 16,
            max_iters: 10_000,
            eq_tol: 1e-6,
            support_tol: 1e-9,
            schedule: (1..=20).map(|k| 0.5f64.powi(k)).collect(),
            fit_points: 5,
            max_pure: 65_536,
            pure_samples: 4096,
            max_search_nodes: 1 << 22,
            max_grid_points: 100_000,
            max_infosets: 64,
            max_polish: 64,
            max_candidates: 256,
            dedup_tol: 1e-6,
            max_denominator: 1000,
            samples: 10_000,
            max_refinements: 100_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameters(m.to_string()));
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        if !(self.eq_tol > 0.0 && self.support_tol > 0.0 && self.dedup_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.multistart == 0 || self.max_iters == 0 || self.max_grid_points == 0 || self.max_denominator == 0 {
            return bad("counts must be positive");
        }
        if self.schedule.is_empty() || self.schedule.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return bad("schedule entries must lie in (0, 1)");
        }
        if self.schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("schedule must be strictly decreasing");
        }
        if self.fit_points == 0 || self.fit_points > self.schedule.len() {
            return bad("fit_points must be between 1 and the schedule length");
        }
        Ok(())
    }

    /// Grid denominator implied by `delta`.
    pub fn grid_steps(&self) -> usize {
        (1.0 / self.delta).round().max(1.0) as usize
    }

    pub(crate) fn snap_denominator(&self) -> u64 {
        self.max_denominator.max(self.grid_steps() as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certification {
    Exact,
    /// Exhaustive scan at resolution `delta`; `gap` bounds the distance to
    /// the true optimum when known.
    GridCertified { delta: f64, gap: Option<f64> },
    Heuristic,
}

impl fmt::Display for Certification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certification::Exact => write!(f, "exact"),
            Certification::GridCertified { delta, gap: Some(g) } => {
                write!(f, "grid-certified(δ={}, gap≤{})", crate::num::fmt_sig(*delta), crate::num::fmt_sig(*g))
            }
            Certification::GridCertified { delta, gap: None } => {
                write!(f, "grid-certified(δ={})", crate::num::fmt_sig(*delta))
            }
            Certification::Heuristic => write!(f, "heuristic"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConceptKind {
    Opt,
    Edt,
    Cdt,
    EdtNash,
    CdtNash,
    Nash,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    Best,
    Worst,
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Concept {
    pub kind: ConceptKind,
    pub selector: Selector,
}

impl Concept {
    pub const fn new(kind: ConceptKind, selector: Selector) -> Self {
        Concept { kind, selector }
    }

    pub const OPT: Concept = Concept::new(ConceptKind::Opt, Selector::Best);

    /// Best and worst CDT, EDT and Nash.
    pub fn classic_six() -> [Concept; 6] {
        use ConceptKind::*;
        use Selector::*;
        [
            Concept::new(Cdt, Worst),
            Concept::new(Cdt, Best),
            Concept::new(Edt, Worst),
            Concept::new(Edt, Best),
            Concept::new(Nash, Worst),
            Concept::new(Nash, Best),
        ]
    }
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConceptKind::Opt => "OPT",
            ConceptKind::Edt => "EDT",
            ConceptKind::Cdt => "CDT",
            ConceptKind::EdtNash => "EDT-NASH",
            ConceptKind::CdtNash => "CDT-NASH",
            ConceptKind::Nash => "NASH",
        })
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == ConceptKind::Opt {
            return write!(f, "OPT");
        }
        match self.selector {
            Selector::Best => write!(f, "b{}", self.kind),
            Selector::Worst => write!(f, "w{}", self.kind),
            Selector::Any => write!(f, "{}", self.kind),
        }
    }
}

impl FromStr for ConceptKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "opt" => Ok(ConceptKind::Opt),
            "edt" => Ok(ConceptKind::Edt),
            "cdt" => Ok(ConceptKind::Cdt),
            "edt-nash" => Ok(ConceptKind::EdtNash),
            "cdt-nash" => Ok(ConceptKind::CdtNash),
            "nash" => Ok(ConceptKind::Nash),
            other => Err(Error::InvalidParameters(format!("unknown concept `{other}`"))),
        }
    }
}

impl FromStr for Concept {
    type Err = Error;

    /// Accepts `opt`, `edt`, `bedt`, `wcdt-nash` and so on, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if let Ok(kind) = t.parse::<ConceptKind>() {
            let selector = if kind == ConceptKind::Opt { Selector::Best } else { Selector::Any };
            return Ok(Concept { kind, selector });
        }
        let (selector, rest) = match t.split_at(1.min(t.len())) {
            ("b", rest) => (Selector::Best, rest),
            ("w", rest) => (Selector::Worst, rest),
            _ => return Err(Error::InvalidParameters(format!("unknown concept `{s}`"))),
        };
        let kind: ConceptKind = rest
            .parse()
            .map_err(|_| Error::InvalidParameters(format!("unknown concept `{s}`")))?;
        if kind == ConceptKind::Opt {
            return Err(Error::InvalidParameters(format!("unknown concept `{s}`")));
        }
        Ok(Concept { kind, selector })
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub concept: Concept,
    pub profile: StrategyProfile<f64>,
    pub exact_profile: Option<StrategyProfile<BigRational>>,
    pub utilities: Vec<Value>,
    pub residual: f64,
    pub certified: Certification,
    pub notes: Vec<String>,
}

impl SolveReport {
    /// Player 1's utility as a float.
    pub fn p1(&self) -> f64 {
        self.utilities[0].to_f64()
    }
}
