//! Value of recall, the coefficients behind its bounds, and smoothness.

mod bounds;
mod coefficients;
mod smooth;

pub use bounds::{bound_am, bound_am_entropy, bound_chance, bound_composed};
pub use coefficients::{
    am_coefficient, am_witness, beta_leaf_bound, branching_factor, chance_coefficient, coefficient_table,
    max_branching, pure_chance_identity, ChanceBranching, CoefficientTable, LeafCoefficients, PureChanceIdentity,
};
pub use smooth::{
    smooth_bounds, smooth_equilibrium_check, smoothness_check, SmoothBounds, SmoothEquilibria, SmoothnessReport,
    SmoothnessVerdict,
};

use num::BigRational;
use serde::Serialize;

use crate::error::Result;
use crate::game::Game;
use crate::num::Value;
use crate::recall::perfect_recall_refinement;
use crate::solvers::{solve, Concept, ConceptKind, SolveReport, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum VorRatio {
    Finite(Value),
    /// Denominator zero, numerator positive.
    Infinite,
    /// Denominator zero and numerator not positive.
    Undefined,
}

impl VorRatio {
    pub fn new(numerator: &Value, denominator: &Value) -> Self {
        if !denominator.is_zero() {
            VorRatio::Finite(numerator / denominator)
        } else if *numerator > Value::zero() {
            VorRatio::Infinite
        } else {
            VorRatio::Undefined
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            VorRatio::Finite(v) => v.to_f64(),
            VorRatio::Infinite => f64::INFINITY,
            VorRatio::Undefined => f64::NAN,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundPanel {
    /// `max u / max am·u` and `1/am(z*)`; games without chance.
    pub am: Option<(Value, Value)>,
    /// `OPT(pr_1) / max χ·u` and `max β`; games without absentmindedness.
    pub chance: Option<(Value, Value)>,
    pub composed: Option<Value>,
    /// Entropy bound at the first utility maximizer; games without chance.
    pub entropy: Option<Value>,
    /// Whether each bound dominates the ratio; filled for OPT only.
    pub satisfied: Vec<(String, bool)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VorSide {
    pub utility: Value,
    pub certified: String,
    pub residual: f64,
}

impl From<&SolveReport> for VorSide {
    fn from(r: &SolveReport) -> Self {
        VorSide {
            utility: r.utilities[0].clone(),
            certified: r.certified.to_string(),
            residual: r.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VorReport {
    pub concept: String,
    /// Player 1 under the concept in `pr_1(g)`.
    pub numerator: VorSide,
    /// Player 1 under the concept in `g`.
    pub denominator: VorSide,
    pub ratio: VorRatio,
    pub bounds: BoundPanel,
}

fn panel(g: &Game, cfg: &SolverConfig) -> BoundPanel {
    let mut p = BoundPanel::default();
    if g.players() != 1 {
        return p;
    }
    p.am = bound_am(g).ok();
    p.chance = bound_chance(g, cfg).ok();
    p.composed = bound_composed(g).ok();
    if !g.has_chance() {
        let top = g
            .leaves()
            .iter()
            .copied()
            .reduce(|a, b| if g.utility(b, 0) > g.utility(a, 0) { b } else { a });
        p.entropy = top.and_then(|z| bound_am_entropy(g, z).ok()).map(Value::Exact);
    }
    p
}

fn fill_flags(p: &mut BoundPanel, ratio: f64) {
    let ok = |b: &Value| b.to_f64() >= ratio - 1e-6;
    let mut flags = Vec::new();
    if let Some((b1, b2)) = &p.am {
        flags.push(("am-max".to_string(), ok(b1)));
        flags.push(("am-argmax".to_string(), ok(b2)));
    }
    if let Some((b1, b2)) = &p.chance {
        flags.push(("chance-opt".to_string(), ok(b1)));
        flags.push(("chance-branching".to_string(), ok(b2)));
    }
    if let Some(b) = &p.composed {
        flags.push(("composed".to_string(), ok(b)));
    }
    if let Some(b) = &p.entropy {
        flags.push(("entropy".to_string(), ok(b)));
    }
    p.satisfied = flags;
}

/// Solves `concept` for Player 1 in `g` and in `pr_1(g)` and reports the
/// ratio together with the bound panel.
pub fn vor_compute(g: &Game, concept: Concept, cfg: &SolverConfig) -> Result<VorReport> {
    let coarse = solve(g, concept, cfg)?;
    let (pr, _) = perfect_recall_refinement(g, 0)?;
    let fine = solve(&pr, concept, cfg)?;
    let numerator = VorSide::from(&fine);
    let denominator = VorSide::from(&coarse);
    let ratio = VorRatio::new(&numerator.utility, &denominator.utility);
    let mut bounds = panel(g, cfg);
    if concept.kind == ConceptKind::Opt {
        if let VorRatio::Finite(r) = &ratio {
            fill_flags(&mut bounds, r.to_f64());
        }
    }
    Ok(VorReport {
        concept: concept.to_string(),
        numerator,
        denominator,
        ratio,
        bounds,
    })
}

/// The exact ratio when both sides are exact.
pub fn exact_ratio(r: &VorReport) -> Option<BigRational> {
    match &r.ratio {
        VorRatio::Finite(Value::Exact(q)) => Some(q.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::figures;
    use crate::solvers::Selector;

    #[test]
    fn fig2_value_of_recall() {
        let g = figures::fig2();
        let r = vor_compute(&g, Concept::OPT, &SolverConfig::default()).unwrap();
        assert_eq!(r.ratio, VorRatio::Finite(Value::ratio(9, 4)));
        assert_eq!(r.bounds.composed, Some(Value::int(8)));
        assert!(r.bounds.satisfied.iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn fig3_worst_edt() {
        let g = figures::fig3(&Value::ratio(1, 10)).unwrap();
        let c = Concept::new(ConceptKind::Edt, Selector::Worst);
        let r = vor_compute(&g, c, &SolverConfig::default()).unwrap();
        assert_eq!(r.ratio, VorRatio::Finite(Value::ratio(1, 10)));
    }

    #[test]
    fn ratio_flags() {
        assert_eq!(VorRatio::new(&Value::one(), &Value::zero()), VorRatio::Infinite);
        assert_eq!(VorRatio::new(&Value::zero(), &Value::zero()), VorRatio::Undefined);
        assert_eq!(VorRatio::new(&Value::int(3), &Value::int(2)), VorRatio::Finite(Value::ratio(3, 2)));
    }

    #[test]
    fn lenny_panel() {
        let g = figures::lenny(4).unwrap();
        let r = vor_compute(&g, Concept::OPT, &SolverConfig::default()).unwrap();
        assert_eq!(r.ratio, VorRatio::Finite(Value::int(16)));
        assert_eq!(r.bounds.am, Some((Value::int(16), Value::int(16))));
        assert_eq!(r.bounds.entropy, Some(Value::int(16)));
        assert_eq!(r.bounds.satisfied.len(), 4);
        assert!(r.bounds.satisfied.iter().all(|(_, ok)| *ok));
    }
}
