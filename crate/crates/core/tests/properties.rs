use num::BigRational;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use vor_core::game::GameDraft;
use vor_core::generators::{random_game, sat_game, RandomParams, SatParams};
use vor_core::partial::{enumerate_k_refinements, is_partial_refinement, k_best_partial};
use vor_core::recall::{
    check_coarsest, dummy_node_transform, has_perfect_recall, perfect_recall_refinement, refines,
};
use vor_core::solvers::{
    best_worst, cdt_check, edt_check, optimal_strategy, ConceptKind, Selector, SolverConfig,
};
use vor_core::strategies::{
    expected_utility, fix_opponents, lift_strategy, node_reach, utility_gradient, StrategyProfile,
};
use vor_core::vor::{
    am_coefficient, bound_am, bound_am_entropy, bound_chance, bound_composed, coefficient_table, vor_compute, VorRatio,
};
use vor_core::solvers::Concept;
use vor_core::{Game, InfosetId, NodeId, Owner, Value};

fn params() -> impl Strategy<Value = RandomParams> {
    (1usize..=2, 2usize..=5, 2usize..=3, 0.0f64..0.8, 0.0f64..0.4, any::<bool>()).prop_map(
        |(players, depth, branching, merge_rate, chance_rate, absentminded)| RandomParams {
            players,
            depth,
            branching,
            merge_rate,
            chance_rate,
            absentminded,
            ..RandomParams::default()
        },
    )
}

fn single(depth: usize, chance: f64, absentminded: bool) -> RandomParams {
    RandomParams {
        depth,
        chance_rate: chance,
        absentminded,
        merge_rate: 0.6,
        ..RandomParams::default()
    }
}

fn random_profile(g: &Game, weights: &[f64]) -> StrategyProfile<f64> {
    let mut k = 0;
    let flat = g
        .infosets()
        .iter()
        .map(|s| {
            let row: Vec<f64> = (0..s.actions.len())
                .map(|_| {
                    k += 1;
                    0.05 + weights[k % weights.len()]
                })
                .collect();
            let total: f64 = row.iter().sum();
            row.into_iter().map(|x| x / total).collect()
        })
        .collect();
    StrategyProfile::from_flat(g, flat)
}

fn ancestors_share_infoset(g: &Game, player: usize) -> bool {
    g.nodes().iter().enumerate().any(|(k, n)| {
        n.owner == Owner::Player(player)
            && g.path(NodeId(k)).iter().any(|(a, _)| g.node(*a).infoset == n.infoset)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn structure(p in params(), seed in any::<u64>()) {
        let g = random_game(&p, seed).unwrap();
        prop_assert!(g.validate().is_empty());
        for h in g.node_ids() {
            prop_assert_eq!(g.obs(h).len(), g.seq(h).len());
        }
        for (k, n) in g.nodes().iter().enumerate() {
            if let Owner::Player(i) = n.owner {
                let holders: Vec<InfosetId> = g
                    .player_infosets(i)
                    .iter()
                    .copied()
                    .filter(|&s| g.infoset(s).nodes.contains(&NodeId(k)))
                    .collect();
                prop_assert_eq!(holders.len(), 1);
                prop_assert_eq!(Some(holders[0]), n.infoset);
            }
        }
        for i in 0..g.players() {
            prop_assert_eq!(g.has_absentmindedness(i).unwrap(), ancestors_share_infoset(&g, i));
        }
    }

    #[test]
    fn refinement_laws(p in params(), seed in any::<u64>()) {
        let g = random_game(&p, seed).unwrap();
        for i in 0..g.players() {
            let (pr, _) = perfect_recall_refinement(&g, i).unwrap();
            prop_assert!(refines(&pr, &g, i).unwrap().is_some());
            prop_assert!(has_perfect_recall(&pr, i).unwrap());
            prop_assert!(check_coarsest(&g, i, &pr).unwrap());
            let (again, _) = perfect_recall_refinement(&pr, i).unwrap();
            prop_assert_eq!(again.canonical_partition(i), pr.canonical_partition(i));
        }
    }

    #[test]
    fn reach_sums_to_one(p in params(), seed in any::<u64>(), w in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let g = random_game(&p, seed).unwrap();
        let pi = random_profile(&g, &w);
        let reach = node_reach(&g, &pi);
        let total: f64 = g.leaves().iter().map(|z| reach[z.0]).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let exact = StrategyProfile::<BigRational>::uniform(&g);
        let reach = node_reach(&g, &exact);
        let total = g.leaves().iter().fold(BigRational::from_integer(0.into()), |a, z| a + &reach[z.0]);
        prop_assert_eq!(total, BigRational::from_integer(1.into()));
    }

    #[test]
    fn gradient_matches_finite_differences(p in params(), seed in any::<u64>(), w in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let g = random_game(&p, seed).unwrap();
        let pi = random_profile(&g, &w);
        let h = 1e-6;
        for player in 0..g.players() {
            for (k, set) in g.infosets().iter().enumerate() {
                for a in 0..set.actions.len() {
                    let grad = utility_gradient(&g, &pi, player, InfosetId(k), a).unwrap();
                    let shifted = |d: f64| {
                        let mut flat = pi.flat(&g);
                        flat[k][a] += d;
                        expected_utility(&g, &StrategyProfile::from_flat(&g, flat), player, g.root())
                    };
                    let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                    prop_assert!((grad - fd).abs() <= 1e-6 * grad.abs().max(1.0), "{} vs {}", grad, fd);
                }
            }
        }
    }

    #[test]
    fn lifting_and_fixing_preserve_utility(p in params(), seed in any::<u64>()) {
        let g = random_game(&p, seed).unwrap();
        let pi = StrategyProfile::<BigRational>::uniform(&g);
        for i in 0..g.players() {
            let (pr, plan) = perfect_recall_refinement(&g, i).unwrap();
            let lifted = lift_strategy(&g, &pr, &plan, &pi).unwrap();
            for j in 0..g.players() {
                prop_assert_eq!(
                    expected_utility(&pr, &lifted, j, pr.root()),
                    expected_utility(&g, &pi, j, g.root())
                );
            }
            let fixed = fix_opponents(&g, &pi, i).unwrap();
            prop_assert_eq!(
                expected_utility(&fixed, &pi.single(i), 0, fixed.root()),
                expected_utility(&g, &pi, i, g.root())
            );
        }
    }

    #[test]
    fn coefficients_ignore_utilities(p in params(), seed in any::<u64>(), bump in 1i64..5) {
        let g = random_game(&p, seed).unwrap();
        let mut draft: GameDraft = g.to_draft();
        for n in &mut draft.nodes {
            for u in &mut n.utils {
                *u = &*u + &Value::int(bump);
            }
        }
        let h = Game::from_draft(&draft).unwrap();
        prop_assert_eq!(coefficient_table(&g), coefficient_table(&h));
    }

    #[test]
    fn generators_are_deterministic(p in params(), seed in any::<u64>()) {
        let a = vor_core::io::game_to_string(&random_game(&p, seed).unwrap());
        let b = vor_core::io::game_to_string(&random_game(&p, seed).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sat_game_size(clauses in prop::collection::vec((1i32..=5, 1i32..=5, 1i32..=5, any::<[bool; 3]>()), 1..5)) {
        let cnf: Vec<[i32; 3]> = clauses
            .into_iter()
            .filter(|(a, b, c, _)| a != b && b != c && a != c)
            .map(|(a, b, c, s)| {
                let sign = |v: i32, neg: bool| if neg { -v } else { v };
                [sign(a, s[0]), sign(b, s[1]), sign(c, s[2])]
            })
            .collect();
        prop_assume!(!cnf.is_empty());
        let g = sat_game(&cnf, &SatParams::default()).unwrap();
        prop_assert!(g.validate().is_empty());
        prop_assert!(g.nodes().len() <= 2 + cnf.len() * (1 + 16));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dummy_nodes_keep_the_optimum(depth in 2usize..=4, chance in 0.0f64..0.4, seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let g = random_game(&single(depth, chance, false), seed).unwrap();
        let d = dummy_node_transform(&g, 0).unwrap();
        let a = optimal_strategy(&g, &cfg).unwrap().p1();
        let b = optimal_strategy(&d, &cfg).unwrap().p1();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn bounds_dominate(depth in 2usize..=5, chance in 0.0f64..0.4, absentminded in any::<bool>(), seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let g = random_game(&single(depth, chance, absentminded), seed).unwrap();
        let v = vor_compute(&g, Concept::OPT, &cfg).unwrap();
        let r = match v.ratio {
            VorRatio::Finite(r) => r.to_f64(),
            _ => return Ok(()),
        };
        prop_assert!(r >= 1.0 - 1e-9);
        prop_assert!(r <= bound_composed(&g).unwrap().to_f64() + 1e-6);
        if let Ok((b1, b2)) = bound_am(&g) {
            prop_assert!(r <= b1.to_f64() + 1e-6 && b1.to_f64() <= b2.to_f64() + 1e-9);
        }
        if let Ok((b1, b2)) = bound_chance(&g, &cfg) {
            prop_assert!(r <= b1.to_f64() + 1e-6 && r <= b2.to_f64() + 1e-6);
        }
        for &z in g.leaves() {
            let inv = 1.0 / vor_core::num::ratio_to_f64(&am_coefficient(&g, z).unwrap());
            prop_assert!(inv <= vor_core::num::ratio_to_f64(&bound_am_entropy(&g, z).unwrap()) + 1e-9);
        }
    }

    #[test]
    fn indicator_games_are_tight(depth in 2usize..=4, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let cfg = SolverConfig::default();
        let g = random_game(&single(depth, 0.0, true), seed).unwrap();
        let z = g.leaves()[pick.index(g.leaves().len())];
        let mut draft = g.to_draft();
        let target = g.node(z).name.clone();
        for n in &mut draft.nodes {
            if n.owner == Owner::Terminal {
                n.utils = vec![Value::int((n.id == target) as i64)];
            }
        }
        let h = Game::from_draft(&draft).unwrap();
        let v = vor_compute(&h, Concept::OPT, &cfg).unwrap();
        let want = 1.0 / vor_core::num::ratio_to_f64(&am_coefficient(&h, z).unwrap());
        prop_assert!((v.ratio.to_f64() - want).abs() <= 1e-6 * want, "{:?} vs {}", v.ratio, want);
    }

    #[test]
    fn edt_and_kkt_agree_without_absentmindedness(p in params(), seed in any::<u64>(), w in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let cfg = SolverConfig::default();
        let p = RandomParams { absentminded: false, ..p };
        let g = random_game(&p, seed).unwrap();
        let radices: Vec<usize> = g.infosets().iter().map(|s| s.actions.len()).collect();
        for digits in vor_core::solvers::simplex::Odometer::new(radices).take(32) {
            let pi = StrategyProfile::<BigRational>::pure(&g, &digits).unwrap();
            prop_assert_eq!(edt_check(&g, &pi, &cfg).unwrap().passed, cdt_check(&g, &pi, &cfg).unwrap().passed);
        }
        let mixed = random_profile(&g, &w);
        prop_assert_eq!(edt_check(&g, &mixed, &cfg).unwrap().passed, cdt_check(&g, &mixed, &cfg).unwrap().passed);
    }

    #[test]
    fn partial_refinements(depth in 2usize..=4, chance in 0.0f64..0.4, seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let g = random_game(&single(depth, chance, false), seed).unwrap();
        let (pr, plan) = perfect_recall_refinement(&g, 0).unwrap();
        let full = plan.split_count();
        prop_assume!(full <= 4);
        for r in enumerate_k_refinements(&g, 0, full, cfg.max_refinements).unwrap() {
            prop_assert!(is_partial_refinement(&r.game, &g, 0).unwrap());
        }
        let mut last = f64::NEG_INFINITY;
        for k in 0..=full {
            let u = k_best_partial(&g, k, &cfg).unwrap().utility.to_f64();
            prop_assert!(u >= last - 1e-12);
            last = u;
        }
        let top = optimal_strategy(&pr, &cfg).unwrap().p1();
        prop_assert!((last - top).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, rng_seed: RngSeed::Fixed(1), ..ProptestConfig::default() })]

    #[test]
    fn single_player_concepts_agree(depth in 2usize..=3, chance in 0.0f64..0.4, absentminded in any::<bool>(), seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let g = random_game(&single(depth, chance, absentminded), seed).unwrap();
        let opt = optimal_strategy(&g, &cfg).unwrap().p1();
        let bedt = best_worst(&g, ConceptKind::Edt, Selector::Best, &cfg).unwrap().p1();
        let bcdt = best_worst(&g, ConceptKind::Cdt, Selector::Best, &cfg).unwrap().p1();
        prop_assert!((opt - bedt).abs() <= cfg.eq_tol, "OPT {} vs bEDT {}", opt, bedt);
        prop_assert!((opt - bcdt).abs() <= cfg.eq_tol, "OPT {} vs bCDT {}", opt, bcdt);
    }

    #[test]
    fn refined_concepts_value_recall(depth in 2usize..=3, chance in 0.0f64..0.4, seed in any::<u64>()) {
        let cfg = SolverConfig::default();
        let g = random_game(&single(depth, chance, false), seed).unwrap();
        let (pr, _) = perfect_recall_refinement(&g, 0).unwrap();
        for kind in [ConceptKind::EdtNash, ConceptKind::CdtNash] {
            let a = best_worst(&g, kind, Selector::Worst, &cfg).unwrap().p1();
            let b = best_worst(&pr, kind, Selector::Worst, &cfg).unwrap().p1();
            prop_assert!(b >= a - cfg.eq_tol, "{:?}: {} < {}", kind, b, a);
        }
    }
}
