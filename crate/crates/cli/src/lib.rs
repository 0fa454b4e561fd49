//! The `vor` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use vor_core::game::validate_game;
use vor_core::generators::{self, figures, sat, RandomParams, SatParams, ValidUtilityInstance};
use vor_core::io;
use vor_core::num::{fmt_ratio, fmt_sig};
use vor_core::partial::k_best_partial;
use vor_core::recall::{perfect_recall_refinement, perfect_recall_refinement_all};
use vor_core::solvers::{optimal_strategy, solve, Concept, Selector, SolverConfig};
use vor_core::vor::{
    bound_am, bound_am_entropy, bound_chance, bound_composed, coefficient_table, smooth_bounds,
    smooth_equilibrium_check, smoothness_check, vor_compute, SmoothnessVerdict, VorRatio, VorSide,
};
use vor_core::{Error, Game, Value};

#[derive(Parser, Debug)]
#[command(name = "vor", version, about = "Value of recall in imperfect-recall games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a game file; exits 1 when it has violations.
    Validate { game: PathBuf },
    /// Perfect-recall refinement for one player, or for all of them.
    Refine {
        game: PathBuf,
        /// One-based player index.
        #[arg(long, default_value_t = 1, conflicts_with = "all")]
        player: usize,
        #[arg(long)]
        all: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve a concept: opt, edt, cdt, edt-nash, cdt-nash or nash.
    Solve {
        game: PathBuf,
        #[arg(long)]
        concept: String,
        #[command(flatten)]
        pick: Pick,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Value of recall for Player 1 under a concept, with the bound panel.
    Vor {
        game: PathBuf,
        #[arg(long, default_value = "opt")]
        concept: String,
        #[command(flatten)]
        pick: Pick,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Per-leaf am and chance coefficients and per-chance-node branching.
    Coeffs { game: PathBuf },
    /// Every applicable upper bound on the value of recall.
    Bounds {
        game: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Test (λ, μ)-smoothness against an optimal profile; exits 1 when falsified.
    SmoothCheck {
        game: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Best refinement reachable with at most k recall-consistent splits.
    PartialBest {
        game: PathBuf,
        #[arg(long)]
        k: usize,
        /// Where to write the winning game.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write a generated game.
    Gen(GenArgs),
    /// Graphviz text for a game, optionally annotated with a profile.
    ExportDot {
        game: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct Pick {
    /// Highest Player 1 utility among equilibria.
    #[arg(long)]
    best: bool,
    /// Lowest Player 1 utility among equilibria.
    #[arg(long)]
    worst: bool,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long, default_value_t = SolverConfig::default().delta)]
    delta: f64,
    #[arg(long, default_value_t = SolverConfig::default().multistart)]
    multistart: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = SolverConfig::default().eq_tol)]
    eq_tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().support_tol)]
    support_tol: f64,
    /// Number of perturbation rates 2^-1, 2^-2, ... in the rationality checks.
    #[arg(long, default_value_t = SolverConfig::default().schedule.len())]
    schedule_len: usize,
    #[arg(long, default_value_t = SolverConfig::default().fit_points)]
    fit_points: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_pure)]
    max_pure: usize,
    #[arg(long, default_value_t = SolverConfig::default().pure_samples)]
    pure_samples: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_search_nodes)]
    max_search_nodes: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_grid_points)]
    max_grid_points: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_infosets)]
    max_infosets: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_polish)]
    max_polish: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_candidates)]
    max_candidates: usize,
    #[arg(long, default_value_t = SolverConfig::default().dedup_tol)]
    dedup_tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_denominator)]
    max_denominator: u64,
    #[arg(long, default_value_t = SolverConfig::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_refinements)]
    max_refinements: usize,
    #[arg(long, env = "VOR_SEED", default_value_t = SolverConfig::default().seed)]
    seed: u64,
}

impl ConfigArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        let cfg = SolverConfig {
            delta: self.delta,
            multistart: self.multistart,
            max_iters: self.max_iters,
            eq_tol: self.eq_tol,
            support_tol: self.support_tol,
            schedule: (1..=self.schedule_len as i32).map(|k| 0.5f64.powi(k)).collect(),
            fit_points: self.fit_points,
            max_pure: self.max_pure,
            pure_samples: self.pure_samples,
            max_search_nodes: self.max_search_nodes,
            max_grid_points: self.max_grid_points,
            max_infosets: self.max_infosets,
            max_polish: self.max_polish,
            max_candidates: self.max_candidates,
            dedup_tol: self.dedup_tol,
            max_denominator: self.max_denominator,
            samples: self.samples,
            max_refinements: self.max_refinements,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenName {
    Fig1,
    Fig2,
    Fig3,
    Fig5,
    Lenny,
    Dory,
    Sat,
    X3c,
    ValidUtility,
    Random,
}

#[derive(Args, Debug)]
struct GenArgs {
    name: GenName,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// ε for fig1 and fig3.
    #[arg(long, default_value = "1/100")]
    eps: String,
    /// Size for lenny and dory, universe size for x3c.
    #[arg(long)]
    n: Option<usize>,
    /// fig5: the refined game instead of the coarse one; fig2: the perfect-information variant.
    #[arg(long)]
    variant: bool,
    /// sat clauses, e.g. "1 2 3, -1 2 -3". Defaults to all eight sign patterns.
    #[arg(long)]
    cnf: Option<String>,
    #[arg(long, default_value = "1")]
    eta: String,
    #[arg(long, default_value = "1")]
    big_m: String,
    /// x3c family, e.g. "1 2 3; 4 5 6; 1 2 4".
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value_t = RandomParams::default().players)]
    players: usize,
    #[arg(long, default_value_t = RandomParams::default().depth)]
    depth: usize,
    #[arg(long, default_value_t = RandomParams::default().branching)]
    branching: usize,
    #[arg(long, default_value_t = RandomParams::default().merge_rate)]
    merge_rate: f64,
    #[arg(long, default_value_t = RandomParams::default().chance_rate)]
    chance_rate: f64,
    #[arg(long, default_value_t = RandomParams::default().leaf_rate)]
    leaf_rate: f64,
    #[arg(long)]
    absentminded: bool,
    #[arg(long, default_value_t = RandomParams::default().max_utility)]
    max_utility: i64,
    #[arg(long, env = "VOR_SEED", default_value_t = 0)]
    seed: u64,
}

fn num(v: &Value) -> Json {
    match v {
        Value::Exact(q) => json!({ "exact": fmt_ratio(q), "approx": fmt_sig(v.to_f64()) }),
        Value::Float(x) => json!({ "approx": fmt_sig(*x) }),
    }
}

fn float(x: f64) -> Json {
    json!(fmt_sig(x))
}

fn parse_value(s: &str) -> Result<Value, Error> {
    serde_json::from_value(Json::String(s.to_string()))
        .map_err(|e| Error::InvalidParameters(format!("`{s}` is not a number: {e}")))
}

fn pretty(doc: &Json) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("json values serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load(path: &Path) -> Result<Game, Error> {
    io::parse_game(&read(path)?)
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn concept(name: &str, pick: &Pick) -> Result<Concept, Error> {
    let mut c: Concept = name.parse()?;
    if c.kind != vor_core::solvers::ConceptKind::Opt {
        if pick.best {
            c.selector = Selector::Best;
        } else if pick.worst {
            c.selector = Selector::Worst;
        }
    }
    Ok(c)
}

fn side(s: &VorSide) -> Json {
    json!({ "utility": num(&s.utility), "certified": s.certified, "residual": float(s.residual) })
}

fn ratio(r: &VorRatio) -> Json {
    match r {
        VorRatio::Finite(v) => num(v),
        VorRatio::Infinite => json!("infinite"),
        VorRatio::Undefined => json!("undefined"),
    }
}

fn pair(p: Result<(Value, Value), Error>) -> Json {
    match p {
        Ok((a, b)) => json!([num(&a), num(&b)]),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn bounds_doc(g: &Game, cfg: &SolverConfig) -> Result<Json, Error> {
    if g.players() != 1 {
        return Err(Error::NotSinglePlayer(g.players()));
    }
    let entropy: Vec<Json> = if g.has_chance() {
        Vec::new()
    } else {
        g.leaves()
            .iter()
            .map(|&z| {
                let b = bound_am_entropy(g, z).map(Value::Exact);
                json!({ "leaf": g.node(z).name, "bound": b.map(|v| num(&v)).unwrap_or(Json::Null) })
            })
            .collect()
    };
    Ok(json!({
        "am": pair(bound_am(g)),
        "chance": pair(bound_chance(g, cfg)),
        "composed": num(&bound_composed(g)?),
        "entropy": entropy,
    }))
}

fn generate(a: &GenArgs) -> Result<Game, Error> {
    let size = |default: usize| a.n.unwrap_or(default);
    match a.name {
        GenName::Fig1 => figures::fig1(&parse_value(&a.eps)?),
        GenName::Fig2 if a.variant => Ok(figures::fig2_perfect_information()),
        GenName::Fig2 => Ok(figures::fig2()),
        GenName::Fig3 => figures::fig3(&parse_value(&a.eps)?),
        GenName::Fig5 if a.variant => Ok(figures::fig5b()),
        GenName::Fig5 => Ok(figures::fig5a()),
        GenName::Lenny => figures::lenny(size(4)),
        GenName::Dory => figures::dory(size(3)),
        GenName::Sat => {
            let clauses = match &a.cnf {
                Some(text) => sat::parse_cnf(text)?,
                None => sat::all_eight_clauses(),
            };
            let params = SatParams { eta: parse_value(&a.eta)?, m: parse_value(&a.big_m)? };
            generators::sat_game(&clauses, &params)
        }
        GenName::X3c => {
            let text = a.family.as_deref().unwrap_or("1 2 3; 4 5 6; 1 2 4");
            let family = text
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    let v: Vec<usize> = s
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .map_err(|e| Error::InvalidParameters(format!("bad set `{}`: {e}", s.trim())))?;
                    <[usize; 3]>::try_from(v)
                        .map_err(|_| Error::InvalidParameters(format!("set `{}` needs 3 elements", s.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(generators::x3c_game(size(6), &family)?.0)
        }
        GenName::ValidUtility => generators::valid_utility_game(&ValidUtilityInstance::default_instance()),
        GenName::Random => {
            let p = RandomParams {
                players: a.players,
                depth: a.depth,
                branching: a.branching,
                merge_rate: a.merge_rate,
                chance_rate: a.chance_rate,
                leaf_rate: a.leaf_rate,
                absentminded: a.absentminded,
                max_utility: a.max_utility,
            };
            generators::random_game(&p, a.seed)
        }
    }
}

/// Outcome of a command that ran to completion but reports a negative verdict.
enum Outcome {
    Ok,
    Failed,
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<Outcome, Error> {
    match cmd {
        Command::Validate { game } => {
            let draft = io::parse_draft(&read(&game)?)?;
            let report = validate_game(&draft);
            if report.violations.is_empty() {
                writeln!(stdout, "ok")?;
                Ok(Outcome::Ok)
            } else {
                write!(stdout, "{report}")?;
                Ok(Outcome::Failed)
            }
        }
        Command::Refine { game, player, all, out } => {
            let g = load(&game)?;
            let fine = if all {
                perfect_recall_refinement_all(&g)?
            } else {
                if player == 0 {
                    return Err(Error::UnknownPlayer(0));
                }
                perfect_recall_refinement(&g, player - 1)?.0
            };
            emit(&io::game_to_string(&fine), out.as_deref(), stdout)?;
            Ok(Outcome::Ok)
        }
        Command::Solve { game, concept: name, pick, config } => {
            let g = load(&game)?;
            let report = solve(&g, concept(&name, &pick)?, &config.config()?)?;
            write!(stdout, "{}", io::report_to_string(&g, &report))?;
            Ok(Outcome::Ok)
        }
        Command::Vor { game, concept: name, pick, config } => {
            let g = load(&game)?;
            let r = vor_compute(&g, concept(&name, &pick)?, &config.config()?)?;
            let b = &r.bounds;
            let opt_pair = |p: &Option<(Value, Value)>| p.as_ref().map(|(x, y)| json!([num(x), num(y)]));
            let doc = json!({
                "concept": r.concept,
                "recall": side(&r.numerator),
                "original": side(&r.denominator),
                "ratio": ratio(&r.ratio),
                "bounds": {
                    "am": opt_pair(&b.am),
                    "chance": opt_pair(&b.chance),
                    "composed": b.composed.as_ref().map(num),
                    "entropy": b.entropy.as_ref().map(num),
                    "satisfied": b.satisfied.iter().map(|(k, ok)| json!({ "bound": k, "holds": ok })).collect::<Vec<_>>(),
                },
            });
            write!(stdout, "{}", pretty(&doc))?;
            Ok(Outcome::Ok)
        }
        Command::Coeffs { game } => {
            let g = load(&game)?;
            let t = coefficient_table(&g);
            let doc = json!({
                "leaves": t.leaves.iter().map(|l| json!({
                    "leaf": l.leaf,
                    "am": num(&l.am),
                    "chance": num(&l.chance),
                })).collect::<Vec<_>>(),
                "branching": t.branching.iter().map(|c| json!({
                    "node": c.node,
                    "beta": c.beta,
                })).collect::<Vec<_>>(),
            });
            write!(stdout, "{}", pretty(&doc))?;
            Ok(Outcome::Ok)
        }
        Command::Bounds { game, config } => {
            let g = load(&game)?;
            write!(stdout, "{}", pretty(&bounds_doc(&g, &config.config()?)?))?;
            Ok(Outcome::Ok)
        }
        Command::SmoothCheck { game, lambda, mu, config } => {
            let g = load(&game)?;
            let cfg = config.config()?;
            let star = optimal_strategy(&g, &cfg)?;
            let report = smoothness_check(&g, &star.profile, lambda, mu, &cfg)?;
            let composed = bound_composed(&g)?.to_f64();
            let bounds = smooth_bounds(lambda, mu, report.opt, composed)?;
            let (verdict, witness) = match &report.verdict {
                SmoothnessVerdict::Falsified { profile, lhs, rhs } => (
                    "falsified",
                    json!({ "profile": io::profile_files(&g, profile), "lhs": float(*lhs), "rhs": float(*rhs) }),
                ),
                SmoothnessVerdict::PureVerified => ("pure-verified", Json::Null),
                SmoothnessVerdict::SampledOk => ("sampled-ok", Json::Null),
            };
            let mut doc = json!({
                "verdict": verdict,
                "witness": witness,
                "opt": float(report.opt),
                "pure_checked": report.pure_checked,
                "samples_checked": report.samples_checked,
                "min_margin": float(report.min_margin),
                "rho": float(bounds.rho),
                "vor_bound": float(bounds.vor_bound),
                "guarantee": float(bounds.guarantee),
            });
            let falsified = matches!(report.verdict, SmoothnessVerdict::Falsified { .. });
            if !falsified {
                let eq = smooth_equilibrium_check(&g, lambda, mu, &cfg)?;
                let lo = eq.utilities.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = eq.utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                doc["equilibria"] = json!({
                    "count": eq.utilities.len(),
                    "min": float(lo),
                    "max": float(hi),
                    "holds": eq.holds,
                });
            }
            write!(stdout, "{}", pretty(&doc))?;
            Ok(if falsified { Outcome::Failed } else { Outcome::Ok })
        }
        Command::PartialBest { game, k, out, config } => {
            let g = load(&game)?;
            let best = k_best_partial(&g, k, &config.config()?)?;
            let names = |blocks: &[Vec<usize>]| -> Vec<Vec<String>> {
                blocks
                    .iter()
                    .map(|b| b.iter().map(|&h| g.nodes()[h].name.clone()).collect())
                    .collect()
            };
            let table: Vec<Json> = best
                .table
                .iter()
                .map(|s| json!({ "partition": names(&s.partition), "splits": s.splits, "utility": num(&s.utility) }))
                .collect();
            let mut doc = json!({ "utility": num(&best.utility), "splits": best.splits, "table": table });
            match &out {
                Some(p) => io::write_game(&best.game, p)?,
                None => doc["game"] = serde_json::to_value(best.game.to_draft()).expect("drafts serialize"),
            }
            write!(stdout, "{}", pretty(&doc))?;
            Ok(Outcome::Ok)
        }
        Command::Gen(a) => {
            let g = generate(&a)?;
            emit(&io::game_to_string(&g), a.out.as_deref(), stdout)?;
            Ok(Outcome::Ok)
        }
        Command::ExportDot { game, profile } => {
            let g = load(&game)?;
            let pi = profile.map(|p| read(&p).and_then(|t| io::parse_profile(&g, &t))).transpose()?;
            write!(stdout, "{}", io::export_dot(&g, pi.as_ref().map(|p| &p.profile)))?;
            Ok(Outcome::Ok)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidParameters(_) | Error::InvalidGame(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on domain errors and negative verdicts, 2 on usage and input errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, stdout) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Failed) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
