mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use linrl_core::cnf::DEFAULT_BRUTE_FORCE_CAP;
use linrl_core::features::{greedy_weight, psp_feature, realizability_feature, softmax_weight};
use linrl_core::policies::{
    best_greedy, eval_q_greedy, eval_q_softmax, eval_v_greedy, eval_v_softmax,
};
use linrl_core::reduction::{
    decide_max3sat, epsilon_bound_greedy, epsilon_bound_softmax, extract_assignment_greedy,
    extract_assignment_softmax, mcdiarmid_deviation, mcdiarmid_tail, DecideConfig, Decision,
    ExactSolver, ExtractionMode, PolicyClass, DEFAULT_P0, DEFAULT_SATURATION, DEFAULT_SOLVER_ERROR,
};
use linrl_core::verify::{self, Suite, SuiteResult};
use linrl_core::{build_mdp, frac, Action, Rational64};

use input::{parse_action, parse_fraction, parse_state, parse_theta, read_formula};

#[derive(Parser)]
#[command(
    name = "linrl",
    version,
    about = "Compile Max-3SAT instances into linearly realizable MDPs and check them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Greedy,
    Softmax,
}

impl From<ClassArg> for PolicyClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Greedy => PolicyClass::Greedy,
            ClassArg::Softmax => PolicyClass::Softmax,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Round,
    Sample,
}

impl ModeArg {
    fn with_seed(self, seed: u64) -> ExtractionMode {
        match self {
            ModeArg::Round => ExtractionMode::Round,
            ModeArg::Sample => ExtractionMode::Sample { seed },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    /// exp(−2t²|C|²/(H b²))
    Mcdiarmid,
    /// The t at which the McDiarmid tail equals p0.
    Deviation,
    /// δ/2
    EpsilonGreedy,
    /// v* + δ − t − 1
    EpsilonSoftmax,
}

#[derive(Subcommand)]
enum Command {
    /// Build the MDP for a DIMACS formula and write its descriptor.
    Reduce {
        /// DIMACS file, or '-' for standard input.
        input: String,
        /// Also write the clause-universe ordering.
        #[arg(long)]
        universe: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate q and v at one state-action pair and recompute q as a dot product.
    Eval {
        input: String,
        /// θ' as a comma list, a sign pattern like +-+, or a JSON file.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, value_enum, default_value = "greedy")]
        class: ClassArg,
        /// Comma list over {-1, 0, 1} (-1 = unassigned), or 'initial'.
        #[arg(long, default_value = "initial", allow_hyphen_values = true)]
        state: String,
        #[arg(long, value_parser = parse_action)]
        action: Action,
        /// Include φ and θ_h in the output.
        #[arg(long)]
        vectors: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the best greedy policy by exhaustive search.
    Solve {
        input: String,
        /// Largest n searched exhaustively.
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read an assignment off a policy.
    Extract {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, value_enum, default_value = "greedy")]
        class: ClassArg,
        #[arg(long, value_enum, default_value = "sample")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Formula to score the assignment against; needed for sample mode.
        #[arg(long)]
        cnf: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide δ-Max-3SAT through the reduction. Exit 0 = Yes, 1 = No, 2 = error.
    Decide {
        input: String,
        #[arg(long, value_parser = parse_fraction)]
        delta: Rational64,
        #[arg(long, value_parser = parse_fraction)]
        epsilon: Rational64,
        #[arg(long, value_enum, default_value = "greedy")]
        class: ClassArg,
        #[arg(long, value_enum, default_value = "sample")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_P0)]
        p0: f64,
        /// Occurrence bound; defaults to the formula's own.
        #[arg(long)]
        b: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SOLVER_ERROR)]
        solver_error: f64,
        /// Largest n for the exact solver and the brute-force v*.
        #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_CAP)]
        n_max: usize,
        /// Run softmax even when ε exceeds the admissible bound.
        #[arg(long)]
        no_bound_check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one of the reduction's bounds.
    Bound {
        #[arg(value_enum)]
        kind: BoundKind,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        clauses: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_P0)]
        p0: f64,
        #[arg(long, value_parser = parse_fraction)]
        delta: Option<Rational64>,
        #[arg(long, value_parser = parse_fraction)]
        v_star: Option<Rational64>,
        /// Take H, b and |C| from a formula.
        #[arg(long)]
        cnf: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run check suites. Exit 0 iff every requested suite passes.
    Verify {
        /// Suites to run (greedy, telescoping, softmax, limit, roundtrip,
        /// mcdiarmid, scaling); all when omitted.
        suites: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Largest n for the exhaustive suites.
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        formulas_per_n: Option<usize>,
        #[arg(long)]
        thetas: Option<usize>,
        /// Tolerance for the softmax and limit suites.
        #[arg(long)]
        tol: Option<f64>,
        /// Instances in the roundtrip suite.
        #[arg(long)]
        count: Option<usize>,
        /// Rollouts in the McDiarmid suite.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_parser = parse_fraction)]
        delta: Option<Rational64>,
        #[arg(long, value_parser = parse_fraction)]
        epsilon: Option<Rational64>,
        /// Comma list of n for the scaling suite.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(value: &Value, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Reduce {
            input,
            universe,
            out,
        } => {
            let instance = build_mdp(read_formula(&input)?);
            let n = instance.n();
            let psp: Vec<_> = (1..=n)
                .flat_map(|h| Action::ALL.map(|a| psp_feature(h, a, n)))
                .collect::<linrl_core::Result<_>>()?;
            let mut doc = json!({ "instance": instance.descriptor(), "psp_features": psp });
            if universe {
                doc["universe"] = serde_json::to_value(instance.universe())?;
            }
            emit(&doc, out.as_ref())?;
            eprintln!(
                "n = {n}, |C| = {}, H = {}, d = {}, d' = {}",
                instance.clause_count(),
                instance.horizon(),
                instance.d(),
                instance.d_prime()
            );
            Ok(0)
        }

        Command::Eval {
            input,
            theta,
            class,
            state,
            action,
            vectors,
            out,
        } => {
            let instance = build_mdp(read_formula(&input)?);
            let params = parse_theta(&theta)?;
            if params.len() != instance.n() {
                bail!(
                    "θ' has {} entries, the formula has {} variables",
                    params.len(),
                    instance.n()
                );
            }
            let state = parse_state(&state, instance.n())?;
            if state.is_terminal() {
                bail!("state {state} is terminal; q is defined only before the last stage");
            }
            let h = state.stage();
            let phi = realizability_feature(&instance, &state, action)?;
            let mut doc = json!({
                "class": PolicyClass::from(class),
                "state": state,
                "action": action,
                "stage": h,
            });
            let summary = match class {
                ClassArg::Greedy => {
                    let q = eval_q_greedy(&instance, &params, &state, action)?;
                    let v = eval_v_greedy(&instance, &params, &state)?;
                    let w = greedy_weight(&instance, &params, h)?;
                    let dot = phi.dot_greedy(&w);
                    doc["q"] = json!(frac::to_string(&q));
                    doc["v"] = json!(frac::to_string(&v));
                    doc["dot"] = json!(frac::to_string(&dot));
                    if vectors {
                        doc["phi"] = serde_json::to_value(phi.to_json())?;
                        doc["theta_h"] = serde_json::to_value(w.to_json())?;
                    }
                    format!("q = {q}, dot = {dot}, v = {v}")
                }
                ClassArg::Softmax => {
                    let q = eval_q_softmax(&instance, &params, &state, action)?;
                    let v = eval_v_softmax(&instance, &params, &state)?;
                    let w = softmax_weight(&instance, &params, h)?;
                    let dot = phi.dot_softmax(&w);
                    doc["q"] = json!(q);
                    doc["v"] = json!(v);
                    doc["dot"] = json!(dot);
                    if vectors {
                        doc["phi"] = serde_json::to_value(phi.to_json())?;
                        doc["theta_h"] = serde_json::to_value(w.to_json())?;
                    }
                    format!("q = {q}, dot = {dot}, v = {v}")
                }
            };
            emit(&doc, out.as_ref())?;
            eprintln!("{summary}");
            Ok(0)
        }

        Command::Solve { input, n_max, out } => {
            let formula = read_formula(&input)?;
            let instance = build_mdp(formula.clone());
            let (params, value) = best_greedy(&instance, n_max)?;
            let assignment = extract_assignment_greedy(&params, instance.n());
            let doc = json!({
                "theta_prime": params.theta_prime(),
                "value": frac::to_string(&value),
                "assignment": assignment,
                "satisfied": formula.satisfied_count(&assignment),
                "clauses": formula.clause_count(),
            });
            emit(&doc, out.as_ref())?;
            eprintln!("value = {value}");
            Ok(0)
        }

        Command::Extract {
            theta,
            class,
            mode,
            seed,
            cnf,
            out,
        } => {
            let params = parse_theta(&theta)?;
            let formula = cnf.as_deref().map(read_formula).transpose()?;
            let n = params.len();
            if let Some(f) = &formula {
                if f.num_vars() != n {
                    bail!(
                        "θ' has {n} entries, the formula has {} variables",
                        f.num_vars()
                    );
                }
            }
            let assignment = match (class, mode) {
                (ClassArg::Greedy, _) => extract_assignment_greedy(&params, n),
                (ClassArg::Softmax, ModeArg::Round) => {
                    let probe = formula.clone().map(build_mdp);
                    match probe {
                        Some(m) => extract_assignment_softmax(&m, &params, ExtractionMode::Round)?,
                        None => linrl_core::Assignment::new(
                            (1..=n)
                                .map(|h| linrl_core::features::softmax_prob(h, &params) > 0.5)
                                .collect(),
                        ),
                    }
                }
                (ClassArg::Softmax, ModeArg::Sample) => {
                    let Some(f) = formula.clone() else {
                        bail!("sample mode needs --cnf to build the instance");
                    };
                    extract_assignment_softmax(&build_mdp(f), &params, mode.with_seed(seed))?
                }
            };
            let mut doc = json!({ "assignment": assignment });
            let mut summary = format!(
                "assignment = {:?}",
                assignment
                    .values()
                    .iter()
                    .map(|&b| b as u8)
                    .collect::<Vec<_>>()
            );
            if let Some(f) = &formula {
                let fraction = f.satisfied_fraction(&assignment);
                doc["fraction"] = json!(frac::to_string(&fraction));
                summary += &format!(", fraction = {fraction}");
            }
            emit(&doc, out.as_ref())?;
            eprintln!("{summary}");
            Ok(0)
        }

        Command::Decide {
            input,
            delta,
            epsilon,
            class,
            mode,
            seed,
            p0,
            b,
            solver_error,
            n_max,
            no_bound_check,
            out,
        } => {
            let formula = read_formula(&input)?;
            let config = DecideConfig {
                delta,
                epsilon,
                class: class.into(),
                mode: mode.with_seed(seed),
                p0,
                solver_error,
                b,
                brute_force_cap: n_max,
                enforce_softmax_bound: !no_bound_check,
            };
            let solver = ExactSolver {
                cap: n_max,
                saturation: DEFAULT_SATURATION,
            };
            let report = decide_max3sat(&formula, &config, &solver)?;
            emit(&serde_json::to_value(&report)?, out.as_ref())?;
            let bits: String = report
                .extracted
                .values()
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            eprintln!(
                "{:?}: assignment {bits}, fraction {}",
                report.decision, report.achieved_fraction
            );
            Ok(match report.decision {
                Decision::Yes => 0,
                Decision::No => 1,
            })
        }

        Command::Bound {
            kind,
            t,
            horizon,
            b,
            clauses,
            p0,
            delta,
            v_star,
            cnf,
            out,
        } => {
            let from_cnf = cnf.as_deref().map(read_formula).transpose()?;
            let horizon = horizon.or(from_cnf.as_ref().map(|f| f.num_vars() + 1));
            let b = b.or(from_cnf.as_ref().map(|f| f.occurrence_bound()));
            let clauses = clauses.or(from_cnf.as_ref().map(|f| f.clause_count()));
            let need = |name: &str, v: Option<usize>| {
                v.with_context(|| format!("--{name} (or --cnf) is required"))
            };
            let (value, params) = match kind {
                BoundKind::Mcdiarmid => {
                    let t = t.context("--t is required")?;
                    let (h, b, c) = (
                        need("horizon", horizon)?,
                        need("b", b)?,
                        need("clauses", clauses)?,
                    );
                    (
                        json!(mcdiarmid_tail(t, h, b, c)?),
                        json!({ "t": t, "H": h, "b": b, "clauses": c }),
                    )
                }
                BoundKind::Deviation => {
                    let (h, b, c) = (
                        need("horizon", horizon)?,
                        need("b", b)?,
                        need("clauses", clauses)?,
                    );
                    (
                        json!(mcdiarmid_deviation(p0, h, b, c)?),
                        json!({ "p0": p0, "H": h, "b": b, "clauses": c }),
                    )
                }
                BoundKind::EpsilonGreedy => {
                    let delta = delta.context("--delta is required")?;
                    (
                        json!(frac::to_string(&epsilon_bound_greedy(delta)?)),
                        json!({ "delta": frac::to_string(&delta) }),
                    )
                }
                BoundKind::EpsilonSoftmax => {
                    let delta = delta.context("--delta is required")?;
                    let v_star = v_star.context("--v-star is required")?;
                    let (h, b, c) = (
                        need("horizon", horizon)?,
                        need("b", b)?,
                        need("clauses", clauses)?,
                    );
                    (
                        json!(epsilon_bound_softmax(v_star, h, b, c, delta, p0)?),
                        json!({
                            "v_star": frac::to_string(&v_star),
                            "delta": frac::to_string(&delta),
                            "p0": p0, "H": h, "b": b, "clauses": c,
                        }),
                    )
                }
            };
            let name = kind
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string();
            emit(
                &json!({ "kind": name, "value": value, "params": params }),
                out.as_ref(),
            )?;
            eprintln!(
                "{name} = {}",
                value
                    .as_str()
                    .map(str::to_string)
                    .unwrap_or_else(|| value.to_string())
            );
            Ok(0)
        }

        Command::Verify {
            suites,
            seed,
            n_max,
            formulas_per_n,
            thetas,
            tol,
            count,
            trials,
            delta,
            epsilon,
            n_list,
            out,
        } => {
            let selected: Vec<Suite> = if suites.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suites
                    .iter()
                    .map(|s| s.parse())
                    .collect::<linrl_core::Result<_>>()?
            };
            let mut results: Vec<SuiteResult> = Vec::new();
            for suite in selected {
                let r = match suite {
                    Suite::Greedy | Suite::Telescoping => {
                        let d = verify::GreedySuiteConfig::default();
                        let cfg = verify::GreedySuiteConfig {
                            n_max: n_max.unwrap_or(d.n_max),
                            formulas_per_n: formulas_per_n.unwrap_or(d.formulas_per_n),
                            seed,
                            ..d
                        };
                        if suite == Suite::Greedy {
                            verify::check_realizability_greedy(&cfg)?
                        } else {
                            verify::check_telescoping(&cfg)?
                        }
                    }
                    Suite::Softmax => {
                        let d = verify::SoftmaxSuiteConfig::default();
                        verify::check_realizability_softmax(&verify::SoftmaxSuiteConfig {
                            n_max: n_max.unwrap_or(d.n_max),
                            formulas_per_n: formulas_per_n.unwrap_or(d.formulas_per_n),
                            thetas_per_formula: thetas.unwrap_or(d.thetas_per_formula),
                            tol: tol.unwrap_or(d.tol),
                            seed,
                            ..d
                        })?
                    }
                    Suite::Limit => {
                        let d = verify::LimitSuiteConfig::default();
                        verify::check_limit_coupling(&verify::LimitSuiteConfig {
                            n_max: n_max.unwrap_or(d.n_max),
                            formulas_per_n: formulas_per_n.unwrap_or(d.formulas_per_n),
                            tol: tol.unwrap_or(d.tol),
                            seed,
                            ..d
                        })?
                    }
                    Suite::Roundtrip => {
                        let d = verify::RoundtripConfig::default();
                        verify::check_reduction_roundtrip(&verify::RoundtripConfig {
                            count: count.unwrap_or(d.count),
                            delta: delta.unwrap_or(d.delta),
                            epsilon: epsilon.unwrap_or(d.epsilon),
                            seed,
                            ..d
                        })?
                    }
                    Suite::McDiarmid => {
                        let d = verify::McDiarmidSuiteConfig::default();
                        verify::check_mcdiarmid(&verify::McDiarmidSuiteConfig {
                            trials: trials.unwrap_or(d.trials),
                            seed,
                            ..d
                        })?
                    }
                    Suite::Scaling => {
                        let d = verify::ScalingConfig::default();
                        verify::check_construction_scaling(&verify::ScalingConfig {
                            n_list: n_list.clone().unwrap_or(d.n_list.clone()),
                            seed,
                            ..d
                        })?
                    }
                };
                eprintln!("{}", r.summary());
                results.push(r);
            }
            emit(&serde_json::to_value(&results)?, out.as_ref())?;
            Ok(if results.iter().all(SuiteResult::passed) {
                0
            } else {
                1
            })
        }
    }
}
