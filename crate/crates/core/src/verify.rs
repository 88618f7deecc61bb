//! Named check suites over randomly generated instances.
//!
//! Each suite is deterministic given its seed and reports every failing
//! case with the inputs needed to reproduce it. Failures are recorded, never
//! thrown.

use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cnf::{
    enumerate_universe, eval_clause, is_zeta_satisfiable, ClauseStatus, Formula,
    DEFAULT_BRUTE_FORCE_CAP,
};
use crate::error::{Error, Result};
use crate::features::{
    f_threshold, greedy_action, greedy_weight, lookahead_state, psp_feature, realizability_feature,
    softmax_prob, softmax_weight, undecided_multiset, GreedyWeight, PolicyParams, SoftmaxWeight,
};
use crate::generate::{planted_formula, random_formula, random_params};
use crate::mdp::{build_mdp, Action, MdpInstance, State};
use crate::policies::{
    enumerate_trajectories, eval_q_greedy, eval_q_softmax, eval_q_softmax_exhaustive,
    DEFAULT_TRAJECTORY_CAP,
};
use crate::reduction::{
    decide_max3sat, empirical_mcdiarmid, mcdiarmid_deviation, mcdiarmid_tail, DecideConfig,
    Decision, ExactSolver,
};
use crate::rng;

/// Default largest `n` for the exhaustive greedy sweeps.
pub const GREEDY_CAP: usize = 8;
/// Default largest `n` for the softmax trajectory-sum oracle.
pub const SOFTMAX_ORACLE_CAP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub case: String,
    pub inputs: Value,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub cases: u64,
    pub failures: Vec<Failure>,
    pub seed: u64,
    pub params: Value,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} ({} cases, {} failures, {:.2?})",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.failures.len(),
            self.wall_time
        )
    }
}

/// Accumulates cases and failures for one suite run.
struct Recorder {
    suite: &'static str,
    seed: u64,
    started: Instant,
    cases: u64,
    failures: Vec<Failure>,
}

impl Recorder {
    fn new(suite: &'static str, seed: u64) -> Self {
        Self {
            suite,
            seed,
            started: Instant::now(),
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, case: impl FnOnce() -> (String, Value, String)) {
        self.cases += 1;
        if !ok {
            let (case, inputs, detail) = case();
            self.failures.push(Failure {
                case,
                inputs,
                detail,
            });
        }
    }

    /// Runs `work` on every item in parallel, each with a fresh recorder,
    /// and merges the outcomes. Failures are sorted in `finish`, so the
    /// merge order does not matter.
    fn par_each<T: Send>(&mut self, items: Vec<T>, work: impl Fn(T, &mut Recorder) + Sync) {
        let (suite, seed) = (self.suite, self.seed);
        let parts: Vec<(u64, Vec<Failure>)> = items
            .into_par_iter()
            .map(|item| {
                let mut r = Recorder::new(suite, seed);
                work(item, &mut r);
                (r.cases, r.failures)
            })
            .collect();
        for (cases, failures) in parts {
            self.cases += cases;
            self.failures.extend(failures);
        }
    }

    fn finish(mut self, params: Value) -> SuiteResult {
        self.failures
            .sort_by_cached_key(|f| serde_json::to_string(f).unwrap_or_default());
        SuiteResult {
            suite: self.suite.to_string(),
            cases: self.cases,
            failures: self.failures,
            seed: self.seed,
            params,
            wall_time: self.started.elapsed(),
        }
    }
}

fn cell_inputs(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
    action: Action,
) -> Value {
    json!({
        "formula": instance.formula(),
        "theta_prime": params.theta_prime(),
        "state": state,
        "action": action,
    })
}

/// Deterministic random formulas for one `n`.
pub fn suite_formulas(n: usize, count: usize, b: usize, seed: u64) -> Vec<Formula> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, (n as u64) << 32 | i as u64);
            random_formula(&mut r, n, (2 * n).max(2), b)
        })
        .collect()
}

/// Every non-terminal `(state, action)` of an instance, stage by stage.
fn cells(instance: &MdpInstance) -> impl Iterator<Item = (State, Action)> + '_ {
    (1..instance.horizon())
        .flat_map(move |h| instance.states_at_stage(h))
        .flat_map(|s| Action::ALL.map(|a| (s.clone(), a)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedySuiteConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub formulas_per_n: usize,
    pub b: usize,
    pub seed: u64,
    /// Largest admissible `n_max`.
    pub cap: usize,
}

impl Default for GreedySuiteConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 6,
            formulas_per_n: 20,
            b: 3,
            seed: 1,
            cap: GREEDY_CAP,
        }
    }
}

fn greedy_formulas(cfg: &GreedySuiteConfig) -> Result<Vec<Formula>> {
    if cfg.n_max > cfg.cap {
        return Err(Error::CapExceeded {
            what: "greedy realizability sweep",
            n: cfg.n_max,
            cap: cfg.cap,
        });
    }
    Ok((cfg.n_min.max(1)..=cfg.n_max)
        .flat_map(|n| suite_formulas(n, cfg.formulas_per_n, cfg.b, cfg.seed))
        .collect())
}

/// Exact greedy realizability on random formulas: for every sign pattern
/// and every non-terminal cell, `q^π = ⟨φ, θ_h⟩` as rationals.
pub fn check_realizability_greedy(cfg: &GreedySuiteConfig) -> Result<SuiteResult> {
    let formulas = greedy_formulas(cfg)?;
    let mut rec = Recorder::new("realizability_greedy", cfg.seed);
    rec.par_each(formulas, |f, rec| greedy_cells(&build_mdp(f), rec));
    Ok(rec.finish(serde_json::to_value(cfg).expect("config serializes")))
}

/// The greedy realizability checks on explicitly given formulas.
pub fn check_realizability_greedy_on(formulas: &[Formula]) -> Result<SuiteResult> {
    let mut rec = Recorder::new("realizability_greedy", 0);
    for f in formulas {
        if f.num_vars() > GREEDY_CAP {
            return Err(Error::CapExceeded {
                what: "greedy realizability sweep",
                n: f.num_vars(),
                cap: GREEDY_CAP,
            });
        }
        greedy_cells(&build_mdp(f.clone()), &mut rec);
    }
    Ok(rec.finish(json!({ "formulas": formulas.len() })))
}

fn greedy_weights(instance: &MdpInstance, params: &PolicyParams) -> Vec<GreedyWeight> {
    (1..instance.horizon())
        .map(|h| greedy_weight(instance, params, h).expect("stage in range"))
        .collect()
}

fn greedy_cells(instance: &MdpInstance, rec: &mut Recorder) {
    let n = instance.n();
    let c = instance.clause_count() as i64;
    for bits in 0..1u64 << n {
        let params = PolicyParams::sign_pattern(bits, n, 1.0);
        let weights = greedy_weights(instance, &params);
        for h in 1..=n {
            let a = greedy_action(h, &params);
            let scores =
                Action::ALL.map(|b| psp_feature(h, b, n).expect("stage in range").dot(&params));
            rec.check(
                a.as_bool() == f_threshold(&params, h)
                    && scores[a.index()] >= scores[1 - a.index()],
                || {
                    (
                        "greedy action = threshold".into(),
                        json!({ "theta_prime": params.theta_prime(), "h": h }),
                        format!("{a:?}"),
                    )
                },
            );
        }
        for (state, action) in cells(instance) {
            let h = state.stage();
            let q = eval_q_greedy(instance, &params, &state, action).expect("non-terminal cell");
            let phi = realizability_feature(instance, &state, action).expect("non-terminal cell");
            let w = &weights[h - 1];
            let dot = phi.dot_greedy(w);
            let inputs = || cell_inputs(instance, &params, &state, action);

            rec.check(q == dot, || {
                (
                    "q = <phi, theta_h>".into(),
                    inputs(),
                    format!("q = {q}, dot = {dot}"),
                )
            });

            let undecided = phi.undecided_count();
            rec.check(
                phi.satisfied <= instance.clause_count() as u64 - undecided,
                || {
                    (
                        "b_h <= |C| - |U_h|".into(),
                        inputs(),
                        format!("b = {}, |U| = {undecided}", phi.satisfied),
                    )
                },
            );

            // decomposition through the look-ahead leaf, without the universe
            let next = instance.transition(&state, action).expect("non-terminal");
            let look = lookahead_state(&state, action, &params);
            let b_direct = instance
                .formula()
                .clauses()
                .iter()
                .filter(|cl| eval_clause(cl, &next) == ClauseStatus::Satisfied)
                .count() as i64;
            let later = undecided_multiset(instance.formula(), &next)
                .iter()
                .filter(|cl| eval_clause(cl, &look) == ClauseStatus::Satisfied)
                .count() as i64;
            let decomposed = Rational64::new(b_direct + later, c);
            rec.check(q == decomposed, || {
                (
                    "q = (b_h + <Y_h, M_h>)/|C|".into(),
                    inputs(),
                    format!("q = {q}, decomposition = {decomposed}"),
                )
            });
            rec.check(q == instance.reward(&look), || {
                (
                    "q = R(lookahead leaf)".into(),
                    inputs(),
                    format!("q = {q}, leaf {look}"),
                )
            });

            if h == n {
                let ym = phi.y_dot_greedy(w);
                rec.check(
                    ym == 0 && q == Rational64::new(phi.satisfied as i64, c),
                    || {
                        (
                            "base case H-1".into(),
                            inputs(),
                            format!("<Y,M> = {ym}, q = {q}"),
                        )
                    },
                );
            }
            if n >= 2 && h == n - 1 {
                let expected =
                    Rational64::new(phi.satisfied as i64 + phi.y_dot_greedy(w) as i64, c);
                rec.check(q == expected, || {
                    ("base case H-2".into(), inputs(), format!("q = {q}"))
                });
            }
        }
    }
}

/// `⟨Y_{h−1}, M_{h−1}⟩ − ⟨Y_h, M_h⟩ = b_h − b_{h−1}` across every greedy step
/// `(s_{h−1}, a_{h−1}) → (s_h, π(s_h))`, for every sign pattern.
pub fn check_telescoping(cfg: &GreedySuiteConfig) -> Result<SuiteResult> {
    let formulas = greedy_formulas(cfg)?;
    let mut rec = Recorder::new("telescoping", cfg.seed);
    rec.par_each(formulas, |f, rec| {
        let instance = build_mdp(f);
        let n = instance.n();
        for bits in 0..1u64 << n {
            let params = PolicyParams::sign_pattern(bits, n, 1.0);
            let weights = greedy_weights(&instance, &params);
            for (state, action) in cells(&instance) {
                let h = state.stage();
                if h == n {
                    continue;
                }
                let next = instance.transition(&state, action).expect("non-terminal");
                let next_action = greedy_action(h + 1, &params);
                let prev = realizability_feature(&instance, &state, action).expect("non-terminal");
                let cur =
                    realizability_feature(&instance, &next, next_action).expect("non-terminal");
                let lhs = prev.y_dot_greedy(&weights[h - 1]) as i64
                    - cur.y_dot_greedy(&weights[h]) as i64;
                let rhs = cur.satisfied as i64 - prev.satisfied as i64;
                rec.check(lhs == rhs, || {
                    (
                        "telescoping".into(),
                        cell_inputs(&instance, &params, &state, action),
                        format!("<Y,M> drop = {lhs}, b gain = {rhs}"),
                    )
                });
            }
        }
    });
    Ok(rec.finish(serde_json::to_value(cfg).expect("config serializes")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftmaxSuiteConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub formulas_per_n: usize,
    pub thetas_per_formula: usize,
    /// `θ'` entries are uniform in `[−radius, radius]`.
    pub radius: f64,
    pub tol: f64,
    pub oracle_tol: f64,
    pub b: usize,
    pub seed: u64,
    /// Largest admissible `n_max` for the trajectory-sum oracle.
    pub oracle_cap: usize,
}

impl Default for SoftmaxSuiteConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 5,
            formulas_per_n: 10,
            thetas_per_formula: 50,
            radius: 3.0,
            tol: 1e-9,
            oracle_tol: 1e-12,
            b: 3,
            seed: 2,
            oracle_cap: SOFTMAX_ORACLE_CAP,
        }
    }
}

/// `θ_h = Σ_τ P(τ)·[1, M^(τ)]` summed over the trajectories from
/// `(state, action)`, where `M^(τ)` marks the universe clauses over
/// `x_{h+1}..x_n` that hold at the leaf of `τ`.
pub fn softmax_weight_by_trajectories(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
    action: Action,
) -> Result<SoftmaxWeight> {
    let h = state.stage();
    let trajectories =
        enumerate_trajectories(instance, params, state, action, DEFAULT_TRAJECTORY_CAP)?;
    let entries = instance.universe().entries();
    let mut head = 0.0;
    let mut m = vec![0.0; entries.len()];
    for tau in &trajectories {
        head += tau.probability;
        for (slot, clause) in m.iter_mut().zip(entries) {
            let eligible = clause.literals().iter().all(|l| l.var() as usize > h);
            if eligible && eval_clause(clause, &tau.terminal) == ClauseStatus::Satisfied {
                *slot += tau.probability;
            }
        }
    }
    Ok(SoftmaxWeight { stage: h, head, m })
}

/// Softmax realizability: `|q^π − ⟨φ, θ_h⟩| ≤ tol` on every cell for random
/// `θ'`, with the closed-form weights checked against the trajectory sum.
pub fn check_realizability_softmax(cfg: &SoftmaxSuiteConfig) -> Result<SuiteResult> {
    if cfg.n_max > cfg.oracle_cap {
        return Err(Error::CapExceeded {
            what: "softmax trajectory oracle",
            n: cfg.n_max,
            cap: cfg.oracle_cap,
        });
    }
    let mut rec = Recorder::new("realizability_softmax", cfg.seed);
    let jobs: Vec<(usize, usize, Formula)> = (cfg.n_min.max(1)..=cfg.n_max)
        .flat_map(|n| {
            suite_formulas(n, cfg.formulas_per_n, cfg.b, cfg.seed)
                .into_iter()
                .enumerate()
                .map(move |(fi, f)| (n, fi, f))
        })
        .collect();
    rec.par_each(jobs, |(n, fi, f), rec| {
        let instance = build_mdp(f);
        let mut r = rng::stream(cfg.seed ^ 0x5eed, (n as u64) << 32 | fi as u64);
        for _ in 0..cfg.thetas_per_formula {
            let params = random_params(&mut r, n, cfg.radius);
            softmax_cells(&instance, &params, cfg.tol, cfg.oracle_tol, rec);
        }
    });
    Ok(rec.finish(serde_json::to_value(cfg).expect("config serializes")))
}

/// The softmax checks for one instance and one `θ'`.
pub fn check_realizability_softmax_on(
    instance: &MdpInstance,
    params: &PolicyParams,
    tol: f64,
    oracle_tol: f64,
) -> SuiteResult {
    let mut rec = Recorder::new("realizability_softmax", 0);
    softmax_cells(instance, params, tol, oracle_tol, &mut rec);
    rec.finish(json!({ "tol": tol, "oracle_tol": oracle_tol }))
}

fn softmax_cells(
    instance: &MdpInstance,
    params: &PolicyParams,
    tol: f64,
    oracle_tol: f64,
    rec: &mut Recorder,
) {
    let n = instance.n();
    let weights: Vec<SoftmaxWeight> = (1..=n)
        .map(|h| softmax_weight(instance, params, h).expect("stage in range"))
        .collect();
    let inputs_h = |h: usize| json!({ "formula": instance.formula(), "theta_prime": params.theta_prime(), "h": h });

    for (h, w) in (1..=n).zip(&weights) {
        rec.check(
            w.head == 1.0 && w.m.iter().all(|x| (0.0..=1.0).contains(x)),
            || {
                (
                    "softmax weight range".into(),
                    inputs_h(h),
                    format!("head = {}", w.head),
                )
            },
        );
        // two different states of stage h must induce the same trajectory sum
        for prefix in [vec![false; h - 1], vec![true; h - 1]] {
            let s = State::from_prefix(&prefix, n);
            let oracle = softmax_weight_by_trajectories(instance, params, &s, Action::False)
                .expect("within cap");
            let diff = max_abs_diff(&w.m, &oracle.m).max((oracle.head - 1.0).abs());
            rec.check(diff <= oracle_tol, || {
                (
                    "closed form = trajectory sum".into(),
                    inputs_h(h),
                    format!("max diff {diff:e} from {s}"),
                )
            });
        }
    }

    for (state, action) in cells(instance) {
        let h = state.stage();
        let q = eval_q_softmax(instance, params, &state, action).expect("non-terminal cell");
        let q_ex =
            eval_q_softmax_exhaustive(instance, params, &state, action, DEFAULT_TRAJECTORY_CAP)
                .expect("within cap");
        let phi = realizability_feature(instance, &state, action).expect("non-terminal cell");
        let dot = phi.dot_softmax(&weights[h - 1]);
        let inputs = || cell_inputs(instance, params, &state, action);
        rec.check((q - dot).abs() <= tol, || {
            (
                "q = <phi, theta_h>".into(),
                inputs(),
                format!("q = {q:e}, dot = {dot:e}"),
            )
        });
        rec.check((q - q_ex).abs() <= oracle_tol, || {
            (
                "q closed form = trajectory sum".into(),
                inputs(),
                format!("q = {q:e}, exhaustive = {q_ex:e}"),
            )
        });
        rec.check((0.0..=1.0).contains(&q), || {
            ("q in [0,1]".into(), inputs(), format!("q = {q}"))
        });
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSuiteConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub formulas_per_n: usize,
    pub saturation: f64,
    pub tol: f64,
    pub b: usize,
    pub seed: u64,
    pub cap: usize,
}

impl Default for LimitSuiteConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 5,
            formulas_per_n: 5,
            saturation: 20.0,
            tol: 1e-6,
            b: 3,
            seed: 3,
            cap: GREEDY_CAP,
        }
    }
}

/// With `θ' = ±saturation`, softmax probabilities, weights and q-values
/// match those of the greedy policy with the same sign pattern.
pub fn check_limit_coupling(cfg: &LimitSuiteConfig) -> Result<SuiteResult> {
    if cfg.n_max > cfg.cap {
        return Err(Error::CapExceeded {
            what: "limit coupling sweep",
            n: cfg.n_max,
            cap: cfg.cap,
        });
    }
    let mut rec = Recorder::new("limit_coupling", cfg.seed);
    let formulas: Vec<Formula> = (cfg.n_min.max(1)..=cfg.n_max)
        .flat_map(|n| suite_formulas(n, cfg.formulas_per_n, cfg.b, cfg.seed))
        .collect();
    rec.par_each(formulas, |f, rec| {
        let instance = build_mdp(f);
        let n = instance.n();
        for bits in 0..1u64 << n {
            let soft = PolicyParams::sign_pattern(bits, n, cfg.saturation);
            let greedy = PolicyParams::sign_pattern(bits, n, 1.0);
            let inputs =
                || json!({ "formula": instance.formula(), "theta_prime": soft.theta_prime() });
            for h in 1..=n {
                let target = if greedy_action(h, &greedy).as_bool() {
                    1.0
                } else {
                    0.0
                };
                let p = softmax_prob(h, &soft);
                rec.check((p - target).abs() <= cfg.tol, || {
                    (
                        "action probability".into(),
                        inputs(),
                        format!("h = {h}, p = {p}"),
                    )
                });
                let sw = softmax_weight(&instance, &soft, h).expect("stage in range");
                let gw = greedy_weight(&instance, &greedy, h).expect("stage in range");
                let gm: Vec<f64> = gw.m.iter().map(|&x| x as f64).collect();
                let diff = max_abs_diff(&sw.m, &gm).max((sw.head - gw.head as f64).abs());
                rec.check(diff <= cfg.tol, || {
                    (
                        "weights".into(),
                        inputs(),
                        format!("h = {h}, diff {diff:e}"),
                    )
                });
            }
            for (state, action) in cells(&instance) {
                let qs = eval_q_softmax(&instance, &soft, &state, action).expect("non-terminal");
                let qg = eval_q_greedy(&instance, &greedy, &state, action).expect("non-terminal");
                let qg = *qg.numer() as f64 / *qg.denom() as f64;
                rec.check((qs - qg).abs() <= cfg.tol, || {
                    (
                        "q-values".into(),
                        cell_inputs(&instance, &soft, &state, action),
                        format!("{qs} vs {qg}"),
                    )
                });
            }
        }
    });
    Ok(rec.finish(serde_json::to_value(cfg).expect("config serializes")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripConfig {
    pub count: usize,
    pub n: usize,
    #[serde(with = "crate::frac")]
    pub delta: Rational64,
    #[serde(with = "crate::frac")]
    pub epsilon: Rational64,
    /// Clauses per planted instance.
    pub clauses: usize,
    pub seed: u64,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        Self {
            count: 100,
            n: 10,
            delta: Rational64::new(1, 10),
            epsilon: Rational64::new(1, 20),
            clauses: 40,
            seed: 4,
        }
    }
}

/// Planted `(1 − δ + 2ε)`-satisfiable instances must all come back Yes from
/// the exact solver with a re-verified certificate; fixed instances whose
/// optimum is below `1 − δ` must come back No.
pub fn check_reduction_roundtrip(cfg: &RoundtripConfig) -> Result<SuiteResult> {
    if cfg.epsilon > cfg.delta / 2 {
        return Err(Error::Precondition(format!(
            "need ε ≤ δ/2, got δ = {}, ε = {}",
            cfg.delta, cfg.epsilon
        )));
    }
    if cfg.n > DEFAULT_BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            what: "reduction roundtrip",
            n: cfg.n,
            cap: DEFAULT_BRUTE_FORCE_CAP,
        });
    }
    let mut rec = Recorder::new("reduction_roundtrip", cfg.seed);
    let zeta = Rational64::one() - cfg.delta + cfg.epsilon * 2;
    let decide_cfg = DecideConfig::greedy(cfg.delta, cfg.epsilon);
    let solver = ExactSolver::default();

    for i in 0..cfg.count {
        let mut r = rng::stream(cfg.seed, i as u64);
        let (f, planted) = planted_formula(&mut r, cfg.n, cfg.clauses, zeta);
        let inputs = || json!({ "formula": &f, "planted": &planted });
        let premise = is_zeta_satisfiable(&f, zeta, DEFAULT_BRUTE_FORCE_CAP)?;
        rec.check(
            premise.satisfiable && f.satisfied_fraction(&planted) >= zeta,
            || {
                (
                    "planted premise".into(),
                    inputs(),
                    format!("max fraction {}", premise.value),
                )
            },
        );
        match decide_max3sat(&f, &decide_cfg, &solver) {
            Ok(report) => {
                rec.check(report.decision == Decision::Yes, || {
                    (
                        "planted -> Yes".into(),
                        inputs(),
                        format!("fraction {}", report.achieved_fraction),
                    )
                });
                rec.check(report.verify(&f), || {
                    (
                        "certificate".into(),
                        inputs(),
                        "re-verification failed".into(),
                    )
                });
            }
            Err(e) => rec.check(false, || ("decide".into(), inputs(), e.to_string())),
        }
    }

    let negatives = [
        Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).expect("valid"),
        Formula::from_dimacs_clauses(
            3,
            &[
                &[1, 2, 3],
                &[1, 2, -3],
                &[1, -2, 3],
                &[1, -2, -3],
                &[-1, 2, 3],
                &[-1, 2, -3],
                &[-1, -2, 3],
                &[-1, -2, -3],
            ],
        )
        .expect("valid"),
    ];
    for f in &negatives {
        let report = decide_max3sat(f, &decide_cfg, &solver)?;
        let max = is_zeta_satisfiable(f, Rational64::zero(), DEFAULT_BRUTE_FORCE_CAP)?.value;
        rec.check(
            report.decision == Decision::No
                && max < Rational64::one() - cfg.delta
                && report.verify(f),
            || {
                (
                    "below 1-δ -> No".into(),
                    json!({ "formula": f }),
                    format!("max fraction {max}"),
                )
            },
        );
    }
    let example = Formula::from_dimacs_clauses(3, &[&[1, -2, 3], &[-1, 2, -3]]).expect("valid");
    let report = decide_max3sat(&example, &decide_cfg, &solver)?;
    rec.check(
        report.decision == Decision::Yes && report.verify(&example),
        || {
            (
                "example -> Yes".into(),
                json!({ "formula": &example }),
                format!("{:?}", report.decision),
            )
        },
    );

    Ok(rec.finish(serde_json::to_value(cfg).expect("config serializes")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McDiarmidSuiteConfig {
    pub n: usize,
    pub b: usize,
    pub trials: usize,
    pub p0: f64,
    pub radius: f64,
    pub seed: u64,
}

impl Default for McDiarmidSuiteConfig {
    fn default() -> Self {
        Self {
            n: 12,
            b: 3,
            trials: 100_000,
            p0: 0.125,
            radius: 1.0,
            seed: 5,
        }
    }
}

/// The tail bound returns `p0` at its calibration point, and Monte-Carlo
/// lower tails never exceed it beyond sampling slack.
pub fn check_mcdiarmid(cfg: &McDiarmidSuiteConfig) -> Result<SuiteResult> {
    let mut rec = Recorder::new("mcdiarmid", cfg.seed);
    let mut r = rng::stream(cfg.seed, 0);
    let f = random_formula(&mut r, cfg.n, 2 * cfg.n, cfg.b);
    let params = random_params(&mut r, cfg.n, cfg.radius);
    let instance = build_mdp(f);
    let (h, b, c) = (
        instance.horizon(),
        instance.formula().occurrence_bound(),
        instance.clause_count(),
    );
    let t_cal = mcdiarmid_deviation(cfg.p0, h, b, c)?;
    let tail = mcdiarmid_tail(t_cal, h, b, c)?;
    let base = || json!({ "formula": instance.formula(), "theta_prime": params.theta_prime() });
    rec.check(
        (tail - cfg.p0).abs() <= 4.0 * f64::EPSILON * cfg.p0.max(1.0),
        || {
            (
                "calibration".into(),
                base(),
                format!("tail(t) = {tail:e}, p0 = {}", cfg.p0),
            )
        },
    );

    let mut observed = Vec::new();
    for (k, t) in [0.0, t_cal / 4.0, t_cal / 2.0, t_cal, 1.0]
        .into_iter()
        .enumerate()
    {
        let check = empirical_mcdiarmid(
            &instance,
            &params,
            cfg.trials,
            t,
            cfg.seed.wrapping_add(k as u64 + 1),
        )?;
        rec.check(check.pass, || {
            (
                "empirical tail <= bound + slack".into(),
                base(),
                format!(
                    "t = {t}, empirical {}, bound {}, slack {}",
                    check.empirical_tail, check.bound, check.slack
                ),
            )
        });
        observed.push(check);
    }
    let mut params_json = serde_json::to_value(cfg).expect("config serializes");
    params_json["occurrence_bound"] = json!(b);
    params_json["clause_count"] = json!(c);
    params_json["t_calibrated"] = json!(t_cal);
    params_json["observations"] = serde_json::to_value(&observed).expect("serializes");
    Ok(rec.finish(params_json))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    /// Universe sizes are checked against the closed forms for all
    /// `1 ≤ n ≤ universe_check_max`.
    pub universe_check_max: usize,
    pub cubic_slope_max: f64,
    pub quartic_slope_max: f64,
    /// Advisory time budget for the all-stage softmax build at the largest n.
    pub softmax_budget_secs: f64,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            n_list: vec![5, 10, 20, 40],
            universe_check_max: 40,
            cubic_slope_max: 3.5,
            quartic_slope_max: 4.5,
            softmax_budget_secs: 10.0,
            seed: 6,
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Seconds per call: best of three samples, each averaging enough calls to
/// fill ~30 ms.
fn time_per_call(mut op: impl FnMut()) -> f64 {
    let start = Instant::now();
    op();
    let once = start.elapsed().as_secs_f64().max(1e-9);
    let iters = ((0.03 / once).ceil() as usize).clamp(1, 100_000);
    (0..3)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..iters {
                op();
            }
            start.elapsed().as_secs_f64() / iters as f64
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingItem {
    pub item: String,
    pub seconds: Vec<f64>,
    pub slope: f64,
    pub slope_max: Option<f64>,
}

/// Measures how construction time grows with `n` and fits log-log slopes.
///
/// Items with a cubic ceiling: universe enumeration, `φ` along one path
/// (one cell per stage), and one greedy `θ_h` at `h = 1`; the largest
/// weight vector. The softmax item builds `θ_h` for every stage and has a
/// quartic ceiling. The all-stage greedy build is reported without a
/// ceiling.
pub fn check_construction_scaling(cfg: &ScalingConfig) -> Result<SuiteResult> {
    if cfg.n_list.len() < 2 || cfg.n_list.contains(&0) {
        return Err(Error::InvalidParameter(
            "scaling needs at least two positive n values".into(),
        ));
    }
    let mut rec = Recorder::new("construction_scaling", cfg.seed);

    for n in 1..=cfg
        .universe_check_max
        .max(*cfg.n_list.iter().max().expect("non-empty"))
    {
        let u = enumerate_universe(n)?;
        let mut by_len = [0usize; 3];
        for c in u.entries() {
            by_len[c.len() - 1] += 1;
        }
        let closed = [
            2 * n,
            binom(2 * n, 2) - n,
            binom(2 * n, 3) + 2 * n - 2 * n * n,
        ];
        rec.check(
            by_len == closed && u.len() + 1 == 1 + closed.iter().sum::<usize>(),
            || {
                (
                    "universe block sizes".into(),
                    json!({ "n": n }),
                    format!("{by_len:?} vs {closed:?}"),
                )
            },
        );
    }

    let mut series: Vec<(&str, Option<f64>, Vec<f64>)> = vec![
        ("universe", Some(cfg.cubic_slope_max), vec![]),
        ("features_path", Some(cfg.cubic_slope_max), vec![]),
        ("greedy_weight", Some(cfg.cubic_slope_max), vec![]),
        (
            "softmax_weights_all_stages",
            Some(cfg.quartic_slope_max),
            vec![],
        ),
        ("greedy_weights_all_stages", None, vec![]),
    ];
    for &n in &cfg.n_list {
        let mut r = rng::stream(cfg.seed, n as u64);
        let instance = build_mdp(random_formula(&mut r, n, 2 * n, 3));
        let params = random_params(&mut r, n, 1.0);
        let path: Vec<State> = (0..n)
            .map(|k| State::from_prefix(&vec![true; k], n))
            .collect();

        series[0].2.push(time_per_call(|| {
            std::hint::black_box(enumerate_universe(n).expect("n >= 1"));
        }));
        series[1].2.push(time_per_call(|| {
            for s in &path {
                std::hint::black_box(
                    realizability_feature(&instance, s, Action::True).expect("non-terminal"),
                );
            }
        }));
        series[2].2.push(time_per_call(|| {
            std::hint::black_box(greedy_weight(&instance, &params, 1).expect("stage 1"));
        }));
        series[3].2.push(time_per_call(|| {
            for h in 1..=n {
                std::hint::black_box(
                    softmax_weight(&instance, &params, h).expect("stage in range"),
                );
            }
        }));
        series[4].2.push(time_per_call(|| {
            for h in 1..=n {
                std::hint::black_box(greedy_weight(&instance, &params, h).expect("stage in range"));
            }
        }));
    }

    let xs: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let mut items = Vec::new();
    for (name, max, seconds) in series {
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(seconds.iter().copied()).collect();
        let slope = loglog_slope(&pts);
        if let Some(limit) = max {
            rec.check(slope <= limit, || {
                (
                    format!("{name} slope"),
                    json!({ "n_list": &cfg.n_list }),
                    format!("slope {slope:.3} > {limit}"),
                )
            });
        }
        items.push(ScalingItem {
            item: name.to_string(),
            seconds,
            slope,
            slope_max: max,
        });
    }
    let softmax_last = *items[3].seconds.last().expect("non-empty");
    rec.check(softmax_last < cfg.softmax_budget_secs, || {
        (
            "softmax budget".into(),
            json!({ "n": cfg.n_list.last() }),
            format!("{softmax_last:.3}s over {}s", cfg.softmax_budget_secs),
        )
    });

    let mut params = serde_json::to_value(cfg).expect("config serializes");
    params["items"] = serde_json::to_value(&items).expect("serializes");
    Ok(rec.finish(params))
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Which operations each suite exercises.
pub const COVERAGE: &[(&str, &[&str])] = &[
    (
        "realizability_greedy",
        &[
            "features::greedy_weight",
            "features::realizability_feature",
            "features::lookahead_state",
            "features::undecided_multiset",
            "features::f_threshold",
            "features::psp_feature",
            "features::greedy_action",
            "policies::eval_q_greedy",
        ],
    ),
    (
        "telescoping",
        &[
            "features::greedy_weight",
            "features::realizability_feature",
            "features::greedy_action",
        ],
    ),
    (
        "realizability_softmax",
        &[
            "features::softmax_weight",
            "features::softmax_prob",
            "policies::eval_q_softmax",
            "policies::enumerate_trajectories",
        ],
    ),
    (
        "limit_coupling",
        &[
            "features::softmax_prob",
            "features::softmax_weight",
            "features::greedy_weight",
            "policies::eval_q_greedy",
        ],
    ),
    (
        "reduction_roundtrip",
        &[
            "reduction::decide_max3sat",
            "reduction::extract_assignment_greedy",
            "reduction::epsilon_bound_greedy",
            "policies::best_greedy",
        ],
    ),
    (
        "mcdiarmid",
        &[
            "reduction::mcdiarmid_tail",
            "reduction::empirical_mcdiarmid",
            "policies::sample_trajectory",
        ],
    ),
    (
        "construction_scaling",
        &[
            "features::realizability_feature",
            "features::greedy_weight",
            "features::softmax_weight",
        ],
    ),
    (
        "unit_tests",
        &[
            "reduction::extract_assignment_softmax",
            "reduction::epsilon_bound_softmax",
            "reduction::gap3sat_to_delta_b",
        ],
    ),
];

/// A suite selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Greedy,
    Telescoping,
    Softmax,
    Limit,
    Roundtrip,
    McDiarmid,
    Scaling,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Greedy,
        Suite::Telescoping,
        Suite::Softmax,
        Suite::Limit,
        Suite::Roundtrip,
        Suite::McDiarmid,
        Suite::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Greedy => "greedy",
            Suite::Telescoping => "telescoping",
            Suite::Softmax => "softmax",
            Suite::Limit => "limit",
            Suite::Roundtrip => "roundtrip",
            Suite::McDiarmid => "mcdiarmid",
            Suite::Scaling => "scaling",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown suite {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}
