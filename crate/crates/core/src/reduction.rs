//! From RL solvers back to Max-3SAT decisions.
//!
//! [`decide_max3sat`] compiles a formula into its MDP, hands the generative
//! model to an [`RlSolver`], reads an assignment off the returned policy and
//! answers Yes iff that assignment satisfies at least a `1 − δ` fraction of
//! the clauses. The answer carries its own certificate: the assignment.
//!
//! For greedy policies any `ε ≤ δ/2` suffices on instances that are
//! `(1 − δ + 2ε)`-satisfiable. For softmax policies the drawn assignment is
//! random, and the admissible `ε` shrinks by the McDiarmid deviation
//! `(b/|C|)·√(H·ln(1/p₀)/2)`; see [`epsilon_bound_softmax`].

use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::{max_satisfied, Assignment, Formula, DEFAULT_BRUTE_FORCE_CAP};
use crate::error::{Error, Result};
use crate::features::{
    f_threshold, greedy_action, psp_feature, realizability_feature, softmax_prob, PolicyParams,
    PspFeature, RealizabilityFeature,
};
use crate::frac;
use crate::mdp::{build_mdp, Action, MdpInstance, State};
use crate::policies::{eval_v_greedy, eval_v_softmax, sample_trajectory, sample_trajectory_with};
use crate::rng;

/// Default failure probability of the McDiarmid step.
pub const DEFAULT_P0: f64 = 0.125;
/// Default failure probability granted to the RL solver.
pub const DEFAULT_SOLVER_ERROR: f64 = 0.1;
/// Magnitude used to approximate the (unattained) softmax optimum.
pub const DEFAULT_SATURATION: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyClass {
    Greedy,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMode {
    /// `x_h = 1` iff `softmax_prob(h) > 1/2`.
    Round,
    /// `x_h` drawn with probability `softmax_prob(h)` from the given seed.
    Sample { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
}

/// The view of an instance a solver is allowed to use: simulator queries,
/// dimensions, and the exported feature vectors. The formula stays hidden.
#[derive(Clone, Copy)]
pub struct GenerativeAccess<'a> {
    instance: &'a MdpInstance,
}

impl<'a> GenerativeAccess<'a> {
    pub fn new(instance: &'a MdpInstance) -> Self {
        Self { instance }
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn horizon(&self) -> usize {
        self.instance.horizon()
    }

    pub fn d(&self) -> usize {
        self.instance.d()
    }

    pub fn d_prime(&self) -> usize {
        self.instance.d_prime()
    }

    pub fn initial_state(&self) -> State {
        self.instance.initial_state()
    }

    pub fn query(&self, state: &State, action: Action) -> Result<(State, Rational64)> {
        self.instance.generative_query(state, action)
    }

    pub fn feature(&self, state: &State, action: Action) -> Result<RealizabilityFeature> {
        realizability_feature(self.instance, state, action)
    }

    pub fn psp_feature(&self, h: usize, action: Action) -> Result<PspFeature> {
        psp_feature(h, action, self.d_prime())
    }
}

/// An RL algorithm run on the constructed instance. It returns the
/// parameters of a policy from the requested class.
pub trait RlSolver {
    fn solve(
        &self,
        access: &GenerativeAccess<'_>,
        epsilon: Rational64,
        class: PolicyClass,
    ) -> Result<PolicyParams>;
}

impl<F> RlSolver for F
where
    F: Fn(&GenerativeAccess<'_>, Rational64, PolicyClass) -> Result<PolicyParams>,
{
    fn solve(
        &self,
        access: &GenerativeAccess<'_>,
        epsilon: Rational64,
        class: PolicyClass,
    ) -> Result<PolicyParams> {
        self(access, epsilon, class)
    }
}

/// Exact solver: rolls out every sign pattern through the simulator and
/// keeps the best. For the softmax class the winning pattern is scaled to
/// `±saturation`.
#[derive(Debug, Clone)]
pub struct ExactSolver {
    pub cap: usize,
    pub saturation: f64,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self {
            cap: DEFAULT_BRUTE_FORCE_CAP,
            saturation: DEFAULT_SATURATION,
        }
    }
}

impl RlSolver for ExactSolver {
    fn solve(
        &self,
        access: &GenerativeAccess<'_>,
        _epsilon: Rational64,
        class: PolicyClass,
    ) -> Result<PolicyParams> {
        let n = access.n();
        if n > self.cap || n > 63 {
            return Err(Error::CapExceeded {
                what: "exact solver",
                n,
                cap: self.cap.min(63),
            });
        }
        let s1 = access.initial_state();
        let rollout = |bits: u64| -> Result<Rational64> {
            let params = PolicyParams::sign_pattern(bits, n, 1.0);
            let mut s = s1.clone();
            let mut total = Rational64::zero();
            while !s.is_terminal() {
                let (next, r) = access.query(&s, greedy_action(s.stage(), &params))?;
                total += r;
                s = next;
            }
            Ok(total)
        };
        let (_, bits) = (0..1u64 << n)
            .into_par_iter()
            .map(|bits| rollout(bits).map(|v| (v, bits)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .expect("at least one pattern");
        let scale = match class {
            PolicyClass::Greedy => 1.0,
            PolicyClass::Softmax => self.saturation,
        };
        Ok(PolicyParams::sign_pattern(bits, n, scale))
    }
}

/// `x_h = greedy_action(h)` for `h = 1..n`.
pub fn extract_assignment_greedy(params: &PolicyParams, n: usize) -> Assignment {
    Assignment::new(
        (1..=n)
            .map(|h| greedy_action(h, params).as_bool())
            .collect(),
    )
}

pub fn extract_assignment_softmax(
    instance: &MdpInstance,
    params: &PolicyParams,
    mode: ExtractionMode,
) -> Result<Assignment> {
    match mode {
        ExtractionMode::Round => Ok(Assignment::new(
            (1..=instance.n())
                .map(|h| softmax_prob(h, params) > 0.5)
                .collect(),
        )),
        ExtractionMode::Sample { seed } => {
            let t = sample_trajectory(instance, params, seed)?;
            Ok(t.terminal
                .to_assignment()
                .expect("sampled trajectories end at a leaf"))
        }
    }
}

/// `ε ≤ δ/2`.
pub fn epsilon_bound_greedy(delta: Rational64) -> Result<Rational64> {
    if delta <= Rational64::zero() || delta >= Rational64::one() {
        return Err(Error::InvalidParameter(format!(
            "δ = {delta} outside (0, 1)"
        )));
    }
    Ok(delta / 2)
}

fn check_counts(horizon: usize, b: usize, clauses: usize) -> Result<()> {
    if horizon == 0 || b == 0 || clauses == 0 {
        return Err(Error::InvalidParameter(format!(
            "H = {horizon}, b = {b}, |C| = {clauses} must all be positive"
        )));
    }
    Ok(())
}

/// `exp(−2t²·|C|² / (H·b²))`.
pub fn mcdiarmid_tail(t: f64, horizon: usize, b: usize, clauses: usize) -> Result<f64> {
    check_counts(horizon, b, clauses)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t = {t} must be finite and nonnegative"
        )));
    }
    let c = clauses as f64;
    let b = b as f64;
    Ok((-2.0 * t * t * c * c / (horizon as f64 * b * b)).exp())
}

/// The deviation `t` at which [`mcdiarmid_tail`] equals `p0`:
/// `(b/|C|)·√(H·ln(1/p0)/2)`.
pub fn mcdiarmid_deviation(p0: f64, horizon: usize, b: usize, clauses: usize) -> Result<f64> {
    check_counts(horizon, b, clauses)?;
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidParameter(format!("p0 = {p0} outside (0, 1)")));
    }
    Ok(b as f64 / clauses as f64 * (horizon as f64 * (1.0 / p0).ln() / 2.0).sqrt())
}

/// Largest `ε` for which an `ε`-optimal softmax policy still yields a
/// `(1 − δ)`-satisfying draw with probability `≥ 1 − p0`:
/// `v* + δ − (b/|C|)·√(H·ln(1/p0)/2) − 1`. May be negative, in which case no
/// `ε` is admissible at this horizon.
///
/// With `b = 3`, `δ = 0.1` and `p0 = 1/8` this is
/// `v* − 0.9 − 3·√(H·ln 8 / 2)/|C|`, and with `|C| = Θ(H)` the correction is
/// `O(1/√H)`, so a positive bound needs `H = Ω(1/(v* − 0.9)²)`.
pub fn epsilon_bound_softmax(
    v_star: Rational64,
    horizon: usize,
    b: usize,
    clauses: usize,
    delta: Rational64,
    p0: f64,
) -> Result<f64> {
    if v_star < Rational64::zero() || v_star > Rational64::one() {
        return Err(Error::InvalidParameter(format!(
            "v* = {v_star} outside [0, 1]"
        )));
    }
    if delta <= Rational64::zero() || delta >= Rational64::one() {
        return Err(Error::InvalidParameter(format!(
            "δ = {delta} outside (0, 1)"
        )));
    }
    let t = mcdiarmid_deviation(p0, horizon, b, clauses)?;
    Ok(to_f64(v_star) + to_f64(delta) - t - 1.0)
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Identity transform from a `(b, ε)`-gap instance to a `δ`-Max-3SAT(b)
/// instance, after validating the occurrence bound and `δ > ε`.
pub fn gap3sat_to_delta_b(
    formula: &Formula,
    b: usize,
    epsilon: Rational64,
    delta: Rational64,
) -> Result<Formula> {
    let occ = formula.occurrence_bound();
    if occ > b {
        return Err(Error::Precondition(format!(
            "a variable occurs in {occ} clauses, more than b = {b}"
        )));
    }
    if delta <= epsilon {
        return Err(Error::Precondition(format!(
            "need δ > ε, got δ = {delta}, ε = {epsilon}"
        )));
    }
    Ok(formula.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecideConfig {
    #[serde(with = "frac")]
    pub delta: Rational64,
    #[serde(with = "frac")]
    pub epsilon: Rational64,
    pub class: PolicyClass,
    /// Softmax only.
    pub mode: ExtractionMode,
    pub p0: f64,
    pub solver_error: f64,
    /// Occurrence bound for the softmax deviation term; defaults to the
    /// formula's own.
    pub b: Option<usize>,
    /// Largest `n` for which `v*` is computed by brute force.
    pub brute_force_cap: usize,
    /// Reject softmax runs whose `ε` exceeds [`epsilon_bound_softmax`].
    pub enforce_softmax_bound: bool,
}

impl DecideConfig {
    pub fn greedy(delta: Rational64, epsilon: Rational64) -> Self {
        Self {
            delta,
            epsilon,
            class: PolicyClass::Greedy,
            mode: ExtractionMode::Sample { seed: 0 },
            p0: DEFAULT_P0,
            solver_error: DEFAULT_SOLVER_ERROR,
            b: None,
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
            enforce_softmax_bound: true,
        }
    }

    pub fn softmax(delta: Rational64, epsilon: Rational64, seed: u64) -> Self {
        Self {
            class: PolicyClass::Softmax,
            mode: ExtractionMode::Sample { seed },
            ..Self::greedy(delta, epsilon)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDetails {
    pub b: usize,
    pub clause_count: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    pub p0: f64,
    /// McDiarmid deviation at `p0` (softmax).
    pub t: Option<f64>,
    pub tail_bound: Option<f64>,
    #[serde(with = "frac::option")]
    pub epsilon_bound_greedy: Option<Rational64>,
    pub epsilon_bound_softmax: Option<f64>,
    #[serde(with = "frac::option")]
    pub v_star: Option<Rational64>,
    /// `Some(false)` for softmax: `v*` is a supremum over `θ'`, approached
    /// as the parameters saturate but never reached.
    pub v_star_attained: Option<bool>,
    /// `(1 − solver_error)·(1 − p0)` (softmax).
    pub success_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub decision: Decision,
    pub class: PolicyClass,
    pub extracted: Assignment,
    #[serde(with = "frac")]
    pub achieved_fraction: Rational64,
    #[serde(with = "frac")]
    pub epsilon_used: Rational64,
    #[serde(with = "frac")]
    pub delta: Rational64,
    pub theta_prime: Vec<f64>,
    /// `v^π(s_1)` of the returned policy: a fraction for greedy, a decimal
    /// for softmax.
    pub policy_value: String,
    pub bound_details: BoundDetails,
    pub notes: Vec<String>,
}

impl ReductionReport {
    /// Recomputes the satisfied fraction from the formula and the extracted
    /// assignment and checks the decision against it.
    pub fn verify(&self, formula: &Formula) -> bool {
        if self.extracted.len() != formula.num_vars() {
            return false;
        }
        let fraction = formula.satisfied_fraction(&self.extracted);
        let yes = fraction >= Rational64::one() - self.delta;
        fraction == self.achieved_fraction && yes == (self.decision == Decision::Yes)
    }
}

/// Decides δ-Max-3SAT through an RL solver on the compiled instance.
pub fn decide_max3sat(
    formula: &Formula,
    config: &DecideConfig,
    solver: &dyn RlSolver,
) -> Result<ReductionReport> {
    let DecideConfig {
        delta,
        epsilon,
        class,
        p0,
        ..
    } = *config;
    if delta <= Rational64::zero() || delta >= Rational64::one() {
        return Err(Error::Precondition(format!("δ = {delta} outside (0, 1)")));
    }
    if epsilon < Rational64::zero() {
        return Err(Error::Precondition(format!("ε = {epsilon} is negative")));
    }
    if !(config.solver_error >= 0.0 && config.solver_error < 1.0) {
        return Err(Error::Precondition(format!(
            "solver error {} outside [0, 1)",
            config.solver_error
        )));
    }
    let instance = build_mdp(formula.clone());
    let occurrence = formula.occurrence_bound();
    let mut notes = Vec::new();
    let mut details = BoundDetails {
        b: config.b.unwrap_or(occurrence),
        clause_count: formula.clause_count(),
        horizon: instance.horizon(),
        p0,
        t: None,
        tail_bound: None,
        epsilon_bound_greedy: None,
        epsilon_bound_softmax: None,
        v_star: None,
        v_star_attained: None,
        success_probability: None,
    };

    match class {
        PolicyClass::Greedy => {
            let bound = epsilon_bound_greedy(delta)?;
            details.epsilon_bound_greedy = Some(bound);
            if epsilon > bound {
                return Err(Error::Precondition(format!(
                    "greedy reduction needs ε ≤ δ/2 = {bound}, got ε = {epsilon}"
                )));
            }
        }
        PolicyClass::Softmax => {
            if occurrence > details.b {
                return Err(Error::Precondition(format!(
                    "a variable occurs in {occurrence} clauses, more than b = {}",
                    details.b
                )));
            }
            let t = mcdiarmid_deviation(p0, details.horizon, details.b, details.clause_count)?;
            details.t = Some(t);
            details.tail_bound = Some(mcdiarmid_tail(
                t,
                details.horizon,
                details.b,
                details.clause_count,
            )?);
            details.success_probability = Some((1.0 - config.solver_error) * (1.0 - p0));
            if formula.num_vars() <= config.brute_force_cap {
                let (_, best) = max_satisfied(formula, config.brute_force_cap)?;
                let v_star = Rational64::new(best as i64, formula.clause_count() as i64);
                let bound = epsilon_bound_softmax(
                    v_star,
                    details.horizon,
                    details.b,
                    details.clause_count,
                    delta,
                    p0,
                )?;
                details.v_star = Some(v_star);
                details.v_star_attained = Some(false);
                details.epsilon_bound_softmax = Some(bound);
                if config.enforce_softmax_bound {
                    if bound <= 0.0 {
                        return Err(Error::Precondition(format!(
                            "softmax ε-bound is {bound:.6} ≤ 0: H = {} is below the floor for v* = {v_star}",
                            details.horizon
                        )));
                    }
                    if to_f64(epsilon) > bound {
                        return Err(Error::Precondition(format!(
                            "softmax reduction needs ε ≤ {bound:.6}, got ε = {epsilon}"
                        )));
                    }
                } else {
                    notes.push("softmax ε-bound computed but not enforced".into());
                }
            } else {
                notes.push(format!(
                    "v* unknown (n = {} exceeds brute-force cap {}); softmax ε-bound check skipped",
                    formula.num_vars(),
                    config.brute_force_cap
                ));
            }
        }
    }

    let access = GenerativeAccess::new(&instance);
    let params = solver.solve(&access, epsilon, class).map_err(|e| {
        Error::Solver(format!(
            "on n = {}, |C| = {}: {e}",
            formula.num_vars(),
            formula.clause_count()
        ))
    })?;
    if params.len() != instance.d_prime() {
        return Err(Error::Solver(format!(
            "returned θ' of length {}, expected {}",
            params.len(),
            instance.d_prime()
        )));
    }

    let (extracted, policy_value) = match class {
        PolicyClass::Greedy => {
            let v = eval_v_greedy(&instance, &params, &instance.initial_state())?;
            (
                extract_assignment_greedy(&params, instance.n()),
                frac::to_string(&v),
            )
        }
        PolicyClass::Softmax => {
            let v = eval_v_softmax(&instance, &params, &instance.initial_state())?;
            (
                extract_assignment_softmax(&instance, &params, config.mode)?,
                v.to_string(),
            )
        }
    };
    let achieved_fraction = formula.satisfied_fraction(&extracted);
    let decision = if achieved_fraction >= Rational64::one() - delta {
        Decision::Yes
    } else {
        Decision::No
    };

    Ok(ReductionReport {
        decision,
        class,
        extracted,
        achieved_fraction,
        epsilon_used: epsilon,
        delta,
        theta_prime: params.theta_prime().to_vec(),
        policy_value,
        bound_details: details,
        notes,
    })
}

/// Result of a Monte-Carlo check of the lower McDiarmid tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDiarmidCheck {
    pub trials: usize,
    pub t: f64,
    /// `E[R(s_H)] = v^π(s_1)`.
    pub expected: f64,
    /// Fraction of draws with `R − E[R] ≤ −t`.
    pub empirical_tail: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Samples `trials` leaves under the softmax policy and compares the
/// empirical lower tail with [`mcdiarmid_tail`], allowing three binomial
/// standard errors of slack.
pub fn empirical_mcdiarmid(
    instance: &MdpInstance,
    params: &PolicyParams,
    trials: usize,
    t: f64,
    seed: u64,
) -> Result<McDiarmidCheck> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let expected = eval_v_softmax(instance, params, &instance.initial_state())?;
    let bound = mcdiarmid_tail(
        t,
        instance.horizon(),
        instance.formula().occurrence_bound(),
        instance.clause_count(),
    )?;
    let c = instance.clause_count() as f64;
    let hits = (0..trials as u64)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng::stream(seed, i);
            let leaf = sample_trajectory_with(instance, params, &mut r).terminal;
            let a = leaf.to_assignment().expect("leaf");
            let reward = instance.formula().satisfied_count(&a) as f64 / c;
            reward - expected <= -t
        })
        .count();
    let empirical_tail = hits as f64 / trials as f64;
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(McDiarmidCheck {
        trials,
        t,
        expected,
        empirical_tail,
        bound,
        slack,
        pass: empirical_tail <= bound + slack,
    })
}

/// Greedy value of the look-ahead: `f_h` read off `θ'`.
pub fn threshold_assignment(params: &PolicyParams) -> Assignment {
    Assignment::new((1..=params.len()).map(|h| f_threshold(params, h)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> Formula {
        Formula::from_dimacs_clauses(3, &[&[1, -2, 3], &[-1, 2, -3]]).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn greedy_extraction() {
        let p = PolicyParams::uniform(3, 1.0);
        assert_eq!(
            extract_assignment_greedy(&p, 3),
            Assignment::new(vec![true; 3])
        );
        let p = PolicyParams::new(vec![-1.0, 1.0, -1.0]).unwrap();
        assert_eq!(
            extract_assignment_greedy(&p, 3),
            Assignment::new(vec![false, true, false])
        );
        assert_eq!(threshold_assignment(&p), extract_assignment_greedy(&p, 3));
    }

    #[test]
    fn softmax_extraction_round() {
        let m = build_mdp(example1());
        let a =
            extract_assignment_softmax(&m, &PolicyParams::uniform(3, 20.0), ExtractionMode::Round)
                .unwrap();
        assert_eq!(a, Assignment::new(vec![true; 3]));
        let a =
            extract_assignment_softmax(&m, &PolicyParams::uniform(3, 0.0), ExtractionMode::Round)
                .unwrap();
        assert_eq!(a, Assignment::new(vec![false; 3]));
        let s1 = extract_assignment_softmax(
            &m,
            &PolicyParams::uniform(3, 0.0),
            ExtractionMode::Sample { seed: 9 },
        );
        let s2 = extract_assignment_softmax(
            &m,
            &PolicyParams::uniform(3, 0.0),
            ExtractionMode::Sample { seed: 9 },
        );
        assert_eq!(s1.unwrap(), s2.unwrap());
    }

    #[test]
    fn greedy_epsilon_bound() {
        assert_eq!(epsilon_bound_greedy(r(1, 10)).unwrap(), r(1, 20));
        assert_eq!(epsilon_bound_greedy(r(1, 8)).unwrap(), r(1, 16));
        assert!(epsilon_bound_greedy(Rational64::zero()).is_err());
        assert!(epsilon_bound_greedy(Rational64::one()).is_err());
    }

    #[test]
    fn mcdiarmid_tail_values() {
        assert_eq!(mcdiarmid_tail(0.0, 4, 3, 10).unwrap(), 1.0);
        let base = mcdiarmid_tail(0.1, 5, 3, 10).unwrap();
        let doubled = mcdiarmid_tail(0.1, 5, 3, 20).unwrap();
        assert!((doubled - base.powi(4)).abs() < 1e-15);
        let t = mcdiarmid_deviation(0.125, 13, 3, 20).unwrap();
        assert!((mcdiarmid_tail(t, 13, 3, 20).unwrap() - 0.125).abs() < 1e-15);
        assert!(mcdiarmid_tail(-1.0, 4, 3, 10).is_err());
        assert!(mcdiarmid_tail(0.1, 0, 3, 10).is_err());
        assert!(mcdiarmid_deviation(1.0, 4, 3, 10).is_err());
    }

    #[test]
    fn softmax_epsilon_bound() {
        let h = 101;
        let big = epsilon_bound_softmax(Rational64::one(), h, 3, 100_000, r(1, 10), 0.125).unwrap();
        assert!(big > 0.0);
        let bound = epsilon_bound_softmax(r(19, 20), 10, 3, 30, r(1, 10), 0.125).unwrap();
        let expected = 0.95 - 0.9 - 3.0 * (10.0 * 8f64.ln() / 2.0).sqrt() / 30.0;
        assert!((bound - expected).abs() < 1e-12);
        assert!(bound <= 0.0);
        assert!(epsilon_bound_softmax(r(3, 2), 10, 3, 30, r(1, 10), 0.125).is_err());
    }

    #[test]
    fn gap_transform() {
        let f = example1();
        assert_eq!(gap3sat_to_delta_b(&f, 3, r(1, 20), r(1, 10)).unwrap(), f);
        let heavy = Formula::from_dimacs_clauses(2, &[&[1], &[1, 2], &[-1], &[-1, -2]]).unwrap();
        assert!(gap3sat_to_delta_b(&heavy, 3, r(1, 20), r(1, 10)).is_err());
        assert!(gap3sat_to_delta_b(&f, 3, r(1, 10), r(1, 20)).is_err());
    }

    #[test]
    fn decide_examples() {
        let cfg = DecideConfig::greedy(r(1, 10), r(1, 20));
        let report = decide_max3sat(&example1(), &cfg, &ExactSolver::default()).unwrap();
        assert_eq!(report.decision, Decision::Yes);
        assert_eq!(report.achieved_fraction, Rational64::one());
        assert!(report.verify(&example1()));

        let contradiction = Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let report = decide_max3sat(&contradiction, &cfg, &ExactSolver::default()).unwrap();
        assert_eq!(report.decision, Decision::No);
        assert_eq!(report.achieved_fraction, r(1, 2));
        assert!(report.verify(&contradiction));

        let bad = DecideConfig::greedy(r(1, 10), r(1, 5));
        assert!(matches!(
            decide_max3sat(&example1(), &bad, &ExactSolver::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn solver_errors_are_wrapped() {
        let failing =
            |_: &GenerativeAccess<'_>, _: Rational64, _: PolicyClass| -> Result<PolicyParams> {
                Err(Error::InvalidParameter("boom".into()))
            };
        let cfg = DecideConfig::greedy(r(1, 10), r(1, 20));
        match decide_max3sat(&example1(), &cfg, &failing) {
            Err(Error::Solver(msg)) => assert!(msg.contains("boom")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn softmax_decide_checks_bound() {
        let cfg = DecideConfig::softmax(r(1, 10), r(1, 100), 1);
        // desk-scale instances sit far below the horizon floor
        assert!(matches!(
            decide_max3sat(&example1(), &cfg, &ExactSolver::default()),
            Err(Error::Precondition(_))
        ));
        let relaxed = DecideConfig {
            enforce_softmax_bound: false,
            ..cfg
        };
        let report = decide_max3sat(&example1(), &relaxed, &ExactSolver::default()).unwrap();
        assert!(report.verify(&example1()));
        assert_eq!(report.decision, Decision::Yes);
        assert!(report.bound_details.epsilon_bound_softmax.unwrap() <= 0.0);
        let p = report.bound_details.success_probability.unwrap();
        assert!(p > 2.0 / 3.0);
    }

    #[test]
    fn report_json_uses_fraction_strings() {
        let cfg = DecideConfig::greedy(r(1, 10), r(1, 20));
        let report = decide_max3sat(&example1(), &cfg, &ExactSolver::default()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["achieved_fraction"], "1/1");
        assert_eq!(json["delta"], "1/10");
        assert_eq!(json["decision"], "Yes");
        assert_eq!(json["extracted"], serde_json::json!([1, 1, 1]));
        let back: ReductionReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn empirical_tail_edges() {
        let m = build_mdp(example1());
        let p = PolicyParams::new(vec![0.2, -0.3, 0.1]).unwrap();
        let c = empirical_mcdiarmid(&m, &p, 2000, 1.0, 4).unwrap();
        assert_eq!(c.empirical_tail, 0.0);
        assert!(c.pass);
        let c = empirical_mcdiarmid(&m, &p, 2000, 0.0, 4).unwrap();
        assert_eq!(c.bound, 1.0);
        assert!(c.pass);
    }
}
