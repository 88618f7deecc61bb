//! Feature and weight vectors of the reduction.
//!
//! Two pairs live here. The policy parameterization `(φ', θ')` has dimension
//! `n`: `φ'(s_h, a)` is `±1` at coordinate `h` and zero elsewhere, so a
//! parameter vector `θ'` induces the same greedy action (or the same softmax
//! distribution) at every state of a stage.
//!
//! The realizability pair `(φ, θ_h)` has dimension `1 + |C_total|`:
//! `φ(s_h, a) = [b_h, Y_h] / |C|` where `b_h` counts clause instances already
//! satisfied by `x_1..x_h` and `Y_h` counts the simplified undecided clauses
//! per universe coordinate, and `θ_h = [1, M_h]` where `M_h` holds, for each
//! universe clause over `x_{h+1}..x_n` only, its (probability of)
//! satisfaction under the policy's continuation. `M_h` depends on `θ'` and
//! `h` alone.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::cnf::{eval_clause, Clause, ClauseStatus, Formula, Valuation};
use crate::error::{Error, Result};
use crate::mdp::{Action, MdpInstance, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PspFeature {
    pub stage: usize,
    pub action: Action,
    pub vector: Vec<i8>,
}

impl PspFeature {
    pub fn dot(&self, params: &PolicyParams) -> f64 {
        self.vector
            .iter()
            .zip(params.theta_prime())
            .map(|(&f, &t)| f as f64 * t)
            .sum()
    }
}

pub fn psp_feature(h: usize, action: Action, d_prime: usize) -> Result<PspFeature> {
    if !(1..=d_prime).contains(&h) {
        return Err(Error::StageOutOfRange { h, max: d_prime });
    }
    let mut vector = vec![0i8; d_prime];
    vector[h - 1] = if action.as_bool() { 1 } else { -1 };
    Ok(PspFeature {
        stage: h,
        action,
        vector,
    })
}

/// Policy parameters `θ' ∈ ℝ^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolicyParamsJson", into = "PolicyParamsJson")]
pub struct PolicyParams {
    theta_prime: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolicyParamsJson {
    theta_prime: Vec<f64>,
}

impl TryFrom<PolicyParamsJson> for PolicyParams {
    type Error = Error;

    fn try_from(j: PolicyParamsJson) -> Result<Self> {
        PolicyParams::new(j.theta_prime)
    }
}

impl From<PolicyParams> for PolicyParamsJson {
    fn from(p: PolicyParams) -> Self {
        Self {
            theta_prime: p.theta_prime,
        }
    }
}

impl PolicyParams {
    pub fn new(theta_prime: Vec<f64>) -> Result<Self> {
        if let Some(t) = theta_prime.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite θ' entry {t}")));
        }
        Ok(Self { theta_prime })
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        Self::new(vec![value; n]).expect("finite value")
    }

    /// `±scale` per coordinate, `+` where bit `i` of `bits` is set.
    pub fn sign_pattern(bits: u64, n: usize, scale: f64) -> Self {
        Self::new(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { scale } else { -scale })
                .collect(),
        )
        .expect("finite scale")
    }

    /// Parses `"+-+"` into `[1, -1, 1]`.
    pub fn from_sign_string(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1.0),
                '-' => Ok(-1.0),
                other => Err(Error::InvalidParameter(format!(
                    "sign pattern character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .and_then(Self::new)
    }

    pub fn theta_prime(&self) -> &[f64] {
        &self.theta_prime
    }

    pub fn len(&self) -> usize {
        self.theta_prime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_prime.is_empty()
    }

    /// `θ'_h` for 1-based `h`.
    pub fn entry(&self, h: usize) -> f64 {
        self.theta_prime[h - 1]
    }
}

/// Greedy action at stage `h`: the argmax of `⟨φ'(s_h, a), θ'⟩`, with ties
/// going to the lower action index.
pub fn greedy_action(h: usize, params: &PolicyParams) -> Action {
    let d_prime = params.len();
    let score = |a| {
        psp_feature(h, a, d_prime)
            .expect("stage in range")
            .dot(params)
    };
    // strict comparison keeps ties on False
    if score(Action::True) > score(Action::False) {
        Action::True
    } else {
        Action::False
    }
}

/// `f_h(θ') = 0` if `θ'_h ≤ 0`, else `1`.
pub fn f_threshold(params: &PolicyParams, h: usize) -> bool {
    params.entry(h) > 0.0
}

/// Probability that the softmax policy picks `True` at stage `h`:
/// `e^{θ'_h} / (e^{θ'_h} + e^{−θ'_h})`.
pub fn softmax_prob(h: usize, params: &PolicyParams) -> f64 {
    logistic(2.0 * params.entry(h))
}

/// `(Pr[False], Pr[True])` at stage `h`, each computed without cancellation.
pub fn softmax_probs(h: usize, params: &PolicyParams) -> (f64, f64) {
    let t = 2.0 * params.entry(h);
    (logistic(-t), logistic(t))
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `U_h`: every clause instance not decided by `prefix`, simplified to its
/// unassigned literals, in formula order.
pub fn undecided_multiset<V: Valuation + ?Sized>(formula: &Formula, prefix: &V) -> Vec<Clause> {
    formula
        .clauses()
        .iter()
        .filter_map(|c| match eval_clause(c, prefix) {
            ClauseStatus::Undecided(rest) => Some(rest),
            _ => None,
        })
        .collect()
}

/// `φ(s_h, a)` before scaling by `1/|C|`. `y` is stored sparsely as sorted
/// `(coordinate, multiplicity)` pairs over the clause universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizabilityFeature {
    pub stage: usize,
    /// `b_h`.
    pub satisfied: u64,
    pub y: Vec<(usize, u64)>,
    /// `|C_total|`, the length of `y` when dense.
    pub dim: usize,
    /// `|C|`.
    pub clause_count: u64,
}

impl RealizabilityFeature {
    pub fn undecided_count(&self) -> u64 {
        self.y.iter().map(|&(_, m)| m).sum()
    }

    pub fn dense_y(&self) -> Vec<u64> {
        let mut out = vec![0; self.dim];
        for &(i, m) in &self.y {
            out[i] = m;
        }
        out
    }

    /// `⟨Y_h, M_h⟩` as an integer count.
    pub fn y_dot_greedy(&self, w: &GreedyWeight) -> u64 {
        self.y.iter().map(|&(i, m)| m * w.m[i] as u64).sum()
    }

    pub fn dot_greedy(&self, w: &GreedyWeight) -> Rational64 {
        let num = self.satisfied * w.head as u64 + self.y_dot_greedy(w);
        Rational64::new(num as i64, self.clause_count as i64)
    }

    pub fn y_dot_softmax(&self, w: &SoftmaxWeight) -> f64 {
        self.y.iter().map(|&(i, m)| m as f64 * w.m[i]).sum()
    }

    pub fn dot_softmax(&self, w: &SoftmaxWeight) -> f64 {
        (self.satisfied as f64 * w.head + self.y_dot_softmax(w)) / self.clause_count as f64
    }

    pub fn to_json(&self) -> VectorJson {
        let entries = std::iter::once(self.satisfied)
            .chain(self.dense_y())
            .map(|v| v.to_string())
            .collect();
        VectorJson {
            scale_num: 1,
            scale_den: self.clause_count,
            entries,
        }
    }
}

pub fn realizability_feature(
    instance: &MdpInstance,
    state: &State,
    action: Action,
) -> Result<RealizabilityFeature> {
    let next = instance.transition(state, action)?;
    let universe = instance.universe();
    let mut satisfied = 0;
    let mut y = BTreeMap::new();
    for clause in instance.formula().clauses() {
        match eval_clause(clause, &next) {
            ClauseStatus::Satisfied => satisfied += 1,
            ClauseStatus::Falsified => {}
            ClauseStatus::Undecided(rest) => {
                let i = universe
                    .index_of(&rest)
                    .expect("simplified clause lies in the universe");
                *y.entry(i).or_insert(0) += 1;
            }
        }
    }
    Ok(RealizabilityFeature {
        stage: state.stage(),
        satisfied,
        y: y.into_iter().collect(),
        dim: universe.len(),
        clause_count: instance.clause_count() as u64,
    })
}

/// `θ_h = [head, M_h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizabilityWeight<T> {
    pub stage: usize,
    pub head: T,
    pub m: Vec<T>,
}

/// Entries in `{0, 1}`.
pub type GreedyWeight = RealizabilityWeight<u8>;
/// Entries in `[0, 1]`.
pub type SoftmaxWeight = RealizabilityWeight<f64>;

impl GreedyWeight {
    pub fn to_json(&self) -> VectorJson {
        VectorJson {
            scale_num: 1,
            scale_den: 1,
            entries: std::iter::once(self.head)
                .chain(self.m.iter().copied())
                .map(|v| v.to_string())
                .collect(),
        }
    }
}

impl SoftmaxWeight {
    pub fn to_json(&self) -> VectorJson {
        VectorJson {
            scale_num: 1,
            scale_den: 1,
            entries: std::iter::once(self.head)
                .chain(self.m.iter().copied())
                .map(|v| v.to_string())
                .collect(),
        }
    }
}

/// JSON export of a feature or weight vector; coordinate 0 is `b_h` or the
/// head, the rest follow the clause-universe order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub scale_num: u64,
    pub scale_den: u64,
    pub entries: Vec<String>,
}

fn check_weight_stage(instance: &MdpInstance, params: &PolicyParams, h: usize) -> Result<()> {
    if params.len() != instance.d_prime() {
        return Err(Error::InvalidParameter(format!(
            "θ' has {} entries, expected {}",
            params.len(),
            instance.d_prime()
        )));
    }
    let max = instance.horizon() - 1;
    if !(1..=max).contains(&h) {
        return Err(Error::StageOutOfRange { h, max });
    }
    Ok(())
}

/// Greedy `θ_h`: `m[i] = 1` iff universe clause `i` mentions only
/// `x_{h+1}..x_n` and holds when each such `x_j = f_j(θ')`.
pub fn greedy_weight(
    instance: &MdpInstance,
    params: &PolicyParams,
    h: usize,
) -> Result<GreedyWeight> {
    check_weight_stage(instance, params, h)?;
    let look: Vec<bool> = (1..=instance.n()).map(|j| f_threshold(params, j)).collect();
    let m = instance
        .universe()
        .entries()
        .iter()
        .map(|c| {
            let eligible = c.min_var() as usize > h;
            (eligible
                && c.literals()
                    .iter()
                    .any(|l| l.eval(look[l.var() as usize - 1]))) as u8
        })
        .collect();
    Ok(RealizabilityWeight {
        stage: h,
        head: 1,
        m,
    })
}

/// Softmax `θ_h`: `m[i]` is the probability that universe clause `i` over
/// `x_{h+1}..x_n` holds when each `x_j` is drawn independently with
/// `Pr[x_j = 1] = softmax_prob(j)`, i.e. `1 − ∏ Pr[literal false]`.
pub fn softmax_weight(
    instance: &MdpInstance,
    params: &PolicyParams,
    h: usize,
) -> Result<SoftmaxWeight> {
    check_weight_stage(instance, params, h)?;
    let probs: Vec<(f64, f64)> = (1..=instance.n())
        .map(|j| softmax_probs(j, params))
        .collect();
    let m = instance
        .universe()
        .entries()
        .iter()
        .map(|c| {
            if c.min_var() as usize <= h {
                return 0.0;
            }
            let all_false: f64 = c
                .literals()
                .iter()
                .map(|l| {
                    let (p0, p1) = probs[l.var() as usize - 1];
                    if l.is_negated() {
                        p1
                    } else {
                        p0
                    }
                })
                .product();
            1.0 - all_false
        })
        .collect();
    Ok(RealizabilityWeight {
        stage: h,
        head: 1.0,
        m,
    })
}

/// The leaf reached from `(state, action)` when every later variable is set
/// by `f_j(θ')`. A terminal state is returned unchanged.
pub fn lookahead_state(state: &State, action: Action, params: &PolicyParams) -> State {
    if state.is_terminal() {
        return state.clone();
    }
    let n = state.n();
    let h = state.stage();
    let mut values = state.values().to_vec();
    values[h - 1] = action as i8;
    for j in h + 1..=n {
        values[j - 1] = f_threshold(params, j) as i8;
    }
    State::new(values).expect("fully assigned state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::build_mdp;

    fn example() -> MdpInstance {
        build_mdp(Formula::from_dimacs_clauses(3, &[&[1, -2, 3], &[-1, 2, -3]]).unwrap())
    }

    fn s(v: &[i8]) -> State {
        State::new(v.to_vec()).unwrap()
    }

    #[test]
    fn psp_vectors() {
        assert_eq!(
            psp_feature(1, Action::True, 3).unwrap().vector,
            vec![1, 0, 0]
        );
        assert_eq!(
            psp_feature(1, Action::False, 3).unwrap().vector,
            vec![-1, 0, 0]
        );
        assert_eq!(
            psp_feature(3, Action::True, 3).unwrap().vector,
            vec![0, 0, 1]
        );
        assert!(psp_feature(0, Action::True, 3).is_err());
        assert!(psp_feature(4, Action::True, 3).is_err());
    }

    #[test]
    fn greedy_and_threshold() {
        let all_true = PolicyParams::uniform(3, 1.0);
        assert_eq!(greedy_action(2, &all_true), Action::True);
        let zeros = PolicyParams::uniform(3, 0.0);
        assert_eq!(greedy_action(1, &zeros), Action::False);
        assert!(!f_threshold(&zeros, 1));
        let neg = PolicyParams::new(vec![-0.5, 1.0, 1.0]).unwrap();
        assert_eq!(greedy_action(1, &neg), Action::False);
        assert!(f_threshold(&PolicyParams::new(vec![3.2]).unwrap(), 1));
    }

    #[test]
    fn softmax_probabilities() {
        assert_eq!(softmax_prob(1, &PolicyParams::uniform(1, 0.0)), 0.5);
        assert!(softmax_prob(1, &PolicyParams::uniform(1, 15.0)) > 1.0 - 1e-9);
        let e = std::f64::consts::E;
        let p = softmax_prob(1, &PolicyParams::uniform(1, 1.0));
        assert!((p - e / (e + 1.0 / e)).abs() < 1e-15);
        // (1 + tanh θ) / 2 is an independent closed form of the same logistic
        assert!((p - (1.0 + 1f64.tanh()) / 2.0).abs() < 1e-15);
        let (p0, p1) = softmax_probs(1, &PolicyParams::uniform(1, 0.7));
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undecided_clauses_from_worked_example() {
        let f =
            Formula::from_dimacs_clauses(7, &[&[-1, -2], &[1, -4, 5], &[2, -4, 5], &[3, -6, 7]])
                .unwrap();
        let prefix = State::from_prefix(&[false, false], 7);
        let u = undecided_multiset(&f, &prefix);
        let c45 = Clause::from_dimacs(&[-4, 5]).unwrap();
        assert_eq!(
            u,
            vec![c45.clone(), c45, Clause::from_dimacs(&[3, -6, 7]).unwrap()]
        );
        assert_eq!(
            undecided_multiset(&f, &State::initial(7)),
            f.clauses().to_vec()
        );
    }

    #[test]
    fn realizability_feature_worked_example() {
        let m = example();
        let phi = realizability_feature(&m, &s(&[1, -1, -1]), Action::False).unwrap();
        assert_eq!(phi.satisfied, 1);
        let x3bar = m
            .universe()
            .index_of(&Clause::from_dimacs(&[-3]).unwrap())
            .unwrap();
        assert_eq!(phi.y, vec![(x3bar, 1)]);
        assert_eq!(phi.stage, 2);
        assert!(realizability_feature(&m, &s(&[1, 0, 1]), Action::True).is_err());
    }

    #[test]
    fn no_clause_on_x1_gives_zero_satisfied() {
        let m = build_mdp(Formula::from_dimacs_clauses(3, &[&[2, 3]]).unwrap());
        for a in Action::ALL {
            assert_eq!(
                realizability_feature(&m, &m.initial_state(), a)
                    .unwrap()
                    .satisfied,
                0
            );
        }
    }

    #[test]
    fn greedy_weight_worked_example() {
        let m = example();
        let theta = PolicyParams::uniform(3, 1.0);
        let w = greedy_weight(&m, &theta, 2).unwrap();
        let x3bar = m
            .universe()
            .index_of(&Clause::from_dimacs(&[-3]).unwrap())
            .unwrap();
        let x3 = m
            .universe()
            .index_of(&Clause::from_dimacs(&[3]).unwrap())
            .unwrap();
        assert_eq!(w.m[x3bar], 0);
        assert_eq!(w.m[x3], 1);
        let phi = realizability_feature(&m, &s(&[1, -1, -1]), Action::False).unwrap();
        assert_eq!(phi.dot_greedy(&w), Rational64::new(1, 2));
    }

    #[test]
    fn last_stage_weight_is_zero() {
        let m = example();
        let w = greedy_weight(&m, &PolicyParams::uniform(3, 1.0), 3).unwrap();
        assert!(w.m.iter().all(|&x| x == 0));
        assert!(greedy_weight(&m, &PolicyParams::uniform(3, 1.0), 4).is_err());
        assert!(greedy_weight(&m, &PolicyParams::uniform(3, 1.0), 0).is_err());
        assert!(greedy_weight(&m, &PolicyParams::uniform(2, 1.0), 1).is_err());
    }

    #[test]
    fn assigned_variables_zero_out_weights() {
        let m = example();
        let w = greedy_weight(&m, &PolicyParams::uniform(3, 1.0), 1).unwrap();
        for (c, &v) in m.universe().entries().iter().zip(&w.m) {
            if c.contains_var(1) {
                assert_eq!(v, 0, "{c}");
            }
        }
    }

    #[test]
    fn uniform_softmax_weights() {
        let m = build_mdp(Formula::from_dimacs_clauses(4, &[&[1]]).unwrap());
        let w = softmax_weight(&m, &PolicyParams::uniform(4, 0.0), 1).unwrap();
        assert_eq!(w.head, 1.0);
        for (c, &v) in m.universe().entries().iter().zip(&w.m) {
            let expected = if c.contains_var(1) {
                0.0
            } else {
                [0.5, 0.75, 0.875][c.len() - 1]
            };
            assert_eq!(v, expected, "{c}");
        }
    }

    #[test]
    fn saturated_softmax_weight_matches_greedy() {
        let m = example();
        let sm = softmax_weight(&m, &PolicyParams::uniform(3, 20.0), 1).unwrap();
        let g = greedy_weight(&m, &PolicyParams::uniform(3, 1.0), 1).unwrap();
        let diff =
            sm.m.iter()
                .zip(&g.m)
                .map(|(a, &b)| (a - b as f64).abs())
                .fold(0.0, f64::max);
        assert!(diff < 1e-6);
    }

    #[test]
    fn lookahead() {
        let theta = PolicyParams::uniform(3, 1.0);
        assert_eq!(
            lookahead_state(&s(&[1, -1, -1]), Action::False, &theta),
            s(&[1, 0, 1])
        );
        assert_eq!(
            lookahead_state(&s(&[0, 1, 1]), Action::False, &theta),
            s(&[0, 1, 1])
        );
    }

    #[test]
    fn vector_json() {
        let m = example();
        let phi = realizability_feature(&m, &s(&[1, -1, -1]), Action::False).unwrap();
        let j = phi.to_json();
        assert_eq!(j.scale_den, 2);
        assert_eq!(j.entries.len(), 27);
        assert_eq!(j.entries[0], "1");
        let w = softmax_weight(&m, &PolicyParams::uniform(3, 0.0), 1)
            .unwrap()
            .to_json();
        assert_eq!(w.entries[0], "1");
    }

    #[test]
    fn params_parsing() {
        assert_eq!(
            PolicyParams::from_sign_string("+-+").unwrap().theta_prime(),
            &[1.0, -1.0, 1.0]
        );
        assert!(PolicyParams::from_sign_string("+x").is_err());
        assert!(PolicyParams::new(vec![f64::NAN]).is_err());
        let p: PolicyParams = serde_json::from_str(r#"{"theta_prime":[1.0,-2.5]}"#).unwrap();
        assert_eq!(p.theta_prime(), &[1.0, -2.5]);
    }
}
