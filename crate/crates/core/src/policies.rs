//! Exact evaluation of greedy and softmax policies, trajectory enumeration
//! and sampling, and the exhaustive best-greedy sweep.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::{eval_clause, ClauseStatus};
use crate::error::{Error, Result};
use crate::features::{greedy_action, softmax_probs, PolicyParams};
use crate::mdp::{Action, MdpInstance, State};
use crate::rng;

/// Cap on the number of free stages for trajectory enumeration.
pub const DEFAULT_TRAJECTORY_CAP: usize = 20;

/// A path `(s_h, a_h, ..., s_H)` with its probability under the policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<(State, Action)>,
    pub terminal: State,
    pub probability: f64,
}

impl Trajectory {
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.steps.iter().map(|&(_, a)| a)
    }
}

/// `q` and `v` over every state of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValue<T> {
    pub q: BTreeMap<(State, Action), T>,
    pub v: BTreeMap<State, T>,
}

fn check_params(instance: &MdpInstance, params: &PolicyParams) -> Result<()> {
    if params.len() != instance.d_prime() {
        return Err(Error::InvalidParameter(format!(
            "θ' has {} entries, expected {}",
            params.len(),
            instance.d_prime()
        )));
    }
    Ok(())
}

/// `q^π(s, a)` for the greedy policy of `params`, by rolling the simulator
/// forward.
pub fn eval_q_greedy(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
    action: Action,
) -> Result<Rational64> {
    check_params(instance, params)?;
    let (mut s, mut total) = instance.generative_query(state, action)?;
    while !s.is_terminal() {
        let (next, r) = instance.generative_query(&s, greedy_action(s.stage(), params))?;
        total += r;
        s = next;
    }
    Ok(total)
}

/// `v^π(s)`; zero at leaves.
pub fn eval_v_greedy(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
) -> Result<Rational64> {
    if state.is_terminal() {
        return Ok(Rational64::zero());
    }
    eval_q_greedy(
        instance,
        params,
        state,
        greedy_action(state.stage(), params),
    )
}

/// `q^π(s, a)` for the softmax policy, as the expected leaf reward. The
/// continuation draws each later `x_j` independently, so each clause
/// contributes the probability that one of its open literals comes up true.
pub fn eval_q_softmax(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
    action: Action,
) -> Result<f64> {
    check_params(instance, params)?;
    let next = instance.transition(state, action)?;
    let probs: Vec<(f64, f64)> = (1..=instance.n())
        .map(|j| softmax_probs(j, params))
        .collect();
    let expected: f64 = instance
        .formula()
        .clauses()
        .iter()
        .map(|c| match eval_clause(c, &next) {
            ClauseStatus::Satisfied => 1.0,
            ClauseStatus::Falsified => 0.0,
            ClauseStatus::Undecided(rest) => {
                let none_true: f64 = rest
                    .literals()
                    .iter()
                    .map(|l| {
                        let (p_false, p_true) = probs[l.var() as usize - 1];
                        if l.is_negated() {
                            p_true
                        } else {
                            p_false
                        }
                    })
                    .product();
                1.0 - none_true
            }
        })
        .sum();
    Ok(expected / instance.clause_count() as f64)
}

/// `q^π(s, a)` as `Σ_τ P(τ)·R(τ)` over every continuation.
pub fn eval_q_softmax_exhaustive(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
    action: Action,
    cap: usize,
) -> Result<f64> {
    let trajectories = enumerate_trajectories(instance, params, state, action, cap)?;
    Ok(trajectories
        .iter()
        .map(|t| t.probability * reward_f64(instance, &t.terminal))
        .sum())
}

fn reward_f64(instance: &MdpInstance, s: &State) -> f64 {
    let r = instance.reward(s);
    *r.numer() as f64 / *r.denom() as f64
}

/// `v^π(s) = Σ_a π(a|s)·q^π(s, a)`.
pub fn eval_v_softmax(instance: &MdpInstance, params: &PolicyParams, state: &State) -> Result<f64> {
    if state.is_terminal() {
        return Ok(0.0);
    }
    let (p0, p1) = softmax_probs(state.stage(), params);
    Ok(p0 * eval_q_softmax(instance, params, state, Action::False)?
        + p1 * eval_q_softmax(instance, params, state, Action::True)?)
}

/// Every continuation of `(state, action)` under the softmax policy:
/// `2^(H−h−1)` trajectories.
pub fn enumerate_trajectories(
    instance: &MdpInstance,
    params: &PolicyParams,
    state: &State,
    action: Action,
    cap: usize,
) -> Result<Vec<Trajectory>> {
    check_params(instance, params)?;
    let first = instance.transition(state, action)?;
    let free = instance.n() - first.assigned();
    if free > cap {
        return Err(Error::CapExceeded {
            what: "trajectory enumeration",
            n: free,
            cap,
        });
    }
    let mut out = Vec::with_capacity(1 << free);
    let mut steps = vec![(state.clone(), action)];
    extend(instance, params, first, &mut steps, 1.0, &mut out);
    Ok(out)
}

fn extend(
    instance: &MdpInstance,
    params: &PolicyParams,
    s: State,
    steps: &mut Vec<(State, Action)>,
    prob: f64,
    out: &mut Vec<Trajectory>,
) {
    if s.is_terminal() {
        out.push(Trajectory {
            steps: steps.clone(),
            terminal: s,
            probability: prob,
        });
        return;
    }
    let (p0, p1) = softmax_probs(s.stage(), params);
    for (a, p) in [(Action::False, p0), (Action::True, p1)] {
        let next = instance.transition(&s, a).expect("non-terminal");
        steps.push((s.clone(), a));
        extend(instance, params, next, steps, prob * p, out);
        steps.pop();
    }
}

/// Draws one trajectory from `s_1`, flipping a coin with
/// `Pr[True] = softmax_prob(h)` at each stage.
pub fn sample_trajectory(
    instance: &MdpInstance,
    params: &PolicyParams,
    seed: u64,
) -> Result<Trajectory> {
    check_params(instance, params)?;
    let mut rng = rng::seeded(seed);
    Ok(sample_trajectory_with(instance, params, &mut rng))
}

pub fn sample_trajectory_with<R: Rng + ?Sized>(
    instance: &MdpInstance,
    params: &PolicyParams,
    rng: &mut R,
) -> Trajectory {
    let mut s = instance.initial_state();
    let mut steps = Vec::with_capacity(instance.n());
    let mut probability = 1.0;
    while !s.is_terminal() {
        let (p0, p1) = softmax_probs(s.stage(), params);
        let a = if rng.gen::<f64>() < p1 {
            Action::True
        } else {
            Action::False
        };
        probability *= if a.as_bool() { p1 } else { p0 };
        let next = instance.transition(&s, a).expect("non-terminal");
        steps.push((s, a));
        s = next;
    }
    Trajectory {
        steps,
        terminal: s,
        probability,
    }
}

/// `q`/`v` tables of the greedy policy over all `2^(n+1) − 1` states.
/// Rewards arrive on entering a leaf, so `v` is zero at leaves.
pub fn policy_value_greedy(
    instance: &MdpInstance,
    params: &PolicyParams,
    cap: usize,
) -> Result<PolicyValue<Rational64>> {
    all_states_value(
        instance,
        cap,
        |s, a| eval_q_greedy(instance, params, s, a),
        |s| eval_v_greedy(instance, params, s),
    )
}

/// `q`/`v` tables of the softmax policy over all states.
pub fn policy_value_softmax(
    instance: &MdpInstance,
    params: &PolicyParams,
    cap: usize,
) -> Result<PolicyValue<f64>> {
    all_states_value(
        instance,
        cap,
        |s, a| eval_q_softmax(instance, params, s, a),
        |s| eval_v_softmax(instance, params, s),
    )
}

fn all_states_value<T>(
    instance: &MdpInstance,
    cap: usize,
    q: impl Fn(&State, Action) -> Result<T>,
    v: impl Fn(&State) -> Result<T>,
) -> Result<PolicyValue<T>> {
    if instance.n() > cap {
        return Err(Error::CapExceeded {
            what: "full policy table",
            n: instance.n(),
            cap,
        });
    }
    let mut out = PolicyValue {
        q: BTreeMap::new(),
        v: BTreeMap::new(),
    };
    for h in 1..=instance.horizon() {
        for s in instance.states_at_stage(h) {
            if !s.is_terminal() {
                for a in Action::ALL {
                    out.q.insert((s.clone(), a), q(&s, a)?);
                }
            }
            out.v.insert(s.clone(), v(&s)?);
        }
    }
    Ok(out)
}

/// Sweeps all `2^n` sign patterns `θ' ∈ {−1, +1}^n` and returns the one
/// with the largest `v^π(s_1)` (ties toward the larger bit pattern) and that
/// value. Any `θ'` induces the same greedy behavior as its sign pattern,
/// with `θ'_h ≤ 0` read as `−1`.
pub fn best_greedy(instance: &MdpInstance, cap: usize) -> Result<(PolicyParams, Rational64)> {
    let n = instance.n();
    if n > cap || n > 63 {
        return Err(Error::CapExceeded {
            what: "greedy sign-pattern sweep",
            n,
            cap: cap.min(63),
        });
    }
    let s1 = instance.initial_state();
    let (value, bits) = (0..1u64 << n)
        .into_par_iter()
        .map(|bits| {
            let params = PolicyParams::sign_pattern(bits, n, 1.0);
            let v = eval_v_greedy(instance, &params, &s1).expect("valid sign pattern");
            (v, bits)
        })
        .max()
        .expect("at least one pattern");
    Ok((PolicyParams::sign_pattern(bits, n, 1.0), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Formula;
    use crate::mdp::build_mdp;

    fn example() -> MdpInstance {
        build_mdp(Formula::from_dimacs_clauses(3, &[&[1, -2, 3], &[-1, 2, -3]]).unwrap())
    }

    fn s(v: &[i8]) -> State {
        State::new(v.to_vec()).unwrap()
    }

    #[test]
    fn greedy_q_examples() {
        let m = example();
        let theta = PolicyParams::uniform(3, 1.0);
        assert_eq!(
            eval_q_greedy(&m, &theta, &s(&[1, -1, -1]), Action::False).unwrap(),
            Rational64::new(1, 2)
        );
        assert_eq!(
            eval_q_greedy(&m, &theta, &m.initial_state(), Action::True).unwrap(),
            Rational64::from_integer(1)
        );
        assert!(eval_q_greedy(&m, &theta, &s(&[1, 1, 1]), Action::True).is_err());
    }

    #[test]
    fn uniform_softmax_q_is_seven_eighths() {
        // True subtree leaves: (1,0,0)=1, (1,0,1)=1/2, (1,1,0)=1, (1,1,1)=1
        let m = example();
        let theta = PolicyParams::uniform(3, 0.0);
        let q = eval_q_softmax(&m, &theta, &m.initial_state(), Action::True).unwrap();
        assert!((q - 0.875).abs() < 1e-15);
        let q2 =
            eval_q_softmax_exhaustive(&m, &theta, &m.initial_state(), Action::True, 20).unwrap();
        assert!((q2 - 0.875).abs() < 1e-15);
    }

    #[test]
    fn saturated_softmax_matches_greedy() {
        let m = example();
        let q = eval_q_softmax(
            &m,
            &PolicyParams::uniform(3, 20.0),
            &s(&[1, -1, -1]),
            Action::False,
        )
        .unwrap();
        assert!((q - 0.5).abs() < 1e-6);
    }

    #[test]
    fn trajectory_counts_and_mass() {
        let m = example();
        let theta = PolicyParams::new(vec![0.3, -1.2, 0.8]).unwrap();
        let ts = enumerate_trajectories(&m, &theta, &m.initial_state(), Action::True, 20).unwrap();
        assert_eq!(ts.len(), 4);
        assert!((ts.iter().map(|t| t.probability).sum::<f64>() - 1.0).abs() < 1e-12);
        let ts = enumerate_trajectories(&m, &theta, &s(&[1, 0, -1]), Action::True, 20).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].terminal, s(&[1, 0, 1]));
        assert!(enumerate_trajectories(&m, &theta, &m.initial_state(), Action::True, 1).is_err());

        let uniform = PolicyParams::uniform(3, 0.0);
        let ts =
            enumerate_trajectories(&m, &uniform, &m.initial_state(), Action::False, 20).unwrap();
        assert!(ts.iter().all(|t| t.probability == 0.25));
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = example();
        let theta = PolicyParams::new(vec![0.1, -0.4, 0.2]).unwrap();
        assert_eq!(
            sample_trajectory(&m, &theta, 7).unwrap(),
            sample_trajectory(&m, &theta, 7).unwrap()
        );
        let t = sample_trajectory(&m, &PolicyParams::uniform(3, 20.0), 1).unwrap();
        assert_eq!(t.terminal, s(&[1, 1, 1]));
        assert_eq!(t.steps.len(), 3);
    }

    #[test]
    fn best_greedy_values() {
        let (p, v) = best_greedy(&example(), 24).unwrap();
        assert_eq!(v, Rational64::from_integer(1));
        assert_eq!(p.theta_prime(), &[1.0, 1.0, 1.0]);
        let contradiction = build_mdp(Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap());
        assert_eq!(
            best_greedy(&contradiction, 24).unwrap().1,
            Rational64::new(1, 2)
        );
    }

    #[test]
    fn policy_tables() {
        let m = example();
        let theta = PolicyParams::uniform(3, 1.0);
        let pv = policy_value_greedy(&m, &theta, 10).unwrap();
        assert_eq!(pv.v.len(), 15);
        assert_eq!(pv.q.len(), 14);
        for ((st, a), q) in &pv.q {
            if *a == greedy_action(st.stage(), &theta) {
                assert_eq!(pv.v[st], *q);
            }
        }
        let sm = policy_value_softmax(&m, &PolicyParams::uniform(3, 0.0), 10).unwrap();
        for (st, v) in &sm.v {
            if !st.is_terminal() {
                let avg =
                    0.5 * (sm.q[&(st.clone(), Action::False)] + sm.q[&(st.clone(), Action::True)]);
                assert!((avg - v).abs() < 1e-15);
            }
        }
    }
}
