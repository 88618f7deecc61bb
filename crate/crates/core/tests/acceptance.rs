//! Acceptance criteria 1-8, run in sequence by a plain `main` so every
//! PASS/FAIL line is printed and the timing criterion runs on a quiet
//! machine. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use linrl_core::cnf::Formula;
use linrl_core::features::{
    greedy_weight, psp_feature, realizability_feature, undecided_multiset, PolicyParams,
};
use linrl_core::mdp::{build_mdp, Action, State};
use linrl_core::policies::eval_q_greedy;
use linrl_core::verify::{
    check_construction_scaling, check_limit_coupling, check_mcdiarmid, check_realizability_greedy,
    check_realizability_softmax, check_reduction_roundtrip, check_telescoping, GreedySuiteConfig,
    LimitSuiteConfig, McDiarmidSuiteConfig, RoundtripConfig, ScalingConfig, SoftmaxSuiteConfig,
    SuiteResult,
};
use linrl_core::Rational64;

fn report(id: u32, title: &str, ok: bool, elapsed: Duration, detail: &str) -> bool {
    println!(
        "criterion {id} [{}] {title}: {} ({elapsed:.2?}) {detail}",
        if ok { "PASS" } else { "FAIL" },
        if ok { "ok" } else { "violated" }
    );
    ok
}

fn suite_detail(results: &[&SuiteResult]) -> String {
    results
        .iter()
        .map(|r| {
            let first = r
                .failures
                .first()
                .map(|f| format!(" first: {} {}", f.case, f.detail))
                .unwrap_or_default();
            format!(
                "{} cases={} failures={}{first}",
                r.suite,
                r.cases,
                r.failures.len()
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn example() -> Formula {
    Formula::from_dimacs_clauses(3, &[&[1, -2, 3], &[-1, 2, -3]]).unwrap()
}

fn criterion_1_worked_example() -> bool {
    let start = Instant::now();
    let m = build_mdp(example());
    let mut ok =
        m.d() == 27 && m.d_prime() == 3 && m.horizon() == 4 && m.implied_state_count() == Some(15);

    let half = Rational64::new(1, 2);
    for bits in 0..8u64 {
        let leaf = State::from_prefix(&[bits & 1 != 0, bits & 2 != 0, bits & 4 != 0], 3);
        let expected = match leaf.values() {
            [0, 1, 0] | [1, 0, 1] => half,
            _ => Rational64::from_integer(1),
        };
        ok &= m.reward(&leaf) == expected;
    }
    ok &= psp_feature(1, Action::True, 3).unwrap().vector == vec![1, 0, 0];

    let params = PolicyParams::new(vec![1.0, 1.0, 1.0]).unwrap();
    let s = State::new(vec![1, -1, -1]).unwrap();
    let next = m.transition(&s, Action::False).unwrap();
    let phi = realizability_feature(&m, &s, Action::False).unwrap();
    let undecided = undecided_multiset(m.formula(), &next);
    ok &= phi.satisfied == 1;
    ok &= undecided.len() == 1 && undecided[0].to_dimacs() == vec![-3];
    let q = eval_q_greedy(&m, &params, &s, Action::False).unwrap();
    let dot = phi.dot_greedy(&greedy_weight(&m, &params, 2).unwrap());
    ok &= q == half && dot == half;

    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    report(
        1,
        "worked example",
        ok,
        elapsed,
        &format!("q = {q}, dot = {dot}"),
    )
}

fn criterion_2_greedy_realizability() -> bool {
    let cfg = GreedySuiteConfig {
        n_min: 1,
        n_max: 6,
        formulas_per_n: 20,
        b: 3,
        seed: 1,
        ..Default::default()
    };
    let r = check_realizability_greedy(&cfg).unwrap();
    let ok = r.passed() && r.wall_time < Duration::from_secs(300);
    report(
        2,
        "greedy realizability, exact",
        ok,
        r.wall_time,
        &suite_detail(&[&r]),
    )
}

fn criterion_3_softmax_realizability() -> bool {
    let cfg = SoftmaxSuiteConfig {
        n_min: 1,
        n_max: 5,
        formulas_per_n: 10,
        thetas_per_formula: 50,
        tol: 1e-9,
        oracle_tol: 1e-12,
        ..Default::default()
    };
    let r = check_realizability_softmax(&cfg).unwrap();
    let ok = r.passed() && r.wall_time < Duration::from_secs(600);
    report(
        3,
        "softmax realizability",
        ok,
        r.wall_time,
        &suite_detail(&[&r]),
    )
}

fn criterion_4_telescoping() -> bool {
    let cfg = GreedySuiteConfig {
        n_min: 1,
        n_max: 6,
        formulas_per_n: 20,
        b: 3,
        seed: 1,
        ..Default::default()
    };
    let r = check_telescoping(&cfg).unwrap();
    report(
        4,
        "telescoping identity",
        r.passed(),
        r.wall_time,
        &suite_detail(&[&r]),
    )
}

fn criterion_5_reduction_roundtrip() -> bool {
    let cfg = RoundtripConfig {
        count: 100,
        n: 10,
        delta: Rational64::new(1, 10),
        epsilon: Rational64::new(1, 20),
        ..Default::default()
    };
    let r = check_reduction_roundtrip(&cfg).unwrap();
    let ok = r.passed() && r.wall_time < Duration::from_secs(120);
    report(
        5,
        "reduction completeness and soundness",
        ok,
        r.wall_time,
        &suite_detail(&[&r]),
    )
}

fn criterion_6_mcdiarmid() -> bool {
    let cfg = McDiarmidSuiteConfig {
        n: 12,
        b: 3,
        trials: 100_000,
        p0: 0.125,
        ..Default::default()
    };
    let r = check_mcdiarmid(&cfg).unwrap();
    let detail = format!("{} t={}", suite_detail(&[&r]), r.params["t_calibrated"]);
    report(6, "McDiarmid consistency", r.passed(), r.wall_time, &detail)
}

fn criterion_7_construction_scaling() -> bool {
    let cfg = ScalingConfig::default();
    let r = check_construction_scaling(&cfg).unwrap();
    let slopes: Vec<String> = r.params["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| {
            format!(
                "{}={:.2}",
                i["item"].as_str().unwrap(),
                i["slope"].as_f64().unwrap()
            )
        })
        .collect();
    let detail = format!("{} slopes: {}", suite_detail(&[&r]), slopes.join(" "));
    report(
        7,
        "polynomial construction scaling",
        r.passed(),
        r.wall_time,
        &detail,
    )
}

fn criterion_8_limit_coupling() -> bool {
    let cfg = LimitSuiteConfig {
        saturation: 20.0,
        tol: 1e-6,
        ..Default::default()
    };
    let r = check_limit_coupling(&cfg).unwrap();
    report(
        8,
        "limit coupling",
        r.passed(),
        r.wall_time,
        &suite_detail(&[&r]),
    )
}

fn main() -> ExitCode {
    let criteria: [fn() -> bool; 8] = [
        criterion_1_worked_example,
        criterion_2_greedy_realizability,
        criterion_3_softmax_realizability,
        criterion_4_telescoping,
        criterion_5_reduction_roundtrip,
        criterion_6_mcdiarmid,
        criterion_7_construction_scaling,
        criterion_8_limit_coupling,
    ];
    let passed = criteria.iter().filter(|run| run()).count();
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
