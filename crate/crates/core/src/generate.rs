//! Random instance generators for the check suites.

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::cnf::{Assignment, Clause, Formula, Literal};

/// A random formula over `n` variables in which every variable occurs in at
/// most `b` clause instances. Clauses have up to 3 literals over distinct
/// variables; the formula has between 1 and `max_clauses` clauses.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_clauses: usize,
    b: usize,
) -> Formula {
    assert!(n >= 1 && b >= 1 && max_clauses >= 1);
    let target = rng.gen_range(1..=max_clauses);
    let mut load = vec![0usize; n];
    let mut clauses = Vec::with_capacity(target);
    while clauses.len() < target {
        let mut open: Vec<usize> = (0..n).filter(|&v| load[v] < b).collect();
        if open.is_empty() {
            break;
        }
        open.shuffle(rng);
        let width = rng.gen_range(1..=3).min(open.len());
        let lits = open[..width]
            .iter()
            .map(|&v| {
                load[v] += 1;
                Literal::new(v as u32 + 1, rng.gen())
            })
            .collect();
        clauses.push(Clause::new(lits).expect("distinct variables"));
    }
    Formula::new(n as u32, clauses).expect("non-empty formula")
}

/// A 3-literal clause over distinct variables that `planted` satisfies.
fn satisfied_clause<R: Rng + ?Sized>(rng: &mut R, planted: &Assignment) -> Clause {
    let n = planted.len();
    let width = n.min(3);
    let vars: Vec<u32> = rand::seq::index::sample(rng, n, width)
        .into_iter()
        .map(|v| v as u32 + 1)
        .collect();
    loop {
        let lits: Vec<Literal> = vars.iter().map(|&v| Literal::new(v, rng.gen())).collect();
        if lits.iter().any(|l| l.eval(planted.get(l.var()))) {
            return Clause::new(lits).expect("distinct variables");
        }
    }
}

fn any_clause<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Clause {
    let vars = rand::seq::index::sample(rng, n, n.min(3));
    Clause::new(
        vars.into_iter()
            .map(|v| Literal::new(v as u32 + 1, rng.gen()))
            .collect(),
    )
    .expect("distinct variables")
}

/// A formula with `clauses` instances whose planted assignment satisfies at
/// least a `zeta` fraction of them: `⌈zeta·clauses⌉` clauses are drawn among
/// those the planted assignment satisfies, the rest are unconstrained.
pub fn planted_formula<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    clauses: usize,
    zeta: Rational64,
) -> (Formula, Assignment) {
    assert!(n >= 1 && clauses >= 1);
    let planted = Assignment::new((0..n).map(|_| rng.gen()).collect());
    let forced = (zeta * Rational64::from_integer(clauses as i64))
        .ceil()
        .to_integer()
        .clamp(0, clauses as i64) as usize;
    let mut out: Vec<Clause> = (0..forced)
        .map(|_| satisfied_clause(rng, &planted))
        .collect();
    out.extend((forced..clauses).map(|_| any_clause(rng, n)));
    out.shuffle(rng);
    (
        Formula::new(n as u32, out).expect("non-empty formula"),
        planted,
    )
}

/// Uniform `θ' ∈ [−radius, radius]^n`.
pub fn random_params<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    radius: f64,
) -> crate::features::PolicyParams {
    crate::features::PolicyParams::new((0..n).map(|_| rng.gen_range(-radius..=radius)).collect())
        .expect("finite entries")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn random_formulas_respect_occurrence_bound() {
        let mut r = rng::seeded(3);
        for n in 1..=8 {
            for _ in 0..50 {
                let f = random_formula(&mut r, n, 3 * n, 3);
                assert!(f.occurrence_bound() <= 3);
                assert!(f.clause_count() >= 1);
            }
        }
    }

    #[test]
    fn planted_assignment_meets_zeta() {
        let mut r = rng::seeded(5);
        for _ in 0..100 {
            let zeta = Rational64::new(9, 10);
            let (f, a) = planted_formula(&mut r, 10, 40, zeta);
            assert!(f.satisfied_fraction(&a) >= zeta);
        }
        let (f, a) = planted_formula(&mut r, 2, 5, Rational64::from_integer(1));
        assert_eq!(f.satisfied_fraction(&a), Rational64::from_integer(1));
    }
}
