//! 3-CNF formulas: literals, canonical clauses, DIMACS input, evaluation
//! under partial assignments, and the ordered universe of valid clauses
//! whose positions index the realizability feature coordinates.

use std::fmt;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `n` for exhaustive search over all `2^n` assignments.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// A possibly negated variable. Variables are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        assert!(var >= 1, "variables are numbered from 1");
        Self { var, negated }
    }

    pub fn pos(var: u32) -> Self {
        Self::new(var, false)
    }

    pub fn neg(var: u32) -> Self {
        Self::new(var, true)
    }

    /// Signed DIMACS form; `None` for 0.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 || lit.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Self::new(lit.unsigned_abs() as u32, lit < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    /// `2·(var−1) + negated`; the ordering key for clauses and the universe.
    pub fn key(self) -> u32 {
        2 * (self.var - 1) + self.negated as u32
    }

    pub fn from_key(key: u32) -> Self {
        Self::new(key / 2 + 1, key % 2 == 1)
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }

    pub fn complement(self) -> Self {
        Self::new(self.var, !self.negated)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// A disjunction of 1–3 literals in canonical (key-sorted) order with no
/// repeated variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Canonicalizes `literals`: sorts them, drops repeats, and rejects
    /// complementary pairs and sizes outside 1..=3.
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort_unstable();
        literals.dedup();
        if let Some(w) = literals.windows(2).find(|w| w[0].var == w[1].var) {
            return Err(Error::InvalidClause(format!("tautology on x{}", w[0].var)));
        }
        match literals.len() {
            1..=3 => Ok(Self { literals }),
            0 => Err(Error::InvalidClause("empty clause".into())),
            len => Err(Error::InvalidClause(format!("{len} literals"))),
        }
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<Self> {
        let lits = lits
            .iter()
            .map(|&l| {
                Literal::from_dimacs(l)
                    .ok_or_else(|| Error::InvalidClause(format!("bad literal {l}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lits)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var).max().unwrap_or(0)
    }

    pub fn min_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var).min().unwrap_or(0)
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.literals.iter().any(|l| l.var == var)
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.literals.iter().map(|l| l.to_dimacs()).collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Anything that assigns some variables a truth value.
pub trait Valuation {
    fn value_of(&self, var: u32) -> Option<bool>;
}

impl Valuation for [Option<bool>] {
    fn value_of(&self, var: u32) -> Option<bool> {
        self.get(var as usize - 1).copied().flatten()
    }
}

impl Valuation for Vec<Option<bool>> {
    fn value_of(&self, var: u32) -> Option<bool> {
        self.as_slice().value_of(var)
    }
}

/// Result of evaluating a clause under a partial valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseStatus {
    Satisfied,
    Falsified,
    /// The clause restricted to its still-unassigned literals.
    Undecided(Clause),
}

pub fn eval_clause<V: Valuation + ?Sized>(clause: &Clause, valuation: &V) -> ClauseStatus {
    let mut open = Vec::with_capacity(clause.len());
    for &lit in clause.literals() {
        match valuation.value_of(lit.var) {
            Some(v) if lit.eval(v) => return ClauseStatus::Satisfied,
            Some(_) => {}
            None => open.push(lit),
        }
    }
    if open.is_empty() {
        ClauseStatus::Falsified
    } else {
        // a non-empty subset of a canonical clause is canonical
        ClauseStatus::Undecided(Clause { literals: open })
    }
}

/// A complete 0/1 assignment to `x_1..x_n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    /// Bit `i` of `bits` gives `x_{i+1}`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self::new((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.values
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (v as u64) << i)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, var: u32) -> bool {
        self.values[var as usize - 1]
    }
}

impl Valuation for Assignment {
    fn value_of(&self, var: u32) -> Option<bool> {
        self.values.get(var as usize - 1).copied()
    }
}

impl TryFrom<Vec<u8>> for Assignment {
    type Error = String;

    fn try_from(v: Vec<u8>) -> std::result::Result<Self, String> {
        v.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(format!("assignment entries must be 0 or 1, got {other}")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

impl From<Assignment> for Vec<u8> {
    fn from(a: Assignment) -> Self {
        a.values.into_iter().map(u8::from).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, &v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v as u8)?;
        }
        write!(f, ")")
    }
}

/// A multiset of clauses over `x_1..x_n`. Duplicate clauses count as
/// separate instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClauseListJson", into = "ClauseListJson")]
pub struct Formula {
    n: u32,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(n: u32, clauses: Vec<Clause>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "formula needs at least one variable".into(),
            ));
        }
        if clauses.is_empty() {
            return Err(Error::NoClauses);
        }
        if let Some(c) = clauses.iter().find(|c| c.max_var() > n) {
            return Err(Error::VariableOutOfRange {
                line: 0,
                var: c.max_var(),
                n,
            });
        }
        Ok(Self { n, clauses })
    }

    pub fn from_dimacs_clauses(n: u32, clauses: &[&[i64]]) -> Result<Self> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, clauses)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.n as usize
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// `|C|`, counting duplicates.
    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn satisfied_count(&self, assignment: &Assignment) -> usize {
        self.clauses
            .iter()
            .filter(|c| eval_clause(c, assignment) == ClauseStatus::Satisfied)
            .count()
    }

    /// Fraction of clause instances satisfied by `assignment`.
    pub fn satisfied_fraction(&self, assignment: &Assignment) -> Rational64 {
        assert_eq!(
            assignment.len(),
            self.num_vars(),
            "assignment length must equal n"
        );
        Rational64::new(
            self.satisfied_count(assignment) as i64,
            self.clause_count() as i64,
        )
    }

    /// Largest number of clause instances any single variable occurs in.
    pub fn occurrence_bound(&self) -> usize {
        let mut counts = vec![0usize; self.num_vars()];
        for c in &self.clauses {
            for l in c.literals() {
                counts[l.var as usize - 1] += 1;
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for c in &self.clauses {
            for l in c.to_dimacs() {
                out.push_str(&l.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// JSON schema shared by formulas and clause universes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseListJson {
    pub n: u32,
    pub clauses: Vec<Vec<i64>>,
}

impl From<Formula> for ClauseListJson {
    fn from(f: Formula) -> Self {
        Self {
            n: f.n,
            clauses: f.clauses.iter().map(Clause::to_dimacs).collect(),
        }
    }
}

impl TryFrom<ClauseListJson> for Formula {
    type Error = Error;

    fn try_from(j: ClauseListJson) -> Result<Self> {
        let clauses = j
            .clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>>>()?;
        Formula::new(j.n, clauses)
    }
}

/// Parses DIMACS CNF. Clauses may span lines; `c` lines are comments and a
/// line starting with `%` ends the input.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut clause_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::Syntax {
                    line: line_no,
                    msg: "duplicate header".into(),
                });
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse::<u32>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            let (vars, count) = parsed.ok_or_else(|| Error::Syntax {
                line: line_no,
                msg: format!("malformed header {line:?}; expected \"p cnf <vars> <clauses>\""),
            })?;
            if vars == 0 {
                return Err(Error::Syntax {
                    line: line_no,
                    msg: "header declares zero variables".into(),
                });
            }
            header = Some((vars, count));
            continue;
        }
        let (n, _) = header.ok_or_else(|| Error::Syntax {
            line: line_no,
            msg: "clause before \"p cnf\" header".into(),
        })?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| Error::Syntax {
                line: line_no,
                msg: format!("expected an integer literal, found {tok:?}"),
            })?;
            if current.is_empty() {
                clause_line = line_no;
            }
            if lit == 0 {
                clauses.push(finish_clause(&current, clauses.len() + 1, clause_line, n)?);
                current.clear();
                continue;
            }
            if lit.unsigned_abs() > n as u64 {
                return Err(Error::VariableOutOfRange {
                    line: line_no,
                    var: lit.unsigned_abs().min(u32::MAX as u64) as u32,
                    n,
                });
            }
            current.push(lit);
        }
    }

    let (n, declared) = header.ok_or(Error::Syntax {
        line: 0,
        msg: "missing \"p cnf\" header".into(),
    })?;
    if !current.is_empty() {
        return Err(Error::Syntax {
            line: clause_line,
            msg: "last clause is not terminated by 0".into(),
        });
    }
    if clauses.is_empty() {
        return Err(Error::NoClauses);
    }
    if clauses.len() != declared {
        return Err(Error::Syntax {
            line: 0,
            msg: format!(
                "header declares {declared} clauses but {} were read",
                clauses.len()
            ),
        });
    }
    Formula::new(n, clauses)
}

fn finish_clause(lits: &[i64], clause: usize, line: usize, _n: u32) -> Result<Clause> {
    let mut literals: Vec<Literal> = lits
        .iter()
        .filter_map(|&l| Literal::from_dimacs(l))
        .collect();
    literals.sort_unstable();
    literals.dedup();
    if literals.is_empty() {
        return Err(Error::Syntax {
            line,
            msg: format!("clause {clause} is empty"),
        });
    }
    if let Some(w) = literals.windows(2).find(|w| w[0].var == w[1].var) {
        return Err(Error::Tautology {
            clause,
            line,
            var: w[0].var,
        });
    }
    if literals.len() > 3 {
        return Err(Error::ClauseTooLong {
            clause,
            line,
            len: literals.len(),
        });
    }
    Clause::new(literals)
}

/// Outcome of exhaustive Max-SAT search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaOutcome {
    pub satisfiable: bool,
    pub best: Assignment,
    /// `max_x |C_true(x)| / |C|`.
    pub value: Rational64,
}

/// Clause as (positive-literal mask, negative-literal mask) over assignment bits.
fn clause_masks(formula: &Formula) -> Vec<(u64, u64)> {
    formula
        .clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0u64, 0u64), |(p, n), l| {
                let bit = 1u64 << (l.var - 1);
                if l.negated {
                    (p, n | bit)
                } else {
                    (p | bit, n)
                }
            })
        })
        .collect()
}

/// Returns the best assignment (ties broken toward the larger bit pattern)
/// and its satisfied count, by sweeping all `2^n` assignments.
pub fn max_satisfied(formula: &Formula, cap: usize) -> Result<(Assignment, usize)> {
    let n = formula.num_vars();
    if n > cap || n > 63 {
        return Err(Error::CapExceeded {
            what: "exhaustive assignment search",
            n,
            cap: cap.min(63),
        });
    }
    let masks = clause_masks(formula);
    let (count, bits) = (0..1u64 << n)
        .into_par_iter()
        .map(|x| {
            let sat = masks
                .iter()
                .filter(|&&(p, q)| (x & p) | (!x & q) != 0)
                .count();
            (sat, x)
        })
        .max()
        .expect("at least one assignment");
    Ok((Assignment::from_bits(bits, n), count))
}

/// Decides whether some assignment satisfies at least a `zeta` fraction of
/// the clause instances.
pub fn is_zeta_satisfiable(formula: &Formula, zeta: Rational64, cap: usize) -> Result<ZetaOutcome> {
    if zeta < Rational64::from_integer(0) || zeta > Rational64::from_integer(1) {
        return Err(Error::InvalidParameter(format!(
            "zeta = {zeta} outside [0, 1]"
        )));
    }
    let (best, count) = max_satisfied(formula, cap)?;
    let value = Rational64::new(count as i64, formula.clause_count() as i64);
    Ok(ZetaOutcome {
        satisfiable: value >= zeta,
        best,
        value,
    })
}

/// Closed-form block sizes `[ℓ₁, ℓ₂, ℓ₃]` of the valid-clause universe.
pub fn block_sizes(n: usize) -> [usize; 3] {
    let m = 2 * n;
    let c2 = m * m.saturating_sub(1) / 2;
    let c3 = m * m.saturating_sub(1) * m.saturating_sub(2) / 6;
    [m, c2 - n, c3 + 2 * n - 2 * n * n]
}

/// The ordered list of every non-tautological clause of size 1–3 over
/// `x_1..x_n`: all unit clauses, then 2-clauses, then 3-clauses, each block
/// lexicographic in literal keys.
#[derive(Debug, Clone)]
pub struct ClauseUniverse {
    n: u32,
    entries: Vec<Clause>,
    /// `pair_start[a]`: position of the first 2-clause whose smallest key is `a`.
    pair_start: Vec<usize>,
    /// `triple_start[a·2n + b]`: position of the first 3-clause starting `a, b`.
    triple_start: Vec<usize>,
    blocks: [usize; 3],
}

fn next_key(k: u32) -> u32 {
    // keys 2v and 2v+1 share a variable, so the next admissible key after k
    // is the first key of the following variable
    (k / 2 + 1) * 2
}

impl ClauseUniverse {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn entries(&self) -> &[Clause] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn block_sizes(&self) -> [usize; 3] {
        self.blocks
    }

    pub fn index_of(&self, clause: &Clause) -> Option<usize> {
        let keys = 2 * self.n;
        if clause.max_var() > self.n {
            return None;
        }
        let k: Vec<u32> = clause.literals.iter().map(|l| l.key()).collect();
        match k[..] {
            [a] => Some(a as usize),
            [a, b] => Some(self.pair_start[a as usize] + (b - next_key(a)) as usize),
            [a, b, c] => {
                Some(self.triple_start[(a * keys + b) as usize] + (c - next_key(b)) as usize)
            }
            _ => None,
        }
    }

    pub fn get(&self, i: usize) -> Option<&Clause> {
        self.entries.get(i)
    }
}

impl Serialize for ClauseUniverse {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClauseListJson {
            n: self.n,
            clauses: self.entries.iter().map(Clause::to_dimacs).collect(),
        }
        .serialize(s)
    }
}

pub fn enumerate_universe(n: usize) -> Result<ClauseUniverse> {
    if n == 0 {
        return Err(Error::InvalidParameter("universe needs n >= 1".into()));
    }
    let n32 =
        u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("n = {n} too large")))?;
    let keys = 2 * n32;
    let lit = Literal::from_key;
    let mut entries = Vec::with_capacity(block_sizes(n).iter().sum());

    let mut pair_start = vec![0; keys as usize];
    let mut triple_start = vec![0; (keys * keys) as usize];

    for a in 0..keys {
        entries.push(Clause {
            literals: vec![lit(a)],
        });
    }
    for a in 0..keys {
        pair_start[a as usize] = entries.len();
        for b in next_key(a)..keys {
            entries.push(Clause {
                literals: vec![lit(a), lit(b)],
            });
        }
    }
    for a in 0..keys {
        for b in next_key(a)..keys {
            triple_start[(a * keys + b) as usize] = entries.len();
            for c in next_key(b)..keys {
                entries.push(Clause {
                    literals: vec![lit(a), lit(b), lit(c)],
                });
            }
        }
    }

    Ok(ClauseUniverse {
        n: n32,
        entries,
        pair_start,
        triple_start,
        blocks: block_sizes(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> Formula {
        Formula::from_dimacs_clauses(3, &[&[1, -2, 3], &[-1, 2, -3]]).unwrap()
    }

    #[test]
    fn parses_example_formula() {
        let f = parse_dimacs("p cnf 3 2\n1 -2 3 0\n-1 2 -3 0\n").unwrap();
        assert_eq!(f, example1());
        assert_eq!(f.clause_count(), 2);
        assert_eq!(f.clauses()[0].to_string(), "(x1 ∨ ¬x2 ∨ x3)");
    }

    #[test]
    fn parses_unit_formula_and_comments() {
        let f = parse_dimacs("c hello\np cnf 1 1\n1 0\n").unwrap();
        assert_eq!(f.n(), 1);
        assert_eq!(f.clause_count(), 1);
    }

    #[test]
    fn clauses_may_span_lines_and_keep_duplicates() {
        let f = parse_dimacs("p cnf 3 3\n1 2\n 3 0 1 2 3 0\n-1 0\n").unwrap();
        assert_eq!(f.clause_count(), 3);
        assert_eq!(f.clauses()[0], f.clauses()[1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n1 -1 0\n"),
            Err(Error::Tautology {
                clause: 1,
                var: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 4 2\n1 2 0\n1 2 3 4 0\n"),
            Err(Error::ClauseTooLong {
                clause: 2,
                line: 3,
                len: 4
            })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 3 0\n"),
            Err(Error::VariableOutOfRange { var: 3, n: 2, .. })
        ));
        assert!(matches!(parse_dimacs("p cnf 2 0\n"), Err(Error::NoClauses)));
        assert!(matches!(
            parse_dimacs("1 2 0\n"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 x 0\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2\n"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn repeated_literal_is_canonicalized_away() {
        let c = Clause::from_dimacs(&[3, 1, 3]).unwrap();
        assert_eq!(c.to_dimacs(), vec![1, 3]);
    }

    #[test]
    fn universe_sizes_small_n() {
        let u = enumerate_universe(3).unwrap();
        assert_eq!(u.block_sizes(), [6, 12, 8]);
        assert_eq!(u.len(), 26);
        assert_eq!(1 + u.len(), 27);

        let u1 = enumerate_universe(1).unwrap();
        assert_eq!(u1.len(), 2);
        assert_eq!(u1.entries()[0].to_dimacs(), vec![1]);
        assert_eq!(u1.entries()[1].to_dimacs(), vec![-1]);
        assert!(enumerate_universe(0).is_err());
    }

    #[test]
    fn universe_block_order() {
        let u = enumerate_universe(4).unwrap();
        let [l1, l2, _] = u.block_sizes();
        assert!(u.entries()[..l1].iter().all(|c| c.len() == 1));
        assert!(u.entries()[l1..l1 + l2].iter().all(|c| c.len() == 2));
        assert!(u.entries()[l1 + l2..].iter().all(|c| c.len() == 3));
        for block in [
            &u.entries()[..l1],
            &u.entries()[l1..l1 + l2],
            &u.entries()[l1 + l2..],
        ] {
            assert!(block.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn index_of_inverts_entries() {
        for n in 1..=7 {
            let u = enumerate_universe(n).unwrap();
            for (i, c) in u.entries().iter().enumerate() {
                assert_eq!(u.index_of(c), Some(i));
            }
        }
        let u = enumerate_universe(2).unwrap();
        assert_eq!(u.index_of(&Clause::from_dimacs(&[3]).unwrap()), None);
    }

    #[test]
    fn eval_clause_cases() {
        let prefix = vec![Some(false), Some(false), None, None, None];
        let c = Clause::from_dimacs(&[-1, -2]).unwrap();
        assert_eq!(eval_clause(&c, &prefix), ClauseStatus::Satisfied);
        let c = Clause::from_dimacs(&[1, -4, 5]).unwrap();
        assert_eq!(
            eval_clause(&c, &prefix),
            ClauseStatus::Undecided(Clause::from_dimacs(&[-4, 5]).unwrap())
        );
        let c = Clause::from_dimacs(&[1]).unwrap();
        assert_eq!(eval_clause(&c, &prefix), ClauseStatus::Falsified);
    }

    #[test]
    fn satisfied_fraction_example() {
        let f = example1();
        let a = Assignment::new(vec![false, true, false]);
        assert_eq!(f.satisfied_fraction(&a), Rational64::new(1, 2));
        let a = Assignment::new(vec![true, true, true]);
        assert_eq!(f.satisfied_fraction(&a), Rational64::from_integer(1));
    }

    #[test]
    fn occurrence_bounds() {
        assert_eq!(example1().occurrence_bound(), 2);
        let f = Formula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        assert_eq!(f.occurrence_bound(), 1);
    }

    #[test]
    fn zeta_satisfiability() {
        let out = is_zeta_satisfiable(
            &example1(),
            Rational64::from_integer(1),
            DEFAULT_BRUTE_FORCE_CAP,
        )
        .unwrap();
        assert!(out.satisfiable);
        assert_eq!(out.best, Assignment::new(vec![true, true, true]));
        assert_eq!(out.value, Rational64::from_integer(1));

        let contradiction = Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let out = is_zeta_satisfiable(&contradiction, Rational64::from_integer(1), 24).unwrap();
        assert!(!out.satisfiable);
        assert_eq!(out.value, Rational64::new(1, 2));

        let big = Formula::from_dimacs_clauses(30, &[&[30]]).unwrap();
        assert!(matches!(
            is_zeta_satisfiable(&big, Rational64::new(1, 2), 24),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn formula_json_schema() {
        let json = serde_json::to_string(&example1()).unwrap();
        assert_eq!(json, r#"{"n":3,"clauses":[[1,-2,3],[-1,2,-3]]}"#);
        let back: Formula = serde_json::from_str(&json).unwrap();
        assert_eq!(back, example1());
        assert!(serde_json::from_str::<Formula>(r#"{"n":1,"clauses":[[1,-1]]}"#).is_err());
    }

    #[test]
    fn assignment_bits_roundtrip() {
        let a = Assignment::new(vec![true, false, true]);
        assert_eq!(a.to_bits(), 0b101);
        assert_eq!(Assignment::from_bits(0b101, 3), a);
    }
}
