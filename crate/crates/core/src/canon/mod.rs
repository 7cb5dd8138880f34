//! Atoms of finite local languages and the canonical Harsanyi model.
//!
//! An atom of depth one is a pair of a truth assignment to the letters
//! (an [`Atom0`]) and a [`ProbabilitySpec`] recording, for every event over
//! assignments, the tightest grid bracket containing its probability.

mod decide;
mod extension;
mod model;

pub use decide::{cardinality, sat, valid, Logic, SatWitness};
pub use extension::{unique_extension_brackets, verify_unique_extension, ExtensionFailure, ExtensionReport};
pub use model::{canonical_model, build_canonical_harsanyi, representative_measure, Atom1, AtomEntry, CanonicalModel};

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::exactnum::{lp_feasible, rat, Constraint, LinearSystem, LpError, Rational, Relation};
use crate::formula::AgentId;
use crate::models::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("language with {letters} letters at accuracy {q} exceeds the enumeration budget")]
    BudgetExceeded { q: u64, letters: usize },
    #[error("formula mentions agent {0}; only single-agent formulas are decided")]
    MultiAgent(AgentId),
    #[error("knowledge operators are not part of the probability language")]
    Knowledge,
    #[error("the depth-one procedure cannot decide a formula of depth {0}")]
    DepthTooLarge(usize),
    #[error("probability specification is inconsistent")]
    InconsistentSpec,
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Largest accuracy enumerated for a given number of letters.
pub fn budget(letters: usize) -> Option<u64> {
    match letters {
        0 => Some(u64::MAX),
        1 => Some(8),
        2 => Some(2),
        _ => None,
    }
}

pub fn check_budget(q: u64, letters: usize) -> Result<(), CanonError> {
    match budget(letters) {
        Some(limit) if q >= 1 && q <= limit => Ok(()),
        _ => Err(CanonError::BudgetExceeded { q, letters }),
    }
}

/// A truth assignment: bit `i` is the value of the `i`-th letter of the language.
pub type Atom0 = usize;

/// Tight grid bounds on a probability: a grid point, or the open interval
/// between two adjacent grid points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bracket {
    Point(Rational),
    Open(Rational, Rational),
}

impl Bracket {
    /// All `2q + 1` brackets of the grid `1/q`, in increasing order.
    pub fn all(q: u64) -> Vec<Bracket> {
        let q = q as i64;
        let mut out = Vec::with_capacity(2 * q as usize + 1);
        for k in 0..=q {
            out.push(Bracket::Point(rat(k, q)));
            if k < q {
                out.push(Bracket::Open(rat(k, q), rat(k + 1, q)));
            }
        }
        out
    }

    /// The bracket of the complementary event.
    pub fn complement(&self) -> Bracket {
        let one = rat(1, 1);
        match self {
            Bracket::Point(a) => Bracket::Point(&one - a),
            Bracket::Open(a, b) => Bracket::Open(&one - b, &one - a),
        }
    }

    /// The grid bracket of accuracy `q` that contains `x ∈ [0, 1]`.
    pub fn containing(x: &Rational, q: u64) -> Bracket {
        let scaled = x * Rational::from_integer(q.into());
        let k = scaled.floor();
        let lo = &k / Rational::from_integer(q.into());
        if scaled == k {
            Bracket::Point(lo)
        } else {
            let hi = (&k + Rational::from_integer(1.into())) / Rational::from_integer(q.into());
            Bracket::Open(lo, hi)
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            Bracket::Point(a) => x == a,
            Bracket::Open(a, b) => a < x && x < b,
        }
    }

    /// Lower end (α).
    pub fn alpha(&self) -> &Rational {
        match self {
            Bracket::Point(a) | Bracket::Open(a, _) => a,
        }
    }

    /// Upper end (β); equals α for points.
    pub fn beta(&self) -> &Rational {
        match self {
            Bracket::Point(a) | Bracket::Open(_, a) => a,
        }
    }

    /// Whether `μ(E) ≥ r` follows, for a grid index `r` of the same accuracy.
    pub fn entails_at_least(&self, r: &Rational) -> bool {
        match self {
            Bracket::Point(a) => a >= r,
            Bracket::Open(a, _) => r <= a,
        }
    }

    /// Constraints placing `Σ_{i∈support} x_i` inside this bracket.
    pub fn constraints(&self, n: usize, support: &[usize]) -> Vec<Constraint> {
        let s = || support.iter().copied();
        match self {
            Bracket::Point(a) => vec![Constraint::indicator(n, s(), Relation::Eq, a.clone())],
            Bracket::Open(a, b) => vec![
                Constraint::indicator(n, s(), Relation::Gt, a.clone()),
                Constraint::indicator(n, s(), Relation::Lt, b.clone()),
            ],
        }
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &Rational| {
            if r.denom() == &1.into() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        };
        match self {
            Bracket::Point(a) => write!(f, "{}", show(a)),
            Bracket::Open(a, b) => write!(f, "({}, {})", show(a), show(b)),
        }
    }
}

/// Events over the assignments of a `k`-letter language, as bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventSpace {
    pub letters: usize,
}

impl EventSpace {
    pub fn atoms(&self) -> usize {
        1 << self.letters
    }

    pub fn events(&self) -> usize {
        1 << self.atoms()
    }

    pub fn full(&self) -> usize {
        self.events() - 1
    }

    pub fn members(&self, event: usize) -> Vec<usize> {
        (0..self.atoms()).filter(|a| event >> a & 1 == 1).collect()
    }

    /// One event per complementary pair of nontrivial events: the one
    /// containing the all-true assignment. Sorted by size, then mask.
    pub fn representatives(&self) -> Vec<usize> {
        let top = self.atoms() - 1;
        let mut reps: Vec<usize> = (1..self.full()).filter(|e| e >> top & 1 == 1).collect();
        reps.sort_by_key(|&e| (e.count_ones(), e));
        reps
    }

    /// `[p_i]`: assignments making the `i`-th letter true.
    pub fn letter_event(&self, i: usize) -> usize {
        (0..self.atoms()).filter(|a| a >> i & 1 == 1).fold(0, |acc, a| acc | 1 << a)
    }
}

/// The probability part of an atom: a bracket for every event over assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProbabilitySpec {
    q: u64,
    letters: usize,
    brackets: Vec<Bracket>,
}

impl ProbabilitySpec {
    /// Completes brackets given for the representatives of
    /// [`EventSpace::representatives`] (in that order).
    pub fn from_representatives(q: u64, letters: usize, reps: &[Bracket]) -> Self {
        let space = EventSpace { letters };
        let mut brackets = vec![Bracket::Point(Rational::zero()); space.events()];
        brackets[space.full()] = Bracket::Point(rat(1, 1));
        for (e, b) in space.representatives().into_iter().zip(reps) {
            brackets[space.full() & !e] = b.complement();
            brackets[e] = b.clone();
        }
        ProbabilitySpec { q, letters, brackets }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn num_letters(&self) -> usize {
        self.letters
    }

    pub fn event_space(&self) -> EventSpace {
        EventSpace { letters: self.letters }
    }

    pub fn bracket(&self, event: usize) -> &Bracket {
        &self.brackets[event]
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    /// The measure constraints over assignments expressed by this spec.
    pub fn system(&self) -> LinearSystem {
        let space = self.event_space();
        let n = space.atoms();
        let mut sys = LinearSystem::probability_simplex(n);
        for e in space.representatives() {
            for c in self.brackets[e].constraints(n, &space.members(e)) {
                sys.push(c);
            }
        }
        sys
    }

    /// True iff some measure realizes every bracket.
    pub fn is_consistent(&self) -> bool {
        lp_feasible(&self.system()).map(|r| r.feasible).unwrap_or(false)
    }

    /// The spec realized by a given measure over assignments.
    pub fn of_measure(q: u64, letters: usize, mu: &[Rational]) -> Self {
        let space = EventSpace { letters };
        let reps: Vec<Bracket> = space
            .representatives()
            .into_iter()
            .map(|e| {
                let mass: Rational = space.members(e).iter().map(|&a| &mu[a]).sum();
                Bracket::containing(&mass, q)
            })
            .collect();
        ProbabilitySpec::from_representatives(q, letters, &reps)
    }
}

/// All consistent probability specs for accuracy `q` over `letters` letters,
/// found by depth-first search with feasibility pruning.
pub fn enumerate_prob_parts(q: u64, letters: usize) -> Result<Vec<ProbabilitySpec>, CanonError> {
    check_budget(q, letters)?;
    let space = EventSpace { letters };
    let reps = space.representatives();
    let n = space.atoms();
    let choices = Bracket::all(q);
    let mut out = Vec::new();
    let mut chosen: Vec<Bracket> = Vec::with_capacity(reps.len());

    fn dfs(
        depth: usize,
        sys: &LinearSystem,
        reps: &[usize],
        space: EventSpace,
        choices: &[Bracket],
        chosen: &mut Vec<Bracket>,
        out: &mut Vec<ProbabilitySpec>,
        q: u64,
    ) -> Result<(), CanonError> {
        if depth == reps.len() {
            out.push(ProbabilitySpec::from_representatives(q, space.letters, chosen));
            return Ok(());
        }
        let members = space.members(reps[depth]);
        for b in choices {
            let mut next = sys.clone();
            for c in b.constraints(space.atoms(), &members) {
                next.push(c);
            }
            if lp_feasible(&next)?.feasible {
                chosen.push(b.clone());
                dfs(depth + 1, &next, reps, space, choices, chosen, out, q)?;
                chosen.pop();
            }
        }
        Ok(())
    }

    dfs(0, &LinearSystem::probability_simplex(n), &reps, space, &choices, &mut chosen, &mut out, q)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn one_letter_counts() {
        for q in 1..=5 {
            assert_eq!(enumerate_prob_parts(q, 1).unwrap().len() as u64, 2 * q + 1);
        }
        assert_eq!(enumerate_prob_parts(3, 0).unwrap().len(), 1);
    }

    #[test]
    fn one_letter_q2_brackets_in_order() {
        let specs = enumerate_prob_parts(2, 1).unwrap();
        let on_p: Vec<String> = specs.iter().map(|s| s.bracket(0b10).to_string()).collect();
        assert_eq!(on_p, ["0", "(0, 1/2)", "1/2", "(1/2, 1)", "1"]);
        for s in &specs {
            assert_eq!(s.bracket(0), &Bracket::Point(rat(0, 1)));
            assert_eq!(s.bracket(0b11), &Bracket::Point(rat(1, 1)));
            assert_eq!(s.bracket(0b01), &s.bracket(0b10).complement());
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(enumerate_prob_parts(9, 1), Err(CanonError::BudgetExceeded { .. })));
        assert!(matches!(enumerate_prob_parts(3, 2), Err(CanonError::BudgetExceeded { .. })));
        assert!(matches!(enumerate_prob_parts(1, 3), Err(CanonError::BudgetExceeded { .. })));
    }

    /// Every measure on a fine grid lands in an enumerated spec.
    fn sampled_specs(q: u64, letters: usize, resolution: i64) -> BTreeSet<ProbabilitySpec> {
        let n = 1usize << letters;
        let mut out = BTreeSet::new();
        let mut parts = vec![0i64; n];
        fn rec(i: usize, left: i64, parts: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
            if i + 1 == parts.len() {
                parts[i] = left;
                f(parts);
                return;
            }
            for v in 0..=left {
                parts[i] = v;
                rec(i + 1, left - v, parts, f);
            }
        }
        rec(0, resolution, &mut parts, &mut |p| {
            let mu: Vec<Rational> = p.iter().map(|&v| rat(v, resolution)).collect();
            out.insert(ProbabilitySpec::of_measure(q, letters, &mu));
        });
        out
    }

    #[test]
    fn two_letters_q1_matches_grid_sampling() {
        let specs: BTreeSet<_> = enumerate_prob_parts(1, 2).unwrap().into_iter().collect();
        let sampled = sampled_specs(1, 2, 4);
        assert_eq!(specs, sampled);
        assert!(specs.iter().all(ProbabilitySpec::is_consistent));
    }

    #[test]
    fn two_letters_q2_contains_grid_samples() {
        let specs: BTreeSet<_> = enumerate_prob_parts(2, 2).unwrap().into_iter().collect();
        let sampled = sampled_specs(2, 2, 8);
        assert!(sampled.is_subset(&specs));
        assert!(specs.iter().all(ProbabilitySpec::is_consistent));
    }

    #[test]
    fn containing_bracket() {
        assert_eq!(Bracket::containing(&rat(3, 4), 2), Bracket::Open(rat(1, 2), rat(1, 1)));
        assert_eq!(Bracket::containing(&rat(1, 2), 2), Bracket::Point(rat(1, 2)));
        assert_eq!(Bracket::containing(&rat(1, 1), 3), Bracket::Point(rat(1, 1)));
        assert!(Bracket::Open(rat(0, 1), rat(1, 2)).complement() == Bracket::Open(rat(1, 2), rat(1, 1)));
    }
}
