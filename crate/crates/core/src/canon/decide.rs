use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{canonical_model, check_budget, enumerate_prob_parts, Atom1, CanonError, CanonicalModel};
use crate::exactnum::{lp_feasible, Constraint, LinearSystem, Rational, Relation};
use crate::formula::{Formula, ProbIndex};
use crate::models::Semantics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Logic {
    /// Harsanyi type spaces, decided in the canonical model.
    SigmaH,
    /// Arbitrary type spaces, decided for depth at most one by direct
    /// linear feasibility over assignments.
    SigmaPlus,
}

/// Evidence that a formula is satisfiable.
#[derive(Debug, Clone)]
pub enum SatWitness {
    /// A state of the canonical model satisfying the formula.
    State { model: Arc<CanonicalModel>, state: usize },
    /// A world with this assignment whose type is this measure over assignments.
    Measure { letters: Vec<u32>, assignment: usize, measure: Vec<Rational> },
}

impl SatWitness {
    pub fn describe(&self) -> String {
        match self {
            SatWitness::State { model, state } => {
                let e = model.atom_entry(*state);
                let brackets: Vec<String> = e.brackets.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                let assignment: Vec<String> = e.assignment.iter().map(|(p, v)| format!("p{p}={}", u8::from(*v))).collect();
                format!("atom {} [{}] {{{}}}", state, assignment.join(", "), brackets.join(", "))
            }
            SatWitness::Measure { letters, assignment, measure } => {
                let a: Vec<String> = letters.iter().enumerate().map(|(i, p)| format!("p{p}={}", assignment >> i & 1)).collect();
                let m: Vec<String> = measure.iter().map(crate::exactnum::format_rational).collect();
                format!("[{}] measure ({})", a.join(", "), m.join(", "))
            }
        }
    }
}

fn check_language(f: &Formula) -> Result<(), CanonError> {
    if f.has_knowledge() {
        return Err(CanonError::Knowledge);
    }
    if let Some(&a) = f.agents().iter().find(|&&a| a != 1) {
        return Err(CanonError::MultiAgent(a));
    }
    Ok(())
}

/// Searches for a model of `f`.
pub fn sat(f: &Formula, logic: Logic) -> Result<Option<SatWitness>, CanonError> {
    check_language(f)?;
    let letters: Vec<u32> = f.letters().into_iter().collect();
    let q = f.accuracy();
    check_budget(q, letters.len())?;
    match logic {
        Logic::SigmaH => {
            let model = canonical_model(q, &letters)?;
            let ext = model.space().extension(f)?;
            Ok(ext.ones().next().map(|state| SatWitness::State { model, state }))
        }
        Logic::SigmaPlus => {
            let depth = f.depth();
            if depth > 1 {
                return Err(CanonError::DepthTooLarge(depth));
            }
            sat_depth_one(&f.desugar_m(), &letters)
        }
    }
}

/// `f` is valid iff `¬f` has no model.
pub fn valid(f: &Formula, logic: Logic) -> Result<bool, CanonError> {
    Ok(sat(&f.clone().not(), logic)?.is_none())
}

fn prop_value(f: &Formula, letters: &[u32], a: usize, modal: &dyn Fn(&Formula) -> bool) -> bool {
    let rec = |g: &Formula| prop_value(g, letters, a, modal);
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Letter(p) => {
            let i = letters.iter().position(|l| l == p).expect("letter of the formula");
            a >> i & 1 == 1
        }
        Formula::Neg(x) => !rec(x),
        Formula::And(x, y) => rec(x) && rec(y),
        Formula::Or(x, y) => rec(x) || rec(y),
        Formula::Implies(x, y) => !rec(x) || rec(y),
        Formula::Iff(x, y) => rec(x) == rec(y),
        Formula::L { .. } | Formula::M { .. } | Formula::K { .. } => modal(f),
    }
}

fn sat_depth_one(f: &Formula, letters: &[u32]) -> Result<Option<SatWitness>, CanonError> {
    let mut modal: BTreeSet<(ProbIndex, Formula)> = BTreeSet::new();
    f.visit(&mut |node| {
        if let Formula::L { r, body, .. } = node {
            modal.insert((r.clone(), (**body).clone()));
        }
    });
    let modal: Vec<(ProbIndex, Formula)> = modal.into_iter().collect();
    let index: BTreeMap<(ProbIndex, Formula), usize> = modal.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let n = 1usize << letters.len();
    let no_modal = |_: &Formula| -> bool { unreachable!("body is propositional") };
    let events: Vec<Vec<usize>> = modal
        .iter()
        .map(|(_, body)| (0..n).filter(|&a| prop_value(body, letters, a, &no_modal)).collect())
        .collect();

    for pattern in 0u64..(1u64 << modal.len()) {
        let truth = |g: &Formula| -> bool {
            match g {
                Formula::L { r, body, .. } => pattern >> index[&(r.clone(), (**body).clone())] & 1 == 1,
                _ => unreachable!("desugared depth-one formula"),
            }
        };
        let Some(assignment) = (0..n).find(|&a| prop_value(f, letters, a, &truth)) else {
            continue;
        };
        let mut sys = LinearSystem::probability_simplex(n);
        for (i, (r, _)) in modal.iter().enumerate() {
            let rel = if pattern >> i & 1 == 1 { Relation::Ge } else { Relation::Lt };
            sys.push(Constraint::indicator(n, events[i].iter().copied(), rel, r.value().clone()));
        }
        let rep = lp_feasible(&sys)?;
        if rep.feasible {
            return Ok(Some(SatWitness::Measure {
                letters: letters.to_vec(),
                assignment,
                measure: rep.witness.expect("feasible systems have witnesses"),
            }));
        }
    }
    Ok(None)
}

/// All depth-one atoms for accuracy `q` over `letters` letters.
pub fn enumerate_atoms1(q: u64, letters: usize) -> Result<Vec<Atom1>, CanonError> {
    let specs = enumerate_prob_parts(q, letters)?;
    Ok((0..specs.len())
        .flat_map(|spec| (0..1usize << letters).map(move |prop| Atom1 { prop, spec }))
        .collect())
}

/// Number of atoms of accuracy `q` and depth `d` over `w` letters. Depths
/// beyond one have the same count as depth one.
pub fn cardinality(q: u64, d: usize, w: usize) -> Result<u64, CanonError> {
    check_budget(q, w)?;
    if d == 0 {
        return Ok(1 << w);
    }
    Ok(enumerate_atoms1(q, w)?.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn sat_examples() {
        assert!(sat(&f("L[3/4] p1 & L[3/4] ~p1"), Logic::SigmaH).unwrap().is_none());
        let w = sat(&f("L[1/2] p1 & L[1/2] ~p1"), Logic::SigmaH).unwrap().unwrap();
        let SatWitness::State { model, state } = w else { panic!() };
        assert_eq!(model.spec_of(state).bracket(0b10), &super::super::Bracket::Point(crate::exactnum::rat(1, 2)));
        assert!(sat(&f("~(L[1/2](L[1/3] p1) <-> L[1/3] p1)"), Logic::SigmaH).unwrap().is_none());
    }

    #[test]
    fn valid_examples() {
        assert!(valid(&f("L[0] p1"), Logic::SigmaH).unwrap());
        assert!(valid(&f("L[1/2] p1 -> L[1](L[1/2] p1)"), Logic::SigmaH).unwrap());
        assert!(!valid(&f("L[1/2] p1 -> L[1] p1"), Logic::SigmaH).unwrap());
        assert!(valid(&f("L[0] p1"), Logic::SigmaPlus).unwrap());
        assert!(!valid(&f("L[1/2] p1 -> L[1] p1"), Logic::SigmaPlus).unwrap());
    }

    #[test]
    fn sigma_plus_witness_is_a_real_model() {
        let w = sat(&f("L[1/2] p1 & ~L[3/4] p1 & ~p1"), Logic::SigmaPlus).unwrap().unwrap();
        let SatWitness::Measure { assignment, measure, .. } = w else { panic!() };
        assert_eq!(assignment, 0);
        assert!(measure[1] >= crate::exactnum::rat(1, 2) && measure[1] < crate::exactnum::rat(3, 4));
    }

    #[test]
    fn errors() {
        assert_eq!(sat(&f("L_2[1/2] p1"), Logic::SigmaH).unwrap_err(), CanonError::MultiAgent(2));
        assert_eq!(sat(&f("K p1"), Logic::SigmaH).unwrap_err(), CanonError::Knowledge);
        assert_eq!(sat(&f("L[1/2] L[1/2] p1"), Logic::SigmaPlus).unwrap_err(), CanonError::DepthTooLarge(2));
        assert!(matches!(sat(&f("p1 & p2 & p3"), Logic::SigmaH), Err(CanonError::BudgetExceeded { .. })));
    }

    #[test]
    fn cardinalities() {
        for q in 1..=5u64 {
            assert_eq!(cardinality(q, 1, 1).unwrap(), 2 * (2 * q + 1));
        }
        assert_eq!(cardinality(2, 3, 1).unwrap(), 10);
        assert_eq!(cardinality(1, 0, 2).unwrap(), 4);
    }
}
