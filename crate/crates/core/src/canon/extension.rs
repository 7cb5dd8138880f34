use num_traits::One;
use rayon::prelude::*;

use super::{build_canonical_harsanyi, Bracket, CanonError, CanonicalModel};
use crate::exactnum::{lp_extremize, lp_feasible, Constraint, Direction, LinearSystem, Rational, Relation};
use crate::models::{event_from_mask, Event};

/// The bracket that the unique depth-two extension of atom `state` assigns
/// to the set `event` of depth-one atoms: the bracket, under the atom's own
/// spec, of the assignments of those members of `event` in the atom's group.
pub fn unique_extension_brackets(model: &CanonicalModel, state: usize, event: &Event) -> Bracket {
    let spec = model.atom(state).spec;
    let mut props = 0usize;
    for s in event.ones() {
        let a = model.atom(s);
        if a.spec == spec {
            props |= 1 << a.prop;
        }
    }
    model.specs()[spec].bracket(props).clone()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionFailure {
    pub atom: usize,
    pub event: Vec<usize>,
    pub predicted: Bracket,
    pub min: Rational,
    pub max: Rational,
    pub compatible: Vec<Bracket>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionReport {
    pub q: u64,
    pub letters: usize,
    pub atoms: usize,
    pub checks: usize,
    pub failures: Vec<ExtensionFailure>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const STATE_LIMIT: usize = 16;

/// Measures on the depth-one atoms that put all mass on `state`'s group and
/// push forward onto assignments inside the atom's brackets.
fn extension_system(model: &CanonicalModel, state: usize) -> LinearSystem {
    let n = model.atoms().len();
    let atom = model.atom(state);
    let group: Vec<usize> = model.group(atom.spec).ones().collect();
    let mut sys = LinearSystem::probability_simplex(n);
    sys.push(Constraint::indicator(n, group.iter().copied(), Relation::Eq, Rational::one()));
    let spec = &model.specs()[atom.spec];
    let space = model.event_space();
    for f in space.representatives() {
        let support: Vec<usize> = space.members(f).into_iter().map(|a| group[a]).collect();
        for c in spec.bracket(f).constraints(n, &support) {
            sys.push(c);
        }
    }
    sys
}

fn check_one(model: &CanonicalModel, state: usize, base: &LinearSystem, mask: u64) -> Result<Option<ExtensionFailure>, CanonError> {
    let n = model.atoms().len();
    let event = event_from_mask(n, mask);
    let members: Vec<usize> = event.ones().collect();
    let predicted = unique_extension_brackets(model, state, &event);
    let objective = Constraint::indicator(n, members.iter().copied(), Relation::Eq, Rational::one()).coeffs;
    let with_obj = base.clone().with_objective(objective);
    let min = lp_extremize(&with_obj, Direction::Min)?;
    let max = lp_extremize(&with_obj, Direction::Max)?;
    let mut compatible = Vec::new();
    for b in Bracket::all(model.q()) {
        let mut sys = base.clone();
        for c in b.constraints(n, &members) {
            sys.push(c);
        }
        if lp_feasible(&sys)?.feasible {
            compatible.push(b);
        }
    }
    let range_ok = match &predicted {
        Bracket::Point(a) => min == *a && max == *a,
        Bracket::Open(a, b) => min >= *a && max <= *b,
    };
    let unique_ok = compatible.len() == 1 && compatible[0] == predicted;
    if range_ok && unique_ok {
        Ok(None)
    } else {
        Ok(Some(ExtensionFailure {
            atom: state,
            event: members,
            predicted,
            min,
            max,
            compatible,
        }))
    }
}

/// For every atom and every set of atoms, extremizes the extension's
/// probability of the set by exact linear programming and checks that
/// exactly the predicted grid bracket is attainable.
pub fn verify_unique_extension(q: u64, letters: usize) -> Result<ExtensionReport, CanonError> {
    let letter_ids: Vec<u32> = (1..=letters as u32).collect();
    let model = build_canonical_harsanyi(q, &letter_ids)?;
    let n = model.atoms().len();
    if n > STATE_LIMIT {
        return Err(CanonError::BudgetExceeded { q, letters });
    }
    let events = 1u64 << n;
    let bases: Vec<LinearSystem> = (0..n).map(|s| extension_system(&model, s)).collect();
    let results: Vec<Result<Option<ExtensionFailure>, CanonError>> = (0..n as u64 * events)
        .into_par_iter()
        .map(|job| {
            let state = (job / events) as usize;
            check_one(&model, state, &bases[state], job % events)
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        if let Some(f) = r? {
            failures.push(f);
        }
    }
    Ok(ExtensionReport {
        q,
        letters,
        atoms: n,
        checks: n * events as usize,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::models::{empty_event, event_of};

    #[test]
    fn bracket_examples() {
        let m = build_canonical_harsanyi(2, &[1]).unwrap();
        let n = m.atoms().len();
        for s in 0..n {
            let spec = m.atom(s).spec;
            assert_eq!(unique_extension_brackets(&m, s, &m.group(spec)), Bracket::Point(rat(1, 1)));
            let mut other = event_of(n, 0..n);
            other.difference_with(&m.group(spec));
            assert_eq!(unique_extension_brackets(&m, s, &other), Bracket::Point(rat(0, 1)));
            assert_eq!(unique_extension_brackets(&m, s, &empty_event(n)), Bracket::Point(rat(0, 1)));
        }
        let open = m.specs().iter().position(|s| *s.bracket(0b10) == Bracket::Open(rat(1, 2), rat(1, 1))).unwrap();
        let state = m.state_of(super::super::Atom1 { prop: 0, spec: open });
        let p_true = event_of(n, [m.state_of(super::super::Atom1 { prop: 1, spec: open })]);
        assert_eq!(unique_extension_brackets(&m, state, &p_true), Bracket::Open(rat(1, 2), rat(1, 1)));
    }

    #[test]
    fn q1_one_letter_all_checks_pass() {
        let rep = verify_unique_extension(1, 1).unwrap();
        assert_eq!(rep.atoms, 6);
        assert_eq!(rep.checks, 6 * 64);
        assert!(rep.passed(), "{:?}", rep.failures.first());
    }
}
