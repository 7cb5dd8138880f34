use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde_json::{json, Value};

use super::{enumerate_prob_parts, Atom0, CanonError, EventSpace, ProbabilitySpec};
use crate::exactnum::{format_rational, lp_feasible, Rational};
use crate::formula::Formula;
use crate::models::{event_of, Event, FiniteTypeSpace};

/// A depth-one atom: an assignment and the index of its probability spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom1 {
    pub prop: Atom0,
    pub spec: usize,
}

/// A measure over assignments realizing every bracket of `spec`: the
/// maximizer of the shared strict margin, so open brackets are met strictly.
pub fn representative_measure(spec: &ProbabilitySpec) -> Result<Vec<Rational>, CanonError> {
    let rep = lp_feasible(&spec.system())?;
    match rep.witness {
        Some(w) if rep.feasible => Ok(w),
        _ => Err(CanonError::InconsistentSpec),
    }
}

/// The canonical Harsanyi model over depth-one atoms, with the data needed
/// to interpret its states.
#[derive(Debug, Clone)]
pub struct CanonicalModel {
    q: u64,
    letters: Vec<u32>,
    specs: Vec<ProbabilitySpec>,
    measures: Vec<Vec<Rational>>,
    atoms: Vec<Atom1>,
    space: FiniteTypeSpace,
}

/// One row of the exported atom index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomEntry {
    pub id: usize,
    pub assignment: BTreeMap<u32, bool>,
    pub brackets: BTreeMap<String, String>,
}

/// States are ordered spec-major: the atoms sharing spec `s` are
/// `s·2^k .. (s+1)·2^k`, one per assignment. The kernel at an atom spreads
/// the spec's representative measure over its own group.
pub fn build_canonical_harsanyi(q: u64, letters: &[u32]) -> Result<CanonicalModel, CanonError> {
    let mut letters = letters.to_vec();
    letters.sort_unstable();
    letters.dedup();
    let k = letters.len();
    let specs = enumerate_prob_parts(q, k)?;
    let measures = specs.iter().map(representative_measure).collect::<Result<Vec<_>, _>>()?;
    let width = 1usize << k;
    let n = specs.len() * width;
    let atoms: Vec<Atom1> = (0..specs.len())
        .flat_map(|spec| (0..width).map(move |prop| Atom1 { prop, spec }))
        .collect();
    let kernel = atoms
        .iter()
        .map(|a| {
            measures[a.spec]
                .iter()
                .enumerate()
                .map(|(prop, m)| (a.spec * width + prop, m.clone()))
                .collect()
        })
        .collect();
    let valuation = letters
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, event_of(n, atoms.iter().enumerate().filter(|(_, a)| a.prop >> i & 1 == 1).map(|(s, _)| s))))
        .collect();
    let space = FiniteTypeSpace::new(n, vec![kernel], valuation)?;
    Ok(CanonicalModel {
        q,
        letters,
        specs,
        measures,
        atoms,
        space,
    })
}

type CacheKey = (u64, Vec<u32>);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<CanonicalModel>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<CanonicalModel>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`build_canonical_harsanyi`].
pub fn canonical_model(q: u64, letters: &[u32]) -> Result<Arc<CanonicalModel>, CanonError> {
    let mut key_letters = letters.to_vec();
    key_letters.sort_unstable();
    key_letters.dedup();
    let key = (q, key_letters);
    if let Some(m) = cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(m));
    }
    let built = Arc::new(build_canonical_harsanyi(q, &key.1)?);
    let mut guard = cache().lock().expect("cache lock");
    Ok(Arc::clone(guard.entry(key).or_insert(built)))
}

impl CanonicalModel {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn event_space(&self) -> EventSpace {
        EventSpace { letters: self.letters.len() }
    }

    pub fn specs(&self) -> &[ProbabilitySpec] {
        &self.specs
    }

    pub fn measure(&self, spec: usize) -> &[Rational] {
        &self.measures[spec]
    }

    pub fn atoms(&self) -> &[Atom1] {
        &self.atoms
    }

    pub fn atom(&self, state: usize) -> Atom1 {
        self.atoms[state]
    }

    pub fn spec_of(&self, state: usize) -> &ProbabilitySpec {
        &self.specs[self.atoms[state].spec]
    }

    pub fn state_of(&self, atom: Atom1) -> usize {
        atom.spec * self.event_space().atoms() + atom.prop
    }

    pub fn space(&self) -> &FiniteTypeSpace {
        &self.space
    }

    pub fn into_space(self) -> FiniteTypeSpace {
        self.space
    }

    /// The atoms sharing the probability spec `spec`.
    pub fn group(&self, spec: usize) -> Event {
        let w = self.event_space().atoms();
        event_of(self.atoms.len(), spec * w..(spec + 1) * w)
    }

    pub fn letter_position(&self, p: u32) -> Option<usize> {
        self.letters.iter().position(|&l| l == p)
    }

    /// Assignments satisfying a propositional formula, as an event mask.
    pub fn prop_event(&self, f: &Formula) -> Result<usize, CanonError> {
        let space = self.event_space();
        let mut mask = 0usize;
        for a in 0..space.atoms() {
            if self.prop_holds(a, f)? {
                mask |= 1 << a;
            }
        }
        Ok(mask)
    }

    fn prop_holds(&self, a: Atom0, f: &Formula) -> Result<bool, CanonError> {
        Ok(match f {
            Formula::Top => true,
            Formula::Bottom => false,
            Formula::Letter(p) => {
                let i = self.letter_position(*p).ok_or(crate::models::ModelError::UnknownLetter(*p))?;
                a >> i & 1 == 1
            }
            Formula::Neg(x) => !self.prop_holds(a, x)?,
            Formula::And(x, y) => self.prop_holds(a, x)? && self.prop_holds(a, y)?,
            Formula::Or(x, y) => self.prop_holds(a, x)? || self.prop_holds(a, y)?,
            Formula::Implies(x, y) => !self.prop_holds(a, x)? || self.prop_holds(a, y)?,
            Formula::Iff(x, y) => self.prop_holds(a, x)? == self.prop_holds(a, y)?,
            _ => return Err(CanonError::DepthTooLarge(f.depth())),
        })
    }

    /// Decides a depth-one formula at an atom from its bracket data alone,
    /// without consulting the kernel.
    pub fn atom_entails(&self, state: usize, f: &Formula) -> Result<bool, CanonError> {
        let atom = self.atoms[state];
        let spec = &self.specs[atom.spec];
        Ok(match f {
            Formula::Top | Formula::Bottom | Formula::Letter(_) => self.prop_holds(atom.prop, f)?,
            Formula::Neg(x) => !self.atom_entails(state, x)?,
            Formula::And(x, y) => self.atom_entails(state, x)? && self.atom_entails(state, y)?,
            Formula::Or(x, y) => self.atom_entails(state, x)? || self.atom_entails(state, y)?,
            Formula::Implies(x, y) => !self.atom_entails(state, x)? || self.atom_entails(state, y)?,
            Formula::Iff(x, y) => self.atom_entails(state, x)? == self.atom_entails(state, y)?,
            Formula::L { agent, r, body } | Formula::M { agent, r, body } => {
                if *agent != 1 {
                    return Err(CanonError::MultiAgent(*agent));
                }
                if self.q % r.denominator() != 0 {
                    return Err(CanonError::BudgetExceeded {
                        q: r.denominator(),
                        letters: self.letters.len(),
                    });
                }
                let event = self.prop_event(body)?;
                if matches!(f, Formula::L { .. }) {
                    spec.bracket(event).entails_at_least(r.value())
                } else {
                    let complement = self.event_space().full() & !event;
                    spec.bracket(complement).entails_at_least(r.complement().value())
                }
            }
            Formula::K { .. } => return Err(CanonError::Knowledge),
        })
    }

    /// The formula used to name an event over assignments: a letter when the
    /// event is `[p]`, otherwise a disjunction of full conjunctions.
    pub fn event_formula(&self, event: usize) -> Formula {
        let space = self.event_space();
        if event == 0 {
            return Formula::Bottom;
        }
        if event == space.full() {
            return Formula::Top;
        }
        for (i, &p) in self.letters.iter().enumerate() {
            if space.letter_event(i) == event {
                return Formula::Letter(p);
            }
        }
        Formula::disj(space.members(event).into_iter().map(|a| self.minterm(a)))
    }

    /// The conjunction of literals describing assignment `a`.
    pub fn minterm(&self, a: Atom0) -> Formula {
        Formula::conj(self.letters.iter().enumerate().map(|(i, &p)| {
            if a >> i & 1 == 1 {
                Formula::Letter(p)
            } else {
                Formula::Letter(p).not()
            }
        }))
    }

    pub fn atom_entry(&self, state: usize) -> AtomEntry {
        let atom = self.atoms[state];
        let spec = &self.specs[atom.spec];
        AtomEntry {
            id: state,
            assignment: self.letters.iter().enumerate().map(|(i, &p)| (p, atom.prop >> i & 1 == 1)).collect(),
            brackets: self
                .event_space()
                .representatives()
                .into_iter()
                .map(|e| (self.event_formula(e).render(), spec.bracket(e).to_string()))
                .collect(),
        }
    }

    /// `{"<id>": {"assignment": {...}, "brackets": {...}, "measure": [...]}}`.
    pub fn atom_index_json(&self) -> Value {
        let mut out = serde_json::Map::new();
        for s in 0..self.atoms.len() {
            let e = self.atom_entry(s);
            out.insert(
                s.to_string(),
                json!({
                    "assignment": e.assignment.iter().map(|(p, v)| (format!("p{p}"), *v)).collect::<BTreeMap<_, _>>(),
                    "brackets": e.brackets,
                    "measure": self.measures[self.atoms[s].spec].iter().map(format_rational).collect::<Vec<_>>(),
                }),
            );
        }
        Value::Object(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::Bracket;
    use crate::exactnum::rat;
    use crate::formula::parse;
    use crate::models::Semantics;
    use num_traits::One;

    #[test]
    fn representative_measures() {
        let specs = enumerate_prob_parts(2, 1).unwrap();
        let find = |b: Bracket| specs.iter().find(|s| *s.bracket(0b10) == b).unwrap();
        assert_eq!(representative_measure(find(Bracket::Point(rat(1, 2)))).unwrap(), vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(representative_measure(find(Bracket::Open(rat(1, 2), rat(1, 1)))).unwrap()[1], rat(3, 4));
        assert_eq!(representative_measure(find(Bracket::Point(rat(1, 1)))).unwrap()[1], rat(1, 1));
    }

    #[test]
    fn canonical_q2_is_harsanyi() {
        let m = build_canonical_harsanyi(2, &[1]).unwrap();
        assert_eq!(m.space().num_states(), 10);
        assert!(m.space().is_harsanyi(1).unwrap());
        let half = m.specs().iter().position(|s| *s.bracket(0b10) == Bracket::Point(rat(1, 2))).unwrap();
        let state = m.state_of(Atom1 { prop: 1, spec: half });
        let row = m.space().row(1, state).unwrap();
        assert_eq!(row, &[(half * 2, rat(1, 2)), (half * 2 + 1, rat(1, 2))]);
        for spec in 0..m.specs().len() {
            for s in m.group(spec).ones() {
                assert!(m.space().prob(1, s, &m.group(spec)).unwrap().is_one());
            }
        }
    }

    #[test]
    fn entailment_agrees_with_kernel_on_examples() {
        let m = build_canonical_harsanyi(2, &[1]).unwrap();
        for text in ["L[1/2] p1", "M[1/2] p1", "~L[1] ~p1 & p1", "L[0] p1 -> M[1] p1"] {
            let f = parse(text).unwrap();
            for s in 0..10 {
                assert_eq!(m.atom_entails(s, &f).unwrap(), m.space().evaluate(s, &f).unwrap(), "{text} at {s}");
            }
        }
    }

    #[test]
    fn cache_returns_same_model() {
        let a = canonical_model(1, &[1]).unwrap();
        let b = canonical_model(1, &[1, 1]).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn atom_index_export() {
        let m = build_canonical_harsanyi(1, &[1]).unwrap();
        let v = m.atom_index_json();
        assert_eq!(v.as_object().unwrap().len(), 6);
        assert_eq!(v["0"]["assignment"]["p1"], json!(false));
        assert_eq!(v["0"]["brackets"]["p1"], json!("0"));
    }
}
