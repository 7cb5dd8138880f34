//! Finite type spaces: kernels, valuations, satisfaction, and belief operators.

mod json;
mod kb;
mod laws;

pub use json::{ModelFile, ParsedModel};
pub use kb::{extend_to_kb, validate_kb_space, KbCondition, KbReport, KbViolation, KnowledgeBeliefSpace};
pub use laws::{check_operator_laws, Law, LawReport, LawViolation};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{format_rational, Rational};
use crate::formula::{AgentId, Formula, ProbIndex};

/// A set of states.
pub type Event = FixedBitSet;

/// One agent's type function as sparse rows `(state, probability)`.
pub type Kernel = Vec<Vec<(usize, Rational)>>;

/// A sparse kernel row, sorted by state with zeros omitted, shared between
/// states of the same type.
pub type SharedRow = Arc<[(usize, Rational)]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model has no states")]
    Empty,
    #[error("letter p{0} has no valuation")]
    UnknownLetter(u32),
    #[error("agent {0} is not part of the model")]
    UnknownAgent(AgentId),
    #[error("knowledge operator for agent {0} needs a partition")]
    NoPartition(AgentId),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("kernel row of agent {agent} at state {state}: {reason}")]
    BadKernel { agent: AgentId, state: usize, reason: String },
    #[error("partition of agent {agent} is not a partition: {reason}")]
    NotPartition { agent: AgentId, reason: String },
    #[error("agent {0} kernel is not Harsanyi")]
    NotHarsanyi(AgentId),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("{what} needs at most {limit} states, model has {states}")]
    TooLarge { what: &'static str, limit: usize, states: usize },
}

pub fn empty_event(n: usize) -> Event {
    FixedBitSet::with_capacity(n)
}

pub fn full_event(n: usize) -> Event {
    let mut e = FixedBitSet::with_capacity(n);
    e.insert_range(..);
    e
}

pub fn complement(e: &Event) -> Event {
    let mut c = e.clone();
    c.toggle_range(..);
    c
}

pub fn event_of(n: usize, states: impl IntoIterator<Item = usize>) -> Event {
    let mut e = FixedBitSet::with_capacity(n);
    for s in states {
        e.insert(s);
    }
    e
}

/// Event whose members are the set bits of `mask` (for spaces of at most 64 states).
pub fn event_from_mask(n: usize, mask: u64) -> Event {
    event_of(n, (0..n).filter(|i| mask >> i & 1 == 1))
}

/// A partition of the state set, stored both as cells and as a lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cell_of: Vec<usize>,
    cells: Vec<Event>,
}

impl Partition {
    pub fn new(n: usize, cells: Vec<Vec<usize>>, agent: AgentId) -> Result<Self, ModelError> {
        let mut cell_of = vec![usize::MAX; n];
        let mut events = Vec::with_capacity(cells.len());
        for (ci, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(ModelError::NotPartition {
                    agent,
                    reason: format!("cell {ci} is empty"),
                });
            }
            for &s in cell {
                if s >= n {
                    return Err(ModelError::StateOutOfRange(s));
                }
                if cell_of[s] != usize::MAX {
                    return Err(ModelError::NotPartition {
                        agent,
                        reason: format!("state {s} lies in two cells"),
                    });
                }
                cell_of[s] = ci;
            }
            events.push(event_of(n, cell.iter().copied()));
        }
        if let Some(s) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(ModelError::NotPartition {
                agent,
                reason: format!("state {s} is not covered"),
            });
        }
        Ok(Partition { cell_of, cells: events })
    }

    /// Builds a partition from a class label per state.
    pub fn from_labels(labels: &[usize]) -> Self {
        let n = labels.len();
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut cells: Vec<Event> = Vec::new();
        let mut cell_of = Vec::with_capacity(n);
        for (s, &l) in labels.iter().enumerate() {
            let ci = *index.entry(l).or_insert_with(|| {
                cells.push(empty_event(n));
                cells.len() - 1
            });
            cells[ci].insert(s);
            cell_of.push(ci);
        }
        Partition { cell_of, cells }
    }

    pub fn discrete(n: usize) -> Self {
        Partition::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn num_states(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cells(&self) -> &[Event] {
        &self.cells
    }

    pub fn cell_index(&self, w: usize) -> usize {
        self.cell_of[w]
    }

    pub fn cell(&self, w: usize) -> &Event {
        &self.cells[self.cell_of[w]]
    }

    /// States whose whole cell lies inside `e`.
    pub fn knowledge(&self, e: &Event) -> Event {
        let mut out = empty_event(self.num_states());
        for c in &self.cells {
            if c.is_subset(e) {
                out.union_with(c);
            }
        }
        out
    }

    pub fn cells_as_vecs(&self) -> Vec<Vec<usize>> {
        self.cells.iter().map(|c| c.ones().collect()).collect()
    }
}

/// States, one Markov kernel per agent, and a valuation of letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTypeSpace {
    n: usize,
    kernels: Vec<Vec<SharedRow>>,
    valuation: BTreeMap<u32, Event>,
}

impl FiniteTypeSpace {
    /// Validates that every row is a probability vector over `0..n`.
    pub fn new(n: usize, kernels: Vec<Kernel>, valuation: BTreeMap<u32, Event>) -> Result<Self, ModelError> {
        let shared = kernels
            .into_iter()
            .map(|k| {
                let mut interned: HashMap<Vec<(usize, Rational)>, SharedRow> = HashMap::new();
                k.into_iter()
                    .map(|row| {
                        let mut dense: BTreeMap<usize, Rational> = BTreeMap::new();
                        for (s, p) in row {
                            *dense.entry(s).or_insert_with(Rational::zero) += p;
                        }
                        let row: Vec<(usize, Rational)> = dense.into_iter().filter(|(_, p)| !p.is_zero()).collect();
                        interned.entry(row.clone()).or_insert_with(|| row.into()).clone()
                    })
                    .collect()
            })
            .collect();
        FiniteTypeSpace::from_shared_rows(n, shared, valuation)
    }

    /// Like [`FiniteTypeSpace::new`] but takes rows already sorted, merged and
    /// free of zeros; each distinct row is validated once.
    pub fn from_shared_rows(n: usize, kernels: Vec<Vec<SharedRow>>, valuation: BTreeMap<u32, Event>) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::Empty);
        }
        for (ai, kernel) in kernels.iter().enumerate() {
            let agent = ai as AgentId + 1;
            if kernel.len() != n {
                return Err(ModelError::BadKernel {
                    agent,
                    state: kernel.len().min(n),
                    reason: format!("expected {n} rows, found {}", kernel.len()),
                });
            }
            let mut checked: HashSet<*const (usize, Rational)> = HashSet::new();
            for (w, row) in kernel.iter().enumerate() {
                if !checked.insert(row.as_ptr()) {
                    continue;
                }
                let bad = |reason: String| ModelError::BadKernel { agent, state: w, reason };
                let mut total = Rational::zero();
                let mut prev: Option<usize> = None;
                for (s, p) in row.iter() {
                    if *s >= n {
                        return Err(ModelError::StateOutOfRange(*s));
                    }
                    if prev.is_some_and(|q| q >= *s) {
                        return Err(bad("row is not sorted by state".into()));
                    }
                    prev = Some(*s);
                    if !p.is_positive() {
                        return Err(bad(format!("entry {} at state {s} is not positive", format_rational(p))));
                    }
                    total += p;
                }
                if !total.is_one() {
                    return Err(bad(format!("row sums to {}", format_rational(&total))));
                }
            }
        }
        for e in valuation.values() {
            if e.len() != n {
                return Err(ModelError::Format(format!("valuation event has capacity {} for {n} states", e.len())));
            }
        }
        Ok(FiniteTypeSpace { n, kernels, valuation })
    }

    /// Builds a space from dense rows `kernels[agent][state][state']`.
    pub fn from_dense(kernels: Vec<Vec<Vec<Rational>>>, valuation: BTreeMap<u32, Vec<usize>>) -> Result<Self, ModelError> {
        let n = kernels.first().map(|k| k.len()).unwrap_or(0);
        let sparse = kernels
            .into_iter()
            .map(|k| k.into_iter().map(|row| row.into_iter().enumerate().collect()).collect())
            .collect();
        let mut val = BTreeMap::new();
        for (p, states) in valuation {
            if let Some(&s) = states.iter().find(|&&s| s >= n) {
                return Err(ModelError::StateOutOfRange(s));
            }
            val.insert(p, event_of(n, states));
        }
        FiniteTypeSpace::new(n, sparse, val)
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn num_agents(&self) -> usize {
        self.kernels.len()
    }

    pub fn valuation(&self) -> &BTreeMap<u32, Event> {
        &self.valuation
    }

    pub fn kernel(&self, agent: AgentId) -> Result<&[SharedRow], ModelError> {
        agent
            .checked_sub(1)
            .and_then(|i| self.kernels.get(i as usize))
            .map(Vec::as_slice)
            .ok_or(ModelError::UnknownAgent(agent))
    }

    pub fn row(&self, agent: AgentId, w: usize) -> Result<&[(usize, Rational)], ModelError> {
        Ok(&self.kernel(agent)?[w])
    }

    pub fn dense_row(&self, agent: AgentId, w: usize) -> Result<Vec<Rational>, ModelError> {
        let mut out = vec![Rational::zero(); self.n];
        for (s, p) in self.row(agent, w)? {
            out[*s] = p.clone();
        }
        Ok(out)
    }

    /// `T_agent(w)(e)`.
    pub fn prob(&self, agent: AgentId, w: usize, e: &Event) -> Result<Rational, ModelError> {
        Ok(row_mass(self.row(agent, w)?, e))
    }

    pub fn full(&self) -> Event {
        full_event(self.n)
    }

    pub fn empty(&self) -> Event {
        empty_event(self.n)
    }

    /// `B^{≥r}_agent(e) = {w : T_agent(w)(e) ≥ r}`.
    pub fn belief_event(&self, agent: AgentId, r: &ProbIndex, e: &Event) -> Result<Event, ModelError> {
        let kernel = self.kernel(agent)?;
        let mut out = self.empty();
        for (w, row) in kernel.iter().enumerate() {
            if row_mass(row, e) >= *r.value() {
                out.insert(w);
            }
        }
        Ok(out)
    }

    /// Label per state identifying its kernel row; equal labels mean equal types.
    pub fn type_labels(&self, agent: AgentId) -> Result<Vec<usize>, ModelError> {
        let kernel = self.kernel(agent)?;
        let mut seen: HashMap<&[(usize, Rational)], usize> = HashMap::new();
        Ok(kernel
            .iter()
            .map(|row| {
                let next = seen.len();
                *seen.entry(row).or_insert(next)
            })
            .collect())
    }

    /// The partition into kernel-equality classes `[T(w)]`.
    pub fn type_partition(&self, agent: AgentId) -> Result<Partition, ModelError> {
        Ok(Partition::from_labels(&self.type_labels(agent)?))
    }

    /// Condition H: every state's type gives probability 1 to its own type class.
    pub fn is_harsanyi(&self, agent: AgentId) -> Result<bool, ModelError> {
        let part = self.type_partition(agent)?;
        let kernel = self.kernel(agent)?;
        Ok((0..self.n).all(|w| row_mass(&kernel[w], part.cell(w)).is_one()))
    }

    pub fn is_harsanyi_all(&self) -> bool {
        (1..=self.num_agents() as AgentId).all(|a| self.is_harsanyi(a).unwrap_or(false))
    }

    /// Condition H′ checked on singleton events, which determine every
    /// measure: `T(w)({v : T(v)({u}) ≠ T(w)({u})}) = 0` for all `w`, `u`.
    pub fn satisfies_h_prime(&self, agent: AgentId) -> Result<bool, ModelError> {
        let kernel = self.kernel(agent)?;
        let dense: Vec<Vec<Rational>> = (0..self.n).map(|w| self.dense_row(agent, w)).collect::<Result<_, _>>()?;
        for w in 0..self.n {
            for u in 0..self.n {
                let target = &dense[w][u];
                let bad: Rational = kernel[w].iter().filter(|(v, _)| dense[*v][u] != *target).map(|(_, p)| p).sum();
                if !bad.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Condition H′ over the whole powerset; for spaces of at most 12 states.
    pub fn satisfies_h_prime_powerset(&self, agent: AgentId) -> Result<bool, ModelError> {
        if self.n > 12 {
            return Err(ModelError::TooLarge {
                what: "powerset H′ check",
                limit: 12,
                states: self.n,
            });
        }
        let kernel = self.kernel(agent)?;
        for mask in 0u64..(1 << self.n) {
            let e = event_from_mask(self.n, mask);
            let probs: Vec<Rational> = kernel.iter().map(|row| row_mass(row, &e)).collect();
            for w in 0..self.n {
                let bad: Rational = kernel[w].iter().filter(|(v, _)| probs[*v] != probs[w]).map(|(_, p)| p).sum();
                if !bad.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Dense JSON-ready description of the space.
    pub fn to_file(&self, partitions: Option<&[Partition]>) -> ModelFile {
        ModelFile::from_space(self, partitions)
    }
}

pub(crate) fn row_mass(row: &[(usize, Rational)], e: &Event) -> Rational {
    let mut total = Rational::zero();
    for (s, p) in row {
        if e.contains(*s) {
            total += p;
        }
    }
    total
}

/// Anything that can interpret formulas: a bare type space, or one with partitions.
pub trait Semantics {
    fn space(&self) -> &FiniteTypeSpace;

    fn partition(&self, agent: AgentId) -> Option<&Partition>;

    /// `[[f]]`, the set of states where `f` holds.
    fn extension(&self, f: &Formula) -> Result<Event, ModelError> {
        let m = self.space();
        Ok(match f {
            Formula::Top => m.full(),
            Formula::Bottom => m.empty(),
            Formula::Letter(p) => m.valuation.get(p).cloned().ok_or(ModelError::UnknownLetter(*p))?,
            Formula::Neg(a) => complement(&self.extension(a)?),
            Formula::And(a, b) => {
                let mut e = self.extension(a)?;
                e.intersect_with(&self.extension(b)?);
                e
            }
            Formula::Or(a, b) => {
                let mut e = self.extension(a)?;
                e.union_with(&self.extension(b)?);
                e
            }
            Formula::Implies(a, b) => {
                let mut e = complement(&self.extension(a)?);
                e.union_with(&self.extension(b)?);
                e
            }
            Formula::Iff(a, b) => {
                let ea = self.extension(a)?;
                let eb = self.extension(b)?;
                let mut diff = ea.clone();
                diff.symmetric_difference_with(&eb);
                complement(&diff)
            }
            Formula::L { agent, r, body } => m.belief_event(*agent, r, &self.extension(body)?)?,
            Formula::M { agent, r, body } => m.belief_event(*agent, &r.complement(), &complement(&self.extension(body)?))?,
            Formula::K { agent, body } => {
                m.kernel(*agent)?;
                let part = self.partition(*agent).ok_or(ModelError::NoPartition(*agent))?;
                part.knowledge(&self.extension(body)?)
            }
        })
    }

    fn evaluate(&self, w: usize, f: &Formula) -> Result<bool, ModelError> {
        if w >= self.space().num_states() {
            return Err(ModelError::StateOutOfRange(w));
        }
        Ok(self.extension(f)?.contains(w))
    }

    /// True iff `f` holds at every state.
    fn holds_everywhere(&self, f: &Formula) -> Result<bool, ModelError> {
        Ok(self.extension(f)?.count_ones(..) == self.space().num_states())
    }
}

impl Semantics for FiniteTypeSpace {
    fn space(&self) -> &FiniteTypeSpace {
        self
    }

    fn partition(&self, _agent: AgentId) -> Option<&Partition> {
        None
    }
}

/// The two-state model where `p` holds only at state 0, `T(0) = (3/4, 1/4)`
/// and `T(1) = (0, 1)`. It is not Harsanyi, and both 4_p and 5_p fail at state 0.
pub fn four_p_counter_model() -> FiniteTypeSpace {
    use crate::exactnum::rat;
    FiniteTypeSpace::from_dense(
        vec![vec![vec![rat(3, 4), rat(1, 4)], vec![rat(0, 1), rat(1, 1)]]],
        BTreeMap::from([(1, vec![0])]),
    )
    .expect("valid model")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::formula::parse;

    #[test]
    fn counter_model_evaluation() {
        let m = four_p_counter_model();
        assert!(m.evaluate(0, &parse("L[1/2] p1").unwrap()).unwrap());
        assert!(!m.evaluate(0, &parse("L[1](L[1/2] p1)").unwrap()).unwrap());
        assert!(m.evaluate(1, &parse("L[0] p1").unwrap()).unwrap());
        assert_eq!(m.extension(&parse("L[1/2] p1").unwrap()).unwrap(), event_of(2, [0]));
        assert_eq!(m.extension(&Formula::Top).unwrap(), m.full());
        assert_eq!(m.extension(&Formula::Letter(1)).unwrap(), event_of(2, [0]));
    }

    #[test]
    fn belief_event_examples() {
        let m = four_p_counter_model();
        let half = ProbIndex::of(1, 2);
        assert_eq!(m.belief_event(1, &ProbIndex::zero(), &m.empty()).unwrap(), m.full());
        assert_eq!(m.belief_event(1, &ProbIndex::one(), &m.full()).unwrap(), m.full());
        assert_eq!(m.belief_event(1, &half, &event_of(2, [0])).unwrap(), event_of(2, [0]));
    }

    #[test]
    fn harsanyi_examples() {
        let one = FiniteTypeSpace::from_dense(vec![vec![vec![rat(1, 1)]]], BTreeMap::new()).unwrap();
        assert!(one.is_harsanyi(1).unwrap());
        let m = four_p_counter_model();
        assert!(!m.is_harsanyi(1).unwrap());
        assert!(!m.satisfies_h_prime(1).unwrap());
        assert!(!m.satisfies_h_prime_powerset(1).unwrap());
        assert!(one.satisfies_h_prime_powerset(1).unwrap());
    }

    #[test]
    fn structural_errors() {
        let bad = FiniteTypeSpace::from_dense(vec![vec![vec![rat(1, 2), rat(1, 4)], vec![rat(0, 1), rat(1, 1)]]], BTreeMap::new());
        assert!(matches!(bad, Err(ModelError::BadKernel { state: 0, .. })));
        let m = four_p_counter_model();
        assert_eq!(m.evaluate(0, &Formula::Letter(2)), Err(ModelError::UnknownLetter(2)));
        assert_eq!(m.evaluate(0, &Formula::k(1, Formula::Letter(1))), Err(ModelError::NoPartition(1)));
        assert!(matches!(Partition::new(3, vec![vec![0, 1], vec![1, 2]], 1), Err(ModelError::NotPartition { .. })));
        assert!(matches!(Partition::new(3, vec![vec![0, 1]], 1), Err(ModelError::NotPartition { .. })));
    }
}
