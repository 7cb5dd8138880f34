//! Finite modal algebras with grid-indexed belief operators.
//!
//! Elements of the carrier are bitmasks over `atoms` atoms, so the carrier
//! has `2^atoms` elements and every unary operator is a table indexed by
//! element.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::parse_rational;
use crate::formula::{grid, AgentId, ProbIndex};
use crate::models::{event_from_mask, ModelError, Semantics};

pub type Element = u32;
pub type OpTable = Vec<Element>;

pub const MAX_ATOMS: usize = 10;
pub const MAX_SEARCH_CARRIER: usize = 16;
const EXHAUSTIVE_LIMIT: u64 = 1 << 16;
const CLOSURE_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("algebra with {0} atoms exceeds the limit of {MAX_ATOMS}")]
    TooManyAtoms(usize),
    #[error("carrier of {size} elements exceeds the limit of {limit}")]
    CarrierTooLarge { size: usize, limit: usize },
    #[error("operator table has {found} entries, carrier has {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("operator table entry {0} is not a carrier element")]
    BadElement(Element),
    #[error("no belief operator for index {0}")]
    MissingIndex(ProbIndex),
    #[error("operator closure exceeds {0} operators")]
    ClosureTooLarge(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed algebra file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalAlgebra {
    atoms: usize,
    belief: BTreeMap<ProbIndex, OpTable>,
    knowledge: Option<OpTable>,
}

impl ModalAlgebra {
    pub fn new(
        atoms: usize,
        belief: BTreeMap<ProbIndex, OpTable>,
        knowledge: Option<OpTable>,
    ) -> Result<Self, AlgebraError> {
        if atoms > MAX_ATOMS {
            return Err(AlgebraError::TooManyAtoms(atoms));
        }
        let size = 1usize << atoms;
        for table in belief.values().chain(knowledge.iter()) {
            if table.len() != size {
                return Err(AlgebraError::TableSize { expected: size, found: table.len() });
            }
            if let Some(&bad) = table.iter().find(|&&x| x as usize >= size) {
                return Err(AlgebraError::BadElement(bad));
            }
        }
        Ok(ModalAlgebra { atoms, belief, knowledge })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn size(&self) -> usize {
        1 << self.atoms
    }

    pub fn top(&self) -> Element {
        (self.size() - 1) as Element
    }

    pub fn not(&self, e: Element) -> Element {
        !e & self.top()
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.size() as Element
    }

    pub fn belief(&self, r: &ProbIndex) -> Option<&OpTable> {
        self.belief.get(r)
    }

    pub fn belief_ops(&self) -> &BTreeMap<ProbIndex, OpTable> {
        &self.belief
    }

    pub fn knowledge(&self) -> Option<&OpTable> {
        self.knowledge.as_ref()
    }

    pub fn with_knowledge(mut self, k: OpTable) -> Result<Self, AlgebraError> {
        let atoms = self.atoms;
        self.knowledge = Some(k);
        ModalAlgebra::new(atoms, self.belief, self.knowledge)
    }

    pub fn to_json(&self) -> String {
        let file = AlgebraFile {
            atoms: self.atoms,
            belief: self.belief.iter().map(|(r, t)| (r.to_string(), t.clone())).collect(),
            knowledge: self.knowledge.clone(),
        };
        serde_json::to_string(&file).expect("algebra file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        let file: AlgebraFile = serde_json::from_str(text).map_err(|e| AlgebraError::Format(e.to_string()))?;
        let mut belief = BTreeMap::new();
        for (key, table) in file.belief {
            let value = parse_rational(&key).map_err(|e| AlgebraError::Format(e.to_string()))?;
            let r = ProbIndex::new(value).map_err(|e| AlgebraError::Format(e.to_string()))?;
            belief.insert(r, table);
        }
        ModalAlgebra::new(file.atoms, belief, file.knowledge)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AlgebraFile {
    atoms: usize,
    belief: BTreeMap<String, OpTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knowledge: Option<OpTable>,
}

/// The powerset algebra of a model's states with one agent's belief
/// operators on `grid(q)` and, when the model has a partition for the agent,
/// its knowledge operator.
pub fn make_powerset_algebra<S: Semantics + ?Sized>(m: &S, agent: AgentId, q: u64) -> Result<ModalAlgebra, AlgebraError> {
    let space = m.space();
    let n = space.num_states();
    if n > MAX_ATOMS {
        return Err(AlgebraError::TooManyAtoms(n));
    }
    let mask_of = |e: &crate::models::Event| e.ones().fold(0 as Element, |acc, s| acc | 1 << s);
    let events: Vec<_> = (0..1u64 << n).map(|mask| event_from_mask(n, mask)).collect();
    let mut belief = BTreeMap::new();
    for r in grid(q) {
        let table = events
            .iter()
            .map(|e| space.belief_event(agent, &r, e).map(|b| mask_of(&b)))
            .collect::<Result<OpTable, _>>()?;
        belief.insert(r, table);
    }
    let knowledge = m.partition(agent).map(|p| events.iter().map(|e| mask_of(&p.knowledge(e))).collect());
    ModalAlgebra::new(n, belief, knowledge)
}

/// The four-element quotient of the interval counterexample. Atom 0 tags
/// membership in the measure-one family, atom 1 tags containing the point 0.
/// Belief operators are provided for every index with denominator dividing 60.
pub fn counterexample_algebra() -> ModalAlgebra {
    const U: Element = 0b01;
    let table_for = |r: &ProbIndex| -> OpTable {
        (0..4)
            .map(|e| {
                if *r == ProbIndex::zero() || e & U != 0 {
                    0b11
                } else {
                    0b00
                }
            })
            .collect()
    };
    let belief = grid(60).iter().map(|r| (r.clone(), table_for(r))).collect();
    ModalAlgebra::new(2, belief, None).expect("tables are well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgebraLaw {
    A1,
    A2,
    A3,
    A4,
    A5,
    Monotonicity,
    Antitonicity,
    PositiveIntrospection,
    NegativeIntrospection,
}

impl AlgebraLaw {
    pub const ALL: [AlgebraLaw; 9] = [
        AlgebraLaw::A1,
        AlgebraLaw::A2,
        AlgebraLaw::A3,
        AlgebraLaw::A4,
        AlgebraLaw::A5,
        AlgebraLaw::Monotonicity,
        AlgebraLaw::Antitonicity,
        AlgebraLaw::PositiveIntrospection,
        AlgebraLaw::NegativeIntrospection,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraViolation {
    pub law: AlgebraLaw,
    pub elements: Vec<Element>,
    pub indices: Vec<ProbIndex>,
}

#[derive(Debug, Clone, Default)]
pub struct AlgebraLawReport {
    pub counts: BTreeMap<AlgebraLaw, u64>,
    pub samples: Vec<AlgebraViolation>,
}

impl AlgebraLawReport {
    const SAMPLES_PER_LAW: usize = 8;

    pub fn passes(&self) -> bool {
        self.counts.values().all(|&c| c == 0)
    }

    pub fn holds(&self, law: AlgebraLaw) -> bool {
        self.counts.get(&law).copied().unwrap_or(0) == 0
    }

    fn record(&mut self, law: AlgebraLaw, elements: Vec<Element>, indices: Vec<&ProbIndex>) {
        let count = self.counts.entry(law).or_default();
        *count += 1;
        if *count as usize <= Self::SAMPLES_PER_LAW {
            self.samples.push(AlgebraViolation { law, elements, indices: indices.into_iter().cloned().collect() });
        }
    }
}

fn leq(a: Element, b: Element) -> bool {
    a & !b == 0
}

/// Checks the belief-operator laws over every carrier element and every pair
/// of indices from `grid(q)`.
pub fn check_sigma_h_laws(a: &ModalAlgebra, q: u64) -> Result<AlgebraLawReport, AlgebraError> {
    let indices = grid(q);
    let mut ops = Vec::with_capacity(indices.len());
    for r in &indices {
        ops.push(a.belief(r).ok_or_else(|| AlgebraError::MissingIndex(r.clone()))?);
    }
    let one = a.belief(&ProbIndex::one()).ok_or_else(|| AlgebraError::MissingIndex(ProbIndex::one()))?;
    let top = a.top();
    let mut report = AlgebraLawReport::default();
    for law in AlgebraLaw::ALL {
        report.counts.insert(law, 0);
    }

    for e in a.elements() {
        if ops[0][e as usize] != top {
            report.record(AlgebraLaw::A1, vec![e], vec![&indices[0]]);
        }
    }
    for (i, r) in indices.iter().enumerate() {
        let b = ops[i];
        if b[top as usize] != top {
            report.record(AlgebraLaw::A2, vec![top], vec![r]);
        }
        for e in a.elements() {
            let be = b[e as usize];
            if !leq(be, one[be as usize]) {
                report.record(AlgebraLaw::PositiveIntrospection, vec![e], vec![r]);
            }
            let nbe = a.not(be);
            if !leq(nbe, one[nbe as usize]) {
                report.record(AlgebraLaw::NegativeIntrospection, vec![e], vec![r]);
            }
            for f in a.elements() {
                if leq(e, f) && !leq(be, b[f as usize]) {
                    report.record(AlgebraLaw::Monotonicity, vec![e, f], vec![r]);
                }
            }
        }
    }
    for (i, r) in indices.iter().enumerate() {
        for (j, s) in indices.iter().enumerate() {
            let (br, bs) = (ops[i], ops[j]);
            let sum = r.value() + s.value();
            if i < j {
                for e in a.elements() {
                    if !leq(bs[e as usize], br[e as usize]) {
                        report.record(AlgebraLaw::Antitonicity, vec![e], vec![r, s]);
                    }
                }
            }
            if sum > *ProbIndex::one().value() {
                for e in a.elements() {
                    if br[e as usize] & bs[a.not(e) as usize] != 0 {
                        report.record(AlgebraLaw::A5, vec![e], vec![r, s]);
                    }
                }
                continue;
            }
            let rs = ProbIndex::new(sum).expect("sum within [0, 1]");
            let brs = a.belief(&rs).ok_or_else(|| AlgebraError::MissingIndex(rs.clone()))?;
            for e in a.elements() {
                for f in a.elements() {
                    let ef = e & f;
                    let enf = e & a.not(f);
                    let both = br[ef as usize] & bs[enf as usize];
                    if !leq(both, brs[e as usize]) {
                        report.record(AlgebraLaw::A3, vec![e, f], vec![r, s]);
                    }
                    let neither = a.not(br[ef as usize]) & a.not(bs[enf as usize]);
                    if !leq(neither, a.not(brs[e as usize])) {
                        report.record(AlgebraLaw::A4, vec![e, f], vec![r, s]);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Whether `k` satisfies the knowledge requirements: normality, the S5 laws,
/// knowledge of own beliefs and disbeliefs at every belief index present,
/// and knowledge implying certainty.
pub fn is_knowledge_operator(a: &ModalAlgebra, k: &[Element]) -> bool {
    let top = a.top();
    if k.len() != a.size() || k[top as usize] != top {
        return false;
    }
    let Some(one) = a.belief(&ProbIndex::one()) else {
        return false;
    };
    for e in a.elements() {
        let ke = k[e as usize];
        if !leq(ke, e) || !leq(ke, k[ke as usize]) || !leq(ke, one[e as usize]) {
            return false;
        }
        let nke = a.not(ke);
        if !leq(nke, k[nke as usize]) {
            return false;
        }
    }
    for b in a.belief_ops().values() {
        for e in a.elements() {
            let be = b[e as usize];
            let nbe = a.not(be);
            if !leq(be, k[be as usize]) || !leq(nbe, k[nbe as usize]) {
                return false;
            }
        }
    }
    a.elements().all(|e| a.elements().all(|f| k[(e & f) as usize] == k[e as usize] & k[f as usize]))
}

fn check_search_size(a: &ModalAlgebra) -> Result<(), AlgebraError> {
    if a.size() > MAX_SEARCH_CARRIER {
        return Err(AlgebraError::CarrierTooLarge { size: a.size(), limit: MAX_SEARCH_CARRIER });
    }
    Ok(())
}

/// Every knowledge operator compatible with the algebra, sorted.
///
/// Small carriers are scanned table by table. Larger ones enumerate the
/// values on coatoms and extend by meets, which covers every meet-preserving
/// operator.
pub fn search_k(a: &ModalAlgebra) -> Result<Vec<OpTable>, AlgebraError> {
    check_search_size(a)?;
    let size = a.size() as u64;
    let mut found = if size.checked_pow(size as u32).is_some_and(|t| t <= EXHAUSTIVE_LIMIT) {
        search_k_exhaustive(a)
    } else {
        search_k_coatoms(a)
    };
    found.sort();
    Ok(found)
}

/// Scans all `|carrier|^|carrier|` tables.
pub fn search_k_exhaustive(a: &ModalAlgebra) -> Vec<OpTable> {
    let size = a.size() as u64;
    let total = size.pow(size as u32);
    (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let mut table = Vec::with_capacity(size as usize);
            for _ in 0..size {
                table.push((code % size) as Element);
                code /= size;
            }
            is_knowledge_operator(a, &table).then_some(table)
        })
        .collect()
}

/// Enumerates values on the coatoms and extends each choice by meets.
pub fn search_k_coatoms(a: &ModalAlgebra) -> Vec<OpTable> {
    let top = a.top();
    let coatoms: Vec<Element> = (0..a.atoms()).map(|i| top & !(1 << i)).collect();
    let size = a.size() as u64;
    let total = size.pow(coatoms.len() as u32);
    (0..total)
        .into_par_iter()
        .filter_map(|mut code| {
            let mut values = Vec::with_capacity(coatoms.len());
            for _ in &coatoms {
                values.push((code % size) as Element);
                code /= size;
            }
            let table: OpTable = a
                .elements()
                .map(|e| {
                    (0..a.atoms())
                        .filter(|i| e & (1 << i) == 0)
                        .fold(top, |acc, i| acc & values[i])
                })
                .collect();
            is_knowledge_operator(a, &table).then_some(table)
        })
        .collect()
}

/// The knowledge operator of a partition given by cell masks:
/// `e ↦ ⋃ {c : c ⊆ e}`.
pub fn partition_operator(atoms: usize, cells: &[Element]) -> OpTable {
    (0..1 << atoms)
        .map(|e: Element| {
            cells.iter().filter(|&&c| leq(c, e)).fold(0, |acc, &c| acc | c)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorClosure {
    operators: HashSet<OpTable>,
}

impl OperatorClosure {
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn contains(&self, op: &[Element]) -> bool {
        self.operators.contains(op)
    }

    pub fn operators(&self) -> impl Iterator<Item = &OpTable> {
        self.operators.iter()
    }

    /// Whether applying ¬, ∧ and ∘ to members yields only members.
    pub fn is_closed(&self, a: &ModalAlgebra) -> bool {
        let ops: Vec<&OpTable> = self.operators.iter().collect();
        ops.iter().all(|f| self.contains(&negate(a, f)))
            && ops.iter().all(|f| {
                ops.iter().all(|g| self.contains(&meet(f, g)) && self.contains(&compose(f, g)))
            })
    }
}

fn negate(a: &ModalAlgebra, f: &[Element]) -> OpTable {
    f.iter().map(|&x| a.not(x)).collect()
}

fn meet(f: &[Element], g: &[Element]) -> OpTable {
    f.iter().zip(g).map(|(x, y)| x & y).collect()
}

/// `f ∘ g`, applying `g` first.
fn compose(f: &[Element], g: &[Element]) -> OpTable {
    g.iter().map(|&x| f[x as usize]).collect()
}

/// Smallest set of operators containing the constant top operator and the
/// belief operators (plus knowledge when asked), closed under pointwise
/// complement, pointwise meet and composition.
pub fn operator_closure(a: &ModalAlgebra, include_k: bool) -> Result<OperatorClosure, AlgebraError> {
    check_search_size(a)?;
    let mut seeds: Vec<OpTable> = vec![vec![a.top(); a.size()]];
    seeds.extend(a.belief_ops().values().cloned());
    if include_k {
        seeds.extend(a.knowledge().cloned());
    }
    let mut set: HashSet<OpTable> = HashSet::new();
    let mut all: Vec<OpTable> = Vec::new();
    let mut frontier: Vec<OpTable> = Vec::new();
    for s in seeds {
        if set.insert(s.clone()) {
            all.push(s.clone());
            frontier.push(s);
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        let add = |op: OpTable, next: &mut Vec<OpTable>, set: &mut HashSet<OpTable>| {
            if set.insert(op.clone()) {
                next.push(op);
            }
        };
        for f in &frontier {
            add(negate(a, f), &mut next, &mut set);
            for g in &all {
                add(meet(f, g), &mut next, &mut set);
                add(compose(f, g), &mut next, &mut set);
                add(compose(g, f), &mut next, &mut set);
            }
        }
        if set.len() > CLOSURE_LIMIT {
            return Err(AlgebraError::ClosureTooLarge(CLOSURE_LIMIT));
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(OperatorClosure { operators: set })
}

#[derive(Debug, Clone)]
pub struct ReducibilityReport {
    pub extendable: bool,
    pub candidates: Vec<(OpTable, bool)>,
    pub closure_size: usize,
}

impl ReducibilityReport {
    /// Every compatible knowledge operator is built from belief operators.
    pub fn all_definable(&self) -> bool {
        self.candidates.iter().all(|(_, inside)| *inside)
    }
}

/// Searches for knowledge operators and tests each for membership in the
/// closure of the belief operators alone.
pub fn check_reducibility_witness(a: &ModalAlgebra) -> Result<ReducibilityReport, AlgebraError> {
    let candidates = search_k(a)?;
    let closure = operator_closure(a, false)?;
    Ok(ReducibilityReport {
        extendable: !candidates.is_empty(),
        candidates: candidates.into_iter().map(|k| {
            let inside = closure.contains(&k);
            (k, inside)
        }).collect(),
        closure_size: closure.len(),
    })
}
