use std::collections::BTreeMap;

use super::{event_from_mask, ModelError, Semantics};
use crate::formula::{grid, AgentId, ProbIndex};

/// The belief-operator properties checked over the powerset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Law {
    /// `B^{≥0} A = Ω`
    ZeroIsEverything,
    /// `B^{≥1} Ω = Ω`
    CertainOfEverything,
    /// `B^{≥r} A ⊆ ∼B^{≥s} ∼A` for `r + s > 1`
    NoContraryBeliefs,
    /// Membership in `B^{≥r} A` is the exact comparison `T(w)(A) ≥ r` and is antitone in `r`.
    IndexContinuity,
    /// `B^{≥r}(A∩B) ∩ B^{≥s}(A∖B) ⊆ B^{≥r+s} A`
    Superadditivity,
    /// `∼B^{≥r}(A∩B) ∩ ∼B^{≥s}(A∖B) ⊆ ∼B^{≥r+s} A`
    Subadditivity,
    /// `A′ ⊆ A` implies `B^{≥r} A′ ⊆ B^{≥r} A`
    Monotonicity,
    /// `B^{≥r} E ⊆ B^{≥1} B^{≥r} E`
    PositiveIntrospection,
    /// `∼B^{≥r} E ⊆ B^{≥1} ∼B^{≥r} E`
    NegativeIntrospection,
    /// `K E ⊆ B^{≥1} E`
    KnowledgeImpliesCertainty,
    /// `B^{≥r} E ⊆ K B^{≥r} E`
    KnowsOwnBeliefs,
    /// `∼B^{≥r} E ⊆ K ∼B^{≥r} E`
    KnowsOwnDisbeliefs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawViolation {
    pub law: Law,
    pub state: usize,
    pub events: Vec<Vec<usize>>,
    pub r: Option<ProbIndex>,
    pub s: Option<ProbIndex>,
}

/// Violations found, at most [`LawReport::SAMPLE_LIMIT`] stored per law.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LawReport {
    pub checked: Vec<Law>,
    pub counts: BTreeMap<Law, usize>,
    pub samples: Vec<LawViolation>,
}

impl LawReport {
    pub const SAMPLE_LIMIT: usize = 16;

    pub fn holds(&self, law: Law) -> bool {
        self.checked.contains(&law) && !self.counts.contains_key(&law)
    }

    pub fn first_violation(&self, law: Law) -> Option<&LawViolation> {
        self.samples.iter().find(|v| v.law == law)
    }

    fn record(&mut self, law: Law, diff: u64, events: &[u64], r: Option<&ProbIndex>, s: Option<&ProbIndex>, n: usize) {
        if diff == 0 {
            return;
        }
        let c = self.counts.entry(law).or_insert(0);
        *c += 1;
        if *c <= Self::SAMPLE_LIMIT {
            self.samples.push(LawViolation {
                law,
                state: diff.trailing_zeros() as usize,
                events: events.iter().map(|&e| event_from_mask(n, e).ones().collect()).collect(),
                r: r.cloned(),
                s: s.cloned(),
            });
        }
    }
}

const POWERSET_LIMIT: usize = 10;

/// Checks the belief-operator laws of one agent over every event of the
/// powerset and every pair of indices on the grid of accuracy `q`.
/// The knowledge laws are included when the model has a partition.
pub fn check_operator_laws<S: Semantics + ?Sized>(m: &S, agent: AgentId, q: u64) -> Result<LawReport, ModelError> {
    let space = m.space();
    let n = space.num_states();
    if n > POWERSET_LIMIT {
        return Err(ModelError::TooLarge {
            what: "powerset law check",
            limit: POWERSET_LIMIT,
            states: n,
        });
    }
    let kernel = space.kernel(agent)?;
    let full: u64 = (1u64 << n) - 1;
    let events = 1usize << n;
    let g = grid(q);

    let probs: Vec<Vec<_>> = (0..events)
        .map(|mask| {
            let e = event_from_mask(n, mask as u64);
            kernel.iter().map(|row| super::row_mass(row, &e)).collect()
        })
        .collect();
    let belief_at = |r: &ProbIndex, mask: u64| -> u64 {
        probs[mask as usize]
            .iter()
            .enumerate()
            .filter(|(_, p)| *p >= r.value())
            .fold(0u64, |acc, (w, _)| acc | 1 << w)
    };
    let b: Vec<Vec<u64>> = g.iter().map(|r| (0..events as u64).map(|e| belief_at(r, e)).collect()).collect();
    let one = g.len() - 1;
    let knowledge: Option<Vec<u64>> = m.partition(agent).map(|part| {
        let cells: Vec<u64> = part.cells().iter().map(|c| c.ones().fold(0u64, |acc, s| acc | 1 << s)).collect();
        (0..events as u64)
            .map(|e| cells.iter().filter(|&&c| c & !e == 0).fold(0, |acc, c| acc | c))
            .collect()
    });

    let mut rep = LawReport {
        checked: vec![
            Law::ZeroIsEverything,
            Law::CertainOfEverything,
            Law::NoContraryBeliefs,
            Law::IndexContinuity,
            Law::Superadditivity,
            Law::Subadditivity,
            Law::Monotonicity,
            Law::PositiveIntrospection,
            Law::NegativeIntrospection,
        ],
        ..LawReport::default()
    };
    if knowledge.is_some() {
        rep.checked.extend([Law::KnowledgeImpliesCertainty, Law::KnowsOwnBeliefs, Law::KnowsOwnDisbeliefs]);
    }

    rep.record(Law::CertainOfEverything, full & !b[one][full as usize], &[full], Some(&g[one]), None, n);
    for e in 0..events as u64 {
        let ne = full & !e;
        rep.record(Law::ZeroIsEverything, full & !b[0][e as usize], &[e], Some(&g[0]), None, n);
        for (ri, r) in g.iter().enumerate() {
            let br = b[ri][e as usize];
            for (si, s) in g.iter().enumerate() {
                if r.value() + s.value() > *ProbIndex::one().value() {
                    rep.record(Law::NoContraryBeliefs, br & b[si][ne as usize], &[e], Some(r), Some(s), n);
                }
                if si < ri {
                    rep.record(Law::IndexContinuity, br & !b[si][e as usize], &[e], Some(r), Some(s), n);
                }
            }
            let exact = probs[e as usize]
                .iter()
                .enumerate()
                .filter(|(_, p)| *p >= r.value())
                .fold(0u64, |acc, (w, _)| acc | 1 << w);
            rep.record(Law::IndexContinuity, br ^ exact, &[e], Some(r), None, n);
            for w in 0..n as u64 {
                if e >> w & 1 == 1 {
                    let sub = e & !(1 << w);
                    rep.record(Law::Monotonicity, b[ri][sub as usize] & !br, &[sub, e], Some(r), None, n);
                }
            }
            rep.record(Law::PositiveIntrospection, br & !b[one][br as usize], &[e], Some(r), None, n);
            let nbr = full & !br;
            rep.record(Law::NegativeIntrospection, nbr & !b[one][nbr as usize], &[e], Some(r), None, n);
            if let Some(k) = &knowledge {
                rep.record(Law::KnowsOwnBeliefs, br & !k[br as usize], &[e], Some(r), None, n);
                rep.record(Law::KnowsOwnDisbeliefs, nbr & !k[nbr as usize], &[e], Some(r), None, n);
            }
        }
        if let Some(k) = &knowledge {
            rep.record(Law::KnowledgeImpliesCertainty, k[e as usize] & !b[one][e as usize], &[e], None, None, n);
        }
    }

    for a in 0..events as u64 {
        for bb in 0..events as u64 {
            let ab = a & bb;
            let anb = a & !bb;
            for (ri, r) in g.iter().enumerate() {
                for (si, s) in g.iter().enumerate() {
                    let sum = r.value() + s.value();
                    let Some(ti) = g.iter().position(|t| *t.value() == sum) else {
                        continue;
                    };
                    let lhs = b[ri][ab as usize] & b[si][anb as usize];
                    rep.record(Law::Superadditivity, lhs & !b[ti][a as usize], &[a, bb], Some(r), Some(s), n);
                    let nlhs = full & !b[ri][ab as usize] & !b[si][anb as usize];
                    rep.record(Law::Subadditivity, nlhs & b[ti][a as usize], &[a, bb], Some(r), Some(s), n);
                }
            }
        }
    }
    Ok(rep)
}
