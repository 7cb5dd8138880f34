use num_traits::One;

use super::{row_mass, FiniteTypeSpace, ModelError, Partition, Semantics};
use crate::formula::AgentId;

/// A type space together with one partition per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBeliefSpace {
    base: FiniteTypeSpace,
    partitions: Vec<Partition>,
}

impl KnowledgeBeliefSpace {
    /// Checks only the shape; use [`validate_kb_space`] for the linking conditions.
    pub fn new(base: FiniteTypeSpace, partitions: Vec<Partition>) -> Result<Self, ModelError> {
        if partitions.len() != base.num_agents() {
            return Err(ModelError::Format(format!(
                "{} partitions for {} agents",
                partitions.len(),
                base.num_agents()
            )));
        }
        for (ai, p) in partitions.iter().enumerate() {
            if p.num_states() != base.num_states() {
                return Err(ModelError::NotPartition {
                    agent: ai as AgentId + 1,
                    reason: format!("covers {} states, space has {}", p.num_states(), base.num_states()),
                });
            }
        }
        Ok(KnowledgeBeliefSpace { base, partitions })
    }

    pub fn base(&self) -> &FiniteTypeSpace {
        &self.base
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }
}

impl Semantics for KnowledgeBeliefSpace {
    fn space(&self) -> &FiniteTypeSpace {
        &self.base
    }

    fn partition(&self, agent: AgentId) -> Option<&Partition> {
        agent.checked_sub(1).and_then(|i| self.partitions.get(i as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KbCondition {
    /// `T(w)([T(w)]) = 1`.
    Harsanyi,
    /// `Π(w) ⊆ E` implies `T(w)(E) = 1`.
    CellIsCertain,
    /// `[T(w)] ⊆ E` implies `Π(w) ⊆ E`.
    CellWithinType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbViolation {
    pub agent: AgentId,
    pub condition: KbCondition,
    pub state: usize,
    /// An event `E` witnessing the failure.
    pub event: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KbReport {
    pub violations: Vec<KbViolation>,
}

impl KbReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn passes_condition(&self, c: KbCondition) -> bool {
        self.violations.iter().all(|v| v.condition != c)
    }
}

/// Checks the linking conditions of a knowledge-belief space for every agent.
/// The partition condition itself is enforced when the partitions are built.
///
/// On finite spaces the universally quantified conditions reduce to single
/// events: the first fails iff `T(w)(Π(w)) < 1`, the second iff
/// `Π(w) ⊄ [T(w)]`.
pub fn validate_kb_space(s: &KnowledgeBeliefSpace) -> KbReport {
    let m = s.base();
    let mut violations = Vec::new();
    for (ai, part) in s.partitions.iter().enumerate() {
        let agent = ai as AgentId + 1;
        let kernel = m.kernel(agent).expect("agent exists");
        let types = m.type_partition(agent).expect("agent exists");
        let mut push = |condition, state, event: &super::Event| {
            violations.push(KbViolation {
                agent,
                condition,
                state,
                event: event.ones().collect(),
            })
        };
        for w in 0..m.num_states() {
            if !row_mass(&kernel[w], types.cell(w)).is_one() {
                push(KbCondition::Harsanyi, w, types.cell(w));
            }
            if !row_mass(&kernel[w], part.cell(w)).is_one() {
                push(KbCondition::CellIsCertain, w, part.cell(w));
            }
            if !part.cell(w).is_subset(types.cell(w)) {
                push(KbCondition::CellWithinType, w, types.cell(w));
            }
        }
    }
    KbReport { violations }
}

/// Adds the partitions `Π_i(w) = [T_i(w)]` to a Harsanyi space.
pub fn extend_to_kb(m: &FiniteTypeSpace) -> Result<KnowledgeBeliefSpace, ModelError> {
    let mut parts = Vec::with_capacity(m.num_agents());
    for a in 1..=m.num_agents() as AgentId {
        if !m.is_harsanyi(a)? {
            return Err(ModelError::NotHarsanyi(a));
        }
        parts.push(m.type_partition(a)?);
    }
    KnowledgeBeliefSpace::new(m.clone(), parts)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::exactnum::rat;
    use crate::models::four_p_counter_model;

    fn uniform_two() -> FiniteTypeSpace {
        let row = vec![rat(1, 2), rat(1, 2)];
        FiniteTypeSpace::from_dense(vec![vec![row.clone(), row]], BTreeMap::from([(1, vec![0])])).unwrap()
    }

    #[test]
    fn extension_passes_validation() {
        let kb = extend_to_kb(&uniform_two()).unwrap();
        assert_eq!(kb.partitions()[0].cells().len(), 1);
        assert!(validate_kb_space(&kb).passes());
    }

    #[test]
    fn discrete_cells_break_certainty() {
        let kb = KnowledgeBeliefSpace::new(uniform_two(), vec![Partition::discrete(2)]).unwrap();
        let rep = validate_kb_space(&kb);
        assert!(!rep.passes_condition(KbCondition::CellIsCertain));
        assert!(rep.passes_condition(KbCondition::CellWithinType));
        assert!(rep.passes_condition(KbCondition::Harsanyi));
        assert_eq!(rep.violations[0].event, vec![0]);
    }

    #[test]
    fn non_harsanyi_is_rejected() {
        assert_eq!(extend_to_kb(&four_p_counter_model()), Err(ModelError::NotHarsanyi(1)));
    }

    #[test]
    fn one_state_single_cell() {
        let m = FiniteTypeSpace::from_dense(vec![vec![vec![rat(1, 1)]]], BTreeMap::new()).unwrap();
        let kb = extend_to_kb(&m).unwrap();
        assert_eq!(kb.partitions()[0].cells_as_vecs(), vec![vec![0]]);
    }
}
