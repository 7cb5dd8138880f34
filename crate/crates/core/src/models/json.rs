use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{event_of, FiniteTypeSpace, KnowledgeBeliefSpace, ModelError, Partition};
use crate::exactnum::{format_rational, parse_rational, Rational};
use crate::formula::AgentId;

/// On-disk model description. Rationals are `"num/den"` strings and state
/// indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub states: usize,
    pub agents: usize,
    pub kernels: Vec<Vec<Vec<String>>>,
    pub valuation: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<Vec<Vec<usize>>>>,
}

/// A loaded model, with partitions when the file provided them.
#[derive(Debug, Clone)]
pub enum ParsedModel {
    TypeSpace(FiniteTypeSpace),
    KnowledgeBelief(KnowledgeBeliefSpace),
}

impl ParsedModel {
    pub fn space(&self) -> &FiniteTypeSpace {
        match self {
            ParsedModel::TypeSpace(m) => m,
            ParsedModel::KnowledgeBelief(kb) => kb.base(),
        }
    }
}

fn letter_id(name: &str) -> Result<u32, ModelError> {
    name.strip_prefix('p')
        .and_then(|d| d.parse::<u32>().ok())
        .filter(|&p| p > 0)
        .ok_or_else(|| ModelError::Format(format!("bad letter name `{name}`")))
}

impl ModelFile {
    pub fn from_space(m: &FiniteTypeSpace, partitions: Option<&[Partition]>) -> Self {
        let n = m.num_states();
        let kernels = (1..=m.num_agents() as AgentId)
            .map(|a| {
                (0..n)
                    .map(|w| m.dense_row(a, w).expect("agent exists").iter().map(format_rational).collect())
                    .collect()
            })
            .collect();
        let valuation = m.valuation().iter().map(|(p, e)| (format!("p{p}"), e.ones().collect())).collect();
        ModelFile {
            states: n,
            agents: m.num_agents(),
            kernels,
            valuation,
            partitions: partitions.map(|ps| ps.iter().map(Partition::cells_as_vecs).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model files serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))
    }

    pub fn into_model(self) -> Result<ParsedModel, ModelError> {
        if self.kernels.len() != self.agents {
            return Err(ModelError::Format(format!("{} agents declared, {} kernels given", self.agents, self.kernels.len())));
        }
        let n = self.states;
        let mut dense: Vec<Vec<Vec<Rational>>> = Vec::with_capacity(self.agents);
        for (ai, k) in self.kernels.iter().enumerate() {
            if k.len() != n {
                return Err(ModelError::Format(format!("agent {} has {} rows for {n} states", ai + 1, k.len())));
            }
            let mut rows = Vec::with_capacity(n);
            for row in k {
                if row.len() != n {
                    return Err(ModelError::Format(format!("row of width {} for {n} states", row.len())));
                }
                rows.push(
                    row.iter()
                        .map(|s| parse_rational(s).map_err(|e| ModelError::Format(e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            dense.push(rows);
        }
        let mut valuation = BTreeMap::new();
        for (name, states) in &self.valuation {
            if let Some(&s) = states.iter().find(|&&s| s >= n) {
                return Err(ModelError::StateOutOfRange(s));
            }
            valuation.insert(letter_id(name)?, event_of(n, states.iter().copied()));
        }
        let sparse = dense
            .into_iter()
            .map(|k| k.into_iter().map(|row| row.into_iter().enumerate().collect()).collect())
            .collect();
        let base = FiniteTypeSpace::new(n, sparse, valuation)?;
        match self.partitions {
            None => Ok(ParsedModel::TypeSpace(base)),
            Some(ps) => {
                if ps.len() != self.agents {
                    return Err(ModelError::Format(format!("{} agents declared, {} partitions given", self.agents, ps.len())));
                }
                let parts = ps
                    .into_iter()
                    .enumerate()
                    .map(|(ai, cells)| Partition::new(n, cells, ai as AgentId + 1))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ParsedModel::KnowledgeBelief(KnowledgeBeliefSpace::new(base, parts)?))
            }
        }
    }
}
