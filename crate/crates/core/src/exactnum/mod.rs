//! Exact rational arithmetic and linear feasibility over rationals.
//!
//! Everything here is exact: there is no floating point anywhere on the
//! solving path. Strict inequalities are handled with a single shared slack
//! variable that is maximized; a system with strict rows is feasible iff the
//! optimal slack is positive.

pub(crate) mod rational;
mod simplex;

pub use rational::{format_rational, parse_rational, rat, Rational, RationalParseError};
pub use simplex::{solve, LpOutcome, Row, RowRelation};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Relation of a single linear constraint `a·x REL b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
    Lt,
    Gt,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    /// The closure of the relation (strict rows become non-strict).
    pub fn closure(self) -> Relation {
        match self {
            Relation::Lt => Relation::Le,
            Relation::Gt => Relation::Ge,
            r => r,
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub bound: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, bound: Rational) -> Self {
        Constraint {
            coeffs,
            relation,
            bound,
        }
    }

    /// `Σ_{i ∈ support} x_i REL bound` over `n` variables.
    pub fn indicator(n: usize, support: impl IntoIterator<Item = usize>, relation: Relation, bound: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); n];
        for i in support {
            coeffs[i] = Rational::one();
        }
        Constraint::new(coeffs, relation, bound)
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c * v)
            .fold(Rational::zero(), |acc, t| acc + t)
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.relation.holds(&self.lhs(x), &self.bound)
    }
}

/// A system of exact linear constraints over non-negative variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    num_vars: usize,
    constraints: Vec<Constraint>,
    objective: Option<Vec<Rational>>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            constraints: Vec::new(),
            objective: None,
        }
    }

    /// Variables forming a probability vector: `x ≥ 0`, `Σ x = 1`.
    pub fn probability_simplex(num_vars: usize) -> Self {
        let mut sys = LinearSystem::new(num_vars);
        sys.push(Constraint::indicator(num_vars, 0..num_vars, Relation::Eq, Rational::one()));
        sys
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&[Rational]> {
        self.objective.as_deref()
    }

    pub fn push(&mut self, c: Constraint) -> &mut Self {
        self.constraints.push(c);
        self
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn set_objective(&mut self, coeffs: Vec<Rational>) -> &mut Self {
        self.objective = Some(coeffs);
        self
    }

    pub fn with_objective(mut self, coeffs: Vec<Rational>) -> Self {
        self.objective = Some(coeffs);
        self
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.relation.is_strict())
    }

    /// Checks `x` against every constraint and non-negativity, exactly.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars && x.iter().all(|v| !v.is_negative()) && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }

    fn validate(&self) -> Result<(), LpError> {
        for c in &self.constraints {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::DimensionMismatch {
                    expected: self.num_vars,
                    found: c.coeffs.len(),
                });
            }
        }
        if let Some(obj) = &self.objective {
            if obj.len() != self.num_vars {
                return Err(LpError::DimensionMismatch {
                    expected: self.num_vars,
                    found: obj.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub witness: Option<Vec<Rational>>,
    /// Optimal shared margin for the strict rows; `None` when there are none.
    pub slack: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("system is infeasible")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("system has no objective")]
    NoObjective,
    #[error("constraint width {found} does not match {expected} variables")]
    DimensionMismatch { expected: usize, found: usize },
}

fn closure_rows(sys: &LinearSystem) -> Vec<Row> {
    sys.constraints
        .iter()
        .map(|c| Row {
            coeffs: c.coeffs.clone(),
            relation: match c.relation.closure() {
                Relation::Le => RowRelation::Le,
                Relation::Ge => RowRelation::Ge,
                _ => RowRelation::Eq,
            },
            rhs: c.bound.clone(),
        })
        .collect()
}

/// Decides feasibility of the system exactly.
///
/// Strict rows `a·x < b` are rewritten as `a·x + ε ≤ b` with one shared
/// `ε ∈ [0, 1]` which is then maximized. The witness is the maximizer, so
/// every strict row holds with margin at least the reported slack.
pub fn lp_feasible(sys: &LinearSystem) -> Result<FeasibilityReport, LpError> {
    sys.validate()?;
    let n = sys.num_vars;
    if !sys.has_strict() {
        let rows = closure_rows(sys);
        return Ok(match solve(n, &rows, &vec![Rational::zero(); n]) {
            LpOutcome::Optimal { point, .. } => FeasibilityReport {
                feasible: true,
                witness: Some(point),
                slack: None,
            },
            LpOutcome::Infeasible => FeasibilityReport {
                feasible: false,
                witness: None,
                slack: None,
            },
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        });
    }

    let eps = n;
    let mut rows = Vec::with_capacity(sys.constraints.len() + 1);
    for c in &sys.constraints {
        let mut coeffs = c.coeffs.clone();
        let (relation, rhs, eps_coeff) = match c.relation {
            Relation::Le => (RowRelation::Le, c.bound.clone(), Rational::zero()),
            Relation::Ge => (RowRelation::Ge, c.bound.clone(), Rational::zero()),
            Relation::Eq => (RowRelation::Eq, c.bound.clone(), Rational::zero()),
            Relation::Lt => (RowRelation::Le, c.bound.clone(), Rational::one()),
            Relation::Gt => {
                // a·x > b  ⟺  -a·x + ε ≤ -b
                for v in coeffs.iter_mut() {
                    *v = -v.clone();
                }
                (RowRelation::Le, -c.bound.clone(), Rational::one())
            }
        };
        coeffs.push(eps_coeff);
        rows.push(Row { coeffs, relation, rhs });
    }
    let mut cap = vec![Rational::zero(); n + 1];
    cap[eps] = Rational::one();
    rows.push(Row {
        coeffs: cap.clone(),
        relation: RowRelation::Le,
        rhs: Rational::one(),
    });

    match solve(n + 1, &rows, &cap) {
        LpOutcome::Infeasible => Ok(FeasibilityReport {
            feasible: false,
            witness: None,
            slack: None,
        }),
        LpOutcome::Unbounded => unreachable!("slack is capped at 1"),
        LpOutcome::Optimal { value, mut point } => {
            point.truncate(n);
            if value.is_positive() {
                Ok(FeasibilityReport {
                    feasible: true,
                    witness: Some(point),
                    slack: Some(value),
                })
            } else {
                Ok(FeasibilityReport {
                    feasible: false,
                    witness: None,
                    slack: Some(value),
                })
            }
        }
    }
}

/// Exact optimum of the system's objective over the closure of its
/// feasible region.
pub fn lp_extremize(sys: &LinearSystem, direction: Direction) -> Result<Rational, LpError> {
    lp_extremize_with_point(sys, direction).map(|(v, _)| v)
}

pub fn lp_extremize_with_point(sys: &LinearSystem, direction: Direction) -> Result<(Rational, Vec<Rational>), LpError> {
    sys.validate()?;
    let objective = sys.objective.as_ref().ok_or(LpError::NoObjective)?;
    let rows = closure_rows(sys);
    let c: Vec<Rational> = match direction {
        Direction::Max => objective.clone(),
        Direction::Min => objective.iter().map(|v| -v.clone()).collect(),
    };
    match solve(sys.num_vars, &rows, &c) {
        LpOutcome::Infeasible => Err(LpError::Infeasible),
        LpOutcome::Unbounded => Err(LpError::Unbounded),
        LpOutcome::Optimal { value, point } => {
            let value = match direction {
                Direction::Max => value,
                Direction::Min => -value,
            };
            Ok((value, point))
        }
    }
}
