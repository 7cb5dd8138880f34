//! Statements, normal forms, and the denesting rewriter.

use num_traits::Zero;
use thiserror::Error;

use crate::canon::{canonical_model, Bracket, CanonError, CanonicalModel};
use crate::formula::{Formula, LocalLanguage, ProbIndex};
use crate::models::Semantics;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("formula is not normal: {0}")]
    NotNormal(String),
    #[error("formula is not in the language L({q}, {d}, {letters:?})")]
    NotInLanguage { q: u64, d: usize, letters: Vec<u32> },
    #[error(transparent)]
    Canon(#[from] CanonError),
}

fn is_boolean(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Top | Formula::Bottom | Formula::Neg(_) | Formula::And(..) | Formula::Or(..) | Formula::Implies(..) | Formula::Iff(..)
    )
}

/// Leaves of the Boolean skeleton of `f` (maximal non-Boolean subformulas).
fn boolean_leaves<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Top | Formula::Bottom => {}
        Formula::Neg(a) => boolean_leaves(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            boolean_leaves(a, out);
            boolean_leaves(b, out);
        }
        _ => out.push(f),
    }
}

fn map_leaves(f: &Formula, g: &mut dyn FnMut(&Formula) -> Result<Formula, RewriteError>) -> Result<Formula, RewriteError> {
    Ok(match f {
        Formula::Top | Formula::Bottom => f.clone(),
        Formula::Neg(a) => map_leaves(a, g)?.not(),
        Formula::And(a, b) => map_leaves(a, g)?.and(map_leaves(b, g)?),
        Formula::Or(a, b) => map_leaves(a, g)?.or(map_leaves(b, g)?),
        Formula::Implies(a, b) => map_leaves(a, g)?.implies(map_leaves(b, g)?),
        Formula::Iff(a, b) => map_leaves(a, g)?.iff(map_leaves(b, g)?),
        _ => g(f)?,
    })
}

fn positive_index(r: &ProbIndex) -> bool {
    !r.value().is_zero()
}

/// A Boolean combination of normal `L_s` formulas with `s > 0`.
fn is_positive_combination(f: &Formula) -> bool {
    let mut leaves = Vec::new();
    boolean_leaves(f, &mut leaves);
    !leaves.is_empty() && leaves.iter().all(|l| matches!(l, Formula::L { r, .. } if positive_index(r)) && normal_core(l))
}

/// The decomposition `X = φ ∘ ψ` licensing clause three, if any.
/// Returns `(φ, ψ, φ_is_left)`.
fn split_clause_three<'a>(r: &ProbIndex, agent: u32, x: &'a Formula) -> Option<(&'a Formula, &'a Formula, bool)> {
    let (a, b) = match x {
        Formula::And(a, b) | Formula::Or(a, b) => (a.as_ref(), b.as_ref()),
        _ => return None,
    };
    let ok = |phi: &Formula, psi: &Formula| normal_core(&Formula::l_of(agent, r.clone(), phi.clone())) && is_positive_combination(psi);
    if ok(a, b) {
        Some((a, b, true))
    } else if ok(b, a) {
        Some((b, a, false))
    } else {
        None
    }
}

fn normal_core(f: &Formula) -> bool {
    if f.depth() <= 1 {
        return true;
    }
    if is_boolean(f) {
        let mut leaves = Vec::new();
        boolean_leaves(f, &mut leaves);
        return leaves.iter().all(|l| matches!(l, Formula::L { .. }) && normal_core(l));
    }
    match f {
        Formula::L { agent, r, body } if positive_index(r) => {
            is_positive_combination(body) || split_clause_three(r, *agent, body).is_some()
        }
        _ => false,
    }
}

/// Whether `f` is built by the three normality clauses (after replacing
/// `M_r φ` by `L_{1-r} ¬φ`).
pub fn is_normal(f: &Formula) -> bool {
    !f.has_knowledge() && f.agents().len() <= 1 && normal_core(&f.desugar_m())
}

fn denest_core(f: &Formula) -> Result<Formula, RewriteError> {
    if f.depth() <= 1 {
        return Ok(f.clone());
    }
    if is_boolean(f) {
        return map_leaves(f, &mut |leaf| denest_core(leaf));
    }
    let not_normal = || RewriteError::NotNormal(f.render());
    let Formula::L { agent, r, body } = f else {
        return Err(not_normal());
    };
    if !positive_index(r) {
        return Err(not_normal());
    }
    if is_positive_combination(body) {
        return map_leaves(body, &mut |leaf| denest_core(leaf));
    }
    let (phi, psi, phi_left) = split_clause_three(r, *agent, body).ok_or_else(not_normal)?;
    let lhs = denest_core(&Formula::l_of(*agent, r.clone(), phi.clone()))?;
    let rhs = map_leaves(psi, &mut |leaf| denest_core(leaf))?;
    let (a, b) = if phi_left { (lhs, rhs) } else { (rhs, lhs) };
    Ok(match body.as_ref() {
        Formula::And(..) => a.and(b),
        _ => a.or(b),
    })
}

/// Rewrites a normal formula into an equivalent one of depth at most one.
/// Formulas already of depth at most one are returned unchanged.
pub fn denest(f: &Formula) -> Result<Formula, RewriteError> {
    if f.depth() <= 1 {
        return Ok(f.clone());
    }
    if !is_normal(f) {
        return Err(RewriteError::NotNormal(f.render()));
    }
    denest_core(&f.desugar_m())
}

/// The canonical conjunction describing one atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub prop_part: Vec<Formula>,
    pub prob_part: Vec<Formula>,
}

impl Statement {
    pub fn to_formula(&self) -> Formula {
        Formula::conj(self.prop_part.iter().chain(&self.prob_part).cloned())
    }
}

/// The statement of canonical-model state `state`.
pub fn statement(model: &CanonicalModel, state: usize) -> Statement {
    let atom = model.atom(state);
    let spec = model.spec_of(state);
    let prop_part = model
        .letters()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if atom.prop >> i & 1 == 1 {
                Formula::Letter(p)
            } else {
                Formula::Letter(p).not()
            }
        })
        .collect();
    let mut prob_part = Vec::new();
    for e in model.event_space().representatives() {
        let phi = model.event_formula(e);
        let idx = |r: &crate::exactnum::Rational| ProbIndex::new(r.clone()).expect("grid value in [0, 1]");
        match spec.bracket(e) {
            Bracket::Point(a) => {
                prob_part.push(Formula::l(idx(a), phi.clone()));
                prob_part.push(Formula::m(idx(a), phi));
            }
            Bracket::Open(a, b) => {
                prob_part.push(Formula::l(idx(a), phi.clone()));
                prob_part.push(Formula::m(idx(a), phi.clone()).not());
                prob_part.push(Formula::m(idx(b), phi.clone()));
                prob_part.push(Formula::l(idx(b), phi).not());
            }
        }
    }
    Statement { prop_part, prob_part }
}

/// [`statement`] as a single formula.
pub fn statement_of(model: &CanonicalModel, state: usize) -> Formula {
    statement(model, state).to_formula()
}

/// Statements of exactly the atoms of `lang` whose canonical state satisfies `f`.
pub fn normal_form(f: &Formula, lang: &LocalLanguage) -> Result<Vec<Statement>, RewriteError> {
    if !lang.contains(f) {
        return Err(RewriteError::NotInLanguage {
            q: lang.q,
            d: lang.d,
            letters: lang.letters.iter().copied().collect(),
        });
    }
    if let Some(&a) = f.agents().iter().find(|&&a| a != 1) {
        return Err(CanonError::MultiAgent(a).into());
    }
    let letters: Vec<u32> = lang.letters.iter().copied().collect();
    let model = canonical_model(lang.q, &letters)?;
    let ext = model.space().extension(f).map_err(CanonError::from)?;
    Ok(ext.ones().map(|s| statement(&model, s)).collect())
}
