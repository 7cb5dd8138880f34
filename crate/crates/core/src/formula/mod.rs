//! Belief and knowledge formulas: AST, text syntax, and syntactic measures.

mod parser;

pub use parser::{parse, ParseError, ParseErrorKind};

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::exactnum::{rat, Rational};

pub type AgentId = u32;

/// A rational in `[0, 1]` indexing an `L_r` or `M_r` modality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbIndex(Rational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("probability index {0} is outside [0, 1]")]
pub struct IndexOutOfRange(pub String);

impl ProbIndex {
    pub fn new(value: Rational) -> Result<Self, IndexOutOfRange> {
        if crate::exactnum::rational::is_unit_interval(&value) {
            Ok(ProbIndex(value))
        } else {
            Err(IndexOutOfRange(crate::exactnum::format_rational(&value)))
        }
    }

    /// Panics if `num/den` is not in `[0, 1]`.
    pub fn of(num: i64, den: i64) -> Self {
        ProbIndex::new(rat(num, den)).expect("index in [0, 1]")
    }

    pub fn zero() -> Self {
        ProbIndex(Rational::zero())
    }

    pub fn one() -> Self {
        ProbIndex(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn complement(&self) -> Self {
        ProbIndex(Rational::one() - &self.0)
    }

    pub fn denominator(&self) -> u64 {
        self.0.denom().to_u64().expect("denominator fits in u64")
    }
}

impl fmt::Display for ProbIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Letter(u32),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    L { agent: AgentId, r: ProbIndex, body: Box<Formula> },
    M { agent: AgentId, r: ProbIndex, body: Box<Formula> },
    K { agent: AgentId, body: Box<Formula> },
}

impl Formula {
    pub fn letter(id: u32) -> Formula {
        assert!(id > 0, "letters are numbered from 1");
        Formula::Letter(id)
    }

    pub fn not(self) -> Formula {
        Formula::Neg(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn iff(self, other: Formula) -> Formula {
        Formula::Iff(Box::new(self), Box::new(other))
    }

    /// `L_r` for agent 1.
    pub fn l(r: ProbIndex, body: Formula) -> Formula {
        Formula::L { agent: 1, r, body: Box::new(body) }
    }

    /// `M_r` for agent 1.
    pub fn m(r: ProbIndex, body: Formula) -> Formula {
        Formula::M { agent: 1, r, body: Box::new(body) }
    }

    pub fn l_of(agent: AgentId, r: ProbIndex, body: Formula) -> Formula {
        Formula::L { agent, r, body: Box::new(body) }
    }

    pub fn m_of(agent: AgentId, r: ProbIndex, body: Formula) -> Formula {
        Formula::M { agent, r, body: Box::new(body) }
    }

    pub fn k(agent: AgentId, body: Formula) -> Formula {
        Formula::K { agent, body: Box::new(body) }
    }

    /// Left-folded conjunction; `Top` for an empty iterator.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-folded disjunction; `Bottom` for an empty iterator.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    /// Replaces every `M_r φ` by `L_{1-r} ¬φ`.
    pub fn desugar_m(&self) -> Formula {
        self.map_modal(&|node, body| match node {
            Formula::M { agent, r, .. } => Formula::l_of(*agent, r.complement(), body.not()),
            Formula::L { agent, r, .. } => Formula::l_of(*agent, r.clone(), body),
            Formula::K { agent, .. } => Formula::k(*agent, body),
            _ => unreachable!(),
        })
    }

    fn map_modal(&self, f: &dyn Fn(&Formula, Formula) -> Formula) -> Formula {
        match self {
            Formula::Top | Formula::Bottom | Formula::Letter(_) => self.clone(),
            Formula::Neg(a) => a.map_modal(f).not(),
            Formula::And(a, b) => a.map_modal(f).and(b.map_modal(f)),
            Formula::Or(a, b) => a.map_modal(f).or(b.map_modal(f)),
            Formula::Implies(a, b) => a.map_modal(f).implies(b.map_modal(f)),
            Formula::Iff(a, b) => a.map_modal(f).iff(b.map_modal(f)),
            Formula::L { body, .. } | Formula::M { body, .. } | Formula::K { body, .. } => f(self, body.map_modal(f)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Letter(_) => 0,
            Formula::Neg(a) => a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => a.depth().max(b.depth()),
            Formula::L { body, .. } | Formula::M { body, .. } | Formula::K { body, .. } => body.depth() + 1,
        }
    }

    /// Least common multiple of all index denominators; 1 if there are none.
    pub fn accuracy(&self) -> u64 {
        let mut q = 1u64;
        self.visit(&mut |node| {
            if let Formula::L { r, .. } | Formula::M { r, .. } = node {
                q = q.lcm(&r.denominator());
            }
        });
        q
    }

    pub fn letters(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |node| {
            if let Formula::Letter(p) = node {
                out.insert(*p);
            }
        });
        out
    }

    pub fn agents(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        self.visit(&mut |node| match node {
            Formula::L { agent, .. } | Formula::M { agent, .. } | Formula::K { agent, .. } => {
                out.insert(*agent);
            }
            _ => {}
        });
        out
    }

    pub fn indices(&self) -> BTreeSet<ProbIndex> {
        let mut out = BTreeSet::new();
        self.visit(&mut |node| {
            if let Formula::L { r, .. } | Formula::M { r, .. } = node {
                out.insert(r.clone());
            }
        });
        out
    }

    pub fn has_knowledge(&self) -> bool {
        let mut found = false;
        self.visit(&mut |node| found |= matches!(node, Formula::K { .. }));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Top | Formula::Bottom | Formula::Letter(_) => {}
            Formula::Neg(a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::L { body, .. } | Formula::M { body, .. } | Formula::K { body, .. } => body.visit(f),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

fn write_agent(f: &mut fmt::Formatter<'_>, agent: AgentId) -> fmt::Result {
    if agent == 1 {
        Ok(())
    } else {
        write!(f, "_{agent}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &Formula, b: &Formula, op: &str, right_assoc: bool| {
            let p = self.precedence();
            let (pa, pb) = if right_assoc { (p + 1, p) } else { (p, p + 1) };
            write_child(f, a, pa)?;
            write!(f, " {op} ")?;
            write_child(f, b, pb)
        };
        match self {
            Formula::Top => write!(f, "true"),
            Formula::Bottom => write!(f, "false"),
            Formula::Letter(p) => write!(f, "p{p}"),
            Formula::Neg(a) => {
                write!(f, "~")?;
                write_child(f, a, 5)
            }
            Formula::And(a, b) => binary(f, a, b, "&", false),
            Formula::Or(a, b) => binary(f, a, b, "|", false),
            Formula::Implies(a, b) => binary(f, a, b, "->", true),
            Formula::Iff(a, b) => binary(f, a, b, "<->", true),
            Formula::L { agent, r, body } | Formula::M { agent, r, body } => {
                write!(f, "{}", if matches!(self, Formula::L { .. }) { "L" } else { "M" })?;
                write_agent(f, *agent)?;
                write!(f, "[{r}] ")?;
                write_child(f, body, 5)
            }
            Formula::K { agent, body } => {
                write!(f, "K")?;
                write_agent(f, *agent)?;
                write!(f, " ")?;
                write_child(f, body, 5)
            }
        }
    }
}

/// The finite language of formulas with accuracy dividing `q`, depth at
/// most `d`, and letters drawn from `letters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalLanguage {
    pub q: u64,
    pub d: usize,
    pub letters: BTreeSet<u32>,
}

impl LocalLanguage {
    pub fn new(q: u64, d: usize, letters: impl IntoIterator<Item = u32>) -> Self {
        assert!(q > 0, "accuracy must be positive");
        LocalLanguage {
            q,
            d,
            letters: letters.into_iter().collect(),
        }
    }

    /// The smallest language containing `f`.
    pub fn of(f: &Formula) -> Self {
        LocalLanguage::new(f.accuracy(), f.depth(), f.letters())
    }

    /// Multiples of `1/q` in `[0, 1]`.
    pub fn grid(&self) -> Vec<ProbIndex> {
        grid(self.q)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.q % f.accuracy() == 0 && f.depth() <= self.d && f.letters().is_subset(&self.letters) && !f.has_knowledge()
    }
}

pub fn grid(q: u64) -> Vec<ProbIndex> {
    (0..=q as i64).map(|k| ProbIndex::of(k, q as i64)).collect()
}
