//! Seeded random formulas and models for property tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactnum::{rat, Rational};
use crate::formula::{grid, AgentId, Formula, ProbIndex};
use crate::models::FiniteTypeSpace;
use crate::rewrite::is_normal;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<'a, T, R: Rng>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("nonempty choice")
}

/// Random propositional formula over `letters` with at most `size` connectives.
pub fn random_prop<R: Rng>(rng: &mut R, letters: &[u32], size: usize) -> Formula {
    if size == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => Formula::letter(*pick(rng, letters)),
        };
    }
    let left = size / 2;
    match rng.gen_range(0..5) {
        0 => random_prop(rng, letters, size - 1).not(),
        1 => random_prop(rng, letters, left).and(random_prop(rng, letters, size - 1 - left)),
        2 => random_prop(rng, letters, left).or(random_prop(rng, letters, size - 1 - left)),
        3 => random_prop(rng, letters, left).implies(random_prop(rng, letters, size - 1 - left)),
        _ => random_prop(rng, letters, left).iff(random_prop(rng, letters, size - 1 - left)),
    }
}

fn random_index<R: Rng>(rng: &mut R, q: u64) -> ProbIndex {
    pick(rng, &grid(q)).clone()
}

fn random_modal<R: Rng>(rng: &mut R, q: u64, agent: AgentId, body: Formula) -> Formula {
    let r = random_index(rng, q);
    if rng.gen_bool(0.5) {
        Formula::l_of(agent, r, body)
    } else {
        Formula::m_of(agent, r, body)
    }
}

/// Random Boolean combination of `leaves`, each used once, with random negations.
fn combine<R: Rng>(rng: &mut R, mut leaves: Vec<Formula>) -> Formula {
    leaves.shuffle(rng);
    let mut acc: Option<Formula> = None;
    for leaf in leaves {
        let leaf = if rng.gen_bool(0.3) { leaf.not() } else { leaf };
        acc = Some(match acc {
            None => leaf,
            Some(a) => match rng.gen_range(0..4) {
                0 | 1 => a.and(leaf),
                2 => a.or(leaf),
                _ => a.implies(leaf),
            },
        });
    }
    acc.unwrap_or(Formula::Top)
}

/// Random formula of depth at most one for a single agent: a Boolean
/// combination of up to `modal` modal atoms over propositional bodies and
/// some bare letters.
pub fn random_depth1<R: Rng>(rng: &mut R, q: u64, letters: &[u32], modal: usize) -> Formula {
    let count = rng.gen_range(1..=modal.max(1));
    let mut leaves: Vec<Formula> = (0..count)
        .map(|_| {
            let body = random_prop(rng, letters, 2);
            random_modal(rng, q, 1, body)
        })
        .collect();
    if rng.gen_bool(0.5) {
        leaves.push(random_prop(rng, letters, 1));
    }
    combine(rng, leaves)
}

/// Random formula of modal depth at most `depth` using the given agents,
/// optionally with knowledge operators.
pub fn random_formula<R: Rng>(rng: &mut R, q: u64, letters: &[u32], agents: &[AgentId], depth: usize, knowledge: bool) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return random_prop(rng, letters, 2);
    }
    let agent = *pick(rng, agents);
    let body = random_formula(rng, q, letters, agents, depth - 1, knowledge);
    let modal = if knowledge && rng.gen_bool(0.25) {
        Formula::k(agent, body)
    } else {
        random_modal(rng, q, agent, body)
    };
    match rng.gen_range(0..4) {
        0 => modal.not(),
        1 => modal.and(random_formula(rng, q, letters, agents, depth - 1, knowledge)),
        2 => modal.or(random_formula(rng, q, letters, agents, depth - 1, knowledge)),
        _ => modal,
    }
}

fn positive_index<R: Rng>(rng: &mut R, q: u64) -> ProbIndex {
    pick(rng, &grid(q)[1..]).clone()
}

/// `L_r` with `r > 0` over a normal body, of depth at most `depth`.
fn normal_l<R: Rng>(rng: &mut R, q: u64, letter: u32, depth: usize) -> Formula {
    let r = positive_index(rng, q);
    if depth <= 1 {
        return Formula::l(r, random_prop(rng, &[letter], 2));
    }
    let body = match rng.gen_range(0..3) {
        0 => positive_combination(rng, q, letter, depth - 1),
        _ => {
            let phi = if rng.gen_bool(0.5) {
                random_prop(rng, &[letter], 1)
            } else {
                match normal_l(rng, q, letter, depth - 1) {
                    Formula::L { body, .. } => *body,
                    other => other,
                }
            };
            let psi = positive_combination(rng, q, letter, depth - 1);
            let (a, b) = if rng.gen_bool(0.5) { (phi, psi) } else { (psi, phi) };
            if rng.gen_bool(0.5) { a.and(b) } else { a.or(b) }
        }
    };
    Formula::l(r, body)
}

fn positive_combination<R: Rng>(rng: &mut R, q: u64, letter: u32, depth: usize) -> Formula {
    let count = rng.gen_range(1..=2);
    let leaves = (0..count).map(|_| normal_l(rng, q, letter, depth)).collect();
    combine(rng, leaves)
}

/// Random normal formula over one letter with depth at most `max_depth` and
/// indices from `grid(q)`. Candidates are drawn until one passes the
/// normality check.
pub fn random_normal<R: Rng>(rng: &mut R, q: u64, letter: u32, max_depth: usize) -> Formula {
    loop {
        let depth = rng.gen_range(1..=max_depth.max(1));
        let candidate = if rng.gen_bool(0.3) {
            positive_combination(rng, q, letter, depth)
        } else {
            normal_l(rng, q, letter, depth)
        };
        if candidate.depth() <= max_depth && is_normal(&candidate) {
            return candidate;
        }
    }
}

/// A random probability vector over `support` with values in multiples of `1/den`.
fn grid_distribution<R: Rng>(rng: &mut R, n: usize, support: &[usize], den: u64) -> Vec<Rational> {
    let mut units = vec![0i64; n];
    for _ in 0..den {
        units[*pick(rng, support)] += 1;
    }
    units.into_iter().map(|u| rat(u, den as i64)).collect()
}

fn random_valuation<R: Rng>(rng: &mut R, n: usize, letters: &[u32]) -> BTreeMap<u32, Vec<usize>> {
    letters.iter().map(|&p| (p, (0..n).filter(|_| rng.gen_bool(0.5)).collect())).collect()
}

/// Random one-agent Harsanyi space: states are split into random cells and
/// each cell gets one distribution supported inside it.
pub fn random_harsanyi<R: Rng>(rng: &mut R, n: usize, den: u64, letters: &[u32]) -> FiniteTypeSpace {
    let cells = rng.gen_range(1..=n);
    let mut labels: Vec<usize> = (0..n).map(|s| if s < cells { s } else { rng.gen_range(0..cells) }).collect();
    labels.shuffle(rng);
    let mut rows: Vec<Vec<Rational>> = vec![Vec::new(); n];
    for c in 0..cells {
        let members: Vec<usize> = (0..n).filter(|&s| labels[s] == c).collect();
        let dist = grid_distribution(rng, n, &members, den);
        for &s in &members {
            rows[s] = dist.clone();
        }
    }
    let valuation = random_valuation(rng, n, letters);
    FiniteTypeSpace::from_dense(vec![rows], valuation).expect("generated rows are distributions")
}

/// Random type space with `agents` kernels whose rows are independent grid
/// distributions over all states; usually not Harsanyi.
pub fn random_type_space<R: Rng>(rng: &mut R, n: usize, agents: usize, den: u64, letters: &[u32]) -> FiniteTypeSpace {
    let all: Vec<usize> = (0..n).collect();
    let kernels = (0..agents)
        .map(|_| (0..n).map(|_| grid_distribution(rng, n, &all, den)).collect())
        .collect();
    let valuation = random_valuation(rng, n, letters);
    FiniteTypeSpace::from_dense(kernels, valuation).expect("generated rows are distributions")
}
