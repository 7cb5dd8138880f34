//! Dense two-phase primal simplex over exact rationals with Bland's rule.

use num_traits::{One, Signed, Zero};

use super::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRelation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub relation: RowRelation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = self.rows[pr][pc].recip();
        for v in self.rows[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[pr]);
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[pc].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let d = &f * &pivot_row[j];
                row[j] -= d;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != pr {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[pr] = pivot_row;
        self.basis[pr] = pc;
    }

    /// Maximizes the objective encoded in `obj` over the allowed columns.
    /// Returns `false` if unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && self.obj[j].is_negative());
            let Some(pc) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][pc];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return false,
            }
        }
    }

    fn load_objective(&mut self, cost: &[Rational]) {
        let mut obj: Vec<Rational> = (0..=self.width)
            .map(|j| if j < self.width { -cost[j].clone() } else { Rational::zero() })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    obj[j] += cb * v;
                }
            }
        }
        self.obj = obj;
    }
}

/// Maximizes `objective · x` subject to `rows` and `x ≥ 0`.
pub fn solve(num_vars: usize, rows: &[Row], objective: &[Rational]) -> LpOutcome {
    let m = rows.len();
    let mut norm: Vec<(Vec<Rational>, RowRelation, Rational)> = rows
        .iter()
        .map(|r| {
            debug_assert_eq!(r.coeffs.len(), num_vars);
            if r.rhs.is_negative() {
                let rel = match r.relation {
                    RowRelation::Le => RowRelation::Ge,
                    RowRelation::Ge => RowRelation::Le,
                    RowRelation::Eq => RowRelation::Eq,
                };
                (r.coeffs.iter().map(|c| -c.clone()).collect(), rel, -r.rhs.clone())
            } else {
                (r.coeffs.clone(), r.relation, r.rhs.clone())
            }
        })
        .collect();

    let n_slack = norm.iter().filter(|r| r.1 != RowRelation::Eq).count();
    let n_art = norm.iter().filter(|r| r.1 != RowRelation::Le).count();
    let art_start = num_vars + n_slack;
    let width = art_start + n_art;

    let mut tab_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (num_vars, art_start);
    for (coeffs, rel, rhs) in norm.drain(..) {
        let mut row = coeffs;
        row.resize(width + 1, Rational::zero());
        row[width] = rhs;
        match rel {
            RowRelation::Le => {
                row[s] = Rational::one();
                basis.push(s);
                s += 1;
            }
            RowRelation::Ge => {
                row[s] = -Rational::one();
                s += 1;
                row[a] = Rational::one();
                basis.push(a);
                a += 1;
            }
            RowRelation::Eq => {
                row[a] = Rational::one();
                basis.push(a);
                a += 1;
            }
        }
        tab_rows.push(row);
    }

    let mut t = Tableau {
        rows: tab_rows,
        obj: Vec::new(),
        basis,
        width,
    };

    if n_art > 0 {
        let cost: Vec<Rational> = (0..width)
            .map(|j| if j >= art_start { -Rational::one() } else { Rational::zero() })
            .collect();
        t.load_objective(&cost);
        let all = vec![true; width];
        t.optimize(&all);
        if t.obj[width].is_negative() {
            return LpOutcome::Infeasible;
        }
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut cost = vec![Rational::zero(); width];
    cost[..num_vars].clone_from_slice(objective);
    t.load_objective(&cost);
    let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
    if !t.optimize(&allowed) {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![Rational::zero(); num_vars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < num_vars {
            point[b] = t.rows[i][width].clone();
        }
    }
    LpOutcome::Optimal {
        value: t.obj[width].clone(),
        point,
    }
}
