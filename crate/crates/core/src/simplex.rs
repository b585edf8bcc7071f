//! Exact rational linear programming: dense two-phase tableau simplex with
//! Bland's anti-cycling rule.
//!
//! Problems are stated as `minimize c·x` subject to linear constraints and
//! `x ≥ 0`. Every pivot is exact, so termination follows from Bland's rule.

use num_traits::{Signed, Zero};

use crate::linalg::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    // m constraint rows followed by the objective row; last column is the rhs
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.t[row][col].recip();
        for v in self.t[row].iter_mut() {
            *v *= &inv;
        }
        let prow = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].is_zero() {
                continue;
            }
            let f = line[col].clone();
            for (c, p) in prow.iter().enumerate() {
                if !p.is_zero() {
                    line[c] -= &f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs the simplex on the objective row over the first `active` columns.
    /// Returns false when unbounded.
    fn optimize(&mut self, active: usize) -> bool {
        let obj = self.m();
        let rhs = self.ncols;
        loop {
            // Bland: lowest-index column with negative reduced cost enters
            let Some(col) = (0..active).find(|&c| self.t[obj][c].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..obj {
                if !self.t[r][col].is_positive() {
                    continue;
                }
                let ratio = &self.t[r][rhs] / &self.t[r][col];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// Solves `minimize objective·x` subject to `constraints` and `x ≥ 0`.
pub fn minimize(objective: &[Rational], constraints: &[Constraint]) -> LpOutcome {
    let n = objective.len();
    for c in constraints {
        assert_eq!(c.coeffs.len(), n, "constraint width mismatch");
    }

    // normalise to non-negative right-hand sides
    let rows: Vec<(Vec<Rational>, Relation, Rational)> = constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                let rel = match c.relation {
                    Relation::LessEq => Relation::GreaterEq,
                    Relation::GreaterEq => Relation::LessEq,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect();

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::LessEq).count();
    let real = n + n_slack;
    let ncols = real + n_art;

    let mut t = vec![vec![Rational::zero(); ncols + 1]; m + 1];
    let mut basis = vec![0; m];
    let mut slack = n;
    let mut art = real;
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t[i][..n].clone_from_slice(coeffs);
        t[i][ncols] = rhs.clone();
        match rel {
            Relation::LessEq => {
                t[i][slack] = Rational::from_integer(1.into());
                basis[i] = slack;
                slack += 1;
            }
            Relation::GreaterEq => {
                t[i][slack] = Rational::from_integer((-1).into());
                slack += 1;
                t[i][art] = Rational::from_integer(1.into());
                basis[i] = art;
                art += 1;
            }
            Relation::Eq => {
                t[i][art] = Rational::from_integer(1.into());
                basis[i] = art;
                art += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, ncols };

    if n_art > 0 {
        // phase I objective: sum of artificials, expressed in non-basic terms
        for c in real..ncols {
            tab.t[m][c] = Rational::from_integer(1.into());
        }
        for r in 0..m {
            if tab.basis[r] >= real {
                for c in 0..=ncols {
                    let v = tab.t[r][c].clone();
                    tab.t[m][c] -= v;
                }
            }
        }
        tab.optimize(ncols);
        if !tab.t[m][ncols].is_zero() {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < tab.m() {
            if tab.basis[r] >= real {
                if let Some(c) = (0..real).find(|&c| !tab.t[r][c].is_zero()) {
                    tab.pivot(r, c);
                } else {
                    // redundant row
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
    }

    // phase II: drop artificial columns and install the real objective
    let m = tab.m();
    for line in tab.t.iter_mut() {
        let rhs = line[ncols].clone();
        line.truncate(real);
        line.push(rhs);
    }
    tab.ncols = real;
    let obj = m;
    for c in 0..=real {
        tab.t[obj][c] = Rational::zero();
    }
    tab.t[obj][..n].clone_from_slice(objective);
    for r in 0..m {
        let b = tab.basis[r];
        if !tab.t[obj][b].is_zero() {
            let f = tab.t[obj][b].clone();
            for c in 0..=real {
                let delta = &f * &tab.t[r][c];
                tab.t[obj][c] -= delta;
            }
        }
    }
    if !tab.optimize(real) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.t[r][real].clone();
        }
    }
    let value = -tab.t[obj][real].clone();
    LpOutcome::Optimal { value, x }
}
