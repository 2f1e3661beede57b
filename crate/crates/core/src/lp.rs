//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems here are tiny (a few dozen variables), so a dense tableau is
//! simpler and more robust than anything sparse.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row<T> {
    coeffs: Vec<T>,
    rel: Relation,
    rhs: T,
}

/// `minimize c·x` subject to linear rows; variables are nonnegative unless
/// marked free.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    n: usize,
    objective: Vec<T>,
    rows: Vec<Row<T>>,
    free: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            objective: vec![T::zero(); n],
            rows: Vec::new(),
            free: vec![false; n],
        }
    }

    pub fn minimize(mut self, c: Vec<T>) -> Self {
        assert_eq!(c.len(), self.n);
        self.objective = c;
        self
    }

    pub fn free(mut self, j: usize) -> Self {
        self.free[j] = true;
        self
    }

    pub fn all_free(mut self) -> Self {
        self.free.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn constraint(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) {
        assert_eq!(coeffs.len(), self.n);
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn le(&mut self, coeffs: Vec<T>, rhs: T) {
        self.constraint(coeffs, Relation::Le, rhs)
    }

    pub fn ge(&mut self, coeffs: Vec<T>, rhs: T) {
        self.constraint(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(&mut self, coeffs: Vec<T>, rhs: T) {
        self.constraint(coeffs, Relation::Eq, rhs)
    }

    pub fn solve(&self) -> Result<LpOutcome<T>> {
        let tol = T::epsilon().powf(T::lit(0.6));
        // column layout: structural (free ones split in two), slacks, artificials
        let mut col_of = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for j in 0..self.n {
            col_of.push(ncols);
            ncols += if self.free[j] { 2 } else { 1 };
        }
        let n_struct = ncols;
        let m = self.rows.len();
        let n_slack = self.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let n_art = self
            .rows
            .iter()
            .filter(|r| {
                let flip = r.rhs < T::zero();
                match r.rel {
                    Relation::Eq => true,
                    Relation::Le => flip,
                    Relation::Ge => !flip,
                }
            })
            .count();
        let total = n_struct + n_slack + n_art;
        let rhs_col = total;

        let mut tab = vec![vec![T::zero(); total + 1]; m];
        let mut basis = vec![0usize; m];
        let mut slack = n_struct;
        let mut art = n_struct + n_slack;
        for (i, row) in self.rows.iter().enumerate() {
            let sign = if row.rhs < T::zero() { -T::one() } else { T::one() };
            for j in 0..self.n {
                let v = sign * row.coeffs[j];
                tab[i][col_of[j]] = v;
                if self.free[j] {
                    tab[i][col_of[j] + 1] = -v;
                }
            }
            tab[i][rhs_col] = sign * row.rhs;
            let rel = match (row.rel, sign < T::zero()) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            match rel {
                Relation::Le => {
                    tab[i][slack] = T::one();
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    tab[i][slack] = -T::one();
                    slack += 1;
                    tab[i][art] = T::one();
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    tab[i][art] = T::one();
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        let first_art = n_struct + n_slack;
        let mut t = Tableau { tab, basis, tol };

        if n_art > 0 {
            let mut cost = vec![T::zero(); total];
            for c in cost.iter_mut().skip(first_art) {
                *c = T::one();
            }
            let mut obj = t.objective_row(&cost);
            match t.run(&mut obj, total)? {
                Phase::Optimal => {}
                Phase::Unbounded => unreachable!("phase one is bounded below by zero"),
            }
            let infeas = -obj[rhs_col];
            let scale = T::one() + self.rows.iter().map(|r| r.rhs.abs()).fold(T::zero(), T::max);
            if infeas > tol * scale {
                return Ok(LpOutcome::Infeasible);
            }
            t.drive_out_artificials(first_art);
        }

        let mut cost = vec![T::zero(); total];
        for j in 0..self.n {
            cost[col_of[j]] = self.objective[j];
            if self.free[j] {
                cost[col_of[j] + 1] = -self.objective[j];
            }
        }
        let mut obj = t.objective_row(&cost);
        match t.run(&mut obj, first_art)? {
            Phase::Unbounded => return Ok(LpOutcome::Unbounded),
            Phase::Optimal => {}
        }
        let mut raw = vec![T::zero(); total];
        for (i, &b) in t.basis.iter().enumerate() {
            raw[b] = t.tab[i][rhs_col];
        }
        let x: Vec<T> = (0..self.n)
            .map(|j| {
                let v = raw[col_of[j]];
                if self.free[j] {
                    v - raw[col_of[j] + 1]
                } else {
                    v
                }
            })
            .collect();
        let value = crate::scalar::dot(&self.objective, &x);
        Ok(LpOutcome::Optimal { x, value })
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau<T> {
    tab: Vec<Vec<T>>,
    basis: Vec<usize>,
    tol: T,
}

impl<T: Scalar> Tableau<T> {
    fn objective_row(&self, cost: &[T]) -> Vec<T> {
        let mut obj: Vec<T> = cost.to_vec();
        obj.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != T::zero() {
                for (o, &a) in obj.iter_mut().zip(&self.tab[i]) {
                    *o -= cb * a;
                }
            }
        }
        obj
    }

    fn pivot(&mut self, obj: &mut [T], r: usize, c: usize) {
        let piv = self.tab[r][c];
        for v in self.tab[r].iter_mut() {
            *v /= piv;
        }
        let prow = self.tab[r].clone();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != T::zero() {
                    for (v, &p) in row.iter_mut().zip(&prow) {
                        *v -= f * p;
                    }
                    row[c] = T::zero();
                }
            }
        }
        let f = obj[c];
        if f != T::zero() {
            for (v, &p) in obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `< allowed` using Bland's rule.
    fn run(&mut self, obj: &mut [T], allowed: usize) -> Result<Phase> {
        let rhs = obj.len() - 1;
        let cap = 50_000;
        for _ in 0..cap {
            let Some(c) = (0..allowed).find(|&j| obj[j] < -self.tol) else {
                return Ok(Phase::Optimal);
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.tab.iter().enumerate() {
                let a = row[c];
                if a > self.tol {
                    let ratio = row[rhs] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let close = (ratio - br).abs() <= self.tol * (T::one() + br.abs());
                            if ratio < br && !close || close && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(Phase::Unbounded),
                Some((r, _)) => self.pivot(obj, r, c),
            }
        }
        Err(Error::Degenerate("simplex iteration limit reached".into()))
    }

    /// After phase one, pivots remaining zero-level artificial variables
    /// out of the basis, dropping rows that turn out to be redundant.
    fn drive_out_artificials(&mut self, first_art: usize) {
        let mut i = 0;
        while i < self.basis.len() {
            if self.basis[i] >= first_art {
                let col = (0..first_art).find(|&j| self.tab[i][j].abs() > self.tol);
                match col {
                    Some(c) => {
                        let mut dummy = vec![T::zero(); self.tab[i].len()];
                        self.pivot(&mut dummy, i, c);
                    }
                    None => {
                        self.tab.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
