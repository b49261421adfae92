//! Dense two-phase simplex over an arbitrary scalar backend.
//!
//! Solves `max c.x  s.t.  A x = b, x >= 0`. Used to pick vertices of the
//! unbiasedness polytope: a random objective lands on a vertex, and with
//! exact arithmetic the vertex is exact. Bland's rule keeps the pivoting
//! finite. Problems here are small (tens of variables), so a plain
//! tableau is the right tool.

use alloc::vec::Vec;

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome<S> {
    Optimal(Vec<S>),
    Infeasible,
    Unbounded,
}

struct Tableau<S: Scalar> {
    /// `rows[i]` has `ncols` structural/artificial entries plus the rhs.
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    nstruct: usize,
    ncols: usize,
    eps: f64,
}

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        &self.rows[i][self.ncols]
    }

    fn is_positive(&self, x: &S) -> bool {
        S::zero().lt_beyond(x, self.eps)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for x in self.rows[row].iter_mut() {
            *x = x.clone() / p.clone();
        }
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for j in 0..=self.ncols {
                let delta = f.clone() * self.rows[row][j].clone();
                self.rows[i][j] = self.rows[i][j].clone() - delta;
            }
        }
        self.basis[row] = col;
    }

    /// Bland's leaving rule: among minimum-ratio rows, the smallest basic
    /// index. `None` when the column never blocks (unbounded direction).
    fn leaving_row(&self, col: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.rows.len() {
            if !self.is_positive(&self.rows[i][col]) {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) => {
                    let lhs = self.rhs(i).clone() * self.rows[b][col].clone();
                    let rhs = self.rhs(b).clone() * self.rows[i][col].clone();
                    if lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[b]) {
                        best = Some(i);
                    }
                }
            }
        }
        best
    }

    /// Runs simplex for the reduced-cost row `obj` (indexed like columns,
    /// rhs slot holds the objective value). `allowed` limits entering
    /// columns. Returns false on an unbounded direction.
    fn run(&mut self, obj: &mut Vec<S>, allowed: usize) -> bool {
        loop {
            // Bland's entering rule: first allowed column with positive
            // reduced cost.
            let entering = (0..allowed)
                .find(|&j| !self.basis.contains(&j) && self.is_positive(&obj[j]));
            let Some(col) = entering else {
                return true;
            };
            let Some(row) = self.leaving_row(col) else {
                return false;
            };
            self.pivot(row, col);
            // Price the objective row through the pivot row.
            let f = obj[col].clone();
            if !f.is_zero() {
                for j in 0..=self.ncols {
                    let delta = f.clone() * self.rows[row][j].clone();
                    obj[j] = obj[j].clone() - delta;
                }
            }
        }
    }
}

/// Maximizes `c.x` over `A x = b, x >= 0`.
pub(crate) fn maximize<S: Scalar>(a: &[Vec<S>], b: &[S], c: &[S], eps: f64) -> LpOutcome<S> {
    let m = a.len();
    let n = c.len();
    let ncols = n + m;
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(m);
    for (i, arow) in a.iter().enumerate() {
        debug_assert_eq!(arow.len(), n);
        // Normalize to a nonnegative rhs, then append the artificial
        // identity column and the rhs.
        let flip = b[i] < S::zero();
        let mut row: Vec<S> = arow
            .iter()
            .map(|x| if flip { -x.clone() } else { x.clone() })
            .collect();
        for k in 0..m {
            row.push(if k == i { S::one() } else { S::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    let basis: Vec<usize> = (n..n + m).collect();
    let mut t = Tableau { rows, basis, nstruct: n, ncols, eps };

    // Phase 1: minimize the artificial total. The reduced-cost row for
    // that objective is the columnwise sum of the constraint rows over
    // the structural columns.
    let mut w = alloc::vec![S::zero(); ncols + 1];
    for row in &t.rows {
        for j in 0..n {
            w[j] = w[j].clone() + row[j].clone();
        }
        w[ncols] = w[ncols].clone() + row[ncols].clone();
    }
    let bounded = t.run(&mut w, n);
    debug_assert!(bounded, "phase 1 is bounded below by zero");
    if !w[ncols].is_zero_within(eps) {
        return LpOutcome::Infeasible;
    }
    // Drive leftover artificial basics out on any nonzero structural
    // entry; rows that cannot pivot are redundant and harmless.
    for i in 0..t.rows.len() {
        if t.basis[i] >= t.nstruct {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero_within(eps)) {
                t.pivot(i, j);
            }
        }
    }

    // Phase 2: price the real objective against the current basis.
    let mut obj = alloc::vec![S::zero(); ncols + 1];
    obj[..n].clone_from_slice(c);
    for i in 0..t.rows.len() {
        let bi = t.basis[i];
        if bi < n && !obj[bi].is_zero() {
            let f = obj[bi].clone();
            for j in 0..=ncols {
                let delta = f.clone() * t.rows[i][j].clone();
                obj[j] = obj[j].clone() - delta;
            }
        }
    }
    if !t.run(&mut obj, n) {
        return LpOutcome::Unbounded;
    }

    let mut x = alloc::vec![S::zero(); n];
    for i in 0..t.rows.len() {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i).clone();
        }
    }
    LpOutcome::Optimal(x)
}
