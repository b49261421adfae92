//! Markov kernels between finite spaces.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::dist::{validate_probability_vector, Distribution};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tol};
use crate::space::{FiniteSpace, Statistic};

/// Markov kernel from `source` to `target`: one probability row per
/// source point, columns in target order. Rows are validated at
/// construction, so every kernel value is row-stochastic.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<S: Scalar> {
    source: FiniteSpace,
    target: FiniteSpace,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Kernel<S> {
    pub fn new(source: FiniteSpace, target: FiniteSpace, rows: Vec<Vec<S>>) -> Result<Self> {
        Self::with_tol(source, target, rows, Tol::default())
    }

    pub fn with_tol(
        source: FiniteSpace,
        target: FiniteSpace,
        rows: Vec<Vec<S>>,
        tol: Tol,
    ) -> Result<Self> {
        if rows.len() != source.len() {
            return Err(Error::LengthMismatch {
                context: "kernel rows",
                expected: source.len(),
                found: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            validate_probability_vector(&target, row, tol).map_err(|e| Error::RowNotStochastic {
                row: source.label(i).to_string(),
                detail: e.to_string(),
            })?;
        }
        Ok(Kernel { source, target, rows })
    }

    /// Skips validation; callers guarantee stochastic rows.
    pub(crate) fn new_unchecked(source: FiniteSpace, target: FiniteSpace, rows: Vec<Vec<S>>) -> Self {
        Kernel { source, target, rows }
    }

    /// Identity kernel: the Dirac kernel of the identity map.
    pub fn identity(space: &FiniteSpace) -> Self {
        Self::dirac(&Statistic::identity(space))
    }

    /// Deterministic kernel of a statistic: row `w` is the point mass at
    /// `T(w)`.
    pub fn dirac(statistic: &Statistic) -> Self {
        let n = statistic.source().len();
        let m = statistic.target().len();
        let rows = (0..n)
            .map(|i| {
                let mut row = alloc::vec![S::zero(); m];
                row[statistic.apply_index(i)] = S::one();
                row
            })
            .collect();
        Kernel {
            source: statistic.source().clone(),
            target: statistic.target().clone(),
            rows,
        }
    }

    /// Kernel that ignores its input: every row is `d`.
    pub fn constant(source: FiniteSpace, d: &Distribution<S>) -> Self {
        let rows = (0..source.len()).map(|_| d.mass().to_vec()).collect();
        Kernel { source, target: d.space().clone(), rows }
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn row(&self, source_index: usize) -> &[S] {
        &self.rows[source_index]
    }

    pub fn entry(&self, source_index: usize, target_index: usize) -> &S {
        &self.rows[source_index][target_index]
    }

    /// Row as a standalone distribution on the target space.
    pub fn row_distribution(&self, source_index: usize) -> Distribution<S> {
        Distribution::new_unchecked(self.target.clone(), self.rows[source_index].clone())
    }

    /// True when every row is a point mass with exact 0/1 entries.
    pub fn is_deterministic(&self) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().all(|x| x.is_zero() || x.is_one()) && {
                let ones = row.iter().filter(|x| x.is_one()).count();
                ones == 1
            })
    }

    /// Recovers the statistic of a deterministic kernel.
    pub fn as_statistic(&self) -> Option<Statistic> {
        let mut map = Vec::with_capacity(self.source.len());
        for row in &self.rows {
            let mut hit = None;
            for (j, x) in row.iter().enumerate() {
                if x.is_one() && hit.replace(j).is_some() {
                    return None;
                } else if !x.is_one() && !x.is_zero() {
                    return None;
                }
            }
            map.push(hit?);
        }
        Some(Statistic::from_indices(self.source.clone(), self.target.clone(), map).unwrap())
    }
}
