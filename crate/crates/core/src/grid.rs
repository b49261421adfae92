//! Numeric decorations of spaces: each point carries a vector in R^k.
//!
//! Kernels and statistics become real-valued once their target space has
//! a [`ValueGrid`]. Grids are also how value spaces are built: a list of
//! distinct vectors turns into a fresh space whose labels render the
//! vectors.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{FiniteSpace, Statistic};

/// Assignment of a vector in R^k to every point of a space. `dim >= 1`;
/// all vectors share the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueGrid<S: Scalar> {
    space: FiniteSpace,
    dim: usize,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> ValueGrid<S> {
    pub fn new(space: FiniteSpace, dim: usize, values: Vec<Vec<S>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::LengthMismatch { context: "grid dimension", expected: 1, found: 0 });
        }
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                context: "grid values",
                expected: space.len(),
                found: values.len(),
            });
        }
        for v in &values {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    context: "grid vector",
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(ValueGrid { space, dim, values })
    }

    /// One-dimensional grid from scalar values.
    pub fn scalar(space: FiniteSpace, values: Vec<S>) -> Result<Self> {
        let values = values.into_iter().map(|v| alloc::vec![v]).collect();
        Self::new(space, 1, values)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &[S] {
        &self.values[index]
    }

    /// Canonical label text for a value vector: bare scalar for k = 1,
    /// `[a|b|...]` otherwise.
    pub fn format_value(v: &[S]) -> String {
        if v.len() == 1 {
            alloc::format!("{}", v[0])
        } else {
            let mut out = String::from("[");
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push('|');
                }
                out.push_str(&alloc::format!("{x}"));
            }
            out.push(']');
            out
        }
    }

    /// Builds a space whose points are the listed value vectors, labeled
    /// by [`format_value`](Self::format_value). Vectors must be distinct.
    pub fn value_space(id: impl Into<String>, dim: usize, values: Vec<Vec<S>>) -> Result<(FiniteSpace, Self)> {
        let labels = values.iter().map(|v| Self::format_value(v)).collect();
        let space = FiniteSpace::new(id, labels)?;
        let grid = Self::new(space.clone(), dim, values)?;
        Ok((space, grid))
    }

    /// Collapses the grid to its distinct value vectors, in order of first
    /// occurrence. Returns the quotient statistic onto the fresh value
    /// space together with the grid on that space. Value comparison is
    /// exact, which keeps the collapse deterministic on both backends.
    pub fn collapse(&self, id: impl Into<String>) -> (Statistic, ValueGrid<S>) {
        let mut distinct: Vec<Vec<S>> = Vec::new();
        let mut map = Vec::with_capacity(self.space.len());
        for v in &self.values {
            let j = match distinct.iter().position(|u| u == v) {
                Some(j) => j,
                None => {
                    distinct.push(v.clone());
                    distinct.len() - 1
                }
            };
            map.push(j);
        }
        let (space, grid) = Self::value_space(id, self.dim, distinct)
            .expect("distinct vectors yield distinct labels");
        let stat = Statistic::from_indices(self.space.clone(), space, map)
            .expect("collapse map is total");
        (stat, grid)
    }
}
