//! Kernel algebra: images, composition, products, pushforwards.
//!
//! These are the structural operations of the calculus. Composition is
//! written in application order: `compose(m1, m2)` applies `m1` first.
//! All product constructions use one layout, row-major over (left,
//! right), so indices convert without bookkeeping at call sites.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::scalar::Scalar;
use crate::space::{FiniteSpace, Statistic};

/// Product of two spaces. Pair (l, r) sits at index `l * |right| + r` and
/// is labeled `(l|r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSpace {
    left: FiniteSpace,
    right: FiniteSpace,
    space: FiniteSpace,
}

impl ProductSpace {
    pub fn new(left: FiniteSpace, right: FiniteSpace) -> Result<Self> {
        let mut labels = Vec::with_capacity(left.len() * right.len());
        for l in left.points() {
            for r in right.points() {
                labels.push(alloc::format!("({l}|{r})"));
            }
        }
        let id: String = alloc::format!("({}x{})", left.id(), right.id());
        let space = FiniteSpace::new(id, labels)?;
        Ok(ProductSpace { left, right, space })
    }

    pub fn left(&self) -> &FiniteSpace {
        &self.left
    }

    pub fn right(&self) -> &FiniteSpace {
        &self.right
    }

    /// The product as a plain space.
    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn pair_index(&self, left_index: usize, right_index: usize) -> usize {
        left_index * self.right.len() + right_index
    }

    pub fn split_index(&self, index: usize) -> (usize, usize) {
        (index / self.right.len(), index % self.right.len())
    }

    /// Coordinate projection onto the left factor.
    pub fn left_projection(&self) -> Statistic {
        let map = (0..self.space.len()).map(|i| self.split_index(i).0).collect();
        Statistic::from_indices(self.space.clone(), self.left.clone(), map)
            .expect("projection map is total")
    }

    /// Coordinate projection onto the right factor.
    pub fn right_projection(&self) -> Statistic {
        let map = (0..self.space.len()).map(|i| self.split_index(i).1).collect();
        Statistic::from_indices(self.space.clone(), self.right.clone(), map)
            .expect("projection map is total")
    }
}

/// Image distribution of `p` under `m`: the law of the kernel output when
/// the input follows `p` (row-weighted column sums).
pub fn image<S: Scalar>(p: &Distribution<S>, m: &Kernel<S>) -> Result<Distribution<S>> {
    if p.space() != m.source() {
        return Err(Error::SpaceMismatch { context: "image" });
    }
    let cols = m.target().len();
    let mut mass = alloc::vec![S::zero(); cols];
    for (i, pi) in p.mass().iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        for (j, slot) in mass.iter_mut().enumerate() {
            *slot = slot.clone() + pi.clone() * m.entry(i, j).clone();
        }
    }
    Ok(Distribution::new_unchecked(m.target().clone(), mass))
}

/// Kernel composition in application order: `m1` from A to B, `m2` from B
/// to C, result from A to C.
pub fn compose<S: Scalar>(m1: &Kernel<S>, m2: &Kernel<S>) -> Result<Kernel<S>> {
    if m1.target() != m2.source() {
        return Err(Error::SpaceMismatch { context: "compose" });
    }
    let rows = (0..m1.source().len())
        .map(|i| {
            let mut row = alloc::vec![S::zero(); m2.target().len()];
            for (b, w) in m1.row(i).iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot = slot.clone() + w.clone() * m2.entry(b, c).clone();
                }
            }
            row
        })
        .collect();
    Ok(Kernel::new_unchecked(m1.source().clone(), m2.target().clone(), rows))
}

/// Precompose a kernel with a statistic: row at `w` is `m`'s row at
/// `x(w)`. Equals `compose(dirac(x), m)` without the multiplication.
pub fn compose_with_statistic<S: Scalar>(x: &Statistic, m: &Kernel<S>) -> Result<Kernel<S>> {
    if x.target() != m.source() {
        return Err(Error::SpaceMismatch { context: "compose_with_statistic" });
    }
    let rows = (0..x.source().len()).map(|i| m.row(x.apply_index(i)).to_vec()).collect();
    Ok(Kernel::new_unchecked(x.source().clone(), m.target().clone(), rows))
}

/// Joint law of (input, output): the product measure of `p` and `m` on
/// `p.space x m.target`, with mass `p(w) * m(w, w2)` at `(w|w2)`.
pub fn product_measure<S: Scalar>(
    p: &Distribution<S>,
    m: &Kernel<S>,
) -> Result<(ProductSpace, Distribution<S>)> {
    if p.space() != m.source() {
        return Err(Error::SpaceMismatch { context: "product_measure" });
    }
    let w = ProductSpace::new(p.space().clone(), m.target().clone())?;
    let mut mass = Vec::with_capacity(w.space().len());
    for (i, pi) in p.mass().iter().enumerate() {
        for x in m.row(i) {
            mass.push(pi.clone() * x.clone());
        }
    }
    let joint = Distribution::new_unchecked(w.space().clone(), mass);
    Ok((w, joint))
}

/// Kernel into a product target: at each source point, the two kernels
/// run independently, so the row is the outer product of their rows.
pub fn pair_kernel<S: Scalar>(
    m_left: &Kernel<S>,
    m_right: &Kernel<S>,
) -> Result<(ProductSpace, Kernel<S>)> {
    if m_left.source() != m_right.source() {
        return Err(Error::SpaceMismatch { context: "pair_kernel" });
    }
    let w = ProductSpace::new(m_left.target().clone(), m_right.target().clone())?;
    let rows = (0..m_left.source().len())
        .map(|i| {
            let mut row = Vec::with_capacity(w.space().len());
            for a in m_left.row(i) {
                for b in m_right.row(i) {
                    row.push(a.clone() * b.clone());
                }
            }
            row
        })
        .collect();
    let paired = Kernel::new_unchecked(m_left.source().clone(), w.space().clone(), rows);
    Ok((w, paired))
}

/// Pushforward of a kernel along a statistic on its target: columns are
/// aggregated over the fibers of `f`. Equals `compose(m, dirac(f))`.
pub fn pushforward<S: Scalar>(f: &Statistic, m: &Kernel<S>) -> Result<Kernel<S>> {
    if f.source() != m.target() {
        return Err(Error::SpaceMismatch { context: "pushforward" });
    }
    let cols = f.target().len();
    let rows = (0..m.source().len())
        .map(|i| {
            let mut row = alloc::vec![S::zero(); cols];
            for (j, x) in m.row(i).iter().enumerate() {
                let t = f.apply_index(j);
                row[t] = row[t].clone() + x.clone();
            }
            row
        })
        .collect();
    Ok(Kernel::new_unchecked(m.source().clone(), f.target().clone(), rows))
}

/// Extends a kernel to a product source by ignoring the right coordinate:
/// the row at `(w|r)` is `m`'s row at `w`.
pub fn extend_kernel<S: Scalar>(
    m: &Kernel<S>,
    right: &FiniteSpace,
) -> Result<(ProductSpace, Kernel<S>)> {
    let w = ProductSpace::new(m.source().clone(), right.clone())?;
    let rows = (0..w.space().len())
        .map(|i| m.row(w.split_index(i).0).to_vec())
        .collect();
    let extended = Kernel::new_unchecked(w.space().clone(), m.target().clone(), rows);
    Ok((w, extended))
}

/// Total mass check used by tests: a distribution really sums to one.
#[cfg(test)]
fn mass_total<S: Scalar>(d: &Distribution<S>) -> S {
    crate::scalar::total(d.mass().iter().cloned())
}
