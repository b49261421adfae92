//! Conditioning one kernel on another.
//!
//! The central objects: a [`RealKernel`] is a kernel whose target carries
//! a value grid, so it acts as a randomized R^k-valued map; a
//! [`RealFunction`] is a pointwise R^k map defined on a subset of a
//! space (the subset plays the role of an almost-sure domain). The
//! conditional expectation of one kernel given another is a real
//! function on the conditioning kernel's target, built from the joint
//! law: at each output point of the conditioner, average the grid over
//! the conditional distribution of the first kernel's output.

use alloc::vec::Vec;

use crate::algebra::{product_measure, ProductSpace};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::grid::ValueGrid;
use crate::kernel::Kernel;
use crate::scalar::{Scalar, Tol};
use crate::space::{FiniteSpace, Statistic};

/// R^k-valued function on a space, defined on a subset of the points.
/// Values are stored for every point; reads outside the defined set are
/// the caller's responsibility. Two functions representing the same
/// almost-sure class compare equal via [`eq_on_common`](Self::eq_on_common).
#[derive(Clone, Debug, PartialEq)]
pub struct RealFunction<S: Scalar> {
    space: FiniteSpace,
    dim: usize,
    values: Vec<Vec<S>>,
    defined: Vec<bool>,
}

impl<S: Scalar> RealFunction<S> {
    /// Everywhere-defined function.
    pub fn total(space: FiniteSpace, dim: usize, values: Vec<Vec<S>>) -> Result<Self> {
        let n = space.len();
        Self::partial(space, dim, values, alloc::vec![true; n])
    }

    /// Function defined only where `defined` is true.
    pub fn partial(
        space: FiniteSpace,
        dim: usize,
        values: Vec<Vec<S>>,
        defined: Vec<bool>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::LengthMismatch { context: "function dimension", expected: 1, found: 0 });
        }
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                context: "function values",
                expected: space.len(),
                found: values.len(),
            });
        }
        if defined.len() != space.len() {
            return Err(Error::LengthMismatch {
                context: "function domain mask",
                expected: space.len(),
                found: defined.len(),
            });
        }
        for v in &values {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    context: "function vector",
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(RealFunction { space, dim, values, defined })
    }

    /// One-dimensional everywhere-defined function.
    pub fn scalar_total(space: FiniteSpace, values: Vec<S>) -> Result<Self> {
        let values = values.into_iter().map(|v| alloc::vec![v]).collect();
        Self::total(space, 1, values)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, index: usize) -> &[S] {
        &self.values[index]
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn is_defined(&self, index: usize) -> bool {
        self.defined[index]
    }

    pub fn is_total(&self) -> bool {
        self.defined.iter().all(|&d| d)
    }

    pub fn defined_mask(&self) -> &[bool] {
        &self.defined
    }

    pub fn defined_indices(&self) -> Vec<usize> {
        (0..self.space.len()).filter(|&i| self.defined[i]).collect()
    }

    /// Equality on the intersection of the defined sets: the right notion
    /// for almost-sure classes when both functions share a support.
    pub fn eq_on_common(&self, other: &Self, tol: Tol) -> bool {
        self.space == other.space
            && self.dim == other.dim
            && (0..self.space.len()).all(|i| {
                !(self.defined[i] && other.defined[i])
                    || vec_eq_within(&self.values[i], &other.values[i], tol)
            })
    }

    /// The stored values as a grid on the same space (including values at
    /// undefined points).
    pub fn values_as_grid(&self) -> ValueGrid<S> {
        ValueGrid::new(self.space.clone(), self.dim, self.values.clone())
            .expect("function shape already validated")
    }
}

pub(crate) fn vec_eq_within<S: Scalar>(a: &[S], b: &[S], tol: Tol) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.eq_within(y, tol.eps))
}

/// Finite signed measure with R^k-valued point masses.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedMeasure<S: Scalar> {
    space: FiniteSpace,
    dim: usize,
    mass: Vec<Vec<S>>,
}

impl<S: Scalar> SignedMeasure<S> {
    pub fn new(space: FiniteSpace, dim: usize, mass: Vec<Vec<S>>) -> Result<Self> {
        if mass.len() != space.len() {
            return Err(Error::LengthMismatch {
                context: "measure masses",
                expected: space.len(),
                found: mass.len(),
            });
        }
        for v in &mass {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    context: "measure vector",
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(SignedMeasure { space, dim, mass })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mass(&self) -> &[Vec<S>] {
        &self.mass
    }

    pub fn mass_at(&self, index: usize) -> &[S] {
        &self.mass[index]
    }

    /// Total mass, coordinatewise.
    pub fn total(&self) -> Vec<S> {
        sum_vectors(self.dim, self.mass.iter())
    }

    /// Mass of an event, coordinatewise (additive by construction).
    pub fn event_total(&self, event: &[&str]) -> Result<Vec<S>> {
        let idx = self.space.event_indices(event)?;
        Ok(sum_vectors(self.dim, idx.into_iter().map(|i| &self.mass[i])))
    }
}

fn sum_vectors<'a, S: Scalar + 'a>(
    dim: usize,
    items: impl IntoIterator<Item = &'a Vec<S>>,
) -> Vec<S> {
    let mut acc = alloc::vec![S::zero(); dim];
    for v in items {
        for (slot, x) in acc.iter_mut().zip(v) {
            *slot = slot.clone() + x.clone();
        }
    }
    acc
}

/// Kernel whose target carries a value grid: a randomized R^k-valued map.
#[derive(Clone, Debug, PartialEq)]
pub struct RealKernel<S: Scalar> {
    kernel: Kernel<S>,
    grid: ValueGrid<S>,
}

impl<S: Scalar> RealKernel<S> {
    pub fn new(kernel: Kernel<S>, grid: ValueGrid<S>) -> Result<Self> {
        if kernel.target() != grid.space() {
            return Err(Error::SpaceMismatch { context: "real kernel grid" });
        }
        Ok(RealKernel { kernel, grid })
    }

    /// Deterministic real kernel of a statistic with a grid on its target.
    pub fn from_statistic(statistic: &Statistic, grid: ValueGrid<S>) -> Result<Self> {
        if statistic.target() != grid.space() {
            return Err(Error::SpaceMismatch { context: "statistic grid" });
        }
        Ok(RealKernel { kernel: Kernel::dirac(statistic), grid })
    }

    pub fn kernel(&self) -> &Kernel<S> {
        &self.kernel
    }

    pub fn grid(&self) -> &ValueGrid<S> {
        &self.grid
    }

    pub fn source(&self) -> &FiniteSpace {
        self.kernel.source()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
}

/// Pointwise mean of a real kernel: at each source point, the grid
/// averaged over that row. Always total.
pub fn mean_function<S: Scalar>(m: &RealKernel<S>) -> RealFunction<S> {
    let dim = m.dim();
    let values = (0..m.source().len())
        .map(|i| {
            let mut acc = alloc::vec![S::zero(); dim];
            for (j, w) in m.kernel().row(i).iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (slot, g) in acc.iter_mut().zip(m.grid().value(j)) {
                    *slot = slot.clone() + w.clone() * g.clone();
                }
            }
            acc
        })
        .collect();
    RealFunction::total(m.source().clone(), dim, values).expect("mean shape matches source")
}

/// Expected value of a real kernel under a distribution, coordinatewise.
pub fn expectation<S: Scalar>(p: &Distribution<S>, m: &RealKernel<S>) -> Result<Vec<S>> {
    if p.space() != m.source() {
        return Err(Error::SpaceMismatch { context: "expectation" });
    }
    let mean = mean_function(m);
    let mut acc = alloc::vec![S::zero(); m.dim()];
    for (i, pi) in p.mass().iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        for (slot, v) in acc.iter_mut().zip(mean.value(i)) {
            *slot = slot.clone() + pi.clone() * v.clone();
        }
    }
    Ok(acc)
}

/// The measure with density `mean_function(m)` against `p`. Integrating
/// indicator events against it gives partial expectations of `m`.
pub fn weighted_measure<S: Scalar>(
    p: &Distribution<S>,
    m: &RealKernel<S>,
) -> Result<SignedMeasure<S>> {
    if p.space() != m.source() {
        return Err(Error::SpaceMismatch { context: "weighted_measure" });
    }
    let mean = mean_function(m);
    let mass = (0..p.space().len())
        .map(|i| mean.value(i).iter().map(|v| p.mass_at(i).clone() * v.clone()).collect())
        .collect();
    SignedMeasure::new(p.space().clone(), m.dim(), mass)
}

/// Per-source-point conditional probabilities given the kernel output:
/// `table[w][w1] = p(w) m(w, w1) / (p image)(w1)` on charged columns.
/// Event conditionals are sums of these singleton rows.
pub(crate) struct SingletonConditionals<S: Scalar> {
    /// Indexed `[source][target]`; meaningful only on charged columns.
    pub(crate) table: Vec<Vec<S>>,
    pub(crate) defined: Vec<bool>,
}

pub(crate) fn singleton_conditionals<S: Scalar>(
    p: &Distribution<S>,
    m: &Kernel<S>,
    tol: Tol,
) -> Result<SingletonConditionals<S>> {
    if p.space() != m.source() {
        return Err(Error::SpaceMismatch { context: "conditional_probability" });
    }
    let image = crate::algebra::image(p, m)?;
    let cols = m.target().len();
    let defined: Vec<bool> = (0..cols).map(|j| image.charges(j, tol)).collect();
    let table = (0..p.space().len())
        .map(|i| {
            (0..cols)
                .map(|j| {
                    if defined[j] {
                        p.mass_at(i).clone() * m.entry(i, j).clone() / image.mass_at(j).clone()
                    } else {
                        S::zero()
                    }
                })
                .collect()
        })
        .collect();
    Ok(SingletonConditionals { table, defined })
}

/// Conditional probability of an event given a kernel: a function on the
/// kernel's target, defined on the image support. Computed by summing
/// singleton-event conditionals over the event.
pub fn conditional_probability<S: Scalar>(
    p: &Distribution<S>,
    event: &[&str],
    m: &Kernel<S>,
    tol: Tol,
) -> Result<RealFunction<S>> {
    let idx = p.space().event_indices(event)?;
    let sc = singleton_conditionals(p, m, tol)?;
    let cols = m.target().len();
    let values = (0..cols)
        .map(|j| {
            let mut acc = S::zero();
            for &i in &idx {
                acc = acc + sc.table[i][j].clone();
            }
            alloc::vec![acc]
        })
        .collect();
    RealFunction::partial(m.target().clone(), 1, values, sc.defined)
}

/// Conditional distribution of `m1`'s output given `m2`'s output, as a
/// kernel from `m2.target` to `m1.target`: joint mass over marginal mass.
/// Off the image support of `m2` the row falls back to the uniform
/// distribution, one member of the almost-sure class.
pub fn conditional_distribution<S: Scalar>(
    p: &Distribution<S>,
    m1: &Kernel<S>,
    m2: &Kernel<S>,
    tol: Tol,
) -> Result<Kernel<S>> {
    if p.space() != m1.source() || p.space() != m2.source() {
        return Err(Error::SpaceMismatch { context: "conditional_distribution" });
    }
    let marginal = crate::algebra::image(p, m2)?;
    let n1 = m1.target().len();
    let n2 = m2.target().len();
    let uniform = S::ratio(1, n1 as i64);
    let rows = (0..n2)
        .map(|w2| {
            if !marginal.charges(w2, tol) {
                return alloc::vec![uniform.clone(); n1];
            }
            let den = marginal.mass_at(w2);
            (0..n1)
                .map(|w1| {
                    let mut num = S::zero();
                    for (w, pw) in p.mass().iter().enumerate() {
                        if pw.is_zero() {
                            continue;
                        }
                        num = num + pw.clone() * m1.entry(w, w1).clone() * m2.entry(w, w2).clone();
                    }
                    num / den.clone()
                })
                .collect()
        })
        .collect();
    Ok(Kernel::new_unchecked(m2.target().clone(), m1.target().clone(), rows))
}

/// Conditional expectation of a real kernel given a kernel: the grid mean
/// of each conditional-distribution row, defined on the image support of
/// the conditioner.
pub fn conditional_expectation<S: Scalar>(
    p: &Distribution<S>,
    m1: &RealKernel<S>,
    m2: &Kernel<S>,
    tol: Tol,
) -> Result<RealFunction<S>> {
    let cond = conditional_distribution(p, m1.kernel(), m2, tol)?;
    let marginal = crate::algebra::image(p, m2)?;
    let dim = m1.dim();
    let n2 = m2.target().len();
    let mut values = Vec::with_capacity(n2);
    let mut defined = Vec::with_capacity(n2);
    for w2 in 0..n2 {
        let mut acc = alloc::vec![S::zero(); dim];
        for (w1, c) in cond.row(w2).iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (slot, g) in acc.iter_mut().zip(m1.grid().value(w1)) {
                *slot = slot.clone() + c.clone() * g.clone();
            }
        }
        values.push(acc);
        defined.push(marginal.charges(w2, tol));
    }
    RealFunction::partial(m2.target().clone(), dim, values, defined)
}

/// Classical conditional expectation of a pointwise function given a
/// statistic: fiber averages of `g` under `q`, defined where the fiber
/// carries mass. `g` must be total.
pub fn conditional_expectation_of_function<S: Scalar>(
    q: &Distribution<S>,
    g: &RealFunction<S>,
    t: &Statistic,
    tol: Tol,
) -> Result<RealFunction<S>> {
    if q.space() != g.space() || q.space() != t.source() {
        return Err(Error::SpaceMismatch { context: "conditional_expectation_of_function" });
    }
    if !g.is_total() {
        return Err(Error::SpaceMismatch { context: "partial integrand" });
    }
    let dim = g.dim();
    let n = t.target().len();
    let mut num = alloc::vec![alloc::vec![S::zero(); dim]; n];
    let mut den = alloc::vec![S::zero(); n];
    for (w, qw) in q.mass().iter().enumerate() {
        if qw.is_zero() {
            continue;
        }
        let j = t.apply_index(w);
        den[j] = den[j].clone() + qw.clone();
        for (slot, v) in num[j].iter_mut().zip(g.value(w)) {
            *slot = slot.clone() + qw.clone() * v.clone();
        }
    }
    let mut values = Vec::with_capacity(n);
    let mut defined = Vec::with_capacity(n);
    for (nj, dj) in num.into_iter().zip(&den) {
        if dj.is_zero_within(tol.eps) {
            values.push(alloc::vec![S::zero(); dim]);
            defined.push(false);
        } else {
            values.push(nj.into_iter().map(|x| x / dj.clone()).collect());
            defined.push(true);
        }
    }
    RealFunction::partial(t.target().clone(), dim, values, defined)
}

/// Conditional expectation computed on the joint space: lift the mean of
/// `m1` to the product of source and conditioner target, then condition
/// on the second coordinate under the joint law. Agrees with
/// [`conditional_expectation`] on the image support.
pub fn conditional_expectation_via_product<S: Scalar>(
    p: &Distribution<S>,
    m1: &RealKernel<S>,
    m2: &Kernel<S>,
    tol: Tol,
) -> Result<RealFunction<S>> {
    if p.space() != m1.source() || p.space() != m2.source() {
        return Err(Error::SpaceMismatch { context: "conditional_expectation_via_product" });
    }
    let (w, joint) = product_measure(p, m2)?;
    let lifted = lift_to_product(&w, &mean_function(m1))?;
    conditional_expectation_of_function(&joint, &lifted, &w.right_projection(), tol)
}

/// Lifts a total function on the left factor to the product space.
pub fn lift_to_product<S: Scalar>(
    w: &ProductSpace,
    f: &RealFunction<S>,
) -> Result<RealFunction<S>> {
    if f.space() != w.left() {
        return Err(Error::SpaceMismatch { context: "lift_to_product" });
    }
    if !f.is_total() {
        return Err(Error::SpaceMismatch { context: "partial integrand" });
    }
    let values = (0..w.space().len())
        .map(|i| f.value(w.split_index(i).0).to_vec())
        .collect();
    RealFunction::total(w.space().clone(), f.dim(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::image;
    use crate::scalar::{rat, total, Exact};
    use alloc::vec;

    // Two independent Bernoulli(theta) trials, the running example.
    fn pair_space() -> FiniteSpace {
        FiniteSpace::from_labels("pair", &["00", "01", "10", "11"]).unwrap()
    }

    fn bernoulli_pair(num: i64, den: i64) -> Distribution<Exact> {
        let p = rat(num, den);
        let q = rat(1, 1) - p.clone();
        Distribution::new(
            pair_space(),
            vec![q.clone() * q.clone(), q.clone() * p.clone(), p.clone() * q, p.clone() * p],
        )
        .unwrap()
    }

    fn sum_statistic() -> Statistic {
        let t = FiniteSpace::from_labels("sum", &["0", "1", "2"]).unwrap();
        Statistic::from_indices(pair_space(), t, vec![0, 1, 1, 2]).unwrap()
    }

    // Randomized unbiased estimator of theta: report the first trial or
    // the second, chosen by a fair coin.
    fn coinflip() -> RealKernel<Exact> {
        let bits = FiniteSpace::from_labels("bit", &["0", "1"]).unwrap();
        let k = Kernel::new(
            pair_space(),
            bits.clone(),
            vec![
                vec![rat(1, 1), rat(0, 1)],
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(1, 2), rat(1, 2)],
                vec![rat(0, 1), rat(1, 1)],
            ],
        )
        .unwrap();
        RealKernel::new(k, ValueGrid::scalar(bits, vec![rat(0, 1), rat(1, 1)]).unwrap()).unwrap()
    }

    #[test]
    fn mean_function_of_the_coinflip_estimator() {
        let mean = mean_function(&coinflip());
        let got: Vec<_> = (0..4).map(|i| mean.value(i)[0].clone()).collect();
        assert_eq!(got, vec![rat(0, 1), rat(1, 2), rat(1, 2), rat(1, 1)]);
    }

    #[test]
    fn expectation_recovers_theta() {
        for (n, d) in [(1i64, 5i64), (1, 2), (4, 5)] {
            let e = expectation(&bernoulli_pair(n, d), &coinflip()).unwrap();
            assert_eq!(e, vec![rat(n, d)]);
        }
    }

    #[test]
    fn expectation_matches_image_mean() {
        // Integrating the kernel equals integrating the grid against the
        // image law.
        let p = bernoulli_pair(1, 5);
        let m = coinflip();
        let img = image(&p, m.kernel()).unwrap();
        let by_image = total(
            img.mass().iter().zip(m.grid().values()).map(|(w, v)| w.clone() * v[0].clone()),
        );
        assert_eq!(expectation(&p, &m).unwrap(), vec![by_image]);
    }

    #[test]
    fn weighted_measure_totals_the_expectation() {
        let p = bernoulli_pair(1, 2);
        let m = coinflip();
        let wm = weighted_measure(&p, &m).unwrap();
        assert_eq!(wm.total(), expectation(&p, &m).unwrap());
        assert_eq!(wm.mass_at(1), &[rat(1, 8)]);
        assert_eq!(wm.event_total(&["01", "10"]).unwrap(), vec![rat(1, 4)]);
    }

    #[test]
    fn conditional_probability_given_the_sum() {
        // Given the sum of two fair-coin trials, the chance that both
        // came up heads is 0, 0, 1 over sum = 0, 1, 2.
        let p = bernoulli_pair(1, 2);
        let m2 = Kernel::dirac(&sum_statistic());
        let f = conditional_probability(&p, &["11"], &m2, Tol::default()).unwrap();
        assert_eq!(f.value(0), &[rat(0, 1)]);
        assert_eq!(f.value(1), &[rat(0, 1)]);
        assert_eq!(f.value(2), &[rat(1, 1)]);
        assert!(f.is_total());
    }

    #[test]
    fn conditional_probability_is_additive_over_disjoint_events() {
        let p = bernoulli_pair(1, 5);
        let m2 = Kernel::dirac(&sum_statistic());
        let a = conditional_probability(&p, &["01"], &m2, Tol::default()).unwrap();
        let b = conditional_probability(&p, &["10"], &m2, Tol::default()).unwrap();
        let ab = conditional_probability(&p, &["01", "10"], &m2, Tol::default()).unwrap();
        for j in 0..3 {
            assert_eq!(ab.value(j)[0], a.value(j)[0].clone() + b.value(j)[0].clone());
        }
    }

    #[test]
    fn conditional_distribution_of_the_identity_given_the_sum() {
        let p = bernoulli_pair(1, 2);
        let m1 = Kernel::identity(&pair_space());
        let m2 = Kernel::dirac(&sum_statistic());
        let cond = conditional_distribution(&p, &m1, &m2, Tol::default()).unwrap();
        assert_eq!(cond.row(0), &[rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(cond.row(1), &[rat(0, 1), rat(1, 2), rat(1, 2), rat(0, 1)]);
        assert_eq!(cond.row(2), &[rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)]);
        // The conditional distribution is theta-free here because the sum
        // is sufficient; check a second parameter.
        let cond2 = conditional_distribution(&bernoulli_pair(1, 5), &m1, &m2, Tol::default()).unwrap();
        assert_eq!(cond, cond2);
    }

    #[test]
    fn off_support_rows_fall_back_to_uniform() {
        let p = Distribution::point_mass(pair_space(), "00").unwrap();
        let m1 = Kernel::<Exact>::identity(&pair_space());
        let m2 = Kernel::dirac(&sum_statistic());
        let cond = conditional_distribution(&p, &m1, &m2, Tol::default()).unwrap();
        assert_eq!(cond.row(0), &[rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(cond.row(1), vec![rat(1, 4); 4].as_slice());
        assert_eq!(cond.row(2), vec![rat(1, 4); 4].as_slice());
    }

    #[test]
    fn conditional_expectation_of_the_coinflip_given_the_sum() {
        // Frozen values: averaging the coinflip estimator over the fibers
        // of the sum gives 0, 1/2, 1, independent of theta.
        for (n, d) in [(1i64, 5i64), (1, 2), (4, 5)] {
            let f = conditional_expectation(
                &bernoulli_pair(n, d),
                &coinflip(),
                &Kernel::dirac(&sum_statistic()),
                Tol::default(),
            )
            .unwrap();
            assert_eq!(f.value(0), &[rat(0, 1)]);
            assert_eq!(f.value(1), &[rat(1, 2)]);
            assert_eq!(f.value(2), &[rat(1, 1)]);
            assert!(f.is_total());
        }
    }

    #[test]
    fn tower_property_on_the_fixture() {
        // Integrating the conditional expectation against the image law
        // returns the unconditional expectation.
        let p = bernoulli_pair(1, 5);
        let m1 = coinflip();
        let m2 = Kernel::dirac(&sum_statistic());
        let ce = conditional_expectation(&p, &m1, &m2, Tol::default()).unwrap();
        let img = image(&p, &m2).unwrap();
        let integrated = total(
            img.mass().iter().zip(ce.values()).map(|(w, v)| w.clone() * v[0].clone()),
        );
        assert_eq!(vec![integrated], expectation(&p, &m1).unwrap());
    }

    #[test]
    fn product_route_agrees_with_direct_conditioning() {
        let p = bernoulli_pair(1, 5);
        let m1 = coinflip();
        let m2 = Kernel::dirac(&sum_statistic());
        let direct = conditional_expectation(&p, &m1, &m2, Tol::default()).unwrap();
        let routed = conditional_expectation_via_product(&p, &m1, &m2, Tol::default()).unwrap();
        assert!(direct.eq_on_common(&routed, Tol::default()));
        assert_eq!(direct.defined_mask(), routed.defined_mask());
    }

    #[test]
    fn conditioning_on_a_constant_kernel_recovers_the_expectation() {
        // A constant conditioner carries no information, so the
        // conditional expectation is the plain expectation everywhere.
        let p = bernoulli_pair(1, 5);
        let m1 = coinflip();
        let one = FiniteSpace::from_labels("one", &["*"]).unwrap();
        let m2 = Kernel::constant(pair_space(), &Distribution::<Exact>::uniform(one));
        let f = conditional_expectation(&p, &m1, &m2, Tol::default()).unwrap();
        assert_eq!(f.value(0).to_vec(), expectation(&p, &m1).unwrap());
    }

    #[test]
    fn conditioning_on_the_identity_recovers_the_mean_function() {
        let p = bernoulli_pair(1, 2);
        let m1 = coinflip();
        let m2 = Kernel::identity(&pair_space());
        let f = conditional_expectation(&p, &m1, &m2, Tol::default()).unwrap();
        let mean = mean_function(&m1);
        assert!(f.eq_on_common(&mean, Tol::default()));
        assert!(f.is_total());
    }

    #[test]
    fn partial_functions_compare_on_common_domain() {
        let s = pair_space();
        let a = RealFunction::partial(
            s.clone(),
            1,
            vec![vec![rat(1, 1)], vec![rat(2, 1)], vec![rat(3, 1)], vec![rat(0, 1)]],
            vec![true, true, false, false],
        )
        .unwrap();
        let b = RealFunction::partial(
            s,
            1,
            vec![vec![rat(1, 1)], vec![rat(2, 1)], vec![rat(9, 1)], vec![rat(9, 1)]],
            vec![true, false, true, false],
        )
        .unwrap();
        // They agree at index 0, the only commonly defined point.
        assert!(a.eq_on_common(&b, Tol::default()));
    }

    #[test]
    fn float_backend_guards_small_denominators() {
        // Mass 1e-12 at "01" sits below the default tolerance, so sum = 1
        // is treated as uncharged rather than divided through.
        let eps_mass = 1e-12;
        let p = Distribution::new(
            pair_space(),
            vec![1.0 - eps_mass, eps_mass, 0.0, 0.0],
        )
        .unwrap();
        let m2 = Kernel::dirac(&sum_statistic());
        let f = conditional_probability(&p, &["01"], &m2, Tol::default()).unwrap();
        assert!(!f.is_defined(1));
        // With a tighter tolerance the same point becomes defined.
        let g = conditional_probability(&p, &["01"], &m2, Tol::new(1e-15)).unwrap();
        assert!(g.is_defined(1));
        assert!((g.value(1)[0] - 1.0).abs() < 1e-9);
    }
}
