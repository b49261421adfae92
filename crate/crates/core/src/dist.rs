//! Probability distributions on finite spaces.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::{total, Scalar, Tol};
use crate::space::FiniteSpace;

/// Probability measure on a [`FiniteSpace`], stored as point masses in
/// space order. Validated at construction: entries nonnegative, sum one
/// (within tolerance on the float backend).
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<S: Scalar> {
    space: FiniteSpace,
    mass: Vec<S>,
}

impl<S: Scalar> Distribution<S> {
    pub fn new(space: FiniteSpace, mass: Vec<S>) -> Result<Self> {
        Self::with_tol(space, mass, Tol::default())
    }

    pub fn with_tol(space: FiniteSpace, mass: Vec<S>, tol: Tol) -> Result<Self> {
        validate_probability_vector(&space, &mass, tol)?;
        Ok(Distribution { space, mass })
    }

    /// Skips validation; callers guarantee the vector is stochastic.
    pub(crate) fn new_unchecked(space: FiniteSpace, mass: Vec<S>) -> Self {
        Distribution { space, mass }
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let n = space.len();
        let w = S::ratio(1, n as i64);
        Distribution { space, mass: alloc::vec![w; n] }
    }

    pub fn point_mass(space: FiniteSpace, label: &str) -> Result<Self> {
        let i = space.require(label)?;
        let mut mass = alloc::vec![S::zero(); space.len()];
        mass[i] = S::one();
        Ok(Distribution { space, mass })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn mass(&self) -> &[S] {
        &self.mass
    }

    pub fn mass_at(&self, index: usize) -> &S {
        &self.mass[index]
    }

    /// Probability of an event given as a set of point labels.
    pub fn event_mass(&self, event: &[&str]) -> Result<S> {
        let idx = self.space.event_indices(event)?;
        Ok(total(idx.into_iter().map(|i| self.mass[i].clone())))
    }

    /// True when point `index` carries mass beyond the tolerance.
    pub fn charges(&self, index: usize, tol: Tol) -> bool {
        !self.mass[index].is_zero_within(tol.eps)
    }

    /// Indices of charged points, in space order.
    pub fn support(&self, tol: Tol) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| self.charges(i, tol)).collect()
    }
}

/// Shared validator for distribution vectors and kernel rows.
pub(crate) fn validate_probability_vector<S: Scalar>(
    space: &FiniteSpace,
    mass: &[S],
    tol: Tol,
) -> Result<()> {
    if mass.len() != space.len() {
        return Err(Error::LengthMismatch {
            context: "mass vector",
            expected: space.len(),
            found: mass.len(),
        });
    }
    for (i, m) in mass.iter().enumerate() {
        if m.lt_beyond(&S::zero(), tol.eps) {
            return Err(Error::NegativeMass {
                label: space.label(i).to_string(),
                mass: m.to_string(),
            });
        }
    }
    let sum = total(mass.iter().cloned());
    if !sum.eq_within(&S::one(), tol.eps) {
        return Err(Error::MassNotOne { sum: sum.to_string() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Exact};
    use alloc::vec;
    use proptest::prelude::*;

    fn abc() -> FiniteSpace {
        FiniteSpace::from_labels("abc", &["a", "b", "c"]).unwrap()
    }

    #[test]
    fn accepts_valid_masses_and_rejects_bad_ones() {
        let s = abc();
        let d = Distribution::new(s.clone(), vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
        assert_eq!(d.mass_at(0), &rat(1, 2));

        let neg = Distribution::new(s.clone(), vec![rat(3, 2), rat(-1, 2), rat(0, 1)]);
        assert!(matches!(neg, Err(Error::NegativeMass { .. })));

        let off = Distribution::new(s.clone(), vec![rat(1, 2), rat(1, 3), rat(1, 3)]);
        assert_eq!(off, Err(Error::MassNotOne { sum: "7/6".into() }));

        let short = Distribution::new(s, vec![rat(1, 2), rat(1, 2)]);
        assert!(matches!(short, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn float_backend_respects_tolerance() {
        let s = abc();
        // Off by 1e-12: fine at the default tolerance, fatal at 1e-15.
        let mass = vec![0.5, 0.3, 0.2 - 1e-12];
        assert!(Distribution::new(s.clone(), mass.clone()).is_ok());
        assert!(Distribution::with_tol(s, mass, Tol::new(1e-15)).is_err());
    }

    #[test]
    fn uniform_and_point_mass() {
        let s = abc();
        let u = Distribution::<Exact>::uniform(s.clone());
        assert_eq!(u.mass(), &[rat(1, 3), rat(1, 3), rat(1, 3)]);
        let p = Distribution::<Exact>::point_mass(s.clone(), "b").unwrap();
        assert_eq!(p.mass(), &[rat(0, 1), rat(1, 1), rat(0, 1)]);
        assert!(Distribution::<Exact>::point_mass(s, "z").is_err());
    }

    #[test]
    fn event_mass_known_values() {
        let s = abc();
        let d = Distribution::new(s, vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
        assert_eq!(d.event_mass(&[]).unwrap(), rat(0, 1));
        assert_eq!(d.event_mass(&["a", "c"]).unwrap(), rat(2, 3));
        assert_eq!(d.event_mass(&["a", "b", "c"]).unwrap(), rat(1, 1));
        assert_eq!(d.event_mass(&["a", "a"]).unwrap(), rat(1, 2));
        assert!(d.event_mass(&["q"]).is_err());
    }

    #[test]
    fn support_reflects_tolerance() {
        let s = abc();
        let d = Distribution::new(s, vec![0.5, 0.5, 4e-10]).unwrap();
        assert_eq!(d.support(Tol::default()), vec![0, 1]);
        assert_eq!(d.support(Tol::new(1e-12)), vec![0, 1, 2]);
    }

    fn arb_exact_dist() -> impl Strategy<Value = Distribution<Exact>> {
        (2usize..6)
            .prop_flat_map(|n| proptest::collection::vec(0u32..100, n))
            .prop_filter_map("needs positive total", |w| {
                let sum: u32 = w.iter().sum();
                if sum == 0 {
                    return None;
                }
                let labels: Vec<_> = (0..w.len()).map(|i| alloc::format!("p{i}")).collect();
                let space = FiniteSpace::new("w", labels).unwrap();
                let mass = w.iter().map(|&x| rat(x as i64, sum as i64)).collect();
                Some(Distribution::new(space, mass).unwrap())
            })
    }

    proptest! {
        // Monotonicity and additivity of event probabilities.
        #[test]
        fn event_mass_is_additive_and_monotone(d in arb_exact_dist()) {
            let labels: Vec<&str> = d.space().points().iter().map(|s| s.as_str()).collect();
            let (inner, rest) = labels.split_at(labels.len() / 2);
            let inner_mass = d.event_mass(inner).unwrap();
            let rest_mass = d.event_mass(rest).unwrap();
            prop_assert_eq!(inner_mass.clone() + rest_mass, rat(1, 1));
            prop_assert!(inner_mass <= d.event_mass(&labels).unwrap());
        }
    }
}
