//! Finite measurable spaces and the maps between them.
//!
//! A [`FiniteSpace`] is an ordered list of distinct point labels; the full
//! power set serves as the sigma-field, so events are plain label subsets.
//! A [`Statistic`] is a total map between spaces, stored as target indices
//! in source order. Spaces compare by their point lists, not by identity,
//! and are cheap to clone (shared storage).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug)]
struct SpaceInner {
    id: String,
    points: Vec<String>,
    index: BTreeMap<String, usize>,
}

/// Ordered finite set of distinct point labels.
#[derive(Clone, Debug)]
pub struct FiniteSpace {
    inner: Arc<SpaceInner>,
}

impl FiniteSpace {
    /// Builds a space from an id (display only) and its point labels.
    /// Fails on an empty list or a repeated label.
    pub fn new(id: impl Into<String>, points: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicatePoint { label: p.clone() });
            }
        }
        Ok(FiniteSpace { inner: Arc::new(SpaceInner { id: id.into(), points, index }) })
    }

    /// Same as [`new`](Self::new) for `&str` labels.
    pub fn from_labels(id: impl Into<String>, labels: &[&str]) -> Result<Self> {
        Self::new(id, labels.iter().map(|l| l.to_string()).collect())
    }

    pub fn id(&self) -> &str {
        &self.inner.id
    }

    pub fn len(&self) -> usize {
        self.inner.points.len()
    }

    pub fn is_empty(&self) -> bool {
        // Construction rejects empty point lists.
        false
    }

    pub fn points(&self) -> &[String] {
        &self.inner.points
    }

    pub fn label(&self, index: usize) -> &str {
        &self.inner.points[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index.get(label).copied()
    }

    /// Index lookup that reports the missing label.
    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownPoint { label: label.to_string() })
    }

    /// Resolves event labels to distinct point indices in space order.
    /// Repeated labels count once: events are sets.
    pub fn event_indices(&self, event: &[&str]) -> Result<Vec<usize>> {
        let mut seen = alloc::vec![false; self.len()];
        for label in event {
            seen[self.require(label)?] = true;
        }
        Ok((0..self.len()).filter(|&i| seen[i]).collect())
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.points == other.inner.points
    }
}

impl Eq for FiniteSpace {}

/// Total map between finite spaces, the measurable maps of this setting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statistic {
    source: FiniteSpace,
    target: FiniteSpace,
    map: Vec<usize>,
}

impl Statistic {
    /// Builds a statistic from target indices listed in source order.
    pub fn from_indices(source: FiniteSpace, target: FiniteSpace, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::LengthMismatch {
                context: "statistic map",
                expected: source.len(),
                found: map.len(),
            });
        }
        for &t in &map {
            if t >= target.len() {
                return Err(Error::UnknownPoint { label: alloc::format!("#{t}") });
            }
        }
        Ok(Statistic { source, target, map })
    }

    /// Builds a statistic from a label-level map evaluated on each source
    /// point. The closure must return labels of the target space.
    pub fn from_fn(
        source: FiniteSpace,
        target: FiniteSpace,
        mut f: impl FnMut(&str) -> String,
    ) -> Result<Self> {
        let map = source
            .points()
            .iter()
            .map(|p| target.require(&f(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Statistic { source, target, map })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        Statistic {
            source: space.clone(),
            target: space.clone(),
            map: (0..space.len()).collect(),
        }
    }

    /// Constant statistic sending every point to `target_label`.
    pub fn constant(source: FiniteSpace, target: FiniteSpace, target_label: &str) -> Result<Self> {
        let t = target.require(target_label)?;
        let n = source.len();
        Ok(Statistic { source, target, map: alloc::vec![t; n] })
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply_index(&self, source_index: usize) -> usize {
        self.map[source_index]
    }

    pub fn apply(&self, label: &str) -> Result<&str> {
        Ok(self.target.label(self.map[self.source.require(label)?]))
    }

    /// Composition `next . self` (apply `self` first).
    pub fn then(&self, next: &Statistic) -> Result<Statistic> {
        if self.target != next.source {
            return Err(Error::SpaceMismatch { context: "statistic composition" });
        }
        Ok(Statistic {
            source: self.source.clone(),
            target: next.target.clone(),
            map: self.map.iter().map(|&i| next.map[i]).collect(),
        })
    }

    /// Preimage of a target index, in source order.
    pub fn fiber(&self, target_index: usize) -> Vec<usize> {
        (0..self.source.len()).filter(|&i| self.map[i] == target_index).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn abc() -> FiniteSpace {
        FiniteSpace::from_labels("abc", &["a", "b", "c"]).unwrap()
    }

    #[test]
    fn construction_validates_labels() {
        assert_eq!(FiniteSpace::new("x", vec![]), Err(Error::EmptySpace));
        let dup = FiniteSpace::from_labels("x", &["a", "b", "a"]);
        assert_eq!(dup, Err(Error::DuplicatePoint { label: "a".into() }));
    }

    #[test]
    fn spaces_compare_by_points_not_id() {
        let s = abc();
        let t = FiniteSpace::from_labels("other-id", &["a", "b", "c"]).unwrap();
        let u = FiniteSpace::from_labels("abc", &["a", "c", "b"]).unwrap();
        assert_eq!(s, t);
        assert_ne!(s, u); // order matters
    }

    #[test]
    fn index_and_label_are_inverse() {
        let s = abc();
        for i in 0..s.len() {
            assert_eq!(s.index_of(s.label(i)), Some(i));
        }
        assert_eq!(s.index_of("z"), None);
        assert!(matches!(s.require("z"), Err(Error::UnknownPoint { .. })));
    }

    #[test]
    fn events_are_sets() {
        let s = abc();
        assert_eq!(s.event_indices(&["c", "a", "c"]).unwrap(), vec![0, 2]);
        assert_eq!(s.event_indices(&[]).unwrap(), Vec::<usize>::new());
        assert!(s.event_indices(&["a", "z"]).is_err());
    }

    #[test]
    fn statistic_composition_matches_pointwise_application() {
        let s = abc();
        let two = FiniteSpace::from_labels("two", &["lo", "hi"]).unwrap();
        let one = FiniteSpace::from_labels("one", &["*"]).unwrap();
        let t = Statistic::from_fn(s.clone(), two.clone(), |p| {
            if p == "c" { "hi".into() } else { "lo".into() }
        })
        .unwrap();
        let c = Statistic::constant(two.clone(), one.clone(), "*").unwrap();
        let composed = t.then(&c).unwrap();
        for p in s.points() {
            assert_eq!(composed.apply(p).unwrap(), c.apply(t.apply(p).unwrap()).unwrap());
        }
        assert!(c.then(&t).is_err());
    }

    #[test]
    fn identity_is_neutral_for_composition() {
        let s = abc();
        let two = FiniteSpace::from_labels("two", &["lo", "hi"]).unwrap();
        let t = Statistic::from_indices(s.clone(), two.clone(), vec![0, 0, 1]).unwrap();
        assert_eq!(Statistic::identity(&s).then(&t).unwrap(), t);
        assert_eq!(t.then(&Statistic::identity(&two)).unwrap(), t);
    }

    #[test]
    fn fibers_partition_the_source() {
        let s = abc();
        let two = FiniteSpace::from_labels("two", &["lo", "hi"]).unwrap();
        let t = Statistic::from_indices(s, two, vec![0, 1, 0]).unwrap();
        assert_eq!(t.fiber(0), vec![0, 2]);
        assert_eq!(t.fiber(1), vec![1]);
    }
}
