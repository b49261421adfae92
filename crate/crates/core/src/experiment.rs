//! Statistical experiments and their structure checks.
//!
//! An [`Experiment`] is a finite family of distributions on one space,
//! indexed by parameter labels, optionally with an estimand (the
//! R^k-valued target of estimation, one vector per parameter).
//!
//! Sufficiency of a kernel is checked through conditional probabilities
//! of singleton events: the kernel is sufficient when these admit one
//! version shared by every parameter; additivity extends the shared
//! version to all events. Completeness is a rank condition on the matrix
//! of image laws over the union support. Factorization solves for a
//! statistic on the kernel's target by constraint propagation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::algebra::{image, product_measure, ProductSpace};
use crate::conditioning::{
    expectation, singleton_conditionals, RealFunction, RealKernel,
};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::rank_and_nullvec;
use crate::scalar::{Scalar, Tol};
use crate::space::{FiniteSpace, Statistic};

/// Estimand: the vector each parameter should be estimated by.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimand<S: Scalar> {
    dim: usize,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> Estimand<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, theta_index: usize) -> &[S] {
        &self.values[theta_index]
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }
}

/// Finite statistical experiment: a parametrized family of distributions
/// on a common sample space, in a fixed parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment<S: Scalar> {
    space: FiniteSpace,
    thetas: Vec<String>,
    family: Vec<Distribution<S>>,
    estimand: Option<Estimand<S>>,
}

impl<S: Scalar> Experiment<S> {
    pub fn new(space: FiniteSpace, members: Vec<(String, Distribution<S>)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut thetas = Vec::with_capacity(members.len());
        let mut family = Vec::with_capacity(members.len());
        for (label, d) in members {
            if thetas.contains(&label) {
                return Err(Error::DuplicateTheta { label });
            }
            if d.space() != &space {
                return Err(Error::SpaceMismatch { context: "experiment member" });
            }
            thetas.push(label);
            family.push(d);
        }
        Ok(Experiment { space, thetas, family, estimand: None })
    }

    /// Attaches an estimand, one vector per parameter in parameter order.
    pub fn with_estimand(mut self, values: Vec<Vec<S>>) -> Result<Self> {
        if values.len() != self.thetas.len() {
            return Err(Error::LengthMismatch {
                context: "estimand entries",
                expected: self.thetas.len(),
                found: values.len(),
            });
        }
        let dim = values.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::LengthMismatch { context: "estimand dimension", expected: 1, found: 0 });
        }
        for v in &values {
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    context: "estimand vector",
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        self.estimand = Some(Estimand { dim, values });
        Ok(self)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn theta_count(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[String] {
        &self.thetas
    }

    pub fn theta_label(&self, index: usize) -> &str {
        &self.thetas[index]
    }

    pub fn theta_index(&self, label: &str) -> Result<usize> {
        self.thetas
            .iter()
            .position(|t| t == label)
            .ok_or_else(|| Error::UnknownTheta { label: label.to_string() })
    }

    pub fn member(&self, theta_index: usize) -> &Distribution<S> {
        &self.family[theta_index]
    }

    pub fn members(&self) -> &[Distribution<S>] {
        &self.family
    }

    pub fn estimand(&self) -> Option<&Estimand<S>> {
        self.estimand.as_ref()
    }

    pub fn require_estimand(&self) -> Result<&Estimand<S>> {
        self.estimand.as_ref().ok_or(Error::NoEstimand)
    }

    /// The joint experiment of data and kernel output: family
    /// `P_theta (x) M` on the product of sample space and kernel target.
    /// The estimand carries over unchanged.
    pub fn product_with(&self, m: &Kernel<S>) -> Result<(ProductSpace, Experiment<S>)> {
        if m.source() != &self.space {
            return Err(Error::SpaceMismatch { context: "product experiment" });
        }
        let mut w = None;
        let mut members = Vec::with_capacity(self.family.len());
        for (label, p) in self.thetas.iter().zip(&self.family) {
            let (ws, joint) = product_measure(p, m)?;
            w = Some(ws);
            members.push((label.clone(), joint));
        }
        let w = w.expect("family is nonempty");
        let mut exp = Experiment::new(w.space().clone(), members)?;
        if let Some(est) = &self.estimand {
            exp = exp.with_estimand(est.values.clone())?;
        }
        Ok((w, exp))
    }
}

/// First point of disagreement found when no common version exists.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficiencyWitness<S: Scalar> {
    /// Singleton event whose conditional probability depends on theta.
    pub event_point: String,
    /// Output point at which the two versions differ.
    pub target_point: String,
    pub theta_a: String,
    pub theta_b: String,
    pub value_a: S,
    pub value_b: S,
}

impl<S: Scalar> SufficiencyWitness<S> {
    pub(crate) fn to_error(&self) -> Error {
        Error::NotSufficient {
            event_point: self.event_point.clone(),
            target_point: self.target_point.clone(),
            theta_a: self.theta_a.clone(),
            theta_b: self.theta_b.clone(),
            value_a: self.value_a.to_string(),
            value_b: self.value_b.to_string(),
        }
    }
}

/// Outcome of a sufficiency check. Exactly one of `common_version` and
/// `witness` is populated.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficiencyReport<S: Scalar> {
    pub sufficient: bool,
    /// For each sample point, the shared conditional probability of that
    /// singleton given the kernel, defined on the union of image
    /// supports.
    pub common_version: Option<Vec<RealFunction<S>>>,
    pub witness: Option<SufficiencyWitness<S>>,
}

/// Checks whether `m` is sufficient for the experiment: singleton
/// conditional probabilities must admit a parameter-free version on the
/// support of each parameter's image law. Additivity extends the
/// conclusion to every event, so singletons decide.
pub fn check_sufficiency<S: Scalar>(
    e: &Experiment<S>,
    m: &Kernel<S>,
    tol: Tol,
) -> Result<SufficiencyReport<S>> {
    if m.source() != e.space() {
        return Err(Error::SpaceMismatch { context: "check_sufficiency" });
    }
    let per_theta = e
        .members()
        .iter()
        .map(|p| singleton_conditionals(p, m, tol))
        .collect::<Result<Vec<_>>>()?;
    let n = e.space().len();
    let cols = m.target().len();
    let mut common = alloc::vec![alloc::vec![S::zero(); cols]; n];
    let mut first: Vec<Vec<Option<usize>>> = alloc::vec![alloc::vec![None; cols]; n];
    for w in 0..n {
        for j in 0..cols {
            for (ti, sc) in per_theta.iter().enumerate() {
                if !sc.defined[j] {
                    continue;
                }
                let v = &sc.table[w][j];
                match first[w][j] {
                    None => {
                        first[w][j] = Some(ti);
                        common[w][j] = v.clone();
                    }
                    Some(t0) => {
                        if !v.eq_within(&common[w][j], tol.eps) {
                            let witness = SufficiencyWitness {
                                event_point: e.space().label(w).to_string(),
                                target_point: m.target().label(j).to_string(),
                                theta_a: e.theta_label(t0).to_string(),
                                theta_b: e.theta_label(ti).to_string(),
                                value_a: common[w][j].clone(),
                                value_b: v.clone(),
                            };
                            return Ok(SufficiencyReport {
                                sufficient: false,
                                common_version: None,
                                witness: Some(witness),
                            });
                        }
                    }
                }
            }
        }
    }
    let defined: Vec<bool> = (0..cols)
        .map(|j| per_theta.iter().any(|sc| sc.defined[j]))
        .collect();
    let version = (0..n)
        .map(|w| {
            let values = common[w].iter().map(|v| alloc::vec![v.clone()]).collect();
            RealFunction::partial(m.target().clone(), 1, values, defined.clone())
                .expect("version shape matches target")
        })
        .collect();
    Ok(SufficiencyReport { sufficient: true, common_version: Some(version), witness: None })
}

/// Sufficiency via the joint experiment: `m` is sufficient exactly when
/// the output-coordinate projection is sufficient for the family of
/// product measures. Returns the report of that projection check, which
/// lives on the product space.
pub fn check_sufficiency_via_product<S: Scalar>(
    e: &Experiment<S>,
    m: &Kernel<S>,
    tol: Tol,
) -> Result<SufficiencyReport<S>> {
    let (w, joint) = e.product_with(m)?;
    check_sufficiency(&joint, &Kernel::dirac(&w.right_projection()), tol)
}

/// Outcome of a completeness check on the kernel's image family.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletenessReport<S: Scalar> {
    pub complete: bool,
    /// Kernel target space the report refers to.
    pub target: FiniteSpace,
    /// Output points charged by at least one parameter, in target order.
    pub support_union: Vec<usize>,
    /// Rank of the parameter-by-support moment matrix.
    pub rank: usize,
    /// A nonzero function on the support union with zero expectation
    /// under every parameter; present exactly when incomplete.
    pub witness: Option<RealFunction<S>>,
    /// Float-backend rank decisions depend on the tolerance.
    pub tolerance_dependent: bool,
}

impl<S: Scalar> CompletenessReport<S> {
    pub fn support_labels(&self) -> Vec<&str> {
        self.support_union.iter().map(|&j| self.target.label(j)).collect()
    }
}

/// Checks completeness of `m` for the experiment: no nonzero function on
/// the union support of the image laws may have zero mean under every
/// parameter. Equivalent to full column rank of the moment matrix
/// `D[theta][w1] = (P_theta image)(w1)` restricted to the support union.
pub fn check_completeness<S: Scalar>(
    e: &Experiment<S>,
    m: &Kernel<S>,
    tol: Tol,
) -> Result<CompletenessReport<S>> {
    if m.source() != e.space() {
        return Err(Error::SpaceMismatch { context: "check_completeness" });
    }
    let images = e
        .members()
        .iter()
        .map(|p| image(p, m))
        .collect::<Result<Vec<_>>>()?;
    let cols = m.target().len();
    let support_union: Vec<usize> = (0..cols)
        .filter(|&j| images.iter().any(|img| img.charges(j, tol)))
        .collect();
    let rows: Vec<Vec<S>> = images
        .iter()
        .map(|img| support_union.iter().map(|&j| img.mass_at(j).clone()).collect())
        .collect();
    let (rank, nullvec) = rank_and_nullvec(&rows, support_union.len(), tol.eps);
    let complete = rank == support_union.len();
    let witness = nullvec.map(|v| {
        let mut values = alloc::vec![alloc::vec![S::zero()]; cols];
        let mut defined = alloc::vec![false; cols];
        for (slot, &j) in support_union.iter().enumerate() {
            values[j] = alloc::vec![v[slot].clone()];
            defined[j] = true;
        }
        RealFunction::partial(m.target().clone(), 1, values, defined)
            .expect("witness shape matches target")
    });
    Ok(CompletenessReport {
        complete,
        target: m.target().clone(),
        support_union,
        rank,
        witness,
        tolerance_dependent: !S::EXACT,
    })
}

/// Expectation and bias of an estimator at one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaBias<S: Scalar> {
    pub theta: String,
    pub expectation: Vec<S>,
    pub bias: Vec<S>,
}

/// Outcome of an unbiasedness check against the experiment's estimand.
#[derive(Clone, Debug, PartialEq)]
pub struct UnbiasednessReport<S: Scalar> {
    pub unbiased: bool,
    pub per_theta: Vec<ThetaBias<S>>,
}

impl<S: Scalar> UnbiasednessReport<S> {
    /// First parameter with nonzero bias, as an error payload.
    pub(crate) fn to_error(&self, tol: Tol) -> Option<Error> {
        self.per_theta.iter().find_map(|tb| {
            let biased = tb.bias.iter().any(|b| !b.is_zero_within(tol.eps));
            biased.then(|| Error::NotUnbiased {
                theta: tb.theta.clone(),
                bias: crate::grid::ValueGrid::<S>::format_value(&tb.bias),
            })
        })
    }
}

/// Compares the estimator's expectation with the estimand at every
/// parameter.
pub fn check_unbiased<S: Scalar>(
    e: &Experiment<S>,
    m: &RealKernel<S>,
    tol: Tol,
) -> Result<UnbiasednessReport<S>> {
    if m.source() != e.space() {
        return Err(Error::SpaceMismatch { context: "check_unbiased" });
    }
    let est = e.require_estimand()?;
    if est.dim() != m.dim() {
        return Err(Error::LengthMismatch {
            context: "estimand dimension",
            expected: m.dim(),
            found: est.dim(),
        });
    }
    let mut unbiased = true;
    let mut per_theta = Vec::with_capacity(e.theta_count());
    for ti in 0..e.theta_count() {
        let exp = expectation(e.member(ti), m)?;
        let bias: Vec<S> = exp
            .iter()
            .zip(est.value(ti))
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        if bias.iter().any(|b| !b.is_zero_within(tol.eps)) {
            unbiased = false;
        }
        per_theta.push(ThetaBias { theta: e.theta_label(ti).to_string(), expectation: exp, bias });
    }
    Ok(UnbiasednessReport { unbiased, per_theta })
}

/// Solves `dirac(t) = compose(m1, dirac(s))` for the statistic `s` on
/// `m1`'s target by constraint propagation: every output point charged
/// from a sample point must map to that point's `t` value. Output points
/// never charged map to the first point of `t`'s target. Fails with the
/// conflicting sample pair when two charged sources disagree.
pub fn factor_through<S: Scalar>(
    t: &Statistic,
    m1: &Kernel<S>,
    tol: Tol,
) -> Result<Statistic> {
    if t.source() != m1.source() {
        return Err(Error::SpaceMismatch { context: "factor_through" });
    }
    let cols = m1.target().len();
    // For each output point: assigned t-target index and the sample
    // point that forced it.
    let mut assigned: Vec<Option<(usize, usize)>> = alloc::vec![None; cols];
    for w in 0..m1.source().len() {
        let want = t.apply_index(w);
        for (j, x) in m1.row(w).iter().enumerate() {
            if x.is_zero_within(tol.eps) {
                continue;
            }
            match assigned[j] {
                None => assigned[j] = Some((want, w)),
                Some((have, w0)) => {
                    if have != want {
                        return Err(Error::NoFactorization {
                            target_point: m1.target().label(j).to_string(),
                            source_a: m1.source().label(w0).to_string(),
                            source_b: m1.source().label(w).to_string(),
                            value_a: t.target().label(have).to_string(),
                            value_b: t.target().label(want).to_string(),
                        });
                    }
                }
            }
        }
    }
    let map = assigned
        .into_iter()
        .map(|a| a.map(|(idx, _)| idx).unwrap_or(0))
        .collect();
    Statistic::from_indices(m1.target().clone(), t.target().clone(), map)
}
