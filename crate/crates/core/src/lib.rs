//! Exact calculus of Markov kernels on finite statistical experiments.
//!
//! Everything here is finite and explicit: spaces are ordered label
//! lists, distributions are mass vectors, kernels are row-stochastic
//! matrices, and randomized estimators are kernels whose target carries
//! a numeric grid. On top of that representation the crate builds the
//! conditional expectation of one kernel given another, sufficiency and
//! completeness checks with witnesses, and the Rao-Blackwell and
//! Lehmann-Scheffe procedures for randomized estimators, including a
//! vertex-sampling stress test of minimum-risk unbiasedness.
//!
//! Two scalar backends share one code path: arbitrary-precision
//! rationals ([`Exact`]) give reference semantics, plain `f64` mirrors
//! them under an explicit tolerance ([`Tol`]). The crate is `no_std`
//! (with `alloc`), so the numeric core stays free of IO concerns.
//!
//! ```
//! use mkstat_core::{
//!     rat, Distribution, Experiment, FiniteSpace, Kernel, LossFunction, RealKernel,
//!     Statistic, Tol, ValueGrid,
//! };
//!
//! // Two independent Bernoulli(theta) trials.
//! let space = FiniteSpace::from_labels("pair", &["00", "01", "10", "11"]).unwrap();
//! let member = |n: i64, d: i64| {
//!     let p = rat(n, d);
//!     let q = rat(1, 1) - p.clone();
//!     Distribution::new(
//!         space.clone(),
//!         vec![q.clone() * q.clone(), q.clone() * p.clone(), p.clone() * q, p.clone() * p],
//!     )
//!     .unwrap()
//! };
//! let e = Experiment::new(
//!     space.clone(),
//!     vec![
//!         ("1/5".into(), member(1, 5)),
//!         ("1/2".into(), member(1, 2)),
//!         ("4/5".into(), member(4, 5)),
//!     ],
//! )
//! .unwrap()
//! .with_estimand(vec![vec![rat(1, 5)], vec![rat(1, 2)], vec![rat(4, 5)]])
//! .unwrap();
//!
//! // Estimate theta by reporting one of the two trials at random.
//! let bits = FiniteSpace::from_labels("bit", &["0", "1"]).unwrap();
//! let flip = Kernel::new(
//!     space.clone(),
//!     bits.clone(),
//!     vec![
//!         vec![rat(1, 1), rat(0, 1)],
//!         vec![rat(1, 2), rat(1, 2)],
//!         vec![rat(1, 2), rat(1, 2)],
//!         vec![rat(0, 1), rat(1, 1)],
//!     ],
//! )
//! .unwrap();
//! let estimator =
//!     RealKernel::new(flip, ValueGrid::scalar(bits, vec![rat(0, 1), rat(1, 1)]).unwrap())
//!         .unwrap();
//!
//! // Condition on the sufficient success count: risk drops by half.
//! let sum_target = FiniteSpace::from_labels("sum", &["0", "1", "2"]).unwrap();
//! let sum = Statistic::from_indices(space, sum_target, vec![0, 1, 1, 2]).unwrap();
//! let rb = mkstat_core::rao_blackwellize(&e, &estimator, &Kernel::dirac(&sum), Tol::default())
//!     .unwrap();
//! let loss = LossFunction::squared_error();
//! assert_eq!(mkstat_core::risk(&e, "1/5", &loss, &estimator).unwrap(), rat(4, 25));
//! assert_eq!(mkstat_core::risk(&e, "1/5", &loss, &rb.improved).unwrap(), rat(2, 25));
//! ```
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod conditioning;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod grid;
pub mod kernel;
mod linalg;
pub mod montecarlo;
pub mod scalar;
mod simplex;
pub mod space;

pub use algebra::{
    compose, compose_with_statistic, extend_kernel, image, pair_kernel, product_measure,
    pushforward, ProductSpace,
};
pub use conditioning::{
    conditional_distribution, conditional_expectation, conditional_expectation_of_function,
    conditional_expectation_via_product, conditional_probability, expectation, lift_to_product,
    mean_function, weighted_measure, RealFunction, RealKernel, SignedMeasure,
};
pub use dist::Distribution;
pub use error::{Error, Result};
pub use estimation::{
    certify_umvue, compare_risks, ls_for_statistics, rao_blackwellize, risk, risk_profile,
    EqualityDiagnosis, LossFunction, LsCertificate, RaoBlackwellization, RiskReport, ThetaRisks,
    UmvueCertificate, UmvueTrial,
};
pub use experiment::{
    check_completeness, check_sufficiency, check_sufficiency_via_product, check_unbiased,
    factor_through, CompletenessReport, Estimand, Experiment, SufficiencyReport,
    SufficiencyWitness, ThetaBias, UnbiasednessReport,
};
pub use grid::ValueGrid;
pub use kernel::Kernel;
pub use montecarlo::{
    empirical_report, sample_estimator, sample_point, EmpiricalReport, EmpiricalSummary,
    SampleStream,
};
pub use scalar::{rat, Exact, Scalar, Tol};
pub use space::{FiniteSpace, Statistic};
