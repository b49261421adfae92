//! Risk, Rao-Blackwell improvement, and optimality certification.
//!
//! The improvement step conditions a randomized estimator on a
//! sufficient kernel: the conditional expectation is a function of the
//! conditioner's output, and composing the conditioner with that
//! function gives an estimator whose risk never exceeds the original
//! under a convex loss. When the conditioner is also complete, the
//! improved estimator is the unique unbiased one up to almost-sure
//! equality; [`certify_umvue`] stress-tests that uniqueness against
//! random vertices of the unbiasedness polytope.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::compose;
use crate::conditioning::{
    conditional_expectation, vec_eq_within, RealFunction, RealKernel,
};
use crate::error::{Error, Result};
use crate::experiment::{
    check_completeness, check_sufficiency, check_unbiased, factor_through, Experiment,
};
use crate::grid::ValueGrid;
use crate::kernel::Kernel;
use crate::montecarlo::SampleStream;
use crate::scalar::{total, Scalar, Tol};
use crate::simplex::{maximize, LpOutcome};
use crate::space::Statistic;

type CustomLoss<S> = Arc<dyn Fn(&str, &[S]) -> S + Send + Sync>;

enum LossEval<S: Scalar> {
    Squared,
    Absolute,
    Custom(CustomLoss<S>),
}

impl<S: Scalar> Clone for LossEval<S> {
    fn clone(&self) -> Self {
        match self {
            LossEval::Squared => LossEval::Squared,
            LossEval::Absolute => LossEval::Absolute,
            LossEval::Custom(f) => LossEval::Custom(f.clone()),
        }
    }
}

/// Loss `W(theta, x)` evaluated on estimate vectors. The built-in losses
/// measure against the experiment's estimand; custom losses see the
/// parameter label directly.
#[derive(Clone)]
pub struct LossFunction<S: Scalar> {
    name: String,
    strictly_convex: bool,
    eval: LossEval<S>,
}

impl<S: Scalar> core::fmt::Debug for LossFunction<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LossFunction")
            .field("name", &self.name)
            .field("strictly_convex", &self.strictly_convex)
            .finish()
    }
}

impl<S: Scalar> LossFunction<S> {
    /// Squared estimation error, strictly convex in the estimate.
    pub fn squared_error() -> Self {
        LossFunction {
            name: "squared".to_string(),
            strictly_convex: true,
            eval: LossEval::Squared,
        }
    }

    /// Absolute estimation error, convex but not strictly.
    pub fn absolute_error() -> Self {
        LossFunction {
            name: "absolute".to_string(),
            strictly_convex: false,
            eval: LossEval::Absolute,
        }
    }

    /// User-supplied convex loss. `strictly_convex` is trusted and only
    /// drives the equality diagnosis; [`midpoint_convexity_violation`]
    /// exists to sanity-test the claim.
    ///
    /// [`midpoint_convexity_violation`]: Self::midpoint_convexity_violation
    pub fn custom(
        name: impl Into<String>,
        strictly_convex: bool,
        f: impl Fn(&str, &[S]) -> S + Send + Sync + 'static,
    ) -> Self {
        LossFunction { name: name.into(), strictly_convex, eval: LossEval::Custom(Arc::new(f)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn strictly_convex(&self) -> bool {
        self.strictly_convex
    }

    pub fn evaluate(&self, e: &Experiment<S>, theta_index: usize, x: &[S]) -> Result<S> {
        match &self.eval {
            LossEval::Squared => {
                let g = e.require_estimand()?.value(theta_index);
                check_dim(g.len(), x.len())?;
                Ok(total(x.iter().zip(g).map(|(a, b)| {
                    let d = a.clone() - b.clone();
                    d.clone() * d
                })))
            }
            LossEval::Absolute => {
                let g = e.require_estimand()?.value(theta_index);
                check_dim(g.len(), x.len())?;
                Ok(total(x.iter().zip(g).map(|(a, b)| (a.clone() - b.clone()).abs())))
            }
            LossEval::Custom(f) => Ok(f(e.theta_label(theta_index), x)),
        }
    }

    /// Float-valued evaluation for sampling; built-ins stay in f64, a
    /// custom loss is bridged through the scalar backend.
    pub fn evaluate_f64(&self, e: &Experiment<S>, theta_index: usize, x: &[f64]) -> Result<f64> {
        match &self.eval {
            LossEval::Squared => {
                let g = e.require_estimand()?.value(theta_index);
                check_dim(g.len(), x.len())?;
                Ok(x.iter().zip(g).map(|(a, b)| (a - b.to_f64()) * (a - b.to_f64())).sum())
            }
            LossEval::Absolute => {
                let g = e.require_estimand()?.value(theta_index);
                check_dim(g.len(), x.len())?;
                Ok(x.iter().zip(g).map(|(a, b)| (a - b.to_f64()).abs()).sum())
            }
            LossEval::Custom(f) => {
                let xs: Vec<S> = x
                    .iter()
                    .map(|&v| S::from_f64(v).ok_or(Error::LengthMismatch {
                        context: "nonfinite sample value",
                        expected: 0,
                        found: 0,
                    }))
                    .collect::<Result<_>>()?;
                Ok(f(e.theta_label(theta_index), &xs).to_f64())
            }
        }
    }

    /// Searches the pairs `(x, y)` for a midpoint-convexity violation
    /// `W((x+y)/2) > (W(x)+W(y))/2` beyond the tolerance. Returns the
    /// first offending pair.
    pub fn midpoint_convexity_violation<'a>(
        &self,
        e: &Experiment<S>,
        pairs: impl IntoIterator<Item = (&'a [S], &'a [S])>,
        tol: Tol,
    ) -> Result<Option<(String, Vec<S>, Vec<S>)>>
    where
        S: 'a,
    {
        let half = S::ratio(1, 2);
        for (x, y) in pairs {
            let mid: Vec<S> = x
                .iter()
                .zip(y)
                .map(|(a, b)| half.clone() * (a.clone() + b.clone()))
                .collect();
            for ti in 0..e.theta_count() {
                let wm = self.evaluate(e, ti, &mid)?;
                let avg = half.clone()
                    * (self.evaluate(e, ti, x)? + self.evaluate(e, ti, y)?);
                if avg.lt_beyond(&wm, tol.eps) {
                    return Ok(Some((
                        e.theta_label(ti).to_string(),
                        x.to_vec(),
                        y.to_vec(),
                    )));
                }
            }
        }
        Ok(None)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { context: "loss argument", expected, found });
    }
    Ok(())
}

/// Expected loss of the estimator at one parameter.
pub fn risk<S: Scalar>(
    e: &Experiment<S>,
    theta: &str,
    w: &LossFunction<S>,
    m: &RealKernel<S>,
) -> Result<S> {
    risk_at(e, e.theta_index(theta)?, w, m)
}

pub(crate) fn risk_at<S: Scalar>(
    e: &Experiment<S>,
    theta_index: usize,
    w: &LossFunction<S>,
    m: &RealKernel<S>,
) -> Result<S> {
    if m.source() != e.space() {
        return Err(Error::SpaceMismatch { context: "risk" });
    }
    // Loss of each grid point, then averaged through kernel and prior.
    let losses = m
        .grid()
        .values()
        .iter()
        .map(|v| w.evaluate(e, theta_index, v))
        .collect::<Result<Vec<_>>>()?;
    let p = e.member(theta_index);
    let mut acc = S::zero();
    for (i, pi) in p.mass().iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        let row_loss = total(
            m.kernel().row(i).iter().zip(&losses).map(|(k, l)| k.clone() * l.clone()),
        );
        acc = acc + pi.clone() * row_loss;
    }
    Ok(acc)
}

/// All risks in parameter order.
pub fn risk_profile<S: Scalar>(
    e: &Experiment<S>,
    w: &LossFunction<S>,
    m: &RealKernel<S>,
) -> Result<Vec<S>> {
    (0..e.theta_count()).map(|ti| risk_at(e, ti, w, m)).collect()
}

/// Result of conditioning an estimator on a sufficient kernel.
#[derive(Clone, Debug)]
pub struct RaoBlackwellization<S: Scalar> {
    /// The sufficient conditioning kernel.
    pub conditioner: Kernel<S>,
    /// Shared conditional expectation on the conditioner's target,
    /// defined on the union of image supports; off that union the stored
    /// value is the one at the first charged point.
    pub common: RealFunction<S>,
    /// The conditional expectation as a statistic onto its value space.
    pub statistic: Statistic,
    /// Grid on the value space.
    pub values: ValueGrid<S>,
    /// Conditioner composed with the value statistic: the improved
    /// estimator on the sample space.
    pub improved: RealKernel<S>,
}

/// Conditions `m1` on the sufficient kernel `m2`. The conditional
/// expectation has a parameter-free version; composing it after `m2`
/// yields an estimator with the same expectation and, under convex loss,
/// no larger risk. Fails with the sufficiency witness when `m2` is not
/// sufficient.
pub fn rao_blackwellize<S: Scalar>(
    e: &Experiment<S>,
    m1: &RealKernel<S>,
    m2: &Kernel<S>,
    tol: Tol,
) -> Result<RaoBlackwellization<S>> {
    if m1.source() != e.space() || m2.source() != e.space() {
        return Err(Error::SpaceMismatch { context: "rao_blackwellize" });
    }
    let suff = check_sufficiency(e, m2, tol)?;
    if let Some(wit) = &suff.witness {
        return Err(wit.to_error());
    }
    let n2 = m2.target().len();
    let dim = m1.dim();
    let mut merged: Vec<Option<Vec<S>>> = alloc::vec![None; n2];
    for ti in 0..e.theta_count() {
        let ce = conditional_expectation(e.member(ti), m1, m2, tol)?;
        for w2 in 0..n2 {
            if !ce.is_defined(w2) {
                continue;
            }
            match &merged[w2] {
                None => merged[w2] = Some(ce.value(w2).to_vec()),
                Some(existing) => {
                    // Sufficiency makes the versions agree on shared
                    // support; exact arithmetic keeps that an identity.
                    if S::EXACT {
                        debug_assert!(vec_eq_within(existing, ce.value(w2), tol));
                    }
                }
            }
        }
    }
    let first_charged = merged
        .iter()
        .position(|v| v.is_some())
        .expect("image laws have nonempty support");
    let fallback = merged[first_charged].clone().expect("position found above");
    let defined: Vec<bool> = merged.iter().map(|v| v.is_some()).collect();
    let values: Vec<Vec<S>> = merged
        .into_iter()
        .map(|v| v.unwrap_or_else(|| fallback.clone()))
        .collect();
    let common = RealFunction::partial(m2.target().clone(), dim, values, defined)?;
    let value_grid = ValueGrid::new(m2.target().clone(), dim, common.values().to_vec())?;
    let (statistic, values) =
        value_grid.collapse(alloc::format!("{}-cond-mean", m2.target().id()));
    let improved_kernel = compose(m2, &Kernel::dirac(&statistic))?;
    let improved = RealKernel::new(improved_kernel, values.clone())?;
    Ok(RaoBlackwellization { conditioner: m2.clone(), common, statistic, values, improved })
}

/// Risk pair at one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaRisks<S: Scalar> {
    pub theta: String,
    pub candidate: S,
    pub reference: S,
}

/// Equality analysis at one parameter under a strictly convex loss.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualityDiagnosis {
    pub theta: String,
    /// Candidate and reference risks coincide.
    pub risks_equal: bool,
    /// The reference estimator's value is almost surely determined by
    /// the conditioner output: wherever the data and the conditioner
    /// output are jointly charged, every charged estimate equals the
    /// conditional mean at that output. Under strict convexity this
    /// Jensen equality case is the only way risks can coincide.
    pub already_conditional: bool,
}

/// Risk comparison of two estimators on the same experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskReport<S: Scalar> {
    pub per_theta: Vec<ThetaRisks<S>>,
    /// Candidate risk is nowhere larger.
    pub dominates: bool,
    /// Parameters where the candidate is strictly better.
    pub strict_at: Vec<String>,
    /// Present when a conditioning context is supplied and the loss is
    /// strictly convex.
    pub equality_diagnosis: Option<Vec<EqualityDiagnosis>>,
}

/// Compares `candidate` against `reference` at every parameter. When
/// `conditioning` is the Rao-Blackwellization that produced `candidate`
/// from `reference` and the loss is strictly convex, each parameter also
/// gets the equality diagnosis: risks coincide exactly when the
/// reference is already a function of the conditioner almost surely.
pub fn compare_risks<S: Scalar>(
    e: &Experiment<S>,
    w: &LossFunction<S>,
    candidate: &RealKernel<S>,
    reference: &RealKernel<S>,
    conditioning: Option<&RaoBlackwellization<S>>,
    tol: Tol,
) -> Result<RiskReport<S>> {
    if candidate.source() != e.space() || reference.source() != e.space() {
        return Err(Error::SpaceMismatch { context: "compare_risks" });
    }
    let mut per_theta = Vec::with_capacity(e.theta_count());
    let mut dominates = true;
    let mut strict_at = Vec::new();
    for ti in 0..e.theta_count() {
        let cand = risk_at(e, ti, w, candidate)?;
        let refr = risk_at(e, ti, w, reference)?;
        if !cand.le_within(&refr, tol.eps) {
            dominates = false;
        }
        if cand.lt_beyond(&refr, tol.eps) {
            strict_at.push(e.theta_label(ti).to_string());
        }
        per_theta.push(ThetaRisks { theta: e.theta_label(ti).to_string(), candidate: cand, reference: refr });
    }
    let equality_diagnosis = match conditioning {
        Some(rb) if w.strictly_convex() => {
            let diags = (0..e.theta_count())
                .map(|ti| {
                    let p = e.member(ti);
                    // The conditional law of the estimate given each
                    // conditioner output must be degenerate: every triple
                    // (data point, output, estimate) with joint mass
                    // carries the conditional mean and nothing else.
                    let already = (0..e.space().len()).all(|wi| {
                        if !p.charges(wi, tol) {
                            return true;
                        }
                        (0..rb.conditioner.target().len()).all(|w2| {
                            rb.conditioner.entry(wi, w2).is_zero_within(tol.eps)
                                || (0..reference.kernel().target().len()).all(|g| {
                                    reference.kernel().entry(wi, g).is_zero_within(tol.eps)
                                        || vec_eq_within(
                                            reference.grid().value(g),
                                            rb.common.value(w2),
                                            tol,
                                        )
                                })
                        })
                    });
                    let tr = &per_theta[ti];
                    EqualityDiagnosis {
                        theta: tr.theta.clone(),
                        risks_equal: tr.candidate.eq_within(&tr.reference, tol.eps),
                        already_conditional: already,
                    }
                })
                .collect();
            Some(diags)
        }
        _ => None,
    };
    Ok(RiskReport { per_theta, dominates, strict_at, equality_diagnosis })
}

/// One random competitor from the unbiasedness polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct UmvueTrial<S: Scalar> {
    pub index: usize,
    /// Vertex when false, strict mixture of two vertices when true.
    pub mixture: bool,
    /// The sampled estimator re-verified as unbiased.
    pub unbiased_ok: bool,
    /// Conditioning the competitor reproduced the reference conditional
    /// expectation on the support union.
    pub function_agrees: bool,
    /// Reference risk <= conditioned risk <= competitor risk, each
    /// parameter.
    pub dominated: bool,
    pub competitor_risks: Vec<S>,
    pub conditioned_risks: Vec<S>,
}

impl<S: Scalar> UmvueTrial<S> {
    pub fn passed(&self) -> bool {
        self.unbiased_ok && self.function_agrees && self.dominated
    }
}

/// Evidence that the Rao-Blackwellized estimator is the minimum-risk
/// unbiased one: random unbiased competitors never beat it, and their
/// conditional expectations collapse to the same function.
#[derive(Clone, Debug)]
pub struct UmvueCertificate<S: Scalar> {
    pub rb: RaoBlackwellization<S>,
    pub rb_risks: Vec<S>,
    /// Output points of the conditioner charged by some parameter.
    pub support_union: Vec<usize>,
    pub trials: Vec<UmvueTrial<S>>,
}

impl<S: Scalar> UmvueCertificate<S> {
    pub fn certified(&self) -> bool {
        self.trials.iter().all(UmvueTrial::passed)
    }

    pub fn violations(&self) -> Vec<usize> {
        self.trials.iter().filter(|t| !t.passed()).map(|t| t.index).collect()
    }
}

/// Certifies minimum-risk unbiasedness of `rao_blackwellize(m1, m2)` by
/// sampling `trials` random unbiased estimators: even trials take a
/// vertex of the unbiasedness polytope (random linear objective), odd
/// trials a strict mixture of two vertices. Preconditions: `m2`
/// sufficient and complete, `m1` unbiased; violations surface as errors
/// carrying the witness. Zero trials yield a vacuous certificate.
pub fn certify_umvue<S: Scalar>(
    e: &Experiment<S>,
    w: &LossFunction<S>,
    m1: &RealKernel<S>,
    m2: &Kernel<S>,
    trials: usize,
    seed: u64,
    tol: Tol,
) -> Result<UmvueCertificate<S>> {
    let completeness = check_completeness(e, m2, tol)?;
    if !completeness.complete {
        return Err(Error::NotComplete {
            rank: completeness.rank,
            support: completeness.support_union.len(),
        });
    }
    let unbiased = check_unbiased(e, m1, tol)?;
    if let Some(err) = unbiased.to_error(tol) {
        return Err(err);
    }
    // Sufficiency is rechecked inside; an insufficient kernel errors out
    // with its witness.
    let rb = rao_blackwellize(e, m1, m2, tol)?;
    let rb_risks = risk_profile(e, w, &rb.improved)?;
    let support_union = completeness.support_union.clone();

    // Value pool for competitors: the estimator's own grid joined with
    // the estimand vectors, deduplicated exactly. The polytope of
    // unbiased estimators over this pool contains m1, hence is nonempty.
    let est = e.require_estimand()?;
    let dim = m1.dim();
    let mut pool: Vec<Vec<S>> = Vec::new();
    for v in m1.grid().values() {
        if !pool.contains(v) {
            pool.push(v.clone());
        }
    }
    for v in est.values() {
        if !pool.contains(v) {
            pool.push(v.clone());
        }
    }
    let (pool_space, pool_grid) =
        ValueGrid::value_space(alloc::format!("{}-pool", m1.kernel().target().id()), dim, pool.clone())?;

    // Equality system: rows per sample point (mass one) and per
    // parameter coordinate (unbiasedness).
    let n = e.space().len();
    let g = pool.len();
    let nvars = n * g;
    let mut a: Vec<Vec<S>> = Vec::new();
    let mut b: Vec<S> = Vec::new();
    for wi in 0..n {
        let mut row = alloc::vec![S::zero(); nvars];
        for slot in row.iter_mut().skip(wi * g).take(g) {
            *slot = S::one();
        }
        a.push(row);
        b.push(S::one());
    }
    for ti in 0..e.theta_count() {
        let p = e.member(ti);
        for c in 0..dim {
            let mut row = alloc::vec![S::zero(); nvars];
            for wi in 0..n {
                for gi in 0..g {
                    row[wi * g + gi] = p.mass_at(wi).clone() * pool[gi][c].clone();
                }
            }
            a.push(row);
            b.push(est.value(ti)[c].clone());
        }
    }

    let solve_vertex = |stream: &mut SampleStream| -> Vec<S> {
        let c: Vec<S> = (0..nvars)
            .map(|_| S::ratio(stream.next_u32() as i64 - 2_147_483_648, 2_147_483_648))
            .collect();
        match maximize(&a, &b, &c, tol.eps) {
            LpOutcome::Optimal(x) => x,
            LpOutcome::Infeasible => {
                unreachable!("unbiasedness polytope contains the original estimator")
            }
            LpOutcome::Unbounded => {
                unreachable!("polytope is contained in a product of simplices")
            }
        }
    };

    let mut out_trials = Vec::with_capacity(trials);
    for index in 0..trials {
        // One dedicated stream per trial: adding trials never perturbs
        // earlier ones.
        let mut stream = SampleStream::new(seed, index as u64);
        let mixture = index % 2 == 1;
        let x = if mixture {
            let v1 = solve_vertex(&mut stream);
            let v2 = solve_vertex(&mut stream);
            // Strictly interior mixing weight in (0, 1).
            let lambda = S::ratio(stream.next_u32() as i64 + 1, 4_294_967_298);
            let co = S::one() - lambda.clone();
            v1.iter()
                .zip(&v2)
                .map(|(p, q)| lambda.clone() * p.clone() + co.clone() * q.clone())
                .collect::<Vec<S>>()
        } else {
            solve_vertex(&mut stream)
        };
        let rows: Vec<Vec<S>> = (0..n).map(|wi| x[wi * g..(wi + 1) * g].to_vec()).collect();
        let kernel = Kernel::with_tol(e.space().clone(), pool_space.clone(), rows, tol)?;
        let competitor = RealKernel::new(kernel, pool_grid.clone())?;
        let unbiased_ok = check_unbiased(e, &competitor, tol)?.unbiased;
        let conditioned = rao_blackwellize(e, &competitor, m2, tol)?;
        let competitor_risks = risk_profile(e, w, &competitor)?;
        let conditioned_risks = risk_profile(e, w, &conditioned.improved)?;
        let dominated = (0..e.theta_count()).all(|ti| {
            rb_risks[ti].le_within(&conditioned_risks[ti], tol.eps)
                && conditioned_risks[ti].le_within(&competitor_risks[ti], tol.eps)
        });
        let function_agrees = support_union.iter().all(|&w2| {
            vec_eq_within(conditioned.common.value(w2), rb.common.value(w2), tol)
        });
        out_trials.push(UmvueTrial {
            index,
            mixture,
            unbiased_ok,
            function_agrees,
            dominated,
            competitor_risks,
            conditioned_risks,
        });
    }
    Ok(UmvueCertificate { rb, rb_risks, support_union, trials: out_trials })
}

/// Outcome of the Lehmann-Scheffe construction for statistics.
#[derive(Clone, Debug)]
pub struct LsCertificate<S: Scalar> {
    /// Statistic on the kernel's target solving the factorization.
    pub factor: Statistic,
    /// The conditional expectation of the target statistic equals the
    /// factor (with its grid values) on the support union.
    pub rb_matches_factor: bool,
    pub umvue: UmvueCertificate<S>,
}

impl<S: Scalar> LsCertificate<S> {
    pub fn certified(&self) -> bool {
        self.rb_matches_factor && self.umvue.certified()
    }
}

/// Lehmann-Scheffe for statistics: given an unbiased target statistic
/// `t` (with grid) and a sufficient complete kernel `m1`, solve the
/// factorization `dirac(t) = compose(m1, dirac(s))`, confirm that
/// conditioning `t` on `m1` reproduces `s`, and certify minimum risk.
pub fn ls_for_statistics<S: Scalar>(
    e: &Experiment<S>,
    t: &Statistic,
    t_grid: &ValueGrid<S>,
    m1: &Kernel<S>,
    w: &LossFunction<S>,
    trials: usize,
    seed: u64,
    tol: Tol,
) -> Result<LsCertificate<S>> {
    let suff = check_sufficiency(e, m1, tol)?;
    if let Some(wit) = &suff.witness {
        return Err(wit.to_error());
    }
    let completeness = check_completeness(e, m1, tol)?;
    if !completeness.complete {
        return Err(Error::NotComplete {
            rank: completeness.rank,
            support: completeness.support_union.len(),
        });
    }
    let t_est = RealKernel::from_statistic(t, t_grid.clone())?;
    let unbiased = check_unbiased(e, &t_est, tol)?;
    if let Some(err) = unbiased.to_error(tol) {
        return Err(err);
    }
    let factor = factor_through(t, m1, tol)?;
    let umvue = certify_umvue(e, w, &t_est, m1, trials, seed, tol)?;
    let rb_matches_factor = umvue.support_union.iter().all(|&w1| {
        vec_eq_within(
            umvue.rb.common.value(w1),
            t_grid.value(factor.apply_index(w1)),
            tol,
        )
    });
    Ok(LsCertificate { factor, rb_matches_factor, umvue })
}
