//! Fixtures and randomized instance generators shared by the
//! integration suites.
//!
//! The fixture is the two-coin Bernoulli experiment: two independent
//! tosses with the same success probability, three parameter values,
//! the success probability as estimand. Random instances are built
//! from a deterministic sample stream so every run sees the same
//! cases.

use mkstat_core::{
    pair_kernel, rat, Distribution, Exact, Experiment, FiniteSpace, Kernel, RealKernel,
    SampleStream, Statistic, ValueGrid,
};

pub fn pair_space() -> FiniteSpace {
    FiniteSpace::from_labels("pair", &["00", "01", "10", "11"]).unwrap()
}

pub fn bernoulli_pair(n: i64, d: i64) -> Distribution<Exact> {
    let p = rat(n, d);
    let q = rat(d - n, d);
    Distribution::new(
        pair_space(),
        vec![&q * &q, &q * &p, &p * &q, &p * &p],
    )
    .unwrap()
}

/// Three-member family at success probabilities 1/5, 1/2, 4/5 with the
/// success probability as the estimand.
pub fn fixture_experiment() -> Experiment<Exact> {
    let members = vec![
        ("1/5".to_string(), bernoulli_pair(1, 5)),
        ("1/2".to_string(), bernoulli_pair(1, 2)),
        ("4/5".to_string(), bernoulli_pair(4, 5)),
    ];
    Experiment::new(pair_space(), members)
        .unwrap()
        .with_estimand(vec![vec![rat(1, 5)], vec![rat(1, 2)], vec![rat(4, 5)]])
        .unwrap()
}

/// Number of successes, the sufficient statistic of the fixture.
pub fn sum_statistic() -> Statistic {
    let target = FiniteSpace::from_labels("sum", &["0", "1", "2"]).unwrap();
    Statistic::from_indices(pair_space(), target, vec![0, 1, 1, 2]).unwrap()
}

/// Unbiased randomized estimator: report the first toss or the second,
/// chosen by a fair coin.
pub fn coinflip_estimator() -> RealKernel<Exact> {
    let target = FiniteSpace::from_labels("flip", &["0", "1"]).unwrap();
    let h = rat(1, 2);
    let kernel = Kernel::new(
        pair_space(),
        target.clone(),
        vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![h.clone(), h.clone()],
            vec![h.clone(), h],
            vec![rat(0, 1), rat(1, 1)],
        ],
    )
    .unwrap();
    let grid = ValueGrid::scalar(target, vec![rat(0, 1), rat(1, 1)]).unwrap();
    RealKernel::new(kernel, grid).unwrap()
}

/// Grid putting the value t/2 on each point of the sum space.
pub fn half_sum_grid() -> ValueGrid<Exact> {
    ValueGrid::scalar(
        sum_statistic().target().clone(),
        vec![rat(0, 1), rat(1, 2), rat(1, 1)],
    )
    .unwrap()
}

/// Deterministic estimator reporting half the number of successes.
pub fn half_sum_estimator() -> RealKernel<Exact> {
    RealKernel::from_statistic(&sum_statistic(), half_sum_grid()).unwrap()
}

pub fn rand_below(stream: &mut SampleStream, n: usize) -> usize {
    (stream.next_u32() as usize) % n
}

pub fn rand_space(stream: &mut SampleStream, prefix: &str, max_len: usize) -> FiniteSpace {
    let n = 1 + rand_below(stream, max_len);
    let points = (0..n).map(|i| format!("{prefix}{i}")).collect();
    FiniteSpace::new(prefix, points).unwrap()
}

/// Random exact distribution; zero masses allowed unless `full_support`.
pub fn rand_distribution(
    stream: &mut SampleStream,
    space: &FiniteSpace,
    full_support: bool,
) -> Distribution<Exact> {
    loop {
        let weights: Vec<i64> = (0..space.len())
            .map(|_| {
                if full_support {
                    1 + rand_below(stream, 8) as i64
                } else {
                    rand_below(stream, 5) as i64
                }
            })
            .collect();
        let sum: i64 = weights.iter().sum();
        if sum == 0 {
            continue;
        }
        let mass = weights.iter().map(|&k| rat(k, sum)).collect();
        return Distribution::new(space.clone(), mass).unwrap();
    }
}

pub fn rand_kernel(
    stream: &mut SampleStream,
    source: &FiniteSpace,
    target: &FiniteSpace,
) -> Kernel<Exact> {
    let rows = (0..source.len())
        .map(|_| rand_distribution(stream, target, false).mass().to_vec())
        .collect();
    Kernel::new(source.clone(), target.clone(), rows).unwrap()
}

pub fn rand_statistic(
    stream: &mut SampleStream,
    source: &FiniteSpace,
    target: &FiniteSpace,
) -> Statistic {
    let map = (0..source.len()).map(|_| rand_below(stream, target.len())).collect();
    Statistic::from_indices(source.clone(), target.clone(), map).unwrap()
}

/// Small rational grid values in [-4, 4] with denominators up to 3.
pub fn rand_grid(stream: &mut SampleStream, space: &FiniteSpace, dim: usize) -> ValueGrid<Exact> {
    let values = (0..space.len())
        .map(|_| {
            (0..dim)
                .map(|_| rat(rand_below(stream, 9) as i64 - 4, 1 + rand_below(stream, 3) as i64))
                .collect()
        })
        .collect();
    ValueGrid::new(space.clone(), dim, values).unwrap()
}

pub fn rand_real_kernel(
    stream: &mut SampleStream,
    source: &FiniteSpace,
    target_len: usize,
    dim: usize,
) -> RealKernel<Exact> {
    let target = rand_space(stream, "v", target_len);
    let kernel = rand_kernel(stream, source, &target);
    let grid = rand_grid(stream, &target, dim);
    RealKernel::new(kernel, grid).unwrap()
}

/// Family in which `s` is sufficient by construction: the parameter
/// moves only the law of s while the split inside each fiber is shared
/// by every member.
pub fn rand_sufficient_family(
    stream: &mut SampleStream,
    s: &Statistic,
    theta_count: usize,
) -> Experiment<Exact> {
    let space = s.source().clone();
    let fibers: Vec<Vec<usize>> = (0..s.target().len()).map(|t| s.fiber(t)).collect();
    // Shared within-fiber conditional masses.
    let mut shared = vec![rat(0, 1); space.len()];
    for fiber in &fibers {
        if fiber.is_empty() {
            continue;
        }
        let weights: Vec<i64> = fiber.iter().map(|_| 1 + rand_below(stream, 6) as i64).collect();
        let total: i64 = weights.iter().sum();
        for (&w, &k) in fiber.iter().zip(&weights) {
            shared[w] = rat(k, total);
        }
    }
    let members = (0..theta_count)
        .map(|ti| {
            loop {
                let weights: Vec<i64> = fibers
                    .iter()
                    .map(|f| if f.is_empty() { 0 } else { 1 + rand_below(stream, 8) as i64 })
                    .collect();
                let total: i64 = weights.iter().sum();
                if total == 0 {
                    continue;
                }
                let mut mass = vec![rat(0, 1); space.len()];
                for (t, fiber) in fibers.iter().enumerate() {
                    for &w in fiber {
                        mass[w] = rat(weights[t], total) * &shared[w];
                    }
                }
                let d = Distribution::new(space.clone(), mass).unwrap();
                return (format!("t{ti}"), d);
            }
        })
        .collect();
    let estimand = (0..theta_count)
        .map(|_| vec![rat(rand_below(stream, 7) as i64 - 3, 1 + rand_below(stream, 3) as i64)])
        .collect();
    Experiment::new(space, members).unwrap().with_estimand(estimand).unwrap()
}

/// Sufficient randomized kernel: the statistic's output paired with
/// independent noise. Conditioning on the pair is conditioning on the
/// statistic alone.
pub fn noisy_sufficient_kernel(stream: &mut SampleStream, s: &Statistic) -> Kernel<Exact> {
    let noise_space = rand_space(stream, "n", 3);
    let noise = rand_distribution(stream, &noise_space, true);
    let noise_kernel = Kernel::constant(s.source().clone(), &noise);
    let (_, k) = pair_kernel(&Kernel::dirac(s), &noise_kernel).unwrap();
    k
}
