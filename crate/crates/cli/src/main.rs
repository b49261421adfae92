//! Command-line front end.
//!
//! Exit codes: 0 affirmative, 2 negative answer carrying a witness,
//! 1 hard error (bad file, unknown name, usage).

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use mkstat_cli::model::{self, Model};
use mkstat_cli::report::{format_f64, format_scalar, format_value, Table};
use mkstat_core::{
    certify_umvue, check_completeness, check_sufficiency, check_unbiased, factor_through, image,
    rao_blackwellize, risk_profile, Error as CoreError, Exact, Experiment, LossFunction, Scalar,
    Tol,
};

#[derive(Parser)]
#[command(
    name = "mkstat",
    version,
    about = "Exact calculations on finite statistical experiments: sufficiency, completeness, \
             Rao-Blackwell conditioning, Lehmann-Scheffe certification, seeded simulation"
)]
struct Cli {
    /// Experiment file (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    experiment: Option<String>,

    /// Exact rational arithmetic (the default)
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,

    /// Double-precision arithmetic with tolerance-based comparisons
    #[arg(long, global = true)]
    float: bool,

    /// Comparison tolerance for the float backend
    #[arg(long, global = true, value_name = "EPS", default_value_t = 1e-9)]
    tolerance: f64,

    /// Seed for randomized procedures
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Sampled competitors for umvue certification
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Output::Table)]
    output: Output,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Output {
    Table,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Loss {
    Squared,
    Absolute,
}

impl Loss {
    fn function<S: Scalar>(self) -> LossFunction<S> {
        match self {
            Loss::Squared => LossFunction::squared_error(),
            Loss::Absolute => LossFunction::absolute_error(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structural checks on the experiment
    Check {
        #[command(subcommand)]
        check: Check,
    },
    /// Condition an estimator on a sufficient kernel
    RaoBlackwell {
        #[arg(long)]
        estimator: String,
        #[arg(long)]
        kernel: String,
        #[arg(long, value_enum, default_value_t = Loss::Squared)]
        loss: Loss,
    },
    /// Risk of an estimator at every parameter
    Risk {
        #[arg(long)]
        estimator: String,
        #[arg(long, value_enum, default_value_t = Loss::Squared)]
        loss: Loss,
    },
    /// Certify the conditioned estimator against sampled unbiased competitors
    Umvue {
        #[arg(long)]
        estimator: String,
        #[arg(long)]
        kernel: String,
        #[arg(long, value_enum, default_value_t = Loss::Squared)]
        loss: Loss,
    },
    /// Compare seeded simulation against exact values
    Simulate {
        #[arg(long)]
        estimator: String,
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        /// Restrict to one parameter (default: all)
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, value_enum, default_value_t = Loss::Squared)]
        loss: Loss,
    },
    /// Factor a statistic through a kernel
    Factor {
        #[arg(long)]
        statistic: String,
        #[arg(long)]
        kernel: String,
    },
}

#[derive(Subcommand)]
enum Check {
    /// One conditional-probability version must serve every parameter
    Sufficiency {
        #[arg(long)]
        kernel: String,
    },
    /// The moment matrix must have full column rank on the union support
    Completeness {
        #[arg(long)]
        kernel: String,
    },
    /// The estimator's expectation must equal the estimand everywhere
    Unbiased {
        #[arg(long)]
        estimator: String,
    },
}

/// Routes tables to stdout; status lines go to stderr in CSV mode so
/// that stdout stays machine-readable.
struct Emitter {
    csv: bool,
}

impl Emitter {
    fn status(&self, line: &str) {
        if self.csv {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }

    fn table(&self, t: &Table) {
        if self.csv {
            print!("{}", t.render_csv());
        } else {
            print!("{}", t.render_aligned());
        }
    }

    fn gap(&self) {
        println!();
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{err}");
                std::process::exit(0);
            }
            _ => {
                eprint!("{err}");
                std::process::exit(1);
            }
        },
    };
    let outcome = if cli.float { run::<f64>(&cli) } else { run::<Exact>(&cli) };
    let code = match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run<S: Scalar>(cli: &Cli) -> anyhow::Result<i32> {
    let tol = Tol { eps: cli.tolerance };
    let path = cli
        .experiment
        .as_deref()
        .context("--experiment <FILE> is required")?;
    let model: Model<S> = model::load(path, tol)?;
    let em = Emitter { csv: cli.output == Output::Csv };
    match &cli.command {
        Command::Check { check } => match check {
            Check::Sufficiency { kernel } => cmd_sufficiency(&model, &em, kernel, tol),
            Check::Completeness { kernel } => cmd_completeness(&model, &em, kernel, tol),
            Check::Unbiased { estimator } => cmd_unbiased(&model, &em, estimator, tol),
        },
        Command::RaoBlackwell { estimator, kernel, loss } => {
            cmd_rao_blackwell(&model, &em, estimator, kernel, *loss, tol)
        }
        Command::Risk { estimator, loss } => cmd_risk(&model, &em, estimator, *loss, tol),
        Command::Umvue { estimator, kernel, loss } => {
            cmd_umvue(&model, &em, estimator, kernel, *loss, cli.trials, cli.seed, tol)
        }
        Command::Simulate { estimator, samples, theta, loss } => {
            cmd_simulate(&model, &em, estimator, *samples, theta.as_deref(), *loss, cli.seed)
        }
        Command::Factor { statistic, kernel } => cmd_factor(&model, &em, statistic, kernel, tol),
    }
}

/// Negative answers that carry a witness exit 2 after rendering it;
/// everything else stays an error.
fn witness_exit(em: &Emitter, err: &CoreError) -> Option<i32> {
    match err {
        CoreError::NotSufficient { event_point, target_point, theta_a, theta_b, value_a, value_b } => {
            em.status("not sufficient");
            let mut t = sufficiency_witness_table();
            t.row([
                event_point.clone(),
                target_point.clone(),
                theta_a.clone(),
                theta_b.clone(),
                value_a.clone(),
                value_b.clone(),
            ]);
            em.table(&t);
            Some(2)
        }
        CoreError::NotComplete { rank, support } => {
            em.status(&format!("not complete, rank {rank}/{support}"));
            Some(2)
        }
        CoreError::NotUnbiased { theta, bias } => {
            em.status(&format!("biased at theta {theta}: bias {bias}"));
            Some(2)
        }
        CoreError::NoFactorization { target_point, source_a, source_b, value_a, value_b } => {
            em.status("no factorization");
            let mut t = Table::new(["output", "source a", "source b", "value a", "value b"]);
            t.row([
                target_point.clone(),
                source_a.clone(),
                source_b.clone(),
                value_a.clone(),
                value_b.clone(),
            ]);
            em.table(&t);
            Some(2)
        }
        _ => None,
    }
}

fn sufficiency_witness_table() -> Table {
    Table::new(["event", "output", "theta a", "theta b", "value a", "value b"])
}

fn cmd_sufficiency<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    kernel: &str,
    tol: Tol,
) -> anyhow::Result<i32> {
    let k = model.kernel_named(kernel).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let report = check_sufficiency(e, &k, tol)?;
    if report.sufficient {
        em.status("sufficient");
        let common = report.common_version.expect("sufficient report carries the version");
        let mut headers = vec!["point".to_string()];
        headers.extend(k.target().points().iter().cloned());
        let mut t = Table::new(headers);
        for (i, point) in e.space().points().iter().enumerate() {
            let mut cells = vec![point.clone()];
            for j in 0..k.target().len() {
                cells.push(if common[i].is_defined(j) {
                    format_value(common[i].value(j))
                } else {
                    "-".to_string()
                });
            }
            t.row(cells);
        }
        em.table(&t);
        Ok(0)
    } else {
        let w = report.witness.expect("insufficient report carries a witness");
        em.status("not sufficient");
        let mut t = sufficiency_witness_table();
        t.row([
            w.event_point.clone(),
            w.target_point.clone(),
            w.theta_a.clone(),
            w.theta_b.clone(),
            format_scalar(&w.value_a),
            format_scalar(&w.value_b),
        ]);
        em.table(&t);
        Ok(2)
    }
}

fn cmd_completeness<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    kernel: &str,
    tol: Tol,
) -> anyhow::Result<i32> {
    let k = model.kernel_named(kernel).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let report = check_completeness(e, &k, tol)?;
    let support = report.support_union.len();
    if report.complete {
        em.status(&format!("complete, rank {}/{support}", report.rank));
        let mut headers = vec!["output".to_string()];
        headers.extend(e.thetas().iter().cloned());
        let mut t = Table::new(headers);
        let images: Vec<_> = e
            .members()
            .iter()
            .map(|p| image(p, &k))
            .collect::<mkstat_core::Result<_>>()?;
        for &j in &report.support_union {
            let mut cells = vec![report.target.label(j).to_string()];
            for img in &images {
                cells.push(format_scalar(img.mass_at(j)));
            }
            t.row(cells);
        }
        em.table(&t);
        Ok(0)
    } else {
        em.status(&format!("not complete, rank {}/{support}", report.rank));
        let witness = report.witness.expect("incomplete report carries a witness");
        let mut t = Table::new(["output", "value"]);
        for j in witness.defined_indices() {
            t.row([report.target.label(j).to_string(), format_value(witness.value(j))]);
        }
        em.table(&t);
        Ok(2)
    }
}

fn cmd_unbiased<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    estimator: &str,
    tol: Tol,
) -> anyhow::Result<i32> {
    let est = model.estimator_named(estimator).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let report = check_unbiased(e, &est, tol)?;
    em.status(if report.unbiased { "unbiased" } else { "biased" });
    let estimand = e.require_estimand()?;
    let mut t = Table::new(["theta", "expectation", "estimand", "bias"]);
    for (i, tb) in report.per_theta.iter().enumerate() {
        t.row([
            tb.theta.clone(),
            format_value(&tb.expectation),
            format_value(estimand.value(i)),
            format_value(&tb.bias),
        ]);
    }
    em.table(&t);
    Ok(if report.unbiased { 0 } else { 2 })
}

fn risk_pair_table<S: Scalar>(
    e: &Experiment<S>,
    before: &[S],
    after: &[S],
) -> Table {
    let mut t = Table::new(["theta", "risk", "conditioned risk"]);
    for (i, theta) in e.thetas().iter().enumerate() {
        t.row([theta.clone(), format_scalar(&before[i]), format_scalar(&after[i])]);
    }
    t
}

fn cmd_rao_blackwell<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    estimator: &str,
    kernel: &str,
    loss: Loss,
    tol: Tol,
) -> anyhow::Result<i32> {
    let est = model.estimator_named(estimator).map_err(anyhow::Error::msg)?;
    let k = model.kernel_named(kernel).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let rb = match rao_blackwellize(e, &est, &k, tol) {
        Ok(rb) => rb,
        Err(err) => {
            return match witness_exit(em, &err) {
                Some(code) => Ok(code),
                None => Err(err.into()),
            }
        }
    };
    em.status("conditional expectation given the kernel");
    let mut t = Table::new(["output", "estimate"]);
    for (j, point) in k.target().points().iter().enumerate() {
        let cell = if rb.common.is_defined(j) {
            format_value(rb.common.value(j))
        } else {
            "-".to_string()
        };
        t.row([point.clone(), cell]);
    }
    em.table(&t);
    em.gap();
    let w = loss.function::<S>();
    let before = risk_profile(e, &w, &est)?;
    let after = risk_profile(e, &w, &rb.improved)?;
    em.table(&risk_pair_table(e, &before, &after));
    Ok(0)
}

fn cmd_risk<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    estimator: &str,
    loss: Loss,
    tol: Tol,
) -> anyhow::Result<i32> {
    let _ = tol;
    let est = model.estimator_named(estimator).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let w = loss.function::<S>();
    let risks = risk_profile(e, &w, &est)?;
    let mut t = Table::new(["theta", "risk"]);
    for (i, theta) in e.thetas().iter().enumerate() {
        t.row([theta.clone(), format_scalar(&risks[i])]);
    }
    em.table(&t);
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_umvue<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    estimator: &str,
    kernel: &str,
    loss: Loss,
    trials: usize,
    seed: u64,
    tol: Tol,
) -> anyhow::Result<i32> {
    let est = model.estimator_named(estimator).map_err(anyhow::Error::msg)?;
    let k = model.kernel_named(kernel).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let w = loss.function::<S>();
    let cert = match certify_umvue(e, &w, &est, &k, trials, seed, tol) {
        Ok(cert) => cert,
        Err(err) => {
            return match witness_exit(em, &err) {
                Some(code) => Ok(code),
                None => Err(err.into()),
            }
        }
    };
    let mixtures = cert.trials.iter().filter(|t| t.mixture).count();
    em.status(&format!(
        "{} sampled unbiased competitors ({mixtures} vertex mixtures), seed {seed}",
        cert.trials.len()
    ));
    let certified = cert.certified();
    em.status(if certified {
        "certified: the conditioned estimator dominates every competitor"
    } else {
        "not certified"
    });
    let mut t = Table::new(["theta", "conditioned risk"]);
    for (i, theta) in e.thetas().iter().enumerate() {
        t.row([theta.clone(), format_scalar(&cert.rb_risks[i])]);
    }
    em.table(&t);
    if !certified {
        em.gap();
        let mut t = Table::new(["trial", "unbiased", "function agrees", "dominated"]);
        for trial in cert.trials.iter().filter(|t| !t.passed()) {
            t.row([
                trial.index.to_string(),
                yes_no(trial.unbiased_ok),
                yes_no(trial.function_agrees),
                yes_no(trial.dominated),
            ]);
        }
        em.table(&t);
    }
    Ok(if certified { 0 } else { 2 })
}

fn yes_no(b: bool) -> String {
    (if b { "yes" } else { "no" }).to_string()
}

fn format_f64_slice(xs: &[f64]) -> String {
    if xs.len() == 1 {
        format_f64(xs[0])
    } else {
        let parts: Vec<String> = xs.iter().map(|x| format_f64(*x)).collect();
        format!("[{}]", parts.join("|"))
    }
}

fn cmd_simulate<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    estimator: &str,
    samples: usize,
    theta: Option<&str>,
    loss: Loss,
    seed: u64,
) -> anyhow::Result<i32> {
    let est = model.estimator_named(estimator).map_err(anyhow::Error::msg)?;
    let e = &model.experiment;
    let w = loss.function::<S>();
    let thetas: Vec<String> = match theta {
        Some(label) => {
            e.theta_index(label)?;
            vec![label.to_string()]
        }
        None => e.thetas().to_vec(),
    };
    let mut t = Table::new([
        "theta",
        "samples",
        "mean",
        "exact mean",
        "risk",
        "exact risk",
        "max |z|",
        "in band",
    ]);
    let mut all_in_band = true;
    for label in &thetas {
        let report = mkstat_core::empirical_report(e, &w, &est, label, samples, seed)?;
        let empirical: Vec<f64> = report.mean.iter().map(|s| s.empirical).collect();
        let exact: Vec<f64> = report.mean.iter().map(|s| s.exact).collect();
        let max_z = report
            .mean
            .iter()
            .chain(std::iter::once(&report.risk))
            .filter_map(|s| s.z)
            .fold(None::<f64>, |acc, z| Some(acc.map_or(z.abs(), |a| a.max(z.abs()))));
        all_in_band &= !report.flagged;
        t.row([
            label.clone(),
            report.samples.to_string(),
            format_f64_slice(&empirical),
            format_f64_slice(&exact),
            format_f64(report.risk.empirical),
            format_f64(report.risk.exact),
            max_z.map(format_f64).unwrap_or_else(|| "-".to_string()),
            yes_no(!report.flagged),
        ]);
    }
    em.status(if all_in_band {
        "simulation agrees with the exact values"
    } else {
        "simulation left the acceptance band"
    });
    em.table(&t);
    Ok(if all_in_band { 0 } else { 2 })
}

fn cmd_factor<S: Scalar>(
    model: &Model<S>,
    em: &Emitter,
    statistic: &str,
    kernel: &str,
    tol: Tol,
) -> anyhow::Result<i32> {
    let t_stat = model.statistic_named(statistic).map_err(anyhow::Error::msg)?;
    let k = model.kernel_named(kernel).map_err(anyhow::Error::msg)?;
    match factor_through(t_stat, &k, tol) {
        Ok(factor) => {
            em.status("factors");
            let mut t = Table::new(["output", "value"]);
            for (j, point) in k.target().points().iter().enumerate() {
                t.row([
                    point.clone(),
                    factor.target().label(factor.apply_index(j)).to_string(),
                ]);
            }
            em.table(&t);
            Ok(0)
        }
        Err(err) => match witness_exit(em, &err) {
            Some(code) => Ok(code),
            None => Err(err.into()),
        },
    }
}
