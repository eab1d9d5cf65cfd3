//! `pdld`: samplers, exact probabilities, rate functions, verification
//! suites and rate-curve tables from the command line.

mod emit;

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use pdld::exact::{
    ageclass1_log_pmf, ageclass_joint_log_pmf, conditional_sampling_log_prob, dirichlet_k_log_pmf,
    esf_log_pmf, kn_log_mgf, kn_log_pmf, kn_mean, sampling_log_prob, stirling1_log_row,
};
use pdld::lab::{
    dirichlet_rate_curve, geometric_grid, lln_table, mgf_limit_curve, rate_curve, EventSpec,
    KnScale, ScalingRegime, ThetaOfK,
};
use pdld::rates::{self, RegimeCase};
use pdld::samplers::{
    sample_dirichlet_symmetric, sample_ewens_partition, sample_gem, sample_kn, sample_pd,
    sample_size_biased_dirichlet,
};
use pdld::verify::{self, SuiteParams};
use pdld::{AllelePartition, LogReal, MassVector, SeedSpec, Table};
use serde_json::{json, Map, Value};

use emit::{Document, Format};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "pdld",
    version,
    about = "Poisson-Dirichlet and Ewens sampling formula toolkit"
)]
struct Cli {
    /// Result file; defaults to stdout, or a file in the output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Directory for result files when --output is absent.
    #[arg(long, global = true, env = "PDLD_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Wall-clock budget in seconds; work left when it runs out is skipped
    /// and the result is flagged as partial.
    #[arg(long, global = true)]
    time_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw from a sampler: gem, pd, dirichlet, size-biased, ewens, kn.
    Sample {
        which: String,
        #[command(flatten)]
        p: Params,
    },
    /// Exact probabilities: esf, dirichlet, kn, kn-mean, mgf, ageclass,
    /// ageclass-joint, sampling, stirling.
    Pmf {
        which: String,
        #[command(flatten)]
        p: Params,
    },
    /// Rate functions: residual, relent, constrained, beta-stick, sk,
    /// sk-sticks, sk-marginal, esf, kn, caseA..caseD, cgf, ic, ageclass.
    Rate {
        which: String,
        #[command(flatten)]
        p: Params,
    },
    /// Run a verification suite by id, or `all` for the acceptance suite.
    Verify {
        id: String,
        #[command(flatten)]
        p: Params,
    },
    /// Tables for plotting: rate-curve, mgf, lln, dirichlet-curve.
    Table {
        which: String,
        #[command(flatten)]
        p: Params,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct Params {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    /// Number of alleles K.
    #[arg(long, visible_alias = "K")]
    alleles: Option<u64>,
    /// Scaling regime: A, B, C or D.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated reals.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
    /// Comma-separated probabilities.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Comma-separated age-class sizes.
    #[arg(long, value_delimiter = ',')]
    ks: Vec<u64>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Geometric grid `start:factor:count`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    #[arg(long)]
    delta: Option<f64>,
    /// Allelic partition `a_1,...,a_n`.
    #[arg(long)]
    partition: Option<AllelePartition>,
    /// Number of samples or replicates.
    #[arg(long, visible_alias = "N")]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    /// Number of GEM sticks.
    #[arg(long)]
    count: Option<usize>,
    /// Number of Poisson-Dirichlet atoms kept.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Symmetric Dirichlet parameter.
    #[arg(long)]
    alpha: Option<f64>,
    /// Event kind for rate curves.
    #[arg(long)]
    event: Option<String>,
    /// Coupling scale for cases B and D.
    #[arg(long)]
    scale: Option<f64>,
    /// Coupling exponent for cases B and D, or for power-law θ(K).
    #[arg(long, allow_negative_numbers = true)]
    exponent: Option<f64>,
    /// θ(K) coupling: proportional or power.
    #[arg(long)]
    coupling: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
struct Grid {
    start: f64,
    factor: f64,
    count: usize,
}

impl Grid {
    fn values(&self) -> Vec<f64> {
        geometric_grid(self.start, self.factor, self.count)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.factor, self.count)
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:factor:count, got {s:?}"));
    }
    let start: f64 = parts[0].parse().map_err(|e| format!("start: {e}"))?;
    let factor: f64 = parts[1].parse().map_err(|e| format!("factor: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("count: {e}"))?;
    if !(start > 0.0 && start.is_finite()) || !(factor > 1.0 && factor.is_finite()) || count == 0 {
        return Err(format!("need start > 0, factor > 1, count >= 1; got {s:?}"));
    }
    Ok(Grid {
        start,
        factor,
        count,
    })
}

impl Params {
    fn meta(&self) -> Map<String, Value> {
        let mut m = Map::new();
        macro_rules! put {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    m.insert(stringify!($f).into(), json!(v.to_string()));
                }
            )*};
        }
        put!(theta, n, k, alleles, case, c, t, grid, delta, partition, samples, count, top, eps);
        put!(alpha, event, scale, exponent, coupling);
        macro_rules! put_list {
            ($($f:ident),*) => {$(
                if !self.$f.is_empty() {
                    let s: Vec<String> = self.$f.iter().map(|v| v.to_string()).collect();
                    m.insert(stringify!($f).into(), json!(s.join(",")));
                }
            )*};
        }
        put_list!(x, p, ks);
        m
    }

    fn seed(&self) -> SeedSpec {
        SeedSpec::new(self.seed.unwrap_or(DEFAULT_SEED), self.stream.unwrap_or(0))
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(pdld::Error),
    Io(io::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) => write!(f, "usage error: {s}"),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<pdld::Error> for Failure {
    fn from(e: pdld::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Res<T> = Result<T, Failure>;

fn need<T: Clone>(v: &Option<T>, key: &str) -> Res<T> {
    v.clone()
        .ok_or_else(|| Failure::Usage(format!("missing required --{key}")))
}

fn need_list<T: Clone>(v: &[T], key: &str) -> Res<Vec<T>> {
    if v.is_empty() {
        Err(Failure::Usage(format!("missing required --{key}")))
    } else {
        Ok(v.to_vec())
    }
}

fn small_n(n: u64) -> Res<u32> {
    u32::try_from(n).map_err(|_| Failure::Usage(format!("--n {n} is too large")))
}

struct Budget {
    start: Instant,
    limit: Option<Duration>,
}

impl Budget {
    fn exceeded(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() > l)
    }
}

/// Result of one command before metadata is attached.
struct Outcome {
    doc: Document,
    passed: bool,
    partial: bool,
}

impl Outcome {
    fn table(table: Table) -> Self {
        Outcome {
            doc: Document {
                table,
                ..Default::default()
            },
            passed: true,
            partial: false,
        }
    }
}

fn prob_row(l: LogReal) -> Vec<f64> {
    vec![l.ln(), l.exp()]
}

fn sample(which: &str, p: &Params, budget: &Budget) -> Res<Outcome> {
    let seed = p.seed();
    let reps = p.samples.unwrap_or(1);
    let mut table = match which {
        "gem" => Table::new("gem sticks", &["replicate", "index", "mass", "tail_bound"]),
        "pd" => Table::new(
            "poisson-dirichlet atoms",
            &[
                "replicate",
                "rank",
                "mass",
                "certified",
                "atoms_generated",
                "discarded_mass",
            ],
        ),
        "dirichlet" | "size-biased" => Table::new(which, &["replicate", "index", "mass"]),
        "ewens" => {
            let n = small_n(need(&p.n, "n")?)?;
            let cols: Vec<String> = (1..=n).map(|j| format!("a_{j}")).collect();
            let mut names = vec!["replicate"];
            names.extend(cols.iter().map(String::as_str));
            Table::new("ewens partitions", &names)
        }
        "kn" => Table::new("number of alleles", &["replicate", "k"]),
        _ => {
            return Err(Failure::Usage(format!(
                "unknown sampler '{which}'; expected gem, pd, dirichlet, size-biased, ewens or kn"
            )))
        }
    };
    let mut done = 0;
    for i in 0..reps {
        if budget.exceeded() {
            break;
        }
        let s = seed.replicate(i);
        let r = i as f64;
        match which {
            "gem" => {
                let mv = sample_gem(need(&p.theta, "theta")?, p.count.unwrap_or(10), s)?;
                for (j, &x) in mv.atoms().iter().enumerate() {
                    table.push(vec![r, (j + 1) as f64, x, mv.tail_bound()]);
                }
            }
            "pd" => {
                let pd = sample_pd(
                    need(&p.theta, "theta")?,
                    p.top.unwrap_or(10),
                    p.eps.unwrap_or(1e-12),
                    s,
                )?;
                for (j, &x) in pd.masses.atoms().iter().enumerate() {
                    table.push(vec![
                        r,
                        (j + 1) as f64,
                        x,
                        f64::from(u8::from(pd.certified)),
                        pd.atoms_generated as f64,
                        pd.discarded_mass,
                    ]);
                }
            }
            "dirichlet" | "size-biased" => {
                let k = need(&p.alleles, "alleles")? as usize;
                let v = if which == "dirichlet" {
                    sample_dirichlet_symmetric(k, need(&p.alpha, "alpha")?, s)?
                } else {
                    sample_size_biased_dirichlet(need(&p.theta, "theta")?, k, s)?
                };
                for (j, x) in v.into_iter().enumerate() {
                    table.push(vec![r, (j + 1) as f64, x]);
                }
            }
            "ewens" => {
                let n = small_n(need(&p.n, "n")?)?;
                let a = sample_ewens_partition(need(&p.theta, "theta")?, n, s)?;
                let mut row = vec![r];
                row.extend(a.counts().iter().map(|&c| f64::from(c)));
                table.push(row);
            }
            _ => {
                let k = sample_kn(need(&p.theta, "theta")?, need(&p.n, "n")?, s)?;
                table.push(vec![r, k as f64]);
            }
        }
        done += 1;
    }
    table.set_meta("replicates_completed", done);
    let mut out = Outcome::table(table);
    out.partial = done < reps;
    Ok(out)
}

fn pmf(which: &str, p: &Params) -> Res<Outcome> {
    let cols = ["log_prob", "prob"];
    let table = match which {
        "esf" => {
            let mut t = Table::new("ewens sampling formula", &cols);
            t.push(prob_row(esf_log_pmf(
                need(&p.theta, "theta")?,
                &need(&p.partition, "partition")?,
            )?));
            t
        }
        "dirichlet" => {
            let mut t = Table::new("finite-K sampling formula", &cols);
            let a = need(&p.partition, "partition")?;
            t.push(prob_row(dirichlet_k_log_pmf(
                need(&p.theta, "theta")?,
                need(&p.alleles, "alleles")?,
                &a,
            )?));
            t
        }
        "kn" | "ageclass" => {
            let theta = need(&p.theta, "theta")?;
            let n = need(&p.n, "n")?;
            let ks: Vec<u64> = match p.k {
                Some(k) => vec![k],
                None if which == "kn" => (1..=n).collect(),
                None => (0..=n).collect(),
            };
            let mut t = Table::new(
                if which == "kn" {
                    "number of alleles"
                } else {
                    "oldest age class"
                },
                &["k", "log_prob", "prob"],
            );
            for k in ks {
                let l = if which == "kn" {
                    let k = u32::try_from(k).unwrap_or(u32::MAX);
                    kn_log_pmf(theta, small_n(n)?, k)?
                } else {
                    ageclass1_log_pmf(theta, n, k)?
                };
                let mut row = vec![k as f64];
                row.extend(prob_row(l));
                t.push(row);
            }
            t
        }
        "kn-mean" => {
            let mut t = Table::new("mean number of alleles", &["mean"]);
            t.push(vec![kn_mean(need(&p.theta, "theta")?, need(&p.n, "n")?)?]);
            t
        }
        "mgf" => {
            let mut t = Table::new("log moment generating function of K_n", &["t", "log_mgf"]);
            let tt = need(&p.t, "t")?;
            t.push(vec![
                tt,
                kn_log_mgf(need(&p.theta, "theta")?, need(&p.n, "n")?, tt)?,
            ]);
            t
        }
        "ageclass-joint" => {
            let mut t = Table::new("joint age classes", &cols);
            let ks = need_list(&p.ks, "ks")?;
            t.push(prob_row(ageclass_joint_log_pmf(
                need(&p.theta, "theta")?,
                need(&p.n, "n")?,
                &ks,
            )?));
            t
        }
        "sampling" => {
            let a = need(&p.partition, "partition")?;
            let q = MassVector::descending(need_list(&p.p, "p")?)?;
            let mut t = Table::new(
                "conditional sampling probability",
                &["log_prob", "prob", "normalized_log_prob", "normalized_prob"],
            );
            let mut row = prob_row(conditional_sampling_log_prob(&a, &q)?);
            row.extend(prob_row(sampling_log_prob(&a, &q)?));
            t.push(row);
            t
        }
        "stirling" => {
            let n = small_n(need(&p.n, "n")?)?;
            let mut t = Table::new(
                "unsigned stirling numbers of the first kind",
                &["k", "ln_abs_s"],
            );
            for (i, v) in stirling1_log_row(n)?.iter().enumerate() {
                t.push(vec![(i + 1) as f64, *v]);
            }
            t
        }
        _ => {
            return Err(Failure::Usage(format!(
                "unknown pmf '{which}'; expected esf, dirichlet, kn, kn-mean, mgf, ageclass, \
                 ageclass-joint, sampling or stirling"
            )))
        }
    };
    Ok(Outcome::table(table))
}

fn case_of(name: &str, p: &Params) -> Res<RegimeCase> {
    Ok(RegimeCase::from_parts(name, p.n, p.c)?)
}

fn first_x(p: &Params) -> Res<f64> {
    Ok(need_list(&p.x, "x")?[0])
}

fn rate(which: &str, p: &Params) -> Res<Outcome> {
    let value = match which {
        "residual" => rates::rate_residual_mass(&need_list(&p.x, "x")?)?,
        "relent" => rates::rate_relative_entropy(&need_list(&p.p, "p")?)?,
        "constrained" => {
            rates::constrained_inf_relent(&need_list(&p.p, "p")?, need(&p.alleles, "alleles")?)?
        }
        "beta-stick" => {
            rates::rate_beta_stick(first_x(p)?, need(&p.alleles, "alleles")?, need(&p.k, "k")?)?
        }
        "sk" => rates::rate_sizebiased_sk(&need_list(&p.x, "x")?, need(&p.alleles, "alleles")?)?,
        "sk-sticks" => {
            rates::rate_sizebiased_sk_sticks(&need_list(&p.x, "x")?, need(&p.alleles, "alleles")?)?
        }
        "sk-marginal" => {
            rates::rate_sizebiased_marginal(&need_list(&p.x, "x")?, need(&p.alleles, "alleles")?)?
        }
        "esf" => rates::rate_esf(&need(&p.partition, "partition")?) as f64,
        "kn" | "caseA" | "caseB" | "caseC" | "caseD" => {
            let case = if which == "kn" {
                case_of(&need(&p.case, "case")?, p)?
            } else {
                case_of(which, p)?
            };
            let arg = match (&case, p.k) {
                (RegimeCase::A { .. }, Some(k)) => k as f64,
                _ => first_x(p)?,
            };
            rates::rate_kn_regime(&case, arg)?
        }
        "cgf" => rates::cgf_limit(&case_of(&need(&p.case, "case")?, p)?, need(&p.t, "t")?)?,
        "legendre" => rates::legendre_case_c(first_x(p)?, need(&p.c, "c")?)?,
        "ic" => rates::rate_ic(first_x(p)?, need(&p.c, "c")?)?,
        "ageclass" => {
            let case = case_of(&need(&p.case, "case")?, p)?;
            let args: Vec<f64> = match case {
                RegimeCase::A { .. } => need_list(&p.ks, "ks")?.iter().map(|&k| k as f64).collect(),
                _ => need_list(&p.x, "x")?,
            };
            rates::rate_ageclass_regime(&case, &args)?
        }
        _ => {
            return Err(Failure::Usage(format!(
                "unknown rate '{which}'; expected residual, relent, constrained, beta-stick, sk, \
                 sk-sticks, sk-marginal, esf, kn, caseA, caseB, caseC, caseD, cgf, legendre, ic \
                 or ageclass"
            )))
        }
    };
    let mut t = Table::new(format!("rate {which}"), &["value"]);
    t.push(vec![value]);
    Ok(Outcome::table(t))
}

fn regime(p: &Params) -> Res<ScalingRegime> {
    let case = need(&p.case, "case")?;
    let letter = case.trim_start_matches("case").to_ascii_uppercase();
    Ok(match letter.as_str() {
        "A" => ScalingRegime::case_a(need(&p.n, "n")?),
        "B" => ScalingRegime::case_b(p.scale.unwrap_or(1.0), p.exponent.unwrap_or(1.0 / 3.0))?,
        "C" => ScalingRegime::case_c(need(&p.c, "c")?)?,
        "D" => ScalingRegime::case_d(p.scale.unwrap_or(1.0), p.exponent.unwrap_or(2.0))?,
        _ => {
            return Err(Failure::Usage(format!(
                "--case must be A, B, C or D, got '{case}'"
            )))
        }
    })
}

fn event(p: &Params, regime: &ScalingRegime) -> Res<EventSpec> {
    let kind = need(&p.event, "event")?;
    let half_width = p.delta.unwrap_or(0.01);
    Ok(match kind.as_str() {
        "partition-point" => EventSpec::PartitionPoint {
            a: need(&p.partition, "partition")?,
        },
        "kn-point" => EventSpec::KnPoint {
            k: need(&p.k, "k")?,
        },
        "kn-ball" => EventSpec::KnBall {
            center: first_x(p)?,
            half_width,
            scale: KnScale::for_case(&regime.case),
        },
        "ageclass-point" => EventSpec::AgeClassPoint {
            ks: need_list(&p.ks, "ks")?,
        },
        "ageclass-ball" => EventSpec::AgeClassBall {
            center: first_x(p)?,
            half_width,
        },
        "ageclass-joint-ball" => EventSpec::AgeClassJointBall {
            centers: need_list(&p.x, "x")?,
            half_width,
        },
        _ => {
            return Err(Failure::Usage(format!(
                "unknown --event '{kind}'; expected partition-point, kn-point, kn-ball, \
                 ageclass-point, ageclass-ball or ageclass-joint-ball"
            )))
        }
    })
}

fn grid_or(p: &Params, default: Grid) -> Vec<f64> {
    p.grid.clone().unwrap_or(default).values()
}

fn table_cmd(which: &str, p: &Params) -> Res<Outcome> {
    let default = Grid {
        start: 1e2,
        factor: 10.0,
        count: 9,
    };
    let table = match which {
        "rate-curve" => {
            let reg = regime(p)?;
            let ev = event(p, &reg)?;
            let grid = grid_or(p, default);
            let warnings = reg.check_grid(&grid)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let mut t =
                rate_curve(&reg, &ev, &grid)?.to_table(&format!("rate curve {}", ev.kind()));
            if !warnings.is_empty() {
                t.set_meta("warnings", warnings.join("; "));
            }
            t
        }
        "mgf" => {
            let ts: Vec<f64> = (0..=20).map(|i| -2.0 + 0.2 * f64::from(i)).collect();
            mgf_limit_curve(&regime(p)?, &ts, need(&p.theta, "theta")?)?
        }
        "lln" => lln_table(&regime(p)?, &grid_or(p, default))?,
        "dirichlet-curve" => {
            let coupling = match p.coupling.as_deref().unwrap_or("proportional") {
                "proportional" => ThetaOfK::Proportional {
                    c: p.c.unwrap_or(1.0),
                },
                "power" => ThetaOfK::Power {
                    exponent: p.exponent.unwrap_or(2.0),
                },
                other => {
                    return Err(Failure::Usage(format!(
                        "--coupling must be proportional or power, got '{other}'"
                    )))
                }
            };
            let ks: Vec<u64> = grid_or(
                p,
                Grid {
                    count: 7,
                    ..default
                },
            )
            .iter()
            .map(|k| k.round() as u64)
            .collect();
            dirichlet_rate_curve(&need(&p.partition, "partition")?, &ks, coupling)?
                .to_table("finite-K rate curve")
        }
        _ => {
            return Err(Failure::Usage(format!(
                "unknown table '{which}'; expected rate-curve, mgf, lln or dirichlet-curve"
            )))
        }
    };
    Ok(Outcome::table(table))
}

fn checks_table(report: &verify::SuiteReport) -> Table {
    let mut t = Table::new(
        format!("{} checks", report.id),
        &["observed", "bound", "pass"],
    );
    for c in &report.checks {
        t.push(vec![c.observed, c.bound, f64::from(u8::from(c.pass))]);
    }
    t
}

fn verify_cmd(id: &str, p: &Params, budget: &Budget) -> Res<Outcome> {
    if id == "all" {
        let mut t = Table::new(
            "acceptance",
            &["criterion", "pass", "checks", "checks_failed"],
        );
        let mut meta = Map::new();
        let mut passed = true;
        let mut skipped = Vec::new();
        for i in 1..=verify::CRITERIA {
            if budget.exceeded() {
                skipped.push(i.to_string());
                continue;
            }
            let r = verify::criterion(i)?;
            eprintln!("{}", r.line());
            for n in &r.notes {
                eprintln!("    note: {n}");
            }
            passed &= r.passed();
            let failed = r.checks.iter().filter(|c| !c.pass).count();
            t.push(vec![
                i as f64,
                f64::from(u8::from(r.passed())),
                r.checks.len() as f64,
                failed as f64,
            ]);
            meta.insert(format!("criterion-{i:02}"), json!(r.line()));
        }
        if !skipped.is_empty() {
            meta.insert("skipped".into(), json!(skipped.join(",")));
        }
        let partial = !skipped.is_empty();
        eprintln!(
            "verify all: {}{}",
            if passed && !partial { "PASS" } else { "FAIL" },
            if partial {
                " (partial: time budget exhausted)"
            } else {
                ""
            }
        );
        return Ok(Outcome {
            doc: Document {
                meta,
                table: t,
                extra: Vec::new(),
            },
            passed: passed && !partial,
            partial,
        });
    }
    let sp = SuiteParams {
        n: p.n,
        k: p.k,
        theta: p.theta,
        c: p.c,
        x: p.x.first().copied(),
        delta: p.delta,
        grid: p.grid.as_ref().map(Grid::values),
        partition: p.partition.clone(),
        samples: p.samples,
        seed: p.seed,
    };
    let report = verify::run_suite(id, &sp)?;
    eprintln!("{}", report.line());
    let mut meta = Map::new();
    for (i, c) in report.checks.iter().enumerate() {
        meta.insert(format!("check-{i:02}"), json!(c.summary()));
    }
    for (i, n) in report.notes.iter().enumerate() {
        eprintln!("    note: {n}");
        meta.insert(format!("note-{i:02}"), json!(n));
    }
    meta.insert("pass".into(), json!(report.passed()));
    let checks = checks_table(&report);
    let mut tables = report.tables.clone();
    let (table, extra) = if tables.is_empty() {
        (checks, Vec::new())
    } else {
        let first = tables.remove(0);
        tables.insert(0, checks);
        (first, tables)
    };
    Ok(Outcome {
        doc: Document { meta, table, extra },
        passed: report.passed(),
        partial: budget.exceeded(),
    })
}

fn run(cli: &Cli, start: Instant) -> Res<ExitCode> {
    let budget = Budget {
        start,
        limit: match cli.time_budget {
            Some(s) if s > 0.0 && s.is_finite() => Some(Duration::from_secs_f64(s)),
            Some(s) => {
                return Err(Failure::Usage(format!(
                    "--time-budget must be positive, got {s}"
                )))
            }
            None => None,
        },
    };
    let (command, which, p, outcome) = match &cli.command {
        Command::Sample { which, p } => ("sample", which, p, sample(which, p, &budget)?),
        Command::Pmf { which, p } => ("pmf", which, p, pmf(which, p)?),
        Command::Rate { which, p } => ("rate", which, p, rate(which, p)?),
        Command::Verify { id, p } => ("verify", id, p, verify_cmd(id, p, &budget)?),
        Command::Table { which, p } => ("table", which, p, table_cmd(which, p)?),
    };
    let Outcome {
        mut doc,
        passed,
        partial,
    } = outcome;
    let mut meta = Map::new();
    meta.insert("command".into(), json!(format!("{command} {which}")));
    meta.insert("params".into(), Value::Object(p.meta()));
    let seed = p.seed();
    meta.insert("seed".into(), json!(seed.master_seed));
    meta.insert("stream".into(), json!(seed.stream_index));
    meta.insert("version".into(), json!(pdld::VERSION));
    meta.insert("partial".into(), json!(partial));
    meta.insert(
        "wall_time_seconds".into(),
        json!(start.elapsed().as_secs_f64()),
    );
    meta.append(&mut doc.meta);
    doc.meta = meta;
    if partial {
        eprintln!("warning: time budget exhausted, results are partial");
    }

    let text = emit::render(&doc, cli.format)?;
    let dest = match (&cli.output, &cli.output_dir) {
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => {
            Some(dir.join(format!("{command}-{which}.{}", cli.format.extension())))
        }
        (None, None) => None,
    };
    match dest {
        Some(path) => {
            emit::write_atomic(&path, &text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    match run(&cli, start) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pdld: {e}");
            ExitCode::from(2)
        }
    }
}
