use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use morava_core::coeff::CoeffParams;
use morava_core::config::RunConfig;
use morava_core::euler::euler_classes;
use morava_core::golden::{write_yseries, FglCache};
use morava_core::groupcoh::AbelianPGroup;
use morava_core::report::{Verdict, VerificationReport};
use morava_core::suite::{Job, Runner};

/// Exact truncated Morava E-theory of finite abelian p-groups.
#[derive(Parser, Debug)]
#[command(name = "morava", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the p^k-series of the formal group law term by term.
    Pseries {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Check the leading-term congruence and exit 1 if it fails.
        #[arg(long)]
        check_congruence: bool,
        /// Also write the series as a golden-vector file.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Print the total or reduced Euler class of a group in normal form.
    Euler {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "reduced")]
        total: bool,
        #[arg(long)]
        reduced: bool,
    },
    /// Run a verification suite and emit a report.
    Verify {
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    #[value(name = "lemma-2.4")]
    FreeRank,
    #[value(name = "lemma-2.6")]
    Restriction,
    #[value(name = "prop-3.2")]
    Periodicity,
    #[value(name = "prop-3.2-n1")]
    HeightOne,
    #[value(name = "prop-3.3")]
    EulerPowers,
    #[value(name = "cor-3.4")]
    ElementaryQuotient,
    #[value(name = "paper-suite")]
    All,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// p-adic digits N.
    #[arg(long, default_value_t = 16)]
    precision: u32,
    /// Total v-degree cap D.
    #[arg(long, default_value_t = 8)]
    vdeg: u32,
    /// Floor on the y-degree of the formal group law.
    #[arg(long)]
    ydeg: Option<usize>,
    /// Comma-separated cyclic orders, e.g. 4,2.
    #[arg(long)]
    group: Option<String>,
    /// Power bound for nonvanishing searches.
    #[arg(long, default_value_t = 8)]
    t: u32,
    /// Rank of the elementary abelian group for prop-3.3 (defaults to n).
    #[arg(long)]
    r: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Golden-file cache directory; falls back to MORAVA_CACHE_DIR.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Enable the expensive parameter points.
    #[arg(long)]
    large: bool,
    /// Largest formal group law degree the planner may request.
    #[arg(long)]
    budget: Option<usize>,
    /// Record wall time per check (makes reports nondeterministic).
    #[arg(long)]
    timings: bool,
}

/// Usage or configuration problems exit 2; failed checks exit 1.
enum Failure {
    Usage(String),
    Check,
}

impl From<morava_core::Error> for Failure {
    fn from(e: morava_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl Common {
    fn config(&self) -> Result<RunConfig, Failure> {
        let cache_dir = self.cache.clone().or_else(|| std::env::var_os("MORAVA_CACHE_DIR").map(PathBuf::from));
        let cfg = RunConfig {
            p: self.p,
            n: self.n,
            precision: self.precision,
            vdeg: self.vdeg,
            ydeg: self.ydeg,
            group: self.group.clone(),
            t: self.t,
            r: self.r,
            budget: self.budget.unwrap_or(morava_core::config::DEFAULT_BUDGET),
            large: self.large,
            cache_dir,
            report: self.report.clone(),
            timings: self.timings,
        };
        cfg.validate()?;
        if let Some(j) = self.jobs {
            if j == 0 {
                return Err(Failure::Usage("--jobs must be positive".into()));
            }
            // only the first pool configuration in a process takes effect
            let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
        }
        if let (Some(y), Some(_)) = (cfg.ydeg, &cfg.group) {
            let floor = cfg.ydeg_floor(&cfg.group()?);
            if y < floor {
                eprintln!("warning: --ydeg {y} is below p^(n k) + 1 = {floor}; raising it");
            }
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Pseries { common, k, check_congruence, golden } => {
            cmd_pseries(&common, k, check_congruence, golden.as_deref())
        }
        Command::Euler { common, reduced, .. } => cmd_euler(&common, reduced),
        Command::Verify { suite, common } => cmd_verify(&common, suite),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_pseries(common: &Common, k: u32, check: bool, golden: Option<&std::path::Path>) -> Result<(), Failure> {
    let cfg = common.config()?;
    let params = cfg.params()?;
    let d = (cfg.p as usize)
        .checked_pow(cfg.n * k)
        .ok_or_else(|| Failure::Usage("p^(n k) is too large".into()))?;
    let floor = d + 1;
    let degree = match cfg.ydeg {
        Some(y) if y < floor => {
            eprintln!("warning: --ydeg {y} is below p^(n k) + 1 = {floor}; raising it");
            floor
        }
        Some(y) => y,
        None => floor,
    };
    let cache = FglCache::new(cfg.cache_dir.clone());
    let fgl = cache.get(params, degree)?;
    let s = fgl.pk_series(k)?.with_order(degree);
    println!(
        "[{}^{k}](y) at p={} n={} mod (p^{}, v-degree > {}, y^{})",
        cfg.p,
        cfg.p,
        cfg.n,
        params.precision,
        params.vdeg,
        degree + 1
    );
    for (i, c) in s.coeffs().iter().enumerate() {
        if !c.is_zero() {
            println!("y^{i}: {c}");
        }
    }
    if s.is_zero() {
        println!("0");
    }
    if let Some(line) = leading_reduced(&s, params)? {
        println!("leading reduced term: {line}");
    }
    if let Some(path) = golden {
        std::fs::write(path, write_yseries(&s)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    if check {
        let rep = fgl.check_congruence(k)?;
        println!("congruence: {}", Verdict::from_bool(rep.holds()));
        if !rep.holds() {
            for (i, red) in &rep.residual {
                println!("  y^{i}: reduction {red:?}");
            }
            return Err(Failure::Check);
        }
    }
    Ok(())
}

/// First term surviving reduction mod `(p, v_1, …, v_{n-1})`.
fn leading_reduced(s: &morava_core::series::YSeries, params: CoeffParams) -> Result<Option<String>, Failure> {
    for (i, c) in s.coeffs().iter().enumerate() {
        let red = c.reduce_mod_maximal()?;
        if red.is_empty() {
            continue;
        }
        let terms: Vec<String> = red
            .iter()
            .map(|&(u, a)| {
                let coeff = if a == 1 { String::new() } else { format!("{a}*") };
                if u == 0 {
                    format!("{coeff}y^{i}")
                } else {
                    format!("{coeff}u^{u}*y^{i}")
                }
            })
            .collect();
        let mut ideal = vec![params.p.to_string()];
        ideal.extend((1..params.n).map(|j| format!("v{j}")));
        ideal.push(format!("y^{}", i + 1));
        return Ok(Some(format!("{} mod ({})", terms.join(" + "), ideal.join(", "))));
    }
    Ok(None)
}

fn cmd_euler(common: &Common, reduced: bool) -> Result<(), Failure> {
    let cfg = common.config()?;
    let group = cfg.group()?;
    let runner = Runner::new(cfg.clone())?;
    let ring = runner.ring(&group, cfg.n)?;
    let classes = euler_classes(&ring)?;
    let (name, e) = if reduced { ("reduced", &classes.reduced) } else { ("total", &classes.total) };
    let used = ring.params();
    println!(
        "{name} Euler class of {group} at p={} n={} (N={}, D={}, rank {}, {} characters, {} orbits)",
        used.p,
        used.n,
        used.precision,
        used.vdeg,
        ring.rank(),
        classes.num_characters(),
        classes.num_orbits()
    );
    println!("{}", ring.render(e));
    Ok(())
}

fn suite_jobs(cfg: &RunConfig, suite: Suite, runner: &Runner) -> Result<Vec<Job>, Failure> {
    let (p, n) = (cfg.p, cfg.n);
    let groups = || -> Result<Vec<AbelianPGroup>, Failure> {
        Ok(match &cfg.group {
            Some(_) => vec![cfg.group()?],
            None => Runner::standard_groups(p),
        })
    };
    let jobs = match suite {
        Suite::FreeRank => groups()?.into_iter().map(|group| Job::FreeRank { group, n }).collect(),
        Suite::Restriction => {
            let mut jobs = Vec::new();
            for group in groups()? {
                jobs.push(Job::Restriction { group: group.clone(), n });
                jobs.push(Job::EulerLocalization { group, n });
            }
            jobs.push(Job::UnitDivisibility { p, n });
            jobs
        }
        Suite::Periodicity => {
            if n < 2 {
                return Err(Failure::Usage(
                    "prop-3.2 needs --n 2 or more; use prop-3.2-n1 for height one".into(),
                ));
            }
            vec![Job::Periodicity { p, n }]
        }
        Suite::HeightOne => vec![Job::HeightOne { p }],
        Suite::EulerPowers => vec![Job::EulerPowers { p, r: cfg.r.unwrap_or(n as usize), n, t: cfg.t }],
        Suite::ElementaryQuotient => match &cfg.group {
            Some(_) => vec![Job::ElementaryQuotient { group: cfg.group()?, n }],
            None => [(2, "4"), (2, "4,2"), (3, "9")]
                .into_iter()
                .filter(|(q, _)| *q == p)
                .map(|(q, g)| Job::ElementaryQuotient { group: AbelianPGroup::parse(q, g).expect("valid"), n })
                .collect(),
        },
        Suite::All => runner.full_jobs(),
    };
    Ok(jobs)
}

fn cmd_verify(common: &Common, suite: Suite) -> Result<(), Failure> {
    let cfg = common.config()?;
    let runner = Runner::new(cfg.clone())?;
    let jobs = suite_jobs(&cfg, suite, &runner)?;
    if jobs.is_empty() {
        return Err(Failure::Usage(format!("no default groups at p={}; pass --group", cfg.p)));
    }
    let report = runner.run_jobs(&jobs);
    print_summary(&report);
    if let Some(path) = &cfg.report {
        report.write(path)?;
    }
    if report.any_failure() {
        Err(Failure::Check)
    } else {
        Ok(())
    }
}

fn print_summary(report: &VerificationReport) {
    for c in &report.checks {
        let keys = ["group", "p", "n", "k", "r", "precision", "vdeg"];
        let params: Vec<String> = keys
            .iter()
            .filter_map(|k| c.params.get(*k).map(|v| format!("{k}={v}")))
            .collect();
        let flag = if c.verdict == Verdict::Indeterminate { "  (flagged)" } else { "" };
        let err = c.witness.get("error").and_then(|e| e.as_str()).map(|e| format!("  error: {e}")).unwrap_or_default();
        println!("{:<13} {:<26} {}{flag}{err}", c.verdict.to_string(), c.check_id, params.join(" "));
    }
    let count = |v: Verdict| report.checks.iter().filter(|c| c.verdict == v).count();
    println!(
        "overall {}: {} pass, {} fail, {} indeterminate, {} evidence",
        report.overall(),
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Indeterminate),
        count(Verdict::Evidence)
    );
}
