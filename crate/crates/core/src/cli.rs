//! Command-line front end. Every subcommand writes one CSV, JSON or text
//! artifact to stdout or `--out`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constants::constants_report;
use crate::density::{
    solve_distribution, solve_distribution_capped, solve_xi, solve_xi_capped, write_grid_csv, DensitySummary, GridSpec,
    MAX_ITERATIONS,
};
use crate::dirichlet::{pole_check, series_report, verify_convolution, verify_numthy, SeriesQuery};
use crate::ensembles::{ensemble_census, geometric_ladder, mean_cost_sampled, sweep, verify_theta, EnsembleId};
use crate::error::{Error, Result};
use crate::gcd::{binary_gcd_trace, CostFunction};
use crate::report::{run_acceptance, AcceptanceReport, ReportConfig};

pub const THREADS_ENV: &str = "BRENTLAB_THREADS";
pub const CSV_TAG: &str = "#brentlab-v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "brentlab",
    version,
    about = "Binary GCD statistics and the invariant density of its transfer operator"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for ensemble and series sweeps (0 uses every core)
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,

    /// Write the artifact here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each subcommand has its own default
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact ensemble sizes and their ratio to n²
    Census {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        ensemble: Vec<EnsembleId>,
        #[command(flatten)]
        ladder: LadderArgs,
    },
    /// Mean cost per ensemble and bound, with a slope fit against ln n
    Stats {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        ensemble: Vec<EnsembleId>,
        /// Cost functions: S, T, E, N or a cost table file
        #[arg(long, value_delimiter = ',', default_value = "S")]
        cost: Vec<String>,
        #[command(flatten)]
        ladder: LadderArgs,
        /// Sample this many pairs per bound instead of enumerating
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve for the density and the distribution function
    Density {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Also write the convergence summary as JSON here
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = MAX_ITERATIONS)]
        max_iter: usize,
    },
    /// Every constant and identity residual
    Constants {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Check the branch-word bijection for every step count up to n-max
    VerifyTheta {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 500)]
        v_max: u64,
        #[arg(long, default_value = "T")]
        cost: String,
    },
    /// Truncated Dirichlet series and the zeta identities
    Dirichlet {
        #[arg(long, value_enum, default_value_t = DirichletCheck::Series)]
        check: DirichletCheck,
        #[arg(long, default_value = "2")]
        ensemble: EnsembleId,
        /// Exponents; the pole check defaults to 1.05,1.02,1.01
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        p: u32,
        #[arg(long, default_value = "S")]
        cost: String,
        #[arg(long, default_value_t = 100_000)]
        v_max: u64,
    },
    /// Trace the algorithm on one pair
    Trace {
        u: u64,
        v: u64,
        #[arg(long, default_value = "S")]
        cost: String,
        /// Print only the compact step list `(i,k);(i,k);...`
        #[arg(long)]
        dump_trace: bool,
    },
    /// Run the whole acceptance suite
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirichletCheck {
    Series,
    /// Zeta closed forms of the count series
    Numthy,
    Convolution,
    Pole,
}

#[derive(Debug, Clone, Args)]
pub struct LadderArgs {
    /// Bounds n, comma separated
    #[arg(long, value_delimiter = ',', conflicts_with = "log2")]
    pub n: Vec<u64>,
    /// Powers of two `LO:HI`
    #[arg(long)]
    pub log2: Option<String>,
}

impl LadderArgs {
    pub fn ladder(&self) -> Result<Vec<u64>> {
        if let Some(range) = &self.log2 {
            let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent `{t}`")));
            let (lo, hi) =
                range.split_once(':').ok_or_else(|| Error::Parse(format!("expected LO:HI, got `{range}`")))?;
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi || hi > 40 {
                return Err(Error::Domain(format!("exponent range {lo}:{hi} must be increasing and at most 40")));
            }
            return Ok(geometric_ladder(lo, hi));
        }
        if self.n.is_empty() {
            return Err(Error::Domain("give --n or --log2".into()));
        }
        Ok(self.n.clone())
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 2048)]
    pub m_geometric: usize,
    #[arg(long, default_value_t = 2048)]
    pub m_uniform: usize,
    #[arg(long, default_value_t = 2f64.powi(-48))]
    pub x_min: f64,
}

impl GridArgs {
    pub fn spec(&self) -> Result<GridSpec> {
        let spec = GridSpec { m_geometric: self.m_geometric, m_uniform: self.m_uniform, x_min: self.x_min };
        spec.validate()?;
        Ok(spec)
    }
}

/// `S`, `T`, `E`, `N` or the path of a cost table.
pub fn parse_cost(selector: &str) -> Result<CostFunction> {
    match selector {
        "S" | "s" => Ok(CostFunction::steps()),
        "T" | "t" => Ok(CostFunction::shifts()),
        "E" | "e" => Ok(CostFunction::exchanges()),
        "N" | "n" => Ok(CostFunction::non_exchanges()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidCost(format!("`{path}` is not S, T, E, N or a readable table: {e}")))?;
            CostFunction::from_table_text(path, &text)
        }
    }
}

/// Whether the checks a subcommand ran all held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Passed
        } else {
            Outcome::Failed
        }
    }
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Passed) => EXIT_OK,
        Ok(Outcome::Failed) => EXIT_CHECK_FAILED,
        Err(Error::NonConvergence { .. }) => EXIT_NO_CONVERGENCE,
        Err(Error::Io(_) | Error::Csv(_) | Error::Json(_)) => EXIT_ERROR,
        Err(_) => EXIT_USAGE,
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn csv_writer<'a>(out: &'a mut dyn Write, kind: &str) -> Result<csv::Writer<&'a mut dyn Write>> {
    writeln!(out, "{CSV_TAG} {kind}")?;
    Ok(csv::Writer::from_writer(out))
}

/// Runs one subcommand on the current rayon pool.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let format = cfg.format;
    match &cfg.command {
        Command::Census { ensemble, ladder } => {
            let mut rows = Vec::new();
            for &n in &ladder.ladder()? {
                for &id in ensemble {
                    rows.push(ensemble_census(id, n)?);
                }
            }
            if format == Some(Format::Json) {
                write_json(out, &rows)?;
            } else {
                let mut w = csv_writer(out, "census")?;
                w.write_record(["ensemble", "n", "count", "ratio", "limit"])?;
                for r in &rows {
                    let limit = r.ensemble.density_limit();
                    w.write_record([
                        r.ensemble.to_string(),
                        r.n.to_string(),
                        r.count.to_string(),
                        r.ratio.to_string(),
                        limit.to_string(),
                    ])?;
                }
                w.flush()?;
            }
            Ok(Outcome::Passed)
        }
        Command::Stats { ensemble, cost, ladder, samples, seed } => {
            let costs = cost.iter().map(|c| parse_cost(c)).collect::<Result<Vec<_>>>()?;
            let ladder = ladder.ladder()?;
            if let Some(samples) = *samples {
                return sampled_stats(out, format, ensemble, &costs, &ladder, samples, *seed);
            }
            let result = sweep(ensemble, &costs, &ladder, 0)?;
            let mut fits = Vec::new();
            if ladder.len() >= 3 {
                for (e, id) in ensemble.iter().enumerate() {
                    for (c, cost) in costs.iter().enumerate() {
                        fits.push((id.index(), cost.name().to_string(), result.slope(e, c)?));
                    }
                }
            }
            if format == Some(Format::Json) {
                #[derive(Serialize)]
                struct Fit<'a> {
                    ensemble: u8,
                    cost: &'a str,
                    slope: f64,
                    intercept: f64,
                    residual: f64,
                }
                #[derive(Serialize)]
                struct StatsJson<'a> {
                    rows: Vec<crate::ensembles::StatsRow>,
                    fits: Vec<Fit<'a>>,
                }
                let fits = fits
                    .iter()
                    .map(|(e, c, f)| Fit {
                        ensemble: *e,
                        cost: c,
                        slope: f.slope,
                        intercept: f.intercept,
                        residual: f.residual,
                    })
                    .collect();
                write_json(out, &StatsJson { rows: result.rows(), fits })?;
            } else {
                let mut w = csv_writer(out, "stats")?;
                for row in result.rows() {
                    w.serialize(row)?;
                }
                w.flush()?;
                drop(w);
                for (e, c, f) in &fits {
                    writeln!(
                        out,
                        "#fit ensemble={e} cost={c} slope={} intercept={} residual={}",
                        f.slope, f.intercept, f.residual
                    )?;
                }
            }
            Ok(Outcome::Passed)
        }
        Command::Density { grid, tol, summary, max_iter } => {
            let spec = grid.spec()?;
            let (d, rec_d) = solve_xi_capped(&spec, *tol, *max_iter)?;
            let (f, rec_f) = solve_distribution_capped(&spec, (*tol).max(1e-13), *max_iter)?;
            #[derive(Serialize)]
            struct Convergence {
                density: DensitySummary,
                density_deltas: Vec<f64>,
                distribution_iterations: usize,
                distribution_theta_hat: f64,
                distribution_deltas: Vec<f64>,
            }
            let conv = Convergence {
                density: DensitySummary::new(&d, &rec_d),
                density_deltas: rec_d.deltas.clone(),
                distribution_iterations: rec_f.iterations,
                distribution_theta_hat: rec_f.theta_hat,
                distribution_deltas: rec_f.deltas.clone(),
            };
            if let Some(path) = summary {
                write_json(&mut BufWriter::new(File::create(path)?), &conv)?;
            }
            if format == Some(Format::Json) {
                write_json(out, &conv)?;
            } else {
                write_grid_csv(out, &f, &d)?;
            }
            Ok(Outcome::Passed)
        }
        Command::Constants { grid, tol } => {
            let spec = grid.spec()?;
            let (d, _) = solve_xi(&spec, *tol)?;
            let (f, _) = solve_distribution(&spec, (*tol).max(1e-13))?;
            let report = constants_report(&d, &f)?;
            if format == Some(Format::Json) {
                write_json(out, &report)?;
            } else {
                let values = [
                    ("xi(1)", report.xi_one),
                    ("mu_S", report.mu_s),
                    ("mu_T", report.mu_t),
                    ("mu_E", report.mu_e),
                    ("lambda_s (1)", report.lambda_s_v1),
                    ("lambda_s (2)", report.lambda_s_v2),
                    ("lambda_s (3)", report.lambda_s_v3),
                    ("-pi^2 xi(1)/2", report.lambda_s_from_xi),
                    ("1/beta", 1.0 / report.beta),
                    ("1/beta_tilde", 1.0 / report.beta_tilde),
                    ("knuth", report.knuth),
                    ("exchange (1)", report.exch_form1),
                    ("exchange (2)", report.exch_form2),
                    ("exchange factor", report.exchange_factor),
                ];
                for (name, v) in values {
                    writeln!(out, "{name:<24} {v:>22.16}")?;
                }
                writeln!(out)?;
                for r in &report.residuals {
                    let mark = if r.passed { "ok" } else { "FAIL" };
                    writeln!(out, "{:<40} {:>12.3e} <= {:<8.1e} {mark}", r.name, r.value, r.tolerance)?;
                }
            }
            Ok(Outcome::from_bool(report.passed()))
        }
        Command::VerifyTheta { n_max, v_max, cost } => {
            let report = verify_theta(*n_max, *v_max, &parse_cost(cost)?)?;
            write_json(out, &report)?;
            Ok(Outcome::from_bool(report.passed()))
        }
        Command::Dirichlet { check, ensemble, s, p, cost, v_max } => {
            let cost = parse_cost(cost)?;
            let s_values = match (s, check) {
                (Some(s), _) => s.clone(),
                (None, DirichletCheck::Pole) => vec![1.05, 1.02, 1.01],
                (None, _) => vec![1.5],
            };
            let mut ok = true;
            let mut items = Vec::new();
            for &s in &s_values {
                let value = match check {
                    DirichletCheck::Series => {
                        let q = SeriesQuery { ensemble: *ensemble, s, p: *p, cost: cost.clone(), v_max: *v_max };
                        serde_json::to_value(series_report(&q)?)?
                    }
                    DirichletCheck::Numthy => {
                        let r = verify_numthy(s, *v_max)?;
                        ok &= r.passed();
                        serde_json::to_value(r)?
                    }
                    DirichletCheck::Convolution => {
                        let r = verify_convolution(s, *v_max, *p, &cost)?;
                        ok &= r.passed;
                        serde_json::to_value(r)?
                    }
                    DirichletCheck::Pole => serde_json::to_value(pole_check(s)?)?,
                };
                items.push(value);
            }
            if items.len() == 1 {
                write_json(out, &items[0])?;
            } else {
                write_json(out, &items)?;
            }
            Ok(Outcome::from_bool(ok))
        }
        Command::Trace { u, v, cost, dump_trace } => {
            let trace = binary_gcd_trace(*u, *v)?;
            if *dump_trace {
                writeln!(out, "{trace}")?;
            } else {
                let c = parse_cost(cost)?;
                writeln!(out, "gcd {}", trace.gcd())?;
                writeln!(out, "odd pair {}", trace.pair())?;
                writeln!(
                    out,
                    "steps {} shifts {} exchanges {}",
                    trace.subtractions(),
                    trace.shifts(),
                    trace.exchanges()
                )?;
                writeln!(out, "cost {} {}", c.name(), trace.cost(&c)?)?;
                writeln!(out, "trace {trace}")?;
            }
            Ok(Outcome::Passed)
        }
        Command::Report => {
            let rc = ReportConfig { threads: 0, ..ReportConfig::default() };
            let report = run_acceptance(&rc, |_| {})?;
            if format == Some(Format::Json) {
                write_json(out, &report)?;
            } else {
                write_report_text(out, &report)?;
            }
            Ok(Outcome::from_bool(report.passed()))
        }
    }
}

fn sampled_stats(
    out: &mut dyn Write,
    format: Option<Format>,
    ensembles: &[EnsembleId],
    costs: &[CostFunction],
    ladder: &[u64],
    samples: u64,
    seed: u64,
) -> Result<Outcome> {
    let mut rows = Vec::new();
    for &n in ladder {
        for &id in ensembles {
            for c in costs {
                rows.push(mean_cost_sampled(id, n, c, samples, seed)?);
            }
        }
    }
    if format == Some(Format::Json) {
        write_json(out, &rows)?;
    } else {
        let mut w = csv_writer(out, "stats-sampled")?;
        w.write_record(["ensemble", "n", "samples", "cost", "mean", "mean_over_logn", "std_error", "seed"])?;
        for r in &rows {
            let s = &r.stats;
            w.write_record([
                s.ensemble.to_string(),
                s.n.to_string(),
                s.count.to_string(),
                s.cost_id.clone(),
                s.mean().to_string(),
                s.mean_over_log().to_string(),
                r.std_error.to_string(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(Outcome::Passed)
}

/// One line per criterion, then every check.
pub fn write_report_text(out: &mut dyn Write, report: &AcceptanceReport) -> Result<()> {
    for c in &report.criteria {
        let h = c.headline();
        let mark = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "[{mark}] {} {}: {} = {:.3e} (bound {:.1e})", c.id, c.title, h.name, h.value, h.bound)?;
    }
    writeln!(out)?;
    for c in &report.criteria {
        for k in &c.checks {
            let mark = if k.passed { "ok" } else { "FAIL" };
            writeln!(out, "{} {:<56} {:>12.4e} {:?} {:.1e} {mark}", c.id, k.name, k.value, k.kind, k.bound)?;
        }
    }
    let verdict = if report.passed() { "all criteria passed" } else { "some criteria failed" };
    writeln!(out, "\n{verdict}")?;
    Ok(())
}

/// Parses arguments, runs the subcommand on a pool of the requested size
/// and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = execute(&cfg);
    if let Err(Error::Io(e)) = &result {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return EXIT_OK;
        }
    }
    if let Err(e) = &result {
        eprintln!("brentlab: {e}");
    }
    exit_code(&result)
}

fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Domain(format!("cannot build a pool of {} threads: {e}", cfg.threads)))?;
    pool.install(|| match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let outcome = run(cfg, &mut w)?;
            w.flush()?;
            Ok(outcome)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            run(cfg, &mut w)
        }
    })
}
