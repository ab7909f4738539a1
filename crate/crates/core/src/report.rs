//! The acceptance suite: every reproduction target with its pinned
//! tolerance, evaluated from one density solve and one ensemble sweep.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{constants_report, mu_of_cost, ConstantsReport};
use crate::density::{
    apply_transfer, solve_distribution, solve_xi, ConvergenceRecord, DistributionGrid, Grid, GridSpec, SingularDensity,
};
use crate::dirichlet::{verify_convolution, verify_numthy};
use crate::ensembles::{ensemble_census, geometric_ladder, sweep, verify_theta, EnsembleId};
use crate::error::Result;
use crate::gcd::{binary_gcd, CostFunction, INPUT_LIMIT};

/// `ξ(1)` to sixteen digits.
pub const XI_ONE_REFERENCE: f64 = 0.3979226811883166;

/// Points sampled at which the distribution derivative is compared with `ξ`.
pub const CROSS_POINTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Iterations skipped before the contraction ratios are inspected.
pub const BURN_IN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Within,
    Below,
    Above,
}

/// One named quantity and the bound it must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    /// `|value| <= bound`.
    pub fn within(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), kind: CheckKind::Within, value, bound, passed: value.abs() <= bound }
    }

    /// `value < bound`.
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), kind: CheckKind::Below, value, bound, passed: value < bound }
    }

    /// `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), kind: CheckKind::Above, value, bound, passed: value > bound }
    }

    fn relative(name: impl Into<String>, value: f64, target: f64, bound: f64) -> Self {
        Check::within(name, (value - target) / target, bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    fn new(id: u8, title: &str, checks: Vec<Check>, elapsed: Duration) -> Self {
        CriterionResult { id, title: title.into(), passed: checks.iter().all(|c| c.passed), checks, elapsed }
    }

    /// The first failing check, else the two-sided check using the largest
    /// share of its bound, else the first check.
    pub fn headline(&self) -> &Check {
        let share = |c: &Check| if c.bound > 0.0 { c.value.abs() / c.bound } else { 0.0 };
        self.checks
            .iter()
            .find(|c| !c.passed)
            .or_else(|| {
                self.checks.iter().filter(|c| c.kind == CheckKind::Within).max_by(|a, b| share(a).total_cmp(&share(b)))
            })
            .unwrap_or(&self.checks[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub config: ReportConfig,
    pub criteria: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Sizes of every computation in the suite. The defaults are the pinned
/// acceptance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub grid: GridSpec,
    pub xi_tol: f64,
    pub f_tol: f64,
    pub derivative_step: f64,
    pub ladder_log2: (u32, u32),
    pub census_n: u64,
    pub theta_n_max: usize,
    pub theta_v_max: u64,
    pub closed_forms: Vec<(f64, u64)>,
    pub convolution_s: f64,
    pub convolution_v_max: u64,
    pub convolution_cost_v_max: u64,
    pub gcd_exhaustive: u64,
    pub gcd_random_pairs: u64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            grid: GridSpec::default(),
            xi_tol: 1e-12,
            f_tol: 1e-12,
            derivative_step: 1.0 / 256.0,
            ladder_log2: (10, 15),
            census_n: 100_000,
            theta_n_max: 6,
            theta_v_max: 500,
            closed_forms: vec![(1.5, 1_000_000), (2.0, 10_000)],
            convolution_s: 1.5,
            convolution_v_max: 100_000,
            convolution_cost_v_max: 100_000,
            gcd_exhaustive: 512,
            gcd_random_pairs: 1_000_000,
            seed: 0x5eed,
            threads: 0,
        }
    }
}

/// Both fixed points on one grid.
pub struct Solved {
    pub density: SingularDensity,
    pub density_record: ConvergenceRecord,
    pub distribution: DistributionGrid,
    pub distribution_record: ConvergenceRecord,
    pub constants: ConstantsReport,
    pub elapsed: Duration,
}

pub fn solve_all(cfg: &ReportConfig) -> Result<Solved> {
    let start = Instant::now();
    let (density, density_record) = solve_xi(&cfg.grid, cfg.xi_tol)?;
    let (distribution, distribution_record) = solve_distribution(&cfg.grid, cfg.f_tol)?;
    let constants = constants_report(&density, &distribution)?;
    Ok(Solved { density, density_record, distribution, distribution_record, constants, elapsed: start.elapsed() })
}

pub fn criterion_xi_one(s: &Solved) -> CriterionResult {
    let checks = vec![Check::relative("xi(1) relative error", s.density.xi_at_one(), XI_ONE_REFERENCE, 5e-6)];
    CriterionResult::new(1, "xi(1) on the default grid", checks, s.elapsed)
}

pub fn criterion_cross_validation(s: &Solved, h: f64) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    for &x in &CROSS_POINTS {
        let df = s.distribution.derivative(x, h)?;
        let xi = s.density.xi(x)?;
        checks.push(Check::relative(format!("F'({x}) vs xi({x})"), df, xi, 1e-4));
    }
    Ok(CriterionResult::new(2, "distribution derivative matches density", checks, Duration::ZERO))
}

fn pick(report: &ConstantsReport, prefix: &str) -> Vec<Check> {
    report
        .residuals
        .iter()
        .filter(|r| r.name.starts_with(prefix))
        .map(|r| Check::within(r.name.clone(), r.value, r.tolerance))
        .collect()
}

pub fn criterion_lambda(s: &Solved) -> CriterionResult {
    let mut checks = pick(&s.constants, "lambda_s");
    checks.extend(pick(&s.constants, "exchange form"));
    CriterionResult::new(3, "lambda_s four ways and exchange forms", checks, Duration::ZERO)
}

pub fn criterion_subtraction(s: &Solved) -> CriterionResult {
    let c = &s.constants;
    let target = 4.0 / (PI * PI * XI_ONE_REFERENCE);
    let checks = vec![
        Check::within("1/beta - 4/(pi^2 xi(1))", 1.0 / c.beta - target, 1e-5),
        Check::within("1/beta_tilde - 4/(pi^2 xi(1))", 1.0 / c.beta_tilde - target, 1e-5),
        Check::within("4/(pi^2 xi(1)) computed - reference", c.mu_s - target, 1e-5),
        Check::within("1/beta - 1.01850", 1.0 / c.beta - 1.01850, 5e-6),
    ];
    CriterionResult::new(4, "subtraction constant three ways", checks, Duration::ZERO)
}

pub fn criterion_slopes(s: &Solved, cfg: &ReportConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let costs = [CostFunction::steps(), CostFunction::shifts(), CostFunction::exchanges()];
    let ladder = geometric_ladder(cfg.ladder_log2.0, cfg.ladder_log2.1);
    let result = sweep(&EnsembleId::ALL, &costs, &ladder, cfg.threads)?;
    let mu_s = 4.0 / (PI * PI * XI_ONE_REFERENCE);
    let targets = [mu_s, 2.0 * mu_s, s.constants.mu_e];
    let mut checks = Vec::new();
    for (e_idx, id) in EnsembleId::ALL.iter().enumerate() {
        for (c_idx, c) in costs.iter().enumerate() {
            let tol = match (id, c_idx) {
                (EnsembleId::Odd, 0 | 1) => 0.02,
                _ => 0.03,
            };
            let slope = result.slope(e_idx, c_idx)?.slope;
            checks.push(Check::relative(format!("slope {} on ensemble {id}", c.name()), slope, targets[c_idx], tol));
        }
    }
    Ok(CriterionResult::new(5, "empirical mean-cost slopes", checks, start.elapsed()))
}

pub fn criterion_census(cfg: &ReportConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let one = ensemble_census(EnsembleId::OddCoprime, cfg.census_n)?;
    let two = ensemble_census(EnsembleId::Odd, cfg.census_n)?;
    let checks = vec![
        Check::relative("odd coprime count / n^2 vs 1/pi^2", one.ratio, 1.0 / (PI * PI), 0.005),
        Check::relative("odd count / n^2 vs 1/8", two.ratio, 0.125, 0.005),
    ];
    Ok(CriterionResult::new(6, "census limits", checks, start.elapsed()))
}

pub fn criterion_theta(cfg: &ReportConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for c in [CostFunction::shifts(), CostFunction::exchanges()] {
        let r = verify_theta(cfg.theta_n_max, cfg.theta_v_max, &c)?;
        checks.push(Check::within(format!("mismatches with cost {}", c.name()), r.mismatches.len() as f64, 0.0));
    }
    Ok(CriterionResult::new(7, "branch-word bijection", checks, start.elapsed()))
}

pub fn criterion_dirichlet(cfg: &ReportConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let margin = |residual: f64, tail: f64| residual - tail;
    for &(s, v_max) in &cfg.closed_forms {
        let r = verify_numthy(s, v_max)?;
        for (label, id) in [("odd", &r.odd), ("odd coprime", &r.odd_coprime)] {
            checks.push(Check::below(
                format!("zeta closed form, {label}, s={s}: residual - tail bound"),
                margin(id.residual, id.tail_bound),
                1e-10,
            ));
        }
    }
    let s = cfg.convolution_s;
    let steps = CostFunction::steps();
    for (p, v_max) in [(0, cfg.convolution_v_max), (1, cfg.convolution_cost_v_max)] {
        let r = verify_convolution(s, v_max, p, &steps)?;
        checks.push(Check::below(
            format!("convolution p={p} s={s}: residual - tail bound"),
            margin(r.residual, r.tail_bound),
            1e-10,
        ));
    }
    Ok(CriterionResult::new(8, "Dirichlet identities", checks, start.elapsed()))
}

pub fn criterion_properties(s: &Solved, cfg: &ReportConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut checks = Vec::new();

    let grid: Arc<Grid> = s.density.grid_arc();
    let probes = [
        ("uniform", SingularDensity::uniform(grid.clone())),
        ("2x", SingularDensity::from_fn(grid, 0.0, |x| 2.0 * x)?),
        ("solved xi", s.density.clone()),
    ];
    for (label, probe) in &probes {
        let drift = apply_transfer(probe)?.integral() - probe.integral();
        checks.push(Check::within(format!("transfer integral drift, {label}"), drift, 1e-8));
    }

    let f = &s.distribution;
    checks.push(Check::within("F invariants violated", f64::from(u8::from(f.check_invariants().is_err())), 0.0));
    checks.push(Check::within("F(0)", f.eval(0.0)?, 0.0));
    checks.push(Check::within("F(1) - 1", f.eval(1.0)? - 1.0, 1e-14));

    let min_xi = s.density.node_values().into_iter().fold(f64::INFINITY, f64::min);
    checks.push(Check::above("min xi over nodes", min_xi, 0.0));

    for (label, r) in [("density", &s.density_record), ("distribution", &s.distribution_record)] {
        checks.push(Check::below(format!("{label} theta_hat"), r.theta_hat, 1.0));
        checks.push(Check::below(
            format!("{label} max contraction ratio after burn-in"),
            r.max_ratio_after(BURN_IN),
            1.0,
        ));
    }

    let d = &s.density;
    checks.push(Check::within("alpha - 1.5 xi(1)", d.alpha() - 1.5 * d.xi_at_one(), 10.0 * cfg.xi_tol));

    let (st, e) = (CostFunction::steps(), CostFunction::exchanges());
    let combo = CostFunction::linear_combination(2.0, &st, 3.0, &e)?;
    let lhs = mu_of_cost(d, &combo)?.value;
    let rhs = 2.0 * mu_of_cost(d, &st)?.value + 3.0 * mu_of_cost(d, &e)?.value;
    checks.push(Check::within("mu(2S + 3E) - 2mu(S) - 3mu(E)", lhs - rhs, 1e-12));

    let m = cfg.gcd_exhaustive;
    let mut wrong = 0u64;
    for u in 1..=m {
        for v in 1..=m {
            wrong += u64::from(binary_gcd(u, v)? != num_integer::gcd(u, v));
        }
    }
    checks.push(Check::within(format!("gcd mismatches for u, v <= {m}"), wrong as f64, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut wrong = 0u64;
    for _ in 0..cfg.gcd_random_pairs {
        let (u, v) = (rng.gen_range(1..INPUT_LIMIT), rng.gen_range(1..INPUT_LIMIT));
        wrong += u64::from(binary_gcd(u, v)? != num_integer::gcd(u, v));
    }
    checks.push(Check::within(format!("gcd mismatches on {} random pairs", cfg.gcd_random_pairs), wrong as f64, 0.0));

    Ok(CriterionResult::new(9, "property suites", checks, start.elapsed()))
}

/// Runs all nine criteria, calling `progress` after each one.
pub fn run_acceptance(cfg: &ReportConfig, mut progress: impl FnMut(&CriterionResult)) -> Result<AcceptanceReport> {
    let solved = solve_all(cfg)?;
    let mut criteria = Vec::new();
    let mut push = |c: CriterionResult| {
        progress(&c);
        criteria.push(c);
    };
    push(criterion_xi_one(&solved));
    push(criterion_cross_validation(&solved, cfg.derivative_step)?);
    push(criterion_lambda(&solved));
    push(criterion_subtraction(&solved));
    push(criterion_slopes(&solved, cfg)?);
    push(criterion_census(cfg)?);
    push(criterion_theta(cfg)?);
    push(criterion_dirichlet(cfg)?);
    push(criterion_properties(&solved, cfg)?);
    Ok(AcceptanceReport { config: cfg.clone(), criteria })
}
