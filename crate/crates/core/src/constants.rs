//! Mean-cost constants and the identities linking them, all computed from
//! one solved density.
//!
//! Every truncated sum over `k` reports an analytic bound on the dropped
//! tail next to its value.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::{integrate, integrate_graded, integrate_with, DistributionGrid, SingularDensity, Weight};
use crate::error::{Error, Result};
use crate::gcd::{Branch, CostFunction};
use crate::numeric::CompensatedSum;

/// Terms kept in every k-sum.
pub const K_TERMS: u32 = 60;

/// A truncated series value and a bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_{k>K} k 2^{-k} = (K + 2) 2^{-K}`.
fn k_weighted_tail(k: u32) -> f64 {
    (f64::from(k) + 2.0) * 0.5f64.powi(k as i32)
}

fn y(k: u32) -> f64 {
    1.0 / (1.0 + 2f64.powi(k as i32))
}

fn pow2(k: u32) -> f64 {
    2f64.powi(k as i32)
}

/// `4/(π² ξ(1))`.
pub fn prefactor(d: &SingularDensity) -> f64 {
    4.0 / (PI * PI * d.xi_at_one())
}

/// `λ_ω = Σ_k 2^{-k} (c(2,k) ∫_0^{y_k} ξ + c(1,k) ∫_{y_k}^1 ξ)` with
/// `y_k = 1/(1+2^k)`.
pub fn lambda_omega(d: &SingularDensity, c: &CostFunction) -> Result<Estimate> {
    let mut acc = CompensatedSum::new();
    for k in 1..=K_TERMS {
        let split = y(k);
        let lower = integrate(d, &Weight::One, 0.0, split)?;
        let upper = integrate(d, &Weight::One, split, 1.0)?;
        acc.add((c.eval(Branch::NoExchange, k)? * lower + c.eval(Branch::Exchange, k)? * upper) / pow2(k));
    }
    Ok(Estimate { value: acc.value(), tail_bound: c.bound() * k_weighted_tail(K_TERMS) })
}

/// `μ(c) = 4/(π² ξ(1)) · λ_ω(c)`, the limiting mean cost per `ln n`.
pub fn mu_of_cost(d: &SingularDensity, c: &CostFunction) -> Result<Estimate> {
    let l = lambda_omega(d, c)?;
    let p = prefactor(d);
    Ok(Estimate { value: p * l.value, tail_bound: p * l.tail_bound })
}

/// The three expressions for `λ_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaS {
    pub v1: Estimate,
    pub v2: Estimate,
    pub v3: f64,
}

/// `v1 = Σ_k (2/2^k)(∫_0^{y_k} log((1−x)/2^k) ξ + ∫_{y_k}^1 log x ξ)`,
/// `v2 = −Σ_k (2/2^k) ∫_0^1 log(2^k(1+x)/(1+(2^k−1)x)) ξ`,
/// `v3 = ∫_0^1 log(1−x) ξ − log 4`.
pub fn lambda_s_three_ways(d: &SingularDensity) -> Result<LambdaS> {
    let l1 = -integrate(d, &Weight::LogOneMinusX, 0.0, 1.0)?;
    let lx = -integrate(d, &Weight::LogX, 0.0, 1.0)?;
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    for k in 1..=K_TERMS {
        let split = y(k);
        let shift = f64::from(k) * LN_2;
        let lower = integrate_with(d, 0.0, split, |x| (-x).ln_1p() - shift)?;
        let upper = integrate(d, &Weight::LogX, split, 1.0)?;
        s1.add(2.0 * (lower + upper) / pow2(k));
        s2.add(-2.0 * integrate(d, &Weight::BrentKernel(k), 0.0, 1.0)? / pow2(k));
    }
    let geometric_tail = 0.5f64.powi(K_TERMS as i32);
    Ok(LambdaS {
        v1: Estimate {
            value: s1.value(),
            tail_bound: 2.0 * LN_2 * k_weighted_tail(K_TERMS) + 2.0 * (l1 + lx) * geometric_tail,
        },
        v2: Estimate { value: s2.value(), tail_bound: 2.0 * LN_2 * (k_weighted_tail(K_TERMS) + geometric_tail) },
        v3: -l1 - 4f64.ln(),
    })
}

/// `λ_s = −π² ξ(1)/2`.
pub fn lambda_s_from_xi(d: &SingularDensity) -> f64 {
    -PI * PI * d.xi_at_one() / 2.0
}

/// `μ(c) = −2 λ_ω(c)/λ_s` with `λ_s` taken from the `log(1−x)` moment.
pub fn mu_via_lambda(d: &SingularDensity, c: &CostFunction) -> Result<Estimate> {
    let l = lambda_omega(d, c)?;
    let s = -integrate(d, &Weight::LogOneMinusX, 0.0, 1.0)? + 4f64.ln();
    Ok(Estimate { value: 2.0 * l.value / s, tail_bound: 2.0 * l.tail_bound / s })
}

/// Inverse subtraction constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaConstants {
    /// `log 2 + ∫_0^1 (Σ_{k≥2} (1−2^{-k})/(1+(2^k−1)x) − 1/(2(1+x))) F(x) dx`
    pub beta: Estimate,
    /// `log 2 − ½ ∫_0^1 log(1−x) ξ(x) dx`
    pub beta_tilde: f64,
}

/// Terms past `k = ⌈log₂(1/x)⌉ + 48` add less than `2^{-47}` to the kernel.
fn beta_kernel(x: f64) -> f64 {
    let kmax = 48 + (-x.log2()).ceil().max(0.0) as u32;
    let mut acc = -0.5 / (1.0 + x);
    let mut p = 2.0;
    for _ in 2..=kmax {
        p *= 2.0;
        acc += (1.0 - 1.0 / p) / (1.0 + (p - 1.0) * x);
    }
    acc
}

pub fn beta_constants(d: &SingularDensity, f: &DistributionGrid) -> Result<BetaConstants> {
    let integral = integrate_graded(f.grid(), 0.0, 1.0, |x| beta_kernel(x) * f.eval_unchecked(x));
    let beta = Estimate { value: LN_2 + integral, tail_bound: 0.5f64.powi(47) };
    let beta_tilde = LN_2 - 0.5 * integrate(d, &Weight::LogOneMinusX, 0.0, 1.0)?;
    Ok(BetaConstants { beta, beta_tilde })
}

/// `2/(log 4 + ∫_0^1 (1 − F(x))/(1 − x) dx)`, the integrated-by-parts
/// form of the subtraction constant.
pub fn knuth_constant(f: &DistributionGrid) -> f64 {
    let integral = integrate_graded(f.grid(), 0.0, 1.0, |x| (1.0 - f.eval_unchecked(x)) / (1.0 - x));
    2.0 / (4f64.ln() + integral)
}

/// The two closed forms of the exchange constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeConstant {
    pub form1: Estimate,
    pub form2: f64,
    /// `Σ_k 2^{-k} ∫_{y_k}^1 ξ`, expected slightly above one half.
    pub factor: f64,
}

pub fn exchange_constant(d: &SingularDensity) -> Result<ExchangeConstant> {
    let p = prefactor(d);
    let mut acc = CompensatedSum::new();
    for k in 1..=K_TERMS {
        acc.add(integrate(d, &Weight::One, y(k), 1.0)? / pow2(k));
    }
    let factor = acc.value();
    let form2 = p * (integrate(d, &Weight::One, 0.5, 1.0)? + 2.0 / 3.0 * integrate(d, &Weight::One, 1.0 / 3.0, 1.0)?);
    Ok(ExchangeConstant {
        form1: Estimate { value: p * factor, tail_bound: p * 0.5f64.powi(K_TERMS as i32) },
        form2,
        factor,
    })
}

/// Test functions for the stationarity identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StationarityWeight {
    /// `2 log(1 + x)`
    TwoLogOnePlusX,
    /// `log x`
    LogX,
    One,
}

impl StationarityWeight {
    pub const ALL: [StationarityWeight; 3] =
        [StationarityWeight::TwoLogOnePlusX, StationarityWeight::LogX, StationarityWeight::One];

    fn eval(self, x: f64) -> f64 {
        match self {
            StationarityWeight::TwoLogOnePlusX => 2.0 * x.ln_1p(),
            StationarityWeight::LogX => x.ln(),
            StationarityWeight::One => 1.0,
        }
    }
}

impl fmt::Display for StationarityWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StationarityWeight::TwoLogOnePlusX => "2log1p",
            StationarityWeight::LogX => "log",
            StationarityWeight::One => "one",
        })
    }
}

impl FromStr for StationarityWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "2log1p" => Ok(StationarityWeight::TwoLogOnePlusX),
            "log" => Ok(StationarityWeight::LogX),
            "one" => Ok(StationarityWeight::One),
            other => Err(Error::UnknownWeight(other.to_string())),
        }
    }
}

/// `|Σ_k 2^{-k}(∫_0^{y_k} f(2^k x/(1−x)) ξ + ∫_{y_k}^1 f((1−x)/(2^k x)) ξ) − ∫_0^1 f ξ|`.
///
/// The log weight is expanded analytically at the image points so no
/// argument underflows.
pub fn stationarity_check(d: &SingularDensity, f: StationarityWeight) -> Result<Estimate> {
    let mut acc = CompensatedSum::new();
    for k in 1..=K_TERMS {
        let split = y(k);
        let p = pow2(k);
        let shift = f64::from(k) * LN_2;
        let (lower, upper) = match f {
            StationarityWeight::LogX => (
                integrate_with(d, 0.0, split, |x| shift + x.ln() - (-x).ln_1p())?,
                integrate_with(d, split, 1.0, |x| (-x).ln_1p() - shift - x.ln())?,
            ),
            _ => (
                integrate_with(d, 0.0, split, |x| f.eval(p * x / (1.0 - x)))?,
                integrate_with(d, split, 1.0, |x| f.eval((1.0 - x) / (p * x)))?,
            ),
        };
        acc.add((lower + upper) / p);
    }
    let rhs = match f {
        StationarityWeight::LogX => integrate(d, &Weight::LogX, 0.0, 1.0)?,
        StationarityWeight::One => integrate(d, &Weight::One, 0.0, 1.0)?,
        _ => integrate_with(d, 0.0, 1.0, |x| f.eval(x))?,
    };
    let geometric_tail = 0.5f64.powi(K_TERMS as i32);
    let tail_bound = match f {
        StationarityWeight::TwoLogOnePlusX => 2.0 * LN_2 * geometric_tail,
        StationarityWeight::One => geometric_tail,
        StationarityWeight::LogX => {
            let l1 = -integrate(d, &Weight::LogOneMinusX, 0.0, 1.0)?;
            LN_2 * k_weighted_tail(K_TERMS) + (l1 - rhs) * geometric_tail
        }
    };
    Ok(Estimate { value: (acc.value() - rhs).abs(), tail_bound })
}

/// One named check: `|value| <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Residual {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Residual { name: name.into(), value, tolerance, passed: value.abs() <= tolerance }
    }
}

/// Every constant plus the residual of every identity between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub xi_one: f64,
    pub mu_s: f64,
    pub mu_t: f64,
    pub mu_e: f64,
    pub lambda_s_v1: f64,
    pub lambda_s_v2: f64,
    pub lambda_s_v3: f64,
    pub lambda_s_from_xi: f64,
    pub beta: f64,
    pub beta_tilde: f64,
    pub knuth: f64,
    pub exch_form1: f64,
    pub exch_form2: f64,
    pub exchange_factor: f64,
    pub tail_bounds: Vec<(String, f64)>,
    pub residuals: Vec<Residual>,
}

impl ConstantsReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed)
    }
}

/// Computes the full report from one density and its distribution function.
pub fn constants_report(d: &SingularDensity, f: &DistributionGrid) -> Result<ConstantsReport> {
    let (s, t, e) = (CostFunction::steps(), CostFunction::shifts(), CostFunction::exchanges());
    let mu_s = mu_of_cost(d, &s)?;
    let mu_t = mu_of_cost(d, &t)?;
    let mu_e = mu_of_cost(d, &e)?;
    let ls = lambda_s_three_ways(d)?;
    let from_xi = lambda_s_from_xi(d);
    let beta = beta_constants(d, f)?;
    let knuth = knuth_constant(f);
    let exch = exchange_constant(d)?;

    let mut residuals = Vec::new();
    let lambdas = [("v1", ls.v1.value), ("v2", ls.v2.value), ("v3", ls.v3), ("xi", from_xi)];
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            let name = format!("lambda_s {} - {}", lambdas[i].0, lambdas[j].0);
            residuals.push(Residual::new(name, lambdas[i].1 - lambdas[j].1, 1e-5));
        }
    }
    residuals.push(Residual::new("exchange form1 - form2", exch.form1.value - exch.form2, 1e-8));
    residuals.push(Residual::new("1/beta - mu_S", 1.0 / beta.beta.value - mu_s.value, 1e-5));
    residuals.push(Residual::new("1/beta_tilde - mu_S", 1.0 / beta.beta_tilde - mu_s.value, 1e-5));
    residuals.push(Residual::new("knuth - mu_S", knuth - mu_s.value, 1e-5));
    residuals.push(Residual::new("mu_T - 2 mu_S", mu_t.value - 2.0 * mu_s.value, 1e-12));
    for (name, c, mu) in [("S", &s, mu_s), ("T", &t, mu_t), ("E", &e, mu_e)] {
        let other = mu_via_lambda(d, c)?;
        residuals.push(Residual::new(format!("mu_{name} routes"), other.value - mu.value, 1e-8));
    }
    let outside = if exch.factor > 0.5 && exch.factor < 0.6 { 0.0 } else { exch.factor - 0.55 };
    residuals.push(Residual::new("exchange factor outside (0.5, 0.6)", outside, 0.0));
    for (w, tol) in StationarityWeight::ALL.into_iter().zip([1e-7, 1e-6, 1e-9]) {
        let r = stationarity_check(d, w)?;
        residuals.push(Residual::new(format!("stationarity {w}"), r.value, tol));
    }

    Ok(ConstantsReport {
        xi_one: d.xi_at_one(),
        mu_s: mu_s.value,
        mu_t: mu_t.value,
        mu_e: mu_e.value,
        lambda_s_v1: ls.v1.value,
        lambda_s_v2: ls.v2.value,
        lambda_s_v3: ls.v3,
        lambda_s_from_xi: from_xi,
        beta: beta.beta.value,
        beta_tilde: beta.beta_tilde,
        knuth,
        exch_form1: exch.form1.value,
        exch_form2: exch.form2,
        exchange_factor: exch.factor,
        tail_bounds: vec![
            ("mu_S".into(), mu_s.tail_bound),
            ("mu_T".into(), mu_t.tail_bound),
            ("mu_E".into(), mu_e.tail_bound),
            ("lambda_s v1".into(), ls.v1.tail_bound),
            ("lambda_s v2".into(), ls.v2.tail_bound),
            ("beta".into(), beta.beta.tail_bound),
            ("exchange form1".into(), exch.form1.tail_bound),
        ],
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::brent_kernel;

    #[test]
    fn tails() {
        let direct: f64 = (11..200).map(|k| k as f64 * 0.5f64.powi(k)).sum();
        assert!((k_weighted_tail(10) - direct).abs() < 1e-15);
    }

    #[test]
    fn beta_kernel_matches_long_sum() {
        for &x in &[1e-9, 0.01, 0.5, 1.0] {
            let direct: f64 = (2..200)
                .map(|k| {
                    let p = 2f64.powi(k);
                    (1.0 - 1.0 / p) / (1.0 + (p - 1.0) * x)
                })
                .sum::<f64>()
                - 0.5 / (1.0 + x);
            assert!((beta_kernel(x) - direct).abs() < 1e-13 * direct.abs().max(1.0), "{x}");
        }
    }

    #[test]
    fn stationarity_weight_parsing() {
        assert_eq!("log".parse::<StationarityWeight>().unwrap(), StationarityWeight::LogX);
        assert!("log1m".parse::<StationarityWeight>().is_err());
    }

    #[test]
    fn brent_kernel_is_bounded_by_k_log_two() {
        for k in 1..40 {
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let v = brent_kernel(k, x);
                assert!(v >= -1e-15 && v <= (k as f64 + 1.0) * LN_2);
            }
        }
    }
}
