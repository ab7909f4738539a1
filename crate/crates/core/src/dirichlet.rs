//! Truncated Dirichlet series `Σ C(u,v)^p / v^{2s}` over the odd ensembles
//! and the zeta-function identities they satisfy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{totients, EnsembleId};
use crate::error::{Error, Result};
use crate::gcd::{for_each_step, CostFunction, CostTable, OddPair};
use crate::numeric::CompensatedSum;

const EULER_MACLAURIN_N: f64 = 50.0;

/// `B_{2j}` for `j = 1..=10`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for real `s > 1`: the first 49 terms summed directly, the
/// rest by Euler–Maclaurin with ten Bernoulli corrections.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
    }
    let n = EULER_MACLAURIN_N;
    let mut acc = CompensatedSum::new();
    for k in (1..n as u32).rev() {
        acc.add(f64::from(k).powf(-s));
    }
    acc.add(n.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * n.powf(-s));
    // B_{2j}/(2j)! · s(s+1)⋯(s+2j−2) · N^{-s-2j+1}
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        acc.add(b / factorial * rising * power);
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        factorial *= (m + 3.0) * (m + 4.0);
        power /= n * n;
    }
    Ok(acc.value())
}

/// `Σ C(u,v)^p / v^{2s}` over `Ξ^(i)` with `v <= v_max`.
#[derive(Debug, Clone)]
pub struct SeriesQuery {
    pub ensemble: EnsembleId,
    pub s: f64,
    pub p: u32,
    pub cost: CostFunction,
    pub v_max: u64,
}

impl SeriesQuery {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.ensemble, EnsembleId::OddCoprime | EnsembleId::Odd) {
            return Err(Error::Domain("Dirichlet series are defined over ensembles 1 and 2".into()));
        }
        if !(self.s > 1.0) {
            return Err(Error::Domain(format!("s must exceed 1, got {}", self.s)));
        }
        if self.p > 1 {
            return Err(Error::Domain(format!("moment order must be 0 or 1, got {}", self.p)));
        }
        if self.v_max < 3 {
            return Err(Error::Domain("v_max must be at least 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Bound on `Σ_{odd v > V} (v/2) v^{-2s}` by integral comparison.
pub fn count_tail_bound(s: f64, v_max: u64) -> f64 {
    let a = (v_max - 1) as f64;
    a.powf(2.0 - 2.0 * s) / (4.0 * (2.0 * s - 2.0))
}

/// Same with every term multiplied by the cost bound `C·(2 log₂ v + 2)`.
pub fn cost_tail_bound(s: f64, v_max: u64, c_bound: f64) -> f64 {
    let a = (v_max - 1) as f64;
    let e = 2.0 * s - 2.0;
    let head = a.powf(-e);
    let log_moment = head * (a.ln() / e + 1.0 / (e * e));
    c_bound / 4.0 * (2.0 / std::f64::consts::LN_2 * log_moment + 2.0 * head / e)
}

fn odd_coprime_counts(v_max: u64) -> Result<Vec<u32>> {
    let n = usize::try_from(v_max).map_err(|_| Error::TooLarge(v_max))?;
    Ok(totients(n))
}

/// `(Σ_{Ξ^(1)}, Σ_{Ξ^(2)})` of `v^{-2s}` from per-denominator counts.
fn count_sums(s: f64, v_max: u64) -> Result<(f64, f64)> {
    let phi = odd_coprime_counts(v_max)?;
    let mut one = CompensatedSum::new();
    let mut two = CompensatedSum::new();
    for v in (3..=v_max).step_by(2) {
        let w = (v as f64).powf(-2.0 * s);
        one.add(f64::from(phi[v as usize] / 2) * w);
        two.add(((v - 1) / 2) as f64 * w);
    }
    Ok((one.value(), two.value()))
}

/// `(Σ_{Ξ^(1)}, Σ_{Ξ^(2)})` of `C(u,v)/v^{2s}` from one pass over the odd
/// pairs, split into fixed denominator bands.
fn cost_sums(s: f64, v_max: u64, table: &CostTable) -> (f64, f64) {
    const BANDS: u64 = 64;
    let edges: Vec<u64> =
        (0..=BANDS).map(|b| ((v_max as f64) * (b as f64 / BANDS as f64).sqrt()) as u64).map(|x| x.max(3)).collect();
    let parts: Vec<(CompensatedSum, CompensatedSum)> = edges
        .par_windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], if w[1] == edges[BANDS as usize] { v_max + 1 } else { w[1] });
            let mut one = CompensatedSum::new();
            let mut two = CompensatedSum::new();
            let first = if lo % 2 == 0 { lo + 1 } else { lo };
            for v in (first..hi).step_by(2) {
                let (mut c1, mut c2) = (0.0, 0.0);
                for u in (1..v).step_by(2) {
                    let mut c = 0.0;
                    let g = for_each_step(OddPair::new(u, v).expect("odd pair"), |b, k| c += table.get(b, k));
                    c2 += c;
                    if g == 1 {
                        c1 += c;
                    }
                }
                let w = (v as f64).powf(-2.0 * s);
                one.add(c1 * w);
                two.add(c2 * w);
            }
            (one, two)
        })
        .collect();
    let mut one = CompensatedSum::new();
    let mut two = CompensatedSum::new();
    for (a, b) in &parts {
        one.merge(a);
        two.merge(b);
    }
    (one.value(), two.value())
}

fn pair_sums(s: f64, v_max: u64, p: u32, cost: &CostFunction) -> Result<(f64, f64)> {
    if p == 0 {
        count_sums(s, v_max)
    } else {
        Ok(cost_sums(s, v_max, &cost.table()?))
    }
}

/// The truncated series and a bound on the discarded tail.
pub fn series_truncated(q: &SeriesQuery) -> Result<SeriesValue> {
    q.validate()?;
    let (one, two) = pair_sums(q.s, q.v_max, q.p, &q.cost)?;
    let value = if q.ensemble == EnsembleId::OddCoprime { one } else { two };
    let tail_bound =
        if q.p == 0 { count_tail_bound(q.s, q.v_max) } else { cost_tail_bound(q.s, q.v_max, q.cost.bound()) };
    Ok(SeriesValue { value, tail_bound })
}

/// `Σ_{Ξ^(2)} v^{-2s} = (1/2 − 4^{-s}) ζ(2s−1) − ((1 − 4^{-s})/2) ζ(2s)`.
pub fn odd_closed_form(s: f64) -> Result<f64> {
    let q = 4f64.powf(-s);
    Ok((0.5 - q) * zeta(2.0 * s - 1.0)? - 0.5 * (1.0 - q) * zeta(2.0 * s)?)
}

/// `Σ_{Ξ^(1)} v^{-2s} = ((4^s − 2)/(4^s − 1)) ζ(2s−1)/(2ζ(2s)) − 1/2`.
pub fn odd_coprime_closed_form(s: f64) -> Result<f64> {
    let f = 4f64.powf(s);
    Ok((f - 2.0) / (f - 1.0) * zeta(2.0 * s - 1.0)? / (2.0 * zeta(2.0 * s)?) - 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub truncated: f64,
    pub closed_form: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(truncated: f64, closed_form: f64, tail_bound: f64) -> Self {
        let residual = (truncated - closed_form).abs();
        IdentityCheck { truncated, closed_form, residual, tail_bound, passed: residual <= tail_bound + 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumthyReport {
    pub s: f64,
    pub v_max: u64,
    pub odd: IdentityCheck,
    pub odd_coprime: IdentityCheck,
}

impl NumthyReport {
    pub fn passed(&self) -> bool {
        self.odd.passed && self.odd_coprime.passed
    }
}

fn check_identity_s(s: f64) -> Result<()> {
    if !(s >= 1.25) {
        return Err(Error::Domain(format!("identity checks need s >= 1.25, got {s}")));
    }
    Ok(())
}

/// Compares the truncated `p = 0` sums with their zeta closed forms.
pub fn verify_numthy(s: f64, v_max: u64) -> Result<NumthyReport> {
    check_identity_s(s)?;
    if v_max < 3 {
        return Err(Error::Domain("v_max must be at least 3".into()));
    }
    let (one, two) = count_sums(s, v_max)?;
    let tail = count_tail_bound(s, v_max);
    Ok(NumthyReport {
        s,
        v_max,
        odd: IdentityCheck::new(two, odd_closed_form(s)?, tail),
        odd_coprime: IdentityCheck::new(one, odd_coprime_closed_form(s)?, tail),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionReport {
    pub s: f64,
    pub v_max: u64,
    pub p: u32,
    pub cost: String,
    pub odd_sum: f64,
    pub odd_coprime_sum: f64,
    pub zeta_factor: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub passed: bool,
}

/// `|Σ_{Ξ^(2)} C^p/v^{2s} − ζ(2s)(1 − 4^{-s}) Σ_{Ξ^(1)} C^p/v^{2s}|` over
/// `v <= v_max`.
///
/// Odd pairs are odd multiples of odd coprime pairs with the same cost, so
/// the identity holds term by term and the truncated sides differ only by
/// their tails.
pub fn verify_convolution(s: f64, v_max: u64, p: u32, cost: &CostFunction) -> Result<ConvolutionReport> {
    check_identity_s(s)?;
    let q = SeriesQuery { ensemble: EnsembleId::Odd, s, p, cost: cost.clone(), v_max };
    q.validate()?;
    let (one, two) = pair_sums(s, v_max, p, cost)?;
    let factor = zeta(2.0 * s)? * (1.0 - 4f64.powf(-s));
    let tail = if p == 0 { count_tail_bound(s, v_max) } else { cost_tail_bound(s, v_max, cost.bound()) };
    let tail_bound = tail + factor * tail;
    let residual = (two - factor * one).abs();
    Ok(ConvolutionReport {
        s,
        v_max,
        p,
        cost: cost.name().to_string(),
        odd_sum: two,
        odd_coprime_sum: one,
        zeta_factor: factor,
        residual,
        tail_bound,
        passed: residual <= tail_bound + 1e-10,
    })
}

/// `(s − 1) Σ_{Ξ^(2)} v^{-2s}` near the pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleRow {
    pub s: f64,
    pub v_max: u64,
    pub truncated: f64,
    pub tail_estimate: f64,
    pub scaled: f64,
    pub closed_form_scaled: f64,
}

/// Uses `v_max = 1000/(s − 1)` and adds the integral estimate
/// `(1/4)(V^{2−2s}/(2s−2) − V^{1−2s}/(2s−1))` of the tail, which carries
/// most of the mass this close to the pole.
pub fn pole_check(s: f64) -> Result<PoleRow> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("s must exceed 1, got {s}")));
    }
    let v_max = (1000.0 / (s - 1.0)).round() as u64;
    let (_, truncated) = count_sums(s, v_max)?;
    let v = v_max as f64;
    let tail_estimate = 0.25 * (v.powf(2.0 - 2.0 * s) / (2.0 * s - 2.0) - v.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0));
    Ok(PoleRow {
        s,
        v_max,
        truncated,
        tail_estimate,
        scaled: (s - 1.0) * (truncated + tail_estimate),
        closed_form_scaled: (s - 1.0) * odd_closed_form(s)?,
    })
}

/// JSON shape `{query, value, tail_bound, closed_form, residual}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub query: QueryInfo,
    pub value: f64,
    pub tail_bound: f64,
    pub closed_form: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryInfo {
    pub ensemble: EnsembleId,
    pub s: f64,
    pub p: u32,
    pub cost: String,
    pub v_max: u64,
}

/// The truncated series with its closed form when one is known (`p = 0`).
pub fn series_report(q: &SeriesQuery) -> Result<SeriesReport> {
    let v = series_truncated(q)?;
    let closed_form = match (q.p, q.ensemble) {
        (0, EnsembleId::Odd) => Some(odd_closed_form(q.s)?),
        (0, _) => Some(odd_coprime_closed_form(q.s)?),
        _ => None,
    };
    Ok(SeriesReport {
        query: QueryInfo { ensemble: q.ensemble, s: q.s, p: q.p, cost: q.cost.name().to_string(), v_max: q.v_max },
        value: v.value,
        tail_bound: v.tail_bound,
        residual: closed_form.map(|c| (c - v.value).abs()),
        closed_form,
    })
}
