//! Exact binary Euclidean algorithm with step tracing and cost accounting.
//!
//! A run on odd `u <= v` repeatedly replaces `(u, v)` by `(u, (v - u) / 2^k)`,
//! where `2^k` is the largest power of two dividing `v - u`, exchanging the
//! two entries when the new second entry is smaller than `u`. The run stops
//! once the two entries agree. Each iteration is recorded as a
//! [`StepRecord`] carrying its [`Branch`] and dyadic exponent `k`; any
//! [`CostFunction`] then prices a run as the sum of `c(branch, k)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs must stay below this bound so that differences never overflow.
pub const INPUT_LIMIT: u64 = 1 << 62;

/// Largest dyadic exponent a step can produce for inputs below [`INPUT_LIMIT`].
pub const MAX_K: u32 = 63;

/// The two branch families of one step.
///
/// The discriminants follow the cost-function convention `c(i, k)`:
/// `1` for a step that ends with an exchange, `2` for one that does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Branch {
    Exchange = 1,
    NoExchange = 2,
}

impl Branch {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Branch::Exchange),
            2 => Ok(Branch::NoExchange),
            other => Err(Error::Domain(format!("branch index must be 1 or 2, got {other}"))),
        }
    }

    #[inline]
    fn slot(self) -> usize {
        match self {
            Branch::Exchange => 0,
            Branch::NoExchange => 1,
        }
    }
}

/// A pair of positive odd integers ordered `u <= v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OddPair {
    u: u64,
    v: u64,
}

impl OddPair {
    pub fn new(u: u64, v: u64) -> Result<Self> {
        if u == 0 || v == 0 {
            return Err(Error::Domain("odd pair entries must be positive".into()));
        }
        if u % 2 == 0 || v % 2 == 0 {
            return Err(Error::Domain(format!("({u}, {v}) is not a pair of odd integers")));
        }
        if u > v {
            return Err(Error::Domain(format!("({u}, {v}) is not ordered u <= v")));
        }
        if v >= INPUT_LIMIT {
            return Err(Error::TooLarge(v));
        }
        Ok(OddPair { u, v })
    }

    /// Builds a pair from two odd values in either order.
    pub fn sorted(a: u64, b: u64) -> Result<Self> {
        if a <= b {
            OddPair::new(a, b)
        } else {
            OddPair::new(b, a)
        }
    }

    pub fn u(&self) -> u64 {
        self.u
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn is_terminal(&self) -> bool {
        self.u == self.v
    }
}

impl fmt::Display for OddPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// One iteration of the algorithm: its branch family and dyadic exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepRecord {
    pub branch: Branch,
    pub k: u32,
}

impl fmt::Display for StepRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.branch.index(), self.k)
    }
}

/// Splits `n` into its odd part and the exponent of the power of two.
pub fn strip_twos(n: u64) -> Result<(u64, u32)> {
    if n == 0 {
        return Err(Error::Domain("cannot strip powers of two from zero".into()));
    }
    let e = n.trailing_zeros();
    Ok((n >> e, e))
}

/// Outcome of [`reduce_to_odd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reduced {
    pub pair: OddPair,
    pub shared_exponent: u32,
    /// True when the odd parts had to be reordered.
    pub swapped: bool,
}

/// Replaces a general pair by the ordered pair of its odd parts.
///
/// `gcd(u, v) = 2^shared_exponent * gcd(pair.u, pair.v)`.
pub fn reduce_to_odd(u: u64, v: u64) -> Result<Reduced> {
    if u >= INPUT_LIMIT {
        return Err(Error::TooLarge(u));
    }
    if v >= INPUT_LIMIT {
        return Err(Error::TooLarge(v));
    }
    let (a, ea) = strip_twos(u)?;
    let (b, eb) = strip_twos(v)?;
    let swapped = a > b;
    Ok(Reduced { pair: OddPair::sorted(a, b)?, shared_exponent: ea.min(eb), swapped })
}

#[inline(always)]
fn step_raw(u: u64, v: u64) -> (u64, u64, Branch, u32) {
    let d = v - u;
    let k = d.trailing_zeros();
    let w = d >> k;
    if w >= u {
        (u, w, Branch::NoExchange, k)
    } else {
        (w, u, Branch::Exchange, k)
    }
}

/// Performs a single iteration on a pair with `u < v`.
pub fn binary_step(pair: OddPair) -> Result<(OddPair, StepRecord)> {
    if pair.is_terminal() {
        return Err(Error::EqualPair { u: pair.u, v: pair.v });
    }
    let (u, v, branch, k) = step_raw(pair.u, pair.v);
    Ok((OddPair { u, v }, StepRecord { branch, k }))
}

/// Runs the algorithm on an odd pair, calling `visit` for every step, and
/// returns the odd gcd. This is the allocation-free path used by the
/// ensemble sweeps.
#[inline]
pub fn for_each_step<F: FnMut(Branch, u32)>(pair: OddPair, mut visit: F) -> u64 {
    let (mut u, mut v) = (pair.u, pair.v);
    while u != v {
        let (nu, nv, branch, k) = step_raw(u, v);
        visit(branch, k);
        u = nu;
        v = nv;
    }
    u
}

/// Complete record of one run of the algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    input: (u64, u64),
    pair: OddPair,
    steps: Vec<StepRecord>,
    gcd: u64,
}

impl Trace {
    /// The original (possibly even) inputs.
    pub fn input(&self) -> (u64, u64) {
        self.input
    }

    /// The odd-part pair the steps were recorded on.
    pub fn pair(&self) -> OddPair {
        self.pair
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// gcd of the original inputs.
    pub fn gcd(&self) -> u64 {
        self.gcd
    }

    /// `S(u, v)`: number of subtractions.
    pub fn subtractions(&self) -> usize {
        self.steps.len()
    }

    /// `T(u, v)`: total number of halvings.
    pub fn shifts(&self) -> u64 {
        self.steps.iter().map(|s| u64::from(s.k)).sum()
    }

    /// `E(u, v)`: number of exchanges.
    pub fn exchanges(&self) -> usize {
        self.steps.iter().filter(|s| s.branch == Branch::Exchange).count()
    }

    /// Replays the recorded steps from the odd pair, checking that each one
    /// is what the algorithm would do and that the run ends on equal values.
    pub fn replay(&self) -> Result<OddPair> {
        let mut pair = self.pair;
        for (i, rec) in self.steps.iter().enumerate() {
            let (next, actual) = binary_step(pair)?;
            if actual != *rec {
                return Err(Error::Domain(format!("step {i} recorded as {rec} but the algorithm performs {actual}")));
            }
            pair = next;
        }
        if !pair.is_terminal() {
            return Err(Error::Domain(format!("replay stops at non-terminal pair {pair}")));
        }
        Ok(pair)
    }

    /// Parses the compact `(i,k);(i,k);...` form used by `--dump-trace`.
    pub fn parse_steps(text: &str) -> Result<Vec<StepRecord>> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(';').map(|tok| tok.parse::<StepRecord>()).collect()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for StepRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("malformed step `{s}`")))?;
        let (i, k) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("malformed step `{s}`")))?;
        let i: u8 = i.trim().parse().map_err(|_| Error::Parse(format!("bad branch in `{s}`")))?;
        let k: u32 = k.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
        if k == 0 {
            return Err(Error::Parse(format!("exponent must be positive in `{s}`")));
        }
        Ok(StepRecord { branch: Branch::from_index(i)?, k })
    }
}

/// Traces the algorithm on an arbitrary pair of positive integers.
///
/// The steps are those of the ordered odd parts; equal odd parts give an
/// empty trace.
pub fn binary_gcd_trace(u: u64, v: u64) -> Result<Trace> {
    let reduced = reduce_to_odd(u, v)?;
    let mut steps = Vec::new();
    let odd_gcd = for_each_step(reduced.pair, |branch, k| steps.push(StepRecord { branch, k }));
    Ok(Trace { input: (u, v), pair: reduced.pair, steps, gcd: odd_gcd << reduced.shared_exponent })
}

/// Binary gcd of two positive integers without recording the steps.
pub fn binary_gcd(u: u64, v: u64) -> Result<u64> {
    let reduced = reduce_to_odd(u, v)?;
    Ok(for_each_step(reduced.pair, |_, _| {}) << reduced.shared_exponent)
}

/// Applies the interval map `T_k` to the reduced fraction `p/q` in `(0, 1]`,
/// returning the reduced image.
pub fn t_map(k: u32, p: u64, q: u64) -> Result<(u64, u64)> {
    if p == 0 || p > q {
        return Err(Error::Domain(format!("{p}/{q} is not in (0, 1]")));
    }
    let scale = 1u128 << k;
    let (p, q) = (u128::from(p), u128::from(q));
    // x <= 1/(1+2^k)  <=>  p (1 + 2^k) <= q
    let (num, den) = if p * (1 + scale) <= q { (scale * p, q - p) } else { (q - p, scale * p) };
    let g = num_integer::gcd(num, den);
    let (num, den) = (num / g, den / g);
    match (u64::try_from(num), u64::try_from(den)) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        _ => Err(Error::Overflow(format!("T_{k} image of {p}/{q}"))),
    }
}

/// Follows the orbit of the odd fraction `u/v` under the maps `T_k`, where
/// each `k` is the 2-adic valuation of denominator minus numerator, and
/// returns the exponent sequence up to the first time the orbit reaches 1.
pub fn fraction_orbit(u: u64, v: u64) -> Result<Vec<u32>> {
    let g = num_integer::gcd(u, v);
    let (mut p, mut q) = (u / g, v / g);
    if p % 2 == 0 || q % 2 == 0 || p > q {
        return Err(Error::Domain(format!("{u}/{v} is not an odd fraction in (0, 1]")));
    }
    let mut ks = Vec::new();
    while p != q {
        let k = (q - p).trailing_zeros();
        ks.push(k);
        (p, q) = t_map(k, p, q)?;
    }
    Ok(ks)
}

/// Precomputed `c(i, k)` for `k = 1..=63`, indexed by branch and exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    values: [[f64; 64]; 2],
}

impl CostTable {
    #[inline(always)]
    pub fn get(&self, branch: Branch, k: u32) -> f64 {
        self.values[branch.slot()][k as usize]
    }

    /// Total cost of a run on `pair` together with its odd gcd.
    #[inline]
    pub fn run(&self, pair: OddPair) -> (f64, u64) {
        let mut total = 0.0;
        let g = for_each_step(pair, |b, k| total += self.get(b, k));
        (total, g)
    }
}

type CostFn = dyn Fn(Branch, u32) -> f64 + Send + Sync;

/// A regular cost function `c(i, k)` with its declared regularity constant:
/// `0 <= c(i, k) <= bound * k` for every branch and `k >= 1`.
///
/// Regularity cannot be checked everywhere, so every evaluation through
/// [`CostFunction::eval`] verifies it at the evaluated point.
#[derive(Clone)]
pub struct CostFunction {
    name: String,
    bound: f64,
    eval: Arc<CostFn>,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction").field("name", &self.name).field("bound", &self.bound).finish()
    }
}

impl CostFunction {
    /// Wraps an arbitrary evaluator. Rejects a non-positive bound and
    /// evaluators that vanish on every `(i, k)` with `k <= 63`.
    pub fn new<F>(name: impl Into<String>, bound: f64, eval: F) -> Result<Self>
    where
        F: Fn(Branch, u32) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidCost(format!("regularity constant of `{name}` must be positive")));
        }
        let nonzero = (1..=MAX_K).any(|k| eval(Branch::Exchange, k) != 0.0 || eval(Branch::NoExchange, k) != 0.0);
        if !nonzero {
            return Err(Error::InvalidCost(format!("`{name}` is identically zero")));
        }
        Ok(CostFunction { name, bound, eval: Arc::new(eval) })
    }

    /// `c ≡ 1`: counts subtractions, `S(u, v)`.
    pub fn steps() -> Self {
        CostFunction::new("S", 1.0, |_, _| 1.0).expect("built-in cost")
    }

    /// `c(i, k) = k`: counts halvings, `T(u, v)`.
    pub fn shifts() -> Self {
        CostFunction::new("T", 1.0, |_, k| f64::from(k)).expect("built-in cost")
    }

    /// `c(1, k) = 1, c(2, k) = 0`: counts exchanges, `E(u, v)`.
    pub fn exchanges() -> Self {
        CostFunction::new("E", 1.0, |b, _| if b == Branch::Exchange { 1.0 } else { 0.0 }).expect("built-in cost")
    }

    /// `c(1, k) = 0, c(2, k) = 1`: counts steps without an exchange.
    pub fn non_exchanges() -> Self {
        CostFunction::new("N", 1.0, |b, _| if b == Branch::NoExchange { 1.0 } else { 0.0 }).expect("built-in cost")
    }

    /// `a * first + b * second` for non-negative `a`, `b`.
    pub fn linear_combination(a: f64, first: &CostFunction, b: f64, second: &CostFunction) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InvalidCost("combination weights must be non-negative".into()));
        }
        let (f1, f2) = (first.eval.clone(), second.eval.clone());
        CostFunction::new(
            format!("{a}*{}+{b}*{}", first.name, second.name),
            a * first.bound + b * second.bound,
            move |br, k| a * f1(br, k) + b * f2(br, k),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Evaluates `c(branch, k)`, checking non-negativity and regularity.
    pub fn eval(&self, branch: Branch, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::Domain("dyadic exponent must be positive".into()));
        }
        let value = (self.eval)(branch, k);
        if !(value >= 0.0) || value > self.bound * f64::from(k) * (1.0 + 1e-12) {
            return Err(Error::IrregularCost {
                name: self.name.clone(),
                branch: branch.index(),
                k,
                value,
                bound: self.bound,
            });
        }
        Ok(value)
    }

    /// Tabulates and validates every value a run can use.
    pub fn table(&self) -> Result<CostTable> {
        let mut values = [[0.0; 64]; 2];
        for k in 1..=MAX_K {
            for br in [Branch::Exchange, Branch::NoExchange] {
                values[br.slot()][k as usize] = self.eval(br, k)?;
            }
        }
        Ok(CostTable { values })
    }

    /// Parses a cost table file.
    ///
    /// ```text
    /// #cost-table C=2 extend=linear
    /// 1 1 1.0
    /// 2 1 0.5
    /// 2 3 1.5
    /// ```
    ///
    /// Each data line is `i k value`. Missing `(i, k)` fall back to the
    /// declared extension: `constant` reuses the value at the largest listed
    /// `k <= requested` (or the smallest listed `k` above it), `linear`
    /// scales the value at the largest listed `k` proportionally to `k`.
    /// A branch with no entries costs zero.
    pub fn from_table_text(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut bound = None;
        let mut linear = None;
        let mut entries: [Vec<(u32, f64)>; 2] = [Vec::new(), Vec::new()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix("#cost-table") {
                for field in header.split_whitespace() {
                    match field.split_once('=') {
                        Some(("C", c)) => {
                            bound = Some(
                                c.parse::<f64>().map_err(|_| Error::Parse(format!("bad regularity constant `{c}`")))?,
                            )
                        }
                        Some(("extend", "linear")) => linear = Some(true),
                        Some(("extend", "constant")) => linear = Some(false),
                        _ => return Err(Error::Parse(format!("unknown header field `{field}`"))),
                    }
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `i k value`", lineno + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: u8 = fields[0].parse().map_err(|_| bad())?;
            let k: u32 = fields[1].parse().map_err(|_| bad())?;
            let value: f64 = fields[2].parse().map_err(|_| bad())?;
            if k == 0 || k > MAX_K {
                return Err(Error::Parse(format!("line {}: k must lie in 1..=63", lineno + 1)));
            }
            entries[Branch::from_index(i)?.slot()].push((k, value));
        }
        let bound = bound.ok_or_else(|| Error::Parse("missing `#cost-table C=...` header".into()))?;
        let linear = linear.ok_or_else(|| Error::Parse("missing `extend=constant|linear` in header".into()))?;
        for list in entries.iter_mut() {
            list.sort_by_key(|&(k, _)| k);
            list.dedup_by_key(|e| e.0);
        }
        let lookup = move |br: Branch, k: u32| -> f64 {
            let list = &entries[br.slot()];
            if let Ok(pos) = list.binary_search_by_key(&k, |e| e.0) {
                return list[pos].1;
            }
            let Some(&(k_last, v_last)) = list.last() else {
                return 0.0;
            };
            if linear {
                if k > k_last {
                    return v_last * f64::from(k) / f64::from(k_last);
                }
                let &(k_first, v_first) = list.iter().find(|e| e.0 > k).expect("k below last key");
                return v_first * f64::from(k) / f64::from(k_first);
            }
            list.iter().rev().find(|e| e.0 < k).map_or(list[0].1, |e| e.1)
        };
        let cost = CostFunction::new(name, bound, lookup)?;
        // Catch irregular tables up front rather than mid-sweep.
        cost.table()?;
        Ok(cost)
    }
}

/// Total cost of a trace: the sum of `c(branch, k)` over its steps.
pub fn total_cost(trace: &Trace, cost: &CostFunction) -> Result<f64> {
    trace.steps.iter().try_fold(0.0, |acc, s| Ok(acc + cost.eval(s.branch, s.k)?))
}

impl Trace {
    pub fn cost(&self, cost: &CostFunction) -> Result<f64> {
        total_cost(self, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn classical_gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    fn sr(b: u8, k: u32) -> StepRecord {
        StepRecord { branch: Branch::from_index(b).unwrap(), k }
    }

    #[test]
    fn strip_twos_examples() {
        assert_eq!(strip_twos(1).unwrap(), (1, 0));
        assert_eq!(strip_twos(20).unwrap(), (5, 2));
        assert_eq!(strip_twos(96).unwrap(), (3, 5));
        assert!(strip_twos(0).is_err());
    }

    #[test]
    fn reduce_to_odd_examples() {
        let r = reduce_to_odd(6, 20).unwrap();
        assert_eq!((r.pair.u(), r.pair.v(), r.shared_exponent, r.swapped), (3, 5, 1, false));
        let r = reduce_to_odd(1, 1).unwrap();
        assert_eq!((r.pair.u(), r.pair.v(), r.shared_exponent, r.swapped), (1, 1, 0, false));
        let r = reduce_to_odd(40, 6).unwrap();
        assert_eq!((r.pair.u(), r.pair.v(), r.shared_exponent, r.swapped), (3, 5, 1, true));
        assert!(reduce_to_odd(0, 3).is_err());
        assert!(reduce_to_odd(3, INPUT_LIMIT).is_err());
    }

    #[test]
    fn binary_step_examples() {
        let (next, rec) = binary_step(OddPair::new(3, 5).unwrap()).unwrap();
        assert_eq!((next, rec), (OddPair::new(1, 3).unwrap(), sr(1, 1)));
        let (next, rec) = binary_step(OddPair::new(1, 3).unwrap()).unwrap();
        assert_eq!((next, rec), (OddPair::new(1, 1).unwrap(), sr(2, 1)));
        let (next, rec) = binary_step(OddPair::new(1, 9).unwrap()).unwrap();
        assert_eq!((next, rec), (OddPair::new(1, 1).unwrap(), sr(2, 3)));
        assert!(matches!(binary_step(OddPair::new(7, 7).unwrap()), Err(Error::EqualPair { .. })));
    }

    #[test]
    fn odd_pair_rejects_bad_input() {
        assert!(OddPair::new(2, 3).is_err());
        assert!(OddPair::new(5, 3).is_err());
        assert!(OddPair::new(0, 3).is_err());
    }

    #[test]
    fn trace_examples() {
        let t = binary_gcd_trace(3, 5).unwrap();
        assert_eq!(t.steps(), &[sr(1, 1), sr(2, 1)]);
        assert_eq!((t.gcd(), t.subtractions(), t.shifts(), t.exchanges()), (1, 2, 2, 1));

        let t = binary_gcd_trace(1, 7).unwrap();
        assert_eq!(t.steps(), &[sr(2, 1), sr(2, 1)]);
        assert_eq!((t.gcd(), t.subtractions(), t.shifts(), t.exchanges()), (1, 2, 2, 0));

        let t = binary_gcd_trace(3, 3).unwrap();
        assert!(t.steps().is_empty());
        assert_eq!(t.gcd(), 3);

        let t = binary_gcd_trace(6, 20).unwrap();
        assert_eq!(t.steps(), binary_gcd_trace(3, 5).unwrap().steps());
        assert_eq!(t.gcd(), 2);
    }

    #[test]
    fn total_cost_examples() {
        let t = binary_gcd_trace(3, 5).unwrap();
        assert_eq!(total_cost(&t, &CostFunction::steps()).unwrap(), 2.0);
        assert_eq!(total_cost(&t, &CostFunction::exchanges()).unwrap(), 1.0);
        let empty = binary_gcd_trace(9, 9).unwrap();
        assert_eq!(total_cost(&empty, &CostFunction::shifts()).unwrap(), 0.0);
    }

    #[test]
    fn trace_text_round_trip() {
        let t = binary_gcd_trace(3, 5).unwrap();
        assert_eq!(t.to_string(), "(1,1);(2,1)");
        assert_eq!(Trace::parse_steps(&t.to_string()).unwrap(), t.steps());
        assert!(Trace::parse_steps("").unwrap().is_empty());
        assert!(Trace::parse_steps("(3,1)").is_err());
        assert!(Trace::parse_steps("(1,0)").is_err());
    }

    #[test]
    fn gcd_matches_euclid_exhaustively_up_to_512() {
        for v in 1..=512u64 {
            for u in 1..=512u64 {
                assert_eq!(binary_gcd(u, v).unwrap(), classical_gcd(u, v), "({u}, {v})");
            }
        }
    }

    #[test]
    fn cost_function_validation() {
        assert!(CostFunction::new("zero", 1.0, |_, _| 0.0).is_err());
        assert!(CostFunction::new("neg-bound", -1.0, |_, _| 1.0).is_err());
        let quad = CostFunction::new("k^2", 1.0, |_, k| f64::from(k * k)).unwrap();
        assert!(quad.eval(Branch::Exchange, 1).is_ok());
        assert!(matches!(quad.eval(Branch::Exchange, 2), Err(Error::IrregularCost { .. })));
        assert!(quad.table().is_err());
    }

    #[test]
    fn cost_table_text() {
        let text = "#cost-table C=2 extend=linear\n1 1 1.0\n2 1 0.5\n2 3 1.5\n";
        let c = CostFunction::from_table_text("custom", text).unwrap();
        assert_eq!(c.eval(Branch::Exchange, 1).unwrap(), 1.0);
        assert_eq!(c.eval(Branch::Exchange, 4).unwrap(), 4.0);
        assert_eq!(c.eval(Branch::NoExchange, 2).unwrap(), 1.0);
        assert_eq!(c.eval(Branch::NoExchange, 6).unwrap(), 3.0);

        let text = "#cost-table C=1 extend=constant\n1 2 0.75\n";
        let c = CostFunction::from_table_text("flat", text).unwrap();
        assert_eq!(c.eval(Branch::Exchange, 1).unwrap(), 0.75);
        assert_eq!(c.eval(Branch::Exchange, 9).unwrap(), 0.75);
        assert_eq!(c.eval(Branch::NoExchange, 9).unwrap(), 0.0);

        assert!(CostFunction::from_table_text("x", "1 1 1\n").is_err());
        assert!(CostFunction::from_table_text("x", "#cost-table C=1 extend=linear\n1 1 5\n").is_err());
    }

    proptest! {
        #[test]
        fn gcd_matches_euclid(u in 1u64..INPUT_LIMIT, v in 1u64..INPUT_LIMIT) {
            prop_assert_eq!(binary_gcd(u, v).unwrap(), classical_gcd(u, v));
        }

        #[test]
        fn trace_invariants(u in 1u64..(1 << 40), v in 1u64..(1 << 40)) {
            let t = binary_gcd_trace(u, v).unwrap();
            let (s, tt, e) = (t.subtractions() as u64, t.shifts(), t.exchanges() as u64);
            prop_assert!(e <= s && s <= tt);
            if let Some(last) = t.steps().last() {
                prop_assert_eq!(last.branch, Branch::NoExchange);
            }
            let max = t.pair().v() as f64;
            prop_assert!((s as f64) <= 2.0 * max.log2() + 2.0);
            prop_assert!(t.replay().is_ok());
        }

        #[test]
        fn max_strictly_decreases(a in 0u64..(1 << 30), b in 0u64..(1 << 30)) {
            let mut pair = OddPair::sorted(2 * a + 1, 2 * b + 1).unwrap();
            while !pair.is_terminal() {
                let (next, rec) = binary_step(pair).unwrap();
                prop_assert!(next.v() < pair.v());
                prop_assert!(rec.k >= 1);
                pair = next;
            }
        }

        #[test]
        fn fraction_orbit_reproduces_exponents(a in 0u64..(1 << 24), b in 0u64..(1 << 24)) {
            let pair = OddPair::sorted(2 * a + 1, 2 * b + 1).unwrap();
            let t = binary_gcd_trace(pair.u(), pair.v()).unwrap();
            let ks: Vec<u32> = t.steps().iter().map(|s| s.k).collect();
            prop_assert_eq!(fraction_orbit(pair.u(), pair.v()).unwrap(), ks);
        }
    }
}
