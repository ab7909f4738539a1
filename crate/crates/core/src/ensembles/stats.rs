//! Cost statistics over ensembles: exhaustive band-parallel sweeps, sampled
//! estimates for very large bounds, and slope fits of the mean cost
//! against `ln n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EnsembleId;
use crate::error::{Error, Result};
use crate::gcd::{CostFunction, CostTable, OddPair};
use crate::numeric::{least_squares, CompensatedSum, LineFit};

/// Most cost functions a single sweep can price at once.
pub const MAX_SWEEP_COSTS: usize = 8;

/// Fixed band count; results do not depend on the thread count.
const BANDS: usize = 64;

/// Count, `Σ C` and `Σ C²` of one cost over one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub ensemble: EnsembleId,
    pub n: u64,
    pub count: u64,
    sum_cost: CompensatedSum,
    sum_cost_sq: CompensatedSum,
    pub cost_id: String,
}

impl EnsembleStats {
    pub fn new(ensemble: EnsembleId, n: u64, cost_id: impl Into<String>) -> Self {
        EnsembleStats {
            ensemble,
            n,
            count: 0,
            sum_cost: CompensatedSum::new(),
            sum_cost_sq: CompensatedSum::new(),
            cost_id: cost_id.into(),
        }
    }

    pub fn push(&mut self, cost: f64) {
        self.count += 1;
        self.sum_cost.add(cost);
        self.sum_cost_sq.add(cost * cost);
    }

    pub fn sum_cost(&self) -> f64 {
        self.sum_cost.value()
    }

    pub fn sum_cost_sq(&self) -> f64 {
        self.sum_cost_sq.value()
    }

    pub fn mean(&self) -> f64 {
        self.sum_cost() / self.count as f64
    }

    /// Mean divided by `ln n`.
    pub fn mean_over_log(&self) -> f64 {
        self.mean() / (self.n as f64).ln()
    }

    /// Mean of `C²`.
    pub fn second_moment(&self) -> f64 {
        self.sum_cost_sq() / self.count as f64
    }

    /// Combines statistics gathered over disjoint sets of pairs.
    pub fn merge(&mut self, other: &EnsembleStats) -> Result<()> {
        if self.ensemble != other.ensemble || self.cost_id != other.cost_id {
            return Err(Error::Domain(format!(
                "cannot merge statistics of ({}, {}) with ({}, {})",
                self.ensemble, self.cost_id, other.ensemble, other.cost_id
            )));
        }
        self.n = self.n.max(other.n);
        self.count += other.count;
        self.sum_cost.merge(&other.sum_cost);
        self.sum_cost_sq.merge(&other.sum_cost_sq);
        Ok(())
    }

    pub fn row(&self) -> StatsRow {
        StatsRow {
            ensemble: self.ensemble.index(),
            n: self.n,
            count: self.count,
            ratio: self.count as f64 / (self.n as f64 * self.n as f64),
            cost: self.cost_id.clone(),
            mean: self.mean(),
            mean_over_logn: self.mean_over_log(),
            second_moment: self.second_moment(),
        }
    }
}

/// CSV row: `ensemble,n,count,ratio,cost,mean,mean_over_logn,second_moment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub ensemble: u8,
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
    pub cost: String,
    pub mean: f64,
    pub mean_over_logn: f64,
    pub second_moment: f64,
}

/// Statistics for every `(n, ensemble, cost)` of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub ladder: Vec<u64>,
    pub ensembles: Vec<EnsembleId>,
    pub cost_ids: Vec<String>,
    stats: Vec<EnsembleStats>,
}

impl SweepResult {
    fn slot(&self, n_idx: usize, e_idx: usize, c_idx: usize) -> usize {
        (n_idx * self.ensembles.len() + e_idx) * self.cost_ids.len() + c_idx
    }

    pub fn get(&self, n_idx: usize, e_idx: usize, c_idx: usize) -> &EnsembleStats {
        &self.stats[self.slot(n_idx, e_idx, c_idx)]
    }

    pub fn stats(&self) -> &[EnsembleStats] {
        &self.stats
    }

    pub fn rows(&self) -> Vec<StatsRow> {
        self.stats.iter().map(EnsembleStats::row).collect()
    }

    /// Least-squares fit of mean cost against `ln n` over the ladder.
    pub fn slope(&self, e_idx: usize, c_idx: usize) -> Result<LineFit> {
        let xs: Vec<f64> = self.ladder.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = (0..self.ladder.len()).map(|i| self.get(i, e_idx, c_idx).mean()).collect();
        least_squares(&xs, &ys)
    }
}

#[derive(Clone)]
struct BandAcc {
    // [segment][ensemble][cost]
    count: Vec<u64>,
    sum: Vec<CompensatedSum>,
    sum_sq: Vec<CompensatedSum>,
}

fn validate_ladder(ladder: &[u64], min_points: usize) -> Result<()> {
    if ladder.len() < min_points {
        return Err(Error::Degenerate(format!("need at least {min_points} ladder points")));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Degenerate("ladder must be strictly increasing".into()));
    }
    if ladder[0] < 3 {
        return Err(Error::Domain("ensemble bounds must be at least 3".into()));
    }
    Ok(())
}

fn band_edges(first: u64, last: u64) -> Vec<u64> {
    // Work per denominator grows linearly, so equal-work bands split v² evenly.
    let mut edges = vec![first];
    for b in 1..BANDS {
        let x = (last as f64 * (b as f64 / BANDS as f64).sqrt()) as u64;
        if x > *edges.last().unwrap() && x < last + 1 {
            edges.push(x);
        }
    }
    edges.push(last + 1);
    edges
}

fn run_band(
    lo: u64,
    hi: u64,
    ladder: &[u64],
    ensembles: &[EnsembleId],
    tables: &[CostTable],
    odd_only: bool,
) -> BandAcc {
    let ne = ensembles.len();
    let nc = tables.len();
    let width = ne * nc;
    let mut acc = BandAcc {
        count: vec![0; ladder.len() * ne],
        sum: vec![CompensatedSum::new(); ladder.len() * width],
        sum_sq: vec![CompensatedSum::new(); ladder.len() * width],
    };
    let mut seg = ladder.partition_point(|&n| n < lo);
    let mut count = vec![0u64; ne];
    let mut sum = vec![0.0f64; width];
    let mut sum_sq = vec![0.0f64; width];
    let mut costs = [0.0f64; MAX_SWEEP_COSTS];

    let step = if odd_only { 2 } else { 1 };
    let mut v = if odd_only && lo % 2 == 0 { lo + 1 } else { lo };
    while v < hi {
        while seg < ladder.len() && ladder[seg] < v {
            seg += 1;
        }
        if seg == ladder.len() {
            break;
        }
        count.iter_mut().for_each(|c| *c = 0);
        sum.iter_mut().for_each(|c| *c = 0.0);
        sum_sq.iter_mut().for_each(|c| *c = 0.0);

        let tz_v = v.trailing_zeros();
        let odd_v = v >> tz_v;
        let mut u = 1;
        while u < v {
            let tz_u = u.trailing_zeros();
            let odd_u = u >> tz_u;
            let (a, b) = if odd_u <= odd_v { (odd_u, odd_v) } else { (odd_v, odd_u) };
            let pair = OddPair::new(a, b).expect("odd parts");
            costs[..nc].iter_mut().for_each(|c| *c = 0.0);
            let g = crate::gcd::for_each_step(pair, |br, k| {
                for (c, t) in costs.iter_mut().zip(tables) {
                    *c += t.get(br, k);
                }
            });
            let both_odd = tz_u == 0 && tz_v == 0;
            let is_coprime = g == 1 && tz_u.min(tz_v) == 0;
            for (e, id) in ensembles.iter().enumerate() {
                if id.admits(both_odd, is_coprime) {
                    count[e] += 1;
                    for (c, &cost) in costs[..nc].iter().enumerate() {
                        sum[e * nc + c] += cost;
                        sum_sq[e * nc + c] += cost * cost;
                    }
                }
            }
            u += step;
        }

        for e in 0..ne {
            acc.count[seg * ne + e] += count[e];
        }
        for j in 0..width {
            acc.sum[seg * width + j].add(sum[j]);
            acc.sum_sq[seg * width + j].add(sum_sq[j]);
        }
        v += step;
    }
    acc
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Exhaustive statistics for each ensemble and cost at every ladder bound,
/// from a single pass over all pairs `u < v <= max(ladder)`.
///
/// Denominators are split into fixed contiguous bands processed in
/// parallel (`threads = 0` uses the global pool) and merged in band order,
/// so results are identical for every thread count.
pub fn sweep(ensembles: &[EnsembleId], costs: &[CostFunction], ladder: &[u64], threads: usize) -> Result<SweepResult> {
    validate_ladder(ladder, 1)?;
    if ensembles.is_empty() || costs.is_empty() {
        return Err(Error::Degenerate("sweep needs at least one ensemble and one cost".into()));
    }
    if costs.len() > MAX_SWEEP_COSTS {
        return Err(Error::Domain(format!("at most {MAX_SWEEP_COSTS} costs per sweep")));
    }
    let tables = costs.iter().map(CostFunction::table).collect::<Result<Vec<_>>>()?;
    let odd_only = ensembles.iter().all(|e| e.requires_odd());
    let n_max = *ladder.last().unwrap();
    let edges = band_edges(2, n_max);

    let bands: Vec<BandAcc> = with_threads(threads, || {
        edges.par_windows(2).map(|w| run_band(w[0], w[1], ladder, ensembles, &tables, odd_only)).collect()
    })?;

    let ne = ensembles.len();
    let nc = costs.len();
    let cost_ids: Vec<String> = costs.iter().map(|c| c.name().to_string()).collect();
    let mut stats = Vec::with_capacity(ladder.len() * ne * nc);
    let mut running: Vec<EnsembleStats> =
        ensembles.iter().flat_map(|&e| cost_ids.iter().map(move |c| EnsembleStats::new(e, 0, c.clone()))).collect();
    for (seg, &n) in ladder.iter().enumerate() {
        for band in &bands {
            for e in 0..ne {
                for c in 0..nc {
                    let j = e * nc + c;
                    let cnt = if c == 0 { band.count[seg * ne + e] } else { 0 };
                    let s = &mut running[j];
                    s.count += cnt;
                    s.sum_cost.merge(&band.sum[seg * ne * nc + j]);
                    s.sum_cost_sq.merge(&band.sum_sq[seg * ne * nc + j]);
                }
            }
        }
        for e in 0..ne {
            let total = running[e * nc].count;
            for c in 0..nc {
                let s = &mut running[e * nc + c];
                s.count = total;
                s.n = n;
                stats.push(s.clone());
            }
        }
    }
    Ok(SweepResult { ladder: ladder.to_vec(), ensembles: ensembles.to_vec(), cost_ids, stats })
}

/// Exact mean-cost statistics over `Ξ^(i)_n`.
pub fn mean_cost(id: EnsembleId, n: u64, cost: &CostFunction) -> Result<EnsembleStats> {
    if n < 3 {
        return Err(Error::Domain("mean cost needs n >= 3".into()));
    }
    let result = sweep(&[id], std::slice::from_ref(cost), &[n], 0)?;
    Ok(result.get(0, 0, 0).clone())
}

/// Sampled statistics with the standard error of the mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledStats {
    pub stats: EnsembleStats,
    pub std_error: f64,
    pub seed: u64,
}

/// Estimates the mean cost over `Ξ^(i)_n` from `samples` pairs drawn
/// uniformly from the ensemble with a seeded generator.
pub fn mean_cost_sampled(id: EnsembleId, n: u64, cost: &CostFunction, samples: u64, seed: u64) -> Result<SampledStats> {
    if n < 3 {
        return Err(Error::Domain("mean cost needs n >= 3".into()));
    }
    if samples < 2 {
        return Err(Error::Degenerate("need at least two samples".into()));
    }
    if n >= crate::gcd::INPUT_LIMIT {
        return Err(Error::TooLarge(n));
    }
    let table = cost.table()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = EnsembleStats::new(id, n, cost.name());
    let odd = id.requires_odd();
    let odd_count = n.div_ceil(2);
    while stats.count < samples {
        let (a, b) = if odd {
            (2 * rng.gen_range(0..odd_count) + 1, 2 * rng.gen_range(0..odd_count) + 1)
        } else {
            (rng.gen_range(1..=n), rng.gen_range(1..=n))
        };
        if a == b {
            continue;
        }
        let (u, v) = (a.min(b), a.max(b));
        let reduced = crate::gcd::reduce_to_odd(u, v)?;
        let (c, g) = table.run(reduced.pair);
        if id.requires_coprime() && (g != 1 || reduced.shared_exponent != 0) {
            continue;
        }
        stats.push(c);
    }
    let mean = stats.mean();
    let var = (stats.second_moment() - mean * mean).max(0.0) * stats.count as f64 / (stats.count - 1) as f64;
    Ok(SampledStats { std_error: (var / stats.count as f64).sqrt(), stats, seed })
}

/// Slope estimate of the mean cost per `ln n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    pub ensemble: EnsembleId,
    pub cost_id: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: Vec<EnsembleStats>,
}

/// Fits the exhaustive mean cost against `ln n` over an increasing ladder
/// of at least three bounds.
pub fn slope_fit(id: EnsembleId, cost: &CostFunction, ladder: &[u64]) -> Result<SlopeFit> {
    validate_ladder(ladder, 3)?;
    let result = sweep(&[id], std::slice::from_ref(cost), ladder, 0)?;
    let fit = result.slope(0, 0)?;
    Ok(SlopeFit {
        ensemble: id,
        cost_id: cost.name().to_string(),
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        points: result.stats,
    })
}

/// `2^lo, 2^(lo+1), …, 2^hi`.
pub fn geometric_ladder(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::enumerate_pairs;
    use crate::gcd::binary_gcd_trace;

    fn brute(id: EnsembleId, n: u64, cost: &CostFunction) -> (u64, f64, f64) {
        let mut count = 0;
        let (mut s, mut s2) = (0.0, 0.0);
        for (u, v) in enumerate_pairs(id, n) {
            let c = binary_gcd_trace(u, v).unwrap().cost(cost).unwrap();
            count += 1;
            s += c;
            s2 += c * c;
        }
        (count, s, s2)
    }

    #[test]
    fn mean_cost_examples() {
        let s = mean_cost(EnsembleId::Odd, 5, &CostFunction::steps()).unwrap();
        assert_eq!(s.count, 3);
        assert!((s.mean() - 4.0 / 3.0).abs() < 1e-15);
        let e = mean_cost(EnsembleId::Odd, 5, &CostFunction::exchanges()).unwrap();
        assert!((e.mean() - 1.0 / 3.0).abs() < 1e-15);
        let t = mean_cost(EnsembleId::Odd, 5, &CostFunction::shifts()).unwrap();
        assert!((t.mean() - 5.0 / 3.0).abs() < 1e-15);
        assert!(mean_cost(EnsembleId::Odd, 2, &CostFunction::steps()).is_err());
    }

    #[test]
    fn sweep_matches_brute_force() {
        let costs = [CostFunction::steps(), CostFunction::shifts(), CostFunction::exchanges()];
        let ladder = [17, 40, 97];
        let result = sweep(&EnsembleId::ALL, &costs, &ladder, 0).unwrap();
        for (i, &n) in ladder.iter().enumerate() {
            for (e, &id) in EnsembleId::ALL.iter().enumerate() {
                for (c, cost) in costs.iter().enumerate() {
                    let got = result.get(i, e, c);
                    let (count, s, s2) = brute(id, n, cost);
                    assert_eq!(got.count, count, "{id} n={n}");
                    assert_eq!(got.sum_cost(), s);
                    assert_eq!(got.sum_cost_sq(), s2);
                    assert_eq!(got.n, n);
                }
            }
        }
    }

    #[test]
    fn sweep_is_independent_of_thread_count() {
        let costs = [CostFunction::steps(), CostFunction::exchanges()];
        let a = sweep(&[EnsembleId::Coprime], &costs, &[100, 300], 1).unwrap();
        let b = sweep(&[EnsembleId::Coprime], &costs, &[100, 300], 3).unwrap();
        assert_eq!(a.rows(), b.rows());
    }

    #[test]
    fn merge_over_bands_matches_whole_run() {
        let cost = CostFunction::shifts();
        let whole = mean_cost(EnsembleId::All, 120, &cost).unwrap();
        let mut parts: Vec<EnsembleStats> = Vec::new();
        for (lo, hi) in [(2u64, 50u64), (51, 90), (91, 120)] {
            let mut s = EnsembleStats::new(EnsembleId::All, hi, cost.name());
            for (u, v) in enumerate_pairs(EnsembleId::All, hi).filter(|&(_, v)| v >= lo) {
                s.push(binary_gcd_trace(u, v).unwrap().cost(&cost).unwrap());
            }
            parts.push(s);
        }
        let mut forward = parts[0].clone();
        forward.merge(&parts[1]).unwrap();
        forward.merge(&parts[2]).unwrap();
        let mut backward = parts[2].clone();
        backward.merge(&parts[1]).unwrap();
        backward.merge(&parts[0]).unwrap();
        for m in [&forward, &backward] {
            assert_eq!(m.count, whole.count);
            assert_eq!(m.sum_cost(), whole.sum_cost());
            assert_eq!(m.sum_cost_sq(), whole.sum_cost_sq());
            assert_eq!(m.n, 120);
        }
        let other = EnsembleStats::new(EnsembleId::Odd, 10, cost.name());
        assert!(forward.merge(&other).is_err());
    }

    #[test]
    fn mean_cost_is_linear_in_the_cost() {
        let (s, e) = (CostFunction::steps(), CostFunction::exchanges());
        let combo = CostFunction::linear_combination(0.25, &s, 3.5, &e).unwrap();
        let result = sweep(&[EnsembleId::Odd, EnsembleId::All], &[s, e, combo], &[150], 0).unwrap();
        for ei in 0..2 {
            let (a, b, c) = (result.get(0, ei, 0), result.get(0, ei, 1), result.get(0, ei, 2));
            let expect = 0.25 * a.sum_cost() + 3.5 * b.sum_cost();
            assert!((c.sum_cost() - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn slope_fit_rejects_degenerate_ladders() {
        let c = CostFunction::steps();
        assert!(slope_fit(EnsembleId::Odd, &c, &[64, 64, 64]).is_err());
        assert!(slope_fit(EnsembleId::Odd, &c, &[64, 128]).is_err());
        assert!(slope_fit(EnsembleId::Odd, &c, &[128, 64, 256]).is_err());
        let fit = slope_fit(EnsembleId::Odd, &c, &geometric_ladder(6, 9)).unwrap();
        assert_eq!(fit.points.len(), 4);
        assert!(fit.slope > 0.5 && fit.slope < 1.5);
    }

    #[test]
    fn sampled_mean_is_reproducible_and_close() {
        let c = CostFunction::steps();
        let a = mean_cost_sampled(EnsembleId::OddCoprime, 2000, &c, 20_000, 7).unwrap();
        let b = mean_cost_sampled(EnsembleId::OddCoprime, 2000, &c, 20_000, 7).unwrap();
        assert_eq!(a.stats.sum_cost(), b.stats.sum_cost());
        let exact = mean_cost(EnsembleId::OddCoprime, 2000, &c).unwrap();
        assert!((a.stats.mean() - exact.mean()).abs() < 5.0 * a.std_error);
        assert!(a.std_error > 0.0);
    }
}
