//! Distribution-function recursion for the limiting law of the odd
//! fractions.

use std::sync::Arc;

use super::grid::{Grid, GridSpec};
use super::interp::{hermite, monotone_slopes};
use super::{ConvergenceRecord, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Base truncation of the k-sum: `2^(1-K) <= 1e-15`.
pub const F_TRUNCATION: u32 = 51;

/// Stored growth bound: `F(x_min) <= C x_min |log₂ x_min|`.
pub const F_ZERO_BOUND: f64 = 2.0;

/// Grid values of a distribution function with a monotone cubic
/// interpolant. Below the first node `F` is continued linearly to `F(0) = 0`.
#[derive(Debug, Clone)]
pub struct DistributionGrid {
    grid: Arc<Grid>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    bound: f64,
}

impl DistributionGrid {
    pub fn identity(grid: Arc<Grid>) -> Self {
        let values = grid.nodes().to_vec();
        Self::build(grid, values)
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        let f = Self::build(grid, values);
        f.check_invariants()?;
        Ok(f)
    }

    fn build(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        let slopes = monotone_slopes(grid.nodes(), &values);
        DistributionGrid { grid, values, slopes, bound: F_ZERO_BOUND }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `0 <= F <= 1`, non-decreasing, `F(1) = 1` and the growth bound at the
    /// first node.
    pub fn check_invariants(&self) -> Result<()> {
        let v = &self.values;
        if v.iter().any(|&y| !(0.0..=1.0).contains(&y)) {
            return Err(Error::Degenerate("distribution values leave [0, 1]".into()));
        }
        if let Some(j) = v.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Degenerate(format!("distribution decreases after node {j}")));
        }
        if (v[v.len() - 1] - 1.0).abs() > 1e-14 {
            return Err(Error::Degenerate(format!("F(1) = {} instead of 1", v[v.len() - 1])));
        }
        let x0 = self.grid.x_min();
        if v[0] > self.bound * x0 * x0.log2().abs() {
            return Err(Error::Degenerate(format!("F(x_min) = {:e} exceeds the growth bound", v[0])));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let x0 = self.grid.x_min();
        if x <= 0.0 {
            0.0
        } else if x < x0 {
            self.values[0] * (x / x0)
        } else if x >= 1.0 {
            self.values[self.values.len() - 1]
        } else {
            hermite(&self.grid, &self.values, &self.slopes, self.grid.locate(x), x)
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange { x, lo: 0.0, hi: 1.0 });
        }
        Ok(self.eval_unchecked(x))
    }

    /// `F'(x)` from backward differences of the interpolant, refined by
    /// Richardson extrapolation over the steps `h, h/2, h/4, h/8`.
    pub fn derivative(&self, x: f64, h: f64) -> Result<f64> {
        if !(x - h > 0.0 && x <= 1.0) {
            return Err(Error::OutOfRange { x, lo: h, hi: 1.0 });
        }
        let mut table: Vec<f64> = (0..4)
            .map(|i| {
                let hi = h / f64::from(1u32 << i);
                (self.eval_unchecked(x) - self.eval_unchecked(x - hi)) / hi
            })
            .collect();
        for level in 1..4 {
            let factor = f64::from(1u32 << level);
            for i in (level..4).rev() {
                table[i] = (factor * table[i] - table[i - 1]) / (factor - 1.0);
            }
        }
        Ok(table[3])
    }
}

/// One step of the recursion
/// `F'(x) = 1 + Σ_k 2^{-k} (F(x/(x+2^k)) − F(1/(1+2^k x)))`.
///
/// The sum is evaluated as `Σ_k 2^{-k} (F(x/(x+2^k)) + 1 − F(1/(1+2^k x)))`
/// plus the tail `2^{-K}`, which keeps every term non-negative and avoids
/// the cancellation near `x = 0`. Terms run to
/// `K(x) = 51 + ⌈log₂(1/x)⌉` so the neglected part stays below `1e-15·x`.
pub fn iterate_distribution(f: &DistributionGrid) -> Result<DistributionGrid> {
    let values: Vec<f64> = f.grid.nodes().iter().map(|&x| recursion_at(f, x)).collect();
    Ok(DistributionGrid::build(f.grid.clone(), values))
}

fn recursion_at(f: &DistributionGrid, x: f64) -> f64 {
    let kmax = F_TRUNCATION + (-x.log2()).ceil().max(0.0) as u32;
    let mut acc = CompensatedSum::new();
    let mut p = 1.0;
    let mut w = 1.0;
    for _ in 1..=kmax {
        p *= 2.0;
        w *= 0.5;
        let d = f.eval_unchecked(x / (x + p));
        let g = 1.0 - f.eval_unchecked(1.0 / (1.0 + p * x));
        acc.add(w * (d + g));
    }
    acc.add(w);
    acc.value().min(1.0)
}

/// Iterates from `F₀(x) = x` until successive grid values differ by less
/// than `tol` in the sup norm.
pub fn solve_distribution(spec: &GridSpec, tol: f64) -> Result<(DistributionGrid, ConvergenceRecord)> {
    solve_distribution_capped(spec, tol, MAX_ITERATIONS)
}

/// [`solve_distribution`] with a custom iteration cap.
pub fn solve_distribution_capped(
    spec: &GridSpec,
    tol: f64,
    max_iterations: usize,
) -> Result<(DistributionGrid, ConvergenceRecord)> {
    if !(tol >= 1e-13) {
        return Err(Error::Domain(format!("tolerance {tol:e} is below 1e-13")));
    }
    let grid = Arc::new(Grid::new(spec)?);
    let mut f = DistributionGrid::identity(grid);
    let mut deltas = Vec::new();
    for _ in 0..max_iterations {
        let next = iterate_distribution(&f)?;
        let delta = next.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        deltas.push(delta);
        f = next;
        if delta < tol {
            return Ok((f, ConvergenceRecord::from_deltas(deltas)));
        }
    }
    Err(Error::NonConvergence { iterations: max_iterations, last_delta: deltas.last().copied().unwrap_or(f64::NAN) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Arc<Grid> {
        Arc::new(Grid::new(&GridSpec { m_geometric: 512, m_uniform: 512, x_min: 2f64.powi(-44) }).unwrap())
    }

    #[test]
    fn first_iterate_from_identity() {
        let f0 = DistributionGrid::identity(small());
        let f1 = iterate_distribution(&f0).unwrap();
        assert!((f1.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        // 1 + Σ 2^{-k} (1/(1+2^{k+1}) − 1/(1+2^{k-1})) summed to k = 200
        let half = 0.7699169961440003;
        assert!((half - 0.76989f64).abs() < 5e-5);
        assert!((f1.eval(0.5).unwrap() - half).abs() < 1e-9, "{}", f1.eval(0.5).unwrap());
        assert!(f1.values()[0] < 1e-11);
    }

    #[test]
    fn derivative_of_smooth_function() {
        let g = small();
        let values: Vec<f64> = g.nodes().iter().map(|&x| x * x * (3.0 - 2.0 * x)).collect();
        let f = DistributionGrid::from_values(g, values).unwrap();
        for &x in &[0.25, 0.5, 0.75, 1.0] {
            let d = f.derivative(x, 1.0 / 64.0).unwrap();
            assert!((d - 6.0 * x * (1.0 - x)).abs() < 1e-6, "{x}: {d}");
        }
    }

    #[test]
    fn rejects_invalid_values() {
        let g = small();
        let mut v = g.nodes().to_vec();
        v[10] = 0.9;
        assert!(DistributionGrid::from_values(g.clone(), v).is_err());
        assert!(DistributionGrid::from_values(g, vec![0.0; 3]).is_err());
        assert!(solve_distribution(&GridSpec::default(), 1e-14).is_err());
    }
}
