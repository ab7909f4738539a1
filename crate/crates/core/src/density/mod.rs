//! Fixed points of the transfer operator
//!
//! ```text
//! (𝓛f)(x) = Σ_{k≥1} (1 + 2^k x)^{-2} f(1/(1 + 2^k x)) + (x + 2^k)^{-2} f(x/(x + 2^k))
//! ```
//!
//! Two independent routes are provided: the distribution-function
//! recursion for `F(x) = ∫_0^x ξ`, and direct iteration of `𝓛` on densities
//! kept in the split form `ξ(x) = α·(−log₂ x) + χ(x)` with `χ` bounded.

mod distribution;
mod grid;
mod interp;
mod quad;

use std::f64::consts::LN_2;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use distribution::{
    iterate_distribution, solve_distribution, solve_distribution_capped, DistributionGrid, F_TRUNCATION, F_ZERO_BOUND,
};
pub use grid::{make_grid, Grid, GridSpec, BREAKPOINT};
pub use quad::{brent_kernel, integrate, integrate_graded, integrate_with, TabulatedWeight, Weight};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use interp::lagrange;

/// Iteration cap shared by both solvers.
pub const MAX_ITERATIONS: usize = 500;

/// Truncation of the k-sum in `𝓛` for the `x/(x+2^k)` branch; terms decay
/// like `4^{-k}`.
pub const TRANSFER_TRUNCATION: u32 = 64;

/// `ξ(x) = α·(−log₂ x) + χ(x)` with `χ` given at the grid nodes and
/// interpolated by piecewise cubics. Below the first node `χ` is continued
/// as a constant; accuracy there is limited to that of the log term.
#[derive(Debug, Clone)]
pub struct SingularDensity {
    grid: Arc<Grid>,
    alpha: f64,
    chi: Vec<f64>,
}

impl SingularDensity {
    pub fn new(grid: Arc<Grid>, alpha: f64, chi: Vec<f64>) -> Result<Self> {
        if chi.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} nodes", chi.len(), grid.len())));
        }
        if !alpha.is_finite() || chi.iter().any(|c| !c.is_finite()) {
            return Err(Error::Degenerate("density values must be finite".into()));
        }
        Ok(SingularDensity { grid, alpha, chi })
    }

    /// The split density with `χ = g` at the nodes.
    pub fn from_fn(grid: Arc<Grid>, alpha: f64, g: impl Fn(f64) -> f64) -> Result<Self> {
        let chi = grid.nodes().iter().map(|&x| g(x)).collect();
        Self::new(grid, alpha, chi)
    }

    pub fn uniform(grid: Arc<Grid>) -> Self {
        let chi = vec![1.0; grid.len()];
        SingularDensity { grid, alpha: 0.0, chi }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> Arc<Grid> {
        self.grid.clone()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `ξ(1) = χ(1)`; the log term vanishes there.
    pub fn xi_at_one(&self) -> f64 {
        self.chi[self.chi.len() - 1]
    }

    #[inline]
    pub(crate) fn chi_at(&self, x: f64) -> f64 {
        if x <= self.grid.x_min() {
            self.chi[0]
        } else if x >= 1.0 {
            self.xi_at_one()
        } else {
            lagrange(&self.grid, &self.chi, self.grid.locate(x), x)
        }
    }

    #[inline]
    pub(crate) fn xi_unchecked(&self, x: f64) -> f64 {
        self.alpha * -x.log2() + self.chi_at(x)
    }

    pub fn xi(&self, x: f64) -> Result<f64> {
        xi_eval(self, x)
    }

    /// `ξ` at every grid node.
    pub fn node_values(&self) -> Vec<f64> {
        self.grid.nodes().iter().zip(&self.chi).map(|(&x, &c)| self.alpha * -x.log2() + c).collect()
    }

    /// `∫_0^1 ξ = α/ln 2 + ∫_0^1 χ`.
    pub fn integral(&self) -> f64 {
        self.alpha / LN_2 + integrate_graded(&self.grid, 0.0, 1.0, |x| self.chi_at(x))
    }

    pub fn scaled(&self, factor: f64) -> SingularDensity {
        SingularDensity {
            grid: self.grid.clone(),
            alpha: self.alpha * factor,
            chi: self.chi.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<SingularDensity> {
        let total = self.integral();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Degenerate(format!("density integral is {total}")));
        }
        Ok(self.scaled(1.0 / total))
    }
}

/// `ξ(x)` for `0 < x <= 1`.
pub fn xi_eval(d: &SingularDensity, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("density is evaluated on (0, 1], got {x}")));
    }
    Ok(d.xi_unchecked(x))
}

/// `(𝓛ξ)(x)` by direct summation over both branch families.
///
/// The `1/(1+2^k x)` branch keeps contributing until `2^k x` is large, so
/// it runs to `k = 64 + ⌈log₂(1/x)⌉`; the other branch stops at `k = 64`.
/// The log term is evaluated analytically at every image point.
pub fn transfer_at(d: &SingularDensity, x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    let kg = TRANSFER_TRUNCATION + (-x.log2()).ceil().max(0.0) as u32;
    let mut p = 1.0;
    for k in 1..=kg {
        p *= 2.0;
        let t = p * x;
        let y = 1.0 / (1.0 + t);
        let log_part = t.ln_1p() / LN_2;
        acc.add(y * y * (d.alpha * log_part + d.chi_at(y)));
        if k <= TRANSFER_TRUNCATION {
            let den = x + p;
            let log_part = (p / x).ln_1p() / LN_2;
            acc.add((d.alpha * log_part + d.chi_at(x / den)) / (den * den));
        }
    }
    acc.value()
}

/// `𝓛ξ` in split form.
///
/// The new log coefficient is `α' = ξ(1) + α/3`: the `1/(1+2^k x)` branch
/// produces `ξ(1)·(−log₂ x)` near zero and the other branch maps the
/// coefficient `α` to `α Σ 4^{-k} = α/3`. The bounded part is what remains
/// of the pointwise sum.
pub fn apply_transfer(d: &SingularDensity) -> Result<SingularDensity> {
    let alpha = d.xi_at_one() + d.alpha / 3.0;
    let chi = d.grid.nodes().iter().map(|&x| transfer_at(d, x) - alpha * -x.log2()).collect();
    SingularDensity::new(d.grid.clone(), alpha, chi)
}

/// Successive sup-norm differences of an iteration and the contraction
/// ratio measured from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub deltas: Vec<f64>,
    /// Geometric mean of the ratios between the last five deltas.
    pub theta_hat: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl ConvergenceRecord {
    pub fn from_deltas(deltas: Vec<f64>) -> Self {
        let n = deltas.len();
        let window = n.min(5);
        let theta_hat =
            if window >= 2 { (deltas[n - 1] / deltas[n - window]).powf(1.0 / (window - 1) as f64) } else { f64::NAN };
        ConvergenceRecord { iterations: n, residual: deltas.last().copied().unwrap_or(f64::NAN), theta_hat, deltas }
    }

    /// Largest ratio `delta_{m+1}/delta_m` for `m >= burn_in`.
    pub fn max_ratio_after(&self, burn_in: usize) -> f64 {
        self.deltas.windows(2).skip(burn_in).map(|w| w[1] / w[0]).fold(f64::NAN, f64::max)
    }
}

/// Iterates `𝓛` from the uniform density, renormalizing each step, until
/// `sup |Δχ| + |Δα| < tol`.
pub fn solve_xi(spec: &GridSpec, tol: f64) -> Result<(SingularDensity, ConvergenceRecord)> {
    solve_xi_capped(spec, tol, MAX_ITERATIONS)
}

/// [`solve_xi`] with a custom iteration cap.
pub fn solve_xi_capped(
    spec: &GridSpec,
    tol: f64,
    max_iterations: usize,
) -> Result<(SingularDensity, ConvergenceRecord)> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!("tolerance {tol:e} is below 1e-12")));
    }
    let grid = Arc::new(Grid::new(spec)?);
    let mut d = SingularDensity::uniform(grid);
    let mut deltas = Vec::new();
    for _ in 0..max_iterations {
        let next = apply_transfer(&d)?.normalized()?;
        let dchi = next.chi.iter().zip(&d.chi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let delta = dchi + (next.alpha - d.alpha).abs();
        deltas.push(delta);
        d = next;
        if delta < tol {
            return Ok((d, ConvergenceRecord::from_deltas(deltas)));
        }
    }
    Err(Error::NonConvergence { iterations: max_iterations, last_delta: deltas.last().copied().unwrap_or(f64::NAN) })
}

/// JSON summary of a density solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub alpha: f64,
    pub xi_at_one: f64,
    pub theta_hat: f64,
    pub iterations: usize,
    pub grid_spec: GridSpec,
}

impl DensitySummary {
    pub fn new(d: &SingularDensity, record: &ConvergenceRecord) -> Self {
        DensitySummary {
            alpha: d.alpha,
            xi_at_one: d.xi_at_one(),
            theta_hat: record.theta_hat,
            iterations: record.iterations,
            grid_spec: *d.grid.spec(),
        }
    }
}

/// Writes `x,F,xi` at every node under a `#brentlab-v1` header line.
pub fn write_grid_csv<W: Write>(out: W, f: &DistributionGrid, d: &SingularDensity) -> Result<()> {
    if f.grid().nodes() != d.grid().nodes() {
        return Err(Error::Grid("distribution and density live on different grids".into()));
    }
    let mut out = out;
    writeln!(out, "#brentlab-v1 density")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "F", "xi"])?;
    for ((x, fv), xi) in d.grid().nodes().iter().zip(f.values()).zip(d.node_values()) {
        w.write_record([format!("{x:e}"), format!("{fv:.17e}"), format!("{xi:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Arc<Grid> {
        Arc::new(Grid::new(&GridSpec { m_geometric: 256, m_uniform: 256, x_min: 2f64.powi(-44) }).unwrap())
    }

    #[test]
    fn uniform_density_update() {
        let d = SingularDensity::uniform(small());
        assert!((d.integral() - 1.0).abs() < 1e-14, "{}", d.integral());
        let l = apply_transfer(&d).unwrap();
        assert_eq!(l.alpha(), 1.0);
        assert!((l.integral() - 1.0).abs() < 1e-9, "{}", l.integral());
    }

    #[test]
    fn fixed_point_coefficient_is_stationary() {
        let xi1: f64 = 0.4;
        let alpha = 1.5 * xi1;
        assert!((xi1 + alpha / 3.0 - alpha).abs() < 1e-15);
    }

    #[test]
    fn eval_domain() {
        let d = SingularDensity::uniform(small());
        assert!(xi_eval(&d, 0.0).is_err());
        assert!(xi_eval(&d, 1.5).is_err());
        assert_eq!(xi_eval(&d, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn convergence_record_ratio() {
        let r = ConvergenceRecord::from_deltas(vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]);
        assert!((r.theta_hat - 0.5).abs() < 1e-15);
        assert_eq!(r.iterations, 6);
        assert!((r.max_ratio_after(1) - 0.5).abs() < 1e-15);
    }
}
