//! Graded Gauss quadrature against the split density.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use super::grid::Grid;
use super::SingularDensity;
use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, GaussRule};

const MAX_HALVINGS: usize = 120;
const BELOW_CUTOFF: f64 = 1e-18;
const TOWARD_ONE_CUTOFF: f64 = 1e-16;
// Gauss nodes of narrower panels at 1 round onto the endpoint.
const MIN_WIDTH_AT_ONE: f64 = 2e-14;

/// `∫_a^b f` over the grid panels, with dyadic panels below the first node
/// and a dyadic refinement of the last panel when `b = 1`.
pub fn integrate_graded<F: FnMut(f64) -> f64>(grid: &Grid, a: f64, b: f64, mut f: F) -> f64 {
    let rule = GaussRule::eight();
    let mut acc = CompensatedSum::new();
    let x_min = grid.x_min();

    if a < x_min {
        let mut hi = x_min;
        for _ in 0..MAX_HALVINGS {
            let lo = (hi / 2.0).max(a);
            if lo < hi.min(b) {
                let part = rule.integrate(lo, hi.min(b), &mut f);
                acc.add(part);
                if part.abs() < BELOW_CUTOFF && hi <= b {
                    if a < lo {
                        acc.add(rule.integrate(a, lo, &mut f));
                    }
                    break;
                }
            }
            if lo <= a {
                break;
            }
            hi = lo;
        }
    }

    let start = a.max(x_min);
    if start < b {
        let nodes = grid.nodes();
        let mut pts = vec![start];
        let mut j = grid.locate(start) + 1;
        while j < nodes.len() && nodes[j] < b {
            if nodes[j] > start {
                pts.push(nodes[j]);
            }
            j += 1;
        }
        pts.push(b);
        let last = pts.len() - 2;
        for (i, w) in pts.windows(2).enumerate() {
            if i == last && b == 1.0 {
                let mut lo = w[0];
                while 1.0 - lo > MIN_WIDTH_AT_ONE {
                    let hi = lo + 0.5 * (1.0 - lo);
                    let part = rule.integrate(lo, hi, &mut f);
                    acc.add(part);
                    lo = hi;
                    if part.abs() < TOWARD_ONE_CUTOFF {
                        acc.add(rule.integrate(lo, 1.0, &mut f));
                        lo = 1.0;
                        break;
                    }
                }
                if lo < 1.0 {
                    acc.add((1.0 - lo) * f(lo));
                }
            } else {
                acc.add(rule.integrate(w[0], w[1], &mut f));
            }
        }
    }
    acc.value()
}

/// Piecewise-linear weight given by a table of `(x, w)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedWeight {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TabulatedWeight {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Parse("a weight table needs at least two points".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) || xs[0] < 0.0 || xs[xs.len() - 1] > 1.0 {
            return Err(Error::Parse("weight abscissae must increase within [0, 1]".into()));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::Parse("weight values must be finite".into()));
        }
        Ok(TabulatedWeight { xs, ys })
    }

    /// Two whitespace-separated columns `x w`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)));
            if cols.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected `x w`", no + 1)));
            }
            xs.push(parse(cols[0])?);
            ys.push(parse(cols[1])?);
        }
        Self::new(xs, ys)
    }

    /// Linear interpolation, constant beyond the table ends.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }
}

/// Weights understood by [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    One,
    /// `log x`
    LogX,
    /// `log(1 − x)`
    LogOneMinusX,
    /// `log(2^k (1 + x) / (1 + (2^k − 1) x))`
    BrentKernel(u32),
    Tabulated(TabulatedWeight),
}

impl Weight {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::LogX => x.ln(),
            Weight::LogOneMinusX => (-x).ln_1p(),
            Weight::BrentKernel(k) => brent_kernel(*k, x),
            Weight::Tabulated(t) => t.eval(x),
        }
    }
}

/// `log(2^k (1 + x) / (1 + (2^k − 1) x))`, written to stay accurate for
/// large `k`.
pub fn brent_kernel(k: u32, x: f64) -> f64 {
    let p = 2f64.powi(k as i32);
    (1.0 + x).ln() - (x + (1.0 - x) / p).ln()
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => write!(f, "one"),
            Weight::LogX => write!(f, "log"),
            Weight::LogOneMinusX => write!(f, "log1m"),
            Weight::BrentKernel(k) => write!(f, "brent:{k}"),
            Weight::Tabulated(_) => write!(f, "table"),
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// `one`, `log`, `log1m` or `brent:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "one" => Ok(Weight::One),
            "log" | "logx" => Ok(Weight::LogX),
            "log1m" | "log1mx" => Ok(Weight::LogOneMinusX),
            other => match other.strip_prefix("brent:").map(str::parse::<u32>) {
                Some(Ok(k)) if k >= 1 => Ok(Weight::BrentKernel(k)),
                _ => Err(Error::UnknownWeight(other.to_string())),
            },
        }
    }
}

/// `∫_0^x (−log₂ t) dt`.
fn log_part_one(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 - x.ln()) / LN_2
    }
}

/// `∫_0^x log t · (−log₂ t) dt`.
fn log_part_log(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        let l = x.ln();
        -x * (l * l - 2.0 * l + 2.0) / LN_2
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Domain(format!("integration interval [{a}, {b}] must satisfy 0 <= a < b <= 1")));
    }
    Ok(())
}

/// `∫_a^b weight(x) ξ(x) dx`.
///
/// For the `one` and `log x` weights the `α(−log₂ x)` part is integrated in
/// closed form and only `χ` goes through the quadrature.
pub fn integrate(d: &SingularDensity, weight: &Weight, a: f64, b: f64) -> Result<f64> {
    check_interval(a, b)?;
    let grid = d.grid();
    let alpha = d.alpha();
    Ok(match weight {
        Weight::One => alpha * (log_part_one(b) - log_part_one(a)) + integrate_graded(grid, a, b, |x| d.chi_at(x)),
        Weight::LogX => {
            alpha * (log_part_log(b) - log_part_log(a)) + integrate_graded(grid, a, b, |x| x.ln() * d.chi_at(x))
        }
        Weight::Tabulated(t) => {
            let mut cuts = vec![a];
            cuts.extend(t.xs.iter().copied().filter(|&x| x > a && x < b));
            cuts.push(b);
            let mut acc = CompensatedSum::new();
            for w in cuts.windows(2) {
                acc.add(integrate_graded(grid, w[0], w[1], |x| t.eval(x) * d.xi_unchecked(x)));
            }
            acc.value()
        }
        w => integrate_graded(grid, a, b, |x| w.eval(x) * d.xi_unchecked(x)),
    })
}

/// `∫_a^b f(x) ξ(x) dx` for an arbitrary weight `f`.
pub fn integrate_with<F: Fn(f64) -> f64>(d: &SingularDensity, a: f64, b: f64, f: F) -> Result<f64> {
    check_interval(a, b)?;
    Ok(integrate_graded(d.grid(), a, b, |x| f(x) * d.xi_unchecked(x)))
}

#[cfg(test)]
mod tests {
    use super::super::grid::GridSpec;
    use super::*;

    fn grid() -> Grid {
        Grid::new(&GridSpec { m_geometric: 256, m_uniform: 256, x_min: 2f64.powi(-44) }).unwrap()
    }

    #[test]
    fn graded_rule_handles_endpoint_logs() {
        let g = grid();
        let got = integrate_graded(&g, 0.0, 1.0, |x| x.ln());
        assert!((got + 1.0).abs() < 1e-11, "{got}");
        let got = integrate_graded(&g, 0.0, 1.0, |x| (-x).ln_1p());
        assert!((got + 1.0).abs() < 1e-11, "{got}");
        let got = integrate_graded(&g, 0.0, 1.0, |x| x.ln() * (-x).ln_1p());
        let exact = 2.0 - std::f64::consts::PI.powi(2) / 6.0;
        assert!((got - exact).abs() < 1e-12, "{got}");
        let got = integrate_graded(&g, 0.2, 0.7, |x| x * x);
        assert!((got - (0.343 - 0.008) / 3.0).abs() < 1e-15);
        let got = integrate_graded(&g, 0.0, 1e-14, |_| 1.0);
        assert!((got - 1e-14).abs() < 1e-28);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let g = grid();
        for &(a, b) in &[(0.0, 1.0), (0.0, 0.3), (1e-20, 1e-9), (0.25, 1.0)] {
            let q = integrate_graded(&g, a, b, |x| -x.log2());
            assert!((q - (log_part_one(b) - log_part_one(a))).abs() < 1e-13);
            let q = integrate_graded(&g, a, b, |x| -x.ln() * x.log2());
            assert!((q - (log_part_log(b) - log_part_log(a))).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_parsing() {
        assert_eq!("one".parse::<Weight>().unwrap(), Weight::One);
        assert_eq!("brent:5".parse::<Weight>().unwrap(), Weight::BrentKernel(5));
        assert!(matches!("sin".parse::<Weight>(), Err(Error::UnknownWeight(_))));
        assert!("brent:0".parse::<Weight>().is_err());
    }

    #[test]
    fn brent_kernel_matches_definition() {
        for k in [1u32, 3, 10] {
            for &x in &[0.0, 0.1, 0.5, 1.0] {
                let p = 2f64.powi(k as i32);
                let direct = (p * (1.0 + x) / (1.0 + (p - 1.0) * x)).ln();
                assert!((brent_kernel(k, x) - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tabulated_weight() {
        let t = TabulatedWeight::parse("# x w\n0 0\n0.5 1\n1 0\n").unwrap();
        assert_eq!(t.eval(0.25), 0.5);
        assert_eq!(t.eval(0.75), 0.5);
        assert!(TabulatedWeight::parse("0 1\n0 2\n").is_err());
        assert!(TabulatedWeight::parse("0 1 2\n").is_err());
    }
}
