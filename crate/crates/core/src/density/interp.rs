//! Piecewise cubic rules on a [`Grid`].

use super::grid::Grid;

/// Four-point Lagrange cubic through the nodes around panel `j`.
#[inline]
pub(crate) fn lagrange(grid: &Grid, values: &[f64], j: usize, x: f64) -> f64 {
    let nodes = grid.nodes();
    let s = j.saturating_sub(1).min(nodes.len() - 4);
    let t = &nodes[s..s + 4];
    let f = &values[s..s + 4];
    let d = [x - t[0], x - t[1], x - t[2], x - t[3]];
    let mut acc = 0.0;
    for i in 0..4 {
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 0..4 {
            if m != i {
                num *= d[m];
                den *= t[i] - t[m];
            }
        }
        acc += f[i] * num / den;
    }
    acc
}

/// Node slopes of the shape-preserving Hermite cubic (three-point
/// derivative estimates, Fritsch–Carlson limiting).
pub(crate) fn monotone_slopes(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = values.windows(2).zip(&h).map(|(w, h)| (w[1] - w[0]) / h).collect();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        if delta[j - 1] * delta[j] > 0.0 {
            d[j] = (h[j] * delta[j - 1] + h[j - 1] * delta[j]) / (h[j - 1] + h[j]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 < 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    for j in 0..n - 1 {
        if delta[j] == 0.0 {
            d[j] = 0.0;
            d[j + 1] = 0.0;
            continue;
        }
        let a = d[j] / delta[j];
        let b = d[j + 1] / delta[j];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d[j] = tau * a * delta[j];
            d[j + 1] = tau * b * delta[j];
        }
    }
    d
}

#[inline]
pub(crate) fn hermite(grid: &Grid, values: &[f64], slopes: &[f64], j: usize, x: f64) -> f64 {
    let nodes = grid.nodes();
    let h = nodes[j + 1] - nodes[j];
    let t = (x - nodes[j]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * values[j] + h * h10 * slopes[j] + h01 * values[j + 1] + h * h11 * slopes[j + 1]
}

#[cfg(test)]
mod tests {
    use super::super::grid::GridSpec;
    use super::*;

    fn grid() -> Grid {
        Grid::new(&GridSpec { m_geometric: 200, m_uniform: 200, x_min: 2f64.powi(-40) }).unwrap()
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let g = grid();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let values: Vec<f64> = g.nodes().iter().map(|&x| p(x)).collect();
        for &x in &[1e-11, 0.003, 0.0625, 0.3, 0.99999, 1.0] {
            let j = g.locate(x);
            assert!((lagrange(&g, &values, j, x) - p(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn hermite_is_monotone_and_accurate() {
        let g = grid();
        let f = |x: f64| x * (1.0 - x.ln());
        let values: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let slopes = monotone_slopes(g.nodes(), &values);
        let mut prev = 0.0;
        for i in 0..=20000 {
            let x = 0.5 + 0.5 * i as f64 / 20000.0;
            let y = hermite(&g, &values, &slopes, g.locate(x), x);
            assert!(y >= prev);
            assert!((y - f(x)).abs() < 1e-8);
            prev = y;
        }
        let step: Vec<f64> = g.nodes().iter().map(|&x| if x < 0.5 { 0.0 } else { 1.0 }).collect();
        let s = monotone_slopes(g.nodes(), &step);
        for i in 0..=1000 {
            let x = 0.49 + 0.02 * i as f64 / 1000.0;
            let y = hermite(&g, &step, &s, g.locate(x), x);
            assert!((0.0..=1.0).contains(&y));
        }
    }
}
