use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node where the geometric part hands over to the uniform part.
pub const BREAKPOINT: f64 = 1.0 / 16.0;

/// Graded grid on `(0, 1]`: geometric nodes from `x_min` up to `1/16`,
/// then uniform nodes up to `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m_geometric: usize,
    pub m_uniform: usize,
    pub x_min: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { m_geometric: 2048, m_uniform: 2048, x_min: 2f64.powi(-48) }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_geometric < 16 || self.m_uniform < 16 {
            return Err(Error::Grid(format!(
                "node counts must be at least 16 (got {} geometric, {} uniform)",
                self.m_geometric, self.m_uniform
            )));
        }
        if !(self.x_min > 0.0 && self.x_min <= 2f64.powi(-40)) {
            return Err(Error::Grid(format!("x_min must lie in (0, 2^-40], got {:e}", self.x_min)));
        }
        Ok(())
    }

    /// Same layout with both node counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec { m_geometric: self.m_geometric * factor, m_uniform: self.m_uniform * factor, ..*self }
    }
}

/// Node list of a grid spec: strictly increasing, ending at `1`.
pub fn make_grid(spec: &GridSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mg = spec.m_geometric;
    let ln_r = (BREAKPOINT / spec.x_min).ln() / (mg - 1) as f64;
    let mut nodes = Vec::with_capacity(mg + spec.m_uniform);
    nodes.extend((0..mg - 1).map(|j| spec.x_min * (ln_r * j as f64).exp()));
    nodes.push(BREAKPOINT);
    let h = (1.0 - BREAKPOINT) / spec.m_uniform as f64;
    nodes.extend((1..spec.m_uniform).map(|i| BREAKPOINT + i as f64 * h));
    nodes.push(1.0);
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Grid("nodes are not strictly increasing".into()));
    }
    Ok(nodes)
}

/// Nodes plus constant-time panel lookup.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<f64>,
    ln_ratio: f64,
    h_uniform: f64,
}

impl Grid {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let nodes = make_grid(spec)?;
        Ok(Grid {
            spec: *spec,
            ln_ratio: (BREAKPOINT / spec.x_min).ln() / (spec.m_geometric - 1) as f64,
            h_uniform: (1.0 - BREAKPOINT) / spec.m_uniform as f64,
            nodes,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    /// Index `j` of the panel `[x_j, x_{j+1}]` holding `x`, clamped to the
    /// grid range.
    #[inline]
    pub fn locate(&self, x: f64) -> usize {
        let last = self.nodes.len() - 2;
        let guess = if x < BREAKPOINT {
            let t = (x / self.spec.x_min).ln() / self.ln_ratio;
            if t > 0.0 {
                t as usize
            } else {
                0
            }
        } else {
            self.spec.m_geometric - 1 + ((x - BREAKPOINT) / self.h_uniform) as usize
        };
        let mut j = guess.min(last);
        while j > 0 && self.nodes[j] > x {
            j -= 1;
        }
        while j < last && self.nodes[j + 1] < x {
            j += 1;
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let nodes = make_grid(&GridSpec::default()).unwrap();
        assert_eq!(nodes.len(), 4096);
        assert_eq!(*nodes.last().unwrap(), 1.0);
        assert_eq!(nodes[0], 2f64.powi(-48));
        assert_eq!(nodes[2047], 1.0 / 16.0);
        for k in 1..=20 {
            let y = 1.0 / (1.0 + 2f64.powi(k));
            assert!(y > nodes[0] && y < 1.0);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            GridSpec { m_geometric: 0, ..GridSpec::default() },
            GridSpec { m_uniform: 8, ..GridSpec::default() },
            GridSpec { x_min: 1e-3, ..GridSpec::default() },
            GridSpec { x_min: 0.0, ..GridSpec::default() },
        ];
        for spec in bad {
            assert!(make_grid(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn locate_brackets() {
        let grid = Grid::new(&GridSpec { m_geometric: 64, m_uniform: 40, x_min: 2f64.powi(-44) }).unwrap();
        let nodes = grid.nodes();
        for &x in nodes {
            let j = grid.locate(x);
            assert!(nodes[j] <= x && x <= nodes[j + 1]);
        }
        for i in 0..5000 {
            let x = 2f64.powf(-44.0 * i as f64 / 5000.0);
            let j = grid.locate(x);
            assert!(nodes[j] <= x && x <= nodes[j + 1], "{x}");
        }
        assert_eq!(grid.locate(1e-300), 0);
        assert_eq!(grid.locate(1.0), nodes.len() - 2);
    }
}
