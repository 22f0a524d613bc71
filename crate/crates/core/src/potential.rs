use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{trapezoid_weights, Grid};
use crate::matrix2::Matrix2;

/// Grid samples of the symmetric trace-free potential `[[p, q], [q, -p]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialMatrix {
    grid: Grid,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl PotentialMatrix {
    pub fn new(grid: Grid, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        for (name, v) in [("p", &p), ("q", &q)] {
            if v.len() != grid.len() {
                return Err(Error::Dimension(format!("{name} has {} samples, grid has {} nodes", v.len(), grid.len())));
            }
        }
        if let Some(index) = p.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "p", index });
        }
        if let Some(index) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "q", index });
        }
        Ok(PotentialMatrix { grid, p, q })
    }

    pub fn from_fn(grid: Grid, p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = grid.nodes();
        let pv = xs.iter().map(|&x| p(x)).collect();
        let qv = xs.iter().map(|&x| q(x)).collect();
        Self::new(grid, pv, qv)
    }

    pub fn zero(grid: Grid) -> Self {
        PotentialMatrix { grid, p: vec![0.0; grid.len()], q: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn omega(&self, j: usize) -> Matrix2 {
        Matrix2::new(self.p[j], self.q[j], self.q[j], -self.p[j])
    }

    /// `(p, q)` at `x_i + tau h` for `tau` in `[0, 1]`, by four-point Lagrange
    /// interpolation (linear when the grid has fewer than four nodes).
    pub fn sample(&self, i: usize, tau: f64) -> (f64, f64) {
        let m = self.grid.intervals();
        if tau == 0.0 {
            return (self.p[i], self.q[i]);
        }
        if m < 3 {
            let j = (i + 1).min(m);
            return (self.p[i] + tau * (self.p[j] - self.p[i]), self.q[i] + tau * (self.q[j] - self.q[i]));
        }
        // stencil start s, local coordinate t measured from node s
        let s = i.saturating_sub(1).min(m - 3);
        let t = (i - s) as f64 + tau;
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        let f = |v: &[f64]| l0 * v[s] + l1 * v[s + 1] + l2 * v[s + 2] + l3 * v[s + 3];
        (f(&self.p), f(&self.q))
    }

    /// Trapezoid `L2` norm of `(p, q)`.
    pub fn l2_norm(&self) -> f64 {
        let w = trapezoid_weights(&self.grid);
        w.iter().zip(self.p.iter().zip(&self.q)).map(|(w, (p, q))| w * (p * p + q * q)).sum::<f64>().sqrt()
    }
}

/// Boundary condition at `pi`: `(lambda + h1) y1(pi) + h2 y2(pi) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams {
    pub h1: f64,
    pub h2: f64,
}

impl BoundaryParams {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if !h1.is_finite() {
            return Err(Error::NonFinite { what: "h1", index: 0 });
        }
        if !(h2 > 0.0) || !h2.is_finite() {
            return Err(Error::NonPositiveH2(h2));
        }
        Ok(BoundaryParams { h1, h2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_sampling_is_exact_for_cubics() {
        let g = Grid::new(8).unwrap();
        let f = |x: f64| 0.3 - x + 0.2 * x * x - 0.05 * x * x * x;
        let pot = PotentialMatrix::from_fn(g, f, |x| 2.0 * x).unwrap();
        let h = g.step();
        for i in 0..8 {
            for tau in [0.0, 0.25, 0.5, 0.9, 1.0] {
                let (p, q) = pot.sample(i, tau);
                let x = g.node(i) + tau * h;
                assert!((p - f(x)).abs() < 1e-12, "i={i} tau={tau}");
                assert!((q - 2.0 * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g = Grid::new(4).unwrap();
        assert!(PotentialMatrix::new(g, vec![0.0; 4], vec![0.0; 5]).is_err());
        assert!(PotentialMatrix::new(g, vec![f64::NAN; 5], vec![0.0; 5]).is_err());
        assert!(BoundaryParams::new(0.0, 0.0).is_err());
        assert!(BoundaryParams::new(0.0, -1.0).is_err());
        assert!(BoundaryParams::new(1.0, 0.5).is_ok());
    }
}
