use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[0, pi]` with `M` intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    intervals: usize,
}

impl Grid {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < 1 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        Ok(Grid { intervals })
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        PI / self.intervals as f64
    }

    /// `x_j = j pi / M`; the last node is `pi` exactly.
    pub fn node(&self, j: usize) -> f64 {
        PI * j as f64 / self.intervals as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }
}

/// Composite trapezoid weights over the whole grid.
pub fn trapezoid_weights(grid: &Grid) -> Vec<f64> {
    let h = grid.step();
    let mut w = vec![h; grid.len()];
    w[0] = 0.5 * h;
    w[grid.intervals()] = 0.5 * h;
    w
}

/// Trapezoid weights for `[0, x_i]`, i.e. the first `i + 1` nodes.
pub fn trapezoid_weights_upto(grid: &Grid, i: usize) -> Vec<f64> {
    let h = grid.step();
    if i == 0 {
        return vec![0.0];
    }
    let mut w = vec![h; i + 1];
    w[0] = 0.5 * h;
    w[i] = 0.5 * h;
    w
}

/// Composite Simpson weights; needs an even number of intervals.
pub fn simpson_weights(grid: &Grid) -> Result<Vec<f64>> {
    let m = grid.intervals();
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("Simpson rule needs an even M, got {m}")));
    }
    let h = grid.step();
    let mut w: Vec<f64> = (0..=m).map(|j| if j % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 }).collect();
    w[0] = h / 3.0;
    w[m] = h / 3.0;
    Ok(w)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    Simpson,
}

impl Quadrature {
    pub fn weights(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Quadrature::Trapezoid => Ok(trapezoid_weights(grid)),
            Quadrature::Simpson => simpson_weights(grid),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_interval_trapezoid() {
        let g = Grid::new(2).unwrap();
        let w = trapezoid_weights(&g);
        assert!((w[0] - PI / 4.0).abs() < 1e-15);
        assert!((w[1] - PI / 2.0).abs() < 1e-15);
        assert!((w[2] - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn endpoint_is_pi() {
        for m in [1, 3, 7, 400, 999] {
            let g = Grid::new(m).unwrap();
            assert_eq!(g.node(m), PI);
            assert_eq!(g.node(0), 0.0);
        }
        assert!(Grid::new(0).is_err());
    }

    #[test]
    fn simpson_integrates_cubics() {
        let g = Grid::new(6).unwrap();
        let w = simpson_weights(&g).unwrap();
        let s: f64 = g.nodes().iter().zip(&w).map(|(x, w)| w * x * x * x).sum();
        assert!((s - PI.powi(4) / 4.0).abs() < 1e-12);
        assert!(simpson_weights(&Grid::new(5).unwrap()).is_err());
    }

    #[test]
    fn partial_weights_sum_to_length() {
        let g = Grid::new(10).unwrap();
        for i in 0..=10 {
            let s: f64 = trapezoid_weights_upto(&g, i).iter().sum();
            assert!((s - g.node(i)).abs() < 1e-14);
        }
    }
}
