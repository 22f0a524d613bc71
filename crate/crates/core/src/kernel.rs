use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix2::Matrix2;

/// Lower-triangular kernel `K(x_i, t_j)`, `j <= i`.
#[derive(Clone, Debug)]
pub struct KernelField {
    grid: Grid,
    data: Vec<Matrix2>,
}

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl KernelField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        KernelField { grid, data: vec![Matrix2::ZERO; row_start(n)] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> Matrix2) -> Self {
        let mut k = Self::zeros(grid);
        for i in 0..grid.len() {
            for j in 0..=i {
                k.data[row_start(i) + j] = f(grid.node(i), grid.node(j));
            }
        }
        k
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> Result<Matrix2> {
        if j > i {
            return Err(Error::AboveDiagonal { x: i, t: j });
        }
        if i >= self.grid.len() {
            return Err(Error::Dimension(format!("x index {i} outside grid")));
        }
        Ok(self.data[row_start(i) + j])
    }

    /// `K(x_i, t_j)` for `j = 0..=i`.
    pub fn row(&self, i: usize) -> &[Matrix2] {
        &self.data[row_start(i)..row_start(i + 1)]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Matrix2] {
        &mut self.data[row_start(i)..row_start(i + 1)]
    }

    pub fn diagonal(&self) -> Vec<Matrix2> {
        (0..self.grid.len()).map(|i| self.data[row_start(i) + i]).collect()
    }

    /// Max entry-wise difference over the shared triangle.
    pub fn max_diff(&self, other: &KernelField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Dimension("kernels live on different grids".into()));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max))
    }

    /// Write `K11.csv`, `K12.csv`, `K21.csv`, `K22.csv` into `dir`: one row per
    /// `x_i`, one column per `t_j`, zero above the diagonal.
    pub fn export_csv(&self, dir: &Path, precision: usize) -> std::io::Result<()> {
        let n = self.grid.len();
        for (name, r, c) in [("K11", 0, 0), ("K12", 0, 1), ("K21", 1, 0), ("K22", 1, 1)] {
            let mut out = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
            for i in 0..n {
                let row = self.row(i);
                for j in 0..n {
                    let v = if j <= i { row[j].get(r, c) } else { 0.0 };
                    if j > 0 {
                        write!(out, ",")?;
                    }
                    write!(out, "{v:.precision$e}")?;
                }
                writeln!(out)?;
            }
            out.flush()?;
        }
        Ok(())
    }
}

/// Full square kernel `F(x_i, t_j)` on the grid.
#[derive(Clone, Debug)]
pub struct SquareKernel {
    grid: Grid,
    data: Vec<Matrix2>,
}

impl SquareKernel {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        SquareKernel { grid, data: vec![Matrix2::ZERO; n * n] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> Matrix2 {
        self.data[i * self.grid.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Matrix2) {
        let n = self.grid.len();
        self.data[i * n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Matrix2] {
        let n = self.grid.len();
        &self.data[i * n..(i + 1) * n]
    }

    /// Max of `|F(x, t)^T - F(t, x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.get(i, j).transpose() - self.get(j, i)).max_abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Matrix2::max_abs).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_access() {
        let g = Grid::new(3).unwrap();
        let k = KernelField::from_fn(g, |x, t| Matrix2::new(x, t, 0.0, 1.0));
        assert_eq!(k.get(2, 1).unwrap().m12, g.node(1));
        assert_eq!(k.row(3).len(), 4);
        assert!(matches!(k.get(1, 2), Err(Error::AboveDiagonal { x: 1, t: 2 })));
    }
}
