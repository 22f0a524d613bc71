//! Small dense linear algebra: LU with partial pivoting and a two-column
//! least-squares solver.

use crate::error::{Error, Result};

/// Pivots below `PIVOT_FLOOR * largest` are treated as zero.
const PIVOT_FLOOR: f64 = 1e-13;

/// LU factorization `PA = LU` of a row-major square matrix.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(mut a: Vec<f64>, n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Dimension(format!("expected {} entries, got {}", n * n, a.len())));
        }
        if let Some(index) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix", index });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut largest = 0.0f64;
        for k in 0..n {
            let (mut piv_row, mut piv_val) = (k, a[k * n + k].abs());
            for r in k + 1..n {
                let v = a[r * n + k].abs();
                if v > piv_val {
                    piv_row = r;
                    piv_val = v;
                }
            }
            largest = largest.max(piv_val);
            if piv_val == 0.0 || piv_val <= PIVOT_FLOOR * largest {
                return Err(Error::Singular { column: k, pivot: piv_val, largest });
            }
            if piv_row != k {
                for c in 0..n {
                    a.swap(k * n + c, piv_row * n + c);
                }
                perm.swap(k, piv_row);
            }
            let pivot = a[k * n + k];
            let (upper, lower) = a.split_at_mut((k + 1) * n);
            let row_k = &upper[k * n..];
            for r in 0..n - k - 1 {
                let row = &mut lower[r * n..(r + 1) * n];
                let f = row[k] / pivot;
                row[k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        row[c] -= f * row_k[c];
                    }
                }
            }
        }
        Ok(LuFactorization { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of the largest to smallest pivot magnitude.
    pub fn condition_estimate(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..self.n {
            let p = self.lu[k * self.n + k].abs();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        hi / lo
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs has {} entries, expected {n}", b.len())));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let row = &self.lu[r * n..r * n + r];
            let s: f64 = row.iter().zip(&x[..r]).map(|(l, y)| l * y).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let row = &self.lu[r * n..(r + 1) * n];
            let s: f64 = row[r + 1..].iter().zip(&x[r + 1..]).map(|(u, y)| u * y).sum();
            x[r] = (x[r] - s) / row[r];
        }
        Ok(x)
    }
}

#[derive(Clone, Debug)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    /// Max-norm of `Ax - b`.
    pub residual: f64,
    pub condition: f64,
}

/// Solve `Ax = b` for a row-major `n x n` matrix.
pub fn solve_dense(a: &[f64], b: &[f64]) -> Result<DenseSolution> {
    let n = b.len();
    let lu = LuFactorization::new(a.to_vec(), n)?;
    let x = lu.solve(b)?;
    let residual = (0..n)
        .map(|r| {
            let ax: f64 = a[r * n..(r + 1) * n].iter().zip(&x).map(|(a, x)| a * x).sum();
            (ax - b[r]).abs()
        })
        .fold(0.0, f64::max);
    Ok(DenseSolution { x, residual, condition: lu.condition_estimate() })
}

#[derive(Clone, Debug)]
pub struct LeastSquares2 {
    pub x: [f64; 2],
    pub residuals: Vec<f64>,
    /// Ratio of singular values of the design matrix.
    pub condition: f64,
}

/// Least squares for `rows * x ~ rhs` with two unknowns (Householder QR).
pub fn least_squares_2(rows: &[[f64; 2]], rhs: &[f64]) -> Result<LeastSquares2> {
    let m = rows.len();
    if m != rhs.len() {
        return Err(Error::Dimension(format!("{m} rows but {} right-hand sides", rhs.len())));
    }
    if m < 2 {
        return Err(Error::Dimension("need at least two equations".into()));
    }
    let mut a: Vec<[f64; 2]> = rows.to_vec();
    let mut b = rhs.to_vec();
    for k in 0..2 {
        let norm = a[k..].iter().map(|r| r[k] * r[k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Singular { column: k, pivot: 0.0, largest: 0.0 });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k..].iter().map(|r| r[k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        if vv == 0.0 {
            continue;
        }
        for c in k..2 {
            let s: f64 = v.iter().zip(&a[k..]).map(|(v, r)| v * r[c]).sum::<f64>() * 2.0 / vv;
            for (vi, r) in v.iter().zip(a[k..].iter_mut()) {
                r[c] -= s * vi;
            }
        }
        let s: f64 = v.iter().zip(&b[k..]).map(|(v, b)| v * b).sum::<f64>() * 2.0 / vv;
        for (vi, bi) in v.iter().zip(b[k..].iter_mut()) {
            *bi -= s * vi;
        }
    }
    let (r11, r12, r22) = (a[0][0], a[0][1], a[1][1]);
    // singular values of the 2x2 triangle
    let fro = r11 * r11 + r12 * r12 + r22 * r22;
    let det = (r11 * r22).abs();
    let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
    let s_max = ((fro + disc) / 2.0).sqrt();
    let s_min = if s_max > 0.0 { det / s_max } else { 0.0 };
    if s_min <= 1e-12 * s_max {
        return Err(Error::Singular { column: 1, pivot: s_min, largest: s_max });
    }
    let x2 = b[1] / r22;
    let x1 = (b[0] - r12 * x2) / r11;
    let residuals = rows.iter().zip(rhs).map(|(r, y)| r[0] * x1 + r[1] * x2 - y).collect();
    Ok(LeastSquares2 { x: [x1, x2], residuals, condition: s_max / s_min })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = [2.0, 1.0, 1.0, 1.0, 3.0, 2.0, 1.0, 0.0, 0.0];
        let sol = solve_dense(&a, &[4.0, 5.0, 6.0]).unwrap();
        let expect = [6.0, 15.0, -23.0];
        for (x, e) in sol.x.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(solve_dense(&a, &[1.0, 2.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn condition_of_diagonal() {
        let a = [1e3, 0.0, 0.0, 1.0];
        let sol = solve_dense(&a, &[1.0, 1.0]).unwrap();
        assert!((sol.condition - 1e3).abs() < 1e-9);
    }

    #[test]
    fn least_squares_exact_fit() {
        let rows = [[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        let rhs: Vec<f64> = rows.iter().map(|r| 0.5 - 2.0 * r[1]).collect();
        let ls = least_squares_2(&rows, &rhs).unwrap();
        assert!((ls.x[0] - 0.5).abs() < 1e-13 && (ls.x[1] + 2.0).abs() < 1e-13);
        assert!(ls.residuals.iter().all(|r| r.abs() < 1e-13));
    }

    #[test]
    fn least_squares_rank_deficient() {
        let rows = [[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]];
        assert!(least_squares_2(&rows, &[1.0, 2.0, 3.0]).is_err());
    }
}
