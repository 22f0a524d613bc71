//! The Gelfand-Levitan-Marchenko equation
//!
//! ```text
//! F(x, t) + K(x, t) + int_0^x K(x, s) F(s, t) ds = 0,   0 <= t <= x,
//! ```
//!
//! with `F` assembled from spectral data and the free spectrum
//! `lambda_n^0 = n`, `alpha_n^0 = pi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{trapezoid_weights_upto, Grid};
use crate::kernel::{KernelField, SquareKernel};
use crate::linalg::LuFactorization;
use crate::matrix2::Matrix2;
use crate::spectral::SpectralData;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    /// Sum the rank-one terms `phi0(x) phi0(t)^T / alpha` node by node.
    DirectSum,
    /// `F(x, t) = (a(x - t) + a(x + t) T) / 2` from a cached scalar pair.
    #[default]
    AForm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    /// Plain truncation at `|n| <= N`.
    #[default]
    None,
    /// Add the `|n| > N` terms predicted by [`AsymptoticTail`].
    Asymptotic,
}

#[derive(Clone, Copy, Debug)]
pub struct FKernelSpec<'a> {
    pub spectral: &'a SpectralData,
    pub mode: FMode,
    pub tail: TailModel,
}

/// Two-term model of the unseen data,
/// `lambda_n = n + c/n + d/n^2` and `alpha_n = pi + e/n + g/n^2` for `|n| > N`,
/// fitted on the top quarter of the known indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticTail {
    pub truncation: usize,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub g: f64,
}

impl AsymptoticTail {
    /// `None` when `N < 4`.
    pub fn fit(spectral: &SpectralData) -> Option<Self> {
        let nn = spectral.truncation();
        if nn < 4 {
            return None;
        }
        let m = (nn / 4).max(2);
        let (mut c, mut d, mut e, mut g) = (0.0, 0.0, 0.0, 0.0);
        for k in (nn - m + 1)..=nn {
            let up = spectral.get(k as i64)?;
            let down = spectral.get(-(k as i64))?;
            let kf = k as f64;
            let (u, v) = (kf * (up.lambda - kf), -kf * (down.lambda + kf));
            c += 0.5 * (u + v);
            d += 0.5 * kf * (u - v);
            let (u, v) = (kf * (up.alpha - PI), -kf * (down.alpha - PI));
            e += 0.5 * (u + v);
            g += 0.5 * kf * (u - v);
        }
        let mf = m as f64;
        Some(AsymptoticTail { truncation: nn, c: c / mf, d: d / mf, e: e / mf, g: g / mf })
    }

    /// Tail contribution `(A, B)` to `a(s)` at `s = k pi / M`, `|k| <= 2M`.
    pub fn a_tail(&self, k: i64, m: usize) -> (f64, f64) {
        let s = k as f64 * PI / m as f64;
        let (s1, c2) = (self.sine_tail(k, m), self.cosine_tail(k, m));
        let (c, d, e, g) = (self.c, self.d, self.e, self.g);
        let a =
            -2.0 * c * s / PI * s1 - c * c * s * s / PI * c2 - 2.0 * g / (PI * PI) * c2 + 2.0 * e * e / PI.powi(3) * c2;
        let b = 2.0 * d * s / PI * c2 - 2.0 * e / (PI * PI) * s1 - 2.0 * e * c * s / (PI * PI) * c2;
        (a, b)
    }

    /// `sum_{n > N} sin(n s) / n`; at `s = 2 pi` the left limit.
    fn sine_tail(&self, k: i64, m: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let s = k.unsigned_abs() as f64 * PI / m as f64;
        let head: f64 = (1..=self.truncation).map(|n| (n as f64 * s).sin() / n as f64).sum();
        k.signum() as f64 * (0.5 * (PI - s) - head)
    }

    /// `sum_{n > N} cos(n s) / n^2`.
    fn cosine_tail(&self, k: i64, m: usize) -> f64 {
        let s = k.unsigned_abs() as f64 * PI / m as f64;
        let head: f64 = (1..=self.truncation).map(|n| (n as f64 * s).cos() / (n * n) as f64).sum();
        PI * PI / 6.0 - PI * s / 2.0 + s * s / 4.0 - head
    }
}

/// `a(s) = A(s) I + B(s) J` sampled at `s = k h`, `k = -2M..=2M`.
#[derive(Clone, Debug)]
pub struct ACache {
    grid: Grid,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ACache {
    pub fn new(spectral: &SpectralData, grid: Grid, tail: TailModel) -> Self {
        let m = grid.intervals() as i64;
        let fit = match tail {
            TailModel::None => None,
            TailModel::Asymptotic => AsymptoticTail::fit(spectral),
        };
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for k in -2 * m..=2 * m {
            let (mut va, mut vb) = truncated_a(spectral, k as f64 * PI / m as f64);
            if let Some(t) = &fit {
                let (ta, tb) = t.a_tail(k, grid.intervals());
                va += ta;
                vb += tb;
            }
            a.push(va);
            b.push(vb);
        }
        ACache { grid, a, b }
    }

    /// `a(k h)` for integer `|k| <= 2M`.
    pub fn at_index(&self, k: i64) -> Matrix2 {
        let idx = (k + 2 * self.grid.intervals() as i64) as usize;
        Matrix2::new(self.a[idx], -self.b[idx], self.b[idx], self.a[idx])
    }

    /// Linear interpolation between cached samples, `|s| <= 2 pi`.
    pub fn at(&self, s: f64) -> Matrix2 {
        let m = self.grid.intervals() as i64;
        let pos = s / self.grid.step();
        let k0 = (pos.floor() as i64).clamp(-2 * m, 2 * m - 1);
        let t = pos - k0 as f64;
        self.at_index(k0) * (1.0 - t) + self.at_index(k0 + 1) * t
    }
}

fn truncated_a(spectral: &SpectralData, s: f64) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    for d in spectral.records() {
        let (sn, cs) = (d.lambda * s).sin_cos();
        a += cs / d.alpha;
        b += sn / d.alpha;
    }
    let nn = spectral.truncation() as i64;
    for n in -nn..=nn {
        let (sn, cs) = (n as f64 * s).sin_cos();
        a -= cs / PI;
        b -= sn / PI;
    }
    (a, b)
}

/// `a(s)` from the truncated data alone, without tail.
pub fn build_a(spectral: &SpectralData, s: f64) -> Matrix2 {
    let (a, b) = truncated_a(spectral, s);
    Matrix2::new(a, -b, b, a)
}

/// `F(x_i, t_j)` on the full square grid.
pub fn build_f(spec: &FKernelSpec<'_>, grid: Grid) -> SquareKernel {
    let n = grid.len();
    let mut f = SquareKernel::zeros(grid);
    match spec.mode {
        FMode::AForm => {
            let cache = ACache::new(spec.spectral, grid, spec.tail);
            for i in 0..n {
                for j in 0..n {
                    let v = (cache.at_index(i as i64 - j as i64) + cache.at_index((i + j) as i64) * Matrix2::T) * 0.5;
                    f.set(i, j, v);
                }
            }
        }
        FMode::DirectSum => {
            let xs = grid.nodes();
            let nn = spec.spectral.truncation() as i64;
            let terms: Vec<(f64, f64)> = spec
                .spectral
                .records()
                .iter()
                .map(|d| (d.lambda, 1.0 / d.alpha))
                .chain((-nn..=nn).map(|k| (k as f64, -1.0 / PI)))
                .collect();
            // phi0 columns per term
            let cols: Vec<Vec<[f64; 2]>> = terms
                .iter()
                .map(|&(l, _)| {
                    xs.iter()
                        .map(|&x| {
                            let (s, c) = (l * x).sin_cos();
                            [s, -c]
                        })
                        .collect()
                })
                .collect();
            for i in 0..n {
                for j in 0..=i {
                    let mut acc = Matrix2::ZERO;
                    for (col, &(_, w)) in cols.iter().zip(&terms) {
                        acc += Matrix2::outer(col[i], col[j]) * w;
                    }
                    f.set(i, j, acc);
                    f.set(j, i, acc.transpose());
                }
            }
            if spec.tail == TailModel::Asymptotic {
                if let Some(t) = AsymptoticTail::fit(spec.spectral) {
                    let m = grid.intervals();
                    let at = |k: i64| {
                        let (a, b) = t.a_tail(k, m);
                        Matrix2::new(a, -b, b, a)
                    };
                    for i in 0..n {
                        for j in 0..n {
                            let v = (at(i as i64 - j as i64) + at((i + j) as i64) * Matrix2::T) * 0.5;
                            f.set(i, j, f.get(i, j) + v);
                        }
                    }
                }
            }
        }
    }
    f
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlmMethod {
    /// One symmetric factorization of the full system, updated per row.
    #[default]
    Bordered,
    /// Independent LU with partial pivoting for every row.
    DenseRows,
}

#[derive(Clone, Debug)]
pub struct GlmSolution {
    pub kernel: KernelField,
    /// Pivot-ratio condition estimate of each row system (row 0 is trivial).
    pub condition: Vec<f64>,
    /// Rows that fell back to the dense solver.
    pub dense_rows: Vec<usize>,
}

impl GlmSolution {
    pub fn max_condition(&self) -> f64 {
        self.condition.iter().copied().fold(1.0, f64::max)
    }
}

/// Row `i` of the discrete equation: `K(x_i, t_j)` for `j <= i` from a dense
/// `2(i+1)`-square solve with trapezoid weights on `[0, x_i]`.
pub fn solve_glm_row(f: &SquareKernel, i: usize) -> Result<(Vec<Matrix2>, f64)> {
    if i == 0 {
        return Ok((vec![-f.get(0, 0)], 1.0));
    }
    let w = trapezoid_weights_upto(f.grid(), i);
    let n = 2 * (i + 1);
    let mut a = vec![0.0; n * n];
    for j in 0..=i {
        for k in 0..=i {
            let fkj = f.get(k, j);
            for b in 0..2 {
                for c in 0..2 {
                    let (e, u) = (2 * j + b, 2 * k + c);
                    a[e * n + u] = w[k] * fkj.get(c, b) + if e == u { 1.0 } else { 0.0 };
                }
            }
        }
    }
    let lu = LuFactorization::new(a, n).map_err(|_| Error::GlmSingular { rows: vec![i] })?;
    let mut rows = [vec![0.0; n], vec![0.0; n]];
    for (r, out) in rows.iter_mut().enumerate() {
        let rhs: Vec<f64> = (0..n).map(|e| -f.get(i, e / 2).get(r, e % 2)).collect();
        *out = lu.solve(&rhs)?;
    }
    let kernel_row =
        (0..=i).map(|k| Matrix2::new(rows[0][2 * k], rows[0][2 * k + 1], rows[1][2 * k], rows[1][2 * k + 1])).collect();
    Ok((kernel_row, lu.condition_estimate()))
}

/// In-place `G = L D L^T` of a symmetric row-major matrix; only the lower
/// triangle is read. Returns the index of the first unusable pivot, if any.
fn ldl_in_place(g: &mut [f64], d: &mut [f64], n: usize) -> Option<usize> {
    let mut scale = 0.0f64;
    for r in 0..n {
        scale = scale.max(g[r * n + r].abs());
    }
    let mut t = vec![0.0; n];
    for r in 0..n {
        for c in 0..r {
            let (head, tail) = g.split_at(r * n);
            let lc = &head[c * n..c * n + c];
            let s: f64 = t[..c].iter().zip(lc).map(|(a, b)| a * b).sum();
            t[c] = tail[c] - s;
        }
        let mut dr = g[r * n + r];
        for c in 0..r {
            let l = t[c] / d[c];
            g[r * n + c] = l;
            dr -= t[c] * l;
        }
        if !(dr.abs() > 1e-13 * scale) {
            return Some(r);
        }
        d[r] = dr;
    }
    None
}

/// All rows of the discrete equation.
pub fn solve_glm_all(f: &SquareKernel) -> Result<GlmSolution> {
    solve_glm_all_with(f, GlmMethod::Bordered)
}

/// With weights `w` on `[0, x_i]` and `z = w K`, row `i` becomes
/// `(W^{-1} + F) z = -F(x_i, .)`, whose matrix is the leading block of one
/// fixed symmetric matrix except for the last node's diagonal. One `LDL^T`
/// then serves every row after a two-pivot update.
pub fn solve_glm_all_with(f: &SquareKernel, method: GlmMethod) -> Result<GlmSolution> {
    let grid = *f.grid();
    let m = grid.intervals();
    let h = grid.step();
    let mut kernel = KernelField::zeros(grid);
    let mut condition = vec![1.0; m + 1];
    kernel.row_mut(0)[0] = -f.get(0, 0);

    let mut dense_rows = Vec::new();
    let mut failed = Vec::new();
    let mut dense = |i: usize, kernel: &mut KernelField, condition: &mut Vec<f64>| match solve_glm_row(f, i) {
        Ok((row, c)) => {
            kernel.row_mut(i).copy_from_slice(&row);
            condition[i] = c;
        }
        Err(_) => failed.push(i),
    };

    match method {
        GlmMethod::DenseRows => {
            for i in 1..=m {
                dense(i, &mut kernel, &mut condition);
            }
        }
        GlmMethod::Bordered => {
            let n = 2 * (m + 1);
            let mut g = vec![0.0; n * n];
            for j in 0..=m {
                let inv_w = if j == 0 { 2.0 / h } else { 1.0 / h };
                for k in 0..=j {
                    let fkj = f.get(k, j);
                    for b in 0..2 {
                        for c in 0..2 {
                            let (e, u) = (2 * j + b, 2 * k + c);
                            if u <= e {
                                g[e * n + u] = fkj.get(c, b) + if e == u { inv_w } else { 0.0 };
                            }
                        }
                    }
                }
            }
            let mut d = vec![0.0; n];
            let breakdown = ldl_in_place(&mut g, &mut d, n).unwrap_or(n);
            let mut y = vec![[0.0f64; 2]; n];
            for i in 1..=m {
                if 2 * i + 1 >= breakdown {
                    dense(i, &mut kernel, &mut condition);
                    dense_rows.push(i);
                    continue;
                }
                let (e0, e1) = (2 * i, 2 * i + 1);
                let size = e1 + 1;
                let d0 = d[e0] + 1.0 / h;
                let l10 = g[e1 * n + e0];
                let l10_new = l10 * d[e0] / d0;
                let d1 = d[e1] + l10 * l10 * d[e0] + 1.0 / h - l10_new * l10_new * d0;
                if !(d0.abs() > 1e-13 / h && d1.abs() > 1e-13 / h) {
                    dense(i, &mut kernel, &mut condition);
                    dense_rows.push(i);
                    continue;
                }
                let l = |r: usize, c: usize| if r == e1 && c == e0 { l10_new } else { g[r * n + c] };
                let piv = |r: usize| match r {
                    _ if r == e0 => d0,
                    _ if r == e1 => d1,
                    _ => d[r],
                };
                for e in 0..size {
                    let fx = f.get(i, e / 2);
                    y[e] = [-fx.get(0, e % 2), -fx.get(1, e % 2)];
                }
                for r in 0..size {
                    let (mut s0, mut s1) = (0.0, 0.0);
                    for c in 0..r {
                        let lrc = l(r, c);
                        s0 += lrc * y[c][0];
                        s1 += lrc * y[c][1];
                    }
                    y[r][0] -= s0;
                    y[r][1] -= s1;
                }
                for r in 0..size {
                    let p = piv(r);
                    y[r][0] /= p;
                    y[r][1] /= p;
                }
                for s in (0..size).rev() {
                    let ys = y[s];
                    for r in 0..s {
                        let lsr = l(s, r);
                        y[r][0] -= lsr * ys[0];
                        y[r][1] -= lsr * ys[1];
                    }
                }
                let w = trapezoid_weights_upto(&grid, i);
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for r in 0..size {
                    let u = (w[r / 2] * piv(r)).abs();
                    lo = lo.min(u);
                    hi = hi.max(u);
                }
                condition[i] = hi / lo;
                let row = kernel.row_mut(i);
                for k in 0..=i {
                    let (za, zb) = (y[2 * k], y[2 * k + 1]);
                    row[k] = Matrix2::new(za[0], zb[0], za[1], zb[1]) * (1.0 / w[k]);
                }
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::GlmSingular { rows: failed });
    }
    if let Some(i) = (0..=m).find(|&i| kernel.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite { what: "GLM kernel row", index: i });
    }
    Ok(GlmSolution { kernel, condition, dense_rows })
}

/// Max over `j <= i` of `|F(x_i, t_j) + K(x_i, t_j) + sum_k w_k K(x_i, s_k) F(s_k, t_j)|`.
pub fn glm_residual(f: &SquareKernel, k: &KernelField) -> Result<f64> {
    if f.grid() != k.grid() {
        return Err(Error::Dimension("F and K on different grids".into()));
    }
    let grid = *f.grid();
    let mut worst = 0.0f64;
    for i in 1..grid.len() {
        let w = trapezoid_weights_upto(&grid, i);
        let row = k.row(i);
        for j in 0..=i {
            let mut r = f.get(i, j) + row[j];
            for s in 0..=i {
                r += row[s] * f.get(s, j) * w[s];
            }
            worst = worst.max(r.max_abs());
        }
    }
    Ok(worst)
}

/// Kernel `H` of the inverse transformation
/// `phi0(x) = phi(x) + int_0^x H(x, t) phi(t) dt`:
///
/// `H(x, t)^T = F(t, x) + int_0^t K(t, s) F(s, x) ds`, `t <= x`.
///
/// This is the upper triangle of `(I + K)(I + F) = (I + H)^*`.
pub fn build_h(f: &SquareKernel, k: &KernelField) -> Result<KernelField> {
    if f.grid() != k.grid() {
        return Err(Error::Dimension("F and K on different grids".into()));
    }
    let grid = *f.grid();
    let mut h = KernelField::zeros(grid);
    for i in 0..grid.len() {
        for j in 0..=i {
            let w = trapezoid_weights_upto(&grid, j);
            let krow = k.row(j);
            let mut v = f.get(j, i);
            for s in 0..=j {
                v += krow[s] * f.get(s, i) * w[s];
            }
            h.row_mut(i)[j] = v.transpose();
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralDatum;

    fn synthetic(nn: i64, delta: f64) -> SpectralData {
        let d = (-nn..=nn)
            .map(|n| SpectralDatum { n, lambda: n as f64, alpha: if n == 0 { PI / (1.0 + PI * delta) } else { PI } })
            .collect();
        SpectralData::new(nn as usize, d).unwrap()
    }

    #[test]
    fn a_form_matches_direct_sum() {
        let d: Vec<SpectralDatum> = (-6i64..=6)
            .map(|n| SpectralDatum {
                n,
                lambda: n as f64 + 0.3 / (1.0 + n.abs() as f64),
                alpha: PI + 0.1 * (n as f64).cos(),
            })
            .collect();
        let s = SpectralData::new(6, d).unwrap();
        let g = Grid::new(24).unwrap();
        for tail in [TailModel::None, TailModel::Asymptotic] {
            let a = build_f(&FKernelSpec { spectral: &s, mode: FMode::AForm, tail }, g);
            let b = build_f(&FKernelSpec { spectral: &s, mode: FMode::DirectSum, tail }, g);
            for i in 0..g.len() {
                for j in 0..g.len() {
                    assert!((a.get(i, j) - b.get(i, j)).max_abs() < 1e-12);
                }
            }
            assert!(a.symmetry_defect() < 1e-13);
        }
    }

    #[test]
    fn rank_one_kernel() {
        let delta = 0.25;
        let s = synthetic(3, delta);
        let g = Grid::new(40).unwrap();
        let f = build_f(&FKernelSpec { spectral: &s, mode: FMode::AForm, tail: TailModel::None }, g);
        for i in 0..g.len() {
            for j in 0..g.len() {
                let e = f.get(i, j) - Matrix2::new(0.0, 0.0, 0.0, delta);
                assert!(e.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bordered_and_dense_agree() {
        let d: Vec<SpectralDatum> = (-5i64..=5)
            .map(|n| SpectralDatum {
                n,
                lambda: n as f64 + 0.2 / (1.0 + n.abs() as f64),
                alpha: PI + 0.3 / (1.0 + n as f64 * n as f64),
            })
            .collect();
        let s = SpectralData::new(5, d).unwrap();
        let g = Grid::new(30).unwrap();
        let f = build_f(&FKernelSpec { spectral: &s, mode: FMode::AForm, tail: TailModel::Asymptotic }, g);
        let a = solve_glm_all_with(&f, GlmMethod::Bordered).unwrap();
        let b = solve_glm_all_with(&f, GlmMethod::DenseRows).unwrap();
        assert!(a.dense_rows.is_empty());
        assert!(a.kernel.max_diff(&b.kernel).unwrap() < 1e-11);
        for (x, y) in a.condition.iter().zip(&b.condition) {
            assert!(x.is_finite() && y.is_finite());
        }
        assert!(glm_residual(&f, &a.kernel).unwrap() < 1e-12);
    }

    #[test]
    fn tail_fit_recovers_model_coefficients() {
        let (c, d, e, g) = (0.35, -0.06, 0.94, 1.8);
        let data: Vec<SpectralDatum> = (-12i64..=12)
            .map(|n| {
                let (lambda, alpha) = if n == 0 {
                    (0.1, 2.0)
                } else {
                    let nf = n as f64;
                    (nf + c / nf + d / (nf * nf), PI + e / nf + g / (nf * nf))
                };
                SpectralDatum { n, lambda, alpha }
            })
            .collect();
        let t = AsymptoticTail::fit(&SpectralData::new(12, data).unwrap()).unwrap();
        for (got, want) in [(t.c, c), (t.d, d), (t.e, e), (t.g, g)] {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn tail_series_identities() {
        let t = AsymptoticTail { truncation: 3, c: 0.0, d: 0.0, e: 0.0, g: 0.0 };
        let m = 16;
        for k in [1i64, 5, 16, 31] {
            let s = k as f64 * PI / m as f64;
            let brute: f64 = (4..200_000).map(|n| (n as f64 * s).sin() / n as f64).sum();
            assert!((t.sine_tail(k, m) - brute).abs() < 1e-4, "k={k}");
            let brute: f64 = (4..200_000).map(|n| (n as f64 * s).cos() / (n as f64).powi(2)).sum();
            assert!((t.cosine_tail(k, m) - brute).abs() < 1e-8);
        }
        assert!((t.sine_tail(32, m) + PI / 2.0).abs() < 1e-12);
        assert_eq!(t.sine_tail(0, m), 0.0);
    }
}
