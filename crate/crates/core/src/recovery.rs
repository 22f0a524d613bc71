//! Potential and boundary parameters from a solved GLM kernel.

use serde::{Deserialize, Serialize};

use crate::direct::{integrate_phi, DiracProblem};
use crate::error::{Error, Result};
use crate::glm::{build_f, glm_residual, solve_glm_all_with, AsymptoticTail, FKernelSpec, FMode, GlmMethod, TailModel};
use crate::grid::{trapezoid_weights_upto, Grid};
use crate::kernel::{KernelField, SquareKernel};
use crate::linalg::{least_squares_2, solve_dense};
use crate::matrix2::Matrix2;
use crate::potential::{BoundaryParams, PotentialMatrix};
use crate::spectral::SpectralData;

/// `Omega(x) = K(x, x) B - B K(x, x)`; the value at `x = 0` is extrapolated
/// quadratically from the next three nodes.
pub fn potential_from_kernel(k: &KernelField) -> Result<PotentialMatrix> {
    let grid = *k.grid();
    let m = grid.intervals();
    let (mut p, mut q) = (vec![0.0; m + 1], vec![0.0; m + 1]);
    for i in 1..=m {
        let d = k.get(i, i)?;
        let omega = d * Matrix2::B - Matrix2::B * d;
        if !omega.is_finite() {
            return Err(Error::CorruptedKernel { index: i, detail: "non-finite diagonal".into() });
        }
        let scale = omega.max_abs().max(1.0);
        let asym = (omega.m12 - omega.m21).abs();
        let trace = (omega.m11 + omega.m22).abs();
        if asym > 1e-12 * scale || trace > 1e-12 * scale {
            return Err(Error::CorruptedKernel {
                index: i,
                detail: format!("commutator not symmetric trace-free (asym {asym:e}, trace {trace:e})"),
            });
        }
        p[i] = omega.m11;
        q[i] = omega.m12;
    }
    let extrapolate = |v: &[f64]| match m {
        1 => v[1],
        2 => 2.0 * v[1] - v[2],
        _ => 3.0 * v[1] - 3.0 * v[2] + v[3],
    };
    p[0] = extrapolate(&p);
    q[0] = extrapolate(&q);
    PotentialMatrix::new(grid, p, q)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMethod {
    /// Least squares over every record.
    #[default]
    LeastSquares,
    /// Exact solve from the two records closest to `lambda = 0`.
    TwoPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryFit {
    pub params: BoundaryParams,
    /// `(n, lambda_n, (lambda_n + h1) phi1(pi) + h2 phi2(pi))` per record.
    pub residuals: Vec<(i64, f64, f64)>,
    pub condition: f64,
}

impl BoundaryFit {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.2.abs()).fold(0.0, f64::max)
    }
}

/// Fit `(h1, h2)` so that every `lambda_n` is an eigenvalue of the
/// reconstructed potential: `h1 phi1(pi) + h2 phi2(pi) = -lambda_n phi1(pi)`.
pub fn recover_boundary(
    spectral: &SpectralData,
    potential: &PotentialMatrix,
    method: BoundaryMethod,
) -> Result<BoundaryFit> {
    let shooter = DiracProblem::new(potential.clone(), BoundaryParams { h1: 0.0, h2: 1.0 });
    let mut rows = Vec::with_capacity(spectral.len());
    let mut rhs = Vec::with_capacity(spectral.len());
    let mut meta = Vec::with_capacity(spectral.len());
    for d in spectral.records() {
        let end = integrate_phi(&shooter, d.lambda).last();
        rows.push(end);
        rhs.push(-d.lambda * end[0]);
        meta.push((d.n, d.lambda));
    }
    let (x, condition) = match method {
        BoundaryMethod::LeastSquares => {
            let ls =
                least_squares_2(&rows, &rhs).map_err(|e| Error::BoundaryFit(format!("rank-deficient system: {e}")))?;
            (ls.x, ls.condition)
        }
        BoundaryMethod::TwoPoint => {
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.sort_by(|&a, &b| meta[a].1.abs().total_cmp(&meta[b].1.abs()));
            let (a, b) = (order[0], order[1]);
            let sol = solve_dense(&[rows[a][0], rows[a][1], rows[b][0], rows[b][1]], &[rhs[a], rhs[b]])
                .map_err(|e| Error::BoundaryFit(format!("two-point system: {e}")))?;
            ([sol.x[0], sol.x[1]], sol.condition)
        }
    };
    if !(x[1] > 0.0) {
        return Err(Error::BoundaryFit(format!("fitted h2 = {} is not positive", x[1])));
    }
    let params = BoundaryParams::new(x[0], x[1]).map_err(|e| Error::BoundaryFit(e.to_string()))?;
    let residuals =
        meta.iter().zip(&rows).map(|(&(n, l), r)| (n, l, (l + params.h1) * r[0] + params.h2 * r[1])).collect();
    Ok(BoundaryFit { params, residuals, condition })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseOptions {
    pub grid: Grid,
    pub mode: FMode,
    pub tail: TailModel,
    pub method: GlmMethod,
    pub boundary: BoundaryMethod,
}

impl InverseOptions {
    pub fn new(grid: Grid) -> Self {
        InverseOptions {
            grid,
            mode: FMode::AForm,
            tail: TailModel::Asymptotic,
            method: GlmMethod::Bordered,
            boundary: BoundaryMethod::LeastSquares,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InverseDiagnostics {
    pub glm_residual: f64,
    pub max_condition: f64,
    pub condition: Vec<f64>,
    pub dense_rows: Vec<usize>,
    pub tail: Option<AsymptoticTail>,
}

#[derive(Clone, Debug)]
pub struct PotentialReconstruction {
    pub potential: PotentialMatrix,
    pub kernel: KernelField,
    pub f: SquareKernel,
    pub diagnostics: InverseDiagnostics,
}

/// Build `F`, solve for `K`, and read off `Omega`.
pub fn reconstruct_potential(spectral: &SpectralData, opts: &InverseOptions) -> Result<PotentialReconstruction> {
    let spec = FKernelSpec { spectral, mode: opts.mode, tail: opts.tail };
    let f = build_f(&spec, opts.grid);
    let sol = solve_glm_all_with(&f, opts.method).map_err(|e| e.in_stage("glm"))?;
    let residual = glm_residual(&f, &sol.kernel)?;
    let potential = potential_from_kernel(&sol.kernel).map_err(|e| e.in_stage("potential"))?;
    let tail = match opts.tail {
        TailModel::Asymptotic => AsymptoticTail::fit(spectral),
        TailModel::None => None,
    };
    let diagnostics = InverseDiagnostics {
        glm_residual: residual,
        max_condition: sol.max_condition(),
        condition: sol.condition,
        dense_rows: sol.dense_rows,
        tail,
    };
    Ok(PotentialReconstruction { potential, kernel: sol.kernel, f, diagnostics })
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub potential: PotentialMatrix,
    pub boundary: BoundaryFit,
    pub kernel: KernelField,
    pub diagnostics: InverseDiagnostics,
}

/// Full inverse pipeline: potential, then boundary parameters.
pub fn reconstruct(spectral: &SpectralData, opts: &InverseOptions) -> Result<ReconstructionResult> {
    let rec = reconstruct_potential(spectral, opts)?;
    let boundary = recover_boundary(spectral, &rec.potential, opts.boundary).map_err(|e| e.in_stage("boundary"))?;
    Ok(ReconstructionResult { potential: rec.potential, boundary, kernel: rec.kernel, diagnostics: rec.diagnostics })
}

/// `phi(x) = phi0(x) + int_0^x K(x, t) phi0(t) dt` on the grid.
pub fn transformed_solution(k: &KernelField, lambda: f64) -> Vec<[f64; 2]> {
    let grid = *k.grid();
    let phi0: Vec<[f64; 2]> = grid.nodes().iter().map(|&x| [(lambda * x).sin(), -(lambda * x).cos()]).collect();
    (0..grid.len())
        .map(|i| {
            let w = trapezoid_weights_upto(&grid, i);
            let mut v = phi0[i];
            for (j, kij) in k.row(i).iter().enumerate() {
                let kv = kij.mul_vec(phi0[j]);
                v[0] += w[j] * kv[0];
                v[1] += w[j] * kv[1];
            }
            v
        })
        .collect()
}

/// Max over interior nodes of `|B phi' + Omega phi - lambda phi|` for the
/// transformed solution, with central differences for `phi'`.
pub fn transform_ode_residual(k: &KernelField, potential: &PotentialMatrix, lambda: f64) -> Result<f64> {
    if k.grid() != potential.grid() {
        return Err(Error::Dimension("kernel and potential on different grids".into()));
    }
    let phi = transformed_solution(k, lambda);
    let h = k.grid().step();
    let mut worst = 0.0f64;
    for i in 1..k.grid().intervals() {
        let dphi = [(phi[i + 1][0] - phi[i - 1][0]) / (2.0 * h), (phi[i + 1][1] - phi[i - 1][1]) / (2.0 * h)];
        let bd = Matrix2::B.mul_vec(dphi);
        let op = potential.omega(i).mul_vec(phi[i]);
        let r = [bd[0] + op[0] - lambda * phi[i][0], bd[1] + op[1] - lambda * phi[i][1]];
        worst = worst.max(r[0].abs()).max(r[1].abs());
    }
    Ok(worst)
}

/// Max of `|phi(x) + int_0^x H(x, t) phi(t) dt - phi0(x)|` with `phi` from
/// [`transformed_solution`].
pub fn inverse_transform_residual(k: &KernelField, h: &KernelField, lambda: f64) -> Result<f64> {
    if k.grid() != h.grid() {
        return Err(Error::Dimension("K and H on different grids".into()));
    }
    let grid = *k.grid();
    let phi = transformed_solution(k, lambda);
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let w = trapezoid_weights_upto(&grid, i);
        let mut v = phi[i];
        for (j, hij) in h.row(i).iter().enumerate() {
            let hv = hij.mul_vec(phi[j]);
            v[0] += w[j] * hv[0];
            v[1] += w[j] * hv[1];
        }
        let x = grid.node(i);
        worst = worst.max((v[0] - (lambda * x).sin()).abs()).max((v[1] + (lambda * x).cos()).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::build_h;

    /// Data `lambda_n = n`, `alpha_0 = pi / (1 + pi delta)` gives `F = delta E22`,
    /// `K = -delta / (1 + delta x) E22`, `H(x, t) = delta / (1 + delta t) E22`.
    fn rank_one(m: usize, delta: f64) -> (SquareKernel, KernelField) {
        let g = Grid::new(m).unwrap();
        let mut f = SquareKernel::zeros(g);
        for i in 0..g.len() {
            for j in 0..g.len() {
                f.set(i, j, Matrix2::new(0.0, 0.0, 0.0, delta));
            }
        }
        let k = KernelField::from_fn(g, |x, _| Matrix2::new(0.0, 0.0, 0.0, -delta / (1.0 + delta * x)));
        (f, k)
    }

    #[test]
    fn rank_one_potential() {
        let delta = 0.5;
        let (_, k) = rank_one(100, delta);
        let pot = potential_from_kernel(&k).unwrap();
        for i in 0..=100 {
            let x = pot.grid().node(i);
            assert!(pot.p()[i].abs() < 1e-15);
            let tol = if i == 0 { 1e-4 } else { 1e-14 };
            assert!((pot.q()[i] - delta / (1.0 + delta * x)).abs() < tol);
        }
    }

    #[test]
    fn nan_kernel_is_rejected() {
        let g = Grid::new(10).unwrap();
        let mut k = KernelField::zeros(g);
        k.row_mut(4)[4] = Matrix2::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(matches!(potential_from_kernel(&k), Err(Error::CorruptedKernel { index: 4, .. })));
    }

    #[test]
    fn inverse_kernel_closed_form() {
        let delta = 0.5;
        let (f, k) = rank_one(200, delta);
        let h = build_h(&f, &k).unwrap();
        for i in (0..=200).step_by(20) {
            for j in (0..=i).step_by(10) {
                let t = k.grid().node(j);
                let v = h.get(i, j).unwrap();
                assert!((v.m22 - delta / (1.0 + delta * t)).abs() < 1e-5, "{i} {j}");
            }
        }
        let r = inverse_transform_residual(&k, &h, 1.3).unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn transform_residual_shrinks() {
        let delta = 0.5;
        let mut prev = f64::INFINITY;
        for m in [50, 100, 200] {
            let (_, k) = rank_one(m, delta);
            let pot = potential_from_kernel(&k).unwrap();
            let r = transform_ode_residual(&k, &pot, 2.0).unwrap();
            assert!(r < prev / 2.0, "m={m} r={r} prev={prev}");
            prev = r;
        }
    }
}
