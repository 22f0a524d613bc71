//! Numerical checks of the spectral identities and the forward/inverse round trip.

use serde::Serialize;

use crate::direct::{char_delta, delta_and_deriv, integrate_phi, DiracProblem};
use crate::error::{Error, Result};
use crate::glm::{FMode, GlmMethod, TailModel};
use crate::grid::{trapezoid_weights, Grid};
use crate::potential::{BoundaryParams, PotentialMatrix};
use crate::recovery::{reconstruct_potential, recover_boundary, BoundaryMethod, InverseDiagnostics, InverseOptions};
use crate::spectral::{GridPair, SpectralData, SpectralDatum, VectorSolution};
use crate::spectrum::{compute_spectral_data, hadamard_delta, SearchOptions};

/// Eigenfunctions `phi(., lambda_n)` for every record of the data.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    grid: Grid,
    h2: f64,
    weights: Vec<f64>,
    funcs: Vec<(SpectralDatum, VectorSolution)>,
}

impl EigenBasis {
    pub fn new(problem: &DiracProblem, spectral: &SpectralData) -> Self {
        let funcs = spectral.records().iter().map(|d| (*d, integrate_phi(problem, d.lambda))).collect();
        let grid = *problem.grid();
        EigenBasis { grid, h2: problem.boundary().h2, weights: trapezoid_weights(&grid), funcs }
    }

    fn check(&self, f: &GridPair) -> Result<()> {
        if f.grid != self.grid {
            return Err(Error::Dimension("test function on a different grid".into()));
        }
        if f.y1.iter().chain(&f.y2).all(|v| *v == 0.0) {
            return Err(Error::ZeroFunction);
        }
        Ok(())
    }

    fn l2_inner(&self, phi: &VectorSolution, f: &GridPair) -> f64 {
        (0..self.grid.len()).map(|j| self.weights[j] * (phi.y1[j] * f.y1[j] + phi.y2[j] * f.y2[j])).sum()
    }

    /// `(n, lambda_n, a_n)` for the chosen pairing.
    fn coefficients(&self, f: &GridPair, pairing: Pairing) -> Vec<(i64, f64, f64)> {
        let m = self.grid.intervals();
        self.funcs
            .iter()
            .map(|(d, phi)| {
                let mut ip = self.l2_inner(phi, f);
                if pairing == Pairing::H {
                    ip += f.y1[m] * phi.y1[m] / self.h2;
                }
                (d.n, d.lambda, ip / d.alpha)
            })
            .collect()
    }
}

/// Inner product used for expansion coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `int f . phi_n dx`.
    L2,
    /// `int f . phi_n dx + f1(pi) phi1_n(pi) / h2`, the inner product in which
    /// the eigenfunctions are orthogonal; needed for uniform convergence up to
    /// `x = pi`.
    H,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParsevalReport {
    pub norm_sq: f64,
    pub coefficient_sum: f64,
    /// `|norm_sq - coefficient_sum| / norm_sq`.
    pub defect: f64,
    pub coefficients: Vec<(i64, f64, f64)>,
}

/// `int |f|^2 = sum alpha_n a_n^2`, `a_n = int f . phi_n / alpha_n`.
pub fn parseval_check(problem: &DiracProblem, spectral: &SpectralData, f: &GridPair) -> Result<ParsevalReport> {
    parseval_with(&EigenBasis::new(problem, spectral), f)
}

pub fn parseval_with(basis: &EigenBasis, f: &GridPair) -> Result<ParsevalReport> {
    basis.check(f)?;
    let norm_sq: f64 = (0..basis.grid.len()).map(|j| basis.weights[j] * (f.y1[j].powi(2) + f.y2[j].powi(2))).sum();
    let coefficients = basis.coefficients(f, Pairing::L2);
    let coefficient_sum = basis.funcs.iter().zip(&coefficients).map(|((d, _), c)| d.alpha * c.2 * c.2).sum::<f64>();
    Ok(ParsevalReport { norm_sq, coefficient_sum, defect: (norm_sq - coefficient_sum).abs() / norm_sq, coefficients })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub pairing: Pairing,
    /// Max over nodes of `|f - sum a_n phi_n|`, per component.
    pub max_error: [f64; 2],
    pub coefficients: Vec<(i64, f64, f64)>,
}

impl ExpansionReport {
    pub fn max(&self) -> f64 {
        self.max_error[0].max(self.max_error[1])
    }
}

/// Truncated eigenfunction expansion of `f`, compared node by node.
pub fn expansion_check(
    problem: &DiracProblem,
    spectral: &SpectralData,
    f: &GridPair,
    pairing: Pairing,
) -> Result<ExpansionReport> {
    expansion_with(&EigenBasis::new(problem, spectral), f, pairing)
}

pub fn expansion_with(basis: &EigenBasis, f: &GridPair, pairing: Pairing) -> Result<ExpansionReport> {
    basis.check(f)?;
    let coefficients = basis.coefficients(f, pairing);
    let mut max_error = [0.0f64; 2];
    for j in 0..basis.grid.len() {
        let (mut s1, mut s2) = (0.0, 0.0);
        for ((_, phi), c) in basis.funcs.iter().zip(&coefficients) {
            s1 += c.2 * phi.y1[j];
            s2 += c.2 * phi.y2[j];
        }
        max_error[0] = max_error[0].max((s1 - f.y1[j]).abs());
        max_error[1] = max_error[1].max((s2 - f.y2[j]).abs());
    }
    Ok(ExpansionReport { pairing, max_error, coefficients })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ZeroSumRow {
    pub truncation: usize,
    /// Max over nodes `x <= cutoff` and both components of the symmetric sum.
    pub max_interior: f64,
    /// The symmetric sum at `x = pi`.
    pub endpoint: [f64; 2],
    /// Same as `max_interior` but summing `0 <= n <= K` only.
    pub one_sided_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroSumReport {
    pub cutoff: f64,
    pub rows: Vec<ZeroSumRow>,
}

/// Partial sums of `sum_n phi(x, lambda_n) / Delta'(lambda_n)` (note
/// `Delta'(lambda_n) = alpha_n beta_n`) over `|n| <= K` for each `K` in
/// `ladder`, measured on `0 <= x <= cutoff`. The series tends to zero for
/// `x < pi`; at `x = pi` its first component tends to 1.
pub fn zero_sum_check(
    problem: &DiracProblem,
    spectral: &SpectralData,
    ladder: &[usize],
    cutoff: f64,
) -> Result<ZeroSumReport> {
    let grid = *problem.grid();
    let mut terms = Vec::with_capacity(spectral.len());
    for d in spectral.records() {
        let (_, dd) = delta_and_deriv(problem, d.lambda);
        if dd.abs() < 1e-8 * d.lambda.abs().max(1.0) {
            return Err(Error::MultipleEigenvalue { lambda: d.lambda, derivative: dd });
        }
        terms.push((d.n, integrate_phi(problem, d.lambda), dd));
    }
    let last = (0..grid.len()).rev().find(|&j| grid.node(j) <= cutoff).unwrap_or(0);
    let mut rows = Vec::with_capacity(ladder.len());
    for &k in ladder {
        if k > spectral.truncation() {
            return Err(Error::InvalidSpectralData(format!("ladder rung {k} exceeds truncation")));
        }
        let sum = |pred: &dyn Fn(i64) -> bool, j: usize| {
            let mut s = [0.0f64; 2];
            for (n, phi, dd) in &terms {
                if pred(*n) {
                    s[0] += phi.y1[j] / dd;
                    s[1] += phi.y2[j] / dd;
                }
            }
            s
        };
        let sym = |n: i64| n.unsigned_abs() as usize <= k;
        let one = |n: i64| n >= 0 && n as usize <= k;
        let mut max_interior = 0.0f64;
        let mut one_sided_max = 0.0f64;
        for j in 0..=last {
            let s = sum(&sym, j);
            max_interior = max_interior.max(s[0].abs()).max(s[1].abs());
            let s = sum(&one, j);
            one_sided_max = one_sided_max.max(s[0].abs()).max(s[1].abs());
        }
        rows.push(ZeroSumRow { truncation: k, max_interior, endpoint: sum(&sym, grid.intervals()), one_sided_max });
    }
    Ok(ZeroSumReport { cutoff, rows })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HadamardRow {
    pub lambda: f64,
    pub shooting: f64,
    pub product: f64,
    pub relative_error: f64,
}

/// Compare the product formula with shooting at the given points.
pub fn hadamard_check(
    problem: &DiracProblem,
    spectral: &SpectralData,
    points: &[f64],
    tail: usize,
) -> Vec<HadamardRow> {
    points
        .iter()
        .map(|&lambda| {
            let shooting = char_delta(problem, lambda);
            let product = hadamard_delta(spectral, lambda, tail);
            HadamardRow { lambda, shooting, product, relative_error: (product - shooting).abs() / shooting.abs() }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundtripOptions {
    pub n_trunc: usize,
    pub search: SearchOptions,
    pub mode: FMode,
    pub tail: TailModel,
    pub method: GlmMethod,
    pub boundary: BoundaryMethod,
}

impl RoundtripOptions {
    pub fn new(n_trunc: usize) -> Self {
        RoundtripOptions {
            n_trunc,
            search: SearchOptions::default(),
            mode: FMode::AForm,
            tail: TailModel::Asymptotic,
            method: GlmMethod::Bordered,
            boundary: BoundaryMethod::LeastSquares,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub truncation: usize,
    pub intervals: usize,
    /// `L2` norm of the error in `(p, q)`.
    pub abs_l2: f64,
    /// `abs_l2 / ||(p, q)||`; equal to `abs_l2` when the true potential vanishes.
    pub rel_l2: f64,
    pub rel_l2_p: f64,
    pub rel_l2_q: f64,
    pub relative: bool,
    pub boundary_true: BoundaryParams,
    pub boundary_fit: BoundaryParams,
    pub h1_error: f64,
    pub h2_error: f64,
    pub boundary_max_residual: f64,
    pub boundary_condition: f64,
    pub diagnostics: InverseDiagnostics,
    pub records: usize,
}

/// Forward problem, then inverse pipeline, then comparison with the truth.
pub fn roundtrip(problem: &DiracProblem, opts: &RoundtripOptions) -> Result<(RoundtripReport, PotentialMatrix)> {
    let spectral = compute_spectral_data(problem, opts.n_trunc, &opts.search).map_err(|e| e.in_stage("direct"))?;
    roundtrip_from_data(problem, &spectral, opts)
}

/// Inverse pipeline on given data, compared against `truth`.
pub fn roundtrip_from_data(
    truth: &DiracProblem,
    spectral: &SpectralData,
    opts: &RoundtripOptions,
) -> Result<(RoundtripReport, PotentialMatrix)> {
    let grid = *truth.grid();
    let inv = InverseOptions { grid, mode: opts.mode, tail: opts.tail, method: opts.method, boundary: opts.boundary };
    let rec = reconstruct_potential(spectral, &inv)?;
    let fit = recover_boundary(spectral, &rec.potential, opts.boundary).map_err(|e| e.in_stage("boundary"))?;
    let w = trapezoid_weights(&grid);
    let (tp, tq) = (truth.potential().p(), truth.potential().q());
    let (rp, rq) = (rec.potential.p(), rec.potential.q());
    let norm = |f: &dyn Fn(usize) -> f64| (0..grid.len()).map(|j| w[j] * f(j).powi(2)).sum::<f64>().sqrt();
    let ep = norm(&|j| rp[j] - tp[j]);
    let eq = norm(&|j| rq[j] - tq[j]);
    let (np, nq) = (norm(&|j| tp[j]), norm(&|j| tq[j]));
    let abs_l2 = (ep * ep + eq * eq).sqrt();
    let total = (np * np + nq * nq).sqrt();
    let guard = |e: f64, n: f64| if n > 0.0 { e / n } else { e };
    let b = truth.boundary();
    let report = RoundtripReport {
        truncation: spectral.truncation(),
        intervals: grid.intervals(),
        abs_l2,
        rel_l2: guard(abs_l2, total),
        rel_l2_p: guard(ep, np),
        rel_l2_q: guard(eq, nq),
        relative: total > 0.0,
        boundary_true: b,
        boundary_fit: fit.params,
        h1_error: (fit.params.h1 - b.h1).abs(),
        h2_error: (fit.params.h2 - b.h2).abs(),
        boundary_max_residual: fit.max_residual(),
        boundary_condition: fit.condition,
        diagnostics: rec.diagnostics,
        records: spectral.len(),
    };
    Ok((report, rec.potential))
}
