//! Eigenvalues, normalizing numbers and related diagnostics.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::direct::{char_delta, delta_and_deriv, integrate_phi, integrate_psi, DiracProblem};
use crate::error::{Error, Result};
use crate::grid::Quadrature;
use crate::spectral::{SpectralData, SpectralDatum, VectorSolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Eigenvalue `n` is searched for in `(n - w, n + w]`.
    pub window_half_width: f64,
    pub samples_per_window: usize,
    /// Windows with `|n|` up to this value are searched jointly.
    pub low_index_guard: usize,
    /// Bisection stops at this bracket width, then secant steps take over.
    pub bisect_width: f64,
    /// Target `|Delta(lambda)| <= residual_tol * max(1, |lambda|)`.
    pub residual_tol: f64,
    pub quadrature: Quadrature,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            window_half_width: 0.5,
            samples_per_window: 64,
            low_index_guard: 2,
            bisect_width: 1e-8,
            residual_tol: 1e-12,
            quadrature: Quadrature::Trapezoid,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub n: i64,
    pub lambda: f64,
}

fn refine(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, opts: &SearchOptions) -> f64 {
    let tol = |x: f64| opts.residual_tol * x.abs().max(1.0);
    while b - a > opts.bisect_width {
        let c = 0.5 * (a + b);
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
    }
    let (mut best, mut fbest) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..60 {
        if fbest.abs() <= tol(best) || b - a <= 4.0 * f64::EPSILON * b.abs().max(a.abs()) {
            break;
        }
        let mut c = b - fb * (b - a) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc.abs() < fbest.abs() {
            best = c;
            fbest = fc;
        }
        if fc == 0.0 {
            break;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
    }
    best
}

/// Roots of `Delta` in `[-N - w, N + w]`, labelled by window.
///
/// Away from zero each window `(n - w, n + w]` holds one root. The windows
/// with `|n| <= g` (`g` = low-index guard, widened if an outer window is
/// irregular) are labelled jointly: `2g + 1` roots map to `-g..=g`, and
/// `2g + 2` roots map to `-g..=g` with index 0 used twice.
pub fn locate_eigenvalues(problem: &DiracProblem, n_trunc: usize, opts: &SearchOptions) -> Result<Vec<Eigenvalue>> {
    let w = opts.window_half_width;
    let half = n_trunc as f64 + w;
    let count = ((2.0 * half) * opts.samples_per_window as f64).round().max(2.0) as usize;
    let lam = |k: usize| -half + 2.0 * half * k as f64 / count as f64;
    let f = |x: f64| char_delta(problem, x);
    let values: Vec<f64> = (0..=count).map(|k| f(lam(k))).collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "Delta sample", index: k });
    }
    let mut roots = Vec::new();
    let mut k = 0;
    while k < count {
        if values[k] == 0.0 {
            roots.push(lam(k));
            k += 1;
            continue;
        }
        if values[k + 1] != 0.0 && (values[k] < 0.0) != (values[k + 1] < 0.0) {
            roots.push(refine(&f, lam(k), lam(k + 1), values[k], values[k + 1], opts));
        }
        k += 1;
    }
    if values[count] == 0.0 {
        roots.push(lam(count));
    }
    label_roots(&roots, n_trunc, opts)
}

fn label_roots(roots: &[f64], n_trunc: usize, opts: &SearchOptions) -> Result<Vec<Eigenvalue>> {
    let w = opts.window_half_width;
    let nn = n_trunc as i64;
    let searched = format!("{} windows of half-width {w} around -{n_trunc}..={n_trunc}", 2 * n_trunc + 1);
    let window = |x: f64| {
        let n = x.round() as i64;
        if (x - n as f64).abs() <= w {
            Some(n)
        } else {
            None
        }
    };
    let mut guard = opts.low_index_guard.min(n_trunc) as i64;
    loop {
        let mut widen = None;
        for n in (guard + 1)..=nn {
            for s in [n, -n] {
                let c = roots.iter().filter(|&&x| window(x) == Some(s)).count();
                if c != 1 {
                    widen = Some(n);
                }
            }
        }
        for &x in roots {
            if window(x).is_none() && x.abs() > guard as f64 + w {
                widen = Some(widen.unwrap_or(0).max(x.abs().ceil() as i64).min(nn));
            }
        }
        match widen {
            Some(n) if n > guard => guard = n,
            _ => break,
        }
    }
    let inner: Vec<f64> = roots.iter().copied().filter(|x| x.abs() <= guard as f64 + w).collect();
    let g = guard as usize;
    let labels: Vec<i64> = if inner.len() == 2 * g + 1 {
        (-guard..=guard).collect()
    } else if inner.len() == 2 * g + 2 {
        (-guard..=0).chain(0..=guard).collect()
    } else {
        return Err(Error::EigenSearch {
            reason: format!(
                "found {} roots in the central region |lambda| <= {}, expected {} or {}",
                inner.len(),
                guard as f64 + w,
                2 * g + 1,
                2 * g + 2
            ),
            searched,
        });
    };
    let mut out: Vec<Eigenvalue> = inner.iter().zip(labels).map(|(&lambda, n)| Eigenvalue { n, lambda }).collect();
    for &x in roots {
        if x.abs() > guard as f64 + w {
            match window(x) {
                Some(n) => out.push(Eigenvalue { n, lambda: x }),
                None => {
                    return Err(Error::EigenSearch { reason: format!("root {x} lies outside every window"), searched })
                }
            }
        }
    }
    if out.len() < 2 * n_trunc + 1 {
        return Err(Error::EigenSearch {
            reason: format!("found {} roots, need at least {}", out.len(), 2 * n_trunc + 1),
            searched,
        });
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

/// `alpha = int |phi|^2 dx + phi1(pi)^2 / h2` from a computed solution.
pub fn alpha_from_solution(phi: &VectorSolution, h2: f64, quadrature: Quadrature) -> Result<f64> {
    let w = quadrature.weights(&phi.grid)?;
    let integral: f64 = w.iter().enumerate().map(|(j, w)| w * (phi.y1[j].powi(2) + phi.y2[j].powi(2))).sum();
    Ok(integral + phi.last()[0].powi(2) / h2)
}

/// Normalizing number with the trapezoid rule.
pub fn normalizing_number(problem: &DiracProblem, lambda: f64) -> f64 {
    let phi = integrate_phi(problem, lambda);
    alpha_from_solution(&phi, problem.boundary().h2, Quadrature::Trapezoid)
        .expect("trapezoid weights exist on every grid")
}

pub fn normalizing_number_with(problem: &DiracProblem, lambda: f64, quadrature: Quadrature) -> Result<f64> {
    let phi = integrate_phi(problem, lambda);
    alpha_from_solution(&phi, problem.boundary().h2, quadrature)
}

/// Eigenvalues and normalizing numbers for `|n| <= N`.
pub fn compute_spectral_data(problem: &DiracProblem, n_trunc: usize, opts: &SearchOptions) -> Result<SpectralData> {
    let eig = locate_eigenvalues(problem, n_trunc, opts)?;
    let mut data = Vec::with_capacity(eig.len());
    for e in eig {
        let alpha = normalizing_number_with(problem, e.lambda, opts.quadrature)?;
        data.push(SpectralDatum { n: e.n, lambda: e.lambda, alpha });
    }
    SpectralData::new(n_trunc, data)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BetaReport {
    /// `-psi2(0, lambda_n)`.
    pub beta: f64,
    pub delta_dot: f64,
    /// `|Delta'(lambda_n) - beta alpha| / |Delta'(lambda_n)|`.
    pub discrepancy: f64,
}

/// `beta_n` with `psi(x, lambda_n) = beta_n phi(x, lambda_n)`, cross-checked
/// against `Delta'(lambda_n) = beta_n alpha_n`.
pub fn beta_coefficient(problem: &DiracProblem, lambda: f64, alpha: f64) -> Result<BetaReport> {
    let psi = integrate_psi(problem, lambda);
    let beta = -psi.y2[0];
    let (_, delta_dot) = delta_and_deriv(problem, lambda);
    if delta_dot.abs() < 1e-8 * lambda.abs().max(1.0) {
        return Err(Error::MultipleEigenvalue { lambda, derivative: delta_dot });
    }
    let discrepancy = (delta_dot - beta * alpha).abs() / delta_dot.abs();
    Ok(BetaReport { beta, delta_dot, discrepancy })
}

/// Default cut-off for the free tail factor in [`hadamard_delta`].
pub const HADAMARD_TAIL: usize = 10_000;

/// `Delta(lambda)` rebuilt from the eigenvalues alone:
///
/// `pi (mu_0 - lambda)(mu_0' - lambda) prod_{n>=1} (mu_n - lambda)(lambda - mu_{-n}) / n^2`
///
/// times the free factor `prod_{n=N+1}^{tail} (1 - lambda^2 / n^2)`. With a
/// single zero-index record, `mu_0' = -mu_0`.
pub fn hadamard_delta(spectral: &SpectralData, lambda: f64, tail: usize) -> f64 {
    let zeros = spectral.zero_block();
    let mut prod = PI * (zeros[0].lambda - lambda);
    prod *= match zeros.get(1) {
        Some(z) => z.lambda - lambda,
        None => -zeros[0].lambda - lambda,
    };
    for n in 1..=spectral.truncation() as i64 {
        let (Some(up), Some(down)) = (spectral.get(n), spectral.get(-n)) else { continue };
        prod *= (up.lambda - lambda) * (lambda - down.lambda) / (n * n) as f64;
    }
    prod * free_tail(spectral.truncation(), tail, lambda)
}

/// The even product `-pi (lambda_0^2 - lambda^2) prod (lambda_n^2 - lambda^2) / n^2`
/// over `n >= 1` only; exact when `Delta` is even.
pub fn hadamard_delta_even(spectral: &SpectralData, lambda: f64, tail: usize) -> f64 {
    let l0 = spectral
        .zero_block()
        .iter()
        .map(|d| d.lambda)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .expect("spectral data always has a zero-index record");
    let mut prod = -PI * (l0 * l0 - lambda * lambda);
    for n in 1..=spectral.truncation() as i64 {
        if let Some(d) = spectral.get(n) {
            prod *= (d.lambda * d.lambda - lambda * lambda) / (n * n) as f64;
        }
    }
    prod * free_tail(spectral.truncation(), tail, lambda)
}

fn free_tail(from: usize, to: usize, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    ((from + 1)..=to).map(|n| 1.0 - l2 / (n * n) as f64).product()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AsymptoticsRow {
    pub n: i64,
    pub lambda: f64,
    pub alpha: f64,
    /// `lambda_n - n`.
    pub epsilon: f64,
    /// `alpha_n - pi`.
    pub tau: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub rows: Vec<AsymptoticsRow>,
    /// Entry `k` is the sum of `epsilon_n^2` over `|n| <= k`.
    pub eps_partial: Vec<f64>,
    pub tau_partial: Vec<f64>,
}

impl AsymptoticsReport {
    /// Relative change of the partial sums between truncations `k` and `N`.
    pub fn plateau(&self, k: usize) -> (f64, f64) {
        let n = self.eps_partial.len() - 1;
        let rel = |s: &[f64]| (s[n] - s[k]).abs() / s[n].abs().max(f64::MIN_POSITIVE);
        (rel(&self.eps_partial), rel(&self.tau_partial))
    }
}

pub fn asymptotics_report(spectral: &SpectralData) -> AsymptoticsReport {
    let rows: Vec<AsymptoticsRow> = spectral
        .records()
        .iter()
        .map(|d| AsymptoticsRow {
            n: d.n,
            lambda: d.lambda,
            alpha: d.alpha,
            epsilon: d.lambda - d.n as f64,
            tau: d.alpha - PI,
        })
        .collect();
    let nn = spectral.truncation();
    let (mut eps_partial, mut tau_partial) = (vec![0.0; nn + 1], vec![0.0; nn + 1]);
    for r in &rows {
        let k = r.n.unsigned_abs() as usize;
        eps_partial[k] += r.epsilon * r.epsilon;
        tau_partial[k] += r.tau * r.tau;
    }
    for k in 1..=nn {
        eps_partial[k] += eps_partial[k - 1];
        tau_partial[k] += tau_partial[k - 1];
    }
    AsymptoticsReport { rows, eps_partial, tau_partial }
}

impl fmt::Display for AsymptoticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6} {:>20} {:>20} {:>14} {:>14}", "n", "lambda", "alpha", "eps", "tau")?;
        for r in &self.rows {
            writeln!(f, "{:>6} {:>20.12} {:>20.12} {:>14.6e} {:>14.6e}", r.n, r.lambda, r.alpha, r.epsilon, r.tau)?;
        }
        let n = self.eps_partial.len() - 1;
        write!(f, "sum eps^2 = {:.8e}, sum tau^2 = {:.8e} (|n| <= {n})", self.eps_partial[n], self.tau_partial[n])
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenRow {
    pub n: i64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta_dot: f64,
    pub epsilon: f64,
    pub tau: f64,
    /// `|Delta(lambda_n)|`.
    pub delta_residual: f64,
    pub beta_discrepancy: f64,
}

#[derive(Clone, Debug)]
pub struct EigenReport {
    pub spectral: SpectralData,
    pub rows: Vec<EigenRow>,
    pub asymptotics: AsymptoticsReport,
}

pub fn eigen_report(problem: &DiracProblem, n_trunc: usize, opts: &SearchOptions) -> Result<EigenReport> {
    let spectral = compute_spectral_data(problem, n_trunc, opts)?;
    let mut rows = Vec::with_capacity(spectral.len());
    for d in spectral.records() {
        let b = beta_coefficient(problem, d.lambda, d.alpha)?;
        rows.push(EigenRow {
            n: d.n,
            lambda: d.lambda,
            alpha: d.alpha,
            beta: b.beta,
            delta_dot: b.delta_dot,
            epsilon: d.lambda - d.n as f64,
            tau: d.alpha - PI,
            delta_residual: char_delta(problem, d.lambda).abs(),
            beta_discrepancy: b.discrepancy,
        });
    }
    let asymptotics = asymptotics_report(&spectral);
    Ok(EigenReport { spectral, rows, asymptotics })
}
