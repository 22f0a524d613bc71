//! Shooting for the Dirac system `B y' + Omega y = lambda y` on `[0, pi]`.
//!
//! Fixed-step classical RK4 on the grid. Each grid interval is split into
//! `ceil(|lambda| h / max_phase_step)` substeps so the phase advance per step
//! stays bounded at large `|lambda|`; the potential between nodes comes from
//! cubic interpolation. Outputs always land on grid nodes.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{BoundaryParams, PotentialMatrix};
use crate::spectral::VectorSolution;

/// Default bound on `|lambda|` times the RK4 step.
pub const DEFAULT_MAX_PHASE_STEP: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct DiracProblem {
    potential: PotentialMatrix,
    boundary: BoundaryParams,
    max_phase_step: f64,
}

impl DiracProblem {
    pub fn new(potential: PotentialMatrix, boundary: BoundaryParams) -> Self {
        DiracProblem { potential, boundary, max_phase_step: DEFAULT_MAX_PHASE_STEP }
    }

    /// `f64::INFINITY` gives exactly one RK4 step per grid interval.
    pub fn with_max_phase_step(mut self, theta: f64) -> Self {
        self.max_phase_step = theta;
        self
    }

    pub fn grid(&self) -> &Grid {
        self.potential.grid()
    }

    pub fn potential(&self) -> &PotentialMatrix {
        &self.potential
    }

    pub fn boundary(&self) -> BoundaryParams {
        self.boundary
    }

    pub fn substeps(&self, lambda: f64) -> usize {
        let phase = lambda.abs() * self.grid().step();
        ((phase / self.max_phase_step).ceil() as usize).max(1)
    }

    fn pq(&self, i: usize, tau: f64) -> (f64, f64) {
        if tau >= 1.0 {
            self.potential.sample(i + 1, 0.0)
        } else {
            self.potential.sample(i, tau)
        }
    }

    /// RK4 over the whole grid; `record(j, y)` sees the state at node `j`.
    fn march<const D: usize>(
        &self,
        lambda: f64,
        forward: bool,
        y0: [f64; D],
        f: impl Fn(f64, f64, &[f64; D]) -> [f64; D],
        mut record: impl FnMut(usize, &[f64; D]),
    ) -> [f64; D] {
        let m = self.grid().intervals();
        let s_count = self.substeps(lambda);
        let hs = self.grid().step() / s_count as f64;
        let dt = if forward { hs } else { -hs };
        let mut y = y0;
        record(if forward { 0 } else { m }, &y);
        let axpy = |y: &[f64; D], k: &[f64; D], c: f64| {
            let mut out = *y;
            for (o, k) in out.iter_mut().zip(k) {
                *o += c * k;
            }
            out
        };
        for step in 0..m {
            let i = if forward { step } else { m - 1 - step };
            for s in 0..s_count {
                let (t0, t1) = if forward {
                    (s as f64 / s_count as f64, (s + 1) as f64 / s_count as f64)
                } else {
                    (1.0 - s as f64 / s_count as f64, 1.0 - (s + 1) as f64 / s_count as f64)
                };
                let (p0, q0) = self.pq(i, t0);
                let (pm, qm) = self.pq(i, 0.5 * (t0 + t1));
                let (p1, q1) = self.pq(i, t1);
                let k1 = f(p0, q0, &y);
                let k2 = f(pm, qm, &axpy(&y, &k1, 0.5 * dt));
                let k3 = f(pm, qm, &axpy(&y, &k2, 0.5 * dt));
                let k4 = f(p1, q1, &axpy(&y, &k3, dt));
                for d in 0..D {
                    y[d] += dt / 6.0 * (k1[d] + 2.0 * (k2[d] + k3[d]) + k4[d]);
                }
            }
            record(if forward { i + 1 } else { i }, &y);
        }
        y
    }

    fn solution(&self, lambda: f64, forward: bool, y0: [f64; 2]) -> VectorSolution {
        let n = self.grid().len();
        let (mut y1, mut y2) = (vec![0.0; n], vec![0.0; n]);
        self.march(
            lambda,
            forward,
            y0,
            |p, q, y| rhs(p, q, lambda, y),
            |j, y| {
                y1[j] = y[0];
                y2[j] = y[1];
            },
        );
        VectorSolution { lambda, grid: *self.grid(), y1, y2 }
    }

    fn phi_end(&self, lambda: f64) -> [f64; 2] {
        self.march(lambda, true, [0.0, -1.0], |p, q, y| rhs(p, q, lambda, y), |_, _| {})
    }

    fn delta_from(&self, lambda: f64, end: [f64; 2]) -> f64 {
        (lambda + self.boundary.h1) * end[0] + self.boundary.h2 * end[1]
    }
}

#[inline(always)]
fn rhs(p: f64, q: f64, lambda: f64, y: &[f64; 2]) -> [f64; 2] {
    [q * y[0] - (p + lambda) * y[1], (lambda - p) * y[0] - q * y[1]]
}

/// `phi(x, lambda)` with `phi(0) = (0, -1)`.
pub fn integrate_phi(problem: &DiracProblem, lambda: f64) -> VectorSolution {
    problem.solution(lambda, true, [0.0, -1.0])
}

/// `psi(x, lambda)` with `psi(pi) = (h2, -lambda - h1)`, integrated backward.
pub fn integrate_psi(problem: &DiracProblem, lambda: f64) -> VectorSolution {
    let b = problem.boundary();
    problem.solution(lambda, false, [b.h2, -lambda - b.h1])
}

/// `Delta(lambda) = (lambda + h1) phi1(pi) + h2 phi2(pi)`.
pub fn char_delta(problem: &DiracProblem, lambda: f64) -> f64 {
    problem.delta_from(lambda, problem.phi_end(lambda))
}

/// `Delta` and its `lambda`-derivative from the variational system
/// `B z' + Omega z = lambda z + phi`, `z(0) = 0`.
pub fn delta_and_deriv(problem: &DiracProblem, lambda: f64) -> (f64, f64) {
    let y = problem.march(
        lambda,
        true,
        [0.0, -1.0, 0.0, 0.0],
        |p, q, y| {
            let a = rhs(p, q, lambda, &[y[0], y[1]]);
            let b = rhs(p, q, lambda, &[y[2], y[3]]);
            [a[0], a[1], b[0] - y[1], b[1] + y[0]]
        },
        |_, _| {},
    );
    let h = problem.boundary();
    let delta = problem.delta_from(lambda, [y[0], y[1]]);
    let deriv = y[0] + (lambda + h.h1) * y[2] + h.h2 * y[3];
    (delta, deriv)
}

pub fn char_delta_deriv(problem: &DiracProblem, lambda: f64) -> f64 {
    delta_and_deriv(problem, lambda).1
}

/// Central-difference derivative with step `1e-6 max(1, |lambda|)`.
pub fn char_delta_deriv_fd(problem: &DiracProblem, lambda: f64) -> f64 {
    let d = 1e-6 * lambda.abs().max(1.0);
    (char_delta(problem, lambda + d) - char_delta(problem, lambda - d)) / (2.0 * d)
}

#[derive(Clone, Copy, Debug)]
pub struct WronskianReport {
    /// `max_x |W(x) - W(pi)|`.
    pub residual: f64,
    /// `W(pi)`, which equals `Delta(lambda)`.
    pub w_end: f64,
    pub delta: f64,
}

/// Constancy of `W = phi2 psi1 - phi1 psi2` along the grid.
pub fn wronskian_residual(
    phi: &VectorSolution,
    psi: &VectorSolution,
    boundary: BoundaryParams,
) -> Result<WronskianReport> {
    if phi.grid != psi.grid {
        return Err(Error::Dimension("phi and psi on different grids".into()));
    }
    if phi.lambda != psi.lambda {
        return Err(Error::Dimension(format!("phi at lambda = {}, psi at lambda = {}", phi.lambda, psi.lambda)));
    }
    let w = |j: usize| phi.y2[j] * psi.y1[j] - phi.y1[j] * psi.y2[j];
    let m = phi.grid.intervals();
    let w_end = w(m);
    let residual = (0..=m).map(|j| (w(j) - w_end).abs()).fold(0.0, f64::max);
    let end = phi.last();
    let delta = (phi.lambda + boundary.h1) * end[0] + boundary.h2 * end[1];
    Ok(WronskianReport { residual, w_end, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(m: usize, h1: f64, h2: f64) -> DiracProblem {
        let g = Grid::new(m).unwrap();
        DiracProblem::new(PotentialMatrix::zero(g), BoundaryParams::new(h1, h2).unwrap())
    }

    #[test]
    fn free_solution_is_trigonometric() {
        let pr = free(200, 0.0, 1.0);
        let sol = integrate_phi(&pr, 2.7);
        for j in (0..=200).step_by(17) {
            let x = pr.grid().node(j);
            assert!((sol.y1[j] - (2.7 * x).sin()).abs() < 1e-6);
            assert!((sol.y2[j] + (2.7 * x).cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn variational_matches_finite_difference() {
        let g = Grid::new(300).unwrap();
        let pot = PotentialMatrix::from_fn(g, |x| 0.3 * x.cos(), |x| 0.2 * (2.0 * x).sin()).unwrap();
        let pr = DiracProblem::new(pot, BoundaryParams::new(0.5, 1.0).unwrap());
        for lambda in [-3.3, 0.1, 4.6] {
            let a = char_delta_deriv(&pr, lambda);
            let b = char_delta_deriv_fd(&pr, lambda);
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{lambda}: {a} vs {b}");
        }
    }

    #[test]
    fn free_delta_closed_form() {
        let pr = free(400, 0.5, 1.0);
        for lambda in [-2.2, 0.7, 3.9] {
            let exact = (lambda + 0.5) * (lambda * std::f64::consts::PI).sin() - (lambda * std::f64::consts::PI).cos();
            assert!((char_delta(&pr, lambda) - exact).abs() < 2e-6);
        }
    }

    #[test]
    fn wronskian_checks_inputs() {
        let pr = free(50, 0.0, 1.0);
        let a = integrate_phi(&pr, 1.0);
        let b = integrate_psi(&pr, 1.5);
        assert!(wronskian_residual(&a, &b, pr.boundary()).is_err());
        let b = integrate_psi(&pr, 1.0);
        let r = wronskian_residual(&a, &b, pr.boundary()).unwrap();
        assert!(r.residual < 1e-9);
        assert!((r.w_end - r.delta).abs() < 1e-9);
    }
}
