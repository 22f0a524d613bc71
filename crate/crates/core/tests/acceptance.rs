//! Acceptance criteria. All criteria run sequentially inside one test so the
//! runtime budgets are measured without competing test threads; each prints
//! one PASS/FAIL line. Set `ACCEPTANCE_ONLY=3,7` to run a subset.

use std::f64::consts::PI;
use std::time::Instant;

use dirac_spectral::direct::{char_delta, integrate_phi, DiracProblem};
use dirac_spectral::glm::{build_f, glm_residual, solve_glm_all, FKernelSpec, FMode, TailModel};
use dirac_spectral::recovery::potential_from_kernel;
use dirac_spectral::spectrum::{
    asymptotics_report, beta_coefficient, compute_spectral_data, SearchOptions, HADAMARD_TAIL,
};
use dirac_spectral::verify::{
    expansion_check, hadamard_check, parseval_check, roundtrip, zero_sum_check, Pairing, RoundtripOptions,
};
use dirac_spectral::{BoundaryParams, Grid, GridPair, PotentialMatrix, SpectralData, SpectralDatum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn trig(m: usize, h1: f64, h2: f64) -> DiracProblem {
    let g = Grid::new(m).unwrap();
    let pot = PotentialMatrix::from_fn(g, |x| 0.3 * x.cos(), |x| 0.2 * (2.0 * x).sin()).unwrap();
    DiracProblem::new(pot, BoundaryParams::new(h1, h2).unwrap())
}

fn free(m: usize) -> DiracProblem {
    DiracProblem::new(PotentialMatrix::zero(Grid::new(m).unwrap()), BoundaryParams::new(0.0, 1.0).unwrap())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Constant `p = p0`, `q = 0`: `phi1 = (lambda + p0) sin(nu x) / nu`,
/// `phi2 = -cos(nu x)`, `nu^2 = lambda^2 - p0^2` (hyperbolic when negative).
fn constant_closed_form(lambda: f64, p0: f64, x: f64) -> [f64; 2] {
    let nu2 = lambda * lambda - p0 * p0;
    if nu2 > 0.0 {
        let nu = nu2.sqrt();
        [(lambda + p0) * (nu * x).sin() / nu, -(nu * x).cos()]
    } else if nu2 < 0.0 {
        let mu = (-nu2).sqrt();
        [(lambda + p0) * (mu * x).sinh() / mu, -(mu * x).cosh()]
    } else {
        [(lambda + p0) * x, -1.0]
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let p0 = 0.5;
    let lambdas = [-5.0, -3.7, -1.2, -0.2, 0.0, 0.45, 1.9, 3.3, 5.0];
    let mut errs = Vec::new();
    for m in [500, 1000, 2000] {
        let g = Grid::new(m).unwrap();
        let pr = DiracProblem::new(
            PotentialMatrix::from_fn(g, |_| p0, |_| 0.0).unwrap(),
            BoundaryParams::new(0.0, 1.0).unwrap(),
        );
        let mut worst = 0.0f64;
        for &l in &lambdas {
            let sol = integrate_phi(&pr, l);
            for j in 0..g.len() {
                let e = constant_closed_form(l, p0, g.node(j));
                worst = worst.max((sol.y1[j] - e[0]).abs()).max((sol.y2[j] - e[1]).abs());
            }
        }
        errs.push(worst);
    }
    let secs = start.elapsed().as_secs_f64();
    let (r1, r2) = (errs[0] / errs[1], errs[1] / errs[2]);
    let in_band = |r: f64| (16.0 * 0.7..=16.0 * 1.3).contains(&r);
    check(
        errs[2] <= 1e-8 && in_band(r1) && in_band(r2) && secs < 1.0,
        format!("err(M=2000) = {:.2e}, ratios {r1:.2} {r2:.2}, {secs:.2} s", errs[2]),
    )
}

fn trig_data_60() -> (DiracProblem, SpectralData, f64) {
    let start = Instant::now();
    let pr = trig(500, 0.5, 1.0);
    let s = compute_spectral_data(&pr, 60, &SearchOptions::default()).unwrap();
    (pr, s, start.elapsed().as_secs_f64())
}

fn criterion_2(pr: &DiracProblem, s: &SpectralData, secs: f64) -> Outcome {
    let outside: Vec<i64> = s
        .records()
        .iter()
        .filter(|d| (3..=40).contains(&d.n.abs()) && !((d.n as f64 - 0.5) < d.lambda && d.lambda < d.n as f64 + 0.5))
        .map(|d| d.n)
        .collect();
    let worst_delta = s.records().iter().map(|d| char_delta(pr, d.lambda).abs()).fold(0.0, f64::max);
    let rep = asymptotics_report(s);
    let (eps_rel, _) = rep.plateau(30);
    check(
        outside.is_empty() && worst_delta <= 1e-10 && eps_rel <= 0.01 && secs < 30.0,
        format!(
            "windows violated {outside:?}, max |Delta(lambda_n)| = {worst_delta:.2e}, \
             sum eps^2: N=30 {:.6} N=60 {:.6} (rel {eps_rel:.2e}), {secs:.1} s",
            rep.eps_partial[30], rep.eps_partial[60]
        ),
    )
}

fn criterion_3(s: &SpectralData) -> Outcome {
    let worst = s.records().iter().filter(|d| d.n.abs() >= 5).map(|d| (d.alpha - PI).abs()).fold(0.0, f64::max);
    let over: Vec<String> = s
        .records()
        .iter()
        .filter(|d| d.n.abs() >= 5 && (d.alpha - PI).abs() > 0.2)
        .map(|d| format!("n={}: {:.4}", d.n, d.alpha - PI))
        .collect();
    let rep = asymptotics_report(s);
    let (_, tau_rel) = rep.plateau(30);
    check(
        worst <= 0.2 && tau_rel <= 0.01,
        format!(
            "max |alpha_n - pi| (|n|>=5) = {worst:.4} {over:?}, sum tau^2: N=30 {:.6} N=60 {:.6} (rel {tau_rel:.2e})",
            rep.tau_partial[30], rep.tau_partial[60]
        ),
    )
}

fn criterion_4() -> Outcome {
    let pr = trig(2000, 0.5, 1.0);
    let s = compute_spectral_data(&pr, 20, &SearchOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for d in s.records() {
        let b = beta_coefficient(&pr, d.lambda, d.alpha).map_err(|e| e.to_string())?;
        worst = worst.max(b.discrepancy);
    }
    check(worst <= 1e-6, format!("max |Delta' - beta alpha| / |Delta'| = {worst:.2e} over {} records", s.len()))
}

fn criterion_5() -> Outcome {
    let pr = trig(500, 0.5, 1.0);
    let opts = SearchOptions { samples_per_window: 16, ..SearchOptions::default() };
    let s = compute_spectral_data(&pr, 200, &opts).unwrap();
    let pts: Vec<f64> = (0..=5).map(|k| k as f64 + 0.5).collect();
    let rows = hadamard_check(&pr, &s, &pts, HADAMARD_TAIL);
    let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    check(worst <= 1e-2, format!("max relative error at k+1/2, k=0..5: {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let delta = 1.0 / (PI + 0.5) - 1.0 / PI;
    let g = Grid::new(400).unwrap();
    let mut worst = 0.0f64;
    let mut worst_res = 0.0f64;
    // The budget is per recovery; the residual oracle is outside the timed region.
    let mut slowest = 0.0f64;
    for nn in [1i64, 2, 7, 20] {
        let d = (-nn..=nn)
            .map(|n| SpectralDatum { n, lambda: n as f64, alpha: if n == 0 { PI + 0.5 } else { PI } })
            .collect();
        let s = SpectralData::new(nn as usize, d).unwrap();
        for mode in [FMode::AForm, FMode::DirectSum] {
            let start = Instant::now();
            let f = build_f(&FKernelSpec { spectral: &s, mode, tail: TailModel::Asymptotic }, g);
            let sol = solve_glm_all(&f).map_err(|e| e.to_string())?;
            let pot = potential_from_kernel(&sol.kernel).map_err(|e| e.to_string())?;
            slowest = slowest.max(start.elapsed().as_secs_f64());
            worst_res = worst_res.max(glm_residual(&f, &sol.kernel).unwrap());
            for j in 0..g.len() {
                let x = g.node(j);
                worst = worst.max(pot.p()[j].abs()).max((pot.q()[j] - delta / (1.0 + delta * x)).abs());
            }
        }
    }
    check(
        worst <= 1e-6 && worst_res <= 1e-10 && slowest < 5.0,
        format!(
            "max-node error {worst:.2e} for N in {{1,2,7,20}}, GLM residual {worst_res:.1e}, slowest solve {slowest:.2} s"
        ),
    )
}

struct RoundtripSummary {
    outcome: Outcome,
    residuals: Vec<f64>,
    conditions: Vec<f64>,
}

fn criterion_7() -> RoundtripSummary {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut ladder = Vec::new();
    let mut residuals = Vec::new();
    let mut conditions = Vec::new();
    for (nn, m) in [(40, 400), (10, 200), (20, 400), (40, 800)] {
        let pr = trig(m, 0.5, 1.0);
        match roundtrip(&pr, &RoundtripOptions::new(nn)) {
            Ok((rep, _)) => {
                lines.push(format!(
                    "(N={nn},M={m}) rel {:.2e} h1 {:.4} h2 {:.4}",
                    rep.rel_l2, rep.boundary_fit.h1, rep.boundary_fit.h2
                ));
                residuals.push(rep.diagnostics.glm_residual);
                conditions.push(rep.diagnostics.max_condition);
                if (nn, m) == (40, 400) {
                    ok &= rep.rel_l2 <= 0.05 && rep.h1_error <= 0.05 && rep.h2_error <= 0.05;
                } else {
                    ladder.push(rep.rel_l2);
                }
            }
            Err(e) => {
                ok = false;
                lines.push(format!("(N={nn},M={m}) failed: {e}"));
            }
        }
    }
    let monotone = ladder.len() == 3 && ladder.windows(2).all(|w| w[1] <= w[0]);
    let secs = start.elapsed().as_secs_f64();
    ok &= monotone && secs < 300.0;
    let detail = format!("{}; ladder non-increasing: {monotone}; {secs:.1} s", lines.join(", "));
    RoundtripSummary { outcome: check(ok, detail), residuals, conditions }
}

fn criterion_8(rt: &RoundtripSummary) -> Outcome {
    let res = rt.residuals.iter().copied().fold(0.0, f64::max);
    let cond = rt.conditions.iter().copied().fold(0.0, f64::max);
    check(
        !rt.residuals.is_empty() && res <= 1e-10 && cond <= 1e3,
        format!(
            "max GLM residual {res:.2e}, max row condition {cond:.4} over {} round-trip solves",
            rt.residuals.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let pr = free(1000);
    let opts = SearchOptions::default();
    let s100 = compute_spectral_data(&pr, 100, &opts).unwrap();
    let s60 = s100.truncated(60).unwrap();
    let s50 = s100.truncated(50).unwrap();
    let l3 = s60.get(3).unwrap().lambda;
    let f = integrate_phi(&pr, l3).into_pair();
    let exp = expansion_check(&pr, &s60, &f, Pairing::H).map_err(|e| e.to_string())?;
    let smooth = GridPair::from_fn(*pr.grid(), |x| [x * (PI - x), 1.0 + x.cos()]);
    let d50 = parseval_check(&pr, &s50, &smooth).map_err(|e| e.to_string())?.defect;
    let d100 = parseval_check(&pr, &s100, &smooth).map_err(|e| e.to_string())?.defect;
    check(
        exp.max() <= 1e-3 && d100 <= 0.5 * d50,
        format!("expansion error {:.2e}; Parseval defect N=50 {d50:.2e}, N=100 {d100:.2e}", exp.max()),
    )
}

fn criterion_10() -> Outcome {
    let pr = free(1000);
    let s = compute_spectral_data(&pr, 80, &SearchOptions::default()).unwrap();
    let rep = zero_sum_check(&pr, &s, &[20, 80], 0.9 * PI).map_err(|e| e.to_string())?;
    let (a, b) = (rep.rows[0].max_interior, rep.rows[1].max_interior);
    check(
        b * 2.0 <= a,
        format!(
            "max over x <= 0.9 pi: N=20 {a:.3e}, N=80 {b:.3e} (ratio {:.2}); value at x = pi: {:.3}",
            a / b,
            rep.rows[1].endpoint[0]
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let g = Grid::new(200).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let mut d: Vec<SpectralDatum> = (-20i64..=20)
            .map(|n| SpectralDatum {
                n,
                lambda: n as f64 + rng.gen_range(-0.4..0.4),
                alpha: PI + rng.gen_range(-0.5..0.5),
            })
            .collect();
        d.push(SpectralDatum { n: 0, lambda: 0.45, alpha: 2.0 + rng.gen_range(0.0..2.0) });
        d.retain(|x| !(x.n == 0 && x.lambda > 0.4 && x.lambda < 0.45));
        let s = SpectralData::new(20, d).unwrap();
        for tail in [TailModel::None, TailModel::Asymptotic] {
            let a = build_f(&FKernelSpec { spectral: &s, mode: FMode::AForm, tail }, g);
            let b = build_f(&FKernelSpec { spectral: &s, mode: FMode::DirectSum, tail }, g);
            for i in 0..g.len() {
                for j in 0..g.len() {
                    worst = worst.max((a.get(i, j) - b.get(i, j)).max_abs());
                }
            }
        }
    }
    check(worst <= 1e-12, format!("max-node |F_a - F_sum| = {worst:.2e}"))
}

#[test]
fn acceptance_criteria() {
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let want = |k: usize| only.as_ref().is_none_or(|o| o.contains(&k));
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut run = |k: usize, f: &mut dyn FnMut() -> Outcome| {
        if want(k) {
            let r = f();
            let (tag, msg) = match &r {
                Ok(m) => ("PASS", m),
                Err(m) => ("FAIL", m),
            };
            println!("acceptance {k:>2}: {tag} | {msg}");
            results.push((k, r));
        }
    };
    run(1, &mut criterion_1);
    if want(2) || want(3) {
        let (pr, s, secs) = trig_data_60();
        run(2, &mut || criterion_2(&pr, &s, secs));
        run(3, &mut || criterion_3(&s));
    }
    run(4, &mut criterion_4);
    run(5, &mut criterion_5);
    run(6, &mut criterion_6);
    if want(7) || want(8) {
        let rt = criterion_7();
        let o7 = rt.outcome.clone();
        run(7, &mut || o7.clone());
        run(8, &mut || criterion_8(&rt));
    }
    run(9, &mut criterion_9);
    run(10, &mut criterion_10);
    run(11, &mut criterion_11);
    let failed: Vec<usize> = results.iter().filter(|(_, r)| r.is_err()).map(|(k, _)| *k).collect();
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}
