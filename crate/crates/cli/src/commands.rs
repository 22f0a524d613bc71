use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use dirac_spectral::recovery::{reconstruct_potential, recover_boundary, InverseOptions};
use dirac_spectral::spectrum::{compute_spectral_data, eigen_report, SearchOptions, HADAMARD_TAIL};
use dirac_spectral::verify::{
    expansion_with, hadamard_check, parseval_with, roundtrip_from_data, zero_sum_check, EigenBasis, Pairing,
    RoundtripOptions,
};
use dirac_spectral::{DiracProblem, GridPair, SpectralData};
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, ConfigError};
use crate::output::{write_json, write_potential_csv, write_report};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Solver(String),
    Tolerance(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Tolerance(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Tolerance(m) => write!(f, "tolerance exceeded: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<dirac_spectral::Error> for Failure {
    fn from(e: dirac_spectral::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

pub struct Context {
    pub config: Config,
    pub out: PathBuf,
    pub timestamp: Option<u64>,
}

impl Context {
    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out).map_err(io(&self.out))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.out.join(name);
        write_json(&path, value).map_err(io(&path))
    }

    fn report<T: Serialize>(&self, name: &str, command: &str, body: &T) -> Result<()> {
        let path = self.out.join(name);
        write_report(&path, command, self.timestamp, body).map_err(io(&path))
    }

    fn potential_csv(&self, name: &str, potential: &dirac_spectral::PotentialMatrix) -> Result<()> {
        let path = self.out.join(name);
        write_potential_csv(&path, potential, self.config.csv_precision()?).map_err(io(&path))
    }

    fn problem(&self) -> Result<DiracProblem> {
        Ok(DiracProblem::new(self.config.potential()?, self.config.boundary()?))
    }
}

pub fn cmd_direct(ctx: &Context) -> Result<()> {
    let problem = ctx.problem()?;
    let n = ctx.config.truncation()?;
    ctx.prepare()?;
    let report = eigen_report(&problem, n, &SearchOptions::default()).map_err(|e| e.in_stage("direct"))?;
    let spectral = report.spectral.clone().with_boundary_hint(Some(problem.boundary()));
    ctx.json("spectral.json", &spectral)?;
    ctx.report(
        "direct_report.json",
        "direct",
        &json!({
            "truncation": n,
            "intervals": problem.grid().intervals(),
            "boundary": problem.boundary(),
            "records": report.rows,
            "eps_partial": report.asymptotics.eps_partial,
            "tau_partial": report.asymptotics.tau_partial,
        }),
    )?;
    println!("{}", report.asymptotics);
    Ok(())
}

pub fn read_spectral(path: &Path) -> Result<SpectralData> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn cmd_inverse(ctx: &Context, input: Option<&Path>) -> Result<()> {
    let path = match input.map(Path::to_path_buf).or_else(|| ctx.config.path("input.path")) {
        Some(p) => p,
        None => return Err(Failure::Usage("inverse needs --input or `input.path`".into())),
    };
    let spectral = read_spectral(&path)?;
    let opts = InverseOptions {
        grid: ctx.config.grid()?,
        mode: ctx.config.mode()?,
        tail: ctx.config.tail()?,
        method: ctx.config.method()?,
        boundary: ctx.config.boundary_method()?,
    };
    let kernel_csv = ctx.config.bool_or("output.kernel_csv", false)?;
    ctx.prepare()?;
    let rec = reconstruct_potential(&spectral, &opts).map_err(|e| e.in_stage("inverse"))?;
    ctx.potential_csv("potential.csv", &rec.potential)?;
    let boundary = match recover_boundary(&spectral, &rec.potential, opts.boundary) {
        Ok(fit) => {
            println!("h1 = {:.10}, h2 = {:.10} (condition {:.3e})", fit.params.h1, fit.params.h2, fit.condition);
            json!({
                "h1": fit.params.h1,
                "h2": fit.params.h2,
                "condition": fit.condition,
                "max_residual": fit.max_residual(),
                "residuals": fit.residuals.iter().map(|r| json!({"n": r.0, "lambda": r.1, "residual": r.2})).collect::<Vec<_>>(),
            })
        }
        Err(e) => {
            eprintln!("warning: boundary parameters not recovered: {e}");
            json!({ "error": e.to_string() })
        }
    };
    ctx.report("boundary.json", "inverse", &boundary)?;
    ctx.report("diagnostics.json", "inverse", &rec.diagnostics)?;
    if kernel_csv {
        let dir = ctx.out.join("kernel");
        std::fs::create_dir_all(&dir).map_err(io(&dir))?;
        rec.kernel.export_csv(&dir, ctx.config.csv_precision()?).map_err(io(&dir))?;
    }
    println!("GLM residual {:.3e}, max condition {:.3e}", rec.diagnostics.glm_residual, rec.diagnostics.max_condition);
    Ok(())
}

#[derive(Serialize)]
struct Tolerances {
    rel_l2: f64,
    h1: f64,
    h2: f64,
    boundary_residual: f64,
}

pub fn cmd_roundtrip(ctx: &Context) -> Result<()> {
    if ctx.config.is_empty() {
        return Err(Failure::Usage("empty configuration; set at least potential.preset".into()));
    }
    let problem = ctx.problem()?;
    let cfg = &ctx.config;
    let tol = Tolerances {
        rel_l2: cfg.f64_or("tol.rel_l2", 0.05)?,
        h1: cfg.f64_or("tol.h1", 0.05)?,
        h2: cfg.f64_or("tol.h2", 0.05)?,
        boundary_residual: cfg.f64_or("tol.boundary_residual", 1e-2)?,
    };
    let scale = cfg.f64_or("perturb.alpha0_scale", 1.0)?;
    if !(scale > 0.0) {
        return Err(Failure::Usage("perturb.alpha0_scale must be positive".into()));
    }
    let mut opts = RoundtripOptions::new(cfg.truncation()?);
    opts.mode = cfg.mode()?;
    opts.tail = cfg.tail()?;
    opts.method = cfg.method()?;
    opts.boundary = cfg.boundary_method()?;
    ctx.prepare()?;
    let mut spectral = compute_spectral_data(&problem, opts.n_trunc, &opts.search).map_err(|e| e.in_stage("direct"))?;
    spectral.scale_alpha(0, scale);
    let (report, recovered) = roundtrip_from_data(&problem, &spectral, &opts)?;

    let mut flags = Vec::new();
    if !(report.rel_l2 <= tol.rel_l2) {
        flags.push(format!("rel_l2 {:.3e} > {:.3e}", report.rel_l2, tol.rel_l2));
    }
    if !(report.h1_error <= tol.h1) {
        flags.push(format!("h1 error {:.3e} > {:.3e}", report.h1_error, tol.h1));
    }
    if !(report.h2_error <= tol.h2) {
        flags.push(format!("h2 error {:.3e} > {:.3e}", report.h2_error, tol.h2));
    }
    if !(report.boundary_max_residual <= tol.boundary_residual) {
        flags.push(format!(
            "boundary-fit residual {:.3e} > {:.3e}",
            report.boundary_max_residual, tol.boundary_residual
        ));
    }
    ctx.json("spectral.json", &spectral.clone().with_boundary_hint(Some(problem.boundary())))?;
    ctx.potential_csv("potential.csv", &recovered)?;
    ctx.report(
        "roundtrip_report.json",
        "roundtrip",
        &json!({
            "pass": flags.is_empty(),
            "flags": flags,
            "tolerances": tol,
            "alpha0_scale": scale,
            "report": report,
        }),
    )?;
    println!(
        "N = {}, M = {}: rel L2 {:.3e}, h1 {:.6} (err {:.2e}), h2 {:.6} (err {:.2e}), boundary residual {:.2e}",
        report.truncation,
        report.intervals,
        report.rel_l2,
        report.boundary_fit.h1,
        report.h1_error,
        report.boundary_fit.h2,
        report.h2_error,
        report.boundary_max_residual
    );
    if flags.is_empty() {
        Ok(())
    } else {
        Err(Failure::Tolerance(flags.join("; ")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Parseval,
    Expansion,
    ZeroSum,
    Hadamard,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Parseval, Check::Expansion, Check::ZeroSum, Check::Hadamard];

    pub fn name(self) -> &'static str {
        match self {
            Check::Parseval => "parseval",
            Check::Expansion => "expansion",
            Check::ZeroSum => "zerosum",
            Check::Hadamard => "hadamard",
        }
    }
}

/// Truncations `N/4, N/2, N`, deduplicated.
fn ladder(n: usize) -> Vec<usize> {
    let mut l = vec![n / 4, n / 2, n];
    l.dedup();
    l
}

pub fn cmd_verify(ctx: &Context, checks: &[Check]) -> Result<()> {
    let problem = ctx.problem()?;
    let n = ctx.config.truncation()?;
    ctx.prepare()?;
    let spectral = compute_spectral_data(&problem, n, &SearchOptions::default()).map_err(|e| e.in_stage("direct"))?;
    let grid = *problem.grid();
    let f = GridPair::from_fn(grid, |x| [x * (PI - x), 1.0 + x.cos()]);
    let mut sections = serde_json::Map::new();
    for &check in checks {
        let stage = |e: dirac_spectral::Error| e.in_stage(check.name());
        let value = match check {
            Check::Parseval => {
                println!("parseval: f = (x(pi - x), 1 + cos x)");
                println!("{:>6} {:>22} {:>22} {:>12}", "N", "norm^2", "sum alpha a^2", "defect");
                let mut rows = Vec::new();
                for k in ladder(n) {
                    let basis = EigenBasis::new(&problem, &spectral.truncated(k)?);
                    let r = parseval_with(&basis, &f).map_err(stage)?;
                    println!("{:>6} {:>22.15e} {:>22.15e} {:>12.4e}", k, r.norm_sq, r.coefficient_sum, r.defect);
                    rows.push(json!({
                        "truncation": k,
                        "norm_sq": r.norm_sq,
                        "coefficient_sum": r.coefficient_sum,
                        "defect": r.defect,
                    }));
                }
                json!({ "test_function": "(x(pi - x), 1 + cos x)", "rows": rows })
            }
            Check::Expansion => {
                let basis = EigenBasis::new(&problem, &spectral);
                let mut rows = Vec::new();
                for pairing in [Pairing::H, Pairing::L2] {
                    let r = expansion_with(&basis, &f, pairing).map_err(stage)?;
                    println!(
                        "expansion ({:?} pairing, N = {n}): max error {:.4e} / {:.4e}",
                        pairing, r.max_error[0], r.max_error[1]
                    );
                    rows.push(json!({ "pairing": r.pairing, "max_error": r.max_error }));
                }
                json!({ "test_function": "(x(pi - x), 1 + cos x)", "truncation": n, "rows": rows })
            }
            Check::ZeroSum => {
                let r = zero_sum_check(&problem, &spectral, &ladder(n), 0.9 * PI).map_err(stage)?;
                for row in &r.rows {
                    println!(
                        "zero sum N = {:>4}: max |S| on x <= 0.9 pi {:.4e}, one-sided {:.4e}, S(pi) = ({:.4}, {:.4e})",
                        row.truncation, row.max_interior, row.one_sided_max, row.endpoint[0], row.endpoint[1]
                    );
                }
                serde_json::to_value(&r).map_err(|e| Failure::Solver(e.to_string()))?
            }
            Check::Hadamard => {
                let points: Vec<f64> = (0..6).map(|k| k as f64 + 0.5).collect();
                let rows = hadamard_check(&problem, &spectral, &points, HADAMARD_TAIL);
                for r in &rows {
                    println!(
                        "hadamard lambda = {:>4}: shooting {:>14.6e}, product {:>14.6e}, rel {:.3e}",
                        r.lambda, r.shooting, r.product, r.relative_error
                    );
                }
                json!({ "truncation": n, "tail": HADAMARD_TAIL, "rows": rows })
            }
        };
        sections.insert(check.name().to_string(), value);
    }
    ctx.report(
        "verify_report.json",
        "verify",
        &json!({
            "truncation": n,
            "intervals": grid.intervals(),
            "boundary": problem.boundary(),
            "checks": sections,
        }),
    )
}
