use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use dirac_spectral::glm::{FMode, GlmMethod, TailModel};
use dirac_spectral::recovery::BoundaryMethod;
use dirac_spectral::{BoundaryParams, Grid, PotentialMatrix};

pub const KEYS: &[&str] = &[
    "potential.preset",
    "potential.p0",
    "potential.path",
    "h1",
    "h2",
    "N",
    "M",
    "input.path",
    "glm.mode",
    "glm.tail",
    "glm.method",
    "boundary.method",
    "tol.rel_l2",
    "tol.h1",
    "tol.h2",
    "tol.boundary_residual",
    "perturb.alpha0_scale",
    "csv.precision",
    "output.kernel_csv",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// Flat `key = value` settings. Later insertions win.
#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    base: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value, got `{}`", lineno + 1, raw.trim()));
            };
            cfg.set(k.trim(), v.trim()).map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Config::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return err(format!("unknown key `{key}` (valid keys: {})", KEYS.join(", ")));
        }
        if value.is_empty() {
            return err(format!("empty value for `{key}`"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        match pair.split_once('=') {
            Some((k, v)) => self.set(k.trim(), v.trim()),
            None => err(format!("override `{pair}` is not key=value")),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.parsed(key, default)?;
        if !v.is_finite() {
            return err(format!("`{key}` must be finite"));
        }
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.parsed(key, default)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        self.parsed(key, default)
    }

    /// Relative paths resolve against the config file's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let p = PathBuf::from(self.get(key)?);
        Some(match (&self.base, p.is_relative()) {
            (Some(base), true) => base.join(p),
            _ => p,
        })
    }

    pub fn truncation(&self) -> Result<usize> {
        self.usize_or("N", 20)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.usize_or("M", 400)?).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn boundary(&self) -> Result<BoundaryParams> {
        BoundaryParams::new(self.f64_or("h1", 0.0)?, self.f64_or("h2", 1.0)?).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn mode(&self) -> Result<FMode> {
        match self.get("glm.mode").unwrap_or("a_form") {
            "a_form" => Ok(FMode::AForm),
            "direct_sum" => Ok(FMode::DirectSum),
            v => err(format!("glm.mode must be a_form or direct_sum, got `{v}`")),
        }
    }

    pub fn tail(&self) -> Result<TailModel> {
        match self.get("glm.tail").unwrap_or("asymptotic") {
            "asymptotic" => Ok(TailModel::Asymptotic),
            "none" => Ok(TailModel::None),
            v => err(format!("glm.tail must be asymptotic or none, got `{v}`")),
        }
    }

    pub fn method(&self) -> Result<GlmMethod> {
        match self.get("glm.method").unwrap_or("bordered") {
            "bordered" => Ok(GlmMethod::Bordered),
            "dense_rows" => Ok(GlmMethod::DenseRows),
            v => err(format!("glm.method must be bordered or dense_rows, got `{v}`")),
        }
    }

    pub fn boundary_method(&self) -> Result<BoundaryMethod> {
        match self.get("boundary.method").unwrap_or("least_squares") {
            "least_squares" => Ok(BoundaryMethod::LeastSquares),
            "two_point" => Ok(BoundaryMethod::TwoPoint),
            v => err(format!("boundary.method must be least_squares or two_point, got `{v}`")),
        }
    }

    pub fn csv_precision(&self) -> Result<usize> {
        let p = self.usize_or("csv.precision", 12)?;
        if p == 0 || p > 17 {
            return err("csv.precision must be between 1 and 17");
        }
        Ok(p)
    }

    /// The potential named by `potential.*`. A `file` preset fixes the grid
    /// from its row count and ignores `M`.
    pub fn potential(&self) -> Result<PotentialMatrix> {
        let preset = match self.get("potential.preset") {
            Some(p) => p,
            None => return err("missing `potential.preset` (zero, constant, trig or file)"),
        };
        let wrap = |r: dirac_spectral::Result<PotentialMatrix>| r.map_err(|e| ConfigError(e.to_string()));
        match preset {
            "zero" => Ok(PotentialMatrix::zero(self.grid()?)),
            "constant" => {
                let p0 = self.f64_or("potential.p0", 0.5)?;
                wrap(PotentialMatrix::from_fn(self.grid()?, |_| p0, |_| 0.0))
            }
            "trig" => wrap(PotentialMatrix::from_fn(self.grid()?, |x| 0.3 * x.cos(), |x| 0.2 * (2.0 * x).sin())),
            "file" => {
                let Some(path) = self.path("potential.path") else {
                    return err("preset `file` needs `potential.path`");
                };
                read_potential_csv(&path)
            }
            other => err(format!("unknown potential.preset `{other}` (zero, constant, trig, file)")),
        }
    }
}

/// Read an `x,p,q` table whose rows sit on the uniform grid over `[0, pi]`.
pub fn read_potential_csv(path: &Path) -> Result<PotentialMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ConfigError(format!("cannot read potential {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| ConfigError(format!("{}: {e}", path.display())))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "p", "q"] {
        return err(format!("{}: header must be x,p,q", path.display()));
    }
    let (mut xs, mut p, mut q) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse()
                .map_err(|_| ConfigError(format!("{}: row {}: bad number `{}`", path.display(), i + 1, &rec[k])))
        };
        xs.push(num(0)?);
        p.push(num(1)?);
        q.push(num(2)?);
    }
    if xs.len() < 2 {
        return err(format!("{}: need at least two rows", path.display()));
    }
    let grid = Grid::new(xs.len() - 1).map_err(|e| ConfigError(e.to_string()))?;
    for (j, &x) in xs.iter().enumerate() {
        if (x - grid.node(j)).abs() > 1e-9 * PI {
            return err(format!(
                "{}: row {} has x = {x}, expected the uniform node {}",
                path.display(),
                j + 1,
                grid.node(j)
            ));
        }
    }
    PotentialMatrix::new(grid, p, q).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}
