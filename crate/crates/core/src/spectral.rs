use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::BoundaryParams;

/// One eigenvalue with its index and normalizing number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    pub n: i64,
    pub lambda: f64,
    pub alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSpectralData {
    truncation: usize,
    #[serde(default)]
    boundary_hint: Option<BoundaryParams>,
    data: Vec<SpectralDatum>,
}

/// Spectral data `{lambda_n, alpha_n}` for `|n| <= N`.
///
/// Every index in `-N..=N` occurs once, except `n = 0` which may carry two
/// records: with `h2 > 0` the window around zero holds one eigenvalue more
/// than the others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectralData", into = "RawSpectralData")]
pub struct SpectralData {
    truncation: usize,
    boundary_hint: Option<BoundaryParams>,
    data: Vec<SpectralDatum>,
}

impl TryFrom<RawSpectralData> for SpectralData {
    type Error = Error;
    fn try_from(raw: RawSpectralData) -> Result<Self> {
        let mut s = SpectralData::new(raw.truncation, raw.data)?;
        s.boundary_hint = raw.boundary_hint;
        Ok(s)
    }
}

impl From<SpectralData> for RawSpectralData {
    fn from(s: SpectralData) -> Self {
        RawSpectralData { truncation: s.truncation, boundary_hint: s.boundary_hint, data: s.data }
    }
}

impl SpectralData {
    pub fn new(truncation: usize, mut data: Vec<SpectralDatum>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSpectralData(m));
        for d in &data {
            if !d.lambda.is_finite() || !d.alpha.is_finite() {
                return bad(format!("non-finite record at n = {}", d.n));
            }
            if d.alpha <= 0.0 {
                return bad(format!("alpha_{} = {} is not positive", d.n, d.alpha));
            }
        }
        data.sort_by(|a, b| a.n.cmp(&b.n).then(a.lambda.total_cmp(&b.lambda)));
        let nn = truncation as i64;
        for n in -nn..=nn {
            let count = data.iter().filter(|d| d.n == n).count();
            let ok = if n == 0 { count == 1 || count == 2 } else { count == 1 };
            if !ok {
                return bad(format!("index {n} appears {count} times"));
            }
        }
        if let Some(d) = data.iter().find(|d| d.n.abs() > nn) {
            return bad(format!("index {} exceeds truncation {truncation}", d.n));
        }
        for w in data.windows(2) {
            if w[0].lambda == w[1].lambda {
                return bad(format!("repeated eigenvalue {}", w[0].lambda));
            }
        }
        Ok(SpectralData { truncation, boundary_hint: None, data })
    }

    pub fn with_boundary_hint(mut self, hint: Option<BoundaryParams>) -> Self {
        self.boundary_hint = hint;
        self
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn boundary_hint(&self) -> Option<BoundaryParams> {
        self.boundary_hint
    }

    /// Records sorted by `(n, lambda)`.
    pub fn records(&self) -> &[SpectralDatum] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// The record with index `n != 0`.
    pub fn get(&self, n: i64) -> Option<&SpectralDatum> {
        if n == 0 {
            return None;
        }
        self.data.iter().find(|d| d.n == n)
    }

    /// The one or two records with index zero.
    pub fn zero_block(&self) -> Vec<SpectralDatum> {
        self.data.iter().filter(|d| d.n == 0).copied().collect()
    }

    /// Records with `|n| <= k`.
    pub fn truncated(&self, k: usize) -> Result<SpectralData> {
        if k > self.truncation {
            return Err(Error::InvalidSpectralData(format!("cannot truncate to {k} beyond {}", self.truncation)));
        }
        let data = self.data.iter().filter(|d| d.n.unsigned_abs() as usize <= k).copied().collect();
        Ok(SpectralData { truncation: k, boundary_hint: self.boundary_hint, data })
    }

    /// Multiply every `alpha` with index `n` by `factor`.
    pub fn scale_alpha(&mut self, n: i64, factor: f64) {
        for d in self.data.iter_mut().filter(|d| d.n == n) {
            d.alpha *= factor;
        }
    }
}

/// A pair of grid functions.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPair {
    pub grid: Grid,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl GridPair {
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> [f64; 2]) -> Self {
        let (y1, y2) = grid.nodes().into_iter().map(f).map(|[a, b]| (a, b)).unzip();
        GridPair { grid, y1, y2 }
    }

    pub fn at(&self, j: usize) -> [f64; 2] {
        [self.y1[j], self.y2[j]]
    }
}

/// Grid samples of a solution at fixed `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSolution {
    pub lambda: f64,
    pub grid: Grid,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl VectorSolution {
    pub fn at(&self, j: usize) -> [f64; 2] {
        [self.y1[j], self.y2[j]]
    }

    pub fn last(&self) -> [f64; 2] {
        self.at(self.grid.intervals())
    }

    pub fn into_pair(self) -> GridPair {
        GridPair { grid: self.grid, y1: self.y1, y2: self.y2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: i64, lambda: f64) -> SpectralDatum {
        SpectralDatum { n, lambda, alpha: std::f64::consts::PI }
    }

    #[test]
    fn accepts_double_zero_block() {
        let d = vec![rec(1, 1.1), rec(0, 0.3), rec(-1, -1.2), rec(0, -0.4)];
        let s = SpectralData::new(1, d).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.zero_block().len(), 2);
        assert_eq!(s.records()[0].n, -1);
    }

    #[test]
    fn rejects_bad_index_sets() {
        assert!(SpectralData::new(1, vec![rec(0, 0.0), rec(1, 1.0)]).is_err());
        assert!(SpectralData::new(1, vec![rec(-1, -1.0), rec(0, 0.0), rec(1, 1.0), rec(1, 1.1)]).is_err());
        let mut d = vec![rec(-1, -1.0), rec(0, 0.0), rec(1, 1.0)];
        d[1].alpha = 0.0;
        assert!(SpectralData::new(1, d).is_err());
    }

    #[test]
    fn truncation_keeps_inner_records() {
        let d = (-3..=3).map(|n| rec(n, n as f64)).collect();
        let s = SpectralData::new(3, d).unwrap();
        let t = s.truncated(1).unwrap();
        assert_eq!(t.len(), 3);
        assert!(s.truncated(4).is_err());
    }
}
