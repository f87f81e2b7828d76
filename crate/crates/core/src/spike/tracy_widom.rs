//! Tabulated complex (β = 2) Tracy–Widom distribution.

use crate::error::{param, Error, Result};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock};

/// Environment variable naming a table file that replaces the bundled one.
pub const TABLE_ENV: &str = "RMT_TW_TABLE";

const BUNDLED: &str = include_str!("../../data/tw2.csv");

/// Cumulative distribution function of TW₂ on a grid, interpolated by a monotone
/// (Fritsch–Carlson) cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct TracyWidomTable {
    s: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
    provenance: String,
}

impl TracyWidomTable {
    pub fn new(s: Vec<f64>, cdf: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if s.len() != cdf.len() || s.len() < 4 {
            return param("table needs at least four (s, cdf) pairs of equal length");
        }
        if s.windows(2).any(|w| !(w[0] < w[1])) {
            return param("table abscissae must be strictly increasing");
        }
        if cdf.iter().any(|&f| !(0.0..=1.0).contains(&f)) || cdf.windows(2).any(|w| w[0] > w[1]) {
            return param("table cdf values must be nondecreasing within [0, 1]");
        }
        if s[0] > -10.0 || *s.last().unwrap() < 6.0 {
            return param(format!("table must cover [-10, 6], got [{}, {}]", s[0], s.last().unwrap()));
        }
        let table = Self { slopes: pchip_slopes(&s, &cdf), s, cdf, provenance: provenance.into() };
        if table.cdf(-10.0) >= 1e-6 || table.cdf(6.0) <= 1.0 - 1e-6 {
            return param("table tails are not resolved: need cdf(-10) < 1e-6 and cdf(6) > 1 - 1e-6");
        }
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn bundled() -> Arc<TracyWidomTable> {
        static TABLE: OnceLock<Arc<TracyWidomTable>> = OnceLock::new();
        TABLE
            .get_or_init(|| Arc::new(Self::from_csv(BUNDLED.as_bytes()).expect("bundled Tracy-Widom table is valid")))
            .clone()
    }

    /// The table named by `RMT_TW_TABLE` if set, otherwise the bundled one.
    pub fn from_env_or_bundled() -> Result<Arc<TracyWidomTable>> {
        match std::env::var_os(TABLE_ENV) {
            Some(path) if !path.is_empty() => Ok(Arc::new(Self::load(path)?)),
            _ => Ok(Self::bundled()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    /// Parses `s,cdf` CSV; leading `#` lines are kept as provenance.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut provenance = Vec::new();
        let (mut s, mut cdf) = (Vec::new(), Vec::new());
        let mut seen_header = false;
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                provenance.push(comment.trim().to_string());
                continue;
            }
            if !seen_header {
                if line != "s,cdf" {
                    return Err(Error::Format(format!("expected header `s,cdf`, found {line:?}")));
                }
                seen_header = true;
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {}: expected two fields", lineno + 1)))?;
            let parse = |t: &str| {
                t.trim().parse::<f64>().map_err(|_| Error::Format(format!("line {}: cannot parse {t:?}", lineno + 1)))
            };
            s.push(parse(a)?);
            cdf.push(parse(b)?);
        }
        Self::new(s, cdf, provenance.join("\n"))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for line in self.provenance.lines() {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "s,cdf")?;
        for (s, f) in self.s.iter().zip(&self.cdf) {
            writeln!(w, "{s:.3},{f:.17e}")?;
        }
        Ok(())
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn grid(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    fn locate(&self, x: f64) -> usize {
        let k = self.s.partition_point(|&t| t <= x);
        k.clamp(1, self.s.len() - 1) - 1
    }

    /// `F₂(x)`; 0 left of the table and 1 right of it.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.s[0] {
            return self.cdf[0];
        }
        if x >= *self.s.last().unwrap() {
            return *self.cdf.last().unwrap();
        }
        let k = self.locate(x);
        let h = self.s[k + 1] - self.s[k];
        let t = (x - self.s[k]) / h;
        let (y0, y1, d0, d1) = (self.cdf[k], self.cdf[k + 1], self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }

    /// Density of the interpolant.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= self.s[0] || x >= *self.s.last().unwrap() {
            return 0.0;
        }
        let k = self.locate(x);
        let h = self.s[k + 1] - self.s[k];
        let t = (x - self.s[k]) / h;
        let (y0, y1, d0, d1) = (self.cdf[k], self.cdf[k + 1], self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * d1)
            / h
    }

    /// Inverse cdf by bisection down to adjacent floats.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return param(format!("probability must lie in (0, 1), got {p}"));
        }
        let (mut lo, mut hi) = (self.s[0], *self.s.last().unwrap());
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// `E[s]`, from `∫ s dF = [s F] - ∫ F ds` with Simpson's rule on the table nodes.
    pub fn mean(&self) -> f64 {
        let (a, b) = (self.s[0], *self.s.last().unwrap());
        b * self.cdf(b) - a * self.cdf(a) - self.integrate(|_, f| f)
    }

    pub fn variance(&self) -> f64 {
        let (a, b) = (self.s[0], *self.s.last().unwrap());
        let second = b * b * self.cdf(b) - a * a * self.cdf(a) - self.integrate(|s, f| 2.0 * s * f);
        let m = self.mean();
        second - m * m
    }

    fn integrate(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        // Simpson on each table interval using the interpolant at its midpoint.
        self.s
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) / 6.0 * (g(w[0], self.cdf[k]) + 4.0 * g(mid, self.cdf(mid)) + g(w[1], self.cdf[k + 1]))
            })
            .sum()
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    d
}

/// `F₂(s)` from `table`.
pub fn tracy_widom(table: &TracyWidomTable, s: f64) -> f64 {
    table.cdf(s)
}

pub fn tw_quantile(table: &TracyWidomTable, p: f64) -> Result<f64> {
    table.quantile(p)
}
