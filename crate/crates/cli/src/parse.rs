//! Value parsers for command-line flags. A rejected value is a usage error.

use rmt_inference::doa::{AngleGrid, Method};
use rmt_sim::figures::{FigureId, Scale};
use std::str::FromStr;

/// `lo:hi:step` with `lo <= hi` and `step > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        rmt_inference::stieltjes::linear_grid(self.lo, self.hi, self.step).expect("validated grid")
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("grid needs finite lo <= hi, got {lo}:{hi}"));
        }
        if !(step > 0.0) || (hi - lo) / step > 1e7 {
            return Err(format!("grid step {step} must be positive and give at most 1e7 points"));
        }
        Ok(Self { lo, hi, step })
    }
}

#[derive(Debug, Clone)]
pub struct AngleGridArg(pub AngleGrid);

impl FromStr for AngleGridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<AngleGrid>().map(AngleGridArg).map_err(|e| e.to_string())
    }
}

pub fn finite_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

pub fn positive_f64(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

pub fn nonnegative_f64(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be nonnegative"))
    }
}

pub fn probability(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie strictly between 0 and 1"))
    }
}

pub fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

pub fn calibration_trials(s: &str) -> Result<usize, String> {
    let v = positive_usize(s)?;
    if v >= 1000 {
        Ok(v)
    } else {
        Err(format!("{v} calibration trials are too few (need at least 1000)"))
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<T> = s.split(',').map(|t| item(t.trim())).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

/// A comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Floats(pub Vec<f64>);

/// A comma-separated list of positive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<usize>);

pub fn float_list(s: &str) -> Result<Floats, String> {
    list(s, finite_f64).map(Floats)
}

pub fn positive_list(s: &str) -> Result<Floats, String> {
    list(s, positive_f64).map(Floats)
}

pub fn count_list(s: &str) -> Result<Counts, String> {
    list(s, positive_usize).map(Counts)
}

pub fn doa_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

pub fn figure_id(s: &str) -> Result<FigureId, String> {
    s.parse::<FigureId>().map_err(|e| e.to_string())
}

pub fn scale(s: &str) -> Result<Scale, String> {
    s.parse::<Scale>().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: Grid = "0:3:0.01".parse().unwrap();
        assert_eq!(g.points().len(), 301);
        assert!("3:0:0.1".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1:x".parse::<Grid>().is_err());
    }

    #[test]
    fn scalar_and_list_flags() {
        assert!(positive_f64("0").is_err());
        assert!(positive_f64("nan").is_err());
        assert!(probability("1").is_err());
        assert_eq!(count_list("100, 100,100").unwrap().0, vec![100; 3]);
        assert!(count_list("1,0").is_err());
        assert_eq!(float_list("-1,0.5").unwrap().0, vec![-1.0, 0.5]);
        assert!(calibration_trials("999").is_err());
    }
}
