use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Data(format!(
            "{} x values but {} y values",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Data(format!(
            "a fit needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

/// Reads two numeric columns by header name. Rows where either cell is
/// empty or not a number are skipped.
pub fn read_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("no column '{name}' in {}", path.display())))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        if let (Some(a), Some(b)) = (parse(ix), parse(iy)) {
            xs.push(a);
            ys.push(b);
        }
    }
    Ok((xs, ys))
}

/// Fits `y` against `x` from a CSV file, optionally on `ln x` and `ln |y|`.
pub fn fit_csv(path: &Path, x: &str, y: &str, log_x: bool, log_y: bool) -> Result<FitResult> {
    let (xs, ys) = read_columns(path, x, y)?;
    let mut px = Vec::with_capacity(xs.len());
    let mut py = Vec::with_capacity(ys.len());
    for (a, b) in xs.into_iter().zip(ys) {
        let a = if log_x { a.ln() } else { a };
        let b = if log_y { b.abs().ln() } else { b };
        if a.is_finite() && b.is_finite() {
            px.push(a);
            py.push(b);
        }
    }
    fit(&px, &py)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn power_law_slope() {
        let xs: Vec<f64> = (1..=20).map(|i| (i as f64 * 1.7).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.31 * x + 2.0).collect();
        let f = fit(&xs, &ys).unwrap();
        assert!((f.slope - 0.31).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
        assert!(fit(&xs[..2], &ys[..2]).is_err());
    }

    #[test]
    fn csv_columns() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t,y,error").unwrap();
        for t in [10.0f64, 100.0, 1000.0, 10000.0] {
            writeln!(f, "{t},{},", t.powf(0.31)).unwrap();
        }
        writeln!(f, "5,,bad").unwrap();
        let r = fit_csv(f.path(), "t", "y", true, true).unwrap();
        assert!((r.slope - 0.31).abs() < 1e-9);
        assert_eq!(r.n_points, 4);
        assert!(fit_csv(f.path(), "t", "z", true, true).is_err());
    }
}
