use crate::error::{LlpError, Result};

/// Least-squares slope of `ln y` against `ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
    /// Points with `y ≤ 0` were left out.
    pub dropped_nonpositive: usize,
}

impl GrowthFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.exponent * x.ln()).exp()
    }
}

/// Fits `y ≈ C·x^p` on the points with positive `x` and `y`; at least four are needed.
pub fn fit_growth_exponent(points: &[(f64, f64)]) -> Result<GrowthFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let dropped = points.len() - usable.len();
    if usable.len() < 4 {
        return Err(LlpError::config(format!(
            "growth fit needs at least 4 positive samples, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LlpError::config("growth fit needs distinct x values"));
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_tot: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = usable.iter().map(|p| (p.1 - intercept - exponent * p.0).powi(2)).sum();
    Ok(GrowthFit {
        exponent,
        intercept,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        samples: usable.len(),
        dropped_nonpositive: dropped,
    })
}

/// The upper half of `points` by `x`, keeping at least four.
pub fn tail(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let keep = (sorted.len() / 2).max(4).min(sorted.len());
    sorted.split_off(sorted.len() - keep)
}

/// Fit over the tail of the series.
pub fn fit_tail(points: &[(f64, f64)]) -> Result<GrowthFit> {
    fit_growth_exponent(&tail(points))
}
