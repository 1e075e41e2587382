//! Least-squares convergence rates in log-log coordinates.

/// Fit of `log y = slope * log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Returns `None` for fewer than two points, non-positive data or
/// coincident abscissae.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 || xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-300 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    Some(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: n,
    })
}

/// Index where the finest half of a sweep of length `len` starts.
/// Odd lengths keep the middle point.
pub fn finest_half_start(len: usize) -> usize {
    len / 2
}

/// [`fit_loglog`] restricted to the finest half of the sweep.
pub fn fit_finest_half(xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    let s = finest_half_start(xs.len()).min(xs.len().saturating_sub(2));
    fit_loglog(&xs[s..], &ys[s..])
}
