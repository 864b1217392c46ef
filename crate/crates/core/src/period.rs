//! Dominant period of a uniformly sampled series from its autocorrelation.

use serde::Serialize;

/// Minimum autocorrelation at the detected lag for a period to count.
pub const MIN_CORRELATION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    /// One sample step.
    pub uncertainty: f64,
    /// Normalized autocorrelation at the detected lag.
    pub correlation: f64,
}

/// Unbiased, variance-normalized autocorrelation for lags `0..max_lag`.
pub fn autocorrelation(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    (0..max_lag.min(n))
        .map(|lag| {
            if var == 0.0 {
                return 0.0;
            }
            let cov = centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / (n - lag) as f64;
            cov / var
        })
        .collect()
}

/// Period from the first autocorrelation maximum after the first zero
/// crossing, refined by a parabola through the neighbouring lags. Returns
/// `None` for flat series or when no sufficiently strong peak exists.
pub fn estimate_period(values: &[f64], step: f64) -> Option<PeriodEstimate> {
    let n = values.len();
    if n < 4 {
        return None;
    }
    // lags beyond two thirds of the record rest on too few products
    let acf = autocorrelation(values, (2 * n) / 3 + 1);
    let first_negative = acf.iter().position(|&c| c < 0.0)?;
    let mut best: Option<usize> = None;
    for lag in first_negative.max(1)..acf.len().saturating_sub(1) {
        if acf[lag] >= acf[lag - 1] && acf[lag] >= acf[lag + 1] && acf[lag] > 0.0 {
            best = Some(lag);
            break;
        }
    }
    let lag = best?;
    if acf[lag] < MIN_CORRELATION {
        return None;
    }
    let (a, b, c) = (acf[lag - 1], acf[lag], acf[lag + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom.abs() > 1e-300 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Some(PeriodEstimate {
        period: (lag as f64 + offset) * step,
        uncertainty: step,
        correlation: b,
    })
}
