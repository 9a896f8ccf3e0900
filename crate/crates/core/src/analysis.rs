//! Time-series helpers: recoherence peak picking, moving-average
//! detrending and least-squares slopes.

use crate::error::{Error, Result};

/// Rule for picking recoherence maxima out of a sampled envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRule {
    /// A peak must be the largest sample within `±half_window` (ps).
    pub half_window: f64,
    /// Peaks below `min_relative · values[0]` are ignored.
    pub min_relative: f64,
}

impl Default for PeakRule {
    fn default() -> Self {
        Self {
            half_window: 20.0,
            min_relative: 1e-3,
        }
    }
}

/// Times of the envelope maxima selected by `rule`. The first sample counts
/// when it dominates its window.
pub fn envelope_peaks(t: &[f64], values: &[f64], rule: PeakRule) -> Result<Vec<f64>> {
    if t.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: values.len(),
        });
    }
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let floor = rule.min_relative * values[0].abs();
    let mut peaks = Vec::new();
    let mut lo = 0;
    let mut hi = 0;
    for i in 0..t.len() {
        while t[i] - t[lo] > rule.half_window {
            lo += 1;
        }
        while hi + 1 < t.len() && t[hi + 1] - t[i] <= rule.half_window {
            hi += 1;
        }
        let v = values[i];
        if v < floor || (i > 0 && values[i - 1] >= v) {
            continue;
        }
        if (lo..=hi).all(|j| values[j] <= v) {
            peaks.push(t[i]);
        }
    }
    Ok(peaks)
}

/// Centered moving average of width `window` (ps), truncated at the ends.
pub fn moving_average(t: &[f64], values: &[f64], window: f64) -> Result<Vec<f64>> {
    if t.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: values.len(),
        });
    }
    let half = 0.5 * window;
    let mut prefix = vec![0.0; values.len() + 1];
    for (k, v) in values.iter().enumerate() {
        prefix[k + 1] = prefix[k] + v;
    }
    let mut out = Vec::with_capacity(values.len());
    let (mut lo, mut hi) = (0usize, 0usize);
    for i in 0..t.len() {
        while t[i] - t[lo] > half + 1e-12 {
            lo += 1;
        }
        while hi + 1 < t.len() && t[hi + 1] - t[i] <= half + 1e-12 {
            hi += 1;
        }
        out.push((prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64);
    }
    Ok(out)
}

/// Sample standard deviation of `values − moving_average(values)` over the
/// samples with `t ∈ [from, to]`.
pub fn detrended_std(t: &[f64], values: &[f64], window: f64, from: f64, to: f64) -> Result<f64> {
    let trend = moving_average(t, values, window)?;
    let resid: Vec<f64> = t
        .iter()
        .zip(values.iter().zip(&trend))
        .filter(|(&ti, _)| ti >= from && ti <= to)
        .map(|(_, (v, m))| v - m)
        .collect();
    sample_std(&resid)
}

pub fn sample_std(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InvalidGrid("need at least two samples".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Ok((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidGrid("slope needs two or more paired samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidGrid("slope needs distinct x values".into()));
    }
    Ok(sxy / sxx)
}
