use serde::Serialize;

use crate::error::{Error, Result};

/// Standard normal quantile for a two-sided 90% interval.
pub const Z_90: f64 = 1.645;

/// Pointwise mean ± z·s/√n across runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Pointwise confidence band over equal-length traces, using the sample
/// standard deviation (n − 1 denominator).
pub fn confidence_band(traces: &[Vec<f64>], z: f64) -> Result<Band> {
    if traces.len() < 2 {
        return Err(Error::TooFewTraces {
            needed: 2,
            got: traces.len(),
        });
    }
    let len = traces[0].len();
    if let Some(bad) = traces.iter().find(|t| t.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let n = traces.len() as f64;
    let mut band = Band {
        mean: Vec::with_capacity(len),
        lo: Vec::with_capacity(len),
        hi: Vec::with_capacity(len),
    };
    for i in 0..len {
        let mean = traces.iter().map(|t| t[i]).sum::<f64>() / n;
        let var = traces.iter().map(|t| (t[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let half = z * var.sqrt() / n.sqrt();
        band.mean.push(mean);
        band.lo.push(mean - half);
        band.hi.push(mean + half);
    }
    Ok(band)
}
