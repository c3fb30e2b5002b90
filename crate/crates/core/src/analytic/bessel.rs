use crate::error::{Error, Result};

const MIN_TERMS: usize = 12;
const MAX_TERMS: usize = 80;

/// Bessel function of the first kind, order one, by its power series
/// J₁(x) = Σ_k (−1)^k (x/2)^{2k+1} / (k! (k+1)!).
///
/// Supported for |x| < 10, where the alternating series loses at most a few
/// digits to cancellation.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() >= 10.0 {
        return Err(Error::BesselDomain(x));
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = term;
    for k in 0..MAX_TERMS {
        term *= -q / ((k + 1) as f64 * (k + 2) as f64);
        sum += term;
        if k + 2 >= MIN_TERMS && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}
