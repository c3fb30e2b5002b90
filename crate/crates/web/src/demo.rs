use qrm_sideband::analytic::{self, ModelVariant, SidebandKind};
use qrm_sideband::evolve::{endpoint_observable_with, SimOptions};
use qrm_sideband::model::{DriveConfig, SystemParams};
use qrm_sideband::{Error, Result};
use serde::Serialize;

/// Cap on the work one call may request, so the page stays responsive.
const MAX_POINTS: usize = 400;
const DEMO_N_FOCK: usize = 5;

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParameter { field, reason }
}

pub fn kind(s: &str) -> Result<SidebandKind> {
    match s {
        "red" => Ok(SidebandKind::Red),
        "blue" => Ok(SidebandKind::Blue),
        other => Err(invalid("kind", format!("expected red or blue, got {other:?}"))),
    }
}

pub fn system(f_q: f64, f_c: f64, g: f64) -> Result<SystemParams> {
    SystemParams::new(f_q, f_c, g)
}

fn count(field: &'static str, n: usize, min: usize) -> Result<()> {
    if (min..=MAX_POINTS).contains(&n) {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in {min}..={MAX_POINTS}, got {n}")))
    }
}

fn sim() -> SimOptions {
    SimOptions {
        n_fock: DEMO_N_FOCK,
        ..SimOptions::default()
    }
}

#[derive(Debug, Serialize)]
pub struct RateCurve {
    pub eps: Vec<f64>,
    pub full_total_mhz: Vec<Option<f64>>,
    pub rwa_total_mhz: Vec<Option<f64>>,
    pub full_matching_ghz: Vec<Option<f64>>,
    pub rwa_matching_ghz: Vec<Option<f64>>,
}

/// Signed second-order rates for ε on an even grid in (0, eps_max]. Points
/// where a model has no solution are `null`.
pub fn rate_curve(kind: SidebandKind, sys: &SystemParams, eps_max: f64, points: usize) -> Result<RateCurve> {
    count("points", points, 2)?;
    if !(eps_max.is_finite() && eps_max > 0.0) {
        return Err(invalid("eps_max", format!("must be finite and positive, got {eps_max}")));
    }
    let mut out = RateCurve {
        eps: Vec::with_capacity(points),
        full_total_mhz: Vec::with_capacity(points),
        rwa_total_mhz: Vec::with_capacity(points),
        full_matching_ghz: Vec::with_capacity(points),
        rwa_matching_ghz: Vec::with_capacity(points),
    };
    for i in 1..=points {
        let eps = eps_max * i as f64 / points as f64;
        let drive = DriveConfig::mono(eps, 1.0);
        let full = analytic::predict(sys, &drive, kind, ModelVariant::Full).ok();
        let rwa = analytic::predict(sys, &drive, kind, ModelVariant::Rwa).ok();
        out.eps.push(eps);
        out.full_total_mhz.push(full.as_ref().map(|r| r.total * 1e3));
        out.rwa_total_mhz.push(rwa.as_ref().map(|r| r.total * 1e3));
        out.full_matching_ghz.push(full.map(|r| r.matching_f));
        out.rwa_matching_ghz.push(rwa.map(|r| r.matching_f));
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct Trace {
    pub f_d: f64,
    pub flat_len_ns: Vec<f64>,
    pub observable: Vec<f64>,
}

pub fn endpoint_trace(
    kind: SidebandKind,
    sys: &SystemParams,
    eps: f64,
    f_d: Option<f64>,
    max_len: f64,
    points: usize,
) -> Result<Trace> {
    count("points", points, 2)?;
    if !(max_len.is_finite() && max_len > 0.0) {
        return Err(invalid("max_len", format!("must be finite and positive, got {max_len}")));
    }
    let f_d = match f_d {
        Some(f) => f,
        None => analytic::predict(sys, &DriveConfig::mono(eps, 1.0), kind, ModelVariant::Full)?.matching_f,
    };
    let drive = DriveConfig::mono(eps, f_d);
    let lens: Vec<f64> = (0..points)
        .map(|i| max_len * i as f64 / (points - 1) as f64)
        .collect();
    let trace = endpoint_observable_with(sys, &drive, kind, &lens, &sim())?;
    Ok(Trace {
        f_d,
        flat_len_ns: trace.times(),
        observable: trace.values(),
    })
}

#[derive(Debug, Serialize)]
pub struct Chevron {
    pub freqs_ghz: Vec<f64>,
    pub flat_len_ns: Vec<f64>,
    /// `grid[i][j]`: observable at frequency i and length j.
    pub grid: Vec<Vec<f64>>,
}

/// Endpoint map over frequency and length. The length axis spans 1.5 periods
/// of the predicted rate; `half_width` is in GHz.
pub fn chevron(
    kind: SidebandKind,
    sys: &SystemParams,
    eps: f64,
    half_width: f64,
    n_freq: usize,
    n_len: usize,
) -> Result<Chevron> {
    count("n_freq", n_freq, 2)?;
    count("n_len", n_len, 2)?;
    if n_freq * n_len > 20 * MAX_POINTS {
        return Err(invalid("n_freq", format!("{n_freq}×{n_len} grid is too large")));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(invalid("half_width", format!("must be finite and positive, got {half_width}")));
    }
    let pred = analytic::predict(sys, &DriveConfig::mono(eps, 1.0), kind, ModelVariant::Full)?;
    if pred.total_abs < 1e-7 {
        return Err(Error::NoTransitionFound { max_contrast: 0.0 });
    }
    let span = 1.5 / pred.total_abs;
    let lens: Vec<f64> = (0..n_len)
        .map(|j| span * j as f64 / (n_len - 1) as f64)
        .collect();
    let freqs: Vec<f64> = (0..n_freq)
        .map(|i| pred.matching_f - half_width + 2.0 * half_width * i as f64 / (n_freq - 1) as f64)
        .collect();
    let grid = freqs
        .iter()
        .map(|&f| {
            endpoint_observable_with(sys, &DriveConfig::mono(eps, f), kind, &lens, &sim())
                .map(|t| t.values())
        })
        .collect::<Result<_>>()?;
    Ok(Chevron {
        freqs_ghz: freqs,
        flat_len_ns: lens,
        grid,
    })
}
