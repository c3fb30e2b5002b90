//! Numerical measurement of matching frequencies and sideband rates, and the
//! analytic-versus-numeric comparison tables.
//!
//! A measurement mirrors the experimental procedure: sweep the drive
//! frequency over a window, record an endpoint trace at each point, take the
//! frequency with the largest oscillation contrast, then record a longer
//! trace there and fit its oscillation frequency.

mod fit;

use serde::{Deserialize, Serialize};

pub use fit::{extract_rate, fit_cosine, FitResult, MAX_RMS_RATIO, MIN_AMPLITUDE};

use crate::analytic::{self, ModelVariant, RateBreakdown, SidebandKind};
use crate::error::{Error, Result};
use crate::evolve::{Propagator, SimOptions, TimeTrace};
use crate::model::{DriveConfig, SystemParams};

pub const DEFAULT_N_GRID: usize = 15;
pub const MIN_N_GRID: usize = 7;
/// Traces with a smaller peak-to-peak swing show no transition.
pub const MIN_CONTRAST: f64 = 0.05;
/// Qubit-friendly and cavity-friendly amplitudes per unit η, GHz.
pub const ETA_EPS_Q: f64 = 0.025;
pub const ETA_EPS_C: f64 = 0.317;
/// Cavity-friendly tone placement relative to f_c, GHz.
pub const DEFAULT_F_DC_OFFSET: f64 = -0.5;
/// Length used for traces when no rate estimate is available, ns.
const FALLBACK_SPAN_NS: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub n_grid: usize,
    /// Half-width of the first frequency window in GHz; `None` derives it
    /// from the analytic linewidth and the Full/RWA spread.
    pub half_window: Option<f64>,
    /// Second, narrower sweep around the first estimate.
    pub refine: bool,
    /// How many times the window may be moved when the peak sits on an edge.
    pub max_recentre: usize,
    /// Pulse lengths per chevron column.
    pub chevron_lengths: usize,
    /// Chevron columns span this many expected sideband periods.
    pub chevron_periods: f64,
    /// The rate trace spans this many periods...
    pub fit_periods: f64,
    /// ...with at least this many samples per period.
    pub points_per_period: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_grid: DEFAULT_N_GRID,
            half_window: None,
            refine: true,
            max_recentre: 4,
            chevron_lengths: 40,
            chevron_periods: 1.5,
            fit_periods: 3.0,
            points_per_period: 10,
        }
    }
}

impl SweepOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(Error::InvalidParameter {
                field,
                reason: reason.into(),
            })
        };
        if self.n_grid < MIN_N_GRID {
            return bad("n_grid", "must be at least 7");
        }
        if let Some(h) = self.half_window {
            if !(h.is_finite() && h > 0.0) {
                return bad("half_window", "must be finite and positive");
            }
        }
        if self.chevron_lengths < 3 {
            return bad("chevron_lengths", "must be at least 3");
        }
        if !(self.chevron_periods > 0.0 && self.chevron_periods.is_finite()) {
            return bad("chevron_periods", "must be finite and positive");
        }
        if !(self.fit_periods >= 1.5 && self.fit_periods.is_finite()) {
            return bad("fit_periods", "must be at least 1.5");
        }
        if self.points_per_period < 8 {
            return bad("points_per_period", "must be at least 8");
        }
        Ok(())
    }
}

/// Frequency window center ± half_width, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub center: f64,
    pub half_width: f64,
}

impl Window {
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let lo = self.center - self.half_width;
        let step = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).map(|i| lo + step * i as f64).collect()
    }
}

/// Chevron sweep over the swept drive frequency (f_d, or f_dq for bi).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub freqs: Vec<f64>,
    /// max − min of each endpoint trace.
    pub contrast: Vec<f64>,
    pub flat_lens: Vec<f64>,
    /// chevron[i][j]: observable at freqs[i] and flat_lens[j].
    pub chevron: Vec<Vec<f64>>,
    pub best_f: f64,
    pub refined: bool,
}

fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Endpoint traces over a frequency grid; the best frequency maximizes the
/// contrast, refined by a parabola through the top three grid points.
pub fn find_matching_frequency_numeric(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    window: Window,
    n_grid: usize,
    flat_lens: &[f64],
    sim: &SimOptions,
) -> Result<SweepResult> {
    if n_grid < MIN_N_GRID {
        return Err(Error::InvalidParameter {
            field: "n_grid",
            reason: format!("must be at least {MIN_N_GRID}, got {n_grid}"),
        });
    }
    if !(window.half_width > 0.0 && window.center - window.half_width > 0.0) {
        return Err(Error::InvalidParameter {
            field: "window",
            reason: format!(
                "{} ± {} GHz must be a positive frequency range",
                window.center, window.half_width
            ),
        });
    }
    let prop = Propagator::new(params, sim.n_fock)?;
    let freqs = window.grid(n_grid);
    let traces = map_ordered(&freqs, |&f| {
        let drive = template.with_swept_frequency(f);
        drive.validate()?;
        let dt = sim.dt_for(params, &drive);
        prop.endpoint_trace(&drive, kind, flat_lens, sim.edge_len, dt)
    });
    let chevron = traces
        .into_iter()
        .map(|t| t.map(|t| t.values()))
        .collect::<Result<Vec<_>>>()?;
    let contrast: Vec<f64> = chevron
        .iter()
        .map(|row| {
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .collect();

    let (imax, cmax) = contrast
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, c)| if c > acc.1 { (i, c) } else { acc });
    if cmax < MIN_CONTRAST {
        return Err(Error::NoTransitionFound { max_contrast: cmax });
    }
    if imax == 0 || imax == n_grid - 1 {
        return Err(Error::WindowTooNarrow {
            edge_f: freqs[imax],
        });
    }
    let step = freqs[1] - freqs[0];
    let (y0, y1, y2) = (contrast[imax - 1], contrast[imax], contrast[imax + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    let offset = if curvature < 0.0 {
        (0.5 * step * (y0 - y2) / curvature).clamp(-step, step)
    } else {
        0.0
    };
    let best_f = freqs[imax] + offset;
    Ok(SweepResult {
        freqs,
        contrast,
        flat_lens: flat_lens.to_vec(),
        chevron,
        best_f,
        refined: false,
    })
}

/// What the analytic model says about where to look and how fast to sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub window: Window,
    /// Expected sideband rate in GHz, if the model gives a usable one.
    pub rate: Option<f64>,
    pub full: Option<RateBreakdown>,
    pub rwa: Option<RateBreakdown>,
}

/// Window and rate estimate from the Full and RWA predictions. The rate is
/// the larger of |Ω_total| and |Ω^(0)| so that sampling errs on the fine side.
pub fn expectation(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    opts: &SweepOptions,
) -> Result<Expectation> {
    let full = analytic::predict(params, template, kind, ModelVariant::Full);
    let rwa = analytic::predict(params, template, kind, ModelVariant::Rwa);
    let primary = match (&full, &rwa) {
        (Ok(f), _) => f,
        (Err(_), Ok(r)) => r,
        (Err(e), Err(_)) => return Err(e.clone()),
    };
    let rate = primary.total_abs.max(primary.omega0.abs());
    let rate = (rate > 1e-7).then_some(rate);
    // sweeping one tone by δ detunes the two-photon transition by 2δ (mono) or δ (bi)
    let hwhm = match template {
        DriveConfig::Mono { .. } => rate.unwrap_or(0.0) / 2.0,
        DriveConfig::Bi { .. } => rate.unwrap_or(0.0),
    };
    let spread = match (&full, &rwa) {
        (Ok(f), Ok(r)) => (f.matching_f - r.matching_f).abs(),
        _ => 0.0,
    };
    let half_width = opts
        .half_window
        .unwrap_or_else(|| (3.0 * hwhm).max(1.5 * spread).max(1e-4));
    Ok(Expectation {
        window: Window {
            center: primary.matching_f,
            half_width,
        },
        rate,
        full: full.ok(),
        rwa: rwa.ok(),
    })
}

fn even_lengths(span: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
}

/// Chevron search with automatic window moves and the optional refinement.
pub fn locate(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    exp: &Expectation,
    opts: &SweepOptions,
    sim: &SimOptions,
) -> Result<SweepResult> {
    opts.validate()?;
    let span = exp
        .rate
        .map_or(FALLBACK_SPAN_NS, |r| opts.chevron_periods / r);
    let lens = even_lengths(span, opts.chevron_lengths);
    let search = |mut window: Window| -> Result<SweepResult> {
        let mut moves = 0;
        loop {
            match find_matching_frequency_numeric(
                params, template, kind, window, opts.n_grid, &lens, sim,
            ) {
                Err(Error::WindowTooNarrow { edge_f }) if moves < opts.max_recentre => {
                    moves += 1;
                    window.center = edge_f;
                }
                other => return other,
            }
        }
    };
    let coarse = search(exp.window)?;
    if !opts.refine {
        return Ok(coarse);
    }
    let step = coarse.freqs[1] - coarse.freqs[0];
    let mut fine = search(Window {
        center: coarse.best_f,
        half_width: 2.0 * step,
    })?;
    fine.refined = true;
    Ok(fine)
}

/// A located resonance and the rate fitted there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub sweep: SweepResult,
    pub trace: TimeTrace,
    pub fit: FitResult,
}

/// Pulse lengths spanning `opts.fit_periods` periods of `rate`.
pub fn rate_lengths(rate: f64, opts: &SweepOptions) -> Vec<f64> {
    let n = (opts.fit_periods * opts.points_per_period as f64).ceil() as usize + 1;
    even_lengths(opts.fit_periods / rate, n)
}

/// Endpoint trace at a fixed drive and its fitted rate. The length grid is
/// redrawn once from the fitted rate when the first guess under-covers.
pub fn measure_rate(
    params: &SystemParams,
    drive: &DriveConfig,
    kind: SidebandKind,
    rate_guess: Option<f64>,
    opts: &SweepOptions,
    sim: &SimOptions,
) -> Result<(TimeTrace, FitResult)> {
    let prop = Propagator::new(params, sim.n_fock)?;
    let dt = sim.dt_for(params, drive);
    let run = |lens: &[f64]| -> Result<(TimeTrace, FitResult)> {
        let trace = prop.endpoint_trace(drive, kind, lens, sim.edge_len, dt)?;
        let fit = extract_rate(&trace)?;
        Ok((trace, fit))
    };
    let lens = match rate_guess {
        Some(r) => rate_lengths(r, opts),
        None => even_lengths(FALLBACK_SPAN_NS, 41),
    };
    let (trace, fit) = run(&lens)?;
    let span = lens[lens.len() - 1];
    let periods = fit.omega_sb * span;
    let per_period = (lens.len() - 1) as f64 / periods;
    let tolerance = 0.9;
    if periods < tolerance * opts.fit_periods || per_period < opts.points_per_period as f64 {
        return run(&rate_lengths(fit.omega_sb, opts));
    }
    Ok((trace, fit))
}

/// Full numeric measurement: locate the resonance, then fit the rate there.
pub fn measure(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    opts: &SweepOptions,
    sim: &SimOptions,
) -> Result<Measurement> {
    let exp = expectation(params, template, kind, opts)?;
    let sweep = locate(params, template, kind, &exp, opts, sim)?;
    let drive = template.with_swept_frequency(sweep.best_f);
    let (trace, fit) = measure_rate(params, &drive, kind, exp.rate, opts, sim)?;
    Ok(Measurement { sweep, trace, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveFamily {
    Mono { eps: f64 },
    /// ε_dq = η·25 MHz, ε_dc = η·317 MHz, f_dc = f_c + f_dc_offset.
    Bi { eta: f64, f_dc_offset: f64 },
}

impl DriveFamily {
    /// Drive with a placeholder swept frequency; the matching solver or the
    /// sweep sets the real one.
    pub fn template(&self, params: &SystemParams) -> DriveConfig {
        match *self {
            DriveFamily::Mono { eps } => DriveConfig::mono(eps, 1.0),
            DriveFamily::Bi { eta, f_dc_offset } => DriveConfig::bi(
                eta * ETA_EPS_Q,
                1.0,
                eta * ETA_EPS_C,
                params.f_c + f_dc_offset,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVariable {
    Eps,
    Eta,
    G,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub params: SystemParams,
    pub family: DriveFamily,
    pub kind: SidebandKind,
    pub variable: ScanVariable,
    pub values: Vec<f64>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidParameter {
                field: "scan",
                reason,
            })
        };
        match (self.variable, &self.family) {
            (ScanVariable::Eps, DriveFamily::Bi { .. }) => {
                return bad("an eps scan needs a monochromatic drive".into())
            }
            (ScanVariable::Eta, DriveFamily::Mono { .. }) => {
                return bad("an eta scan needs a bichromatic drive".into())
            }
            _ => {}
        }
        if self.values.is_empty() {
            return bad("no scan values given".into());
        }
        if let Some(v) = self.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return bad(format!("scan values must be finite and positive, got {v}"));
        }
        for &v in &self.values {
            let (p, d) = self.point(v);
            p.validate()?;
            d.validate()?;
        }
        Ok(())
    }

    /// System and drive template at one scan value.
    pub fn point(&self, value: f64) -> (SystemParams, DriveConfig) {
        let mut params = self.params;
        let family = match (self.variable, self.family) {
            (ScanVariable::Eps, DriveFamily::Mono { .. }) => DriveFamily::Mono { eps: value },
            (ScanVariable::Eta, DriveFamily::Bi { f_dc_offset, .. }) => DriveFamily::Bi {
                eta: value,
                f_dc_offset,
            },
            (ScanVariable::G, family) => {
                params.g = value;
                family
            }
            (_, family) => family,
        };
        (params, family.template(&params))
    }
}

/// One line of an analytic-versus-numeric comparison. Rates are magnitudes
/// in MHz; missing values mean that stage failed (see `status`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scan_var: f64,
    #[serde(rename = "numeric_matching_GHz")]
    pub numeric_matching_ghz: Option<f64>,
    #[serde(rename = "numeric_rate_MHz")]
    pub numeric_rate_mhz: Option<f64>,
    #[serde(rename = "full_total_MHz")]
    pub full_total_mhz: Option<f64>,
    #[serde(rename = "full_omega0_MHz")]
    pub full_omega0_mhz: Option<f64>,
    #[serde(rename = "rwa_total_MHz")]
    pub rwa_total_mhz: Option<f64>,
    #[serde(rename = "rwa_omega0_MHz")]
    pub rwa_omega0_mhz: Option<f64>,
    #[serde(rename = "full_matching_GHz")]
    pub full_matching_ghz: Option<f64>,
    #[serde(rename = "rwa_matching_GHz")]
    pub rwa_matching_ghz: Option<f64>,
    pub status: String,
}

/// Analytic Full and RWA predictions plus the numeric measurement for every
/// scan value, in scan order. Failures are recorded per row.
pub fn compare_models(
    scan: &ScanSpec,
    opts: &SweepOptions,
    sim: &SimOptions,
) -> Result<Vec<ComparisonRow>> {
    scan.validate()?;
    opts.validate()?;
    Ok(scan
        .values
        .iter()
        .map(|&v| comparison_row(scan, v, opts, sim))
        .collect())
}

/// Analytic columns only, for every scan value in order; numeric fields stay empty.
pub fn compare_analytic(scan: &ScanSpec) -> Result<Vec<ComparisonRow>> {
    scan.validate()?;
    Ok(scan
        .values
        .iter()
        .map(|&v| {
            let (params, template) = scan.point(v);
            let (mut row, problems) = analytic_row(&params, &template, scan.kind, v);
            row.status = status_text(&problems);
            row
        })
        .collect())
}

/// Row with the analytic columns filled; the second value is the list of
/// problems met so far.
fn analytic_row(
    params: &SystemParams,
    template: &DriveConfig,
    kind: SidebandKind,
    value: f64,
) -> (ComparisonRow, Vec<String>) {
    let mut problems = Vec::new();
    let mut analytic = |variant: ModelVariant| {
        match analytic::predict(params, template, kind, variant) {
            Ok(r) => Some(r),
            Err(e) => {
                problems.push(format!("{variant}: {e}"));
                None
            }
        }
    };
    let full = analytic(ModelVariant::Full);
    let rwa = analytic(ModelVariant::Rwa);
    let mhz = |x: f64| x.abs() * 1e3;
    let row = ComparisonRow {
        scan_var: value,
        numeric_matching_ghz: None,
        numeric_rate_mhz: None,
        full_total_mhz: full.as_ref().map(|r| mhz(r.total)),
        full_omega0_mhz: full.as_ref().map(|r| mhz(r.omega0)),
        rwa_total_mhz: rwa.as_ref().map(|r| mhz(r.total)),
        rwa_omega0_mhz: rwa.as_ref().map(|r| mhz(r.omega0)),
        full_matching_ghz: full.as_ref().map(|r| r.matching_f),
        rwa_matching_ghz: rwa.as_ref().map(|r| r.matching_f),
        status: String::new(),
    };
    (row, problems)
}

fn comparison_row(
    scan: &ScanSpec,
    value: f64,
    opts: &SweepOptions,
    sim: &SimOptions,
) -> ComparisonRow {
    let (params, template) = scan.point(value);
    let (mut row, mut problems) = analytic_row(&params, &template, scan.kind, value);
    match measure(&params, &template, scan.kind, opts, sim) {
        Ok(m) => {
            row.numeric_matching_ghz = Some(m.sweep.best_f);
            row.numeric_rate_mhz = Some(m.fit.omega_sb * 1e3);
        }
        Err(e) => problems.push(format!("numeric: {e}")),
    }
    row.status = status_text(&problems);
    row
}

fn status_text(problems: &[String]) -> String {
    if problems.is_empty() {
        "ok".into()
    } else {
        problems.join("; ")
    }
}
