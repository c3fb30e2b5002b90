use qrm_sideband::analytic::{self, ModelVariant, RateBreakdown};
use qrm_sideband::evolve::{self, sideband_levels, Propagator, QuantumState, TimeTrace};
use qrm_sideband::model::PulseSpec;
use qrm_sideband::sweep::{self, ComparisonRow, FitResult};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{num, opt, Sink};
use crate::CliError;

const ROW_HEADER: [&str; 10] = [
    "scan_var",
    "numeric_matching_GHz",
    "numeric_rate_MHz",
    "full_total_MHz",
    "full_omega0_MHz",
    "rwa_total_MHz",
    "rwa_omega0_MHz",
    "full_matching_GHz",
    "rwa_matching_GHz",
    "status",
];

/// Pulse lengths spanning this many expected periods when none are given.
const EVOLVE_PERIODS: f64 = 3.0;
const FALLBACK_MAX_LEN_NS: f64 = 200.0;

fn row_cells(r: &ComparisonRow) -> Vec<String> {
    vec![
        num(r.scan_var),
        opt(r.numeric_matching_ghz),
        opt(r.numeric_rate_mhz),
        opt(r.full_total_mhz),
        opt(r.full_omega0_mhz),
        opt(r.rwa_total_mhz),
        opt(r.rwa_omega0_mhz),
        opt(r.full_matching_ghz),
        opt(r.rwa_matching_ghz),
        r.status.clone(),
    ]
}

/// Comparison rows for the configured scan, written as `<stem>.csv/json`.
pub fn table(c: &RunConfig, sink: &mut Sink, stem: &str, analytic_only: bool) -> Result<(), CliError> {
    let spec = c
        .scan_spec()
        .ok_or_else(|| CliError::Config("a [scan] section or --scan is required".into()))?;
    let rows = if analytic_only {
        sweep::compare_analytic(&spec)?
    } else {
        sweep::compare_models(&spec, &c.sweep, &c.simulation)?
    };
    let cells: Vec<_> = rows.iter().map(row_cells).collect();
    sink.csv(stem, &ROW_HEADER, &cells)?;
    #[derive(Serialize)]
    struct Doc<'a> {
        rows: &'a [ComparisonRow],
    }
    sink.json(stem, &Doc { rows: &rows })
}

#[derive(Serialize)]
struct Prediction {
    #[serde(rename = "dispersive_shift_GHz")]
    dispersive_shift_ghz: f64,
    full: RateBreakdown,
    rwa: RateBreakdown,
}

pub fn predict(c: &RunConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    if c.scan.is_some() {
        return table(c, sink, stem, true);
    }
    let template = c.drive.template(&c.system);
    let full = analytic::predict(&c.system, &template, c.kind, ModelVariant::Full)?;
    let rwa = analytic::predict(&c.system, &template, c.kind, ModelVariant::Rwa)?;
    let header = [
        "variant",
        "matching_GHz",
        "omega0_MHz",
        "omega1_MHz",
        "total_MHz",
        "qubit_shift_GHz",
        "eps_m_GHz",
    ];
    let rows: Vec<Vec<String>> = [&full, &rwa]
        .iter()
        .map(|r| {
            vec![
                r.variant.to_string(),
                num(r.matching_f),
                num(r.omega0 * 1e3),
                num(r.omega1 * 1e3),
                num(r.total * 1e3),
                num(r.delta_wq),
                num(r.eps_m),
            ]
        })
        .collect();
    sink.csv(stem, &header, &rows)?;
    let doc = Prediction {
        dispersive_shift_ghz: analytic::dispersive_shift(&c.system)?,
        full,
        rwa,
    };
    sink.json(stem, &doc)
}

#[derive(Serialize)]
struct EvolveDoc<'a> {
    #[serde(rename = "f_d_GHz")]
    f_d_ghz: f64,
    dt_ns: f64,
    trace: &'a TimeTrace,
    fit: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
    #[serde(rename = "rate_MHz")]
    rate_mhz: Option<f64>,
}

/// Endpoint trace at one drive frequency (`<stem>_endpoint.csv`), its fit
/// (`<stem>.json`) and optionally the dense trajectory of the longest pulse.
pub fn evolve(c: &RunConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let template = c.drive.template(&c.system);
    let full = analytic::predict(&c.system, &template, c.kind, ModelVariant::Full).ok();
    let f_d = match (c.evolve.f_d, &full) {
        (Some(f), _) => f,
        (None, Some(r)) => r.matching_f,
        (None, None) => {
            // surfaces the analytic failure
            analytic::predict(&c.system, &template, c.kind, ModelVariant::Full)?.matching_f
        }
    };
    let drive = template.with_swept_frequency(f_d);
    drive.validate()?;
    let max_len = c.evolve.max_len.unwrap_or_else(|| {
        full.as_ref()
            .map(|r| r.total_abs.max(r.omega0.abs()))
            .filter(|&r| r > 1e-7)
            .map_or(FALLBACK_MAX_LEN_NS, |r| EVOLVE_PERIODS / r)
    });
    let n = c.evolve.points;
    let lens: Vec<f64> = (0..n).map(|i| max_len * i as f64 / (n - 1) as f64).collect();
    let sim = &c.simulation;
    let dt = sim.dt_for(&c.system, &drive);
    let trace = evolve::endpoint_observable_with(&c.system, &drive, c.kind, &lens, sim)?;
    let (fit, fit_error) = match sweep::extract_rate(&trace) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let rows: Vec<_> = trace
        .points
        .iter()
        .map(|p| vec![num(p.flat_len), num(p.observable)])
        .collect();
    sink.csv(&format!("{stem}_endpoint"), &["flat_len_ns", "observable"], &rows)?;

    if c.evolve.dense {
        let prop = Propagator::new(&c.system, sim.n_fock)?;
        let (from, _) = sideband_levels(c.kind);
        let start = QuantumState::dressed(prop.basis(), from).ok_or_else(|| {
            CliError::Config("simulation.n_fock: initial level is not in the truncated space".into())
        })?;
        let pulse = PulseSpec::new(max_len, sim.edge_len)?;
        let (_, points) =
            prop.propagate_dense(&drive, &pulse, &start, dt, c.kind, c.evolve.sample_every)?;
        let rows: Vec<_> = points
            .iter()
            .map(|p| vec![num(p.t_ns), num(p.observable), num(p.norm)])
            .collect();
        sink.csv(&format!("{stem}_trajectory"), &["t_ns", "observable", "norm"], &rows)?;
    }
    let rate_mhz = fit.as_ref().map(|f| f.omega_sb * 1e3);
    sink.json(
        stem,
        &EvolveDoc {
            f_d_ghz: f_d,
            dt_ns: dt,
            trace: &trace,
            fit,
            fit_error,
            rate_mhz,
        },
    )
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    #[serde(rename = "best_f_GHz")]
    best_f_ghz: f64,
    refined: bool,
    #[serde(rename = "freqs_GHz")]
    freqs_ghz: &'a [f64],
    contrast: &'a [f64],
    #[serde(rename = "rate_MHz")]
    rate_mhz: f64,
    fit: &'a FitResult,
    full: Option<RateBreakdown>,
    rwa: Option<RateBreakdown>,
}

/// Chevron search and rate fit (`<stem>_chevron.csv`, `<stem>_rate.csv`,
/// `<stem>.json`), or the comparison table when a scan is configured.
pub fn sweep(c: &RunConfig, sink: &mut Sink, stem: &str, analytic_only: bool) -> Result<(), CliError> {
    if c.scan.is_some() {
        return table(c, sink, stem, analytic_only);
    }
    let template = c.drive.template(&c.system);
    let exp = sweep::expectation(&c.system, &template, c.kind, &c.sweep)?;
    let located = sweep::locate(&c.system, &template, c.kind, &exp, &c.sweep, &c.simulation)?;
    let drive = template.with_swept_frequency(located.best_f);
    let (trace, fit) =
        sweep::measure_rate(&c.system, &drive, c.kind, exp.rate, &c.sweep, &c.simulation)?;

    let mut chevron = Vec::with_capacity(located.freqs.len() * located.flat_lens.len());
    for (f, row) in located.freqs.iter().zip(&located.chevron) {
        for (len, v) in located.flat_lens.iter().zip(row) {
            chevron.push(vec![num(*f), num(*len), num(*v)]);
        }
    }
    sink.csv(&format!("{stem}_chevron"), &["f_GHz", "flat_len_ns", "observable"], &chevron)?;
    let rate: Vec<_> = trace
        .points
        .iter()
        .map(|p| vec![num(p.flat_len), num(p.observable)])
        .collect();
    sink.csv(&format!("{stem}_rate"), &["flat_len_ns", "observable"], &rate)?;
    sink.json(
        stem,
        &SweepDoc {
            best_f_ghz: located.best_f,
            refined: located.refined,
            freqs_ghz: &located.freqs,
            contrast: &located.contrast,
            rate_mhz: fit.omega_sb * 1e3,
            fit: &fit,
            full: exp.full,
            rwa: exp.rwa,
        },
    )
}
