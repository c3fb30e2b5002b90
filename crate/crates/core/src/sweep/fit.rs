use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::TimeTrace;

/// Half peak-to-peak below which a trace counts as flat.
pub const MIN_AMPLITUDE: f64 = 0.05;
/// Accepted fits have rms residual below this fraction of the amplitude.
pub const MAX_RMS_RATIO: f64 = 0.15;

const OVERSAMPLE: f64 = 16.0;
const MAX_ITER: usize = 200;
/// Cap on periodogram frequencies for very long inputs.
const MAX_GRID: f64 = 20_000.0;

/// A·cos(2π f t + φ) + C fitted to an endpoint trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    /// Fitted frequency f in GHz (Ω_sb/2π).
    pub omega_sb: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub phase: f64,
    pub rms: f64,
}

impl FitResult {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.omega_sb * t + self.phase).cos() + self.offset
    }
}

/// Sideband rate from an endpoint trace.
pub fn extract_rate(trace: &TimeTrace) -> Result<FitResult> {
    fit_cosine(&trace.times(), &trace.values())
}

/// Least-squares cosine fit: periodogram seed, then Levenberg–Marquardt on
/// (A, f, φ, C). Times in ns, so the frequency comes out in GHz.
pub fn fit_cosine(t: &[f64], y: &[f64]) -> Result<FitResult> {
    if t.len() != y.len() || t.len() < 5 {
        return Err(Error::InvalidParameter {
            field: "trace",
            reason: format!("need at least 5 paired samples, got {}/{}", t.len(), y.len()),
        });
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let half_range = 0.5 * (hi - lo);
    if !(half_range >= MIN_AMPLITUDE) {
        return Err(Error::NoOscillation {
            amplitude: half_range,
        });
    }

    let f0 = periodogram_peak(t, y);
    let (a, b, c) = linear_fit(t, y, f0);
    let mut p = Vector4::new(a.hypot(b), f0, (-b).atan2(a), c);
    let mut cost = rss(t, y, &p);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITER {
        let (jtj, jtr) = normal_equations(t, y, &p);
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            break;
        };
        let trial = p + step;
        let trial_cost = rss(t, y, &trial);
        if trial_cost < cost {
            let converged = (cost - trial_cost) <= 1e-15 * cost.max(1e-300)
                || step.abs().max() <= 1e-14 * p.abs().max();
            p = trial;
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let (mut amp, mut freq, mut phase) = (p[0], p[1], p[2]);
    if amp < 0.0 {
        amp = -amp;
        phase += PI;
    }
    if freq < 0.0 {
        freq = -freq;
        phase = -phase;
    }
    phase = (phase + PI).rem_euclid(TAU) - PI;
    let rms = (cost / t.len() as f64).sqrt();
    if !(rms < MAX_RMS_RATIO * amp) || freq == 0.0 {
        return Err(Error::PoorFit {
            rms,
            amplitude: amp,
            frequency_ghz: freq,
        });
    }
    Ok(FitResult {
        omega_sb: freq,
        amplitude: amp,
        offset: p[3],
        phase,
        rms,
    })
}

/// Strongest component of the mean-removed samples on a frequency grid
/// from a quarter cycle per span up to the mean-spacing Nyquist limit.
fn periodogram_peak(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len();
    let span = t[n - 1] - t[0];
    let mean = y.iter().sum::<f64>() / n as f64;
    let nyquist = 0.5 * (n - 1) as f64 / span;
    let df = (1.0 / (OVERSAMPLE * span)).max(nyquist / MAX_GRID);
    let mut best = (0.0, 0.25 / span);
    let mut f = 0.25 / span;
    while f <= nyquist {
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let (s, c) = (TAU * f * ti).sin_cos();
            re += (yi - mean) * c;
            im += (yi - mean) * s;
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, f);
        }
        f += df;
    }
    best.1
}

/// Linear least squares for y ≈ a cos ωt + b sin ωt + c at fixed f.
fn linear_fit(t: &[f64], y: &[f64], f: f64) -> (f64, f64, f64) {
    let mut m = Matrix3::zeros();
    let mut v = Vector3::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let (s, c) = (TAU * f * ti).sin_cos();
        let row = Vector3::new(c, s, 1.0);
        m += row * row.transpose();
        v += row * yi;
    }
    match m.lu().solve(&v) {
        Some(x) => (x[0], x[1], x[2]),
        None => (0.0, 0.0, v[2] / t.len() as f64),
    }
}

fn model(p: &Vector4<f64>, t: f64) -> f64 {
    p[0] * (TAU * p[1] * t + p[2]).cos() + p[3]
}

fn rss(t: &[f64], y: &[f64], p: &Vector4<f64>) -> f64 {
    t.iter().zip(y).map(|(&ti, &yi)| (yi - model(p, ti)).powi(2)).sum()
}

fn normal_equations(t: &[f64], y: &[f64], p: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for (&ti, &yi) in t.iter().zip(y) {
        let theta = TAU * p[1] * ti + p[2];
        let (s, c) = theta.sin_cos();
        let j = Vector4::new(c, -p[0] * s * TAU * ti, -p[0] * s, 1.0);
        let r = yi - (p[0] * c + p[3]);
        jtj += j * j.transpose();
        jtr += j * r;
    }
    (jtj, jtr)
}
